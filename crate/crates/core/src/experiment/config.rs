//! Scenario configuration, read from TOML with dotted sections.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boundary::{BoundarySample, DEFAULT_TOL_MOEBIUS};
use crate::circumcenter::ExtendOptions;
use crate::conjugacy::DeformationPair;
use crate::error::{Error, Result};
use crate::hyperbolic::{from_origin, DiskPoint, IdealPoint};
use crate::manifold::{MetricField, PerturbedSpace, SolverSettings, TwistMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Trivial,
    PullbackTwist,
    ConformalBump,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scenario::Trivial => "trivial",
            Scenario::PullbackTwist => "pullback_twist",
            Scenario::ConformalBump => "conformal_bump",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub n: usize,
    /// Angle of the first sample point.
    pub offset: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { n: 64, offset: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwistConfig {
    pub center: [f64; 2],
    pub radius: f64,
    pub alpha0: f64,
    pub order: u32,
}

impl Default for TwistConfig {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            radius: 1.0,
            alpha0: 0.3,
            order: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BumpConfig {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
    pub order: u32,
}

impl Default for BumpConfig {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            radius: 1.0,
            amplitude: 0.2,
            order: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Side of the square probe grid.
    pub k: usize,
    /// Hyperbolic half-width of the grid around the support center.
    pub r_grid: f64,
    pub far_count: usize,
    /// Hyperbolic distance of the far probes from the support center.
    pub far_radius: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            k: 5,
            r_grid: 1.2,
            far_count: 4,
            far_radius: 2.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    pub tol_moebius: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            tol_moebius: DEFAULT_TOL_MOEBIUS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub amplitudes: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            amplitudes: vec![0.0, 0.05, 0.1, 0.2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub sample: SampleConfig,
    pub twist: TwistConfig,
    pub bump: BumpConfig,
    pub probes: ProbeConfig,
    pub solver: SolverSettings,
    pub circumcenter: ExtendOptions,
    pub gates: GateConfig,
    pub sweep: SweepConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::PullbackTwist,
            seed: 7,
            sample: SampleConfig::default(),
            twist: TwistConfig::default(),
            bump: BumpConfig::default(),
            probes: ProbeConfig::default(),
            solver: SolverSettings::default(),
            circumcenter: ExtendOptions::default(),
            gates: GateConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

fn disk_point(c: [f64; 2]) -> Result<DiskPoint> {
    DiskPoint::new(c[0], c[1]).map_err(|e| Error::Config(e.to_string()))
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.sample.n < 16 {
            return bad(format!("sample.n must be at least 16, got {}", self.sample.n));
        }
        for (name, r) in [("twist.radius", self.twist.radius), ("bump.radius", self.bump.radius)] {
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("{name} must be positive, got {r}"));
            }
        }
        if self.probes.k == 0 || !(self.probes.r_grid > 0.0) {
            return bad("probes.k and probes.r_grid must be positive".into());
        }
        disk_point(self.twist.center)?;
        disk_point(self.bump.center)?;
        Ok(())
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn support(&self) -> Result<(DiskPoint, f64)> {
        match self.scenario {
            Scenario::ConformalBump => Ok((disk_point(self.bump.center)?, self.bump.radius)),
            _ => Ok((disk_point(self.twist.center)?, self.twist.radius)),
        }
    }

    pub fn field(&self) -> Result<MetricField> {
        let (c, r) = self.support()?;
        Ok(match self.scenario {
            Scenario::Trivial => MetricField::pure(c, r),
            Scenario::PullbackTwist => build_twist(self)?.0,
            Scenario::ConformalBump => MetricField::conformal_bump(c, r, self.bump.amplitude, self.bump.order),
        })
    }

    /// The deformed space. Conformal bumps may break the curvature bound and
    /// are built without that check; the curvature range is reported instead.
    pub fn space(&self) -> Result<PerturbedSpace> {
        let f = self.field()?;
        match self.scenario {
            Scenario::ConformalBump => PerturbedSpace::new_unchecked(f, self.solver),
            _ => PerturbedSpace::new(f, self.solver),
        }
    }

    pub fn sample_with(&self, n: usize) -> Result<BoundarySample> {
        BoundarySample::uniform(n, self.sample.offset)
    }

    pub fn pair_with(&self, n: usize) -> Result<DeformationPair> {
        let (c, r) = self.support()?;
        let s0 = PerturbedSpace::new(MetricField::pure(c, r), self.solver)?;
        Ok(DeformationPair::new(s0, self.space()?, self.sample_with(n)?)?.with_tol_moebius(self.gates.tol_moebius))
    }

    pub fn pair(&self) -> Result<DeformationPair> {
        self.pair_with(self.sample.n)
    }

    /// The `k × k` grid around the support center.
    pub fn grid(&self) -> Result<Vec<DiskPoint>> {
        let (c, _) = self.support()?;
        let k = self.probes.k;
        let half = (0.5 * self.probes.r_grid).tanh() / std::f64::consts::SQRT_2;
        let coord = |i: usize| if k == 1 { 0.0 } else { half * (2.0 * i as f64 / (k - 1) as f64 - 1.0) };
        let mut pts = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let w = num_complex::Complex64::new(coord(i), coord(j));
                pts.push(DiskPoint::from_complex(from_origin(c.z(), w))?);
            }
        }
        Ok(pts)
    }

    /// Probes far from the support at seeded angles.
    pub fn far_points(&self) -> Result<Vec<DiskPoint>> {
        let (c, _) = self.support()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let start: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let n = self.probes.far_count;
        (0..n)
            .map(|i| {
                let a = start + std::f64::consts::TAU * i as f64 / n as f64;
                let w = num_complex::Complex64::from_polar((0.5 * self.probes.far_radius).tanh(), a);
                DiskPoint::from_complex(from_origin(c.z(), w))
            })
            .collect()
    }

    pub fn probes(&self) -> Result<Vec<DiskPoint>> {
        let mut p = self.grid()?;
        p.extend(self.far_points()?);
        Ok(p)
    }

    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }
}

/// The pullback-twist field and its twist map `ψ` (with `dψ` via
/// [`TwistMap::jacobian`]).
pub fn build_twist(config: &ScenarioConfig) -> Result<(MetricField, TwistMap)> {
    let t = &config.twist;
    let f = MetricField::pullback_twist(disk_point(t.center)?, t.radius, t.alpha0, t.order);
    f.validate()?;
    let map = f.twist_map().expect("a twist field has a twist map");
    Ok((f, map))
}

/// Seeded ideal points, for suites that need random boundary data.
pub fn random_ideal(rng: &mut ChaCha8Rng) -> IdealPoint {
    IdealPoint::new(rng.gen_range(0.0..std::f64::consts::TAU))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_sections_parse() {
        let c = ScenarioConfig::from_toml(
            "scenario = \"trivial\"\nseed = 3\nsample.n = 32\ntwist.alpha0 = 0.1\n[gates]\ntol_moebius = 2e-3\n",
        )
        .unwrap();
        assert_eq!(c.scenario, Scenario::Trivial);
        assert_eq!(c.sample.n, 32);
        assert_eq!(c.twist.alpha0, 0.1);
        assert_eq!(c.gates.tol_moebius, 2e-3);
        assert_eq!(c.probes, ProbeConfig::default());
    }

    #[test]
    fn rejects_small_samples_and_unknown_keys() {
        assert!(ScenarioConfig::from_toml("sample.n = 8").is_err());
        assert!(ScenarioConfig::from_toml("twist.angle = 1.0").is_err());
    }

    #[test]
    fn round_trip_keeps_hash() {
        let c = ScenarioConfig::default();
        let back = ScenarioConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn twist_with_zero_angle_is_flat() {
        let mut c = ScenarioConfig::default();
        c.twist.alpha0 = 0.0;
        let (f, psi) = build_twist(&c).unwrap();
        let p = DiskPoint::new(0.1, -0.2).unwrap();
        assert_eq!(psi.psi(&p), p);
        let g = f.metric(&p);
        let l = p.conformal_factor();
        assert!((g[0] - l * l).abs() < 1e-12 && g[1].abs() < 1e-12);
    }

    #[test]
    fn probes_are_deterministic() {
        let c = ScenarioConfig::default();
        assert_eq!(c.probes().unwrap(), c.probes().unwrap());
        assert_eq!(c.probes().unwrap().len(), 29);
    }
}
