mod common;

use std::f64::consts::TAU;

use common::{c, d, ideal};
use moebius_rigidity::hyperbolic::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = C> {
    (0.0..0.95f64, 0.0..TAU).prop_map(|(r, a)| C::from_polar(r, a))
}

fn angle() -> impl Strategy<Value = f64> {
    0.0..TAU
}

proptest! {
    #[test]
    fn distance_matches_oracle(x in point(), y in point()) {
        let e = (h_distance(&d(x), &d(y)) - common::distance(x, y)).abs();
        prop_assert!(e <= 1e-9 * (1.0 + common::distance(x, y)));
    }

    #[test]
    fn busemann_matches_poisson_kernel(x in point(), y in point(), a in angle()) {
        let xi = common::boundary(a);
        let e = (h_busemann(&d(x), &d(y), &ideal(xi)) - common::busemann(x, y, xi)).abs();
        prop_assert!(e <= 1e-8);
    }

    #[test]
    fn busemann_is_bounded_and_a_cocycle(x in point(), y in point(), z in point(), a in angle()) {
        let xi = IdealPoint::new(a);
        let (x, y, z) = (d(x), d(y), d(z));
        prop_assert!(h_busemann(&x, &y, &xi).abs() <= h_distance(&x, &y) + 1e-9);
        let s = h_busemann(&x, &y, &xi) + h_busemann(&y, &z, &xi) - h_busemann(&x, &z, &xi);
        prop_assert!(s.abs() <= 1e-8);
    }

    #[test]
    fn visual_matches_oracle_and_is_a_metric(x in point(), a in angle(), b in angle(), e in angle()) {
        prop_assume!((a - b).abs() > 1e-6);
        let (xi, eta, zeta) = (IdealPoint::new(a), IdealPoint::new(b), IdealPoint::new(e));
        let x0 = d(x);
        let v = h_visual(&x0, &xi, &eta);
        prop_assert!((v - common::visual(x, xi.unit(), eta.unit())).abs() <= 1e-10);
        prop_assert!(v <= 1.0 + 1e-12);
        prop_assert!((v - h_visual(&x0, &eta, &xi)).abs() <= 1e-14);
        prop_assert!(v <= h_visual(&x0, &xi, &zeta) + h_visual(&x0, &zeta, &eta) + 1e-12);
        prop_assert!((h_gromov(&x0, &xi, &eta).unwrap() + v.ln()).abs() <= 1e-10);
    }

    #[test]
    fn visual_metrics_are_conformal_in_the_basepoint(x in point(), y in point(), a in angle(), b in angle()) {
        prop_assume!((a - b).abs() > 1e-3 && (TAU - (a - b).abs()) > 1e-3);
        let (xi, eta) = (IdealPoint::new(a), IdealPoint::new(b));
        // ρ_y² = ρ_x² · exp(B(x, y, ξ)) · exp(B(x, y, η))
        let lhs = h_visual(&d(y), &xi, &eta).powi(2);
        let rhs = h_visual(&d(x), &xi, &eta).powi(2)
            * (h_busemann(&d(x), &d(y), &xi) + h_busemann(&d(x), &d(y), &eta)).exp();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn involution_is_the_far_end(x in point(), a in angle()) {
        let xi = IdealPoint::new(a);
        let j = h_involution(&d(x), &xi);
        prop_assert!(h_involution(&d(x), &j).circular_distance(&xi) <= 1e-10);
        prop_assert!((h_visual(&d(x), &xi, &j) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn flow_matches_oracle(x in point(), th in angle(), t in -5.0..5.0f64) {
        let v = UnitTangent::pure_from_angle(d(x), th);
        let p = h_flow(&v, t).base;
        prop_assert!(common::distance(c(&p), common::flow_point(x, th, t)) <= 1e-8);
        prop_assert!((h_distance(&d(x), &p) - t.abs()).abs() <= 1e-8);
        prop_assert!((h_endpoint(&v).unit() - common::ray_endpoint(x, th)).norm() <= 1e-10);
    }

    #[test]
    fn ray_points_at_its_target(x in point(), a in angle(), t in 0.1..6.0f64) {
        let xi = IdealPoint::new(a);
        let v = h_ray(&d(x), &xi);
        prop_assert!(h_endpoint(&v).circular_distance(&xi) <= 1e-10);
        prop_assert!((v.pure_norm() - 1.0).abs() <= 1e-12);
        // the Busemann function grows at unit rate along the ray
        let p = h_geodesic_point(&d(x), &xi, t);
        prop_assert!((h_busemann(&d(x), &p, &xi) - t).abs() <= 1e-8);
    }

    #[test]
    fn log_inverts_flow(x in point(), y in point()) {
        prop_assume!(common::distance(x, y) > 1e-6);
        let (x0, y0) = (d(x), d(y));
        let w = h_log(&x0, &y0);
        let len = w.norm() * x0.conformal_factor();
        prop_assert!((len - h_distance(&x0, &y0)).abs() <= 1e-9);
        let p = h_flow(&UnitTangent::new(x0, w / len), len).base;
        prop_assert!(h_distance(&p, &y0) <= 1e-8);
    }

    #[test]
    fn line_distance_is_attained(cc in point(), a in angle(), b in angle()) {
        prop_assume!((a - b).abs() > 1e-3 && (TAU - (a - b).abs()) > 1e-3);
        let (xi, eta) = (IdealPoint::new(a), IdealPoint::new(b));
        let foot = h_line_closest(&d(cc), &xi, &eta);
        prop_assert!((h_distance(&d(cc), &foot.base) - h_line_distance(&d(cc), &xi, &eta)).abs() <= 1e-8);
        let ends = [h_endpoint(&foot), h_endpoint(&foot.reversed())];
        prop_assert!(ends.iter().any(|e| e.circular_distance(&xi) <= 1e-8));
        prop_assert!(ends.iter().any(|e| e.circular_distance(&eta) <= 1e-8));
    }

    #[test]
    fn moebius_charts_invert(a in point(), z in point()) {
        let w = to_origin(a, z);
        prop_assert!((from_origin(a, w) - z).norm() <= 1e-12);
        prop_assert!(to_origin(a, a).norm() <= 1e-15);
        prop_assert!((w - common::to_zero(a, z)).norm() <= 1e-12);
    }
}
