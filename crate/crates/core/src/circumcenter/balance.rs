//! Minimum-norm point of the convex hull of a few planar vectors.

use nalgebra::{DMatrix, DVector, Vector2};

const EPS: f64 = 1e-12;

/// Weights of the minimum-norm convex combination of `dirs` and its norm.
/// Wolfe's corral iteration; in the plane a corral has at most three atoms.
/// `weights[i]` belongs to `dirs[i]`.
pub fn caratheodory_balance(dirs: &[Vector2<f64>]) -> (Vec<f64>, f64) {
    let n = dirs.len();
    assert!(n > 0, "caratheodory_balance needs at least one direction");
    let start = (0..n)
        .min_by(|&a, &b| dirs[a].norm_squared().total_cmp(&dirs[b].norm_squared()))
        .unwrap();
    let mut corral: Vec<usize> = vec![start];
    let mut lambda: Vec<f64> = vec![1.0];
    let mut x = dirs[start];
    for _ in 0..(50 * n + 50) {
        let (j, v) = (0..n)
            .map(|j| (j, x.dot(&dirs[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if v >= x.norm_squared() - EPS * (1.0 + dirs[j].norm_squared()) || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);
        loop {
            let alpha = affine_min(dirs, &corral);
            if alpha.iter().all(|a| *a > EPS) {
                lambda = alpha;
                break;
            }
            let mut theta: f64 = 1.0;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= EPS && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l += theta * (a - *l);
            }
            let keep: Vec<bool> = lambda.iter().map(|l| *l > EPS).collect();
            let mut k = 0;
            corral.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            lambda.retain(|l| *l > EPS);
            if corral.len() == 1 {
                lambda = vec![1.0];
                break;
            }
        }
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|l| *l /= total);
        x = corral.iter().zip(&lambda).map(|(&i, l)| dirs[i] * *l).sum();
    }
    let mut weights = vec![0.0; n];
    for (&i, l) in corral.iter().zip(&lambda) {
        weights[i] = *l;
    }
    (weights, x.norm())
}

/// Weights of the minimum-norm point of the affine hull of the corral.
fn affine_min(dirs: &[Vector2<f64>], corral: &[usize]) -> Vec<f64> {
    let k = corral.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    for (a, &i) in corral.iter().enumerate() {
        for (b, &j) in corral.iter().enumerate() {
            m[(a, b)] = dirs[i].dot(&dirs[j]);
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    rhs[k] = 1.0;
    let sol = m
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| m.svd(true, true).solve(&rhs, 1e-14).expect("svd solve"));
    sol.rows(0, k).iter().copied().collect()
}
