//! Counting-measure norms and operator norms.

use rand::Rng;

use crate::treeops::GraphOperator;
use crate::{Matrix, Vector};

/// `||v||_p` with counting measure; `p = f64::INFINITY` is the max norm.
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm needs p >= 1, got {p}");
    if p.is_infinite() {
        return v.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    if p == 2.0 {
        return v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    // scale by the max to avoid overflow for large p
    let m = lp_norm(v, f64::INFINITY);
    if m == 0.0 {
        return 0.0;
    }
    m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `||K||_{L^1 -> L^inf} = sup |K(x, y)|`.
pub fn op_norm_1_inf(op: &GraphOperator) -> f64 {
    op.max_abs()
}

/// `||W||_{L^2 -> L^inf}`, the largest row 2-norm.
pub fn norm_2_inf(w: &Matrix) -> f64 {
    w.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Lower bound on `||W||_{L^2 -> L^p}` from the best of `probes` random
/// starts, each refined by 200 steps of the nonlinear power iteration
/// `v <- W^T (|Wv|^{p-1} sgn(Wv))`, normalized. Every returned value is
/// `||Wv||_p / ||v||_2` for an explicit `v`.
pub fn norm_2_p_lower<R: Rng>(w: &Matrix, p: f64, probes: usize, rng: &mut R) -> f64 {
    const ITERATIONS: usize = 200;
    let n = w.ncols();
    let mut best: f64 = 0.0;
    for _ in 0..probes.max(1) {
        let mut v = Vector::from_fn(n, |_, _| rng.gen::<f64>() - 0.5);
        if v.norm() == 0.0 {
            continue;
        }
        v.normalize_mut();
        for _ in 0..ITERATIONS {
            let u = w * &v;
            best = best.max(lp_norm(u.as_slice(), p));
            let dual = if p.is_infinite() {
                let (imax, _) = u.iamax_full();
                let mut e = Vector::zeros(u.len());
                e[imax] = u[imax].signum();
                e
            } else {
                let m = u.amax();
                if m == 0.0 {
                    break;
                }
                u.map(|x| (x.abs() / m).powf(p - 1.0) * x.signum())
            };
            let next = w.tr_mul(&dual);
            let norm = next.norm();
            if norm == 0.0 {
                break;
            }
            v = next / norm;
        }
        best = best.max(lp_norm((w * &v).as_slice(), p));
    }
    best
}

/// Riesz-Thorin interpolation of a symmetric operator's `1 -> inf` and
/// `2 -> 2` norms to the `p' -> p` norm.
pub fn riesz_thorin_bound(norm_1_inf: f64, norm_2_2: f64, p: f64) -> f64 {
    let theta = if p.is_infinite() { 0.0 } else { 2.0 / p };
    norm_1_inf.powf(1.0 - theta) * norm_2_2.powf(theta)
}
