//! The cycle condition `||S_n||_{1->inf} <= C q^{(-1/2 + delta) n}`.

use serde::Serialize;

use crate::graphbounds::norms::op_norm_1_inf;
use crate::graphs::RegularGraph;
use crate::treeops::sphere_ops_iter;

/// Constant `C` in the cycle condition.
pub const CONDITION_CONSTANT: f64 = 1.0 + 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct SphereNormRow {
    pub n: usize,
    /// `||S_n||_{1->inf}`.
    pub norm_1_inf: f64,
    /// `1/2 + log_q ||S_n||_{1->inf} / n`; the smallest `delta` allowing this `n`.
    pub implied_delta: f64,
}

/// `||S_n||_{1->inf}` for `n = 0..=n_max`, streaming the operators.
pub fn sphere_norms(g: &RegularGraph, n_max: usize) -> Vec<f64> {
    sphere_ops_iter(g).take(n_max + 1).map(|s| op_norm_1_inf(&s)).collect()
}

pub fn sphere_norm_rows(q: usize, norms: &[f64]) -> Vec<SphereNormRow> {
    let lq = (q as f64).ln();
    norms
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, &v)| SphereNormRow { n, norm_1_inf: v, implied_delta: 0.5 + v.ln() / lq / n as f64 })
        .collect()
}

/// Largest `N <= norms.len() - 1` with `norms[n] <= C q^{(-1/2+delta) n}` for
/// every `1 <= n <= N`.
pub fn check_condition(norms: &[f64], q: usize, delta: f64) -> usize {
    let qf = q as f64;
    norms
        .iter()
        .enumerate()
        .skip(1)
        .take_while(|&(n, &v)| v <= CONDITION_CONSTANT * qf.powf((delta - 0.5) * n as f64))
        .count()
}

/// [`check_condition`] on freshly computed norms up to `n_max`.
pub fn admissible_n(g: &RegularGraph, n_max: usize, delta: f64) -> usize {
    check_condition(&sphere_norms(g, n_max), g.q(), delta)
}
