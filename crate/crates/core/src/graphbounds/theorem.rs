//! Desk-scale check of the eigenfunction bound `||psi||_p <~ ||psi||_2 / sqrt(N)`
//! on a single graph.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::graphbounds::condition::{check_condition, sphere_norm_rows, sphere_norms, SphereNormRow};
use crate::graphbounds::norms::{lp_norm, riesz_thorin_bound};
use crate::graphs::{girth, RegularGraph};
use crate::spectral::{eig_sym, sphere_op_eigenvalue, SpectralData};
use crate::treeops::{adjacency_op, sphere_ops_iter};
use crate::{Error, Matrix, Result};

/// `epsilon(p) = min(0.1, (1/2 - delta)(1 - 2/p)/4)`.
pub fn epsilon_schedule(p: f64, delta: f64) -> f64 {
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    (0.1f64).min((0.5 - delta) * (1.0 - 2.0 * inv) / 4.0)
}

/// `"inf"` for infinity, shortest float form otherwise.
pub fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

/// Parses `"4"`, `"8.5"`, `"inf"`.
pub fn parse_p(s: &str) -> Result<f64> {
    let s = s.trim();
    let p = match s {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        _ => s.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad exponent {s:?}")))?,
    };
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent must be >= 1, got {s}")));
    }
    Ok(p)
}

#[derive(Clone, Copy, Debug)]
pub struct GraphTheoremOptions {
    /// Largest `n` at which `||S_n||_{1->inf}` is computed.
    pub n_max: usize,
    /// Replaces the `epsilon(p)` schedule.
    pub epsilon: Option<f64>,
    /// Replaces the admissible `N` from the cycle condition.
    pub n_override: Option<usize>,
}

impl Default for GraphTheoremOptions {
    fn default() -> Self {
        Self { n_max: 12, epsilon: None, n_override: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleRow {
    pub delta: f64,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub tempered: bool,
    /// `||psi_j||_p`, in the order of the report's `p_values`.
    pub norms: Vec<f64>,
    /// `||psi_j||_p sqrt(N) / ||psi_j||_2`.
    pub ratios: Vec<f64>,
}

/// Riesz-Thorin bound on `||S_n Pi_eps||_{p' -> p}`.
#[derive(Clone, Debug, Serialize)]
pub struct InterpolationRow {
    pub p: String,
    pub epsilon: f64,
    pub n: usize,
    pub norm_1_inf: f64,
    pub norm_2_2: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeadlineRow {
    pub p: String,
    pub epsilon: f64,
    /// Over tempered eigenvectors; ties go to the smallest index.
    pub max_tempered_ratio: f64,
    pub argmax_index: Option<usize>,
    pub max_untempered_ratio: f64,
    /// `|G|^{1/p - 1/2} sqrt(N)`, the ratio of a constant function.
    pub constant_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DelocalizationReport {
    pub graph_label: String,
    pub num_vertices: usize,
    pub q: usize,
    pub girth: usize,
    pub injectivity_radius: usize,
    pub delta: f64,
    /// Admissible `N` at `delta`.
    pub n: usize,
    pub p_values: Vec<String>,
    pub sphere_norms: Vec<SphereNormRow>,
    pub admissible: Vec<AdmissibleRow>,
    pub eigen: Vec<EigenRow>,
    pub interpolation: Vec<InterpolationRow>,
    pub headline: Vec<HeadlineRow>,
    pub max_eigen_residual: f64,
}

impl DelocalizationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// Per-eigenvector table: `index,eigenvalue,tempered,norm_p...,ratio_p...`.
    pub fn eigen_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue,tempered");
        for p in &self.p_values {
            write!(out, ",norm_{p}").unwrap();
        }
        for p in &self.p_values {
            write!(out, ",ratio_{p}").unwrap();
        }
        out.push('\n');
        for row in &self.eigen {
            write!(out, "{},{},{}", row.index, row.eigenvalue, row.tempered).unwrap();
            for v in row.norms.iter().chain(&row.ratios) {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// `n,norm_1_inf,implied_delta`.
    pub fn sphere_norms_csv(&self) -> String {
        let mut out = String::from("n,norm_1_inf,implied_delta\n");
        for r in &self.sphere_norms {
            writeln!(out, "{},{},{}", r.n, r.norm_1_inf, r.implied_delta).unwrap();
        }
        out
    }

    pub fn headline_for(&self, p: f64) -> Option<&HeadlineRow> {
        let label = p_label(p);
        self.headline.iter().find(|h| h.p == label)
    }
}

/// `T_q` and its eigendecomposition.
pub fn graph_spectrum(g: &RegularGraph) -> Result<SpectralData> {
    let t = adjacency_op(g);
    eig_sym(&t)
}

pub fn verify_graph_theorem(g: &RegularGraph, p_list: &[f64], delta: f64) -> Result<DelocalizationReport> {
    let spec = graph_spectrum(g)?;
    verify_graph_theorem_with(g, &spec, p_list, delta, GraphTheoremOptions::default())
}

pub fn verify_graph_theorem_with(
    g: &RegularGraph,
    spec: &SpectralData,
    p_list: &[f64],
    delta: f64,
    options: GraphTheoremOptions,
) -> Result<DelocalizationReport> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::InvalidArgument(format!("delta must lie in [0, 1/2), got {delta}")));
    }
    if p_list.iter().any(|&p| !(p >= 2.0)) {
        return Err(Error::InvalidArgument("exponents must be >= 2".into()));
    }
    let q = g.q();
    let girth = girth(g)?;
    let injectivity_radius = (girth - 1) / 2;
    let n_max = options.n_max.max(injectivity_radius);
    let norms = sphere_norms(g, n_max);
    let n = options.n_override.unwrap_or_else(|| check_condition(&norms, q, delta));
    let eps = |p: f64| options.epsilon.unwrap_or_else(|| epsilon_schedule(p, delta));
    let admissible = [0.0, 0.1, 0.2, 0.25, 0.3, 0.4]
        .into_iter()
        .chain((!matches!(delta, 0.0 | 0.1 | 0.2 | 0.25 | 0.3 | 0.4)).then_some(delta))
        .map(|d| AdmissibleRow { delta: d, n: check_condition(&norms, q, d) })
        .collect();

    let sqrt_n = (n as f64).sqrt();
    let eigen: Vec<EigenRow> = (0..spec.len())
        .into_par_iter()
        .map(|j| {
            let v = spec.eigenvectors.column(j);
            let l2 = v.norm();
            let norms: Vec<f64> = p_list.iter().map(|&p| lp_norm(v.as_slice(), p)).collect();
            let ratios = norms.iter().map(|x| x * sqrt_n / l2).collect();
            EigenRow { index: j, eigenvalue: spec.eigenvalues[j], tempered: spec.tempered[j], norms, ratios }
        })
        .collect();

    let size = g.num_vertices() as f64;
    let headline = p_list
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut best: Option<(usize, f64)> = None;
            let mut untempered: f64 = 0.0;
            for row in &eigen {
                let r = row.ratios[i];
                if row.tempered {
                    if best.map_or(true, |(_, b)| r > b) {
                        best = Some((row.index, r));
                    }
                } else {
                    untempered = untempered.max(r);
                }
            }
            let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
            HeadlineRow {
                p: p_label(p),
                epsilon: eps(p),
                max_tempered_ratio: best.map_or(0.0, |b| b.1),
                argmax_index: best.map(|b| b.0),
                max_untempered_ratio: untempered,
                constant_ratio: size.powf(inv - 0.5) * sqrt_n,
            }
        })
        .collect();

    let interpolation = interpolation_rows(g, spec, p_list, &eps, n);

    Ok(DelocalizationReport {
        graph_label: g.label().to_string(),
        num_vertices: g.num_vertices(),
        q,
        girth,
        injectivity_radius,
        delta,
        n,
        p_values: p_list.iter().map(|&p| p_label(p)).collect(),
        sphere_norms: sphere_norm_rows(q, &norms),
        admissible,
        eigen,
        interpolation,
        headline,
        max_eigen_residual: spec.max_residual(&adjacency_op(g)),
    })
}

/// `S_n Pi_eps = S_n - V_U diag(mu) V_U^T` with `V_U` the eigenvectors beyond
/// `2 + eps` and `mu` their `S_n` eigenvalues; exact `1 -> inf` norm, spectral
/// `2 -> 2` norm, and their Riesz-Thorin combination.
fn interpolation_rows(
    g: &RegularGraph,
    spec: &SpectralData,
    p_list: &[f64],
    eps: &dyn Fn(f64) -> f64,
    n_max: usize,
) -> Vec<InterpolationRow> {
    let q = g.q();
    let mut rows = Vec::new();
    for (n, s) in sphere_ops_iter(g).enumerate().take(n_max + 1).skip(1) {
        for &p in p_list {
            let epsilon = eps(p);
            let bound = 2.0 + epsilon;
            let mut m: Matrix = s.matrix().clone();
            let mut norm_2_2: f64 = 0.0;
            for j in 0..spec.len() {
                let mu = sphere_op_eigenvalue(q, spec.thetas[j], n);
                if spec.eigenvalues[j].abs() > bound {
                    let v = spec.eigenvectors.column(j);
                    m.ger(-mu, &v, &v, 1.0);
                } else {
                    norm_2_2 = norm_2_2.max(mu.abs());
                }
            }
            let norm_1_inf = m.amax();
            rows.push(InterpolationRow {
                p: p_label(p),
                epsilon,
                n,
                norm_1_inf,
                norm_2_2,
                bound: riesz_thorin_bound(norm_1_inf, norm_2_2, p),
            });
        }
    }
    rows
}
