//! Probes of the sup-norm decay of functions spanned by untempered
//! eigenvectors.
//!
//! For a vertex `x` and even `k`, a combination `f = sum_j c_j phi_j` of
//! eigenvectors with `|lambda_j| > 2 + eps`, signed so that every
//! `c_j phi_j(x) >= 0`, satisfies
//!
//! ```text
//! lambda_{eps,k} |f(x)| <= S_k f(x) <= ||K_k(x, .)||_2 ||f||_2,
//! ```
//!
//! where `lambda_{eps,k}` is the `S_k` eigenvalue at `T_q`-eigenvalue `2 + eps`.
//! Each inequality is checked separately on every probe, together with
//! `||f||_2 <= ||f||_1`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::graphbounds::norms::lp_norm;
use crate::graphs::RegularGraph;
use crate::spectral::{sphere_op_eigenvalue, SpectralData, Theta};
use crate::treeops::sphere_ops;
use crate::{Error, Result, Vector};

/// Relative slack allowed for floating-point rounding in the chain.
const SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct UntemperedRow {
    pub k: usize,
    /// `S_k` eigenvalue at `T_q`-eigenvalue `2 + eps`.
    pub lambda_eps_k: f64,
    /// `max_x ||K_k(x, .)||_2`.
    pub max_kernel_l2: f64,
    /// `min (S_k f(x) - lambda_{eps,k} |f(x)|) / scale` over probes.
    pub min_action_slack: f64,
    /// `min (||K_k(x,.)||_2 ||f||_2 - |S_k f(x)|) / scale` over probes.
    pub min_cauchy_schwarz_slack: f64,
    pub action_violations: usize,
    pub cauchy_schwarz_violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct UntemperedProbe {
    pub epsilon: f64,
    pub untempered_count: usize,
    pub trials: usize,
    pub rows: Vec<UntemperedRow>,
    pub l2_l1_violations: usize,
    /// `max ||f||_inf / ||f||_2` over probes.
    pub max_sup_ratio: f64,
    /// `||1||_inf / ||1||_2 = |G|^{-1/2}`.
    pub constant_sup_ratio: f64,
}

impl UntemperedProbe {
    pub fn total_violations(&self) -> usize {
        self.l2_l1_violations
            + self.rows.iter().map(|r| r.action_violations + r.cauchy_schwarz_violations).sum::<usize>()
    }
}

/// Runs `trials` random probes for every even `k` in `2..=k_max`.
pub fn untempered_decay_probe<R: Rng>(
    g: &RegularGraph,
    spec: &SpectralData,
    epsilon: f64,
    k_max: usize,
    trials: usize,
    rng: &mut R,
) -> Result<UntemperedProbe> {
    let threshold = 2.0 + epsilon;
    let untempered: Vec<usize> = (0..spec.len()).filter(|&j| spec.eigenvalues[j].abs() > threshold).collect();
    if untempered.is_empty() {
        return Err(Error::NoUntemperedSpectrum { threshold });
    }
    let q = g.q();
    let size = g.num_vertices();
    let k_max = k_max.max(2);
    let ops = sphere_ops(g, k_max);
    let eps_theta = Theta::from_eigenvalue(threshold);

    let mut rows: Vec<UntemperedRow> = (2..=k_max)
        .step_by(2)
        .map(|k| UntemperedRow {
            k,
            lambda_eps_k: sphere_op_eigenvalue(q, eps_theta, k),
            max_kernel_l2: ops[k].matrix().row_iter().map(|r| r.norm()).fold(0.0, f64::max),
            min_action_slack: f64::INFINITY,
            min_cauchy_schwarz_slack: f64::INFINITY,
            action_violations: 0,
            cauchy_schwarz_violations: 0,
        })
        .collect();

    let mut l2_l1_violations = 0;
    let mut max_sup_ratio: f64 = 0.0;
    let mut chosen = untempered.clone();
    for _ in 0..trials {
        let x = rng.gen_range(0..size);
        chosen.shuffle(rng);
        let terms = rng.gen_range(1..=chosen.len());
        let mut f = Vector::zeros(size);
        for &j in &chosen[..terms] {
            let phi = spec.eigenvectors.column(j);
            let sign = if phi[x] < 0.0 { -1.0 } else { 1.0 };
            f.axpy(sign * rng.gen::<f64>(), &phi, 1.0);
        }
        let l2 = f.norm();
        if l2 == 0.0 {
            continue;
        }
        if l2 > lp_norm(f.as_slice(), 1.0) * (1.0 + SLACK) {
            l2_l1_violations += 1;
        }
        max_sup_ratio = max_sup_ratio.max(f.amax() / l2);

        for row in rows.iter_mut() {
            let kernel_row = ops[row.k].matrix().row(x);
            let action = kernel_row.transpose().dot(&f);
            let fx = f[x].abs();
            let kernel_l2 = kernel_row.norm();
            let scale = (kernel_l2 * l2).max(f64::MIN_POSITIVE);
            let action_slack = (action - row.lambda_eps_k * fx) / scale;
            let cs_slack = (kernel_l2 * l2 - action.abs()) / scale;
            row.min_action_slack = row.min_action_slack.min(action_slack);
            row.min_cauchy_schwarz_slack = row.min_cauchy_schwarz_slack.min(cs_slack);
            if action_slack < -SLACK {
                row.action_violations += 1;
            }
            if cs_slack < -SLACK {
                row.cauchy_schwarz_violations += 1;
            }
        }
    }

    Ok(UntemperedProbe {
        epsilon,
        untempered_count: untempered.len(),
        trials,
        rows,
        l2_l1_violations,
        max_sup_ratio,
        constant_sup_ratio: 1.0 / (size as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_graph, GraphBuildSpec};
    use crate::spectral::eig_sym;
    use crate::treeops::adjacency_op;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spectrum(g: &RegularGraph) -> SpectralData {
        eig_sym(&adjacency_op(g)).unwrap()
    }

    #[test]
    fn circulant_probe_has_no_violations() {
        // x -> x+1, x -> x+2 on Z_60: many eigenvalues near the top of the spectrum
        let n = 60;
        let gens = vec![(0..n).map(|x| (x + 1) % n).collect(), (0..n).map(|x| (x + 2) % n).collect()];
        let g = build_graph(&GraphBuildSpec::Cayley { n, generators: gens }).unwrap();
        let spec = spectrum(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let probe = untempered_decay_probe(&g, &spec, 0.05, 6, 500, &mut rng).unwrap();
        assert!(probe.untempered_count > 1);
        assert_eq!(probe.total_violations(), 0, "{probe:?}");
        assert!(probe.rows.iter().all(|r| r.min_action_slack >= -SLACK && r.lambda_eps_k > 1.0));
        assert!(probe.max_sup_ratio >= probe.constant_sup_ratio * (1.0 - 1e-12));
    }

    #[test]
    fn constant_only_probe() {
        let g = build_graph(&GraphBuildSpec::RandomRegular { n: 50, degree: 4, seed: 1 }).unwrap();
        let spec = spectrum(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let probe = untempered_decay_probe(&g, &spec, 0.1, 4, 50, &mut rng).unwrap();
        // a random positive multiple of the constant vector
        assert!((probe.max_sup_ratio - 50f64.powf(-0.5)).abs() < 1e-12);
        assert_eq!(probe.total_violations(), 0);
    }

    #[test]
    fn requires_untempered_spectrum() {
        let g = build_graph(&GraphBuildSpec::RandomRegular { n: 50, degree: 4, seed: 1 }).unwrap();
        let spec = spectrum(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(matches!(
            untempered_decay_probe(&g, &spec, 5.0, 4, 10, &mut rng),
            Err(Error::NoUntemperedSpectrum { .. })
        ));
    }
}
