//! Spectral decomposition of graph operators and the spherical function of
//! the regular tree.
//!
//! Eigenvalues of `T_q` are written `lambda = 2 cos(theta)`. Tempered values
//! (`|lambda| <= 2`) have real `theta` in `[0, pi]`; the others are stored as
//! `arcosh(|lambda| / 2)` with the sign of `lambda`, so no complex arithmetic is
//! needed.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::graphs::RegularGraph;
use crate::treeops::GraphOperator;
use crate::{Error, Matrix, Result, Vector};

/// Slack used when classifying eigenvalues against spectral thresholds.
const CLASSIFY_EPS: f64 = 1e-12;

/// Spectral parameter of an eigenvalue `lambda = 2 cos(theta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Theta {
    /// `theta` in `[0, pi]`.
    Real(f64),
    /// `theta = -i t` for `lambda > 2`, `theta = pi - i t` for `lambda < -2`.
    Imaginary { t: f64, negative: bool },
}

impl Theta {
    pub fn from_eigenvalue(lambda: f64) -> Self {
        let half = lambda / 2.0;
        if half.abs() <= 1.0 {
            Theta::Real(half.acos())
        } else {
            Theta::Imaginary { t: half.abs().acosh(), negative: half < 0.0 }
        }
    }

    /// `lambda / 2`.
    pub fn cos(self) -> f64 {
        match self {
            Theta::Real(theta) => theta.cos(),
            Theta::Imaginary { t, negative } => {
                if negative {
                    -t.cosh()
                } else {
                    t.cosh()
                }
            }
        }
    }

    pub fn is_tempered(self) -> bool {
        matches!(self, Theta::Real(_))
    }

    /// `(cos(n theta), sin((n+1) theta) / sin(theta))`, with the analytic
    /// limits at the spectral edges.
    pub fn chebyshev_pair(self, n: usize) -> (f64, f64) {
        const EDGE: f64 = 1e-8;
        let nf = n as f64;
        match self {
            Theta::Real(theta) => {
                let s = theta.sin();
                if s.abs() > EDGE {
                    ((nf * theta).cos(), ((nf + 1.0) * theta).sin() / s)
                } else {
                    let sign = if theta < std::f64::consts::FRAC_PI_2 || n % 2 == 0 { 1.0 } else { -1.0 };
                    (sign, sign * (nf + 1.0))
                }
            }
            Theta::Imaginary { t, negative } => {
                let sign = if negative && n % 2 == 1 { -1.0 } else { 1.0 };
                if t > EDGE {
                    (sign * (nf * t).cosh(), sign * ((nf + 1.0) * t).sinh() / t.sinh())
                } else {
                    (sign, sign * (nf + 1.0))
                }
            }
        }
    }
}

/// Spherical function `phi_theta(n)` of the `q+1`-regular tree:
/// `q^{-n/2} (2/(q+1) cos(n theta) + (q-1)/(q+1) sin((n+1) theta)/sin(theta))`.
pub fn spherical_function(q: usize, theta: Theta, n: usize) -> f64 {
    let qf = q as f64;
    let (c, u) = theta.chebyshev_pair(n);
    qf.powf(-(n as f64) / 2.0) * (2.0 / (qf + 1.0) * c + (qf - 1.0) / (qf + 1.0) * u)
}

/// Eigenvalue of `S_n` (walk-count normalization) on a `T_q`-eigenfunction
/// with parameter `theta`: `1` for `n = 0`, `(q+1)/q q^{n/2} phi_theta(n)`
/// otherwise.
pub fn sphere_op_eigenvalue(q: usize, theta: Theta, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let qf = q as f64;
    (qf + 1.0) / qf * qf.powf(n as f64 / 2.0) * spherical_function(q, theta, n)
}

/// `q^{k/2} phi_theta(k)` at `2 cos(theta) = 2 + eps`, the comparison
/// eigenvalue for untempered components.
pub fn untempered_growth(q: usize, eps: f64, k: usize) -> f64 {
    let theta = Theta::Imaginary { t: (1.0 + eps / 2.0).acosh(), negative: false };
    (q as f64).powf(k as f64 / 2.0) * spherical_function(q, theta, k)
}

/// Eigenpairs of a symmetric operator in ascending order.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: Matrix,
    pub thetas: Vec<Theta>,
    pub tempered: Vec<bool>,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, j: usize) -> Vector {
        self.eigenvectors.column(j).into_owned()
    }

    /// `max_j ||A psi_j - lambda_j psi_j||_2`.
    pub fn max_residual(&self, op: &GraphOperator) -> f64 {
        let av = op.matrix() * &self.eigenvectors;
        (0..self.len())
            .map(|j| (av.column(j) - self.eigenvectors.column(j) * self.eigenvalues[j]).norm())
            .fold(0.0, f64::max)
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.len();
        let g = self.eigenvectors.tr_mul(&self.eigenvectors);
        crate::treeops::max_abs_diff(&g, &Matrix::identity(n, n))
    }

    /// Indices with `|lambda| <= bound`.
    pub fn indices_within(&self, bound: f64) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.eigenvalues[j].abs() <= bound + CLASSIFY_EPS).collect()
    }
}

/// Full eigendecomposition of a symmetric operator.
///
/// Eigenvalues ascend; each eigenvector is normalized so that its first entry
/// of non-negligible size is positive.
pub fn eig_sym(op: &GraphOperator) -> Result<SpectralData> {
    let m = op.matrix();
    let n = m.nrows();
    let norm = m.norm();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100 * n.max(10)).ok_or_else(|| {
        Error::ConvergenceFailure(format!(
            "{n}x{n} symmetric matrix, Frobenius norm {norm:.3e}, max entry {:.3e}",
            op.max_abs()
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvectors = Matrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let scale = v.amax();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * scale) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        eigenvectors.set_column(dst, &v);
        eigenvalues.push(eig.eigenvalues[src]);
    }
    let thetas: Vec<Theta> = eigenvalues.iter().map(|&l| Theta::from_eigenvalue(l)).collect();
    let tempered = eigenvalues.iter().map(|&l: &f64| l.abs() <= 2.0 + CLASSIFY_EPS).collect();
    Ok(SpectralData { eigenvalues, eigenvectors, thetas, tempered })
}

/// Orthogonal projector onto eigenvectors with `|lambda| <= 2 + epsilon`.
#[derive(Clone, Debug)]
pub struct SpectralProjector {
    pub epsilon: f64,
    pub matrix: Matrix,
    pub included_indices: Vec<usize>,
}

pub fn projector(spec: &SpectralData, epsilon: f64) -> Result<SpectralProjector> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let included_indices = spec.indices_within(2.0 + epsilon);
    let n = spec.len();
    let mut basis = Matrix::zeros(n, included_indices.len());
    for (k, &j) in included_indices.iter().enumerate() {
        basis.set_column(k, &spec.eigenvectors.column(j));
    }
    let matrix = &basis * basis.transpose();
    Ok(SpectralProjector { epsilon, matrix, included_indices })
}

/// One row of [`sn_eigenvalue_check`].
#[derive(Clone, Debug, Serialize)]
pub struct SnEigenRow {
    pub n: usize,
    /// Least-squares constant `c` in `S_n psi_j = c q^{n/2} phi_{theta_j}(n) psi_j`.
    pub measured_constant: f64,
    /// `max_j ||S_n psi_j - q^{n/2} phi(n) psi_j||_inf`.
    pub deviation_uncorrected: f64,
    /// Same with the factor `(q+1)/q` for `n >= 1`.
    pub deviation_corrected: f64,
    /// Same with the measured constant.
    pub deviation_measured: f64,
    pub matches: &'static str,
}

/// Tests `S_n psi_j` against `q^{n/2} phi_{theta_j}(n) psi_j` with and without
/// the `(q+1)/q` factor, for every eigenvector and `n = 0..sphere_ops.len()`.
pub fn sn_eigenvalue_check(g: &RegularGraph, spec: &SpectralData, sphere_ops: &[GraphOperator]) -> Vec<SnEigenRow> {
    let q = g.q();
    let qf = q as f64;
    sphere_ops
        .iter()
        .enumerate()
        .map(|(n, s)| {
            let applied = s.matrix() * &spec.eigenvectors;
            let predicted: Vec<f64> = spec
                .thetas
                .iter()
                .map(|&th| qf.powf(n as f64 / 2.0) * spherical_function(q, th, n))
                .collect();
            let rayleigh: Vec<f64> =
                (0..spec.len()).map(|j| spec.eigenvectors.column(j).dot(&applied.column(j))).collect();
            let num: f64 = rayleigh.iter().zip(&predicted).map(|(r, p)| r * p).sum();
            let den: f64 = predicted.iter().map(|p| p * p).sum();
            let measured_constant = if den > 0.0 { num / den } else { f64::NAN };
            let deviation = |c: f64| {
                (0..spec.len())
                    .map(|j| {
                        (applied.column(j) - spec.eigenvectors.column(j) * (c * predicted[j])).amax()
                    })
                    .fold(0.0, f64::max)
            };
            let corrected = if n == 0 { 1.0 } else { (qf + 1.0) / qf };
            let deviation_uncorrected = deviation(1.0);
            let deviation_corrected = deviation(corrected);
            let deviation_measured = deviation(measured_constant);
            let matches = if deviation_corrected <= 1e-8 && deviation_uncorrected <= 1e-8 {
                "both"
            } else if deviation_corrected <= 1e-8 {
                "corrected"
            } else if deviation_uncorrected <= 1e-8 {
                "uncorrected"
            } else {
                "neither"
            };
            SnEigenRow {
                n,
                measured_constant,
                deviation_uncorrected,
                deviation_corrected,
                deviation_measured,
                matches,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_graph, GraphBuildSpec};
    use crate::treeops::{adjacency_op, sphere_ops};
    use std::f64::consts::PI;

    fn k4() -> RegularGraph {
        build_graph(&GraphBuildSpec::Complete { n: 4 }).unwrap()
    }

    #[test]
    fn k4_spectrum() {
        let spec = eig_sym(&adjacency_op(&k4())).unwrap();
        let r = 0.5f64.sqrt();
        let expected = [-r, -r, -r, 3.0 * r];
        for (a, b) in spec.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(spec.tempered, vec![true, true, true, false]);
        // constant top eigenvector, positive sign convention
        for x in spec.eigenvector(3).iter() {
            assert!((x - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_spectrum() {
        let spec = eig_sym(&GraphOperator::identity(5)).unwrap();
        assert!(spec.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));
    }

    #[test]
    fn random_graph_invariants() {
        let g = build_graph(&GraphBuildSpec::RandomRegular { n: 120, degree: 4, seed: 5 }).unwrap();
        let t = adjacency_op(&g);
        let spec = eig_sym(&t).unwrap();
        let top = 4.0 / 3f64.sqrt();
        assert!(spec.max_residual(&t) <= 1e-9 * top);
        assert!(spec.orthonormality_defect() <= 1e-10);
        assert!(spec.eigenvalues.iter().all(|l| l.abs() <= top + 1e-9));
        assert!(spec.eigenvalues.iter().sum::<f64>().abs() <= 1e-8);
        assert!((spec.eigenvalues[119] - top).abs() < 1e-12);
        for w in spec.eigenvalues.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn projector_properties() {
        let spec = eig_sym(&adjacency_op(&k4())).unwrap();
        let p = projector(&spec, 0.0).unwrap();
        assert_eq!(p.included_indices, vec![0, 1, 2]);
        let p2 = &p.matrix * &p.matrix;
        assert!(crate::treeops::max_abs_diff(&p2, &p.matrix) < 1e-12);
        for j in 0..4 {
            let v = spec.eigenvector(j);
            let pv = &p.matrix * &v;
            let expect = if j < 3 { v.clone() } else { v.clone() * 0.0 };
            assert!((pv - expect).amax() < 1e-10);
        }
        let top = 3.0 / 2f64.sqrt();
        let full = projector(&spec, top - 2.0).unwrap();
        assert!(crate::treeops::max_abs_diff(&full.matrix, &Matrix::identity(4, 4)) < 1e-12);
        assert!(projector(&spec, -1.0).is_err());
    }

    #[test]
    fn spherical_function_values() {
        for q in [2, 3, 5] {
            for th in [Theta::Real(0.3), Theta::Real(0.0), Theta::Imaginary { t: 0.4, negative: true }] {
                assert_eq!(spherical_function(q, th, 0), 1.0);
                let qf = q as f64;
                let phi1 = spherical_function(q, th, 1);
                assert!((phi1 - 2.0 * th.cos() * qf.sqrt() / (qf + 1.0)).abs() < 1e-14);
            }
        }
        let v = spherical_function(2, Theta::Real(PI / 2.0), 2);
        assert!((v + 0.5).abs() < 1e-15);
    }

    #[test]
    fn spherical_function_edge_limits() {
        // limits at theta = 0 and pi agree with nearby interior points
        for n in 0..12 {
            for (edge, near) in [(0.0, 1e-6), (PI, PI - 1e-6)] {
                let a = spherical_function(3, Theta::Real(edge), n);
                let b = spherical_function(3, Theta::Real(near), n);
                assert!((a - b).abs() < 1e-9, "n = {n}");
            }
            let a = spherical_function(3, Theta::Real(0.0), n);
            let b = spherical_function(3, Theta::Imaginary { t: 1e-6, negative: false }, n);
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn theta_roundtrip() {
        for lambda in [-2.3, -2.0, -0.5, 0.0, 1.9, 2.0, 2.2] {
            let th = Theta::from_eigenvalue(lambda);
            assert!((2.0 * th.cos() - lambda).abs() < 1e-14);
            assert_eq!(th.is_tempered(), lambda.abs() <= 2.0);
        }
    }

    #[test]
    fn sn_eigenvalues_need_correction() {
        let g = build_graph(&GraphBuildSpec::RandomRegular { n: 60, degree: 3, seed: 2 }).unwrap();
        let spec = eig_sym(&adjacency_op(&g)).unwrap();
        let rows = sn_eigenvalue_check(&g, &spec, &sphere_ops(&g, 6));
        assert_eq!(rows[0].matches, "both");
        for row in &rows[1..] {
            assert_eq!(row.matches, "corrected", "n = {}", row.n);
            assert!((row.measured_constant - 1.5).abs() < 1e-10);
            assert!(row.deviation_corrected <= 1e-8);
        }
    }

    #[test]
    fn tempered_predictions_grow_at_most_linearly() {
        let q = 3;
        for n in 0..40 {
            let worst = (0..=400)
                .map(|i| Theta::Real(PI * i as f64 / 400.0))
                .map(|th| sphere_op_eigenvalue(q, th, n).abs())
                .fold(0.0, f64::max);
            assert!(worst <= 2.0 * (n as f64 + 1.0));
        }
    }

    #[test]
    fn untempered_growth_is_exponential() {
        for eps in [0.1, 0.5] {
            let pts: Vec<(f64, f64)> =
                (0..=30).map(|k| (k as f64, untempered_growth(3, eps, k).ln() / 3f64.ln())).collect();
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
            let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
                / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            assert!(slope > 0.0);
            // residuals stay bounded around the fitted line
            let resid = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).abs()).fold(0.0, f64::max);
            assert!(resid < 2.0, "eps = {eps}, resid = {resid}");
        }
    }
}
