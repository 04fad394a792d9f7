//! Spectral cluster operators `W_{N,alpha}` and the cosine mass that controls
//! how strongly they act on eigenfunctions with `lambda = 2 cos(alpha)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::graphs::RegularGraph;
use crate::spectral::{projector, SpectralData, Theta};
use crate::treeops::{adjacency_op, chebyshev_iter, GraphOperator};
use crate::{Error, Matrix, Result, Vector};

/// Result of [`cosine_mass`].
#[derive(Clone, Debug, Serialize)]
pub struct CosineMass {
    pub n: usize,
    pub grid_size: usize,
    /// `min_alpha sum_{m=1}^N cos^2(m alpha)` over the grid.
    pub grid_min: f64,
    pub argmin_alpha: f64,
    /// `(2N - 1)/4 - 1/(4 sin(pi/(2N+1)))`.
    pub analytic_bound: f64,
}

pub fn cosine_sum(n: usize, alpha: f64) -> f64 {
    (1..=n).map(|m| (m as f64 * alpha).cos().powi(2)).sum()
}

pub fn cosine_mass_analytic_bound(n: usize) -> f64 {
    let nf = n as f64;
    (2.0 * nf - 1.0) / 4.0 - 1.0 / (4.0 * (std::f64::consts::PI / (2.0 * nf + 1.0)).sin())
}

/// Minimum of `sum_{m=1}^N cos^2(m alpha)` over `grid_size` equispaced points
/// of `[0, pi]` (endpoints included). The grid must have at least `10 N`
/// points since the sum oscillates with frequency `2N`.
pub fn cosine_mass(n: usize, grid_size: usize) -> Result<CosineMass> {
    if n == 0 {
        return Err(Error::InvalidArgument("cosine mass needs N >= 1".into()));
    }
    if grid_size < 10 * n {
        return Err(Error::InvalidArgument(format!("alpha grid of {grid_size} points is below 10N = {}", 10 * n)));
    }
    let (argmin_alpha, grid_min) = alpha_grid(grid_size)
        .map(|a| (a, cosine_sum(n, a)))
        .fold((0.0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    Ok(CosineMass { n, grid_size, grid_min, argmin_alpha, analytic_bound: cosine_mass_analytic_bound(n) })
}

/// `size` equispaced points on `[0, pi]`.
pub fn alpha_grid(size: usize) -> impl Iterator<Item = f64> + Clone {
    let step = if size > 1 { std::f64::consts::PI / (size - 1) as f64 } else { 0.0 };
    (0..size).map(move |i| i as f64 * step)
}

/// `W_{N,alpha} = sum_{m=1}^{N/2} cos(2 m alpha) P_{2m}(T_q/2) Pi_eps`.
#[derive(Clone, Debug)]
pub struct ClusterOperator {
    pub n: usize,
    pub alpha: f64,
    pub projector_epsilon: f64,
    pub matrix: Matrix,
}

impl ClusterOperator {
    pub fn as_operator(&self) -> GraphOperator {
        GraphOperator::new(self.matrix.clone())
    }

    /// Entrywise max of `|W T_q - T_q W|`.
    pub fn commutator_with(&self, g: &RegularGraph) -> f64 {
        let t = adjacency_op(g).into_matrix();
        crate::treeops::max_abs_diff(&(&self.matrix * &t), &(&t * &self.matrix))
    }
}

fn check_cluster_n(n: usize) -> Result<()> {
    if n % 2 == 1 {
        return Err(Error::OddN(n));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("cluster operator needs N >= 2".into()));
    }
    Ok(())
}

/// Builds `W_{N,alpha}` from the Chebyshev propagators and `Pi_eps`.
pub fn build_cluster(g: &RegularGraph, spec: &SpectralData, n: usize, alpha: f64, epsilon: f64) -> Result<ClusterOperator> {
    check_cluster_n(n)?;
    let size = g.num_vertices();
    let mut sum = Matrix::zeros(size, size);
    for (k, p) in chebyshev_iter(g).enumerate().take(n + 1) {
        if k >= 2 && k % 2 == 0 {
            sum += p.matrix() * (k as f64 * alpha).cos();
        }
    }
    let pi = projector(spec, epsilon)?;
    let mut matrix = sum * pi.matrix;
    // W is a polynomial in T_q times a spectral projector: symmetric up to rounding
    let t = matrix.transpose();
    matrix = (matrix + t) * 0.5;
    Ok(ClusterOperator { n, alpha, projector_epsilon: epsilon, matrix })
}

/// Eigenvalue of `W_{N,alpha}` on an eigenfunction with parameter `theta`
/// (ignoring the projector): `sum_{m=1}^{N/2} cos(2 m alpha) P_{2m}(cos theta)`.
pub fn cluster_multiplier(theta: Theta, n: usize, alpha: f64) -> f64 {
    (1..=n / 2).map(|m| (2.0 * m as f64 * alpha).cos() * theta.chebyshev_pair(2 * m).0).sum()
}

/// Computes `||W_{N,alpha}||_{2->inf}^2 = max_x sum_j m_j^2 psi_j(x)^2` from
/// the eigendecomposition, for many `(N, alpha)` without forming `W`.
pub struct ClusterScanner {
    squares: Matrix,
    thetas: Vec<Theta>,
    pub projector_epsilon: f64,
}

/// One `N` of a [`ClusterScanner::scan`].
#[derive(Clone, Debug, Serialize)]
pub struct ClusterScanRow {
    pub n: usize,
    pub alpha_points: usize,
    /// `max_alpha ||W_{N,alpha}||^2_{2->inf}`.
    pub max_norm_sq: f64,
    pub argmax_alpha: f64,
    /// `max_norm_sq / N`.
    pub ratio: f64,
}

impl ClusterScanner {
    pub fn new(spec: &SpectralData, epsilon: f64) -> Self {
        let included = spec.indices_within(2.0 + epsilon);
        let rows = spec.len();
        let mut squares = Matrix::zeros(rows, included.len());
        for (k, &j) in included.iter().enumerate() {
            squares.set_column(k, &spec.eigenvectors.column(j).map(|x| x * x));
        }
        let thetas = included.iter().map(|&j| spec.thetas[j]).collect();
        Self { squares, thetas, projector_epsilon: epsilon }
    }

    pub fn norm_2_inf_sq(&self, n: usize, alpha: f64) -> Result<f64> {
        check_cluster_n(n)?;
        let m2 = Vector::from_iterator(self.thetas.len(), self.thetas.iter().map(|&t| cluster_multiplier(t, n, alpha).powi(2)));
        Ok((&self.squares * m2).max())
    }

    /// Maximizes over the `10 N + 1` point alpha grid for each even `N` in `ns`.
    pub fn scan(&self, ns: &[usize]) -> Result<Vec<ClusterScanRow>> {
        ns.iter()
            .map(|&n| {
                check_cluster_n(n)?;
                let grid: Vec<f64> = alpha_grid(10 * n + 1).collect();
                let values: Vec<(f64, f64)> = grid
                    .par_iter()
                    .map(|&a| self.norm_2_inf_sq(n, a).map(|v| (a, v)))
                    .collect::<Result<_>>()?;
                let (argmax_alpha, max_norm_sq) =
                    values.into_iter().fold((0.0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
                Ok(ClusterScanRow { n, alpha_points: grid.len(), max_norm_sq, argmax_alpha, ratio: max_norm_sq / n as f64 })
            })
            .collect()
    }
}
