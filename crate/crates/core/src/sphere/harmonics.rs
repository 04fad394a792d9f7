//! Evaluation of degree-`s` harmonics from their coefficients, sphere
//! `L^p` norms and the reproducing property of `Z_s`.
//!
//! Coefficients are indexed by `m + s` for `m = -s..=s` in the complex basis
//! `Y_{s,m}(t, phi) = lambda_s^m(cos t) e^{i m phi}` (Condon-Shortley phase,
//! `Y_{s,-m} = (-1)^m conj(Y_{s,m})`).

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::sphere::legendre::{assoc_legendre_row, legendre};
use crate::sphere::quadrature::SphereGrid;
use crate::sphere::{CMatrix, Complex};
use crate::{Error, Result};

/// Signed multiplier of `Y_{s,m}` relative to `lambda_s^{|m|} e^{i m phi}`.
fn order_sign(m: i64) -> f64 {
    if m < 0 && m % 2 != 0 {
        -1.0
    } else {
        1.0
    }
}

/// `Y_{s,m}` at a point given by `(t, phi)`.
pub fn spherical_harmonic(s: usize, m: i64, t: f64, phi: f64) -> Complex {
    assert!(m.unsigned_abs() as usize <= s, "|m| > s");
    let row = assoc_legendre_row(s, t.cos());
    Complex::from_polar(order_sign(m) * row[m.unsigned_abs() as usize], m as f64 * phi)
}

/// `(t, phi)` of a unit vector.
pub fn to_angles(x: [f64; 3]) -> (f64, f64) {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    (r.atan2(x[2]), x[1].atan2(x[0]))
}

/// `sum_m c_m Y_{s,m}(t, phi)`.
pub fn evaluate_point(coeffs: &[Complex], t: f64, phi: f64) -> Complex {
    let s = coeffs.len() / 2;
    let row = assoc_legendre_row(s, t.cos());
    let mut acc = Complex::new(0.0, 0.0);
    for (idx, c) in coeffs.iter().enumerate() {
        let m = idx as i64 - s as i64;
        acc += c * Complex::from_polar(order_sign(m) * row[m.unsigned_abs() as usize], m as f64 * phi);
    }
    acc
}

/// Coefficients of `Z_s(d(., x0)) = sum_m conj(Y_{s,m}(x0)) Y_{s,m}`.
pub fn zonal_coefficients(s: usize, x0: [f64; 3]) -> Vec<Complex> {
    let (t, phi) = to_angles(x0);
    (-(s as i64)..=s as i64).map(|m| spherical_harmonic(s, m, t, phi).conj()).collect()
}

/// Evaluates degree-`s` harmonics row by row on a [`SphereGrid`]: one
/// tabulated Legendre row per polar node and one inverse FFT per row.
pub struct GridEvaluator<'a> {
    pub s: usize,
    pub grid: &'a SphereGrid,
    table: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl<'a> GridEvaluator<'a> {
    pub fn new(s: usize, grid: &'a SphereGrid) -> Result<Self> {
        if grid.n_phi < 2 * s + 1 {
            return Err(Error::ResolutionTooLow { needed: 2 * s + 1, have: grid.n_phi });
        }
        let mut table = Vec::with_capacity(grid.n_theta() * (s + 1));
        for &x in &grid.cos_theta {
            table.extend(assoc_legendre_row(s, x));
        }
        let fft = FftPlanner::new().plan_fft_inverse(grid.n_phi);
        Ok(Self { s, grid, table, fft })
    }

    /// Fills `buf` (length `n_phi`) with the values on polar row `i`.
    pub fn row(&self, coeffs: &[Complex], i: usize, buf: &mut [Complex]) {
        let s = self.s;
        let n = self.grid.n_phi;
        let lam = &self.table[i * (s + 1)..(i + 1) * (s + 1)];
        buf.iter_mut().for_each(|v| *v = Complex::new(0.0, 0.0));
        for (idx, c) in coeffs.iter().enumerate() {
            let m = idx as i64 - s as i64;
            let slot = m.rem_euclid(n as i64) as usize;
            buf[slot] += c * (order_sign(m) * lam[m.unsigned_abs() as usize]);
        }
        self.fft.process(buf);
    }

    /// `||psi||_p` for every `p` in `ps` in one sweep of the grid. `p = inf`
    /// takes the grid maximum refined by a local search around the best
    /// `REFINE` rows.
    pub fn lp_norms(&self, coeffs: &[Complex], ps: &[f64]) -> Result<Vec<f64>> {
        self.lp_norms_with(coeffs, ps, true)
    }

    /// As [`GridEvaluator::lp_norms`]; with `refine = false` the sup norm is
    /// the plain grid maximum (a lower bound).
    pub fn lp_norms_with(&self, coeffs: &[Complex], ps: &[f64], refine: bool) -> Result<Vec<f64>> {
        const REFINE: usize = 3;
        if coeffs.len() != 2 * self.s + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                2 * self.s + 1,
                coeffs.len()
            )));
        }
        for &p in ps {
            self.grid.check_norm_resolution(self.s, p)?;
        }
        let mut sums = vec![0.0; ps.len()];
        let mut row_max: Vec<(f64, usize, usize)> = Vec::with_capacity(self.grid.n_theta());
        let mut buf = vec![Complex::new(0.0, 0.0); self.grid.n_phi];
        let dphi = self.grid.phi_weight();
        for i in 0..self.grid.n_theta() {
            self.row(coeffs, i, &mut buf);
            let w = self.grid.weights[i] * dphi;
            let mut best = (0.0, i, 0);
            for (k, v) in buf.iter().enumerate() {
                let a = v.norm();
                if a > best.0 {
                    best = (a, i, k);
                }
                for (sum, &p) in sums.iter_mut().zip(ps) {
                    if p.is_finite() {
                        *sum += w * pow(a, p);
                    }
                }
            }
            row_max.push(best);
        }
        let needs_sup = ps.iter().any(|p| p.is_infinite());
        let sup = if needs_sup && !refine {
            row_max.iter().map(|r| r.0).fold(0.0, f64::max)
        } else if needs_sup {
            row_max.sort_by(|a, b| b.0.total_cmp(&a.0));
            let dt = PI / self.grid.n_theta() as f64;
            row_max
                .iter()
                .take(REFINE)
                .map(|&(a, i, k)| {
                    let t = self.grid.cos_theta[i].clamp(-1.0, 1.0).acos();
                    refine_max(coeffs, t, self.grid.phi(k), dt, dphi).max(a)
                })
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        Ok(ps
            .iter()
            .zip(sums)
            .map(|(&p, sum)| if p.is_infinite() { sup } else { sum.powf(1.0 / p) })
            .collect())
    }
}

fn pow(a: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p <= 64.0 {
        a.powi(p as i32)
    } else {
        a.powf(p)
    }
}

/// Compass search for a local maximum of `|psi|` starting at `(t, phi)`.
fn refine_max(coeffs: &[Complex], t0: f64, phi0: f64, dt: f64, dphi: f64) -> f64 {
    let (mut t, mut phi) = (t0, phi0);
    let mut best = evaluate_point(coeffs, t, phi).norm();
    let (mut ht, mut hp) = (dt, dphi);
    while ht > 1e-9 {
        let mut moved = false;
        for (a, b) in [(ht, 0.0), (-ht, 0.0), (0.0, hp), (0.0, -hp)] {
            let (tt, pp) = (t + a, phi + b);
            let v = evaluate_point(coeffs, tt, pp).norm();
            if v > best {
                best = v;
                t = tt;
                phi = pp;
                moved = true;
            }
        }
        if !moved {
            ht *= 0.5;
            hp *= 0.5;
        }
    }
    best
}

/// `(int |psi|^p dsigma)^{1/p}` for the harmonic with coefficients `coeffs`.
pub fn lp_norm_sphere(coeffs: &[Complex], p: f64, grid: &SphereGrid) -> Result<f64> {
    let s = coeffs.len() / 2;
    Ok(GridEvaluator::new(s, grid)?.lp_norms(coeffs, &[p])?[0])
}

/// `||Z_s(d(., x0)) / ||Z_s||_2||_p`, by Gauss-Legendre in `cos(t)`
/// (exact for even `p`).
pub fn zonal_normalized_lp(s: usize, p: f64) -> f64 {
    let norm2 = ((2 * s + 1) as f64 / (4.0 * PI)).sqrt();
    if p.is_infinite() {
        return norm2;
    }
    let nodes = ((p / 2.0).ceil() as usize * s).max(1) + 2;
    let (x, w) = crate::sphere::quadrature::gauss_legendre(nodes);
    let integral: f64 =
        x.iter().zip(&w).map(|(x, w)| w * (norm2 * legendre(s, *x)).abs().powf(p)).sum::<f64>() * 2.0 * PI;
    integral.powf(1.0 / p)
}

/// Result of [`reproduce_check`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct ReproduceReport {
    pub s: usize,
    pub targets: usize,
    /// `max_{m, x} |(Z_s * Y_{s,m})(x) - Y_{s,m}(x)|`.
    pub deviation: f64,
    /// `max |(Z_s * Y_{s',m})(x)|` over `s' = s +- 1` (when resolved).
    pub cross_degree: f64,
}

/// Quadrature convolution of `Z_s` against every `Y_{s,m}` (and `Y_{s+-1,m}`)
/// at up to `max_targets` grid points.
pub fn reproduce_check(s: usize, grid: &SphereGrid, max_targets: usize) -> Result<ReproduceReport> {
    let degree = 2 * grid.n_theta() - 1;
    if degree < 2 * s || grid.n_phi < 2 * s + 1 {
        return Err(Error::ResolutionTooLow { needed: s + 1, have: grid.n_theta() });
    }
    let points: Vec<[f64; 3]> =
        (0..grid.n_theta()).flat_map(|i| (0..grid.n_phi).map(move |k| (i, k))).map(|(i, k)| grid.point(i, k)).collect();
    let weights: Vec<f64> = (0..grid.n_theta())
        .flat_map(|i| std::iter::repeat(grid.weights[i] * grid.phi_weight()).take(grid.n_phi))
        .collect();
    let stride = points.len().div_ceil(max_targets.max(1));
    let targets: Vec<usize> = (0..points.len()).step_by(stride).collect();

    // kernel[t, y] = w_y Z_s(x_t . y)
    let mut kernel = crate::Matrix::zeros(targets.len(), points.len());
    let norm = (2 * s + 1) as f64 / (4.0 * PI);
    for (r, &t) in targets.iter().enumerate() {
        let x = points[t];
        for (c, y) in points.iter().enumerate() {
            let dot = (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]).clamp(-1.0, 1.0);
            kernel[(r, c)] = weights[c] * norm * legendre(s, dot);
        }
    }

    let convolve_all = |degree: usize| -> (f64, f64) {
        let values = harmonic_values(degree, grid);
        let mut deviation: f64 = 0.0;
        let mut magnitude: f64 = 0.0;
        for col in values.column_iter() {
            for (r, &t) in targets.iter().enumerate() {
                let mut acc = Complex::new(0.0, 0.0);
                for (c, v) in col.iter().enumerate() {
                    acc += v * kernel[(r, c)];
                }
                deviation = deviation.max((acc - col[t]).norm());
                magnitude = magnitude.max(acc.norm());
            }
        }
        (deviation, magnitude)
    };

    let (deviation, _) = convolve_all(s);
    let mut cross_degree: f64 = 0.0;
    if s > 0 {
        cross_degree = cross_degree.max(convolve_all(s - 1).1);
    }
    if degree >= 2 * s + 1 && grid.n_phi >= 2 * s + 3 {
        cross_degree = cross_degree.max(convolve_all(s + 1).1);
    }
    Ok(ReproduceReport { s, targets: targets.len(), deviation, cross_degree })
}

/// `Y_{s,m}` on every grid point: rows are points (polar-major), columns `m + s`.
pub fn harmonic_values(s: usize, grid: &SphereGrid) -> CMatrix {
    let mut out = CMatrix::zeros(grid.len(), 2 * s + 1);
    for i in 0..grid.n_theta() {
        let row = assoc_legendre_row(s, grid.cos_theta[i]);
        for k in 0..grid.n_phi {
            let phi = grid.phi(k);
            for m in -(s as i64)..=s as i64 {
                out[(i * grid.n_phi + k, (m + s as i64) as usize)] =
                    Complex::from_polar(order_sign(m) * row[m.unsigned_abs() as usize], m as f64 * phi);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(s: usize, m: i64) -> Vec<Complex> {
        let mut c = vec![Complex::new(0.0, 0.0); 2 * s + 1];
        c[(m + s as i64) as usize] = Complex::new(1.0, 0.0);
        c
    }

    #[test]
    fn conjugation_symmetry() {
        let (t, phi) = (0.7, 1.9);
        for m in 1..=4i64 {
            let a = spherical_harmonic(4, -m, t, phi);
            let b = spherical_harmonic(4, m, t, phi).conj() * if m % 2 == 0 { 1.0 } else { -1.0 };
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn quadrature_orthonormality() {
        let grid = SphereGrid::for_degree(2 * 12);
        for s in [0usize, 3, 12] {
            let a = harmonic_values(s, &grid);
            for s2 in [0usize, 5, 12] {
                let b = harmonic_values(s2, &grid);
                for i in 0..a.ncols() {
                    for j in 0..b.ncols() {
                        let mut ip = Complex::new(0.0, 0.0);
                        for r in 0..grid.len() {
                            let w = grid.weights[r / grid.n_phi] * grid.phi_weight();
                            ip += a[(r, i)] * b[(r, j)].conj() * w;
                        }
                        let expected = if s == s2 && i == j { 1.0 } else { 0.0 };
                        assert!((ip - expected).norm() < 1e-10, "s={s} s2={s2} i={i} j={j} {ip}");
                    }
                }
            }
        }
    }

    #[test]
    fn grid_rows_match_pointwise() {
        let s = 9;
        let grid = SphereGrid::for_degree(2 * s);
        let ev = GridEvaluator::new(s, &grid).unwrap();
        let coeffs: Vec<Complex> = (0..2 * s + 1).map(|k| Complex::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let mut buf = vec![Complex::new(0.0, 0.0); grid.n_phi];
        for i in [0, 4, grid.n_theta() - 1] {
            ev.row(&coeffs, i, &mut buf);
            for k in [0, 3, grid.n_phi - 1] {
                let t = grid.cos_theta[i].acos();
                assert!((buf[k] - evaluate_point(&coeffs, t, grid.phi(k))).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_and_unit_norms() {
        let grid = SphereGrid::for_norm(0, 7.0);
        let c = lp_norm_sphere(&unit(0, 0), 7.0, &grid).unwrap();
        assert!((c - (4.0 * PI).powf(1.0 / 7.0 - 0.5)).abs() < 1e-12);

        let s = 15;
        let grid = SphereGrid::for_norm(s, 2.0);
        let coeffs: Vec<Complex> = (0..2 * s + 1).map(|k| Complex::new(1.0 + k as f64, -(k as f64))).collect();
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let unit_coeffs: Vec<Complex> = coeffs.iter().map(|c| c / norm).collect();
        assert!((lp_norm_sphere(&unit_coeffs, 2.0, &grid).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zonal_sup_norm() {
        for s in [5usize, 20] {
            let grid = SphereGrid::for_norm(s, f64::INFINITY);
            // Y_{s,0} is the normalized zonal harmonic about the north pole
            let sup = lp_norm_sphere(&unit(s, 0), f64::INFINITY, &grid).unwrap();
            let expected = ((2 * s + 1) as f64 / (4.0 * PI)).sqrt();
            assert!((sup - expected).abs() < 1e-9);
            assert!((zonal_normalized_lp(s, f64::INFINITY) - expected).abs() < 1e-15);
            let grid10 = SphereGrid::for_norm(s, 10.0);
            let direct = lp_norm_sphere(&unit(s, 0), 10.0, &grid10).unwrap();
            assert!((direct - zonal_normalized_lp(s, 10.0)).abs() < 1e-10 * direct);
        }
    }

    #[test]
    fn rotated_zonal_coefficients() {
        let s = 6;
        let x0 = [0.6, 0.0, 0.8];
        let c = zonal_coefficients(s, x0);
        let (t, phi): (f64, f64) = (1.1, -0.4);
        let x = [t.sin() * phi.cos(), t.sin() * phi.sin(), t.cos()];
        let d = (x[0] * x0[0] + x[1] * x0[1] + x[2] * x0[2]).acos();
        let v = evaluate_point(&c, t, phi);
        assert!((v.re - crate::sphere::legendre::zonal(s, d)).abs() < 1e-12);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn resolution_enforced() {
        let grid = SphereGrid::new(5, 11);
        assert!(matches!(lp_norm_sphere(&unit(5, 0), 10.0, &grid), Err(Error::ResolutionTooLow { .. })));
    }

    #[test]
    fn reproducing_small() {
        for s in [0usize, 1, 4, 10] {
            let grid = SphereGrid::for_degree(2 * s + 2);
            let r = reproduce_check(s, &grid, 60).unwrap();
            assert!(r.deviation < 1e-10, "{r:?}");
            assert!(r.cross_degree < 1e-10, "{r:?}");
        }
    }
}
