//! Wigner matrices `D^s(g)` of rotations on `H_s` in the basis `Y_{s,m}`,
//! `m = -s..=s`.
//!
//! Conventions: `g = R_z(alpha) R_y(beta) R_z(gamma)` (active rotations),
//! `D_{m'm} = e^{-i m' alpha} d_{m'm}(beta) e^{-i m gamma}` with
//! `d(beta) = exp(-i beta J_y)`. Then `(f o g^{-1}) = sum D(g) c` on
//! coefficients, i.e. `f(g x)` has coefficients `D(g)^† c`.
//!
//! `d(beta)` is obtained from the eigendecomposition of `J_y`, which is
//! unitarily equivalent (via `diag(i^m)`) to a real symmetric tridiagonal
//! matrix; this stays accurate for large `s` where the explicit sum formula
//! cancels catastrophically.

use nalgebra::{Matrix3, SymmetricEigen};

use crate::sphere::{CMatrix, Complex};
use crate::{Error, Matrix, Result};

/// ZYZ Euler angles `(alpha, beta, gamma)` of a rotation matrix. For
/// `beta` in `{0, pi}` the split between `alpha` and `gamma` is not unique
/// and `gamma = 0` is chosen.
pub fn euler_zyz(r: &Matrix3<f64>) -> (f64, f64, f64) {
    const GIMBAL: f64 = 1e-14;
    let sin_beta = (r[(0, 2)].powi(2) + r[(1, 2)].powi(2)).sqrt();
    let beta = sin_beta.atan2(r[(2, 2)]);
    if sin_beta > GIMBAL {
        (r[(1, 2)].atan2(r[(0, 2)]), beta, r[(2, 1)].atan2(-r[(2, 0)]))
    } else if r[(2, 2)] > 0.0 {
        (r[(1, 0)].atan2(r[(0, 0)]), 0.0, 0.0)
    } else {
        ((-r[(1, 0)]).atan2(-r[(0, 0)]), std::f64::consts::PI, 0.0)
    }
}

pub fn rotation_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn rotation_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Eigendecomposition of `J_y` on `H_s`, reusable for every `beta`.
#[derive(Clone, Debug)]
pub struct WignerBasis {
    pub s: usize,
    vectors: Matrix,
    /// Integer eigenvalues of `J_y`.
    mu: Vec<f64>,
}

impl WignerBasis {
    pub fn new(s: usize) -> Result<Self> {
        let dim = 2 * s + 1;
        let sf = s as f64;
        let mut jy = Matrix::zeros(dim, dim);
        for i in 0..dim - 1 {
            let m = i as f64 - sf;
            let c = -0.5 * (sf * (sf + 1.0) - m * (m + 1.0)).sqrt();
            jy[(i + 1, i)] = c;
            jy[(i, i + 1)] = c;
        }
        let eig = SymmetricEigen::try_new(jy, f64::EPSILON, 100 * dim.max(10))
            .ok_or_else(|| Error::ConvergenceFailure(format!("J_y eigendecomposition at s = {s}")))?;
        let mu = eig.eigenvalues.iter().map(|v| v.round()).collect();
        Ok(Self { s, vectors: eig.eigenvectors, mu })
    }

    /// Real matrix `d^s(beta)`, indexed by `(m' + s, m + s)`.
    pub fn small_d(&self, beta: f64) -> Matrix {
        let dim = 2 * self.s + 1;
        let cos = Matrix::from_fn(dim, dim, |i, k| self.vectors[(i, k)] * (beta * self.mu[k]).cos());
        let sin = Matrix::from_fn(dim, dim, |i, k| self.vectors[(i, k)] * (beta * self.mu[k]).sin());
        // V diag(e^{-i beta mu}) V^T = C - i S
        let c = &cos * self.vectors.transpose();
        let sn = &sin * self.vectors.transpose();
        // d_{m'm} = Re(i^{m'-m} (C - i S)_{m'm})
        Matrix::from_fn(dim, dim, |a, b| match (a as i64 - b as i64).rem_euclid(4) {
            0 => c[(a, b)],
            1 => sn[(a, b)],
            2 => -c[(a, b)],
            _ => -sn[(a, b)],
        })
    }

    /// `D^s(r)`.
    pub fn big_d(&self, r: &Matrix3<f64>) -> CMatrix {
        let (alpha, beta, gamma) = euler_zyz(r);
        let d = self.small_d(beta);
        let s = self.s as f64;
        CMatrix::from_fn(d.nrows(), d.ncols(), |a, b| {
            let (m1, m) = (a as f64 - s, b as f64 - s);
            Complex::from_polar(d[(a, b)], -(m1 * alpha + m * gamma))
        })
    }
}

/// `D^s(r)` for a single rotation.
pub fn wigner_d(s: usize, r: &Matrix3<f64>) -> Result<CMatrix> {
    Ok(WignerBasis::new(s)?.big_d(r))
}

/// `max |U^† U - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let g = u.adjoint() * u;
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (g[(i, j)] - if i == j { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) }).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_c(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::harmonics::{evaluate_point, to_angles};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
        rotation_z(rng.gen_range(0.0..6.3)) * rotation_y(rng.gen_range(0.0..3.2)) * rotation_z(rng.gen_range(0.0..6.3))
    }

    #[test]
    fn euler_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let r = random_rotation(&mut rng);
            let (a, b, g) = euler_zyz(&r);
            let back = rotation_z(a) * rotation_y(b) * rotation_z(g);
            assert!((back - r).amax() < 1e-12);
        }
        for r in [rotation_z(0.7), rotation_z(0.7) * rotation_y(std::f64::consts::PI) * rotation_z(0.2)] {
            let (a, b, g) = euler_zyz(&r);
            assert!((rotation_z(a) * rotation_y(b) * rotation_z(g) - r).amax() < 1e-12);
        }
    }

    #[test]
    fn identity_and_z_rotation() {
        let basis = WignerBasis::new(4).unwrap();
        let id = basis.big_d(&Matrix3::identity());
        assert!(max_abs_diff_c(&id, &CMatrix::identity(9, 9)) < 1e-13);
        let phi = 0.83;
        let dz = basis.big_d(&rotation_z(phi));
        for a in 0..9 {
            for b in 0..9 {
                let m = a as f64 - 4.0;
                let expected = if a == b { Complex::from_polar(1.0, -m * phi) } else { Complex::new(0.0, 0.0) };
                assert!((dz[(a, b)] - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn small_d_closed_form_s1() {
        let b = 0.9f64;
        let d = WignerBasis::new(1).unwrap().small_d(b);
        let (c, s) = (b.cos(), b.sin());
        // rows m' = -1, 0, 1
        let expected = [
            [(1.0 + c) / 2.0, s / 2f64.sqrt(), (1.0 - c) / 2.0],
            [-s / 2f64.sqrt(), c, s / 2f64.sqrt()],
            [(1.0 - c) / 2.0, -s / 2f64.sqrt(), (1.0 + c) / 2.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((d[(i, j)] - expected[i][j]).abs() < 1e-14, "{i}{j} {} {}", d[(i, j)], expected[i][j]);
            }
        }
    }

    #[test]
    fn s1_matches_cartesian_conjugation() {
        // Y_{1,m} = sqrt(3/(4 pi)) e_m . x with spherical basis vectors e_m.
        let r = crate::sphere::rotations::RotationSet::default_set().generators()[1].to_f64();
        let h = 0.5f64.sqrt();
        let u = CMatrix::from_row_slice(
            3,
            3,
            &[
                Complex::new(h, 0.0),
                Complex::new(0.0, -h),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(-h, 0.0),
                Complex::new(0.0, -h),
                Complex::new(0.0, 0.0),
            ],
        );
        // rows of u: coordinates of Y_{1,-1}, Y_{1,0}, Y_{1,1} in (x, y, z) (up to sqrt(3/4pi))
        let rc = r.map(|v| Complex::new(v, 0.0));
        let rc = CMatrix::from_fn(3, 3, |i, j| rc[(i, j)]);
        // R Y_m = sum_m' D_{m'm} Y_m' with Y_m ~ u_m . x gives D = conj(u) R u^T
        let expected = (&u * rc.transpose() * u.adjoint()).transpose();
        let got = wigner_d(1, &r).unwrap();
        assert!(max_abs_diff_c(&got, &expected) < 1e-13, "{got} {expected}");
    }

    #[test]
    fn coefficient_action_matches_pointwise_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = 7;
        let basis = WignerBasis::new(s).unwrap();
        let coeffs: Vec<Complex> = (0..2 * s + 1).map(|_| Complex::new(rng.gen(), rng.gen())).collect();
        for _ in 0..5 {
            let g = random_rotation(&mut rng);
            let d = basis.big_d(&g);
            let rotated = d.adjoint() * nalgebra::DVector::from_vec(coeffs.clone());
            for _ in 0..5 {
                let (t, phi): (f64, f64) = (rng.gen_range(0.0..3.1), rng.gen_range(0.0..6.2));
                let x = nalgebra::Vector3::new(t.sin() * phi.cos(), t.sin() * phi.sin(), t.cos());
                let gx = g * x;
                let (gt, gphi) = to_angles([gx[0], gx[1], gx[2]]);
                let lhs = evaluate_point(rotated.as_slice(), t, phi);
                let rhs = evaluate_point(&coeffs, gt, gphi);
                assert!((lhs - rhs).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn unitary_and_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in [1usize, 10, 40] {
            let basis = WignerBasis::new(s).unwrap();
            for _ in 0..4 {
                let (a, b) = (random_rotation(&mut rng), random_rotation(&mut rng));
                let (da, db, dab) = (basis.big_d(&a), basis.big_d(&b), basis.big_d(&(a * b)));
                assert!(unitarity_defect(&da) < 1e-10);
                assert!(max_abs_diff_c(&dab, &(&da * &db)) < 1e-8);
            }
        }
    }
}
