//! The averaging operator `T_q f = q^{-1/2} sum_j (f(g_j x) + f(g_j^{-1} x))`
//! restricted to `H_s`, and its eigenbasis.

use nalgebra::{DVector, SymmetricEigen};

use crate::spectral::Theta;
use crate::sphere::rotations::RotationSet;
use crate::sphere::wigner::WignerBasis;
use crate::sphere::{CMatrix, Complex};
use crate::{Error, Matrix, Result};

/// Basis record attached to every [`HarmonicSpace`].
pub const BASIS_CONVENTION: &str = "complex Y_{s,m}, m = -s..s, Condon-Shortley phase, \
     Y_{s,m} = sqrt((2s+1)/(4 pi) (s-m)!/(s+m)!) P_s^m(cos t) e^{i m phi}";

/// `H_s` with the matrix of `T_q` in the basis `Y_{s,m}`.
#[derive(Clone, Debug)]
pub struct HarmonicSpace {
    pub s: usize,
    pub q: usize,
    /// Hermitian `(2s+1) x (2s+1)`.
    pub averaging_matrix: CMatrix,
    pub basis: &'static str,
}

impl HarmonicSpace {
    pub fn dim(&self) -> usize {
        2 * self.s + 1
    }

    /// `max |A - A^†|`.
    pub fn hermitian_defect(&self) -> f64 {
        let a = &self.averaging_matrix;
        crate::sphere::wigner::max_abs_diff_c(a, &a.adjoint())
    }

    /// `(q+1)/sqrt(q)`, the triangle-inequality bound on the spectrum.
    pub fn spectral_bound(&self) -> f64 {
        (self.q as f64 + 1.0) / (self.q as f64).sqrt()
    }
}

/// `q^{-1/2} sum_j (D(g_j) + D(g_j)^†)`.
pub fn build_averaging(s: usize, rot: &RotationSet) -> Result<HarmonicSpace> {
    let basis = WignerBasis::new(s)?;
    let dim = 2 * s + 1;
    let mut a = CMatrix::zeros(dim, dim);
    for g in rot.generators() {
        let d = basis.big_d(&g.to_f64());
        a += &d + d.adjoint();
    }
    let q = rot.q();
    a /= Complex::new((q as f64).sqrt(), 0.0);
    // exactly Hermitian
    let adj = a.adjoint();
    a = (a + adj) * Complex::new(0.5, 0.0);
    Ok(HarmonicSpace { s, q, averaging_matrix: a, basis: BASIS_CONVENTION })
}

/// Orthonormal eigenvectors of the averaging matrix (ascending eigenvalues).
#[derive(Clone, Debug)]
pub struct JointEigenbasis {
    pub s: usize,
    pub eigenvalues: Vec<f64>,
    /// `lambda_j = 2 cos(alpha_j)`.
    pub thetas: Vec<Theta>,
    /// Coefficient vectors as columns.
    pub vectors: CMatrix,
    pub max_residual: f64,
    pub orthonormality_defect: f64,
}

impl JointEigenbasis {
    pub fn coefficients(&self, j: usize) -> Vec<Complex> {
        self.vectors.column(j).iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

pub fn joint_eigenbasis(space: &HarmonicSpace) -> Result<JointEigenbasis> {
    let dim = space.dim();
    let eig = SymmetricEigen::try_new(space.averaging_matrix.clone(), f64::EPSILON, 100 * dim.max(10))
        .ok_or_else(|| Error::ConvergenceFailure(format!("averaging matrix on H_{}", space.s)))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = CMatrix::zeros(dim, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        // fix the global phase: largest entry real positive
        let (imax, _) = v.iter().enumerate().fold((0, 0.0), |b, (i, c)| if c.norm() > b.1 { (i, c.norm()) } else { b });
        let phase = v[imax] / Complex::new(v[imax].norm(), 0.0);
        v /= phase;
        vectors.set_column(dst, &v);
        eigenvalues.push(eig.eigenvalues[src]);
    }
    let applied = &space.averaging_matrix * &vectors;
    let max_residual = (0..dim)
        .map(|j| (applied.column(j) - vectors.column(j) * Complex::new(eigenvalues[j], 0.0)).norm())
        .fold(0.0, f64::max);
    let orthonormality_defect = crate::sphere::wigner::unitarity_defect(&vectors);
    let thetas = eigenvalues.iter().map(|&l| Theta::from_eigenvalue(l)).collect();
    Ok(JointEigenbasis { s: space.s, eigenvalues, thetas, vectors, max_residual, orthonormality_defect })
}

/// Unitary `C` whose columns express the real harmonics in the complex basis:
/// column `m + s` is `Y^R_{s,m}` (`cos` type for `m > 0`, `sin` type for `m < 0`).
pub fn real_basis(s: usize) -> CMatrix {
    let dim = 2 * s + 1;
    let h = 0.5f64.sqrt();
    let mut c = CMatrix::zeros(dim, dim);
    c[(s, s)] = Complex::new(1.0, 0.0);
    for m in 1..=s {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let (pos, neg) = (s + m, s - m);
        // Y^R_m = (Y_{-m} + (-1)^m Y_m) / sqrt 2
        c[(neg, pos)] = Complex::new(h, 0.0);
        c[(pos, pos)] = Complex::new(sign * h, 0.0);
        // Y^R_{-m} = i (Y_{-m} - (-1)^m Y_m) / sqrt 2
        c[(neg, neg)] = Complex::new(0.0, h);
        c[(pos, neg)] = Complex::new(0.0, -sign * h);
    }
    c
}

/// The averaging matrix in the real basis; real symmetric because `T_q`
/// maps real functions to real functions. Returns the matrix and the largest
/// discarded imaginary part.
pub fn real_averaging_matrix(space: &HarmonicSpace) -> (Matrix, f64) {
    let c = real_basis(space.s);
    let m = c.adjoint() * &space.averaging_matrix * &c;
    let imag = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    (m.map(|z| z.re), imag)
}

/// `c -> C^† c`: coefficients in the real basis.
pub fn to_real_coefficients(s: usize, coeffs: &[Complex]) -> Vec<Complex> {
    let v = real_basis(s).adjoint() * DVector::from_column_slice(coeffs);
    v.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::harmonics::evaluate_point;
    use crate::sphere::rotations::RationalMatrix;
    use crate::sphere::wigner::max_abs_diff_c;

    #[test]
    fn degree_zero() {
        let rot = RotationSet::default_set();
        let space = build_averaging(0, &rot).unwrap();
        let expected = 4.0 / 3f64.sqrt();
        assert!((space.averaging_matrix[(0, 0)] - Complex::new(expected, 0.0)).norm() < 1e-14);
        let e = joint_eigenbasis(&space).unwrap();
        assert!((e.eigenvalues[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn hermitian_and_bounded() {
        let rot = RotationSet::default_set();
        for s in [1usize, 5, 30] {
            let space = build_averaging(s, &rot).unwrap();
            assert!(space.hermitian_defect() < 1e-10);
            let e = joint_eigenbasis(&space).unwrap();
            assert!(e.max_residual < 1e-9);
            assert!(e.orthonormality_defect < 1e-10);
            for &l in &e.eigenvalues {
                assert!(l.abs() <= space.spectral_bound() + 1e-8);
            }
        }
    }

    #[test]
    fn matches_pointwise_averaging() {
        let rot = RotationSet::default_set();
        let s = 4;
        let space = build_averaging(s, &rot).unwrap();
        let coeffs: Vec<Complex> = (0..9).map(|k| Complex::new(k as f64 * 0.1, 1.0 - k as f64 * 0.05)).collect();
        let image = &space.averaging_matrix * DVector::from_vec(coeffs.clone());
        let letters = rot.letters_f64();
        for (t, phi) in [(0.4, 1.0), (2.2, -2.5)] {
            let x = nalgebra::Vector3::new(f64::sin(t) * f64::cos(phi), f64::sin(t) * f64::sin(phi), f64::cos(t));
            let mut avg = Complex::new(0.0, 0.0);
            for g in &letters {
                let y = g * x;
                let (ty, py) = crate::sphere::harmonics::to_angles([y[0], y[1], y[2]]);
                avg += evaluate_point(&coeffs, ty, py);
            }
            avg /= Complex::new(3f64.sqrt(), 0.0);
            assert!((avg - evaluate_point(image.as_slice(), t, phi)).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugated_generators_are_equivalent() {
        let rot = RotationSet::default_set();
        // rotation by arccos(5/13) about y
        let r = RationalMatrix::parse(&["5/13", "0", "12/13", "0", "1", "0", "-12/13", "0", "5/13"]).unwrap();
        let conj = rot.conjugated(&r).unwrap();
        let s = 6;
        let a = build_averaging(s, &rot).unwrap();
        let b = build_averaging(s, &conj).unwrap();
        let ea = joint_eigenbasis(&a).unwrap().eigenvalues;
        let eb = joint_eigenbasis(&b).unwrap().eigenvalues;
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() < 1e-8);
        }
        let d = WignerBasis::new(s).unwrap().big_d(&r.to_f64());
        // D(R g R^-1) = D(R) D(g) D(R)^†
        let expected = &d * &a.averaging_matrix * d.adjoint();
        assert!(max_abs_diff_c(&expected, &b.averaging_matrix) < 1e-10);
    }

    #[test]
    fn real_basis_oracle() {
        let rot = RotationSet::default_set();
        let space = build_averaging(2, &rot).unwrap();
        let c = real_basis(2);
        assert!(crate::sphere::wigner::unitarity_defect(&c) < 1e-15);
        let (real, imag) = real_averaging_matrix(&space);
        assert!(imag < 1e-12);
        let sym = SymmetricEigen::new(real.clone());
        let mut ev: Vec<f64> = sym.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let joint = joint_eigenbasis(&space).unwrap();
        for (a, b) in ev.iter().zip(&joint.eigenvalues) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((&real - real.transpose()).amax() < 1e-12);
    }

    #[test]
    fn real_basis_functions_are_real() {
        let s = 3;
        let c = real_basis(s);
        for col in 0..2 * s + 1 {
            let coeffs: Vec<Complex> = c.column(col).iter().copied().collect();
            let v = evaluate_point(&coeffs, 0.9, 2.1);
            assert!(v.im.abs() < 1e-14, "column {col}: {v}");
        }
        let back = to_real_coefficients(s, &c.column(2).iter().copied().collect::<Vec<_>>());
        assert!((back[2] - Complex::new(1.0, 0.0)).norm() < 1e-14);
    }
}
