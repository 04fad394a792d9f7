//! Rotation sets with exact rational entries, reduced words in the generators
//! and how far words move points of the sphere.

use std::collections::HashSet;
use std::fmt;

use nalgebra::Matrix3;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::{Error, Result};

/// 3x3 matrix of exact rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix(pub [BigRational; 9]);

impl RationalMatrix {
    pub fn identity() -> Self {
        let z = BigRational::zero;
        let o = BigRational::one;
        Self([o(), z(), z(), z(), o(), z(), z(), z(), o()])
    }

    /// Parses nine `"num/den"` (or integer) strings, row-major.
    pub fn parse(entries: &[impl AsRef<str>]) -> Result<Self> {
        if entries.len() != 9 {
            return Err(Error::InvalidRotation(format!("expected 9 entries, got {}", entries.len())));
        }
        let mut out: [BigRational; 9] = std::array::from_fn(|_| BigRational::zero());
        for (slot, e) in out.iter_mut().zip(entries) {
            *slot = parse_rational(e.as_ref())?;
        }
        Ok(Self(out))
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.0[3 * i + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|k| {
            let (i, j) = (k / 3, k % 3);
            (0..3).fold(BigRational::zero(), |acc, l| acc + self.get(i, l) * other.get(l, j))
        }))
    }

    pub fn transpose(&self) -> Self {
        Self(std::array::from_fn(|k| self.get(k % 3, k / 3).clone()))
    }

    pub fn determinant(&self) -> BigRational {
        let m = |i, j| self.get(i, j);
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    }

    pub fn is_rotation(&self) -> bool {
        self.mul(&self.transpose()) == Self::identity() && self.determinant() == BigRational::one()
    }

    pub fn to_f64(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.get(i, j).to_f64().unwrap_or(f64::NAN))
    }

    /// `"num/den"` strings, row-major.
    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|r| r.to_string()).collect()
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidRotation(format!("bad rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// `M >= 2` rotations `g_1..g_M`; the averaging operator uses
/// `{g_j, g_j^{-1}}`, so `q = 2M - 1`.
#[derive(Clone, Debug)]
pub struct RotationSet {
    rotations: Vec<RationalMatrix>,
}

impl RotationSet {
    /// Checks orthogonality and unit determinant exactly, and that the
    /// symmetric set has `2M` distinct elements.
    pub fn new(rotations: Vec<RationalMatrix>) -> Result<Self> {
        if rotations.len() < 2 {
            return Err(Error::InvalidRotation(format!("need at least 2 rotations, got {}", rotations.len())));
        }
        for (j, r) in rotations.iter().enumerate() {
            if !r.is_rotation() {
                return Err(Error::InvalidRotation(format!("generator {j} is not in SO(3)")));
            }
        }
        let set = Self { rotations };
        let distinct: HashSet<RationalMatrix> = (0..set.letters()).map(|a| set.letter(a)).collect();
        if distinct.len() != set.letters() {
            return Err(Error::InvalidRotation("generators and inverses are not 2M distinct elements".into()));
        }
        Ok(set)
    }

    /// Rotations by `arccos(3/5)` about the z- and x-axes.
    pub fn default_set() -> Self {
        let z = RationalMatrix::parse(&["3/5", "-4/5", "0", "4/5", "3/5", "0", "0", "0", "1"]).expect("valid");
        let x = RationalMatrix::parse(&["1", "0", "0", "0", "3/5", "-4/5", "0", "4/5", "3/5"]).expect("valid");
        Self::new(vec![z, x]).expect("default rotations are valid")
    }

    pub fn m(&self) -> usize {
        self.rotations.len()
    }

    pub fn q(&self) -> usize {
        2 * self.m() - 1
    }

    pub fn generators(&self) -> &[RationalMatrix] {
        &self.rotations
    }

    /// Number of letters `2M`; letter `2j` is `g_j`, `2j + 1` is `g_j^{-1}`.
    pub fn letters(&self) -> usize {
        2 * self.m()
    }

    pub fn letter(&self, a: usize) -> RationalMatrix {
        let g = &self.rotations[a / 2];
        if a % 2 == 0 {
            g.clone()
        } else {
            g.transpose()
        }
    }

    pub fn letters_f64(&self) -> Vec<Matrix3<f64>> {
        (0..self.letters()).map(|a| self.letter(a).to_f64()).collect()
    }

    /// Conjugates every generator by the rotation `r`: `g -> r g r^T`.
    pub fn conjugated(&self, r: &RationalMatrix) -> Result<Self> {
        Self::new(self.rotations.iter().map(|g| r.mul(g).mul(&r.transpose())).collect())
    }
}

impl fmt::Display for RotationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, g) in self.rotations.iter().enumerate() {
            if j > 0 {
                f.write_str("; ")?;
            }
            write!(f, "[{}]", g.to_strings().join(" "))?;
        }
        Ok(())
    }
}

fn inverse_letter(a: usize) -> usize {
    a ^ 1
}

/// A reduced word and its exact matrix (the product of its letters, left to right).
#[derive(Clone, Debug)]
pub struct Word {
    pub letters: Vec<usize>,
    pub matrix: RationalMatrix,
}

impl Word {
    /// `a`, `A` for `g_1^{+-1}`, `b`, `B` for `g_2^{+-1}`, ...
    pub fn label(&self) -> String {
        self.letters
            .iter()
            .map(|&a| {
                let c = (b'a' + (a / 2) as u8) as char;
                if a % 2 == 0 {
                    c
                } else {
                    c.to_ascii_uppercase()
                }
            })
            .collect()
    }
}

/// All reduced words of length `n` (`2M (2M-1)^{n-1}` of them), in
/// lexicographic order of letters, with exact products.
pub fn enumerate_words(rot: &RotationSet, n: usize) -> Result<Vec<Word>> {
    if n == 0 {
        return Err(Error::InvalidArgument("word length must be >= 1".into()));
    }
    let letters: Vec<RationalMatrix> = (0..rot.letters()).map(|a| rot.letter(a)).collect();
    let mut words: Vec<Word> =
        (0..rot.letters()).map(|a| Word { letters: vec![a], matrix: letters[a].clone() }).collect();
    for _ in 1..n {
        let mut next = Vec::with_capacity(words.len() * (rot.letters() - 1));
        for w in &words {
            let last = *w.letters.last().expect("non-empty word");
            for a in 0..rot.letters() {
                if a == inverse_letter(last) {
                    continue;
                }
                let mut l = w.letters.clone();
                l.push(a);
                next.push(Word { letters: l, matrix: w.matrix.mul(&letters[a]) });
            }
        }
        words = next;
    }
    Ok(words)
}

/// `2M (2M-1)^{n-1}`.
pub fn reduced_word_count(m: usize, n: usize) -> usize {
    if n == 0 {
        return 1;
    }
    2 * m * (2 * m - 1).pow(n as u32 - 1)
}

/// Number of pairs of equal matrices among the words (exact comparison).
pub fn coincident_words(words: &[Word]) -> usize {
    let mut seen = HashSet::with_capacity(words.len());
    words.iter().filter(|w| !seen.insert(&w.matrix)).count()
}

/// Rotation angle in `[0, pi]` of a rotation matrix.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let axis = [r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]];
    let sin2 = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    sin2.atan2(r.trace() - 1.0)
}

/// Geodesic distance between unit vectors.
pub fn geodesic(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let cross = [x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]];
    let c = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    c.atan2(x[0] * y[0] + x[1] * y[1] + x[2] * y[2])
}

pub fn apply(r: &Matrix3<f64>, x: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| r[(i, 0)] * x[0] + r[(i, 1)] * x[1] + r[(i, 2)] * x[2])
}

/// Word-by-word displacement at one point.
#[derive(Clone, Debug, Serialize)]
pub struct PointSeparation {
    pub point: [f64; 3],
    pub generic: bool,
    /// Ascending `d(x, g x)` over words of the given length.
    pub distances: Vec<f64>,
    /// Words with `d(x, g x) <= threshold`, per threshold.
    pub close_counts: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub n: usize,
    pub word_count: usize,
    pub thresholds: Vec<f64>,
    pub points: Vec<PointSeparation>,
    /// Smallest rotation angle over words of length `k`, for `k = 1..=n`.
    pub min_angle_by_length: Vec<f64>,
    /// `max_k min_angle(k)^{-1/k}`: the `C` in `angle >= C^{-k}`.
    pub fitted_c: f64,
    /// Largest close-word count at generic points, per threshold.
    pub max_close_generic: Vec<usize>,
}

/// Distances `d(x, g x)` for all reduced words `g` of length `n`, at the
/// generic points given plus the fixed points of the generators.
pub fn separation_stats(rot: &RotationSet, n: usize, generic_points: &[[f64; 3]], thresholds: &[f64]) -> Result<SeparationReport> {
    let mut min_angle_by_length = Vec::with_capacity(n);
    let mut words_n = Vec::new();
    for k in 1..=n {
        let mats: Vec<Matrix3<f64>> = enumerate_words(rot, k)?.iter().map(|w| w.matrix.to_f64()).collect();
        min_angle_by_length.push(mats.iter().map(rotation_angle).fold(f64::INFINITY, f64::min));
        if k == n {
            words_n = mats;
        }
    }
    let fitted_c = min_angle_by_length
        .iter()
        .enumerate()
        .map(|(k, a)| a.powf(-1.0 / (k + 1) as f64))
        .fold(0.0, f64::max);

    let mut points: Vec<([f64; 3], bool)> = generic_points.iter().map(|&p| (p, true)).collect();
    for g in rot.generators() {
        let axis = rotation_axis(&g.to_f64());
        points.push((axis, false));
        points.push((axis.map(|v| -v), false));
    }
    let points: Vec<PointSeparation> = points
        .into_iter()
        .map(|(x, generic)| {
            let mut distances: Vec<f64> = words_n.iter().map(|g| geodesic(&x, &apply(g, &x))).collect();
            distances.sort_by(f64::total_cmp);
            let close_counts = thresholds.iter().map(|&t| distances.partition_point(|&d| d <= t)).collect();
            PointSeparation { point: x, generic, distances, close_counts }
        })
        .collect();
    let max_close_generic = (0..thresholds.len())
        .map(|i| points.iter().filter(|p| p.generic).map(|p| p.close_counts[i]).max().unwrap_or(0))
        .collect();
    Ok(SeparationReport {
        n,
        word_count: words_n.len(),
        thresholds: thresholds.to_vec(),
        points,
        min_angle_by_length,
        fitted_c,
        max_close_generic,
    })
}

/// Unit axis of a non-identity rotation.
pub fn rotation_axis(r: &Matrix3<f64>) -> [f64; 3] {
    let v = [r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n > 1e-12 {
        return v.map(|c| c / n);
    }
    // angle pi: the axis spans the range of R + I
    let m = r + Matrix3::identity();
    let col = (0..3).map(|j| m.column(j).into_owned()).max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("3 columns");
    let n = col.norm();
    [col[0] / n, col[1] / n, col[2] / n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_set_is_valid() {
        let r = RotationSet::default_set();
        assert_eq!(r.m(), 2);
        assert_eq!(r.q(), 3);
        for g in r.generators() {
            assert!(g.is_rotation());
        }
    }

    #[test]
    fn rejects_bad_sets() {
        let id = RationalMatrix::identity();
        let not_rot = RationalMatrix::parse(&["1", "0", "0", "0", "1", "0", "0", "0", "-1"]).unwrap();
        let half = RationalMatrix::parse(&["-1", "0", "0", "0", "-1", "0", "0", "0", "1"]).unwrap();
        let z = RotationSet::default_set().generators()[0].clone();
        assert!(RotationSet::new(vec![z.clone()]).is_err());
        assert!(RotationSet::new(vec![z.clone(), not_rot]).is_err());
        // an involution equals its own inverse
        assert!(RotationSet::new(vec![z.clone(), half]).is_err());
        assert!(RotationSet::new(vec![z.clone(), z.transpose()]).is_err());
        assert!(RotationSet::new(vec![z, id]).is_err());
        assert!(RationalMatrix::parse(&["1/0"; 9]).is_err());
        assert!(RationalMatrix::parse(&["x"; 9]).is_err());
    }

    #[test]
    fn word_counts() {
        let r = RotationSet::default_set();
        assert_eq!(enumerate_words(&r, 1).unwrap().len(), 4);
        assert_eq!(enumerate_words(&r, 2).unwrap().len(), 12);
        for n in 1..=5 {
            let words = enumerate_words(&r, n).unwrap();
            assert_eq!(words.len(), reduced_word_count(2, n));
            assert!(words.iter().all(|w| w.letters.windows(2).all(|p| p[1] != p[0] ^ 1)));
            assert_eq!(coincident_words(&words), 0);
        }
        assert_eq!(enumerate_words(&r, 2).unwrap()[1].label(), "ab");
    }

    #[test]
    fn exact_products_stay_rotations() {
        let r = RotationSet::default_set();
        for w in enumerate_words(&r, 4).unwrap().iter().step_by(17) {
            assert!(w.matrix.is_rotation());
        }
    }

    #[test]
    fn powers_of_a_generator() {
        let r = RotationSet::default_set();
        let g = r.generators()[0].to_f64();
        let theta = (0.6f64).acos();
        let mut p = Matrix3::identity();
        for n in 1..=10 {
            p *= g;
            let wrapped = (n as f64 * theta).rem_euclid(2.0 * std::f64::consts::PI);
            let expected = wrapped.min(2.0 * std::f64::consts::PI - wrapped);
            assert!((rotation_angle(&p) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_points_and_generic_points() {
        let r = RotationSet::default_set();
        let generic = [[0.36, 0.48, 0.8], [0.0, 0.6, -0.8]];
        let rep = separation_stats(&r, 3, &generic, &[1e-3]).unwrap();
        assert_eq!(rep.word_count, 36);
        // north pole: a^3 and A^3 fix it
        let pole = rep.points.iter().find(|p| !p.generic && p.point[2] > 0.99).unwrap();
        assert_eq!(pole.close_counts[0], 2);
        assert!(rep.max_close_generic[0] <= 2);
        assert!(rep.fitted_c.is_finite() && rep.fitted_c > 1.0);
    }

    #[test]
    fn geodesic_distance() {
        let x = [1.0, 0.0, 0.0];
        assert!((geodesic(&x, &[0.0, 1.0, 0.0]) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((geodesic(&x, &[-1.0, 0.0, 0.0]) - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(geodesic(&x, &x), 0.0);
    }
}
