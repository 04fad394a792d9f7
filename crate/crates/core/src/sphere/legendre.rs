//! Legendre polynomials, fully normalized associated Legendre functions and
//! the zonal kernel `Z_s(t) = (2s+1)/(4 pi) P_s(cos t)`.

use std::f64::consts::PI;

/// `P_s(x)` by the upward three-term recursion.
pub fn legendre(s: usize, x: f64) -> f64 {
    legendre_pair(s, x).0
}

/// `(P_s(x), P_{s-1}(x))`, with `P_{-1} = 0`.
pub fn legendre_pair(s: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..s {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `P_0(x), ..., P_{s_max}(x)`.
pub fn legendre_table(s_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(s_max + 1);
    let (mut prev, mut cur) = (0.0, 1.0);
    out.push(cur);
    for k in 0..s_max {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// `Z_s(t) = (2s+1)/(4 pi) P_s(cos t)`, the reproducing kernel of `H_s` for
/// convolution against surface measure.
pub fn zonal(s: usize, t: f64) -> f64 {
    (2 * s + 1) as f64 / (4.0 * PI) * legendre(s, t.cos())
}

/// Rescaling step for the extended-range recursion.
const BIG: f64 = 1.157_920_892_373_162e77; // 2^256
const BIG_EXP: i32 = 256;

/// `lambda_s^m(x)` for `m = 0..=s`, where
/// `Y_{s,m}(t, phi) = lambda_s^m(cos t) e^{i m phi}` is the orthonormal
/// spherical harmonic with Condon-Shortley phase.
///
/// The sectoral start values `lambda_m^m ~ sin(t)^m` underflow long before
/// `lambda_s^m` becomes negligible, so they are carried as mantissa and
/// binary exponent and only collapsed to `f64` at the end.
pub fn assoc_legendre_row(s: usize, x: f64) -> Vec<f64> {
    let sin_t = (1.0 - x * x).max(0.0).sqrt();
    let mut out = vec![0.0; s + 1];
    // lambda_m^m as (mantissa, exponent)
    let mut mm = (1.0 / (4.0 * PI)).sqrt();
    let mut mm_exp: i32 = 0;
    for m in 0..=s {
        if m > 0 {
            let mf = m as f64;
            mm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_t;
            if mm != 0.0 && mm.abs() < 1.0 / BIG {
                mm *= BIG;
                mm_exp -= BIG_EXP;
            }
        }
        out[m] = upward_in_degree(s, m, x, mm, mm_exp);
    }
    out
}

/// Recurses `lambda_l^m` from `l = m` to `l = s`, starting from
/// `mantissa * 2^exp`.
fn upward_in_degree(s: usize, m: usize, x: f64, mantissa: f64, mut exp: i32) -> f64 {
    if mantissa == 0.0 {
        return 0.0;
    }
    let mf = m as f64;
    let mut prev = 0.0;
    let mut cur = mantissa;
    for l in m + 1..=s {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = if l == m + 1 {
            0.0
        } else {
            let lm = lf - 1.0;
            ((lm * lm - mf * mf) / (4.0 * lm * lm - 1.0)).sqrt()
        };
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
        if exp < 0 && cur.abs() > 1.0 {
            // move mass back into the exponent while it is still negative
            cur /= BIG;
            prev /= BIG;
            exp += BIG_EXP;
        }
    }
    cur * 2f64.powi(exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degrees() {
        for x in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            assert_eq!(legendre(0, x), 1.0);
            assert_eq!(legendre(1, x), x);
            assert!((legendre(2, x) - (1.5 * x * x - 0.5)).abs() < 1e-15);
            assert!((legendre(3, x) - (2.5 * x * x * x - 1.5 * x)).abs() < 1e-15);
        }
        assert!((zonal(7, 0.0) - 15.0 / (4.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn bounded_by_one() {
        for s in [10usize, 100, 1000] {
            for i in 0..=200 {
                let x = -1.0 + i as f64 / 100.0;
                assert!(legendre(s, x).abs() <= 1.0 + 1e-12);
            }
            assert!((legendre(s, 1.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn table_matches_single() {
        let t = legendre_table(30, 0.37);
        for (s, v) in t.iter().enumerate() {
            assert_eq!(*v, legendre(s, 0.37));
        }
    }

    #[test]
    fn associated_closed_forms() {
        // Y_{1,1} = -sqrt(3/(8 pi)) sin t e^{i phi}, Y_{2,2} = sqrt(15/(32 pi)) sin^2 t e^{2 i phi}
        for t in [0.1, 0.9, 2.0] {
            let x = f64::cos(t);
            let r1 = assoc_legendre_row(1, x);
            assert!((r1[0] - (3.0 / (4.0 * PI)).sqrt() * x).abs() < 1e-15);
            assert!((r1[1] + (3.0 / (8.0 * PI)).sqrt() * t.sin()).abs() < 1e-15);
            let r2 = assoc_legendre_row(2, x);
            assert!((r2[2] - (15.0 / (32.0 * PI)).sqrt() * t.sin().powi(2)).abs() < 1e-15);
            assert!((r2[1] + (15.0 / (8.0 * PI)).sqrt() * t.sin() * x).abs() < 1e-15);
        }
    }

    #[test]
    fn addition_theorem() {
        // sum_m |Y_{s,m}|^2 = (2s+1)/(4 pi) at every point
        for s in [5usize, 60, 400, 1000] {
            for x in [0.999_999, 0.9, 0.1, -0.7] {
                let row = assoc_legendre_row(s, x);
                let total: f64 = row[0] * row[0] + 2.0 * row[1..].iter().map(|v| v * v).sum::<f64>();
                let expected = (2 * s + 1) as f64 / (4.0 * PI);
                assert!((total - expected).abs() < 1e-10 * expected, "s={s} x={x} {total} {expected}");
            }
        }
    }

    #[test]
    fn zero_order_is_scaled_legendre() {
        for s in [3usize, 50, 300] {
            let x = 0.42;
            let row = assoc_legendre_row(s, x);
            let expected = ((2 * s + 1) as f64 / (4.0 * PI)).sqrt() * legendre(s, x);
            assert!((row[0] - expected).abs() < 1e-12);
        }
    }
}
