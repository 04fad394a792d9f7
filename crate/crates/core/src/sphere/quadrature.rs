//! Gauss-Legendre rules, the product grid on the sphere and adaptive
//! Gauss-Kronrod integration on an interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::sphere::legendre::legendre_pair;
use crate::{Error, Result};

/// Nodes (ascending) and weights of the `n`-point Gauss-Legendre rule on
/// `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, pm1) = legendre_pair(n, x);
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (p, pm1) = legendre_pair(n, x);
        dp = if p.is_finite() { nf * (x * p - pm1) / (x * x - 1.0) } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Smallest integer `>= n` whose prime factors are 2, 3 and 5.
pub fn fast_fft_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Gauss-Legendre nodes in `cos(t)` times equispaced azimuths.
///
/// `sum_{i,k} w_i (2 pi / n_phi) f(t_i, phi_k)` integrates against surface
/// measure (total `4 pi`) and is exact for `cos(t)`-degree `<= 2 n_theta - 1`
/// and azimuthal frequencies `< n_phi`.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    /// `cos(t_i)`, ascending.
    pub cos_theta: Vec<f64>,
    pub weights: Vec<f64>,
    pub n_phi: usize,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        assert!(n_theta > 0 && n_phi > 0, "empty sphere grid");
        let (cos_theta, weights) = gauss_legendre(n_theta);
        Self { cos_theta, weights, n_phi }
    }

    /// Exact for products of harmonics of total degree `<= degree`.
    pub fn for_degree(degree: usize) -> Self {
        Self::new(degree / 2 + 1, fast_fft_len(degree + 1))
    }

    /// Resolution for `||psi||_p` with `psi` of degree `s`:
    /// `n_theta >= s max(2, ceil(p/2)) + 2`, `n_phi >= p s + 1`
    /// (`p = inf` uses the `p = 2` rule oversampled by 4).
    pub fn for_norm(s: usize, p: f64) -> Self {
        let (n_theta, n_phi) = norm_resolution(s, p);
        Self::new(n_theta, fast_fft_len(n_phi))
    }

    /// Smallest grid meeting the norm rule for every `p` in `ps`.
    pub fn for_norms(s: usize, ps: &[f64]) -> Self {
        let (n_theta, n_phi) =
            ps.iter().map(|&p| norm_resolution(s, p)).fold((1, 1), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        Self::new(n_theta, fast_fft_len(n_phi))
    }

    pub fn n_theta(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_phi as f64
    }

    pub fn phi_weight(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum::<f64>() * self.phi_weight() * self.n_phi as f64
    }

    /// Unit vector of grid point `(i, k)`.
    pub fn point(&self, i: usize, k: usize) -> [f64; 3] {
        let z = self.cos_theta[i];
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = self.phi(k);
        [r * phi.cos(), r * phi.sin(), z]
    }

    /// Fails with `ResolutionTooLow` unless this grid satisfies
    /// [`SphereGrid::for_norm`]'s rule.
    pub fn check_norm_resolution(&self, s: usize, p: f64) -> Result<()> {
        let (n_theta, n_phi) = norm_resolution(s, p);
        if self.n_theta() < n_theta {
            return Err(Error::ResolutionTooLow { needed: n_theta, have: self.n_theta() });
        }
        if self.n_phi < n_phi {
            return Err(Error::ResolutionTooLow { needed: n_phi, have: self.n_phi });
        }
        Ok(())
    }
}

fn norm_resolution(s: usize, p: f64) -> (usize, usize) {
    if p.is_infinite() {
        return (4 * s + 2, 8 * s + 1);
    }
    let half = (p / 2.0).ceil() as usize;
    (s * half.max(2) + 2, (p.ceil() as usize) * s + 1)
}

// G7-K15 nodes and weights (QUADPACK).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let sum = f(c - x) + f(c + x);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive G7-K15 integral of `f` over `[a, b]`, starting from the partition
/// given by `breakpoints` (sorted, inside `(a, b)`) refined into `initial`
/// equal pieces each. Stops when the summed error estimate is below
/// `rel_tol * |I|` (or `1e-300`).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    initial: usize,
    rel_tol: f64,
) -> Result<f64> {
    const MAX_SEGMENTS: usize = 200_000;
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        let pieces = initial.max(1);
        let step = (w[1] - w[0]) / pieces as f64;
        for i in 0..pieces {
            let lo = w[0] + step * i as f64;
            let hi = if i + 1 == pieces { w[1] } else { lo + step };
            let (value, error) = gk15(&f, lo, hi);
            heap.push(Segment { a: lo, b: hi, value, error });
        }
    }
    let exact_sums = |heap: &BinaryHeap<Segment>| -> (f64, f64) {
        (heap.iter().map(|s| s.value).sum(), heap.iter().map(|s| s.error).sum())
    };
    let (mut total, mut error) = exact_sums(&heap);
    loop {
        if !total.is_finite() {
            return Err(Error::QuadratureFailure(format!("non-finite integral on [{a}, {b}]")));
        }
        if error <= (rel_tol * total.abs()).max(1e-300) {
            // running sums drift; confirm with a fresh summation
            (total, error) = exact_sums(&heap);
            if error <= (rel_tol * total.abs()).max(1e-300) {
                return Ok(total);
            }
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureFailure(format!(
                "error estimate {error:.3e} above tolerance after {MAX_SEGMENTS} segments"
            )));
        }
        let worst = heap.pop().expect("non-empty");
        total -= worst.value;
        error -= worst.error;
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, err) = gk15(&f, lo, hi);
            total += value;
            error += err;
            heap.push(Segment { a: lo, b: hi, value, error: err });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::legendre::legendre;

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1usize, 2, 5, 16, 101, 1000] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-12);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for k in 0..(2 * n).min(40) {
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((got - exact).abs() < 1e-12, "n={n} k={k}");
            }
        }
        // P_s orthogonality at the edge of exactness
        let (x, w) = gauss_legendre(60);
        let ip: f64 = x.iter().zip(&w).map(|(x, w)| w * legendre(59, *x) * legendre(60, *x)).sum();
        assert!(ip.abs() < 1e-13);
    }

    #[test]
    fn grid_weight_and_points() {
        let g = SphereGrid::new(20, 41);
        assert!((g.total_weight() - 4.0 * PI).abs() < 1e-10);
        let p = g.point(3, 7);
        assert!((p.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fft_lengths() {
        assert_eq!(fast_fft_len(2001), 2025);
        assert_eq!(fast_fft_len(7), 8);
        assert_eq!(fast_fft_len(1), 1);
    }

    #[test]
    fn resolution_rule() {
        let g = SphereGrid::for_norm(10, 10.0);
        assert!(g.check_norm_resolution(10, 10.0).is_ok());
        assert!(matches!(g.check_norm_resolution(20, 10.0), Err(Error::ResolutionTooLow { .. })));
    }

    #[test]
    fn adaptive_integration() {
        let v = integrate_adaptive(|x: f64| x.sin(), 0.0, PI, &[], 1, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate_adaptive(|x: f64| x.sqrt(), 0.0, 1.0, &[0.5], 2, 1e-10).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
        let v = integrate_adaptive(|x: f64| (200.0 * x).cos().powi(2), 0.0, PI, &[], 100, 1e-10).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-8);
    }
}
