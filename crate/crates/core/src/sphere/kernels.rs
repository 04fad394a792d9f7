//! The zonal kernel, its split `Z = Z^(1) + Z^(2) + Z^(3)` into a
//! neighbourhood of `t = 0`, a bulk piece and a neighbourhood of the
//! antipode, and the word-averaged kernel `q^{-n/2} sum_{|g|=n} Z(d(gx, y))`.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::sphere::legendre::legendre;
use crate::sphere::quadrature::{gauss_legendre, integrate_adaptive, SphereGrid};
use crate::sphere::rotations::{enumerate_words, RotationSet};
use crate::{Error, Result};

pub const KERNEL_REL_TOL: f64 = 1e-6;

/// `C^2` quintic smoothstep: 0 at 0, 1 at 1.
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Piece {
    /// `eta(t) Z(t)`, concentrated at `t = 0`.
    Near,
    /// The residual.
    Bulk,
    /// `eta(pi - t) Z(t)`, concentrated at the antipode.
    Antipodal,
    Full,
}

/// `Z_s(t) = (2s+1)/(4 pi) P_s(cos t)` with the cutoff window
/// `eta = 1` on `[0, s^{-1/2}]`, `0` on `[s^{-1/4}, pi]`.
#[derive(Clone, Copy, Debug)]
pub struct ZonalKernel {
    pub s: usize,
    /// `s^{-1/2}`.
    pub inner: f64,
    /// `s^{-1/4}`.
    pub outer: f64,
}

impl ZonalKernel {
    pub fn new(s: usize) -> Self {
        let sf = (s.max(1)) as f64;
        Self { s, inner: sf.powf(-0.5), outer: sf.powf(-0.25) }
    }

    pub fn value(&self, t: f64) -> f64 {
        (2 * self.s + 1) as f64 / (4.0 * PI) * legendre(self.s, t.cos())
    }

    /// Same as [`ZonalKernel::value`] from `cos t` directly.
    pub fn value_cos(&self, x: f64) -> f64 {
        (2 * self.s + 1) as f64 / (4.0 * PI) * legendre(self.s, x.clamp(-1.0, 1.0))
    }

    pub fn eta(&self, t: f64) -> f64 {
        if t <= self.inner {
            1.0
        } else if t >= self.outer {
            0.0
        } else {
            1.0 - smoothstep((t - self.inner) / (self.outer - self.inner))
        }
    }

    pub fn window(&self, piece: Piece, t: f64) -> f64 {
        match piece {
            Piece::Near => self.eta(t),
            Piece::Antipodal => self.eta(PI - t),
            Piece::Bulk => 1.0 - self.eta(t) - self.eta(PI - t),
            Piece::Full => 1.0,
        }
    }

    pub fn piece(&self, piece: Piece, t: f64) -> f64 {
        let w = self.window(piece, t);
        if w == 0.0 {
            0.0
        } else {
            w * self.value(t)
        }
    }

    /// Breakpoints of the window inside `(0, pi)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![self.inner, self.outer, PI - self.outer, PI - self.inner];
        b.retain(|&x| x > 0.0 && x < PI);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

/// `2 pi int_a^b |f(t)|^r sin t dt`, with enough initial pieces to resolve
/// oscillation at frequency `s`.
fn radial_power_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, r: f64, s: usize, breaks: &[f64]) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let per_unit = (2.0 * s.max(1) as f64 / PI).ceil();
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let initial = ((w[1] - w[0]) * per_unit).ceil().max(2.0) as usize;
        total += integrate_adaptive(|t| f(t).abs().powf(r) * t.sin(), w[0], w[1], &[], initial, KERNEL_REL_TOL)?;
    }
    Ok(2.0 * PI * total)
}

/// `L^{p/2}` norms of the kernel pieces on the sphere.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KernelSplitNorms {
    pub s: usize,
    pub p: f64,
    pub near: f64,
    pub bulk: f64,
    pub antipodal: f64,
    pub total: f64,
    /// `Z_s` restricted to `s^{-1/2} <= t <= pi - s^{-1/2}`.
    pub tail: f64,
}

/// Norms in `L^{p/2}(S^2)` of `Z^(1)`, `Z^(2)`, `Z^(3)`, `Z_s` and of the
/// tail `Z_s 1[s^{-1/2} <= t <= pi - s^{-1/2}]`.
pub fn kernel_split_norms(s: usize, p: f64) -> Result<KernelSplitNorms> {
    if !(p > 4.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("kernel split needs finite p > 4, got {p}")));
    }
    let z = ZonalKernel::new(s);
    let r = p / 2.0;
    let br = z.breakpoints();
    let norm = |v: f64| v.powf(1.0 / r);
    let piece = |pc: Piece, a: f64, b: f64| -> Result<f64> {
        radial_power_integral(|t| z.piece(pc, t), a, b, r, s, &br).map(norm)
    };
    Ok(KernelSplitNorms {
        s,
        p,
        near: piece(Piece::Near, 0.0, z.outer.min(PI))?,
        bulk: piece(Piece::Bulk, z.inner.min(PI), (PI - z.inner).max(0.0))?,
        antipodal: piece(Piece::Antipodal, (PI - z.outer).max(0.0), PI)?,
        total: piece(Piece::Full, 0.0, PI)?,
        tail: piece(Piece::Full, z.inner.min(PI), (PI - z.inner).max(0.0))?,
    })
}

/// `max |Z_s(t)| / sqrt(s/t)` over `t` in `[1/s, pi/2]`, scanned at spacing
/// `1/(16 s)`.
pub fn zonal_bound_constant(s: usize) -> f64 {
    let z = ZonalKernel::new(s);
    let sf = s.max(1) as f64;
    let (a, b) = (1.0 / sf, PI / 2.0);
    let steps = ((b - a) * 16.0 * sf).ceil() as usize;
    (0..=steps)
        .map(|k| a + (b - a) * k as f64 / steps as f64)
        .map(|t| z.value(t).abs() / (sf / t).sqrt())
        .fold(0.0, f64::max)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Orthonormal `(e1, e2)` completing `c`.
fn frame(c: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(&helper, c);
    let mut e1 = [helper[0] - d * c[0], helper[1] - d * c[1], helper[2] - d * c[2]];
    let n = dot(&e1, &e1).sqrt();
    e1.iter_mut().for_each(|v| *v /= n);
    let e2 = [c[1] * e1[2] - c[2] * e1[1], c[2] * e1[0] - c[0] * e1[2], c[0] * e1[1] - c[1] * e1[0]];
    (e1, e2)
}

/// `int |f|^r` over the union of geodesic caps of radius `radius` about
/// `centers`, in local polar coordinates about each center; points covered by
/// several caps are weighted by the reciprocal of their multiplicity.
///
/// `f` is assumed radial about the center on caps that meet no other cap; on
/// the others the azimuthal rule is sized to the bandwidth `(r + 1) s sin(rho)`
/// of `|f|^r` on the circle of radius `rho`.
fn cap_union_integral(centers: &[[f64; 3]], radius: f64, s: usize, r: f64, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
    const NODES: usize = 8;
    let (gx, gw) = gauss_legendre(NODES);
    // panels of width ~ 1/(2s)
    let panels = ((radius * 2.0 * s.max(1) as f64).ceil() as usize).max(4);
    let h = radius / panels as f64;
    let cos_radius = radius.cos();
    let cos_double = (2.0 * radius).min(PI).cos();
    let mut total = 0.0;
    for (a, c) in centers.iter().enumerate() {
        let isolated = centers.iter().enumerate().all(|(b, o)| b == a || dot(o, c) < cos_double);
        let (e1, e2) = frame(c);
        for panel in 0..panels {
            for (x, w) in gx.iter().zip(&gw) {
                let rho = h * (panel as f64 + 0.5 * (x + 1.0));
                let (sr, cr) = rho.sin_cos();
                let n_omega = if isolated { 1 } else { ((r + 1.0) * s as f64 * sr).ceil() as usize + 16 };
                let dw = 2.0 * PI / n_omega as f64;
                let weight = 0.5 * h * w * sr * dw;
                for k in 0..n_omega {
                    let (so, co) = (k as f64 * dw).sin_cos();
                    let pt = [
                        cr * c[0] + sr * (co * e1[0] + so * e2[0]),
                        cr * c[1] + sr * (co * e1[1] + so * e2[1]),
                        cr * c[2] + sr * (co * e1[2] + so * e2[2]),
                    ];
                    let multiplicity =
                        if isolated { 1 } else { centers.iter().filter(|o| dot(o, &pt) >= cos_radius).count().max(1) };
                    total += weight * f(&pt).abs().powf(r) / multiplicity as f64;
                }
            }
        }
    }
    total
}

/// One sampled `y` of [`averaged_kernel_probe`].
#[derive(Clone, Debug, Serialize)]
pub struct AveragedKernelRow {
    pub y: [f64; 3],
    /// `L^{p/2}` norms in `x` of the three pieces.
    pub near: f64,
    pub bulk: f64,
    pub antipodal: f64,
    /// Pairs of words whose near caps (radius `s^{-1/4}`) overlap.
    pub overlapping_caps: usize,
    /// `near / (q^{n(4-p)/(2p)} s^{1-4/p})`.
    pub near_scaling_ratio: f64,
    /// `bulk / (q^{n/2} s^{3/4-2/p})`.
    pub bulk_scaling_ratio: f64,
    /// `near / (2 q^{-n/2} q^{2n/p} ||Z^(1)||_{p/2})`.
    pub near_disjoint_ratio: f64,
    /// `sum_g q^{-n/2} int |Z_s(d(gx, y))| dx` on the grid.
    pub word_l1_mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AveragedKernelReport {
    pub s: usize,
    pub n: usize,
    pub p: f64,
    pub q: usize,
    pub words: usize,
    pub split: KernelSplitNorms,
    /// `words q^{-n/2} ||Z_s||_1`.
    pub expected_l1_mass: f64,
    pub rows: Vec<AveragedKernelRow>,
}

impl AveragedKernelReport {
    pub fn max_ratio(&self, f: impl Fn(&AveragedKernelRow) -> f64) -> f64 {
        self.rows.iter().map(f).fold(0.0, f64::max)
    }

    pub fn max_l1_mass_defect(&self) -> f64 {
        self.rows.iter().map(|r| (r.word_l1_mass / self.expected_l1_mass - 1.0).abs()).fold(0.0, f64::max)
    }
}

pub fn random_unit_vector(rng: &mut impl Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// `L^{p/2}` norms in `x` of the pieces of `q^{-n/2} sum_{|g|=n} Z^(i)(d(gx, y))`
/// at `samples` random points `y`. The near and antipodal pieces are
/// integrated on the caps where they live, the bulk piece on a global grid.
pub fn averaged_kernel_probe(
    rot: &RotationSet,
    s: usize,
    n: usize,
    p: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<AveragedKernelReport> {
    let split = kernel_split_norms(s, p)?;
    let words: Vec<nalgebra::Matrix3<f64>> = if n == 0 {
        vec![nalgebra::Matrix3::identity()]
    } else {
        enumerate_words(rot, n)?.iter().map(|w| w.matrix.to_f64()).collect()
    };
    let q = rot.q();
    let qf = q as f64;
    let sf = s as f64;
    let scale = qf.powf(-(n as f64) / 2.0);
    let r = p / 2.0;
    let z = ZonalKernel::new(s);
    let grid = SphereGrid::for_degree(((r.ceil() as usize) * s).max(2 * s + 2));
    let l1 = radial_power_integral(|t| z.value(t), 0.0, PI, 1.0, s, &z.breakpoints())?;
    let expected_l1_mass = words.len() as f64 * scale * l1;

    let mut rows = Vec::with_capacity(samples);
    for _ in 0..samples {
        let y = random_unit_vector(rng);
        // Z(d(gx, y)) = Z(d(x, g^T y))
        let centers: Vec<[f64; 3]> = words
            .iter()
            .map(|g| {
                let v = g.transpose() * nalgebra::Vector3::new(y[0], y[1], y[2]);
                [v[0], v[1], v[2]]
            })
            .collect();
        let antipodes: Vec<[f64; 3]> = centers.iter().map(|c| [-c[0], -c[1], -c[2]]).collect();
        let cos_outer = z.outer.cos();
        let averaged = |piece: Piece, x: &[f64; 3]| -> f64 {
            centers
                .iter()
                .map(|c| {
                    let d = dot(x, c);
                    let relevant = match piece {
                        Piece::Near => d >= cos_outer,
                        Piece::Antipodal => d <= -cos_outer,
                        _ => true,
                    };
                    if relevant {
                        z.piece(piece, d.clamp(-1.0, 1.0).acos())
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
                * scale
        };
        let near = cap_union_integral(&centers, z.outer, s, r, |x| averaged(Piece::Near, x)).powf(1.0 / r);
        let antipodal = cap_union_integral(&antipodes, z.outer, s, r, |x| averaged(Piece::Antipodal, x)).powf(1.0 / r);

        let mut bulk_sum = 0.0;
        let mut mass = 0.0;
        for i in 0..grid.n_theta() {
            let w = grid.weights[i] * grid.phi_weight();
            for k in 0..grid.n_phi {
                let x = grid.point(i, k);
                let mut acc = 0.0;
                for c in &centers {
                    let d = dot(&x, c).clamp(-1.0, 1.0);
                    let t = d.acos();
                    let v = z.value_cos(d);
                    mass += w * v.abs();
                    acc += z.window(Piece::Bulk, t) * v;
                }
                bulk_sum += w * (scale * acc).abs().powf(r);
            }
        }
        let bulk = bulk_sum.powf(1.0 / r);
        let overlapping_caps = (0..centers.len())
            .flat_map(|a| (a + 1..centers.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| dot(&centers[a], &centers[b]) >= (2.0 * z.outer).cos())
            .count();
        let nf = n as f64;
        rows.push(AveragedKernelRow {
            y,
            near,
            bulk,
            antipodal,
            overlapping_caps,
            near_scaling_ratio: near / (qf.powf(nf * (4.0 - p) / (2.0 * p)) * sf.powf(1.0 - 4.0 / p)),
            bulk_scaling_ratio: bulk / (qf.powf(nf / 2.0) * sf.powf(0.75 - 2.0 / p)),
            near_disjoint_ratio: near / (2.0 * scale * qf.powf(2.0 * nf / p) * split.near),
            word_l1_mass: mass * scale,
        });
    }
    Ok(AveragedKernelReport { s, n, p, q, words: words.len(), split, expected_l1_mass, rows })
}
