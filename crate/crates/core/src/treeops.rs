//! Graph operators: `T_q`, the sphere averages `S_n` and the Chebyshev
//! propagators `P_n(T_q/2)`, plus finite balls of the regular tree.
//!
//! `S_n` and `P_n(T_q/2)` are produced by three-term recursions run on
//! integer-valued matrices (walk counts, and `2 q^{n/2} P_n(T_q/2)`), scaled
//! at the end. While entries stay below `2^53` every matrix is exact before
//! scaling, hence exactly symmetric after it.

use std::fmt::Write as _;

use crate::graphs::RegularGraph;
use crate::{Error, Matrix, Result};

/// Dense real symmetric operator indexed by graph vertices; entry `(x, y)` is
/// the kernel `K(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphOperator(Matrix);

impl GraphOperator {
    pub fn new(matrix: Matrix) -> Self {
        assert!(matrix.is_square(), "graph operators are square");
        Self(matrix)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n, n))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    /// `sup |K(x, y)|`.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|j| (j + 1..n).all(|i| self.0[(i, j)] == self.0[(j, i)]))
    }

    /// Entrywise max of `|AB - BA|`.
    pub fn commutator_max(&self, other: &GraphOperator) -> f64 {
        let ab = &self.0 * &other.0;
        let ba = &other.0 * &self.0;
        max_abs_diff(&ab, &ba)
    }

    /// Row-per-line CSV with shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.size() {
            for j in 0..self.size() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{}", self.0[(i, j)]).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `A * m` for the adjacency `A` of `g`, column by column.
fn adjacency_times(g: &RegularGraph, m: &Matrix) -> Matrix {
    let n = g.num_vertices();
    let mut out = Matrix::zeros(n, n);
    for (src, mut dst) in m.column_iter().zip(out.column_iter_mut()) {
        for x in 0..n {
            dst[x] = g.neighbors(x).iter().map(|&z| src[z]).sum();
        }
    }
    out
}

fn adjacency_matrix(g: &RegularGraph) -> Matrix {
    let n = g.num_vertices();
    let mut a = Matrix::zeros(n, n);
    for x in 0..n {
        for &y in g.neighbors(x) {
            a[(x, y)] += 1.0;
        }
    }
    a
}

/// `q^{-n/2}`, computed the same way everywhere so that `S_1 == T_q` exactly.
pub(crate) fn inv_sqrt_pow(q: f64, n: usize) -> f64 {
    let even = q.powi((n / 2) as i32);
    if n % 2 == 0 {
        even.recip()
    } else {
        (even * q.sqrt()).recip()
    }
}

/// `T_q = q^{-1/2} A`.
pub fn adjacency_op(g: &RegularGraph) -> GraphOperator {
    GraphOperator(adjacency_matrix(g) * inv_sqrt_pow(g.q() as f64, 1))
}

/// Integer three-term recursion `X_{n+1} = A X_n - c_n X_{n-1}`, yielding
/// `scale(n) * X_n`.
struct IntegerRecursion<'g> {
    graph: &'g RegularGraph,
    prev: Option<Matrix>,
    cur: Matrix,
    n: usize,
    started: bool,
    /// `X_1 = first_step * A X_0`
    first_step: f64,
    coefficient: fn(usize, f64) -> f64,
    scale: fn(usize, f64) -> f64,
}

impl<'g> IntegerRecursion<'g> {
    fn new(
        graph: &'g RegularGraph,
        start: Matrix,
        first_step: f64,
        coefficient: fn(usize, f64) -> f64,
        scale: fn(usize, f64) -> f64,
    ) -> Self {
        Self { graph, prev: None, cur: start, n: 0, started: false, first_step, coefficient, scale }
    }
}

impl Iterator for IntegerRecursion<'_> {
    type Item = GraphOperator;

    fn next(&mut self) -> Option<GraphOperator> {
        let q = self.graph.q() as f64;
        if self.started {
            let mut next = adjacency_times(self.graph, &self.cur);
            match self.prev.take() {
                Some(prev) => next -= prev * (self.coefficient)(self.n, q),
                None => next *= self.first_step,
            }
            self.prev = Some(std::mem::replace(&mut self.cur, next));
            self.n += 1;
        }
        self.started = true;
        Some(GraphOperator(&self.cur * (self.scale)(self.n, q)))
    }
}

/// Streaming `S_0, S_1, ...`; keeps only two count matrices alive.
pub fn sphere_ops_iter(g: &RegularGraph) -> impl Iterator<Item = GraphOperator> + '_ {
    let n = g.num_vertices();
    // A C_1 = C_2 + (q+1) C_0, A C_n = C_{n+1} + q C_{n-1}
    IntegerRecursion::new(
        g,
        Matrix::identity(n, n),
        1.0,
        |n, q| if n == 1 { q + 1.0 } else { q },
        |n, q| inv_sqrt_pow(q, n),
    )
}

/// `S_0..=S_{n_max}` with `S_n = q^{-n/2}` times the non-backtracking walk
/// count matrix, built by the recursion `T S_1 = S_2 + (q+1)/q S_0`,
/// `T S_n = S_{n+1} + S_{n-1}`.
pub fn sphere_ops(g: &RegularGraph, n_max: usize) -> Vec<GraphOperator> {
    sphere_ops_iter(g).take(n_max + 1).collect()
}

/// Same operators by explicit enumeration of non-backtracking walks on
/// directed edges. Quadratic memory in the edge count; meant for checking.
pub fn sphere_ops_by_walks(g: &RegularGraph, n_max: usize) -> Vec<GraphOperator> {
    let n = g.num_vertices();
    let q = g.q() as f64;
    // directed edges with their reversal; parallel edges stay distinct
    let mut heads = Vec::new();
    let mut tails = Vec::new();
    let mut first_out = vec![0; n + 1];
    for x in 0..n {
        first_out[x + 1] = first_out[x] + g.degree();
        for &y in g.neighbors(x) {
            tails.push(x);
            heads.push(y);
        }
    }
    let reverse: Vec<usize> = (0..heads.len())
        .map(|e| {
            let (x, y) = (tails[e], heads[e]);
            let slot = g.neighbors(x)[..e - first_out[x]].iter().filter(|&&z| z == y).count();
            (first_out[y]..first_out[y + 1])
                .filter(|&f| heads[f] == x)
                .nth(slot)
                .expect("adjacency is symmetric")
        })
        .collect();

    let mut counts = vec![Matrix::zeros(n, n); n_max + 1];
    let mut walk = vec![0.0; heads.len()];
    let mut next = vec![0.0; heads.len()];
    for x in 0..n {
        counts[0][(x, x)] = 1.0;
        if n_max == 0 {
            continue;
        }
        walk.fill(0.0);
        for e in first_out[x]..first_out[x + 1] {
            walk[e] = 1.0;
        }
        for len in 1..=n_max {
            for (e, &w) in walk.iter().enumerate() {
                counts[len][(x, heads[e])] += w;
            }
            if len == n_max {
                break;
            }
            next.fill(0.0);
            for (e, &w) in walk.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let v = heads[e];
                for f in first_out[v]..first_out[v + 1] {
                    if f != reverse[e] {
                        next[f] += w;
                    }
                }
            }
            std::mem::swap(&mut walk, &mut next);
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| GraphOperator(c * inv_sqrt_pow(q, k)))
        .collect()
}

/// Streaming `P_0(T_q/2), P_1(T_q/2), ...`.
pub fn chebyshev_iter(g: &RegularGraph) -> impl Iterator<Item = GraphOperator> + '_ {
    let n = g.num_vertices();
    // R_n = 2 q^{n/2} P_n(T_q/2) satisfies R_{n+1} = A R_n - q R_{n-1}
    IntegerRecursion::new(
        g,
        Matrix::identity(n, n) * 2.0,
        0.5,
        |_, q| q,
        |n, q| 0.5 * inv_sqrt_pow(q, n),
    )
}

/// `P_0..=P_{n_max}` of `T_q/2`, i.e. `P_0 = I`, `P_1 = T_q/2`,
/// `P_{n+1} = T_q P_n - P_{n-1}`.
pub fn chebyshev_props(g: &RegularGraph, n_max: usize) -> Vec<GraphOperator> {
    chebyshev_iter(g).take(n_max + 1).collect()
}

/// Max entrywise deviation between `P_n(T_q/2)` and
/// `sum_{k<n/2} (1-q)/(2 q^{n/2}) C_{2k} + 1/(2 q^{n/2}) C_n`, where
/// `C_k = q^{k/2} S_k` is the unnormalized sphere sum (walk count matrix).
pub fn chebyshev_sphere_decomposition_check(g: &RegularGraph, n: usize) -> Result<f64> {
    if n % 2 == 1 {
        return Err(Error::OddIndex(n));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let q = g.q() as f64;
    let p = chebyshev_iter(g).nth(n).expect("unbounded iterator");
    let s = sphere_ops(g, n);
    let c = 0.5 * inv_sqrt_pow(q, n);
    let count = |k: usize| s[k].matrix() / inv_sqrt_pow(q, k);
    let mut rhs = count(n) * c;
    for k in 0..n / 2 {
        rhs += count(2 * k) * ((1.0 - q) * c);
    }
    Ok(max_abs_diff(p.matrix(), &rhs))
}

/// Ball of radius `radius` around the root `o` of the `q+1`-regular tree.
///
/// Vertices are stored level by level; in level `l >= 1` the vertex with
/// local index `r` has parent `r / q` in level `l - 1` (the root for `l = 1`)
/// and children `r q .. r q + q - 1` in level `l + 1`.
#[derive(Clone, Debug)]
pub struct TreeBall {
    q: usize,
    radius: usize,
    offsets: Vec<usize>,
}

impl TreeBall {
    pub fn new(q: usize, radius: usize) -> Self {
        assert!(q >= 2, "tree balls need q >= 2");
        let mut offsets = vec![0, 1];
        for l in 1..=radius {
            let last = *offsets.last().unwrap();
            offsets.push(last + Self::sphere_size_for(q, l));
        }
        Self { q, radius, offsets }
    }

    fn sphere_size_for(q: usize, l: usize) -> usize {
        if l == 0 {
            1
        } else {
            (q + 1) * q.pow(l as u32 - 1)
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Number of vertices at distance `l` from the root.
    pub fn sphere_size(&self, l: usize) -> usize {
        self.offsets[l + 1] - self.offsets[l]
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets[self.radius + 1]
    }

    /// Index range of the sphere of radius `l`.
    pub fn sphere(&self, l: usize) -> std::ops::Range<usize> {
        self.offsets[l]..self.offsets[l + 1]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let l = self.distance(v);
        match l {
            0 => None,
            1 => Some(0),
            _ => Some(self.offsets[l - 1] + (v - self.offsets[l]) / self.q),
        }
    }

    /// `|v|`, the distance to the root.
    pub fn distance(&self, v: usize) -> usize {
        self.offsets.partition_point(|&o| o <= v) - 1
    }

    /// `out = A x` with the ball's own adjacency.
    pub fn apply_adjacency(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for l in 1..=self.radius {
            for (r, v) in self.sphere(l).enumerate() {
                let p = if l == 1 { 0 } else { self.offsets[l - 1] + r / self.q };
                out[v] += x[p];
                out[p] += x[v];
            }
        }
    }
}

/// Closed form of `P_n(T_q/2) delta_o` at distance `dist`, `n` even.
pub fn tree_kernel_closed_form(q: usize, n: usize, dist: usize) -> f64 {
    let half = 0.5 * inv_sqrt_pow(q as f64, n);
    if dist % 2 == 1 || dist > n {
        0.0
    } else if dist < n {
        (1.0 - q as f64) * half
    } else {
        half
    }
}

#[derive(Clone, Debug)]
pub struct TreeKernelCheck {
    pub q: usize,
    pub n: usize,
    pub max_deviation: f64,
    /// Value of `P_n(T_q/2) delta_o` on each sphere, as `(min, max)` over the sphere.
    pub radial_values: Vec<(f64, f64)>,
}

/// Runs the Chebyshev recursion on a ball of radius `n + 2` from `delta_o`
/// and compares every vertex with [`tree_kernel_closed_form`].
pub fn tree_kernel_check(q: usize, n: usize) -> Result<TreeKernelCheck> {
    if n % 2 == 1 {
        return Err(Error::OddIndex(n));
    }
    if q < 2 {
        return Err(Error::InvalidArgument(format!("need q >= 2, got {q}")));
    }
    let ball = TreeBall::new(q, n + 2);
    let size = ball.num_vertices();
    let qf = q as f64;
    // r_k = 2 q^{k/2} P_k(T_q/2) delta_o
    let mut prev = vec![0.0; size];
    let mut cur = vec![0.0; size];
    let mut next = vec![0.0; size];
    prev[0] = 2.0;
    if n == 0 {
        cur.copy_from_slice(&prev);
    } else {
        ball.apply_adjacency(&prev, &mut cur);
        cur.iter_mut().for_each(|v| *v *= 0.5);
        for _ in 1..n {
            ball.apply_adjacency(&cur, &mut next);
            for (nx, p) in next.iter_mut().zip(&prev) {
                *nx -= qf * p;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    let scale = 0.5 * inv_sqrt_pow(qf, n);
    let mut max_deviation: f64 = 0.0;
    let mut radial_values = Vec::with_capacity(ball.radius() + 1);
    for l in 0..=ball.radius() {
        let expected = if n == 0 { if l == 0 { 1.0 } else { 0.0 } } else { tree_kernel_closed_form(q, n, l) };
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in ball.sphere(l) {
            let value = cur[v] * scale;
            lo = lo.min(value);
            hi = hi.max(value);
            max_deviation = max_deviation.max((value - expected).abs());
        }
        radial_values.push((lo, hi));
    }
    Ok(TreeKernelCheck { q, n, max_deviation, radial_values })
}
