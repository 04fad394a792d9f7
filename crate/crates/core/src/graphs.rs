//! Finite `q+1`-regular graphs: construction, edge-list IO and girth.
//!
//! Vertices are dense indices `0..n`; every matrix built from a graph uses that
//! ordering.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Attempts allowed to the rejection samplers before giving up.
pub const GENERATION_BUDGET: usize = 1000;

/// Immutable adjacency structure of a finite regular graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularGraph {
    adjacency: Vec<Vec<usize>>,
    degree: usize,
    label: String,
    connected: bool,
    multi_edges: bool,
}

impl RegularGraph {
    /// Validates neighbor lists and wraps them.
    ///
    /// Self-loops and non-regular inputs are rejected. Parallel edges are
    /// accepted and flagged; [`has_multi_edges`](Self::has_multi_edges)
    /// reports them.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>, label: impl Into<String>) -> Result<Self> {
        let n = adjacency.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let degree = adjacency[0].len();
        if degree < 3 {
            return Err(Error::InvalidGraph(format!(
                "degree {degree} gives q < 2"
            )));
        }
        let mut multi_edges = false;
        for (x, nbrs) in adjacency.iter().enumerate() {
            if nbrs.len() != degree {
                return Err(Error::InvalidGraph(format!(
                    "vertex {x} has {} neighbors, expected {degree}",
                    nbrs.len()
                )));
            }
            let mut seen = HashSet::with_capacity(degree);
            for &y in nbrs {
                if y >= n {
                    return Err(Error::InvalidGraph(format!("neighbor {y} out of range")));
                }
                if y == x {
                    return Err(Error::InvalidGraph(format!("self-loop at vertex {x}")));
                }
                if !seen.insert(y) {
                    multi_edges = true;
                }
            }
        }
        // symmetry as multisets
        for (x, nbrs) in adjacency.iter().enumerate() {
            for &y in nbrs {
                let forward = nbrs.iter().filter(|&&z| z == y).count();
                let backward = adjacency[y].iter().filter(|&&z| z == x).count();
                if forward != backward {
                    return Err(Error::InvalidGraph(format!(
                        "adjacency not symmetric between {x} and {y}"
                    )));
                }
            }
        }
        let connected = is_connected(&adjacency);
        Ok(Self {
            adjacency,
            degree,
            label: label.into(),
            connected,
            multi_edges,
        })
    }

    /// Builds a graph from an undirected edge list on `n` vertices.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], label: impl Into<String>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Self::from_adjacency(adjacency, label)
    }

    /// Parses the whitespace separated `u v` edge-list format; `#` starts a
    /// comment line. The vertex count is one more than the largest index.
    pub fn parse_edge_list(text: &str, label: impl Into<String>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut field = || -> Result<usize> {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse { line: i + 1, msg: "expected two vertices".into() })?
                    .parse()
                    .map_err(|e| Error::Parse { line: i + 1, msg: format!("{e}") })
            };
            let u = field()?;
            let v = field()?;
            if parts.next().is_some() {
                return Err(Error::Parse { line: i + 1, msg: "trailing fields".into() });
            }
            n = n.max(u + 1).max(v + 1);
            edges.push((u, v));
        }
        Self::from_edges(n, &edges, label)
    }

    pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "graph".into());
        Self::parse_edge_list(&text, label)
    }

    /// Canonical edge list: each edge once as `u v` with `u < v`, sorted.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Sorted edges with `u < v`; parallel edges repeat.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<_> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect();
        edges.sort_unstable();
        edges
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    /// Degree `q + 1`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn q(&self) -> usize {
        self.degree - 1
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adjacency[x]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn has_multi_edges(&self) -> bool {
        self.multi_edges
    }
}

fn is_connected(adjacency: &[Vec<usize>]) -> bool {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &y in &adjacency[x] {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == n
}

/// Recipe for a generated graph.
///
/// `CyclicLift` is the `Z_k` voltage lift of the complete graph on
/// `degree + 1` vertices with random voltages, resampled until the lift has
/// girth at least `min_girth`. It is the only generator here that reaches
/// girth 8 at a few hundred vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphBuildSpec {
    RandomRegular { n: usize, degree: usize, seed: u64 },
    Complete { n: usize },
    CompleteBipartite { a: usize, b: usize },
    Cayley { n: usize, generators: Vec<Vec<usize>> },
    CyclicLift { degree: usize, fold: usize, min_girth: usize, seed: u64 },
}

impl GraphBuildSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match *self {
            Self::RandomRegular { n, degree, .. } => {
                if degree < 3 {
                    return bad(format!("degree {degree} gives q < 2"));
                }
                if n <= degree {
                    return bad(format!("need n > degree, got n = {n}"));
                }
                if (n * degree) % 2 != 0 {
                    return bad(format!("n * degree = {} is odd", n * degree));
                }
            }
            Self::Complete { n } => {
                if n < 4 {
                    return bad(format!("K_{n} has q < 2"));
                }
            }
            Self::CompleteBipartite { a, b } => {
                if a != b {
                    return bad(format!("K_{{{a},{b}}} is not regular"));
                }
                if a < 3 {
                    return bad(format!("K_{{{a},{b}}} has q < 2"));
                }
            }
            Self::Cayley { n, ref generators } => {
                if generators.is_empty() {
                    return bad("no generators".into());
                }
                for g in generators {
                    let mut seen = vec![false; n];
                    if g.len() != n {
                        return bad(format!("generator has length {}, expected {n}", g.len()));
                    }
                    for &i in g {
                        if i >= n || std::mem::replace(&mut seen[i], true) {
                            return bad("generator is not a permutation".into());
                        }
                    }
                }
            }
            Self::CyclicLift { degree, fold, .. } => {
                if degree < 3 {
                    return bad(format!("degree {degree} gives q < 2"));
                }
                if fold < 1 {
                    return bad("fold must be positive".into());
                }
            }
        }
        Ok(())
    }

    fn label(&self) -> String {
        match *self {
            Self::RandomRegular { n, degree, seed } => format!("random_regular_n{n}_d{degree}_s{seed}"),
            Self::Complete { n } => format!("K{n}"),
            Self::CompleteBipartite { a, b } => format!("K{a}_{b}"),
            Self::Cayley { n, ref generators } => format!("cayley_n{n}_g{}", generators.len()),
            Self::CyclicLift { degree, fold, min_girth, seed } => {
                format!("lift_K{}_x{fold}_g{min_girth}_s{seed}", degree + 1)
            }
        }
    }
}

impl FromStr for GraphBuildSpec {
    type Err = Error;

    /// Parses `kind:key=value,key=value`, e.g. `random_regular:n=100,degree=4,seed=7`.
    /// Cayley generators are given as repeated `gen=` keys with `.`-separated
    /// images, e.g. `cayley:n=5,gen=1.2.3.4.0,gen=2.3.4.0.1`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut fields: Vec<(&str, &str)> = Vec::new();
        for kv in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got `{kv}`")))?;
            fields.push((k.trim(), v.trim()));
        }
        let get = |key: &str| -> Result<usize> {
            fields
                .iter()
                .find(|(k, _)| *k == key)
                .ok_or_else(|| Error::InvalidSpec(format!("missing `{key}` for {kind}")))?
                .1
                .parse()
                .map_err(|e| Error::InvalidSpec(format!("bad `{key}`: {e}")))
        };
        let seed = || -> Result<u64> {
            match fields.iter().find(|(k, _)| *k == "seed") {
                Some((_, v)) => v.parse().map_err(|e| Error::InvalidSpec(format!("bad seed: {e}"))),
                None => Ok(0),
            }
        };
        let degree = || get("degree").or_else(|_| get("d"));
        let spec = match kind.trim() {
            "random_regular" => Self::RandomRegular { n: get("n")?, degree: degree()?, seed: seed()? },
            "complete" => Self::Complete { n: get("n")? },
            "complete_bipartite" => Self::CompleteBipartite { a: get("a")?, b: get("b")? },
            "cayley" => {
                let generators = fields
                    .iter()
                    .filter(|(k, _)| *k == "gen")
                    .map(|(_, v)| {
                        v.split('.')
                            .map(|x| x.parse().map_err(|e| Error::InvalidSpec(format!("bad generator: {e}"))))
                            .collect::<Result<Vec<usize>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::Cayley { n: get("n")?, generators }
            }
            "cyclic_lift" => Self::CyclicLift {
                degree: degree()?,
                fold: get("fold")?,
                min_girth: get("min_girth").unwrap_or(3),
                seed: seed()?,
            },
            other => return Err(Error::InvalidSpec(format!("unknown graph kind `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for GraphBuildSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Builds the graph described by `spec`. Deterministic given the seed.
pub fn build_graph(spec: &GraphBuildSpec) -> Result<RegularGraph> {
    spec.validate()?;
    let label = spec.label();
    match *spec {
        GraphBuildSpec::RandomRegular { n, degree, seed } => random_regular(n, degree, seed, label),
        GraphBuildSpec::Complete { n } => {
            let adjacency = (0..n).map(|x| (0..n).filter(|&y| y != x).collect()).collect();
            RegularGraph::from_adjacency(adjacency, label)
        }
        GraphBuildSpec::CompleteBipartite { a, b } => {
            let adjacency = (0..a + b)
                .map(|x| if x < a { (a..a + b).collect() } else { (0..a).collect() })
                .collect();
            RegularGraph::from_adjacency(adjacency, label)
        }
        GraphBuildSpec::Cayley { n, ref generators } => cayley(n, generators, label),
        GraphBuildSpec::CyclicLift { degree, fold, min_girth, seed } => {
            cyclic_lift(degree, fold, min_girth, seed, label)
        }
    }
}

/// Configuration model; whole pairings are redrawn on a loop, a repeated edge
/// or a disconnected result.
fn random_regular(n: usize, degree: usize, seed: u64, label: String) -> Result<RegularGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|x| std::iter::repeat(x).take(degree)).collect();
    let mut edges = HashSet::with_capacity(points.len() / 2);
    'attempt: for _ in 0..GENERATION_BUDGET {
        points.shuffle(&mut rng);
        edges.clear();
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !edges.insert((u, v)) {
                continue 'attempt;
            }
        }
        let mut adjacency = vec![Vec::with_capacity(degree); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        if !is_connected(&adjacency) {
            continue;
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        return RegularGraph::from_adjacency(adjacency, label);
    }
    Err(Error::GenerationFailed {
        attempts: GENERATION_BUDGET,
        reason: format!("no simple connected {degree}-regular pairing on {n} vertices"),
    })
}

fn cayley(n: usize, generators: &[Vec<usize>], label: String) -> Result<RegularGraph> {
    let mut set: Vec<Vec<usize>> = Vec::new();
    for g in generators {
        let mut inv = vec![0; n];
        for (i, &gi) in g.iter().enumerate() {
            inv[gi] = i;
        }
        for p in [g.clone(), inv] {
            if !set.contains(&p) {
                set.push(p);
            }
        }
    }
    let adjacency: Vec<Vec<usize>> = (0..n).map(|x| set.iter().map(|p| p[x]).collect()).collect();
    for (x, nbrs) in adjacency.iter().enumerate() {
        if nbrs.contains(&x) {
            return Err(Error::InvalidSpec(format!("a generator fixes vertex {x}")));
        }
        let distinct: HashSet<_> = nbrs.iter().collect();
        if distinct.len() != nbrs.len() {
            return Err(Error::InvalidSpec(format!("generators produce parallel edges at {x}")));
        }
    }
    let g = RegularGraph::from_adjacency(adjacency, label)?;
    if !g.is_connected() {
        return Err(Error::InvalidSpec("generators do not act transitively".into()));
    }
    Ok(g)
}

fn cyclic_lift(degree: usize, fold: usize, min_girth: usize, seed: u64, label: String) -> Result<RegularGraph> {
    let m = degree + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // edges (0, v) form a spanning star and carry voltage 0
    let base: Vec<(usize, usize)> = (0..m).flat_map(|u| (u + 1..m).map(move |v| (u, v))).collect();
    for _ in 0..GENERATION_BUDGET {
        let voltages: Vec<usize> = base
            .iter()
            .map(|&(u, _)| if u == 0 { 0 } else { rng.gen_range(0..fold) })
            .collect();
        let mut adjacency = vec![Vec::with_capacity(degree); m * fold];
        for (&(u, v), &t) in base.iter().zip(&voltages) {
            for a in 0..fold {
                let x = u * fold + a;
                let y = v * fold + (a + t) % fold;
                adjacency[x].push(y);
                adjacency[y].push(x);
            }
        }
        if !is_connected(&adjacency) {
            continue;
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let g = RegularGraph::from_adjacency(adjacency, label.clone())?;
        if g.has_multi_edges() {
            continue;
        }
        if girth(&g)? >= min_girth {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: GENERATION_BUDGET,
        reason: format!("no {fold}-fold lift of K_{m} with girth >= {min_girth}"),
    })
}

/// Length of the shortest cycle, by breadth-first search from every vertex.
pub fn girth(g: &RegularGraph) -> Result<usize> {
    if g.has_multi_edges() {
        return Ok(2);
    }
    let n = g.num_vertices();
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        dist.fill(usize::MAX);
        dist[root] = 0;
        queue.clear();
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= best {
                break;
            }
            for &w in g.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if w != parent[u] {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
    }
    if best == usize::MAX {
        Err(Error::Acyclic)
    } else {
        Ok(best)
    }
}

/// `floor((girth - 1) / 2)`: balls of this radius are trees.
pub fn injectivity_radius(g: &RegularGraph) -> Result<usize> {
    Ok((girth(g)? - 1) / 2)
}
