//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use specnorm_core::graphs::GraphBuildSpec;
use specnorm_core::sphere::{RationalMatrix, RotationSet};

/// Hard caps on problem size.
pub const MAX_VERTICES: usize = 5000;
pub const MAX_DEGREE_S: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config: {0}")]
    Invalid(String),
    #[error("resource budget exceeded: {0}")]
    ResourceBudgetExceeded(String),
    #[error(transparent)]
    Core(#[from] specnorm_core::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    #[value(alias = "graph_report")]
    GraphReport,
    #[value(alias = "tree_check")]
    TreeCheck,
    #[value(alias = "sphere_report")]
    SphereReport,
    Full,
}

impl Mode {
    pub fn runs_graph(self) -> bool {
        matches!(self, Mode::GraphReport | Mode::Full)
    }

    pub fn runs_tree(self) -> bool {
        matches!(self, Mode::TreeCheck | Mode::Full)
    }

    pub fn runs_sphere(self) -> bool {
        matches!(self, Mode::SphereReport | Mode::Full)
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::GraphReport => "graph-report",
            Mode::TreeCheck => "tree-check",
            Mode::SphereReport => "sphere-report",
            Mode::Full => "full",
        }
    }
}

/// `p` written as a number or `"inf"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Num(f64),
    Text(String),
}

impl PValue {
    pub fn value(&self) -> Result<f64, ConfigError> {
        match self {
            PValue::Num(v) => Ok(*v),
            PValue::Text(t) => specnorm_core::graphbounds::theorem::parse_p(t).map_err(Into::into),
        }
    }
}

fn default_seed() -> u64 {
    0
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub graph: Option<RawGraph>,
    pub tree: Option<RawTree>,
    pub sphere: Option<RawSphere>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGraph {
    /// Generator spec, e.g. `random_regular:n=500,degree=4,seed=1`.
    pub spec: Option<String>,
    /// Edge-list file, relative to the config file.
    pub edge_list: Option<PathBuf>,
    #[serde(default)]
    pub p: Vec<PValue>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub n: Option<usize>,
    pub n_max: Option<usize>,
    /// Random 4-regular graphs of these sizes for the ratio-vs-|G| series.
    #[serde(default)]
    pub sizes: Vec<usize>,
    pub seeds_per_size: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTree {
    #[serde(default)]
    pub q: Vec<usize>,
    pub n_max: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSphere {
    /// `"default"` or a rotation file, relative to the config file.
    pub rotations: Option<String>,
    #[serde(default)]
    pub s: Vec<usize>,
    #[serde(default)]
    pub p: Vec<PValue>,
    #[serde(default)]
    pub kernel_s: Vec<usize>,
    #[serde(default)]
    pub kernel_p: Vec<f64>,
    pub separation_n: Option<usize>,
    pub separation_points: Option<usize>,
    pub probe: Option<RawProbe>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProbe {
    pub s: usize,
    pub n: usize,
    pub p: f64,
    #[serde(default = "one")]
    pub samples: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug)]
pub enum GraphSource {
    Spec(GraphBuildSpec),
    EdgeList(PathBuf),
}

#[derive(Clone, Debug)]
pub struct GraphConfig {
    pub source: GraphSource,
    pub p: Vec<f64>,
    pub delta: f64,
    pub epsilon: Option<f64>,
    pub n: Option<usize>,
    pub n_max: usize,
    pub sizes: Vec<usize>,
    pub seeds_per_size: usize,
    pub dump_op: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TreeConfig {
    pub q: Vec<usize>,
    pub n_max: usize,
}

#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub s: usize,
    pub n: usize,
    pub p: f64,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub struct SphereConfig {
    pub rotations: RotationSet,
    pub rotations_label: String,
    pub s: Vec<usize>,
    pub p: Vec<f64>,
    pub kernel_s: Vec<usize>,
    pub kernel_p: Vec<f64>,
    pub separation_n: usize,
    pub separation_points: usize,
    pub probe: Option<ProbeConfig>,
}

/// Validated configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    pub out: PathBuf,
    pub graph: Option<GraphConfig>,
    pub tree: Option<TreeConfig>,
    pub sphere: Option<SphereConfig>,
    /// Non-fatal remarks (e.g. sphere `p` in `(6, 8]`).
    pub warnings: Vec<String>,
    /// Hex sha256 of the config text.
    pub source_sha256: String,
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub graph: Option<String>,
    pub p: Option<Vec<String>>,
    pub delta: Option<f64>,
    /// Also write `S_n` for this `n` as a matrix CSV.
    pub dump_op: Option<usize>,
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })
}

/// Rotation file:
///
/// ```toml
/// [[rotation]]
/// matrix = ["3/5", "-4/5", "0", "4/5", "3/5", "0", "0", "0", "1"]
/// ```
pub fn parse_rotation_file(text: &str) -> Result<RotationSet, ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct File {
        rotation: Vec<Entry>,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Entry {
        matrix: Vec<String>,
    }
    let file: File = toml::from_str(text)?;
    let mats = file.rotation.iter().map(|e| RationalMatrix::parse(&e.matrix)).collect::<Result<Vec<_>, _>>()?;
    Ok(RotationSet::new(mats)?)
}

fn parse_p_list(raw: &[PValue]) -> Result<Vec<f64>, ConfigError> {
    raw.iter().map(PValue::value).collect()
}

fn graph_size(spec: &GraphBuildSpec) -> usize {
    match spec {
        GraphBuildSpec::RandomRegular { n, .. } | GraphBuildSpec::Complete { n } | GraphBuildSpec::Cayley { n, .. } => *n,
        GraphBuildSpec::CompleteBipartite { a, b } => a + b,
        GraphBuildSpec::CyclicLift { degree, fold, .. } => (degree + 1) * fold,
    }
}

impl ExperimentConfig {
    /// Reads and validates `path` for `mode`; relative paths inside the file
    /// resolve against its directory.
    pub fn load(path: &Path, mode: Mode, overrides: &Overrides) -> Result<Self, ConfigError> {
        let text = read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_str(&text, base, mode, overrides)
    }

    pub fn from_str(text: &str, base: &Path, mode: Mode, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut raw: RawConfig = toml::from_str(text)?;
        let mut warnings = Vec::new();
        if let Some(g) = &overrides.graph {
            let section = raw.graph.get_or_insert_with(RawGraph::default);
            section.spec = Some(g.clone());
            section.edge_list = None;
        }
        if let Some(ps) = &overrides.p {
            let values: Vec<PValue> = ps.iter().map(|p| PValue::Text(p.clone())).collect();
            if mode.runs_graph() {
                raw.graph.get_or_insert_with(RawGraph::default).p = values.clone();
            }
            if mode.runs_sphere() {
                raw.sphere.get_or_insert_with(RawSphere::default).p = values;
            }
        }
        if let Some(d) = overrides.delta {
            raw.graph.get_or_insert_with(RawGraph::default).delta = Some(d);
        }

        let graph = if mode.runs_graph() {
            let g = raw.graph.as_ref().ok_or_else(|| invalid(format!("mode {} needs a [graph] section", mode.label())))?;
            let mut cfg = Self::graph_config(g, base, &mut warnings)?;
            if let Some(n) = overrides.dump_op {
                if n > 64 {
                    return Err(ConfigError::ResourceBudgetExceeded(format!("--dump-op {n} > 64")));
                }
                cfg.dump_op = Some(n);
            }
            Some(cfg)
        } else {
            None
        };
        let tree = if mode.runs_tree() {
            let t = raw.tree.clone().unwrap_or_default();
            let q = if t.q.is_empty() { vec![2, 3] } else { t.q };
            if q.iter().any(|&q| q < 2) {
                return Err(invalid("tree q must be >= 2"));
            }
            let n_max = t.n_max.unwrap_or(12);
            if n_max < 2 || n_max > 24 {
                return Err(invalid(format!("tree n_max must lie in [2, 24], got {n_max}")));
            }
            Some(TreeConfig { q, n_max })
        } else {
            None
        };
        let sphere = if mode.runs_sphere() {
            let s = raw.sphere.as_ref().ok_or_else(|| invalid(format!("mode {} needs a [sphere] section", mode.label())))?;
            Some(Self::sphere_config(s, base, &mut warnings)?)
        } else {
            None
        };
        let out = overrides.out.clone().or(raw.out.clone()).unwrap_or_else(|| PathBuf::from("specnorm-out"));
        let source_sha256 = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(Self { mode, seed: overrides.seed.unwrap_or(raw.seed), out, graph, tree, sphere, warnings, source_sha256 })
    }

    fn graph_config(g: &RawGraph, base: &Path, warnings: &mut Vec<String>) -> Result<GraphConfig, ConfigError> {
        let source = match (&g.spec, &g.edge_list) {
            (Some(_), Some(_)) => return Err(invalid("give either graph.spec or graph.edge_list, not both")),
            (None, None) => return Err(invalid("graph.spec or graph.edge_list is required")),
            (Some(spec), None) => {
                let spec: GraphBuildSpec = spec.parse()?;
                let size = graph_size(&spec);
                if size > MAX_VERTICES {
                    return Err(ConfigError::ResourceBudgetExceeded(format!("|G| = {size} > {MAX_VERTICES}")));
                }
                GraphSource::Spec(spec)
            }
            (None, Some(path)) => {
                let path = base.join(path);
                if !path.exists() {
                    return Err(invalid(format!("edge list {} does not exist", path.display())));
                }
                GraphSource::EdgeList(path)
            }
        };
        let p = parse_p_list(&g.p)?;
        if let Some(bad) = p.iter().find(|&&p| !(p > 2.0)) {
            return Err(invalid(format!("graph p values must exceed 2, got {bad}")));
        }
        let delta = g.delta.unwrap_or(0.25);
        if !(0.0..0.5).contains(&delta) {
            return Err(invalid(format!("delta must lie in [0, 1/2), got {delta}")));
        }
        if let Some(e) = g.epsilon {
            if !(e > 0.0) {
                return Err(invalid(format!("epsilon must be positive, got {e}")));
            }
        }
        if let Some(&n) = g.sizes.iter().find(|&&n| n > MAX_VERTICES) {
            return Err(ConfigError::ResourceBudgetExceeded(format!("series size {n} > {MAX_VERTICES}")));
        }
        if g.sizes.iter().any(|&n| n < 6 || n % 2 != 0) {
            return Err(invalid("series sizes must be even and at least 6"));
        }
        if p.is_empty() {
            warnings.push("graph p list is empty: no eigenfunction norms or plots".into());
        }
        Ok(GraphConfig {
            source,
            p,
            delta,
            epsilon: g.epsilon,
            n: g.n,
            n_max: g.n_max.unwrap_or(12),
            sizes: g.sizes.clone(),
            seeds_per_size: g.seeds_per_size.unwrap_or(3).max(1),
            dump_op: None,
        })
    }

    fn sphere_config(s: &RawSphere, base: &Path, warnings: &mut Vec<String>) -> Result<SphereConfig, ConfigError> {
        let (rotations, rotations_label) = match s.rotations.as_deref() {
            None | Some("default") => (RotationSet::default_set(), "default".to_string()),
            Some(path) => {
                let full = base.join(path);
                if !full.exists() {
                    return Err(invalid(format!("rotation file {} does not exist", full.display())));
                }
                (parse_rotation_file(&read(&full)?)?, path.to_string())
            }
        };
        let p = parse_p_list(&s.p)?;
        for &v in &p {
            if v <= 6.0 {
                return Err(invalid(format!("sphere p values must exceed 8 (6 < p <= 8 tolerated), got {v}")));
            }
            if v <= 8.0 {
                warnings.push(format!(
                    "sphere p = {v} lies in (6, 8]: the kernel-splitting argument is stated for p > 8 and needs a sharper \
                     local estimate below that"
                ));
            }
        }
        let mut s_list = s.s.clone();
        s_list.sort_unstable();
        s_list.dedup();
        let mut kernel_s = s.kernel_s.clone();
        kernel_s.sort_unstable();
        kernel_s.dedup();
        let probe_s = s.probe.as_ref().map(|p| p.s).unwrap_or(0);
        if let Some(&big) = s_list.iter().chain(&kernel_s).chain(std::iter::once(&probe_s)).find(|&&v| v > MAX_DEGREE_S) {
            return Err(ConfigError::ResourceBudgetExceeded(format!("s = {big} > {MAX_DEGREE_S}")));
        }
        if let Some(bad) = s.kernel_p.iter().find(|&&p| !(p > 4.0) || !p.is_finite()) {
            return Err(invalid(format!("kernel p values must be finite and exceed 4, got {bad}")));
        }
        let probe = match &s.probe {
            Some(pr) => {
                if pr.n > 8 {
                    return Err(ConfigError::ResourceBudgetExceeded(format!("probe word length {} > 8", pr.n)));
                }
                if !(pr.p > 4.0) || !pr.p.is_finite() {
                    return Err(invalid(format!("probe p must be finite and exceed 4, got {}", pr.p)));
                }
                Some(ProbeConfig { s: pr.s, n: pr.n, p: pr.p, samples: pr.samples.max(1) })
            }
            None => None,
        };
        let separation_n = s.separation_n.unwrap_or(6);
        if separation_n > 8 {
            return Err(ConfigError::ResourceBudgetExceeded(format!("separation word length {separation_n} > 8")));
        }
        if p.is_empty() {
            warnings.push("sphere p list is empty: no eigenfunction norms or plots".into());
        }
        Ok(SphereConfig {
            rotations,
            rotations_label,
            s: s_list,
            p,
            kernel_s,
            kernel_p: s.kernel_p.clone(),
            separation_n,
            separation_points: s.separation_points.unwrap_or(100),
            probe,
        })
    }
}
