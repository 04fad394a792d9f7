//! Pipeline stages: tree, graph and sphere.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use specnorm_core::graphbounds::theorem::{
    epsilon_schedule, graph_spectrum, p_label, verify_graph_theorem_with, GraphTheoremOptions,
};
use specnorm_core::graphbounds::ClusterScanner;
use specnorm_core::graphs::{build_graph, injectivity_radius, GraphBuildSpec, RegularGraph};
use specnorm_core::rng::{derive_seed, stream};
use specnorm_core::spectral::sn_eigenvalue_check;
use specnorm_core::sphere::kernels::{averaged_kernel_probe, kernel_split_norms, loglog_slope, random_unit_vector};
use specnorm_core::sphere::rotations::{coincident_words, enumerate_words, separation_stats};
use specnorm_core::sphere::verify_sphere_theorem;
use specnorm_core::treeops::{sphere_ops, tree_kernel_check};

use crate::config::{ConfigError, ExperimentConfig, GraphConfig, GraphSource, SphereConfig, TreeConfig, MAX_VERTICES};
use crate::manifest::{Failure, OutputDir, RunManifest};
use crate::plots::{fit_line, Plot, Series};

pub const TREE_TOL: f64 = 1e-12;
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;
pub const SN_LAW_TOL: f64 = 1e-8;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const CLUSTER_RATIO_CAP: f64 = 10.0;
pub const SLOPE_TOL: f64 = 0.05;
pub const SEPARATION_THRESHOLD: f64 = 1e-3;
pub const MAX_CLOSE_WORDS: usize = 2;
pub const L1_MASS_TOL: f64 = 1e-3;
/// Below this degree the joint-vs-zonal comparison is reported, not checked.
pub const ZONAL_CHECK_MIN_S: usize = 25;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage {stage}: {source}")]
    Stage { stage: &'static str, source: specnorm_core::Error },
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

fn stage(stage: &'static str) -> impl Fn(specnorm_core::Error) -> RunError {
    move |source| RunError::Stage { stage, source }
}

/// Collects failures and notes while stages run.
#[derive(Default)]
struct Ledger {
    failures: Vec<Failure>,
    notes: Vec<String>,
}

impl Ledger {
    /// Records a failure unless `value <= tolerance`.
    fn check(&mut self, stage: &str, check: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> bool {
        let ok = value <= tolerance;
        if !ok {
            self.failures.push(Failure {
                stage: stage.into(),
                check: check.into(),
                value,
                tolerance,
                detail: detail.into(),
            });
        }
        ok
    }
}

/// Runs the pipeline selected by `config.mode` and writes every artifact
/// into `config.out`.
pub fn run(config: &ExperimentConfig) -> Result<RunManifest, RunError> {
    let mut out = OutputDir::create(&config.out)?;
    let mut ledger = Ledger::default();
    ledger.notes.extend(config.warnings.iter().map(|w| format!("warning: {w}")));
    let mut report = serde_json::Map::new();
    report.insert("mode".into(), json!(config.mode.label()));
    report.insert("seed".into(), json!(config.seed));

    if let Some(tree) = &config.tree {
        let v = out.timed("tree", |o| tree_stage(tree, o, &mut ledger))?;
        report.insert("tree".into(), v);
    }
    if let Some(graph) = &config.graph {
        let v = out.timed("graph", |o| graph_stage(graph, config.seed, o, &mut ledger))?;
        report.insert("graph".into(), v);
    }
    if let Some(sphere) = &config.sphere {
        let v = out.timed("sphere", |o| sphere_stage(sphere, config.seed, o, &mut ledger))?;
        report.insert("sphere".into(), v);
    }
    report.insert("failures".into(), serde_json::to_value(&ledger.failures).expect("failures serialize"));
    report.insert("notes".into(), json!(ledger.notes));
    out.write("report.json", &(serde_json::to_string_pretty(&Value::Object(report)).expect("report serializes") + "\n"))?;

    let (files, stages) = out.into_parts();
    let status = if ledger.failures.is_empty() { "pass" } else { "fail" };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mode: config.mode.label().into(),
        seed: config.seed,
        config_sha256: config.source_sha256.clone(),
        stages,
        files,
        notes: ledger.notes,
        failures: ledger.failures,
        status: status.into(),
    };
    std::fs::write(
        config.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )?;
    Ok(manifest)
}

fn tree_stage(cfg: &TreeConfig, out: &mut OutputDir, ledger: &mut Ledger) -> Result<Value, RunError> {
    #[derive(Serialize)]
    struct Row {
        q: usize,
        n: usize,
        max_deviation: f64,
    }
    let mut rows = Vec::new();
    let mut csv = String::from("q,n,max_deviation,pass\n");
    for &q in &cfg.q {
        for n in (0..=cfg.n_max).step_by(2) {
            let check = tree_kernel_check(q, n).map_err(stage("tree"))?;
            let ok = ledger.check("tree", &format!("kernel q={q} n={n}"), check.max_deviation, TREE_TOL, "closed form");
            writeln!(csv, "{q},{n},{:e},{ok}", check.max_deviation).unwrap();
            rows.push(Row { q, n, max_deviation: check.max_deviation });
        }
    }
    out.write("tree_kernel.csv", &csv)?;
    let worst = rows.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    Ok(json!({ "tolerance": TREE_TOL, "max_deviation": worst, "rows": rows }))
}

fn load_graph(source: &GraphSource) -> Result<RegularGraph, RunError> {
    let g = match source {
        GraphSource::Spec(spec) => build_graph(spec),
        GraphSource::EdgeList(path) => RegularGraph::load_edge_list(path),
    }
    .map_err(stage("graph"))?;
    if g.num_vertices() > MAX_VERTICES {
        return Err(ConfigError::ResourceBudgetExceeded(format!("|G| = {} > {MAX_VERTICES}", g.num_vertices())).into());
    }
    Ok(g)
}

fn graph_stage(cfg: &GraphConfig, seed: u64, out: &mut OutputDir, ledger: &mut Ledger) -> Result<Value, RunError> {
    let g = load_graph(&cfg.source)?;
    let spec = graph_spectrum(&g).map_err(stage("graph"))?;
    let options = GraphTheoremOptions { n_max: cfg.n_max, epsilon: cfg.epsilon, n_override: cfg.n };
    let report = verify_graph_theorem_with(&g, &spec, &cfg.p, cfg.delta, options).map_err(stage("graph"))?;
    ledger.check("graph", "eigen residual", report.max_eigen_residual, EIGEN_RESIDUAL_TOL, g.label());

    out.write("eigen.csv", &report.eigen_csv())?;
    out.write("sphere_norms.csv", &report.sphere_norms_csv())?;
    let mut headline = String::from("p,epsilon,max_tempered_ratio,argmax_index,max_untempered_ratio,constant_ratio\n");
    for h in &report.headline {
        let idx = h.argmax_index.map(|i| i.to_string()).unwrap_or_default();
        writeln!(
            headline,
            "{},{},{},{idx},{},{}",
            h.p, h.epsilon, h.max_tempered_ratio, h.max_untempered_ratio, h.constant_ratio
        )
        .unwrap();
    }
    out.write("headline.csv", &headline)?;

    // S_n eigenvalue law, exact for any regular graph
    let law_n = cfg.n_max.min(10);
    let ops = sphere_ops(&g, law_n);
    let law = sn_eigenvalue_check(&g, &spec, &ops);
    let law_worst = law.iter().map(|r| r.deviation_measured).fold(0.0, f64::max);
    ledger.check("graph", "S_n eigenvalue law", law_worst, SN_LAW_TOL, "measured constant per n");
    if let Some(n) = cfg.dump_op {
        let op = if n <= law_n { ops[n].clone() } else { sphere_ops(&g, n).swap_remove(n) };
        out.write(&format!("sn_{n}.csv"), &op.to_csv())?;
    }

    // cluster scan over even N up to twice the injectivity radius
    let inj = injectivity_radius(&g).map_err(stage("graph"))?;
    let eps_inf = cfg.epsilon.unwrap_or_else(|| epsilon_schedule(f64::INFINITY, cfg.delta));
    let ns: Vec<usize> = (2..=(2 * inj).max(2)).step_by(2).collect();
    let cluster = ClusterScanner::new(&spec, eps_inf).scan(&ns).map_err(stage("graph"))?;
    let mut cluster_csv = String::from("n,alpha_points,max_norm_sq,argmax_alpha,ratio\n");
    for r in &cluster {
        writeln!(cluster_csv, "{},{},{},{},{}", r.n, r.alpha_points, r.max_norm_sq, r.argmax_alpha, r.ratio).unwrap();
    }
    out.write("cluster.csv", &cluster_csv)?;
    let cluster_max = cluster.iter().map(|r| r.ratio).fold(0.0, f64::max);
    if report.girth >= 8 {
        ledger.check("graph", "cluster ratio ||W||^2/N", cluster_max, CLUSTER_RATIO_CAP, "N <= 2 InjRad");
    } else {
        ledger.notes.push(format!("cluster ratio not checked: girth {} < 8", report.girth));
    }

    let series = graph_series(cfg, seed, out, ledger)?;

    let mut value = serde_json::to_value(&report).expect("report serializes");
    let obj = value.as_object_mut().expect("report is an object");
    obj.insert("spectrum".into(), json!(spec.eigenvalues.as_slice()));
    obj.insert("sn_eigenvalue_law".into(), json!(law));
    obj.insert("cluster".into(), json!({ "epsilon": eps_inf, "rows": cluster, "max_ratio": cluster_max }));
    obj.insert("series".into(), series);
    Ok(value)
}

/// Random 4-regular graphs over `cfg.sizes`, headline ratio per `p`.
fn graph_series(cfg: &GraphConfig, seed: u64, out: &mut OutputDir, ledger: &mut Ledger) -> Result<Value, RunError> {
    if cfg.sizes.is_empty() {
        ledger.notes.push("graph ratio plot skipped: no series sizes".into());
        return Ok(Value::Null);
    }
    #[derive(Serialize)]
    struct Row {
        size: usize,
        replicate: usize,
        graph_seed: u64,
        girth: usize,
        n: usize,
        p: String,
        max_tempered_ratio: f64,
    }
    let mut rows = Vec::new();
    for &size in &cfg.sizes {
        for k in 0..cfg.seeds_per_size {
            let graph_seed = derive_seed(seed, &format!("graph-series/{size}/{k}"));
            let g = build_graph(&GraphBuildSpec::RandomRegular { n: size, degree: 4, seed: graph_seed })
                .map_err(stage("graph-series"))?;
            let spec = graph_spectrum(&g).map_err(stage("graph-series"))?;
            let options = GraphTheoremOptions { n_max: cfg.n_max, epsilon: cfg.epsilon, n_override: cfg.n };
            let rep = verify_graph_theorem_with(&g, &spec, &cfg.p, cfg.delta, options).map_err(stage("graph-series"))?;
            for h in &rep.headline {
                rows.push(Row {
                    size,
                    replicate: k,
                    graph_seed,
                    girth: rep.girth,
                    n: rep.n,
                    p: h.p.clone(),
                    max_tempered_ratio: h.max_tempered_ratio,
                });
            }
        }
    }
    let mut csv = String::from("size,replicate,graph_seed,girth,n,p,max_tempered_ratio\n");
    for r in &rows {
        writeln!(csv, "{},{},{},{},{},{},{}", r.size, r.replicate, r.graph_seed, r.girth, r.n, r.p, r.max_tempered_ratio)
            .unwrap();
    }
    out.write("graph_series.csv", &csv)?;

    let mut distinct = cfg.sizes.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if cfg.p.is_empty() {
        ledger.notes.push("graph ratio plot skipped: empty p list".into());
    } else if distinct.len() < 2 {
        ledger.notes.push("graph ratio plot skipped: fewer than two sizes".into());
    } else {
        let series = cfg
            .p
            .iter()
            .map(|&p| {
                let label = p_label(p);
                let points = distinct
                    .iter()
                    .map(|&size| {
                        let vals: Vec<f64> =
                            rows.iter().filter(|r| r.size == size && r.p == label).map(|r| r.max_tempered_ratio).collect();
                        (size as f64, vals.iter().sum::<f64>() / vals.len() as f64)
                    })
                    .collect();
                Series { name: format!("p = {label}"), points, fit: None }
            })
            .collect();
        let plot = Plot {
            title: "max tempered ratio vs |G| (random 4-regular)".into(),
            x_label: "|G|".into(),
            y_label: "||psi||_p sqrt(N) / ||psi||_2 (mean over seeds)".into(),
            log_x: true,
            log_y: false,
            series,
            annotations: vec![format!("delta = {}", cfg.delta), format!("{} seeds per size", cfg.seeds_per_size)],
        };
        out.write("graph_ratio.svg", &plot.to_svg())?;
    }
    Ok(json!({ "rows": rows }))
}

fn sphere_stage(cfg: &SphereConfig, seed: u64, out: &mut OutputDir, ledger: &mut Ledger) -> Result<Value, RunError> {
    let rot = &cfg.rotations;
    let mut obj = serde_json::Map::new();
    obj.insert("rotations".into(), json!(cfg.rotations_label));
    obj.insert("q".into(), json!(rot.q()));

    if cfg.s.is_empty() || cfg.p.is_empty() {
        ledger.notes.push("sphere fit plots skipped: empty s or p list".into());
    } else {
        let rep = verify_sphere_theorem(rot, &cfg.s, &cfg.p).map_err(stage("sphere"))?;
        ledger.check("sphere", "joint eigen residual", rep.max_eigen_residual, EIGEN_RESIDUAL_TOL, "");
        ledger.check("sphere", "hermitian defect", rep.max_hermitian_defect, HERMITIAN_TOL, "");
        for r in rep.rows.iter().filter(|r| r.s >= ZONAL_CHECK_MIN_S) {
            if !r.below_zonal {
                ledger.check(
                    "sphere",
                    &format!("joint below zonal s={} p={}", r.s, p_label(r.p)),
                    r.ratio,
                    r.zonal_ratio,
                    "normalized ratio",
                );
            }
        }
        out.write("sphere_theorem.csv", &rep.csv())?;
        out.write("sphere_eigen.csv", &rep.eigen_csv())?;
        if cfg.s.len() < 3 {
            ledger.notes.push("sphere fit plots skipped: fewer than three degrees".into());
        } else {
            for &p in &cfg.p {
                let rows: Vec<_> = rep.rows.iter().filter(|r| r.p == p || (p.is_infinite() && r.p.is_infinite())).collect();
                let joint: Vec<(f64, f64)> = rows.iter().map(|r| (r.s as f64, r.max_norm)).collect();
                let zonal: Vec<(f64, f64)> = rows.iter().map(|r| (r.s as f64, r.zonal_norm)).collect();
                let log = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| (x.log10(), y.log10())).collect::<Vec<_>>();
                let jf = fit_line(&log(&joint));
                let zf = fit_line(&log(&zonal));
                let label = p_label(p);
                let baseline = specnorm_core::sphere::theorem::baseline_exponent(p);
                let mut annotations = vec![format!("baseline = {baseline:.4}")];
                if let Some((m, _)) = jf {
                    annotations.insert(0, format!("joint slope = {m:.4}"));
                }
                if let Some((m, _)) = zf {
                    annotations.insert(1.min(annotations.len()), format!("zonal slope = {m:.4}"));
                }
                let plot = Plot {
                    title: format!("sup-normalized L^{label} norms vs s"),
                    x_label: "s".into(),
                    y_label: format!("||psi_s||_{label}"),
                    log_x: true,
                    log_y: true,
                    series: vec![
                        Series { name: "joint max".into(), points: joint, fit: jf },
                        Series { name: "zonal".into(), points: zonal, fit: zf },
                    ],
                    annotations,
                };
                out.write(&format!("sphere_fit_p{label}.svg"), &plot.to_svg())?;
            }
        }
        obj.insert("theorem".into(), rep.to_json());
    }

    if !cfg.kernel_s.is_empty() && !cfg.kernel_p.is_empty() {
        obj.insert("kernel_split".into(), kernel_stage(cfg, out, ledger)?);
    }
    if cfg.separation_n > 0 {
        obj.insert("separation".into(), separation_stage(cfg, seed, out, ledger)?);
    }
    if let Some(pr) = &cfg.probe {
        let mut rng = stream(seed, "averaged-kernel-probe");
        let rep = averaged_kernel_probe(rot, pr.s, pr.n, pr.p, pr.samples, &mut rng).map_err(stage("probe"))?;
        ledger.check("probe", "word L1 mass defect", rep.max_l1_mass_defect(), L1_MASS_TOL, "");
        let mut csv = String::from(
            "sample,y0,y1,y2,near,bulk,antipodal,overlapping_caps,near_scaling_ratio,bulk_scaling_ratio,near_disjoint_ratio,word_l1_mass\n",
        );
        for (i, r) in rep.rows.iter().enumerate() {
            writeln!(
                csv,
                "{i},{},{},{},{},{},{},{},{},{},{},{}",
                r.y[0],
                r.y[1],
                r.y[2],
                r.near,
                r.bulk,
                r.antipodal,
                r.overlapping_caps,
                r.near_scaling_ratio,
                r.bulk_scaling_ratio,
                r.near_disjoint_ratio,
                r.word_l1_mass
            )
            .unwrap();
        }
        out.write("probe.csv", &csv)?;
        obj.insert("probe".into(), serde_json::to_value(&rep).expect("probe serializes"));
    }
    Ok(Value::Object(obj))
}

fn kernel_stage(cfg: &SphereConfig, out: &mut OutputDir, ledger: &mut Ledger) -> Result<Value, RunError> {
    let mut csv = String::from("s,p,near,bulk,antipodal,total,tail\n");
    let mut slopes = Vec::new();
    let xs: Vec<f64> = cfg.kernel_s.iter().map(|&s| s as f64).collect();
    for &p in &cfg.kernel_p {
        let norms = cfg.kernel_s.iter().map(|&s| kernel_split_norms(s, p)).collect::<Result<Vec<_>, _>>().map_err(stage("kernel"))?;
        for k in &norms {
            writeln!(csv, "{},{},{},{},{},{},{}", k.s, k.p, k.near, k.bulk, k.antipodal, k.total, k.tail).unwrap();
        }
        if norms.len() < 2 {
            continue;
        }
        let total = loglog_slope(&xs, &norms.iter().map(|k| k.total).collect::<Vec<_>>());
        let tail = loglog_slope(&xs, &norms.iter().map(|k| k.tail).collect::<Vec<_>>());
        let (want_total, want_tail) = (1.0 - 4.0 / p, 0.75 - 2.0 / p);
        // the asymptotic slopes only settle once s is a few dozen
        if norms.len() >= 3 && cfg.kernel_s[0] >= 50 {
            ledger.check("kernel", &format!("total slope p={p}"), (total - want_total).abs(), SLOPE_TOL, "");
            ledger.check("kernel", &format!("tail slope p={p}"), (tail - want_tail).abs(), SLOPE_TOL, "");
        }
        slopes.push(json!({ "p": p, "total_slope": total, "expected_total": want_total, "tail_slope": tail, "expected_tail": want_tail }));
    }
    out.write("kernel_split.csv", &csv)?;
    Ok(json!({ "slopes": slopes }))
}

fn separation_stage(cfg: &SphereConfig, seed: u64, out: &mut OutputDir, ledger: &mut Ledger) -> Result<Value, RunError> {
    let rot = &cfg.rotations;
    let mut rng = stream(seed, "separation-points");
    let points: Vec<[f64; 3]> = (0..cfg.separation_points).map(|_| random_unit_vector(&mut rng)).collect();
    let mut csv = String::from("length,words,coincident,min_angle,max_close_generic\n");
    let mut rows = Vec::new();
    for n in 1..=cfg.separation_n {
        let words = enumerate_words(rot, n).map_err(stage("separation"))?;
        let coincident = coincident_words(&words);
        let rep = separation_stats(rot, n, &points, &[SEPARATION_THRESHOLD]).map_err(stage("separation"))?;
        let close = rep.max_close_generic[0];
        let min_angle = rep.min_angle_by_length[n - 1];
        ledger.check("separation", &format!("coincident words n={n}"), coincident as f64, 0.0, "exact arithmetic");
        ledger.check("separation", &format!("close words n={n}"), close as f64, MAX_CLOSE_WORDS as f64, "d(x, gx) <= 1e-3");
        writeln!(csv, "{n},{},{coincident},{min_angle},{close}", words.len()).unwrap();
        rows.push(json!({ "n": n, "words": words.len(), "coincident": coincident, "min_angle": min_angle, "max_close_generic": close, "fitted_c": rep.fitted_c }));
    }
    out.write("separation.csv", &csv)?;
    Ok(json!({ "threshold": SEPARATION_THRESHOLD, "points": cfg.separation_points, "rows": rows }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_records_only_misses() {
        let mut l = Ledger::default();
        assert!(l.check("s", "ok", 1e-13, 1e-12, ""));
        assert!(!l.check("s", "bad", 2.0, 1.0, "why"));
        assert!(!l.check("s", "nan", f64::NAN, 1.0, ""));
        assert_eq!(l.failures.len(), 2);
        let json = serde_json::to_value(&l.failures).unwrap();
        assert_eq!(json[0]["check"], "bad");
    }
}
