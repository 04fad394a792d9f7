//! Benchmark fixtures shared by the criterion targets.

use specnorm_core::graphs::{build_graph, GraphBuildSpec};
use specnorm_core::RegularGraph;

/// Random 4-regular graph on `n` vertices with a fixed seed.
pub fn random_graph(n: usize) -> RegularGraph {
    build_graph(&GraphBuildSpec::RandomRegular { n, degree: 4, seed: 1 }).expect("fixture graph builds")
}
