//! Operator norms, the cycle condition, spectral cluster operators and the
//! delocalization report for eigenfunctions of `T_q`.

pub mod cluster;
pub mod condition;
pub mod norms;
pub mod theorem;
pub mod untempered;

pub use cluster::{build_cluster, cosine_mass, ClusterOperator, ClusterScanner, CosineMass};
pub use condition::{admissible_n, check_condition, sphere_norms};
pub use norms::{lp_norm, norm_2_inf, norm_2_p_lower, op_norm_1_inf, riesz_thorin_bound};
pub use theorem::{verify_graph_theorem, DelocalizationReport};
pub use untempered::{untempered_decay_probe, UntemperedProbe};
