//! Numerical laboratory for L^p bounds of eigenfunctions on regular graphs
//! and of rotation-averaged spherical harmonics.
//!
//! The crate is split along the objects it manipulates:
//!
//! * [`graphs`]: construction and combinatorics of finite `q+1`-regular graphs.
//! * [`treeops`]: the normalized adjacency `T_q`, non-backtracking sphere
//!   averages `S_n`, Chebyshev propagators `P_n(T_q/2)` and tree-ball checks.
//! * [`spectral`]: dense eigendecompositions, spectral parameters and projectors.
//! * [`graphbounds`]: operator norms, spectral cluster operators and the
//!   delocalization report for graph eigenfunctions.
//! * [`sphere`]: spherical harmonics, Wigner matrices, exact rotation words and
//!   zonal kernel estimates on the 2-sphere.
//!
//! All `L^p` norms on graphs use counting measure.

pub mod error;
pub mod graphbounds;
pub mod graphs;
pub mod rng;
pub mod spectral;
pub mod sphere;
pub mod treeops;

pub use error::{Error, Result};
pub use graphbounds::{ClusterOperator, DelocalizationReport};
pub use graphs::{GraphBuildSpec, RegularGraph};
pub use spectral::{SpectralData, SpectralProjector, Theta};
pub use sphere::{HarmonicSpace, RotationSet, SphereGrid, ZonalKernel};
pub use treeops::{GraphOperator, TreeBall};

/// Dense real matrix type used for all graph operators.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real vector type.
pub type Vector = nalgebra::DVector<f64>;
