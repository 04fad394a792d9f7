//! Spherical harmonics of degree `s`, the averaging operator of a free set of
//! rotations, and sup/`L^p` bounds for its eigenfunctions.

pub mod averaging;
pub mod harmonics;
pub mod kernels;
pub mod legendre;
pub mod quadrature;
pub mod rotations;
pub mod theorem;
pub mod wigner;

pub type Complex = nalgebra::Complex<f64>;
pub type CMatrix = nalgebra::DMatrix<Complex>;

pub use averaging::{build_averaging, joint_eigenbasis, HarmonicSpace, JointEigenbasis};
pub use kernels::{kernel_split_norms, ZonalKernel};
pub use quadrature::SphereGrid;
pub use rotations::{enumerate_words, RationalMatrix, RotationSet};
pub use theorem::{verify_sphere_theorem, SphereTheoremReport};
