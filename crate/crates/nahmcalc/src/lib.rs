//! Singularity-data calculator for the Fourier–Laplace and Nahm transforms of
//! parabolic connections on the projective line.

pub mod assumptions;
pub mod cli;
pub mod error;
pub mod hodge_table;
pub mod json;
pub mod lattice;
pub mod puiseux;
pub mod roots;
pub mod scalar;
pub mod singularity_data;
pub mod stationary_phase;
pub mod weyl;

pub use error::{Error, Result};
pub use scalar::{ComplexScalar, Q};
