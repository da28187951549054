//! Reconstruction of piecewise-constant elastic coefficient fields from
//! internal displacement measurements on 2D triangulated domains.
//!
//! The toolkit covers the whole pipeline:
//!
//! - synthetic data generation (phantoms, traction loads, forward solves,
//!   grid sampling, noise, elastic smoothing),
//! - assembly of the coefficient-to-residual system in P0/P1 elements,
//! - TV-regularized box-constrained least squares via operator splitting,
//! - spectral probes of the assembled operator (smallest singular pairs),
//! - experiment orchestration with deterministic, reproducible artifacts.
//!
//! The numerical core is generic over the scalar type through [`Scalar`];
//! the aliases below fix the two floating-point instantiations. All default
//! tolerances are calibrated for `f64`.

pub mod dense;
pub mod error;
pub mod fem;
pub mod grid;
pub mod linsolve;
pub mod mesh;
pub mod scalar;
pub mod sparse;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` instantiations (the defaults used by the CLI and experiments).
pub type Mesh64 = mesh::Mesh<f64>;
pub type DomainSpec64 = mesh::DomainSpec<f64>;
pub type ScalarFieldP064 = fem::ScalarFieldP0<f64>;
pub type VectorFieldP164 = fem::VectorFieldP1<f64>;
pub type Tensor4Sym64 = tensor::Tensor4Sym<f64>;
pub type SymMat264 = tensor::SymMat2<f64>;

/// `f32` instantiations.
pub type Mesh32 = mesh::Mesh<f32>;
pub type DomainSpec32 = mesh::DomainSpec<f32>;
pub type ScalarFieldP032 = fem::ScalarFieldP0<f32>;
pub type VectorFieldP132 = fem::VectorFieldP1<f32>;
pub type Tensor4Sym32 = tensor::Tensor4Sym<f32>;
pub type SymMat232 = tensor::SymMat2<f32>;
