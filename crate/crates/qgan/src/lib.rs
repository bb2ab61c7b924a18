//! Adversarial learning of quantum state-preparation circuits, on a
//! real-amplitude statevector simulator.
//!
//! The pieces, bottom to top:
//!
//! - [`simulator`]: real-amplitude statevectors and circuit templates built
//!   from Y-rotations and CNOTs.
//! - [`circuits`]: generator and discriminator ansatz construction from
//!   uniformly controlled rotations, and the exact state-to-angles inverse.
//! - [`encoding`]: inverse stereographic embedding of classical vectors onto
//!   the unit sphere, and its inverse.
//! - [`pca`]: principal component analysis for compressing images to the
//!   dimension a small register can hold.
//! - [`linalg`]: the dense symmetric eigensolver behind [`pca`].
//! - [`optimizer`]: covariance matrix adaptation evolution strategy, the
//!   gradient-free optimizer both players train with.
//! - [`adversarial`]: the discriminator score, the two losses, and the
//!   alternating training game.
//! - [`dataio`]: IDX image loading, subset selection, PGM and CSV export.
//! - [`cli`]: configuration, artifact layout, and the command entry points.
//!
//! Numeric routines are generic over the scalar type through [`scalar::Real`]
//! (implemented for `f32` and `f64`); every public type defaults to `f64`.

pub mod adversarial;
pub mod circuits;
pub mod cli;
pub mod dataio;
pub mod encoding;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod pca;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};
pub use scalar::Real;

/// Statevector over `f64` amplitudes, the default precision everywhere.
pub type StateVector = simulator::StateVector<f64>;
/// Single-precision statevector.
pub type StateVector32 = simulator::StateVector<f32>;
/// Dense row-major matrix over `f64`.
pub type Matrix = linalg::Matrix<f64>;
/// Principal component model over `f64`.
pub type PcaModel = pca::PcaModel<f64>;
/// Evolution strategy state over `f64`.
pub type CmaesState = optimizer::CmaesState<f64>;
