//! Eddy-current inductance spectroscopy of conductive, magnetic plates.
//!
//! The forward model gives the complex inductance change of an axial
//! gradiometer coil above a plate of conductivity `sigma`, relative
//! permeability `mu_r` and thickness `t` at lift-off `l`. The inverse
//! problem recovers those four numbers from a multi-frequency spectrum with
//! a damped Gauss-Newton iteration over a finite-difference Jacobian.
//!
//! ```no_run
//! use eddyspec::{default_band, invert, Coil, ForwardModel, InversionConfig, Plate};
//!
//! let coil = Coil::default();
//! let truth = Plate::new(4.13e6, 222.0, 1.40e-3, 5e-3);
//! let model = ForwardModel::for_liftoff(coil, truth.l, 2048)?;
//! let observed = model.spectrum(&truth, &default_band())?;
//! let fit = invert(&coil, &observed, &InversionConfig::default())?;
//! assert!(fit.converged);
//! # Ok::<(), eddyspec::Error>(())
//! ```
//!
//! Everything numeric is generic over [`Real`] (`f32`, `f64`); the aliases
//! below fix the scalar to `f64`, with `*32` variants for `f32`.

// Negated comparisons such as `!(x > 0)` are used on purpose: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataio;
pub mod error;
pub mod forward;
pub mod inversion;
pub mod linalg;
pub mod report;
pub mod scalar;
pub mod sensitivity;
pub mod specfun;

pub use error::{Error, Result};
pub use forward::{default_band, log_spaced, ForwardModel};
pub use inversion::{invert, InversionConfig, RankMask, StopReason};
pub use scalar::Real;
pub use sensitivity::Param;

pub type Coil = forward::CoilGeometry<f64>;
pub type Plate = forward::PlateParams<f64>;
pub type Spectrum = forward::InductanceSpectrum<f64>;
pub type Jacobian = sensitivity::JacobianMatrix<f64>;
pub type Bounds = inversion::ParamBounds<f64>;
pub type Fit = inversion::InversionResult<f64>;

pub type Coil32 = forward::CoilGeometry<f32>;
pub type Plate32 = forward::PlateParams<f32>;
pub type Spectrum32 = forward::InductanceSpectrum<f32>;
pub type Jacobian32 = sensitivity::JacobianMatrix<f32>;
