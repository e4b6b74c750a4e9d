//! Numerical workbench for symmetric α-stable processes and the Fourier
//! multiplier built from their harmonic extension.
//!
//! The crate is organised bottom-up:
//!
//! * [`stable_density`]: transition densities, derivatives, envelope and the
//!   one-sided stable law used for subordination;
//! * [`harmonic_extension`]: the Brownian exit law, the kernel `q_t` and the
//!   semigroup `Q_t` on periodic grids;
//! * [`spectral`]: grids, sampled fields and the FFT;
//! * [`multiplier_op`]: the operator `T`, its symbol and related probes;
//! * [`stable_mc`]: Monte Carlo for the product process `(Y, Z)`.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod harmonic_extension;
pub mod multiplier_op;
pub mod quad;
pub mod special;
pub mod spectral;
pub mod stable_density;
pub mod stable_mc;

pub use error::{Error, Result};
pub use multiplier_op::{HPolicy, MultiplierProfile, SingularCell, TQuadSpec};
pub use spectral::{GridSpec, SampledField, Spectrum};
pub use stable_density::{DensityEvalSpec, DensityMethod, StableParams};
pub use stable_mc::{MCEstimate, PathConfig};
