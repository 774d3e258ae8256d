//! Approximately dual wavelet frames built by truncating a generator in the
//! Fourier domain and oversampling the translation lattice, with closed-form
//! error certificates and an empirical reconstruction check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx_dual;
pub mod cli;
pub mod error;
pub mod frame;
pub mod generators;
pub mod nogo;
pub mod numeric;
pub mod reconstruct;
pub mod spectrum;

pub use error::{Error, Result};
pub use frame::FrameParams;
pub use spectrum::{DecayEnvelope, Spectrum};
