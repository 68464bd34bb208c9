//! Bistatic multi-target detection for joint communication and sensing
//! transmitters.
//!
//! A transmitter splits its frame between sensing beams and a user link,
//! either in time ([`precoding::Mode::Tdm`]) or by superposing both beams in
//! every slot ([`precoding::Mode::Cm`]). A separate receive array estimates
//! how many targets are present from the eigenvalues of its sample
//! covariance. [`experiments`] runs the whole chain Monte Carlo style.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod detect;
pub mod error;
pub mod experiments;
pub mod noise;
pub mod precoding;
pub mod random;
pub mod scene;
pub mod synthesis;

pub use error::{Error, Result};
