//! Guided frequency loss (GFL) for image restoration.
//!
//! The loss combines three terms on the residual between a restored image
//! and its ground truth:
//!
//! * a Charbonnier term in the spatial domain,
//! * a depth-1 Laplacian-pyramid term, and
//! * a high-pass term whose pass band widens during training under a
//!   static or loss-driven schedule.
//!
//! Analytic gradients are provided for every term. The [`harness`] module
//! exercises the loss and scheduler on desk-scale restoration problems, and
//! the `gfl` binary exposes everything from the command line.

pub mod cli;
pub mod error;
pub mod harness;
pub mod imagecore;
pub mod loss;
pub mod pyramid;
pub mod scheduler;
pub mod spectral;

pub use error::{Error, Result};
pub use imagecore::{Image, Plane};
pub use loss::{gfl, gfl_gradient, GflParams, LossBreakdown, LossKind};
pub use scheduler::{ScheduleConfig, ScheduleState};
pub use spectral::{FrequencyMask, Spectrum};
