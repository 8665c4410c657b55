//! Fall detection from wearable inertial sensors.
//!
//! * [`ingest`] reads recording trees (`<root>/<subject>/{chest,left,right}/*.csv`)
//!   and generates synthetic recordings with fall-like signatures.
//! * [`segment`] cuts recordings into fixed-length labeled windows.
//! * [`features`] builds per-scenario channel stacks (time or DC-stripped
//!   spectrum), splits 60/20/20 and standardizes.
//! * [`model`] is a from-scratch 1D convolutional binary classifier.
//! * [`eval`] holds confusion-matrix metrics (MCC, sensitivity, specificity, precision).
//! * [`hpo`] runs a TPE-style search maximizing validation MCC.
//! * [`detector`] replays feeds through 5 s windows stepping by 1 s.

pub mod detector;
pub mod error;
pub mod eval;
pub mod features;
pub mod hpo;
pub mod ingest;
pub mod model;
pub mod seed;
pub mod segment;

pub use error::{Error, Result};
