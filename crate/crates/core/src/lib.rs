//! Driver-attention dataset auditing: speed segmentation, homography error protocols,
//! ground-truth saliency synthesis, saliency metrics with stratified reports, map-based
//! intersection context and data-quality audits.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix the
//! common choices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod context;
pub mod error;
pub mod homography;
pub mod io;
pub mod map;
pub mod metrics;
pub mod model;
pub mod salmap;
pub mod scalar;
pub mod segment;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SaliencyMap64 = map::SaliencyMap<f64>;
pub type SaliencyMap32 = map::SaliencyMap<f32>;
pub type Homography64 = homography::Homography<f64>;
pub type Homography32 = homography::Homography<f32>;
pub type Fixation64 = model::Fixation<f64>;
pub type Fixation32 = model::Fixation<f32>;
pub type SpeedSeries64 = segment::SpeedSeries<f64>;
pub type SpeedSeries32 = segment::SpeedSeries<f32>;
