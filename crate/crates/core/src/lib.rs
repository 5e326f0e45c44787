//! Post-processing for lane-detection probability maps.
//!
//! Turns per-channel confidence maps from a segmentation-style lane detector
//! into tracked left/right active-lane markings: salient point extraction,
//! straight/curved classification, weighted line fits or quadratic splines,
//! cross-frame tracking with decaying evidence weights, and IoU scoring
//! against ground truth.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to one of the two.

pub mod error;
pub mod evaluation;
pub mod extraction;
pub mod io;
pub mod lane_model;
pub mod pipeline;
pub mod regression;
pub mod scalar;
pub mod synth;
pub mod tracker;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type LanePoint64 = extraction::LanePoint<f64>;
pub type LanePoint32 = extraction::LanePoint<f32>;
pub type LaneShape64 = lane_model::LaneShape<f64>;
pub type LaneShape32 = lane_model::LaneShape<f32>;
pub type WlsFit64 = regression::WlsFit<f64>;
pub type WlsFit32 = regression::WlsFit<f32>;
pub type Tracker64 = tracker::Tracker<f64>;
pub type Tracker32 = tracker::Tracker<f32>;
pub type Pipeline64 = pipeline::Pipeline<f64>;
pub type Pipeline32 = pipeline::Pipeline<f32>;
