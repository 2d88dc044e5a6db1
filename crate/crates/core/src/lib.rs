//! Crowd social-distance monitoring from calibrated multi-camera views.
//!
//! Head annotations are projected onto a horizontal plane at average head
//! height, split into compliant (SDC) and non-compliant (NSDC) persons by a
//! distance threshold, blurred into density maps `D_c` and `D_n`, and turned
//! into segmentation ground truth by morphology. Predicted density maps are
//! post-processed into labeled risk regions, and predictions are scored with
//! density-weighted confusion sums. A seeded crowd simulator provides scenes
//! with known answers.
//!
//! | module | role |
//! |--------|------|
//! | [`geometry`] | cameras, plane homographies, raster warping |
//! | [`annotations`] | compliance classification, multi-view merging |
//! | [`density`] | Gaussian density maps |
//! | [`maskgen`] | binarization, morphology, mask projection |
//! | [`postprocess`] | connected regions with counts and risk labels |
//! | [`metrics`] | MAE/MSE, Dice, density-weighted scores |
//! | [`simulate`] | synthetic scenes and camera rigs |
//! | [`formats`], [`config`], [`pipeline`], [`cli`] | files and commands |

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotations;
pub mod cli;
pub mod config;
pub mod density;
pub mod error;
pub mod formats;
pub mod geometry;
pub mod grid;
pub mod maskgen;
pub mod metrics;
pub mod pipeline;
pub mod postprocess;
pub mod simulate;

pub use error::{Error, Result};
pub use grid::{CameraId, Grid, GridSpec, Space};
