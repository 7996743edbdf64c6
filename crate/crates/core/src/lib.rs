//! Training-free segmentation of a structure across a stack of grayscale
//! slices.
//!
//! Keypoints are seeded on one slice (by hand, or from a single-level Haar
//! decomposition of a region of interest), carried slice to slice in both
//! directions with pyramidal Lucas-Kanade flow, closed into a convex hull per
//! slice and rasterized into masks that can be scored with the Dice
//! coefficient against ground-truth polygons.
//!
//! Every numeric routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file pin the common instantiations.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod phantom;
pub mod pipeline;
pub mod scalar;
pub mod types;
pub mod wavelet;

pub use error::{Error, Result};
pub use flow::{build_pyramid, track_point, track_set, Pyramid, TrackOutcome};
pub use geometry::{convex_hull, dsc, rasterize, Point2, Polygon};
pub use pipeline::{
    evaluate, evaluate_masks, propagate, reconstruct, seed_keypoints, segment, stack_masks,
    MetricsReport, SeedMode, SeedSpec, SegmentationResult, SliceProduct, StartSlice, VoxelVolume,
};
pub use scalar::Scalar;
pub use types::{
    crop, normalize_intensities, GraySlice, Keypoint, KeypointSet, KeypointStatus, Roi, SliceMask,
    TrackParams, Volume,
};
pub use wavelet::{
    detect_keypoints, haar_dwt2, haar_idwt2, magnitude, DetectParams, Grid, MagnitudeMap,
    SubbandSet, ThresholdPolicy,
};

pub type GraySlice32 = GraySlice<f32>;
pub type GraySlice64 = GraySlice<f64>;
pub type Volume32 = Volume<f32>;
pub type Volume64 = Volume<f64>;
pub type Keypoint32 = Keypoint<f32>;
pub type Keypoint64 = Keypoint<f64>;
pub type KeypointSet32 = KeypointSet<f32>;
pub type KeypointSet64 = KeypointSet<f64>;
pub type TrackParams32 = TrackParams<f32>;
pub type TrackParams64 = TrackParams<f64>;
pub type SubbandSet32 = SubbandSet<f32>;
pub type SubbandSet64 = SubbandSet<f64>;
pub type Polygon32 = Polygon<f32>;
pub type Polygon64 = Polygon<f64>;
pub type SegmentationResult32 = SegmentationResult<f32>;
pub type SegmentationResult64 = SegmentationResult<f64>;
