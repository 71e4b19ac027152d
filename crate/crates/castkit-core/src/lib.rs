//! Deterministic primitives for editing-aware 3D reconstruction tooling:
//! per-view consistency scoring and selection, first-frame difference
//! masking, added-object mask propagation through pixel-aligned point
//! maps, and ORB-style keypoint-matching consistency evaluation.
//!
//! Everything in this crate is a pure function over immutable inputs.
//! Identical inputs produce bit-identical outputs across runs, platforms,
//! and worker counts; callers may parallelise freely.

pub mod geometry;
pub mod image;
pub mod masking;
pub mod matching;
pub mod metrics;
pub mod selection;
pub mod synthetic;

pub use crate::image::{ImageError, ImagePlane, Shape};
pub use geometry::{
    bbox_mask, lift_mask_pixels, project_object_to_view, propagate_added_object_masks,
    CameraParams, GeometryError, ObjectPoints, PointMap, Projected, PropagateConfig,
};
pub use masking::{
    apply_mask, diff_mask, mask_stats, reset_first_valid, DiffMaskConfig, Mask, MaskError,
    MaskFrameStats, MaskSemantics, MaskSequence,
};
pub use matching::{
    compute_descriptors, consistency_report, detect_keypoints, match_pair, ConsistencyReport,
    Descriptor, Keypoint, MatchConfig, MatchError, MatchPair, MatchSet,
};
pub use metrics::{
    gradient_proxy_distance, mse, perceptual_distance, psnr, psnr_from_mse, ssim, MetricsError,
    PerceptualConfig, PerceptualEvaluator, PerceptualMode, SsimParams,
};
pub use selection::{
    auto_tau, score_view, select_by_threshold, select_top_k, select_views, ScoreWeights,
    SelectionError, SelectionResult, SelectionRule, ViewScore,
};
