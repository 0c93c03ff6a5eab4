//! Longitudinal action segmentation from vehicle speed.
//!
//! Pipeline: outlier replacement and moving-median smoothing ([`clean_speed`]),
//! penalized change-point detection with an L2 mean-shift cost ([`detect_change_points`]),
//! endpoint-acceleration thresholding ([`classify_segments`]), then fusion with manually
//! labeled lateral actions into the six-way taxonomy ([`fuse_actions`]).

mod classify;
mod clean;
mod pelt;

pub use classify::{
    action_statistics, classify_segments, fuse_actions, fuse_label, per_frame_longitudinal,
    segment_speed, ActionStats, Segment, Segmentation,
};
pub use clean::{
    auto_penalty, clean_speed, clean_speed_values, moving_median, Penalty, SegmentationConfig,
    SpeedSeries,
};
pub use pelt::{detect_change_points, partition_cost};
