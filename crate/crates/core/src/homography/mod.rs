//! Planar homography estimation and projection-error protocols.

mod estimate;
mod protocol;

pub use estimate::{
    estimate_homography_dlt, estimate_homography_robust, project_point, Correspondence, Homography,
    RobustEstimate,
};
pub use protocol::{
    sd_error_protocol, temporal_window_error, BinSummary, ErrorReport, FramePair, OffsetSummary,
    ProtocolConfig, WindowSample,
};
