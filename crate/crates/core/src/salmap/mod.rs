//! Gaze filtering, fixation detection and ground-truth saliency synthesis.

mod gaze;
mod recipes;

pub use gaze::{default_drop_set, detect_fixations_idt, filter_gaze, Composition, RawGaze};
pub use recipes::{
    multi_observer_maps, multi_observer_response, single_fixation_map, spatial_gaussian_map,
    spatial_gaussian_response, temporal_window_map, temporal_window_response, Combine, OffFramePolicy,
    Recipe, RecipeConfig, TRUNCATION_SIGMAS,
};
