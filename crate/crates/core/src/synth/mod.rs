//! Synthetic datasets with planted ground truth.

mod dataset;
mod drive;
mod pairs;

pub use dataset::{
    demo_dataset, DemoDataset, DemoLayout, DemoVideo, Junction, DEMO_FPS, DEMO_MAP_STRIDE, DEMO_SIGMA_PX,
    GAZE_PER_FRAME,
};
pub use drive::{east_of, north_of, planted_drive, Phase, PlantedDrive};
pub use pairs::{
    demo_sd_pairs, demo_window_samples, write_demo_correspondences, SD_PAIRS_FILE, SD_REFS_FILE, WINDOW_PAIRS_FILE,
    WINDOW_REFS_FILE,
};
