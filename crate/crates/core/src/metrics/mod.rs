//! Saliency metrics, aggregate heatmaps and the stratified benchmark report.

mod eval;
mod report;
mod saliency;
mod windows;

pub use eval::{frame_metrics, stratified_eval, EvalConfig};
pub use report::{
    stratify, FrameEval, MetricStat, ReportRow, StratifiedReport, Stratum, REPORT_HEADER,
};
pub use saliency::{cc, kld, nss, sim, Metric, MetricValue, KLD_EPS};
pub use windows::{build_scenario_windows, ScenarioWindow};

use crate::error::{Error, Result};
use crate::map::SaliencyMap;
use crate::model::Fixation;
use crate::scalar::Scalar;

/// All fixations of an episode set superposed, smoothed and normalized to sum 1.
pub fn aggregate_heatmap<T: Scalar>(
    episodes: &[Vec<Fixation<T>>],
    sigma: T,
    width: usize,
    height: usize,
) -> Result<SaliencyMap<T>> {
    let all: Vec<Fixation<T>> = episodes.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(Error::Empty("no fixations in episode set".into()));
    }
    crate::salmap::spatial_gaussian_map(&all, sigma, width, height)
}
