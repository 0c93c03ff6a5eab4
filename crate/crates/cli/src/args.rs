use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gazeaudit_core::segment::Penalty;

#[derive(Debug, Parser)]
#[command(name = "gazeaudit", version, about = "Driver-attention dataset auditing and saliency benchmarking")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label longitudinal actions from telemetry speed.
    Segment(SegmentArgs),
    /// Synthesize ground-truth saliency maps from gaze.
    Salmap(SalmapArgs),
    /// Evaluate predicted maps against ground truth, stratified.
    Eval(EvalArgs),
    /// Projection-error protocols over correspondence files.
    Homaudit(HomauditArgs),
    /// Suggest intersection crossings from a street-network extract.
    Context(ContextArgs),
    /// Data-quality audit: frame gaps, exposure, telemetry, gaze.
    Audit(AuditArgs),
    /// Action percentages and context counts over a dataset.
    Stats(StatsArgs),
    /// Local annotation service.
    Serve(ServeArgs),
    /// Write the bundled demo dataset and correspondence files.
    Synth(SynthArgs),
}

fn parse_penalty(s: &str) -> Result<Penalty, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Penalty::Auto);
    }
    match s.parse::<f64>() {
        Ok(b) if b.is_finite() && b > 0.0 => Ok(Penalty::Fixed(b)),
        _ => Err(format!("expected `auto` or a positive number, got `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub video: String,
    /// Annotation document to create or update; lateral spans and events already in it are kept.
    #[arg(long)]
    pub out: PathBuf,
    /// Acceleration threshold, m/s^2.
    #[arg(long, default_value_t = 0.4)]
    pub accel_th: f64,
    /// Stop threshold, km/h.
    #[arg(long, default_value_t = 1.0)]
    pub stop_th: f64,
    #[arg(long, default_value_t = 20)]
    pub median_window: usize,
    /// `auto` or a fixed positive penalty.
    #[arg(long, default_value = "auto", value_parser = parse_penalty)]
    pub penalty: Penalty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecipeName {
    /// Multi-observer, spatio-temporal sum.
    Bdda,
    /// Single observer, ±window remapped by homographies, pixelwise max.
    Dreyeve,
    /// One fixation per frame, wide kernel.
    Lbw,
}

#[derive(Debug, Args)]
pub struct SalmapArgs {
    #[arg(long, value_enum)]
    pub recipe: RecipeName,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub video: String,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Spatial sigma in pixels; defaults to 25 (60 for lbw).
    #[arg(long)]
    pub sigma_s: Option<f64>,
    /// Temporal sigma in frames (bdda).
    #[arg(long)]
    pub sigma_t: Option<f64>,
    /// Half-width of the temporal window in frames.
    #[arg(long)]
    pub window: Option<u32>,
    /// Per-frame homographies into a common reference frame, CSV `frame,h11,...,h33` (dreyeve).
    #[arg(long)]
    pub homographies: Option<PathBuf>,
    /// Emit a map every `stride` frames.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Prediction root; per-video maps in `<dir>/<video id>/` or `<dir>` itself. Defaults to the manifest.
    #[arg(long)]
    pub pred_dir: Option<PathBuf>,
    #[arg(long)]
    pub gt_dir: Option<PathBuf>,
    #[arg(long, default_value = "kld,cc,sim,nss")]
    pub metrics: String,
    #[arg(long, default_value = "action,context")]
    pub stratify: String,
    /// `.md` writes a markdown table, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HomauditMode {
    Sd,
    Temporal,
}

#[derive(Debug, Args)]
pub struct HomauditArgs {
    #[arg(long, value_enum)]
    pub mode: HomauditMode,
    /// Correspondences, CSV `pair_id,src_x,src_y,dst_x,dst_y`. In temporal mode ids are `<key>:<offset>`.
    #[arg(long)]
    pub pairs_file: PathBuf,
    /// Reference fixations (sd) or probe points in `src` (temporal), same columns.
    #[arg(long)]
    pub refs_file: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1920.0)]
    pub scene_width: f64,
    /// Temporal window half-width in frames.
    #[arg(long, default_value_t = 12)]
    pub window: i32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ContextArgs {
    /// Street extract; defaults to the video's `osm` entry.
    #[arg(long)]
    pub osm: Option<PathBuf>,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub video: String,
    /// Match radius in metres.
    #[arg(long, default_value_t = 25.0)]
    pub radius: f64,
    /// Annotation document to update; defaults to the video's `annotations` entry.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub video: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Image decoding threads; defaults to the number of cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Action percentages CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Context counts CSV.
    #[arg(long)]
    pub context_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8787")]
    pub bind: SocketAddr,
    /// Reject every write.
    #[arg(long)]
    pub read_only: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Seed for the correspondence files.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}
