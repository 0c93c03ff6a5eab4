use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use gazeaudit_core::audit::{audit_video, AuditReport, ExposureConfig};
use gazeaudit_core::context::{
    context_statistics, match_route, merge_events, parse_osm_extract, suggested_events,
};
use gazeaudit_core::homography::{
    sd_error_protocol, temporal_window_error, Correspondence, FramePair, Homography, ProtocolConfig, WindowSample,
};
use gazeaudit_core::io::{
    load_manifest, map_file_name, read_correspondences_csv, read_gaze_observers, read_homographies_csv,
    read_telemetry_csv, write_atomic, write_saliency_map, Annotations, DatasetManifest, VideoEntry,
};
use gazeaudit_core::map::SaliencyMap;
use gazeaudit_core::metrics::{stratified_eval, EvalConfig, Metric, Stratum};
use gazeaudit_core::model::{ActionLabel, Fixation};
use gazeaudit_core::salmap::{
    default_drop_set, filter_gaze, multi_observer_response, single_fixation_map, temporal_window_map,
    RecipeConfig,
};
use gazeaudit_core::segment::{action_statistics, segment_speed, SegmentationConfig};
use gazeaudit_core::synth::{demo_dataset, write_demo_correspondences};
use gazeaudit_core::Error;
use rayon::prelude::*;

use crate::args::*;
use crate::{load_or_new, video_num_frames, CliError, CliResult};

pub(crate) fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Segment(a) => segment(a),
        Command::Salmap(a) => salmap(a),
        Command::Eval(a) => eval(a),
        Command::Homaudit(a) => homaudit(a),
        Command::Context(a) => context(a),
        Command::Audit(a) => audit(a),
        Command::Stats(a) => stats(a),
        Command::Serve(a) => serve(a),
        Command::Synth(a) => synth(a),
    }
}

fn find_video<'m>(m: &'m DatasetManifest, id: &str) -> CliResult<&'m VideoEntry> {
    m.video(id).ok_or_else(|| {
        let known: Vec<&str> = m.videos.iter().map(|v| v.id.as_str()).collect();
        CliError::Usage(format!("unknown video `{id}`; manifest has: {}", known.join(", ")))
    })
}

fn required<'a, T>(v: &'a VideoEntry, field: Option<&'a T>, name: &str) -> CliResult<&'a T> {
    field.ok_or_else(|| CliError::Io(format!("video {} has no `{name}` entry in the manifest", v.id)))
}

fn segment(a: SegmentArgs) -> CliResult<()> {
    let m = load_manifest(&a.manifest)?;
    let v = find_video(&m, &a.video)?;
    let cfg = SegmentationConfig {
        accel_threshold: a.accel_th,
        stop_threshold_kmh: a.stop_th,
        median_window: a.median_window,
        penalty: a.penalty,
        ..SegmentationConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let telemetry = read_telemetry_csv(required(v, v.telemetry.as_ref(), "telemetry")?)?;
    let n = video_num_frames(v)?;
    let seg = segment_speed::<f64>(&telemetry, v.fps, &cfg)?;
    let mut ann = load_or_new(&a.out, &v.id, n)?;
    ann.set_longitudinal(&seg.labels_for_video(n));
    ann.refresh_categories();
    ann.validate()?;
    ann.write(&a.out)?;
    log::info!("{}: {} segments, {} frames", v.id, seg.segments.len(), n);
    Ok(())
}

fn recipe_config(a: &SalmapArgs) -> RecipeConfig {
    let mut cfg = match a.recipe {
        RecipeName::Bdda => RecipeConfig::multi_observer(),
        RecipeName::Dreyeve => RecipeConfig::temporal_window(),
        RecipeName::Lbw => RecipeConfig::single_fixation(),
    };
    if let Some(s) = a.sigma_s {
        cfg.sigma_spatial = s;
    }
    if let Some(s) = a.sigma_t {
        cfg.sigma_temporal = s;
    }
    if let Some(w) = a.window {
        cfg.window_halfwidth = w;
    }
    cfg
}

fn salmap(a: SalmapArgs) -> CliResult<()> {
    let m = load_manifest(&a.manifest)?;
    let v = find_video(&m, &a.video)?;
    let cfg = recipe_config(&a);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let hs = match (a.recipe, &a.homographies) {
        (RecipeName::Dreyeve, Some(p)) => Some(read_homographies_csv(p)?),
        (RecipeName::Dreyeve, None) => {
            return Err(CliError::Usage("--recipe dreyeve requires --homographies".into()))
        }
        _ => None,
    };
    let drop = default_drop_set();
    let observers: Vec<Vec<Fixation<f64>>> = read_gaze_observers(required(v, v.gaze.as_ref(), "gaze")?)?
        .iter()
        .map(|s| filter_gaze::<f64>(s, &drop).0)
        .collect();
    let n = video_num_frames(v)?;
    let (w, h) = v.image_size();
    let frames: Vec<u64> = (0..n).step_by(a.stride as usize).collect();
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", a.out_dir.display())))?;

    let maps: Vec<(u64, Option<SaliencyMap<f64>>)> = match a.recipe {
        RecipeName::Bdda => frames
            .par_iter()
            .map(|&f| {
                let r = multi_observer_response(&observers, f, &cfg, w, h)?;
                Ok((f, r.normalized().ok()))
            })
            .collect::<Result<_, Error>>()?,
        RecipeName::Dreyeve => {
            let to_ref = hs.expect("checked above");
            let fixations: Vec<Fixation<f64>> = observers.into_iter().flatten().collect();
            frames
                .par_iter()
                .map(|&k| {
                    let Some(hk) = to_ref.get(&k) else {
                        return Ok((k, None));
                    };
                    let back = hk.inverse()?;
                    let hw = cfg.window_halfwidth as u64;
                    let mut into_key: BTreeMap<u64, Homography<f64>> = BTreeMap::new();
                    for t in k.saturating_sub(hw)..=k + hw {
                        if let Some(ht) = to_ref.get(&t) {
                            into_key.insert(t, back.compose(ht)?);
                        }
                    }
                    let window: Vec<Fixation<f64>> = fixations
                        .iter()
                        .filter(|f| f.frame.abs_diff(k) <= hw && into_key.contains_key(&f.frame))
                        .copied()
                        .collect();
                    if window.is_empty() {
                        return Ok((k, None));
                    }
                    Ok((k, temporal_window_map(k, &window, &into_key, &cfg, w, h).ok()))
                })
                .collect::<Result<_, Error>>()?
        }
        RecipeName::Lbw => {
            let mut first: HashMap<u64, Fixation<f64>> = HashMap::new();
            for f in observers.iter().flatten() {
                first.entry(f.frame).or_insert(*f);
            }
            frames
                .par_iter()
                .map(|&f| match first.get(&f) {
                    Some(fx) => Ok((f, Some(single_fixation_map(fx, cfg.sigma_spatial, cfg.off_frame, w, h)?))),
                    None => Ok((f, None)),
                })
                .collect::<Result<_, Error>>()?
        }
    };
    let mut written = 0;
    for (f, map) in &maps {
        if let Some(map) = map {
            write_saliency_map(map, &a.out_dir.join(map_file_name(*f)))?;
            written += 1;
        }
    }
    if written < maps.len() {
        log::warn!("{}: {} of {} frames had no usable gaze", v.id, maps.len() - written, maps.len());
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> CliResult<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Usage(format!("unknown {what} `{s}`"))))
        .collect()
}

fn eval(a: EvalArgs) -> CliResult<()> {
    let m = load_manifest(&a.manifest)?;
    let cfg = EvalConfig {
        metrics: parse_list::<Metric>(&a.metrics, "metric")?,
        strata: parse_list::<Stratum>(&a.stratify, "stratum")?,
        ..EvalConfig::default()
    };
    if cfg.metrics.is_empty() {
        return Err(CliError::Usage("--metrics is empty".into()));
    }
    let report = stratified_eval(&m, a.pred_dir.as_deref(), a.gt_dir.as_deref(), &cfg)?;
    let is_md = a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("md"));
    let body = if is_md { report.to_markdown() } else { report.to_csv() };
    write_atomic(&a.out, body.as_bytes())?;
    Ok(())
}

type Groups = Vec<(String, Vec<Correspondence<f64>>)>;

fn sd_pairs(corrs: Groups, refs: Groups) -> Vec<FramePair<f64>> {
    let mut refs: HashMap<String, Vec<Correspondence<f64>>> = refs.into_iter().collect();
    corrs
        .into_iter()
        .map(|(id, correspondences)| FramePair {
            references: refs.remove(&id).unwrap_or_default(),
            id,
            correspondences,
        })
        .collect()
}

fn window_samples(corrs: Groups, refs: Groups, path: &Path) -> CliResult<Vec<WindowSample<f64>>> {
    let mut probes: HashMap<String, (f64, f64)> = HashMap::new();
    for (id, r) in refs {
        if let Some(c) = r.first() {
            probes.insert(id, c.src);
        }
    }
    corrs
        .into_iter()
        .map(|(id, correspondences)| {
            let bad = || CliError::Io(format!("{}: pair id `{id}` is not `<key>:<offset>`", path.display()));
            let (key, off) = id.rsplit_once(':').ok_or_else(bad)?;
            let offset: i32 = off.parse().map_err(|_| bad())?;
            let probe = *probes
                .get(&id)
                .ok_or_else(|| CliError::Io(format!("no probe point for `{id}` in the references file")))?;
            Ok(WindowSample {
                key_id: key.to_string(),
                offset,
                correspondences,
                probe,
            })
        })
        .collect()
}

fn homaudit(a: HomauditArgs) -> CliResult<()> {
    let cfg = ProtocolConfig {
        runs: a.runs,
        pairs_per_video: a.pairs,
        scene_width: a.scene_width,
        half_window: a.window,
        seed: a.seed,
        ..ProtocolConfig::default()
    };
    let corrs = read_correspondences_csv(&a.pairs_file)?;
    let refs = read_correspondences_csv(&a.refs_file)?;
    let report = match a.mode {
        HomauditMode::Sd => sd_error_protocol(&sd_pairs(corrs, refs), &cfg)?,
        HomauditMode::Temporal => temporal_window_error(&window_samples(corrs, refs, &a.pairs_file)?, &cfg)?,
    };
    write_atomic(&a.out, report.to_csv().as_bytes())?;
    Ok(())
}

fn context(a: ContextArgs) -> CliResult<()> {
    let m = load_manifest(&a.manifest)?;
    let v = find_video(&m, &a.video)?;
    let osm = match &a.osm {
        Some(p) => p.clone(),
        None => required(v, v.osm.as_ref(), "osm")?.clone(),
    };
    let out = match &a.out {
        Some(p) => p.clone(),
        None => required(v, v.annotations.as_ref(), "annotations")?.clone(),
    };
    if a.radius.is_nan() || a.radius <= 0.0 {
        return Err(CliError::Usage("--radius must be positive".into()));
    }
    let track = read_telemetry_csv(required(v, v.telemetry.as_ref(), "telemetry")?)?;
    let graph = parse_osm_extract(&osm)?;
    let matches = match_route(&track, &graph, a.radius)?;
    let n = video_num_frames(v)?;
    let mut ann = load_or_new(&out, &v.id, n)?;
    let suggestions: Vec<_> = suggested_events(&matches).into_iter().filter(|e| e.crossing_frame < n).collect();
    let tolerance = v.fps.round() as u64;
    ann.events = merge_events(&ann.events, &suggestions, tolerance);
    ann.validate()?;
    ann.write(&out)?;
    log::info!("{}: {} crossings matched", v.id, matches.len());
    Ok(())
}

fn audit(a: AuditArgs) -> CliResult<()> {
    let m = load_manifest(&a.manifest)?;
    let videos: Vec<&VideoEntry> = match &a.video {
        Some(id) => vec![find_video(&m, id)?],
        None => m.videos.iter().collect(),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = a.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Io(e.to_string()))?;
    let cfg = ExposureConfig::default();
    let audits = pool.install(|| {
        videos
            .iter()
            .map(|v| audit_video(v, &cfg))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    write_atomic(&a.out, AuditReport { videos: audits }.to_csv().as_bytes())?;
    Ok(())
}

/// Percentages CSV: one row per reported category, then the excluded frame count.
pub(crate) fn action_table(per_video: &[Vec<ActionLabel>]) -> CliResult<String> {
    let stats = action_statistics(per_video)?;
    let mut out = String::from("action,frames,percent\n");
    for (label, frames, pct) in stats.rows() {
        out.push_str(&format!("{},{frames},{pct:.4}\n", label.as_str()));
    }
    out.push_str(&format!("excluded,{},\n", stats.excluded));
    Ok(out)
}

fn stats(a: StatsArgs) -> CliResult<()> {
    let m = load_manifest(&a.manifest)?;
    let mut labels = Vec::new();
    let mut events = Vec::new();
    for v in &m.videos {
        let path = required(v, v.annotations.as_ref(), "annotations")?;
        let ann = Annotations::read(path)?;
        labels.push(ann.frame_labels()?);
        events.extend(ann.events);
    }
    write_atomic(&a.out, action_table(&labels)?.as_bytes())?;
    if let Some(p) = &a.context_out {
        write_atomic(p, context_statistics(&events).to_csv().as_bytes())?;
    }
    Ok(())
}

fn serve(a: ServeArgs) -> CliResult<()> {
    let config = crate::ServiceConfig {
        bind: a.bind,
        manifest: a.manifest,
        read_only: a.read_only,
        token: std::env::var("GAZEAUDIT_TOKEN").ok().filter(|t| !t.is_empty()),
    };
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    rt.block_on(crate::serve(config))
}

fn synth(a: SynthArgs) -> CliResult<()> {
    let manifest = demo_dataset()?.write(&a.out_dir)?;
    write_demo_correspondences(&a.out_dir.join("homaudit"), a.seed)?;
    println!("{}", manifest.display());
    Ok(())
}
