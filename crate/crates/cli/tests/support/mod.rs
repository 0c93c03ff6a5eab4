#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gazeaudit_core::model::{ActionLabel, LateralAction, Longitudinal};
use gazeaudit_core::synth::{demo_dataset, write_demo_correspondences, DemoDataset, DemoVideo};

pub fn gazeaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gazeaudit"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Writes the demo dataset and correspondence files; returns the manifest path.
pub fn write_demo(root: &Path) -> (DemoDataset, PathBuf) {
    let ds = demo_dataset().unwrap();
    let manifest = ds.write(root).unwrap();
    write_demo_correspondences(&root.join("homaudit"), 7).unwrap();
    (ds, manifest)
}

/// Six-way label of one frame, written out case by case.
pub fn expected_label(lon: Longitudinal, lat: Option<LateralAction>) -> ActionLabel {
    if matches!(lat, Some(LateralAction::UTurn) | Some(LateralAction::Reverse)) {
        return ActionLabel::Excluded;
    }
    if lon == Longitudinal::Stopped {
        return ActionLabel::Stopped;
    }
    match (lat.is_some(), lon) {
        (true, Longitudinal::Maintain) => ActionLabel::Lateral,
        (true, _) => ActionLabel::LatLon,
        (false, Longitudinal::SpeedUp) => ActionLabel::SpeedUp,
        (false, Longitudinal::SlowDown) => ActionLabel::SlowDown,
        (false, _) => ActionLabel::Maintain,
    }
}

pub fn planted_labels(v: &DemoVideo) -> Vec<ActionLabel> {
    (0..v.num_frames())
        .map(|f| {
            let lat = v
                .lateral
                .iter()
                .find(|s| s.start_frame <= f && f <= s.end_frame)
                .map(|s| s.action);
            expected_label(v.drive.truth[f as usize], lat)
        })
        .collect()
}

/// The percentages table the `stats` command must reproduce for the demo dataset.
pub fn expected_action_csv(ds: &DemoDataset) -> String {
    let all: Vec<ActionLabel> = ds.videos.iter().flat_map(planted_labels).collect();
    let excluded = all.iter().filter(|&&l| l == ActionLabel::Excluded).count();
    let included = all.len() - excluded;
    let mut out = String::from("action,frames,percent\n");
    for (name, label) in [
        ("Maintain", ActionLabel::Maintain),
        ("SpeedUp", ActionLabel::SpeedUp),
        ("SlowDown", ActionLabel::SlowDown),
        ("Lateral", ActionLabel::Lateral),
        ("LatLon", ActionLabel::LatLon),
        ("Stopped", ActionLabel::Stopped),
    ] {
        let n = all.iter().filter(|&&l| l == label).count();
        out.push_str(&format!("{name},{n},{:.4}\n", 100.0 * n as f64 / included as f64));
    }
    out.push_str(&format!("excluded,{excluded},\n"));
    out
}

/// Reviewed crossings of the demo dataset, counted by hand from its definition.
pub const EXPECTED_CONTEXT_CSV: &str = "intersection_type,right_of_way,yield,total
unsignalized,1,2,3
signalized,2,1,3
roundabout,1,1,2
highway_ramp,1,0,1
total,5,4,9
";

pub fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}
