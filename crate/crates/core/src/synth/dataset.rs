use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::drive::{east_of, north_of, planted_drive, Phase, PlantedDrive};
use crate::error::{Error, Result};
use crate::homography::Homography;
use crate::io::{
    write_atomic, write_gaze_csv, write_homographies_csv, write_saliency_map, write_telemetry_csv, Annotations,
    LateralSpan,
};
use crate::map::SaliencyMap;
use crate::model::{ContextEvent, Fixation, GazeEvent, GazeSample, IntersectionType, LateralAction, Priority};
use crate::salmap::{multi_observer_response, RecipeConfig};

/// Street feature planted on the route of a demo video.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Junction {
    /// Four-way crossing whose junction node carries the signal tag.
    Signalized,
    /// T-junction with the signal tag on the approach node just before it.
    SignalOnApproach,
    Unsignalized,
    Roundabout,
    Ramp,
    /// A footway crossing; not a junction for motor traffic.
    Footway,
}

impl Junction {
    pub fn intersection_type(self) -> Option<IntersectionType> {
        match self {
            Junction::Signalized | Junction::SignalOnApproach => Some(IntersectionType::Signalized),
            Junction::Unsignalized => Some(IntersectionType::Unsignalized),
            Junction::Roundabout => Some(IntersectionType::Roundabout),
            Junction::Ramp => Some(IntersectionType::HighwayRamp),
            Junction::Footway => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DemoVideo {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub origin: (f64, f64),
    pub drive: PlantedDrive,
    pub lateral: Vec<LateralSpan>,
    /// Reviewed crossings, as a human would confirm them.
    pub events: Vec<ContextEvent>,
    /// Features on the route, by the frame at which the vehicle passes them.
    pub junctions: Vec<(u64, Junction)>,
    /// Frames whose image is absent.
    pub missing_frames: Vec<u64>,
    pub overexposed: Vec<u64>,
    pub underexposed: Vec<u64>,
    pub observers: usize,
    pub gaze_seed: u64,
}

/// Two short drives at 5 fps with planted speed profiles, lateral actions, crossings,
/// frame gaps, exposure faults and gaze.
#[derive(Debug, Clone)]
pub struct DemoDataset {
    pub dataset_id: String,
    pub videos: Vec<DemoVideo>,
}

pub const DEMO_FPS: f64 = 5.0;
/// Every tenth frame carries a ground-truth and a predicted map.
pub const DEMO_MAP_STRIDE: u64 = 10;
/// Spatial kernel for the demo maps, scaled to the 160 px frame width.
pub const DEMO_SIGMA_PX: f64 = 6.0;

/// Gaze samples per observer and frame. Sample `k` of frame `f` gets class
/// `GAZE_CYCLE[(4f + k) % 20]`, so each class share is exact over any multiple of 5 frames.
pub const GAZE_PER_FRAME: usize = 4;
const GAZE_CYCLE: [GazeEvent; 20] = {
    let mut c = [GazeEvent::Fixation; 20];
    c[3] = GazeEvent::Saccade;
    c[7] = GazeEvent::Blink;
    c[11] = GazeEvent::InVehicle;
    c[17] = GazeEvent::Offscreen;
    c
};

fn lat(start: u64, end: u64, action: LateralAction) -> LateralSpan {
    LateralSpan {
        start_frame: start,
        end_frame: end,
        action,
    }
}

fn event(frame: u64, t: IntersectionType, p: Priority, onset: Option<u64>) -> ContextEvent {
    ContextEvent {
        crossing_frame: frame,
        intersection_type: t,
        priority: Some(p),
        yield_onset_frame: onset,
    }
}

fn range(a: u64, b: u64) -> Vec<u64> {
    (a..=b).collect()
}

pub fn demo_dataset() -> Result<DemoDataset> {
    use IntersectionType::*;
    use LateralAction::*;
    use Phase::*;
    use Priority::*;

    let stop_run = DEMO_FPS.round() as usize;
    let a = planted_drive(
        DEMO_FPS,
        0.0,
        &[
            Hold { frames: 30 },
            Ramp { target_ms: 8.0, frames: 10 },
            Hold { frames: 40 },
            Ramp { target_ms: 12.2, frames: 6 },
            Hold { frames: 40 },
            Ramp { target_ms: 14.0, frames: 30 },
            Hold { frames: 30 },
            Ramp { target_ms: 9.0, frames: 8 },
            Ramp { target_ms: 5.0, frames: 8 },
            Ramp { target_ms: 0.0, frames: 10 },
            Hold { frames: 40 },
            Ramp { target_ms: 9.6, frames: 12 },
            Hold { frames: 40 },
            Ramp { target_ms: 4.0, frames: 8 },
            Hold { frames: 30 },
            Ramp { target_ms: 0.0, frames: 8 },
            Hold { frames: 30 },
        ],
        0.4,
        1.0,
        stop_run,
    )?;
    let b = planted_drive(
        DEMO_FPS,
        10.0,
        &[
            Hold { frames: 40 },
            Ramp { target_ms: 6.0, frames: 5 },
            Hold { frames: 40 },
            Ramp { target_ms: 0.0, frames: 12 },
            Hold { frames: 30 },
            Ramp { target_ms: 8.0, frames: 10 },
            Hold { frames: 50 },
            Ramp { target_ms: 13.6, frames: 8 },
            Hold { frames: 50 },
            Ramp { target_ms: 12.5, frames: 25 },
            Hold { frames: 30 },
        ],
        0.4,
        1.0,
        stop_run,
    )?;

    let video_a = DemoVideo {
        id: "drive_a".into(),
        width: 160,
        height: 90,
        origin: (48.0, 11.0),
        drive: a,
        lateral: vec![
            lat(56, 66, Turn),
            lat(160, 170, LaneChange),
            lat(188, 198, Turn),
            lat(220, 230, Turn),
            lat(290, 300, UTurn),
            lat(316, 326, Turn),
        ],
        events: vec![
            event(60, Signalized, RightOfWay, None),
            event(100, Signalized, Yield, Some(90)),
            event(140, Unsignalized, Yield, Some(130)),
            event(280, Roundabout, Yield, Some(270)),
            event(320, HighwayRamp, RightOfWay, None),
        ],
        junctions: vec![
            (60, Junction::Signalized),
            (100, Junction::SignalOnApproach),
            (140, Junction::Unsignalized),
            (170, Junction::Footway),
            (280, Junction::Roundabout),
            (320, Junction::Ramp),
        ],
        missing_frames: [range(100, 119), range(250, 254)].concat(),
        overexposed: range(10, 14),
        underexposed: range(360, 364),
        observers: 1,
        gaze_seed: 11,
    };
    let video_b = DemoVideo {
        id: "drive_b".into(),
        width: 160,
        height: 90,
        origin: (48.1, 11.2),
        drive: b,
        lateral: vec![
            lat(10, 20, LaneChange),
            lat(38, 48, Turn),
            lat(110, 115, Reverse),
            lat(158, 168, Turn),
        ],
        events: vec![
            event(20, Roundabout, RightOfWay, None),
            event(60, Unsignalized, Yield, Some(45)),
            event(160, Signalized, RightOfWay, None),
            event(220, Unsignalized, RightOfWay, None),
        ],
        junctions: vec![
            (20, Junction::Roundabout),
            (60, Junction::Unsignalized),
            (160, Junction::Signalized),
            (220, Junction::Unsignalized),
            (285, Junction::Unsignalized),
        ],
        missing_frames: [range(0, 4), range(200, 229)].concat(),
        overexposed: vec![150],
        underexposed: Vec::new(),
        observers: 2,
        gaze_seed: 23,
    };
    Ok(DemoDataset {
        dataset_id: "demo".into(),
        videos: vec![video_a, video_b],
    })
}

/// Paths of a written demo video, relative to the dataset root.
pub struct DemoLayout;

impl DemoLayout {
    pub fn telemetry(id: &str) -> PathBuf {
        Path::new(id).join("telemetry.csv")
    }
    pub fn gaze(id: &str, observers: usize) -> PathBuf {
        if observers > 1 {
            Path::new(id).join("gaze")
        } else {
            Path::new(id).join("gaze.csv")
        }
    }
    pub fn frames(id: &str) -> PathBuf {
        Path::new(id).join("frames")
    }
    pub fn annotations(id: &str) -> PathBuf {
        Path::new(id).join("annotations.json")
    }
    pub fn ground_truth(id: &str) -> PathBuf {
        Path::new(id).join("gt")
    }
    pub fn predictions(id: &str) -> PathBuf {
        Path::new(id).join("pred")
    }
    pub fn osm(id: &str) -> PathBuf {
        Path::new(id).join("map.osm")
    }
    /// Per-frame homographies into frame 0, CSV `frame,h11,...,h33`.
    pub fn homographies(id: &str) -> PathBuf {
        Path::new(id).join("homographies.csv")
    }
}

impl DemoVideo {
    pub fn num_frames(&self) -> u64 {
        self.drive.len() as u64
    }

    /// Scene point the driver looks at in `frame`.
    fn gaze_target(&self, frame: u64, observer: usize) -> (f64, f64) {
        let t = frame as f64;
        let w = self.width as f64;
        let h = self.height as f64;
        (
            w / 2.0 + 0.25 * w * (t / 15.0).sin() + 5.0 * observer as f64,
            h / 2.0 + 0.15 * h * (t / 20.0).cos(),
        )
    }

    pub fn gaze_samples(&self, observer: usize) -> Vec<GazeSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.gaze_seed + observer as u64);
        let mut out = Vec::with_capacity(self.drive.len() * GAZE_PER_FRAME);
        for f in 0..self.num_frames() {
            let (cx, cy) = self.gaze_target(f, observer);
            for k in 0..GAZE_PER_FRAME {
                let event = GAZE_CYCLE[(f as usize * GAZE_PER_FRAME + k) % GAZE_CYCLE.len()];
                let jx: f64 = rng.random_range(-2.0..2.0);
                let jy: f64 = rng.random_range(-2.0..2.0);
                let (x, y) = match event {
                    GazeEvent::Fixation => (cx + jx, cy + jy),
                    GazeEvent::Saccade => (cx + 20.0 + jx, cy + jy),
                    GazeEvent::Blink => (f64::NAN, f64::NAN),
                    GazeEvent::InVehicle => (cx + jx, self.height as f64 + 30.0),
                    GazeEvent::Offscreen => (-40.0, cy + jy),
                };
                out.push(GazeSample { frame: f, x, y, event });
            }
        }
        out
    }

    /// Frames carrying maps: every tenth frame.
    pub fn map_frames(&self) -> Vec<u64> {
        (0..self.num_frames()).step_by(DEMO_MAP_STRIDE as usize).collect()
    }

    fn fixations(&self) -> Vec<Vec<Fixation<f64>>> {
        (0..self.observers)
            .map(|o| {
                self.gaze_samples(o)
                    .into_iter()
                    .filter(|s| s.event == GazeEvent::Fixation)
                    .map(|s| Fixation::new(s.frame, s.x, s.y))
                    .collect()
            })
            .collect()
    }

    /// Horizontal camera pan of 0.5 px per frame: frame `f` maps into frame 0 by a
    /// translation of `f / 2` px.
    pub fn homography_to_first(&self, frame: u64) -> Homography<f64> {
        Homography::translation(frame as f64 / 2.0, 0.0)
    }

    fn frame_image(&self, frame: u64) -> image::GrayImage {
        let (w, h) = (self.width, self.height);
        if self.overexposed.contains(&frame) {
            image::GrayImage::from_fn(w, h, |x, _| image::Luma([if x < w * 3 / 4 { 255 } else { 200 }]))
        } else if self.underexposed.contains(&frame) {
            image::GrayImage::from_fn(w, h, |x, y| image::Luma([((x + y) % 10) as u8]))
        } else {
            image::GrayImage::from_fn(w, h, |x, y| {
                image::Luma([(60 + (x + 2 * y + frame as u32) % 120) as u8])
            })
        }
    }

    /// Hand-label document: lateral spans and reviewed crossings, no speed labels yet.
    pub fn hand_annotations(&self) -> Annotations {
        let mut a = Annotations::new(self.id.clone(), self.num_frames());
        a.lateral = self.lateral.clone();
        a.events = self.events.clone();
        a
    }

    pub fn osm_xml(&self) -> String {
        OsmBuilder::for_video(self).finish()
    }
}

struct OsmBuilder {
    next_node: i64,
    next_way: i64,
    nodes: String,
    ways: String,
}

impl OsmBuilder {
    fn new() -> Self {
        OsmBuilder {
            next_node: 1,
            next_way: 1,
            nodes: String::new(),
            ways: String::new(),
        }
    }

    fn node(&mut self, p: (f64, f64), tags: &[(&str, &str)]) -> i64 {
        let id = self.next_node;
        self.next_node += 1;
        if tags.is_empty() {
            let _ = writeln!(self.nodes, r#"  <node id="{id}" lat="{}" lon="{}"/>"#, p.0, p.1);
        } else {
            let _ = writeln!(self.nodes, r#"  <node id="{id}" lat="{}" lon="{}">"#, p.0, p.1);
            for (k, v) in tags {
                let _ = writeln!(self.nodes, r#"    <tag k="{k}" v="{v}"/>"#);
            }
            self.nodes.push_str("  </node>\n");
        }
        id
    }

    fn way(&mut self, nodes: &[i64], tags: &[(&str, &str)]) {
        let id = self.next_way;
        self.next_way += 1;
        let _ = writeln!(self.ways, r#"  <way id="{id}">"#);
        for n in nodes {
            let _ = writeln!(self.ways, r#"    <nd ref="{n}"/>"#);
        }
        for (k, v) in tags {
            let _ = writeln!(self.ways, r#"    <tag k="{k}" v="{v}"/>"#);
        }
        self.ways.push_str("  </way>\n");
    }

    fn for_video(v: &DemoVideo) -> Self {
        const RING_RADIUS_M: f64 = 12.0;
        let mut b = OsmBuilder::new();
        let main = [("highway", "primary")];
        let at = |f: u64| north_of(v.origin, v.drive.distance_at(f as usize));
        let mut road = vec![b.node(north_of(v.origin, -50.0), &[])];
        for &(frame, kind) in &v.junctions {
            let p = at(frame);
            match kind {
                Junction::Signalized => {
                    let j = b.node(p, &[("highway", "traffic_signals")]);
                    road.push(j);
                    let w = b.node(east_of(p, -60.0), &[]);
                    let e = b.node(east_of(p, 60.0), &[]);
                    b.way(&[w, j, e], &[("highway", "residential")]);
                }
                Junction::SignalOnApproach => {
                    road.push(b.node(north_of(p, -8.0), &[("highway", "traffic_signals")]));
                    let j = b.node(p, &[]);
                    road.push(j);
                    let e = b.node(east_of(p, 60.0), &[]);
                    b.way(&[j, e], &[("highway", "tertiary")]);
                }
                Junction::Unsignalized => {
                    let j = b.node(p, &[]);
                    road.push(j);
                    let w = b.node(east_of(p, -60.0), &[]);
                    b.way(&[j, w], &[("highway", "residential")]);
                }
                Junction::Footway => {
                    let j = b.node(p, &[]);
                    road.push(j);
                    let w = b.node(east_of(p, -20.0), &[]);
                    let e = b.node(east_of(p, 20.0), &[]);
                    b.way(&[w, j, e], &[("highway", "footway")]);
                }
                Junction::Ramp => {
                    let j = b.node(p, &[]);
                    road.push(j);
                    let e = b.node(north_of(east_of(p, 60.0), 40.0), &[]);
                    b.way(&[j, e], &[("highway", "motorway_link")]);
                }
                Junction::Roundabout => {
                    // Hexagonal ring centred on the route; the road meets it at the
                    // south and north vertices.
                    let ring: Vec<i64> = (0..6)
                        .map(|k| {
                            let a = (270.0 + 60.0 * k as f64).to_radians();
                            let q = east_of(north_of(p, RING_RADIUS_M * a.sin()), RING_RADIUS_M * a.cos());
                            b.node(q, &[])
                        })
                        .collect();
                    road.push(ring[0]);
                    b.way(&road, &main);
                    road = vec![ring[3]];
                    let mut closed = ring.clone();
                    closed.push(ring[0]);
                    b.way(&closed, &[("highway", "primary"), ("junction", "roundabout")]);
                    let w = b.node(east_of(p, -60.0), &[]);
                    b.way(&[ring[4], w], &[("highway", "residential")]);
                }
            }
        }
        let end = v.drive.distance_at(v.drive.len() - 1) + 50.0;
        road.push(b.node(north_of(v.origin, end), &[]));
        b.way(&road, &main);
        b
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"gazeaudit-synth\">\n{}{}</osm>\n",
            self.nodes, self.ways
        )
    }
}

fn centre_prior(width: usize, height: usize) -> Result<SaliencyMap<f64>> {
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    let s = width as f64 / 6.0;
    SaliencyMap::from_fn(width, height, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        (-(dx * dx + dy * dy) / (2.0 * s * s)).exp()
    })
}

fn png_bytes(img: &image::GrayImage, path: &Path) -> Result<Vec<u8>> {
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(buf.into_inner())
}

fn mkdir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

impl DemoDataset {
    pub fn video(&self, id: &str) -> Option<&DemoVideo> {
        self.videos.iter().find(|v| v.id == id)
    }

    /// Writes the dataset under `root` and returns the manifest path.
    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        mkdir(root)?;
        let mut entries = Vec::new();
        for v in &self.videos {
            self.write_video(root, v)?;
            let rel = |p: PathBuf| serde_json::Value::String(p.to_string_lossy().into_owned());
            entries.push(serde_json::json!({
                "id": v.id,
                "fps": DEMO_FPS,
                "width": v.width,
                "height": v.height,
                "num_frames": v.num_frames(),
                "telemetry": rel(DemoLayout::telemetry(&v.id)),
                "gaze": rel(DemoLayout::gaze(&v.id, v.observers)),
                "frames": rel(DemoLayout::frames(&v.id)),
                "annotations": rel(DemoLayout::annotations(&v.id)),
                "predictions": rel(DemoLayout::predictions(&v.id)),
                "ground_truth": rel(DemoLayout::ground_truth(&v.id)),
                "osm": rel(DemoLayout::osm(&v.id)),
            }));
        }
        let manifest = serde_json::json!({ "dataset_id": self.dataset_id, "videos": entries });
        let path = root.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        Ok(path)
    }

    fn write_video(&self, root: &Path, v: &DemoVideo) -> Result<()> {
        let id = &v.id;
        mkdir(&root.join(id))?;
        write_telemetry_csv(&root.join(DemoLayout::telemetry(id)), &v.drive.telemetry(v.origin))?;

        let gaze = root.join(DemoLayout::gaze(id, v.observers));
        if v.observers > 1 {
            mkdir(&gaze)?;
            for o in 0..v.observers {
                write_gaze_csv(&gaze.join(format!("observer_{o}.csv")), &v.gaze_samples(o))?;
            }
        } else {
            write_gaze_csv(&gaze, &v.gaze_samples(0))?;
        }

        let frames = root.join(DemoLayout::frames(id));
        mkdir(&frames)?;
        for f in (0..v.num_frames()).filter(|f| !v.missing_frames.contains(f)) {
            let p = frames.join(format!("{f:06}.png"));
            write_atomic(&p, &png_bytes(&v.frame_image(f), &p)?)?;
        }

        v.hand_annotations().write(&root.join(DemoLayout::annotations(id)))?;
        write_atomic(&root.join(DemoLayout::osm(id)), v.osm_xml().as_bytes())?;

        let hs: BTreeMap<u64, Homography<f64>> = (0..v.num_frames()).map(|f| (f, v.homography_to_first(f))).collect();
        write_homographies_csv(&root.join(DemoLayout::homographies(id)), &hs)?;

        let (w, h) = (v.width as usize, v.height as usize);
        let gt_dir = root.join(DemoLayout::ground_truth(id));
        let pred_dir = root.join(DemoLayout::predictions(id));
        mkdir(&gt_dir)?;
        mkdir(&pred_dir)?;
        let cfg = RecipeConfig {
            sigma_spatial: DEMO_SIGMA_PX,
            ..RecipeConfig::multi_observer()
        };
        let fixations = v.fixations();
        let prior = centre_prior(w, h)?.normalized()?;
        let mut rng = ChaCha8Rng::seed_from_u64(v.gaze_seed ^ 0x5eed);
        let mut maps = BTreeMap::new();
        for f in v.map_frames() {
            let gt = multi_observer_response(&fixations, f, &cfg, w, h)?.normalized()?;
            let noisy: Vec<f64> = gt
                .values()
                .iter()
                .zip(prior.values())
                .map(|(g, c)| 0.4 * g + 0.6 * c + rng.random_range(0.0..1e-4))
                .collect();
            let pred = SaliencyMap::new(w, h, noisy)?.normalized()?;
            maps.insert(f, (gt, pred));
        }
        for (f, (gt, pred)) in maps {
            write_saliency_map(&gt, &gt_dir.join(crate::io::map_file_name(f)))?;
            write_saliency_map(&pred, &pred_dir.join(crate::io::map_file_name(f)))?;
        }
        Ok(())
    }
}
