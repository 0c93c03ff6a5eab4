use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::homography::{Correspondence, Homography};
use crate::io::write_atomic;
use crate::model::{GazeEvent, GazeSample, TelemetrySample};

pub const TELEMETRY_HEADER: [&str; 6] = ["frame", "t_sec", "speed_kmh", "lat", "lon", "heading_deg"];
pub const GAZE_HEADER: [&str; 4] = ["frame", "x_px", "y_px", "event"];
pub const CORRESPONDENCE_HEADER: [&str; 5] = ["pair_id", "src_x", "src_y", "dst_x", "dst_y"];
pub const HOMOGRAPHY_HEADER: [&str; 10] = ["frame", "h11", "h12", "h13", "h21", "h22", "h23", "h31", "h32", "h33"];

struct Columns {
    index: Vec<usize>,
}

impl Columns {
    fn resolve(path: &Path, headers: &csv::StringRecord, required: &[&str]) -> Result<Self> {
        let by_name: HashMap<&str, usize> =
            headers.iter().enumerate().map(|(i, h)| (h.trim(), i)).collect();
        let index = required
            .iter()
            .map(|name| {
                by_name.get(name).copied().ok_or_else(|| Error::MissingColumn {
                    path: path.to_path_buf(),
                    column: (*name).to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Columns { index })
    }

    fn field<'r>(&self, rec: &'r csv::StringRecord, i: usize) -> &'r str {
        rec.get(self.index[i]).unwrap_or("").trim()
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Row {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

fn row_err(path: &Path, line: u64, message: String) -> Error {
    Error::Row {
        path: path.to_path_buf(),
        line,
        message,
    }
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: u64, col: &str, raw: &str) -> Result<T> {
    raw.parse::<T>()
        .map_err(|_| row_err(path, line, format!("column `{col}`: cannot parse `{raw}`")))
}

/// Empty fields mean "not recorded" and become NaN.
fn parse_optional(path: &Path, line: u64, col: &str, raw: &str) -> Result<f64> {
    if raw.is_empty() {
        Ok(f64::NAN)
    } else {
        parse_num(path, line, col, raw)
    }
}

/// Reads a telemetry CSV. Frames must be strictly increasing; empty `lat`, `lon`
/// or `heading_deg` fields are read as NaN (not recorded).
pub fn read_telemetry_csv(path: &Path) -> Result<Vec<TelemetrySample>> {
    let mut rdr = open_reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = Columns::resolve(path, &headers, &TELEMETRY_HEADER)?;
    let mut out: Vec<TelemetrySample> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let frame: u64 = parse_num(path, line, "frame", cols.field(&rec, 0))?;
        let t_sec: f64 = parse_num(path, line, "t_sec", cols.field(&rec, 1))?;
        let speed_kmh: f64 = parse_num(path, line, "speed_kmh", cols.field(&rec, 2))?;
        let lat = parse_optional(path, line, "lat", cols.field(&rec, 3))?;
        let lon = parse_optional(path, line, "lon", cols.field(&rec, 4))?;
        let heading = parse_optional(path, line, "heading_deg", cols.field(&rec, 5))?;
        if !t_sec.is_finite() || !speed_kmh.is_finite() {
            return Err(row_err(path, line, "non-finite time or speed".into()));
        }
        if !lat.is_nan() && !(-90.0..=90.0).contains(&lat) {
            return Err(row_err(path, line, format!("lat {lat} outside [-90, 90]")));
        }
        if !lon.is_nan() && !(-180.0..=180.0).contains(&lon) {
            return Err(row_err(path, line, format!("lon {lon} outside [-180, 180]")));
        }
        if let Some(prev) = out.last() {
            if frame <= prev.frame {
                return Err(Error::NonMonotoneFrames {
                    path: path.to_path_buf(),
                    line,
                    frame,
                    previous: prev.frame,
                });
            }
        }
        out.push(TelemetrySample {
            frame,
            t_sec,
            speed_kmh,
            lat,
            lon,
            heading_deg: if heading.is_nan() { heading } else { heading.rem_euclid(360.0) },
        });
    }
    Ok(out)
}

fn fmt_opt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

pub fn write_telemetry_csv(path: &Path, samples: &[TelemetrySample]) -> Result<()> {
    let mut out = TELEMETRY_HEADER.join(",");
    out.push('\n');
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.frame,
            s.t_sec,
            s.speed_kmh,
            fmt_opt(s.lat),
            fmt_opt(s.lon),
            fmt_opt(s.heading_deg)
        ));
    }
    write_atomic(path, out.as_bytes())
}

/// Reads a gaze CSV; samples come back stably sorted by frame. Empty coordinates
/// (e.g. during blinks) are read as NaN.
pub fn read_gaze_csv(path: &Path) -> Result<Vec<GazeSample>> {
    let mut rdr = open_reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = Columns::resolve(path, &headers, &GAZE_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let frame: u64 = parse_num(path, line, "frame", cols.field(&rec, 0))?;
        let x = parse_optional(path, line, "x_px", cols.field(&rec, 1))?;
        let y = parse_optional(path, line, "y_px", cols.field(&rec, 2))?;
        let raw_event = cols.field(&rec, 3);
        let event: GazeEvent = raw_event
            .parse()
            .map_err(|_| row_err(path, line, format!("unknown event `{raw_event}`")))?;
        out.push(GazeSample { frame, x, y, event });
    }
    out.sort_by_key(|s| s.frame);
    Ok(out)
}

/// Gaze streams per observer. A file is a single observer; a directory holds one
/// CSV per observer, read in file-name order.
pub fn read_gaze_observers(path: &Path) -> Result<Vec<Vec<GazeSample>>> {
    if !path.is_dir() {
        return Ok(vec![read_gaze_csv(path)?]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let p = entry.map_err(|e| Error::io(path, e))?.path();
        if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            files.push(p);
        }
    }
    if files.is_empty() {
        return Err(Error::Empty(format!("{}: no gaze CSV files", path.display())));
    }
    files.sort();
    files.iter().map(|p| read_gaze_csv(p)).collect()
}

pub fn write_gaze_csv(path: &Path, samples: &[GazeSample]) -> Result<()> {
    let mut out = GAZE_HEADER.join(",");
    out.push('\n');
    for s in samples {
        out.push_str(&format!("{},{},{},{}\n", s.frame, fmt_opt(s.x), fmt_opt(s.y), s.event));
    }
    write_atomic(path, out.as_bytes())
}

/// Correspondences grouped by `pair_id`, groups in order of first appearance.
pub fn read_correspondences_csv(path: &Path) -> Result<Vec<(String, Vec<Correspondence<f64>>)>> {
    let mut rdr = open_reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = Columns::resolve(path, &headers, &CORRESPONDENCE_HEADER)?;
    let mut groups: Vec<(String, Vec<Correspondence<f64>>)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let id = cols.field(&rec, 0);
        if id.is_empty() {
            return Err(row_err(path, line, "empty pair_id".into()));
        }
        let mut v = [0.0; 4];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = parse_num(path, line, CORRESPONDENCE_HEADER[k + 1], cols.field(&rec, k + 1))?;
        }
        let c = Correspondence::new((v[0], v[1]), (v[2], v[3]));
        if !c.is_finite() {
            return Err(row_err(path, line, "non-finite coordinate".into()));
        }
        let i = *index.entry(id.to_string()).or_insert_with(|| {
            groups.push((id.to_string(), Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(c);
    }
    Ok(groups)
}

pub fn write_correspondences_csv(path: &Path, groups: &[(String, Vec<Correspondence<f64>>)]) -> Result<()> {
    let mut out = CORRESPONDENCE_HEADER.join(",");
    out.push('\n');
    for (id, corrs) in groups {
        for c in corrs {
            out.push_str(&format!("{id},{},{},{},{}\n", c.src.0, c.src.1, c.dst.0, c.dst.1));
        }
    }
    write_atomic(path, out.as_bytes())
}

/// Per-frame homographies, one row-major 3x3 matrix per row.
pub fn read_homographies_csv(path: &Path) -> Result<BTreeMap<u64, Homography<f64>>> {
    let mut rdr = open_reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = Columns::resolve(path, &headers, &HOMOGRAPHY_HEADER)?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let frame: u64 = parse_num(path, line, "frame", cols.field(&rec, 0))?;
        let mut m = [[0.0; 3]; 3];
        for k in 0..9 {
            m[k / 3][k % 3] = parse_num(path, line, HOMOGRAPHY_HEADER[k + 1], cols.field(&rec, k + 1))?;
        }
        let h = Homography::from_rows(m).map_err(|e| row_err(path, line, e.to_string()))?;
        if out.insert(frame, h).is_some() {
            return Err(row_err(path, line, format!("duplicate frame {frame}")));
        }
    }
    Ok(out)
}

pub fn write_homographies_csv(path: &Path, hs: &BTreeMap<u64, Homography<f64>>) -> Result<()> {
    let mut out = HOMOGRAPHY_HEADER.join(",");
    out.push('\n');
    for (f, h) in hs {
        let vals: Vec<String> = h.rows().iter().flatten().map(f64::to_string).collect();
        out.push_str(&format!("{f},{}\n", vals.join(",")));
    }
    write_atomic(path, out.as_bytes())
}
