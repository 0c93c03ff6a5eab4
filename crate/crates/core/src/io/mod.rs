//! File formats: telemetry and gaze CSV, SMAP/PNG saliency maps, manifests and annotation documents.

mod annotations;
mod manifest;
mod smap;
mod tables;

use std::io::Write;
use std::path::Path;

pub use annotations::{
    Annotations, CategorySpan, LateralSpan, LongitudinalSpan, ANNOTATIONS_SCHEMA_VERSION,
};
pub use manifest::{load_manifest, DatasetManifest, VideoEntry};
pub use smap::{
    decode_smap, encode_smap, list_map_files, map_file_name, read_saliency_map, write_saliency_map,
    SMAP_MAGIC,
};
pub use tables::{
    read_correspondences_csv, read_gaze_csv, read_gaze_observers, read_homographies_csv, read_telemetry_csv,
    write_correspondences_csv, write_gaze_csv, write_homographies_csv, write_telemetry_csv, CORRESPONDENCE_HEADER,
    GAZE_HEADER, HOMOGRAPHY_HEADER, TELEMETRY_HEADER,
};

use crate::error::{Error, Result};

/// Writes `bytes` to `path` through a temporary file in the same directory and a rename,
/// so readers never observe a truncated file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".gazeaudit-")
        .tempfile_in(dir)
        .map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}
