use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_file;

/// One video of a dataset. Paths are resolved against the manifest's directory at load time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoEntry {
    pub id: String,
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    /// Declared frame count; when absent it is inferred from telemetry or annotations.
    #[serde(default)]
    pub num_frames: Option<u64>,
    #[serde(default)]
    pub telemetry: Option<PathBuf>,
    /// Gaze CSV, or a directory with one CSV per observer.
    #[serde(default)]
    pub gaze: Option<PathBuf>,
    /// Directory of numbered frame images.
    #[serde(default)]
    pub frames: Option<PathBuf>,
    /// Annotation document; may not exist yet (it is produced by `segment` / `context`).
    #[serde(default)]
    pub annotations: Option<PathBuf>,
    #[serde(default)]
    pub predictions: Option<PathBuf>,
    #[serde(default)]
    pub ground_truth: Option<PathBuf>,
    /// Street-network extract covering the route.
    #[serde(default)]
    pub osm: Option<PathBuf>,
}

impl VideoEntry {
    pub fn image_size(&self) -> (usize, usize) {
        (self.width as usize, self.height as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub dataset_id: String,
    pub videos: Vec<VideoEntry>,
    /// Directory the manifest was loaded from.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn video(&self, id: &str) -> Option<&VideoEntry> {
        self.videos.iter().find(|v| v.id == id)
    }

    fn validate_and_resolve(&mut self, path: &Path) -> Result<()> {
        if self.dataset_id.trim().is_empty() {
            return Err(Error::schema(path, "dataset_id", "must not be empty"));
        }
        let mut seen = HashSet::new();
        let base = self.base_dir.clone();
        for (i, v) in self.videos.iter_mut().enumerate() {
            let field = |name: &str| format!("videos[{i}].{name}");
            if v.id.trim().is_empty() {
                return Err(Error::schema(path, field("id"), "must not be empty"));
            }
            if !seen.insert(v.id.clone()) {
                return Err(Error::schema(path, field("id"), format!("duplicate video id `{}`", v.id)));
            }
            if !(v.fps.is_finite() && v.fps > 0.0) {
                return Err(Error::schema(path, field("fps"), format!("must be > 0, got {}", v.fps)));
            }
            if v.width == 0 || v.height == 0 {
                return Err(Error::schema(path, field("width"), "image size must be non-zero"));
            }
            if v.num_frames == Some(0) {
                return Err(Error::schema(path, field("num_frames"), "must be > 0"));
            }
            let resolve = |p: &mut Option<PathBuf>| {
                if let Some(rel) = p.as_mut() {
                    if rel.is_relative() {
                        *rel = base.join(&*rel);
                    }
                }
            };
            for (name, slot, is_dir) in [
                ("telemetry", &mut v.telemetry, Some(false)),
                ("gaze", &mut v.gaze, None),
                ("osm", &mut v.osm, Some(false)),
                ("frames", &mut v.frames, Some(true)),
                ("predictions", &mut v.predictions, Some(true)),
                ("ground_truth", &mut v.ground_truth, Some(true)),
            ] {
                resolve(slot);
                if let Some(p) = slot {
                    let ok = match is_dir {
                        Some(true) => p.is_dir(),
                        Some(false) => p.is_file(),
                        None => p.exists(),
                    };
                    if !ok {
                        return Err(Error::DanglingReference {
                            field: field(name),
                            path: p.clone(),
                        });
                    }
                }
            }
            resolve(&mut v.annotations);
            if let Some(p) = &v.annotations {
                let parent = p.parent().unwrap_or(Path::new("."));
                if !parent.as_os_str().is_empty() && !parent.is_dir() {
                    return Err(Error::DanglingReference {
                        field: field("annotations"),
                        path: p.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Loads and fully validates a JSON dataset manifest. Any violation yields an error;
/// a partially valid manifest is never returned.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let bytes = read_file(path)?;
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    let mut manifest: DatasetManifest = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Error::schema(path, field, e.into_inner().to_string())
    })?;
    manifest.base_dir = path
        .parent()
        .map(Path::to_path_buf)
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."));
    manifest.validate_and_resolve(path)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("manifest.json");
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn minimal_manifest_loads() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("t.csv"), "").unwrap();
        let p = write(
            dir.path(),
            r#"{"dataset_id":"dreyeve","videos":[{"id":"01","fps":25,"width":1920,"height":1080,"telemetry":"t.csv"}]}"#,
        );
        let m = load_manifest(&p).unwrap();
        assert_eq!(m.videos.len(), 1);
        let v = &m.videos[0];
        assert_eq!((v.fps, v.image_size()), (25.0, (1920, 1080)));
        assert_eq!(v.telemetry.as_deref(), Some(dir.path().join("t.csv").as_path()));
    }

    #[test]
    fn empty_video_list_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), r#"{"dataset_id":"x","videos":[]}"#);
        assert!(load_manifest(&p).unwrap().videos.is_empty());
    }

    #[test]
    fn absent_telemetry_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            r#"{"dataset_id":"x","videos":[{"id":"a","fps":25,"width":4,"height":4,"telemetry":"nope.csv"}]}"#,
        );
        let err = load_manifest(&p).unwrap_err();
        assert!(err.to_string().contains("nope.csv"), "{err}");
        assert!(matches!(err, Error::DanglingReference { ref field, .. } if field == "videos[0].telemetry"));
    }

    #[test]
    fn schema_violations_name_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), r#"{"dataset_id":"x","videos":[{"id":"a","width":4,"height":4}]}"#);
        let err = load_manifest(&p).unwrap_err().to_string();
        assert!(err.contains("fps"), "{err}");

        let p = write(dir.path(), r#"{"dataset_id":"x","videos":[{"id":"a","fps":"fast","width":4,"height":4}]}"#);
        let err = load_manifest(&p).unwrap_err().to_string();
        assert!(err.contains("videos[0].fps"), "{err}");

        let p = write(dir.path(), r#"{"dataset_id":"x","videos":[{"id":"a","fps":0,"width":4,"height":4}]}"#);
        assert!(load_manifest(&p).unwrap_err().to_string().contains("videos[0].fps"));

        let p = write(
            dir.path(),
            r#"{"dataset_id":"x","videos":[{"id":"a","fps":25,"width":4,"height":4},{"id":"a","fps":25,"width":4,"height":4}]}"#,
        );
        assert!(load_manifest(&p).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn missing_manifest_file() {
        assert!(matches!(
            load_manifest(Path::new("/definitely/not/here.json")),
            Err(Error::Io { .. })
        ));
    }
}
