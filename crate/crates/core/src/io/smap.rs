//! `SMAP` dense float maps and grayscale PNG import.
//!
//! Layout: magic `SMAP`, width `u32` LE, height `u32` LE, reserved `u32` LE (= 0),
//! then `width * height` `f32` LE values in row-major order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::DynamicImage;

use crate::error::{Error, Result};
use crate::io::{read_file, write_atomic};
use crate::map::SaliencyMap;
use crate::scalar::Scalar;

pub const SMAP_MAGIC: &[u8; 4] = b"SMAP";
const HEADER_LEN: usize = 16;
const PNG_SIGNATURE: &[u8; 8] = b"\x89PNG\r\n\x1a\n";

pub fn encode_smap<T: Scalar>(map: &SaliencyMap<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * map.len());
    out.extend_from_slice(SMAP_MAGIC);
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in map.values() {
        out.extend_from_slice(&(v.to_f64_lossy() as f32).to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

pub fn decode_smap<T: Scalar>(bytes: &[u8]) -> Result<SaliencyMap<T>> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != SMAP_MAGIC {
        return Err(Error::MapFormat("header mismatch: missing SMAP magic".into()));
    }
    let width = read_u32(bytes, 4) as usize;
    let height = read_u32(bytes, 8) as usize;
    let reserved = read_u32(bytes, 12);
    if reserved != 0 {
        return Err(Error::MapFormat(format!(
            "header mismatch: reserved field is {reserved}, expected 0"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::MapFormat(format!("zero-size map {width}x{height}")));
    }
    let payload = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::MapFormat(format!("size overflow {width}x{height}")))?;
    if bytes.len() - HEADER_LEN != payload {
        return Err(Error::MapFormat(format!(
            "size mismatch: {width}x{height} needs {payload} payload bytes, found {}",
            bytes.len() - HEADER_LEN
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| T::lit(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
        .collect();
    SaliencyMap::new(width, height, values)
}

/// Imports an 8- or 16-bit grayscale PNG, rescaling by the image maximum so values lie in `[0, 1]`.
/// An all-zero image stays all zero.
fn decode_png<T: Scalar>(path: &Path, bytes: &[u8]) -> Result<SaliencyMap<T>> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(|e| {
        Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    })?;
    let (width, height, raw): (usize, usize, Vec<f64>) = match img {
        DynamicImage::ImageLuma8(buf) => (
            buf.width() as usize,
            buf.height() as usize,
            buf.into_raw().into_iter().map(f64::from).collect(),
        ),
        DynamicImage::ImageLuma16(buf) => (
            buf.width() as usize,
            buf.height() as usize,
            buf.into_raw().into_iter().map(f64::from).collect(),
        ),
        other => {
            return Err(Error::Image {
                path: path.to_path_buf(),
                message: format!("expected 8/16-bit grayscale PNG, found {:?}", other.color()),
            })
        }
    };
    let peak = raw.iter().copied().fold(0.0, f64::max);
    let values = if peak > 0.0 {
        raw.into_iter().map(|v| T::lit(v / peak)).collect()
    } else {
        vec![T::zero(); raw.len()]
    };
    SaliencyMap::new(width, height, values)
}

/// Reads a saliency map, dispatching on the file signature (SMAP or PNG).
pub fn read_saliency_map<T: Scalar>(path: &Path) -> Result<SaliencyMap<T>> {
    let bytes = read_file(path)?;
    if bytes.starts_with(SMAP_MAGIC) {
        decode_smap(&bytes).map_err(|e| match e {
            Error::MapFormat(m) => Error::MapFormat(format!("{}: {m}", path.display())),
            other => other,
        })
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(path, &bytes)
    } else {
        Err(Error::MapFormat(format!(
            "{}: header mismatch: neither SMAP nor PNG",
            path.display()
        )))
    }
}

pub fn write_saliency_map<T: Scalar>(map: &SaliencyMap<T>, path: &Path) -> Result<()> {
    write_atomic(path, &encode_smap(map))
}

/// File name of the map for `frame` inside a per-video map directory.
pub fn map_file_name(frame: u64) -> String {
    format!("{frame:06}.smap")
}

/// Per-frame map files in `dir`: `.smap` or `.png` files whose stem is a frame number.
/// A frame present in both formats resolves to the SMAP file.
pub fn list_map_files(dir: &Path) -> Result<BTreeMap<u64, PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out: BTreeMap<u64, PathBuf> = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        let frame = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<u64>().ok());
        match (ext.as_deref(), frame) {
            (Some("smap"), Some(f)) => {
                out.insert(f, path);
            }
            (Some("png"), Some(f)) => {
                out.entry(f).or_insert(path);
            }
            _ => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_by_two_round_trip_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.smap");
        let m = SaliencyMap::new(2, 2, vec![0.0f32, 1.0, 2.0, 3.0]).unwrap();
        write_saliency_map(&m, &p).unwrap();
        let back: SaliencyMap<f32> = read_saliency_map(&p).unwrap();
        assert_eq!(back, m);
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..4], b"SMAP");
        assert_eq!(bytes.len(), 16 + 16);
    }

    #[test]
    fn header_errors() {
        let m = SaliencyMap::new(2, 1, vec![1.0f64, 2.0]).unwrap();
        let mut bytes = encode_smap(&m);
        bytes[12] = 1;
        assert!(decode_smap::<f64>(&bytes).is_err());
        let mut bytes = encode_smap(&m);
        bytes.pop();
        assert!(decode_smap::<f64>(&bytes).is_err());
        let mut bytes = encode_smap(&m);
        bytes[4..8].copy_from_slice(&0u32.to_le_bytes());
        assert!(decode_smap::<f64>(&bytes).is_err());
        let mut huge = b"SMAP".to_vec();
        huge.extend_from_slice(&u32::MAX.to_le_bytes());
        huge.extend_from_slice(&u32::MAX.to_le_bytes());
        huge.extend_from_slice(&0u32.to_le_bytes());
        assert!(decode_smap::<f64>(&huge).is_err());
        assert!(decode_smap::<f64>(b"SMAX\0\0\0\0").is_err());
    }

    fn write_png_l8(path: &Path, w: u32, h: u32, data: Vec<u8>) {
        image::GrayImage::from_raw(w, h, data).unwrap().save(path).unwrap();
    }

    #[test]
    fn all_zero_png_imports_as_zero() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("z.png");
        write_png_l8(&p, 3, 2, vec![0; 6]);
        let m: SaliencyMap<f64> = read_saliency_map(&p).unwrap();
        assert_eq!(m.dims(), (3, 2));
        assert!(m.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sixteen_bit_png_rescales_by_max() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.png");
        let img: image::ImageBuffer<image::Luma<u16>, Vec<u16>> =
            image::ImageBuffer::from_raw(2, 2, vec![0, 16384, 32768, 65535]).unwrap();
        img.save(&p).unwrap();
        let m: SaliencyMap<f64> = read_saliency_map(&p).unwrap();
        assert_eq!(m.max(), 1.0);
        assert!((m.values()[2] - 32768.0 / 65535.0).abs() < 1e-15);
    }

    #[test]
    fn eight_bit_png_rescales_by_image_max() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.png");
        write_png_l8(&p, 2, 1, vec![50, 100]);
        let m: SaliencyMap<f32> = read_saliency_map(&p).unwrap();
        assert_eq!(m.values(), &[0.5, 1.0]);
    }

    #[test]
    fn rgb_png_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.png");
        image::RgbImage::new(2, 2).save(&p).unwrap();
        assert!(read_saliency_map::<f64>(&p).is_err());
    }

    proptest! {
        #[test]
        fn smap_round_trip_is_bit_exact(
            w in 1usize..8, h in 1usize..8,
            seed in proptest::collection::vec(0.0f32..1e6, 64)
        ) {
            let values: Vec<f32> = (0..w * h).map(|i| seed[i % seed.len()]).collect();
            let m = SaliencyMap::new(w, h, values).unwrap();
            let back: SaliencyMap<f32> = decode_smap(&encode_smap(&m)).unwrap();
            prop_assert_eq!(
                back.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                m.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}
