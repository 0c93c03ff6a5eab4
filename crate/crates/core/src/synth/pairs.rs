use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::homography::{Correspondence, Homography};
use crate::io::write_correspondences_csv;

type Groups = Vec<(String, Vec<Correspondence<f64>>)>;

const SCENE: (f64, f64) = (1920.0, 1080.0);

fn random_homography(rng: &mut ChaCha8Rng) -> Homography<f64> {
    loop {
        let h = [
            [rng.random_range(0.8..1.2), rng.random_range(-0.1..0.1), rng.random_range(-150.0..150.0)],
            [rng.random_range(-0.1..0.1), rng.random_range(0.8..1.2), rng.random_range(-150.0..150.0)],
            [rng.random_range(-5e-5..5e-5), rng.random_range(-5e-5..5e-5), 1.0],
        ];
        if let Ok(h) = Homography::from_rows(h) {
            return h;
        }
    }
}

fn point(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.random_range(0.0..SCENE.0), rng.random_range(0.0..SCENE.1))
}

/// Driver/scene frame pairs: exact feature correspondences under a random homography
/// and one reference fixation per pair whose scene location carries isotropic
/// Gaussian noise of `sigma_px`. Returns (correspondences, references).
pub fn demo_sd_pairs(seed: u64, pairs: usize, features: usize, sigma_px: f64) -> (Groups, Groups) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma_px).expect("finite sigma");
    let mut corrs = Vec::with_capacity(pairs);
    let mut refs = Vec::with_capacity(pairs);
    for i in 0..pairs {
        let id = format!("pair{i:04}");
        let h = random_homography(&mut rng);
        let c: Vec<_> = (0..features)
            .map(|_| {
                let p = point(&mut rng);
                Correspondence::new(p, h.project(p).expect("finite projection"))
            })
            .collect();
        let r = point(&mut rng);
        let (x, y) = h.project(r).expect("finite projection");
        let dst = (x + noise.sample(&mut rng), y + noise.sample(&mut rng));
        corrs.push((id.clone(), c));
        refs.push((id, vec![Correspondence::new(r, dst)]));
    }
    (corrs, refs)
}

/// Temporal-window samples for `keys` key frames at every offset in ±`half_window`.
/// The camera pans 4 px per frame and feature noise grows with |offset|. Pair ids are
/// `<key>:<offset>`; the reference rows carry the probe point in `src`.
pub fn demo_window_samples(seed: u64, keys: usize, half_window: i32, features: usize) -> (Groups, Groups) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corrs = Vec::new();
    let mut refs = Vec::new();
    for k in 0..keys {
        for offset in -half_window..=half_window {
            let id = format!("key{k:03}:{offset}");
            let pan = Homography::translation(4.0 * offset as f64, 0.5 * offset as f64);
            let noise = Normal::new(0.0, 0.15 * offset.unsigned_abs() as f64 + 1e-9).expect("finite sigma");
            let c: Vec<_> = (0..features)
                .map(|_| {
                    let p = point(&mut rng);
                    let (x, y) = pan.project(p).expect("finite projection");
                    Correspondence::new(p, (x + noise.sample(&mut rng), y + noise.sample(&mut rng)))
                })
                .collect();
            let probe = point(&mut rng);
            corrs.push((id.clone(), c));
            refs.push((id, vec![Correspondence::new(probe, probe)]));
        }
    }
    (corrs, refs)
}

/// File names written by [`write_demo_correspondences`], relative to its directory.
pub const SD_PAIRS_FILE: &str = "sd_pairs.csv";
pub const SD_REFS_FILE: &str = "sd_refs.csv";
pub const WINDOW_PAIRS_FILE: &str = "window_pairs.csv";
pub const WINDOW_REFS_FILE: &str = "window_refs.csv";

/// Writes a small driver/scene set (σ = 4 px) and a temporal-window set into `dir`.
pub fn write_demo_correspondences(dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::io(dir, e))?;
    let (sd_c, sd_r) = demo_sd_pairs(seed, 50, 16, 4.0);
    let (tw_c, tw_r) = demo_window_samples(seed ^ 1, 4, 12, 16);
    let mut out = Vec::new();
    for (name, groups) in [
        (SD_PAIRS_FILE, &sd_c),
        (SD_REFS_FILE, &sd_r),
        (WINDOW_PAIRS_FILE, &tw_c),
        (WINDOW_REFS_FILE, &tw_r),
    ] {
        let p = dir.join(name);
        write_correspondences_csv(&p, groups)?;
        out.push(p);
    }
    Ok(out)
}
