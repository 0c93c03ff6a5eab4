use gazeaudit_core::homography::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn random_homography(rng: &mut ChaCha8Rng) -> Homography<f64> {
    loop {
        let h = [
            [rng.random_range(0.7..1.3), rng.random_range(-0.2..0.2), rng.random_range(-200.0..200.0)],
            [rng.random_range(-0.2..0.2), rng.random_range(0.7..1.3), rng.random_range(-200.0..200.0)],
            [rng.random_range(-1e-4..1e-4), rng.random_range(-1e-4..1e-4), 1.0],
        ];
        if let Ok(h) = Homography::from_rows(h) {
            return h;
        }
    }
}

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|_| (rng.random_range(0.0..1920.0), rng.random_range(0.0..1080.0))).collect()
}

/// Reprojection error recomputed by hand from the 3x3 matrix.
fn manual_error(h: &Homography<f64>, src: (f64, f64), dst: (f64, f64)) -> f64 {
    let r = h.rows();
    let w = r[2][0] * src.0 + r[2][1] * src.1 + r[2][2];
    let x = (r[0][0] * src.0 + r[0][1] * src.1 + r[0][2]) / w;
    let y = (r[1][0] * src.0 + r[1][1] * src.1 + r[1][2]) / w;
    ((x - dst.0).powi(2) + (y - dst.1).powi(2)).sqrt()
}

#[test]
fn dlt_recovers_noiseless_homographies() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let truth = random_homography(&mut rng);
        let n = rng.random_range(4..30);
        let corrs: Vec<_> = random_points(&mut rng, n)
            .into_iter()
            .map(|p| Correspondence::new(p, truth.project(p).unwrap()))
            .collect();
        let h = estimate_homography_dlt(&corrs).unwrap();
        for c in &corrs {
            worst = worst.max(manual_error(&h, c.src, c.dst));
        }
    }
    assert!(worst < 1e-6, "max reprojection error {worst}");
}

#[test]
fn robust_estimator_separates_planted_outliers() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let truth = random_homography(&mut rng);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let n = 60;
        let mut outlier = vec![false; n];
        let corrs: Vec<_> = random_points(&mut rng, n)
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let (x, y) = truth.project(p).unwrap();
                if i % 10 < 3 {
                    outlier[i] = true;
                    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let r = rng.random_range(50.0..300.0);
                    Correspondence::new(p, (x + r * a.cos(), y + r * a.sin()))
                } else {
                    Correspondence::new(p, (x + noise.sample(&mut rng), y + noise.sample(&mut rng)))
                }
            })
            .collect();
        let est = estimate_homography_robust(&corrs, 3.0, 2000, seed).unwrap();
        for i in 0..n {
            assert_eq!(est.inliers[i], !outlier[i], "seed {seed}, correspondence {i}");
        }
    }
}

#[test]
fn robust_estimator_is_deterministic_per_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let truth = random_homography(&mut rng);
    let corrs: Vec<_> = random_points(&mut rng, 40)
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let q = truth.project(p).unwrap();
            Correspondence::new(p, if i % 4 == 0 { (q.0 + 80.0, q.1) } else { q })
        })
        .collect();
    let a = estimate_homography_robust(&corrs, 3.0, 500, 42).unwrap();
    let b = estimate_homography_robust(&corrs, 3.0, 500, 42).unwrap();
    assert_eq!(a, b);
}

fn noisy_reference_pairs(sigma: f64, seed: u64, pairs: usize) -> Vec<FramePair<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    (0..pairs)
        .map(|i| {
            let h = random_homography(&mut rng);
            let correspondences = random_points(&mut rng, 16)
                .into_iter()
                .map(|p| Correspondence::new(p, h.project(p).unwrap()))
                .collect();
            let r = random_points(&mut rng, 1)[0];
            let (x, y) = h.project(r).unwrap();
            FramePair {
                id: format!("p{i}"),
                correspondences,
                references: vec![Correspondence::new(r, (x + noise.sample(&mut rng), y + noise.sample(&mut rng)))],
            }
        })
        .collect()
}

#[test]
fn sd_protocol_median_matches_rayleigh_median() {
    let sigma = 4.0;
    let cfg = ProtocolConfig::default();
    assert_eq!((cfg.runs, cfg.pairs_per_video), (10, 1000));
    let report = sd_error_protocol(&noisy_reference_pairs(sigma, 5, 1000), &cfg).unwrap();
    assert_eq!(report.errors.len(), 10_000);
    let predicted = sigma * (2.0 * std::f64::consts::LN_2).sqrt();
    let rel = (report.median - predicted).abs() / predicted;
    assert!(rel < 0.10, "median {} vs {predicted}", report.median);
}

#[test]
fn sd_protocol_noiseless_has_no_error() {
    let report = sd_error_protocol(&noisy_reference_pairs(1e-300, 9, 50), &ProtocolConfig::default()).unwrap();
    assert!(report.median < 1e-6);
    assert_eq!(report.outlier_fraction_gt100, 0.0);
    let binned: usize = report.eccentricity.iter().map(|b| b.count).sum();
    assert_eq!(binned, report.errors.len());
}

#[test]
fn temporal_error_grows_with_offset_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut samples = Vec::new();
    for key in 0..40 {
        for offset in -12i32..=12 {
            let pan = Homography::translation(3.0 * offset as f64, 0.5 * offset as f64);
            let noise = Normal::new(0.0, 0.2 * offset.unsigned_abs() as f64 + 1e-9).unwrap();
            let correspondences = random_points(&mut rng, 20)
                .into_iter()
                .map(|p| {
                    let (x, y) = pan.project(p).unwrap();
                    Correspondence::new(p, (x + noise.sample(&mut rng), y + noise.sample(&mut rng)))
                })
                .collect();
            samples.push(WindowSample {
                key_id: format!("k{key}"),
                offset,
                correspondences,
                probe: (960.0, 540.0),
            });
        }
    }
    let report = temporal_window_error(&samples, &ProtocolConfig::default()).unwrap();
    let zero = report.per_offset.iter().find(|o| o.offset == 0).unwrap();
    assert_eq!(zero.median, 0.0);
    for side in [1i32, -1] {
        let medians: Vec<f64> = (0..=12)
            .map(|k| report.per_offset.iter().find(|o| o.offset == side * k).unwrap().median)
            .collect();
        // Medians over 400 draws; neighbours may tie within sampling noise.
        for w in medians.windows(3) {
            assert!(w[2] >= w[0], "{medians:?}");
        }
        assert!(medians[12] > medians[1] * 3.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_undoes_projection(seed in 0u64..10_000, x in 0.0f64..1920.0, y in 0.0f64..1080.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_homography(&mut rng);
        let back = h.inverse().unwrap().project(h.project((x, y)).unwrap()).unwrap();
        prop_assert!((back.0 - x).abs() < 1e-6 && (back.1 - y).abs() < 1e-6);
    }

    #[test]
    fn dlt_is_invariant_to_correspondence_order(seed in 0u64..10_000, rot in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = random_homography(&mut rng);
        let mut corrs: Vec<_> = random_points(&mut rng, 12)
            .into_iter()
            .map(|p| Correspondence::new(p, truth.project(p).unwrap()))
            .collect();
        let a = estimate_homography_dlt(&corrs).unwrap();
        corrs.rotate_left(rot);
        let b = estimate_homography_dlt(&corrs).unwrap();
        for p in random_points(&mut rng, 5) {
            let (pa, pb) = (a.project(p).unwrap(), b.project(p).unwrap());
            prop_assert!((pa.0 - pb.0).abs() < 1e-6 && (pa.1 - pb.1).abs() < 1e-6);
        }
    }
}
