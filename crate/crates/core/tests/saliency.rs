use std::collections::BTreeMap;

use gazeaudit_core::homography::Homography;
use gazeaudit_core::map::SaliencyMap;
use gazeaudit_core::model::Fixation;
use gazeaudit_core::salmap::*;
use proptest::prelude::*;

fn fx(frame: u64, x: f64, y: f64) -> Fixation<f64> {
    Fixation::new(frame, x, y)
}

/// Truncated Gaussian evaluated pixel by pixel, straight from the definition.
fn gaussian(w: usize, h: usize, cx: f64, cy: f64, sigma: f64) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            if d2.sqrt() <= TRUNCATION_SIGMAS * sigma {
                out[y * w + x] = (-d2 / (2.0 * sigma * sigma)).exp();
            }
        }
    }
    out
}

#[test]
fn distant_fixations_give_pointwise_max() {
    let cfg = RecipeConfig {
        sigma_spatial: 3.0,
        ..RecipeConfig::temporal_window()
    };
    let (w, h) = (80, 20);
    let a = fx(10, 10.0, 10.0);
    let b = fx(12, 50.0, 9.0);
    let hs: BTreeMap<u64, Homography<f64>> = [(12, Homography::identity())].into();
    let both = temporal_window_map(10, &[a, b], &hs, &cfg, w, h).unwrap();
    let ga = gaussian(w, h, 10.0, 10.0, 3.0);
    let gb = gaussian(w, h, 50.0, 9.0, 3.0);
    let expected: Vec<f64> = ga.iter().zip(&gb).map(|(x, y)| x.max(*y)).collect();
    assert_eq!(both.values(), &expected[..]);
}

#[test]
fn temporal_weight_ratio_at_one_sigma() {
    let cfg = RecipeConfig::multi_observer();
    let (w, h) = (64, 64);
    let obs = vec![vec![fx(20, 32.0, 32.0)]];
    let at = multi_observer_response(&obs, 20, &cfg, w, h).unwrap();
    let off = multi_observer_response(&obs, 24, &cfg, w, h).unwrap();
    let ratio = off.get(32, 32) / at.get(32, 32);
    assert!((ratio - (-0.5f64).exp()).abs() < 1e-6);
}

#[test]
fn repeated_fixation_gives_static_map() {
    let cfg = RecipeConfig {
        sigma_spatial: 4.0,
        ..RecipeConfig::multi_observer()
    };
    let obs = vec![(0..40).map(|f| fx(f, 20.0, 11.0)).collect::<Vec<_>>()];
    let still = spatial_gaussian_map(&[fx(0, 20.0, 11.0)], 4.0, 40, 24).unwrap();
    for m in multi_observer_maps(&obs, 0..40, &cfg, 40, 24).unwrap() {
        for (a, b) in m.values().iter().zip(still.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn emitted_maps_follow_their_normalization() {
    let fixes: Vec<_> = (0..30).map(|f| fx(f, 5.0 + f as f64, 8.0 + (f % 5) as f64)).collect();
    let mo = multi_observer_maps(std::slice::from_ref(&fixes), 0..30, &RecipeConfig::multi_observer(), 48, 27).unwrap();
    for m in &mo {
        assert!(m.values().iter().all(|&v| v >= 0.0));
        assert!((m.sum() - 1.0).abs() < 1e-9);
    }
    let hs: BTreeMap<u64, Homography<f64>> = (0..30).map(|f| (f, Homography::translation(-0.5, 0.0))).collect();
    let tw = temporal_window_map(15, &fixes, &hs, &RecipeConfig::temporal_window(), 48, 27).unwrap();
    assert!(tw.values().iter().all(|&v| v >= 0.0));
    assert_eq!(tw.max(), 1.0);
    let sf = single_fixation_map(&fx(0, 100.0, 3.0), 60.0, OffFramePolicy::Clamp, 48, 27).unwrap();
    assert!(sf.values().iter().all(|&v| v >= 0.0));
    assert!((sf.sum() - 1.0).abs() < 1e-9);
    assert!(single_fixation_map(&fx(0, 100.0, 3.0), 60.0, OffFramePolicy::Reject, 48, 27).is_err());
}

fn dense(m: &SaliencyMap<f64>) -> &[f64] {
    m.values()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fixation_order_does_not_matter(
        pts in proptest::collection::vec((0.0f64..39.0, 0.0f64..29.0), 1..12),
        rot in 0usize..12,
    ) {
        let fixes: Vec<_> = pts.iter().map(|&(x, y)| fx(0, x, y)).collect();
        let a = spatial_gaussian_map(&fixes, 3.0, 40, 30).unwrap();
        let mut shuffled = fixes.clone();
        let r = rot % shuffled.len();
        shuffled.rotate_left(r);
        shuffled.reverse();
        let b = spatial_gaussian_map(&shuffled, 3.0, 40, 30).unwrap();
        for (x, y) in dense(&a).iter().zip(dense(&b)) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_shift_moves_the_map(x in 15.0f64..25.0, y in 15.0f64..25.0, dx in 0usize..5, dy in 0usize..5) {
        let a = spatial_gaussian_response(&[fx(0, x, y)], 2.0, 60, 60).unwrap();
        let b = spatial_gaussian_response(&[fx(0, x + dx as f64, y + dy as f64)], 2.0, 60, 60).unwrap();
        for yy in 0..50 {
            for xx in 0..50 {
                prop_assert!((a.get(xx, yy) - b.get(xx + dx, yy + dy)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sum_recipe_has_unit_mass(pts in proptest::collection::vec((0.0f64..31.0, 0.0f64..17.0), 1..8)) {
        let fixes: Vec<_> = pts.iter().map(|&(x, y)| fx(0, x, y)).collect();
        let m = spatial_gaussian_map(&fixes, 2.5, 32, 18).unwrap();
        prop_assert!(m.values().iter().all(|&v| v >= 0.0));
        prop_assert!((m.sum() - 1.0).abs() < 1e-9);
    }
}
