mod common;

use std::fs;

use featbounds::imaging::{
    apply_brightness, build_dataset, default_schedule, load_image, save_image, synthetic_scene,
    DEFAULT_STEP_COUNT, MANIFEST_NAME,
};
use featbounds::{Dataset, Image, TransformKind};
use proptest::prelude::*;

// floor(p * (100 - d) / 100 + 1/2) in exact integer arithmetic when d is whole.
fn brightness_oracle(p: u8, d: u32) -> u8 {
    ((2 * p as u32 * (100 - d) + 100) / 200) as u8
}

#[test]
fn brightness_matches_integer_oracle() {
    let img = Image::from_fn(256, 1, |x, _| x as u8).unwrap();
    for d in 0..=90u32 {
        let out = apply_brightness(&img, d as f64).unwrap();
        for p in 0..=255u8 {
            assert_eq!(out.get(p as usize, 0), brightness_oracle(p, d), "p {p} d {d}");
        }
    }
}

#[test]
fn default_schedules_are_fixed() {
    assert_eq!(
        default_schedule(TransformKind::JpegCompression, DEFAULT_STEP_COUNT),
        vec![0.0, 8.0, 15.0, 23.0, 30.0, 38.0, 45.0, 53.0, 60.0, 68.0, 75.0, 83.0, 90.0, 98.0]
    );
    assert_eq!(
        default_schedule(TransformKind::BrightnessDecrease, DEFAULT_STEP_COUNT),
        vec![0.0, 7.0, 14.0, 21.0, 28.0, 35.0, 42.0, 48.0, 55.0, 62.0, 69.0, 76.0, 83.0, 90.0]
    );
}

#[test]
fn reference_step_is_lossless() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = synthetic_scene(9, 48, 40);
    for kind in [TransformKind::JpegCompression, TransformKind::BrightnessDecrease] {
        let out = tmp.path().join(kind.as_str());
        let ds = build_dataset(&scene, "s", kind, &[0.0, 50.0], &out).unwrap();
        assert_eq!(ds.load_step(0).unwrap(), scene);
        let reopened = Dataset::open(out.join("s")).unwrap();
        assert_eq!(reopened, ds);
    }
}

#[test]
fn pgm_and_png_inputs_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = synthetic_scene(2, 33, 17);
    save_image(&scene, tmp.path().join("a.pgm")).unwrap();
    save_image(&scene, tmp.path().join("a.png")).unwrap();
    assert_eq!(load_image(tmp.path().join("a.pgm")).unwrap(), scene);
    assert_eq!(load_image(tmp.path().join("a.png")).unwrap(), scene);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brightness_is_monotone(p in any::<u8>(), q in any::<u8>(), d1 in 0.0f64..=90.0, d2 in 0.0f64..=90.0) {
        let img = Image::new(2, 1, vec![p.min(q), p.max(q)]).unwrap();
        let (lo, hi) = (d1.min(d2), d1.max(d2));
        let a = apply_brightness(&img, lo).unwrap();
        let b = apply_brightness(&img, hi).unwrap();
        // Brighter inputs stay at least as bright; more decrease never brightens.
        prop_assert!(a.get(0, 0) <= a.get(1, 0));
        prop_assert!(b.get(0, 0) <= a.get(0, 0) && b.get(1, 0) <= a.get(1, 0));
        prop_assert!(a.get(1, 0) <= p.max(q));
    }

    #[test]
    fn datasets_are_byte_identical_across_runs(seed in 0u64..1000, jpeg in any::<bool>()) {
        let kind = if jpeg { TransformKind::JpegCompression } else { TransformKind::BrightnessDecrease };
        let scene = synthetic_scene(seed, 40, 32);
        let steps = default_schedule(kind, 5);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let da = build_dataset(&scene, "x", kind, &steps, a.path()).unwrap();
        build_dataset(&scene, "x", kind, &steps, b.path()).unwrap();
        prop_assert_eq!(da.step_count(), 5);
        let mut names: Vec<String> = fs::read_dir(a.path().join("x")).unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        prop_assert_eq!(names.len(), 6);
        prop_assert!(names.contains(&MANIFEST_NAME.to_string()));
        for name in names {
            let fa = fs::read(a.path().join("x").join(&name)).unwrap();
            let fb = fs::read(b.path().join("x").join(&name)).unwrap();
            prop_assert!(fa == fb, "{} differs", name);
        }
    }
}
