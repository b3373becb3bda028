use proptest::prelude::*;
use proptest::strategy::ValueTree;

use gfl_core::harness::psnr_from_mse;
use gfl_core::imagecore::{add_gaussian_noise, downscale_bicubic, load_image, save_image};
use gfl_core::pyramid::{build_laplacian, laplacian_depth1, reconstruct};
use gfl_core::scheduler::{trace, Interpretation, ScheduleConfig};
use gfl_core::spectral::{apply_highpass, dft2, highpass_mask, FrequencyMask};
use gfl_core::{gfl, GflParams, Image};

fn image(h: usize, w: usize, c: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(0.0f64..=1.0, h * w * c)
        .prop_map(move |d| Image::new(h, w, c, d).unwrap())
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3).prop_map(|(a, b)| (8 << (a - 1) << 1, 8 << (b - 1) << 1))
}

fn sized_pair() -> impl Strategy<Value = (Image, Image)> {
    shape().prop_flat_map(|(h, w)| (image(h, w, 1), image(h, w, 1)))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn dft_is_linear((i, j) in sized_pair(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let combo = Image::new(
            i.height(), i.width(), 1,
            i.samples().zip(j.samples()).map(|(x, y)| a * x + b * y).collect(),
        ).unwrap();
        let (fi, fj, fc) = (dft2(&i), dft2(&j), dft2(&combo));
        for k in 0..i.len() {
            let expected = fi.channel(0)[k] * a + fj.channel(0)[k] * b;
            prop_assert!((fc.channel(0)[k] - expected).norm() <= 1e-10 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn real_spectra_are_conjugate_symmetric(img in shape().prop_flat_map(|(h, w)| image(h, w, 1))) {
        let f = dft2(&img);
        let (h, w) = (img.height(), img.width());
        for u in 0..h {
            for v in 0..w {
                let mirror = f.get(0, (h - u) % h, (w - v) % w).conj();
                prop_assert!((f.get(0, u, v) - mirror).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn highpass_is_idempotent(img in image(32, 32, 1), omega in 0.0f64..20.0) {
        let mask = highpass_mask(32, 32, omega).unwrap();
        let once = apply_highpass(&img, &mask).unwrap();
        let twice = apply_highpass(&once, &mask).unwrap();
        prop_assert!(once.max_abs_diff(&twice).unwrap() <= 1e-10);
    }

    #[test]
    fn pyramid_reconstructs(img in image(64, 32, 1), depth in 1usize..=2) {
        let back = reconstruct(&build_laplacian(&img, depth).unwrap());
        prop_assert!(back.max_abs_diff(&img).unwrap() <= 1e-9);
    }

    #[test]
    fn laplacian_annihilates_constants(v in -3.0f64..3.0) {
        let img = Image::filled(32, 32, 3, v).unwrap();
        let out = laplacian_depth1(&img).unwrap();
        prop_assert!(out.samples().all(|x| x.abs() <= 1e-12));
    }

    #[test]
    fn gfl_symmetric_and_consistent((a, b) in sized_pair(), omega in 0.0f64..12.0) {
        let params = GflParams::new(1e-3, highpass_mask(a.height(), a.width(), omega).unwrap()).unwrap();
        let ab = gfl(&a, &b, &params).unwrap();
        let ba = gfl(&b, &a, &params).unwrap();
        prop_assert!((ab.total - ba.total).abs() <= 1e-12 * ab.total);
        let sum = ab.ch_c + ab.pi_c + ab.theta_c;
        prop_assert!((ab.total * ab.total - sum).abs() <= 1e-12 * sum);
        prop_assert!(ab.total >= 1e-3);
    }

    #[test]
    fn wider_band_never_lowers_theta((a, b) in sized_pair(), hi in 1.0f64..12.0, drop in 0.0f64..1.0) {
        let (h, w) = (a.height(), a.width());
        let narrow = GflParams::new(1e-3, highpass_mask(h, w, hi).unwrap()).unwrap();
        let wide = GflParams::new(1e-3, highpass_mask(h, w, hi * drop).unwrap()).unwrap();
        let tn = gfl(&a, &b, &narrow).unwrap().theta_c;
        let tw = gfl(&a, &b, &wide).unwrap().theta_c;
        prop_assert!(tw >= tn - 1e-15);
    }

    #[test]
    fn schedules_are_monotone_and_bounded(
        omega0 in 10.0f64..300.0,
        span in 0.1f64..250.0,
        epochs in 1usize..60,
        stages in 1usize..7,
        dynamic in any::<bool>(),
        interval in any::<bool>(),
        losses in prop::collection::vec(0.0f64..0.2, 60),
    ) {
        let omega_final = (omega0 - span).max(0.0);
        let cfg = if dynamic {
            ScheduleConfig::dynamic(omega0, omega_final, epochs, stages, 0.1)
        } else {
            ScheduleConfig::fixed(omega0, omega_final, epochs, stages)
        };
        let cfg = cfg.with_interpretation(if interval {
            Interpretation::StageInterval
        } else {
            Interpretation::Literal
        });
        let rows = trace(&cfg, dynamic.then_some(&losses[..epochs])).unwrap();
        prop_assert_eq!(rows.len(), epochs);
        let mut frozen_seen = false;
        for pair in rows.windows(2) {
            prop_assert!(pair[1].omega <= pair[0].omega);
        }
        for r in &rows {
            prop_assert!(r.omega >= omega_final && r.omega <= omega0);
            if frozen_seen {
                prop_assert_eq!(r.omega, omega_final);
            }
            frozen_seen |= r.frozen;
            prop_assert_eq!(r.frozen, r.omega == omega_final);
        }
    }

    #[test]
    fn psnr_decreases_with_mse(a in 1e-10f64..1.0, b in 1e-10f64..1.0) {
        prop_assume!(a < b);
        prop_assert!(psnr_from_mse(a) > psnr_from_mse(b));
    }

    #[test]
    fn noise_is_deterministic(img in image(16, 16, 3), seed in any::<u64>()) {
        let a = add_gaussian_noise(&img, 0.15, 0.0, seed);
        let b = add_gaussian_noise(&img, 0.15, 0.0, seed);
        prop_assert!(a.samples().zip(b.samples()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn downscale_keeps_constants(v in 0.0f64..1.0, c in prop::sample::select(vec![1usize, 3])) {
        let img = Image::filled(32, 64, c, v).unwrap();
        let small = downscale_bicubic(&img, 4).unwrap();
        prop_assert!(small.samples().all(|x| (x - v).abs() <= 1e-12));
    }
}

#[test]
fn static_trace_lands_exactly_on_final() {
    for (omega0, omega_final, stages) in [
        (255.0, 10.0, 3),
        (100.0, 0.3, 7),
        (1.0, 0.1, 9),
        (255.0, 10.0, 2),
    ] {
        let cfg = ScheduleConfig::fixed(omega0, omega_final, stages * stages, stages);
        let rows = trace(&cfg, None).unwrap();
        assert_eq!(rows.last().unwrap().omega, omega_final);
        assert!(rows.iter().all(|r| r.omega >= omega_final));
    }
}

#[test]
fn empty_mask_gives_zero_theta() {
    let a = Image::from_fn(16, 16, 1, |_, y, x| ((x * 7 + y * 3) % 11) as f64 / 11.0).unwrap();
    let b = Image::filled(16, 16, 1, 0.5).unwrap();
    let bd = gfl(
        &a,
        &b,
        &GflParams::new(1e-3, FrequencyMask::empty(16, 16)).unwrap(),
    )
    .unwrap();
    assert_eq!(bd.theta_c, 0.0);
}

#[test]
fn load_save_round_trip_within_half_step() {
    let dir = tempfile::tempdir().unwrap();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = (
        prop::sample::select(vec![1usize, 3]),
        8usize..24,
        8usize..24,
    )
        .prop_flat_map(|(c, h, w)| image(h, w, c));
    for i in 0..20 {
        let img = strategy.new_tree(&mut runner).unwrap().current();
        let ext = if i % 2 == 0 {
            "png"
        } else if img.channels() == 1 {
            "pgm"
        } else {
            "ppm"
        };
        let path = dir.path().join(format!("img{i}.{ext}"));
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.dims(), img.dims());
        assert!(back.max_abs_diff(&img).unwrap() <= 1.0 / 510.0 + 1e-12);
    }
}
