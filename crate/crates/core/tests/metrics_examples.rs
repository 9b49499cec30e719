use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wearcast_core::metrics::*;
use wearcast_core::train::TrainingSample;
use wearcast_core::{DeltaEncoding, Image, Side, Variant};

const C1: f64 = (K1 * DYNAMIC_RANGE) * (K1 * DYNAMIC_RANGE);
const C2: f64 = (K2 * DYNAMIC_RANGE) * (K2 * DYNAMIC_RANGE);

/// l·c·s with C3 = C2/2, from two-pass moments.
fn brute_ssim(f: &Image, g: &Image) -> f64 {
    let n = f.pixels().len() as f64;
    let mf = f.pixels().iter().map(|&v| v as f64).sum::<f64>() / n;
    let mg = g.pixels().iter().map(|&v| v as f64).sum::<f64>() / n;
    let (mut vf, mut vg, mut cov) = (0.0, 0.0, 0.0);
    for (&a, &b) in f.pixels().iter().zip(g.pixels()) {
        let (da, db) = (a as f64 - mf, b as f64 - mg);
        vf += da * da / n;
        vg += db * db / n;
        cov += da * db / n;
    }
    let (sf, sg) = (vf.sqrt(), vg.sqrt());
    let c3 = C2 / 2.0;
    let l = (2.0 * mf * mg + C1) / (mf * mf + mg * mg + C1);
    let c = (2.0 * sf * sg + C2) / (vf + vg + C2);
    let s = (cov + c3) / (sf * sg + c3);
    l * c * s
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
    Image::from_fn(w, h, |_, _| rng.gen::<f32>()).quantized()
}

#[test]
fn constant_images_follow_the_luminance_term() {
    for (c1, c2) in [(0.2f32, 0.7f32), (0.0, 1.0), (0.5, 0.55)] {
        let (f, g) = (Image::filled(9, 7, c1), Image::filled(9, 7, c2));
        let (a, b) = (c1 as f64, c2 as f64);
        let expect = (2.0 * a * b + C1) / (a * a + b * b + C1);
        assert!((ssim(&f, &g, SsimWindow::Global).unwrap() - expect).abs() < 1e-12);
        assert!((ssim(&f, &g, SsimWindow::Sliding(4)).unwrap() - expect).abs() < 1e-9);
    }
}

#[test]
fn global_ssim_matches_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..20 {
        let f = random_image(&mut rng, 8, 8);
        let g = Image::from_fn(8, 8, |x, y| (0.6 * f.get(x, y) + 0.4 * rng.gen::<f32>()).min(1.0));
        let expect = brute_ssim(&f, &g).clamp(0.0, 1.0);
        assert!((ssim(&f, &g, SsimWindow::Global).unwrap() - expect).abs() < 1e-10);
        // One 8×8 window covers the whole image.
        assert!((ssim(&f, &g, SsimWindow::Sliding(8)).unwrap() - expect).abs() < 1e-9);
    }
}

#[test]
fn inverted_checkerboard_is_floored_at_zero() {
    let f = Image::from_fn(8, 8, |x, y| ((x + y) % 2) as f32);
    let g = Image::from_fn(8, 8, |x, y| ((x + y + 1) % 2) as f32);
    let raw = brute_ssim(&f, &g);
    assert!(raw < -0.99, "{raw}");
    assert_eq!(ssim(&f, &g, SsimWindow::Global).unwrap(), 0.0);
    assert_eq!(ssim(&f, &g, SsimWindow::Sliding(8)).unwrap(), 0.0);
}

#[test]
fn identity_symmetry_and_maximality() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..100 {
        let (w, h) = (rng.gen_range(8..24), rng.gen_range(8..24));
        let f = random_image(&mut rng, w, h);
        let g = random_image(&mut rng, w, h);
        for win in [SsimWindow::Global, SsimWindow::Sliding(8), SsimWindow::Sliding(3)] {
            assert_eq!(ssim(&f, &f, win).unwrap(), 1.0);
            assert_eq!(ssim(&f, &g, win).unwrap(), ssim(&g, &f, win).unwrap());
            assert!(ssim(&f, &g, win).unwrap() <= 1.0);
        }
        assert_eq!(psnr(&f, &g).unwrap(), psnr(&g, &f).unwrap());
    }
}

#[test]
fn psnr_reference_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let levels: Vec<u8> = (0..300).map(|_| rng.gen_range(0..255)).collect();
    let f = Image::from_levels(20, 15, &levels).unwrap();
    let g = Image::from_levels(20, 15, &levels.iter().map(|l| l + 1).collect::<Vec<_>>()).unwrap();
    assert!((psnr(&f, &g).unwrap() - 48.1308).abs() < 1e-3);
    assert!((psnr(&f, &g).unwrap() - 20.0 * 255f64.log10()).abs() < 1e-12);
    assert_eq!(psnr(&f, &f).unwrap(), f64::INFINITY);
    let (black, white) = (Image::filled(4, 4, 0.0), Image::filled(4, 4, 1.0));
    assert!(psnr(&black, &white).unwrap().abs() < 1e-12);
}

#[test]
fn psnr_falls_as_noise_grows() {
    let base = Image::filled(32, 32, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let u: Vec<f32> = (0..1024).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let scores: Vec<f64> = [0.02f32, 0.05, 0.1, 0.2, 0.4]
        .iter()
        .map(|&a| {
            let noisy = Image::from_fn(32, 32, |x, y| 0.5 + a * u[y * 32 + x]);
            psnr(&base, &noisy).unwrap()
        })
        .collect();
    assert!(scores.windows(2).all(|p| p[1] < p[0]), "{scores:?}");
}

struct Oracle<'a>(&'a [TrainingSample]);

impl Predictor for Oracle<'_> {
    fn variant(&self) -> Variant {
        Variant::Forward
    }

    fn predict(&self, x: &Image, delta: &DeltaEncoding) -> wearcast_core::Result<Image> {
        let s = self.0.iter().find(|s| &s.x == x && &s.delta == delta).unwrap();
        Ok(s.y.clone())
    }
}

fn samples() -> Vec<TrainingSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    (0..4)
        .map(|k| TrainingSample {
            x: random_image(&mut rng, 16, 16),
            delta: DeltaEncoding::scalar(2 * k).unwrap(),
            y: random_image(&mut rng, 16, 16),
            side: Side::Left,
            x_week: 0,
            y_week: 2 * k,
        })
        .collect()
}

#[test]
fn oracle_scores_one_and_persistence_scores_x_against_y() {
    let s = samples();
    let perfect = evaluate(&Oracle(&s), &s, "oracle").unwrap();
    assert_eq!(perfect.ssim().mean, 1.0);
    assert_eq!(perfect.ssim().std, 0.0);
    assert_eq!(perfect.infinite_psnr_count(), 4);

    let base = evaluate(&Persistence(Variant::Forward), &s, "persistence").unwrap();
    for (e, s) in base.entries.iter().zip(&s) {
        assert_eq!(e.ssim, ssim(&s.x, &s.y, SsimWindow::default()).unwrap());
    }
    let table = format_table(&[perfect, base]);
    assert!(table.contains("Mean") && table.contains("STD") && table.contains("persistence"));
    assert!(evaluate(&Persistence(Variant::Forward), &[], "empty").is_err());
    assert!(evaluate(&Persistence(Variant::Backward), &s, "wrong").is_err());
}
