use proptest::prelude::*;
use wearcast_core::denoise::*;
use wearcast_core::metrics::{psnr, ssim, SsimWindow};
use wearcast_core::ops::{conv2d_forward, ConvSpec};
use wearcast_core::synth::{advance_wear, generate_outsole, OutsoleSpec};
use wearcast_core::{DeltaEncoding, Image, Tensor};

fn image(w: usize, h: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(0u8..=255, w * h).prop_map(move |l| Image::from_levels(w, h, &l).unwrap())
}

fn mask(w: usize, h: usize) -> impl Strategy<Value = BinaryMask> {
    prop::collection::vec(any::<bool>(), w * h).prop_map(move |b| BinaryMask::from_bits(w, h, b).unwrap())
}

proptest! {
    #[test]
    fn one_hot_round_trips(week in (0u32..=26).prop_map(|k| 2 * k)) {
        let d = DeltaEncoding::one_hot_week(week).unwrap();
        let v = d.to_vector::<f32>().unwrap();
        prop_assert_eq!(DeltaEncoding::from_one_hot(v.data()).unwrap(), d);
        prop_assert_eq!(v.data().iter().filter(|&&e| e == 1.0).count(), 1);
    }

    #[test]
    fn odd_weeks_are_rejected(week in (0u32..26).prop_map(|k| 2 * k + 1)) {
        prop_assert!(DeltaEncoding::scalar(week).is_err());
        prop_assert!(DeltaEncoding::one_hot_week(week).is_err());
    }

    #[test]
    fn levels_round_trip(img in image(7, 5)) {
        let back = Image::from_levels(7, 5, &img.to_levels()).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn morphology_brackets_the_mask(m in mask(12, 9), r in 1usize..3) {
        let d = dilate(&m, r).unwrap();
        let e = erode(&m, r).unwrap();
        prop_assert_eq!(m.difference(&d).unwrap().count(), 0);
        prop_assert_eq!(e.difference(&m).unwrap().count(), 0);
        prop_assert_eq!(m.difference(&close(&m, r).unwrap()).unwrap().count(), 0);
    }

    #[test]
    fn roi_filter_keeps_whole_large_components(m in mask(12, 12), min_area in 1usize..8) {
        let kept = roi_filter(&m, min_area).unwrap();
        prop_assert_eq!(kept.difference(&m).unwrap().count(), 0);
        let (labels, count) = label_components(&kept);
        for area in component_areas(&labels, count).into_iter().skip(1) {
            prop_assert!(area >= min_area);
        }
        let (orig, n) = label_components(&m);
        let areas = component_areas(&orig, n);
        for (i, &l) in orig.iter().enumerate() {
            if l > 0 {
                prop_assert_eq!(kept.at(i), areas[l as usize] >= min_area);
            }
        }
    }

    #[test]
    fn ssim_and_psnr_are_symmetric_and_bounded(f in image(10, 9), g in image(10, 9)) {
        for win in [SsimWindow::Global, SsimWindow::Sliding(8)] {
            let s = ssim(&f, &g, win).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s, ssim(&g, &f, win).unwrap());
            prop_assert_eq!(ssim(&f, &f, win).unwrap(), 1.0);
        }
        prop_assert_eq!(psnr(&f, &g).unwrap(), psnr(&g, &f).unwrap());
    }

    #[test]
    fn denoise_leaves_clean_pixels_bit_identical(
        img in image(9, 8),
        noise in mask(9, 8),
        labels in prop::collection::vec(0u32..3, 72),
        k in prop::sample::select(vec![3usize, 5, 7]),
    ) {
        let map = NoiseMap {
            foreground: noise.clone(),
            candidates: noise.clone(),
            print: BinaryMask::empty(9, 8),
            noise: noise.clone(),
            block_labels: labels,
            block_count: 2,
        };
        let out = denoise(&img, &map, k).unwrap();
        for i in 0..72 {
            if !noise.at(i) {
                prop_assert_eq!(out.image.pixels()[i].to_bits(), img.pixels()[i].to_bits());
            }
        }
        prop_assert_eq!(out.repaired + out.unrepaired, noise.count());
        prop_assert_eq!(out.image.clone(), out.image.quantized());
    }

    #[test]
    fn convolution_is_linear_in_its_input(
        a in -2.0f64..2.0,
        xs in prop::collection::vec(-1.0f64..1.0, 2 * 6 * 6),
        ys in prop::collection::vec(-1.0f64..1.0, 2 * 6 * 6),
        ws in prop::collection::vec(-1.0f64..1.0, 3 * 2 * 4 * 4),
    ) {
        let spec = ConvSpec::square(2, 3, 4, 2, 1);
        let w = Tensor::new(&[3, 2, 4, 4], ws).unwrap();
        let b = Tensor::zeros(&[3]);
        let x = Tensor::new(&[2, 6, 6], xs).unwrap();
        let y = Tensor::new(&[2, 6, 6], ys).unwrap();
        let mix = x.zip_map(&y, |p, q| a * p + q).unwrap();
        let lhs = conv2d_forward(&mix, &spec, &w, &b).unwrap();
        let cx = conv2d_forward(&x, &spec, &w, &b).unwrap();
        let cy = conv2d_forward(&y, &spec, &w, &b).unwrap();
        for ((l, p), q) in lhs.data().iter().zip(cx.data()).zip(cy.data()) {
            prop_assert!((l - (a * p + q)).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wear_is_monotone_and_composes(seed in 0u64..1000, a in 0u32..14, b in 0u32..14) {
        let spec = OutsoleSpec { width: 64, height: 160, block_count: 30, ..OutsoleSpec::with_seed(seed) };
        let o = generate_outsole(&spec).unwrap();
        let s0 = o.initial_state();
        let sa = advance_wear(&o, &s0, 2 * a).unwrap();
        let sab = advance_wear(&o, &sa, 2 * b).unwrap();
        prop_assert_eq!(&sab, &advance_wear(&o, &s0, 2 * (a + b)).unwrap());
        prop_assert!(sab.depth().iter().zip(sa.depth()).all(|(later, earlier)| later <= earlier));
        let img = o.render(&sab).unwrap();
        prop_assert_eq!(img.clone(), img.quantized());
    }
}
