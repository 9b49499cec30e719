use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wearcast_core::denoise::*;
use wearcast_core::metrics::{ssim, SsimWindow};
use wearcast_core::synth::{add_noise, generate_outsole, NoiseSpec, OutsoleSpec};
use wearcast_core::Image;

/// Per-pixel mean over the window with edge replication, by direct loops.
fn brute_threshold(img: &Image, window: usize, offset: f64) -> BinaryMask {
    let (w, h) = img.dims();
    let r = (window / 2) as isize;
    BinaryMask::from_fn(w, h, |x, y| {
        let mut s = 0.0f64;
        for dy in -r..=r {
            for dx in -r..=r {
                let sx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                let sy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                s += img.get(sx, sy) as f64;
            }
        }
        img.get(x, y) as f64 > s / (window * window) as f64 + offset
    })
}

#[test]
fn half_split_threshold_matches_brute_force() {
    let img = Image::from_fn(8, 8, |x, _| if x < 4 { 0.0 } else { 1.0 });
    let fast = adaptive_threshold(&img, 3, 0.05).unwrap();
    assert_eq!(fast, brute_threshold(&img, 3, 0.05));
    // Only the bright column touching the edge exceeds its local mean.
    for y in 0..8 {
        for x in 0..8 {
            assert_eq!(fast.get(x, y), x == 4, "({x}, {y})");
        }
    }
}

#[test]
fn gradient_with_zero_offset_is_about_half_foreground() {
    let img = Image::from_fn(16, 16, |x, y| ((x * 16 + y) as f32 * 0.37).sin() * 0.5 + 0.5);
    let fast = adaptive_threshold(&img, 5, 0.0).unwrap();
    assert_eq!(fast, brute_threshold(&img, 5, 0.0));
    let share = fast.count() as f64 / 256.0;
    assert!((0.3..0.7).contains(&share), "{share}");
}

#[test]
fn roi_filter_keeps_only_large_blobs() {
    let mut m = BinaryMask::empty(10, 10);
    for y in 1..3 {
        for x in 1..6 {
            m.set(x, y, true);
        }
    }
    for (x, y) in [(7, 7), (8, 8), (9, 7)] {
        m.set(x, y, true);
    }
    let kept = roi_filter(&m, 5).unwrap();
    // Brute force: a pixel survives iff its 8-connected flood fill reaches 5 pixels.
    let area = |x0: usize, y0: usize| -> usize {
        let mut seen = vec![false; 100];
        let mut stack = vec![(x0, y0)];
        seen[y0 * 10 + x0] = true;
        let mut n = 0;
        while let Some((x, y)) = stack.pop() {
            n += 1;
            for ny in y.saturating_sub(1)..=(y + 1).min(9) {
                for nx in x.saturating_sub(1)..=(x + 1).min(9) {
                    if m.get(nx, ny) && !seen[ny * 10 + nx] {
                        seen[ny * 10 + nx] = true;
                        stack.push((nx, ny));
                    }
                }
            }
        }
        n
    };
    for y in 0..10 {
        for x in 0..10 {
            assert_eq!(kept.get(x, y), m.get(x, y) && area(x, y) >= 5);
        }
    }
    assert_eq!(kept.count(), 10);
    assert_eq!(roi_filter(&m, 1).unwrap(), m);
    assert!(roi_filter(&BinaryMask::from_fn(4, 4, |x, y| x == 1 && y < 3), 4).unwrap().is_empty());
}

#[test]
fn closing_contains_the_original_on_random_masks() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..50 {
        let density = rng.gen_range(0.05..0.6);
        let m = BinaryMask::from_fn(16, 16, |_, _| rng.gen_bool(density));
        for r in 1..=2 {
            let closed = erode(&dilate(&m, r).unwrap(), r).unwrap();
            assert_eq!(m.difference(&closed).unwrap().count(), 0);
            assert_eq!(close(&m, r).unwrap(), closed);
        }
    }
    let mut one = BinaryMask::empty(5, 5);
    one.set(2, 2, true);
    assert_eq!(dilate(&one, 1).unwrap(), BinaryMask::from_fn(5, 5, |x, y| (1..=3).contains(&x) && (1..=3).contains(&y)));
    assert!(erode(&BinaryMask::empty(5, 5), 1).unwrap().is_empty());
    assert!(dilate(&BinaryMask::empty(5, 5), 1).unwrap().is_empty());
}

fn map_with(noise: BinaryMask, labels: Vec<u32>, blocks: usize) -> NoiseMap {
    let (w, h) = noise.dims();
    NoiseMap {
        foreground: noise.clone(),
        candidates: noise.clone(),
        print: BinaryMask::empty(w, h),
        noise,
        block_labels: labels,
        block_count: blocks,
    }
}

#[test]
fn empty_map_is_identity_and_single_pixel_takes_the_surrounding_value() {
    let img = Image::from_fn(7, 7, |x, y| ((x * 7 + y) % 5) as f32 / 5.0).quantized();
    let empty = map_with(BinaryMask::empty(7, 7), vec![1; 49], 1);
    assert_eq!(denoise(&img, &empty, 3).unwrap().image, img);

    let mut flat = Image::filled(7, 7, 0.6).quantized();
    flat.set(3, 3, 0.0);
    let mut noise = BinaryMask::empty(7, 7);
    noise.set(3, 3, true);
    let out = denoise(&flat, &map_with(noise, vec![1; 49], 1), 3).unwrap();
    assert_eq!(out.image, Image::filled(7, 7, 0.6).quantized());
    assert_eq!((out.repaired, out.unrepaired), (1, 0));
}

#[test]
fn a_fibre_across_two_blocks_is_repaired_from_each_block() {
    // Block 1 (left, value 0.2) and block 2 (right, value 0.8); a horizontal
    // fibre crosses both.
    let (w, h) = (10, 6);
    let labels: Vec<u32> = (0..w * h).map(|i| if i % w < 5 { 1 } else { 2 }).collect();
    let clean = Image::from_fn(w, h, |x, _| if x < 5 { 0.2 } else { 0.8 }).quantized();
    let mut img = clean.clone();
    let mut noise = BinaryMask::empty(w, h);
    for x in 0..w {
        img.set(x, 2, 0.0);
        noise.set(x, 2, true);
    }
    let out = denoise(&img, &map_with(noise.clone(), labels.clone(), 2), 5).unwrap();
    // Brute force: the mean of same-label clean pixels in the 5×5 window.
    for x in 0..w {
        let mut s = 0.0f64;
        let mut n = 0;
        for y in 0..=4usize {
            for nx in x.saturating_sub(2)..=(x + 2).min(w - 1) {
                let j = y * w + nx;
                if !noise.at(j) && labels[j] == labels[2 * w + x] {
                    s += img.pixels()[j] as f64;
                    n += 1;
                }
            }
        }
        let expect = Image::filled(1, 1, (s / n as f64) as f32).quantized().get(0, 0);
        assert_eq!(out.image.get(x, 2), expect);
        assert_eq!(out.image.get(x, 2), clean.get(x, 2));
    }
    for i in (0..w * h).filter(|&i| !noise.at(i)) {
        assert_eq!(out.image.pixels()[i].to_bits(), img.pixels()[i].to_bits());
    }
}

#[test]
fn far_donors_and_fully_noisy_blocks() {
    let (w, h) = (9, 1);
    let mut labels = vec![1u32; w * h];
    labels[8] = 2;
    let img = Image::from_fn(w, h, |x, _| if x == 0 { 0.4 } else { 0.0 }).quantized();
    let noise = BinaryMask::from_fn(w, h, |x, _| x > 0);
    let out = denoise(&img, &map_with(noise, labels, 2), 3).unwrap();
    // Pixels 1..=7 borrow the only clean pixel of block 1; block 2 has none.
    assert!((1..8).all(|x| out.image.get(x, 0) == img.get(0, 0)));
    assert_eq!(out.image.get(8, 0), 0.0);
    assert_eq!((out.repaired, out.unrepaired), (7, 1));
    assert!(denoise(&img, &map_with(BinaryMask::empty(w, h), vec![1; 9], 1), 4).is_err());
}

#[test]
fn background_image_has_an_empty_noise_map() {
    let map = build_noise_map(&Image::filled(64, 64, 0.15), &DenoiseParams::for_dims(64, 64)).unwrap();
    assert!(map.noise.is_empty());
    assert_eq!(map.block_count, 0);
    assert!(map.block_labels.iter().all(|&l| l == 0));
}

#[test]
fn synthetic_prints_clean_and_noisy() {
    let o = generate_outsole(&OutsoleSpec::with_seed(31)).unwrap();
    let params = DenoiseParams::default();
    for week in [4, 24, 48] {
        let clean = o.render(&o.state_at(week).unwrap()).unwrap();
        let clean_map = build_noise_map(&clean, &params).unwrap();
        assert!(clean_map.coverage() < 0.01, "week {week}: {}", clean_map.coverage());

        let fibres_only = NoiseSpec {
            blobs: 0,
            bubbles: 0,
            ..NoiseSpec::default()
        };
        let (noisy, truth) = add_noise(&clean, &fibres_only, week as u64).unwrap();
        let (out, map) = denoise_image(&noisy, &params).unwrap();
        let hit = map.noise.overlap(&truth) as f64 / truth.count() as f64;
        assert!(hit >= 0.8, "week {week}: {hit}");
        assert_eq!(map.noise.difference(&map.foreground).unwrap().count(), 0);
        let before = ssim(&noisy, &clean, SsimWindow::Sliding(8)).unwrap();
        let after = ssim(&out.image, &clean, SsimWindow::Sliding(8)).unwrap();
        assert!(after > before);

        let (again, _) = denoise_image(&out.image, &params).unwrap();
        let changed = again.image.pixels().iter().zip(out.image.pixels()).filter(|(a, b)| a != b).count();
        assert!((changed as f64) < 0.005 * clean.pixels().len() as f64);
    }
}
