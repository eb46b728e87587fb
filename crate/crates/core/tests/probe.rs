//! Scratch instrumentation for training dynamics. Not part of the suite.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use vqkan_gan::activations::{BasisConfig, BasisFamily};
use vqkan_gan::data::{resize_bilinear, Dataset};
use vqkan_gan::generator::{GeneratorConfig, GeneratorKind, GeneratorModel, LatentVector};
use vqkan_gan::training::{gen_gradient, GradientMode, TrainConfig, TrainState};
use vqkan_gan::metrics::{sliced_wasserstein, kid, ImageSet};

fn synthetic_digit_dataset(n: usize, width: usize, height: usize, seed: u64) -> Dataset {
    #[rustfmt::skip]
    const GLYPH: [u8; 64] = [
        0, 0, 1, 1, 1, 1, 0, 0,
        0, 1, 1, 0, 0, 1, 1, 0,
        0, 1, 1, 0, 0, 1, 1, 0,
        0, 1, 1, 0, 0, 1, 1, 0,
        0, 1, 1, 0, 0, 1, 1, 0,
        0, 1, 1, 0, 0, 1, 1, 0,
        0, 1, 1, 0, 0, 1, 1, 0,
        0, 0, 1, 1, 1, 1, 0, 0,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let brightness: f64 = rng.random_range(0.75..1.0);
            let base: Vec<f64> = GLYPH
                .iter()
                .map(|&g| {
                    if g == 1 {
                        (brightness * rng.random_range(0.9..1.1)).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            if (width, height) == (8, 8) {
                base
            } else {
                resize_bilinear(&base, 8, 8, width, height).unwrap()
            }
        })
        .collect();
    Dataset::new(images, vec![0u8; n], width, height).unwrap()
}

/// MNIST-like stand-in: thick ring drawn on a 24x24 canvas, randomly shifted
/// and brightness-scaled, then bilinearly downsampled to 8x8 (soft edges,
/// intermediate grays).
fn soft_digit_dataset(n: usize, width: usize, height: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let big = 24usize;
            let mut canvas = vec![0.0f64; big * big];
            let cx = 11.5 + rng.random_range(-1.5..1.5);
            let cy = 11.5 + rng.random_range(-1.5..1.5);
            let r_outer = rng.random_range(7.0..9.0);
            let r_inner = r_outer - rng.random_range(3.0..4.5);
            let brightness: f64 = rng.random_range(0.6..1.0);
            for y in 0..big {
                for x in 0..big {
                    let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
                    if d <= r_outer && d >= r_inner {
                        canvas[y * big + x] = brightness;
                    }
                }
            }
            resize_bilinear(&canvas, big, big, width, height).unwrap()
        })
        .collect();
    Dataset::new(images, vec![0u8; n], width, height).unwrap()
}

#[test]
#[ignore]
fn probe_soft_dataset_median() {
    use vqkan_gan::training::train;
    let dataset = soft_digit_dataset(200, 8, 8, 0xD16);
    // Show one example image.
    for y in 0..8 {
        let row: String = (0..8)
            .map(|x| {
                let p = dataset.images()[0][y * 8 + x];
                if p > 0.6 { '#' } else if p > 0.3 { '+' } else if p > 0.1 { '.' } else { ' ' }
            })
            .collect();
        println!("|{row}|");
    }
    let mut early = Vec::new();
    let mut late = Vec::new();
    for seed in [42u64, 2, 10] {
        let generator = GeneratorConfig {
            n_qubits: 5,
            n_ancilla: 1,
            depth: 6,
            n_layers: 1,
            n_patches: 4,
            patch_len: 16,
            basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
        };
        let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
        config.seed = seed;
        config.iterations = 500;
        let outcome = train(&config, &dataset).unwrap();
        let pts = outcome.log.eval_points();
        let swd10 = pts.iter().find(|(i, _)| *i == 10).unwrap().1.swd;
        let swd500 = pts.iter().find(|(i, _)| *i == 500).unwrap().1.swd;
        println!(
            "seed {seed}: SWD@10 {swd10:.4} -> SWD@500 {swd500:.4} ({:.1}%)",
            100.0 * swd500 / swd10
        );
        early.push(swd10);
        late.push(swd500);
        let kids: Vec<f64> = pts.iter().map(|(_, e)| e.kid).collect();
        println!("  KID head {:?} tail {:?}", &kids[..3], &kids[kids.len() - 3..]);
    }
    early.sort_by(|a, b| a.partial_cmp(b).unwrap());
    late.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("median SWD@10 {:.4} -> @500 {:.4} ratio {:.3}", early[1], late[1], late[1] / early[1]);
}

/// Mixed glyph shapes (ring, bar, diagonal, U) cycling like an unfiltered
/// digit stream, with seeded shift and brightness, downsampled to 8x8.
fn mixed_digit_dataset(n: usize, width: usize, height: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let big = 24usize;
    let images: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut canvas = vec![0.0f64; big * big];
            let dx: f64 = rng.random_range(-1.5..1.5);
            let dy: f64 = rng.random_range(-1.5..1.5);
            let brightness: f64 = rng.random_range(0.6..1.0);
            let thick: f64 = rng.random_range(3.0..4.5);
            let shape = k % 4;
            for y in 0..big {
                for x in 0..big {
                    let fx = x as f64 - (11.5 + dx);
                    let fy = y as f64 - (11.5 + dy);
                    let inside = match shape {
                        0 => {
                            let d = (fx * fx + fy * fy).sqrt();
                            d <= 8.0 && d >= 8.0 - thick
                        }
                        1 => fx.abs() <= thick / 2.0 && fy.abs() <= 9.0,
                        2 => (fx - fy).abs() <= thick / 1.4 && fx.abs() <= 8.0 && fy.abs() <= 8.0,
                        _ => {
                            (fy.abs() <= 9.0 && (fx.abs() - 6.0).abs() <= thick / 2.0)
                                || (fy >= 9.0 - thick && fy <= 9.0 && fx.abs() <= 6.0)
                        }
                    };
                    if inside {
                        canvas[y * big + x] = brightness;
                    }
                }
            }
            resize_bilinear(&canvas, big, big, width, height).unwrap()
        })
        .collect();
    Dataset::new(images, vec![0u8; n], width, height).unwrap()
}

/// Ring glyphs drawn on an adjustable canvas size; smaller canvases give
/// sharper, higher-contrast 8x8 images after the bilinear downsample.
fn sharp_ring_dataset(
    n: usize,
    width: usize,
    height: usize,
    seed: u64,
    big: usize,
    bright_lo: f64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = big as f64 / 24.0;
    let images: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut canvas = vec![0.0f64; big * big];
            let half = (big as f64 - 1.0) / 2.0;
            let cx = half + scale * rng.random_range(-1.5..1.5);
            let cy = half + scale * rng.random_range(-1.5..1.5);
            let r_outer = scale * rng.random_range(7.0..9.0);
            let r_inner = r_outer - scale * rng.random_range(3.0..4.5);
            let brightness: f64 = rng.random_range(bright_lo..1.0);
            for y in 0..big {
                for x in 0..big {
                    let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
                    if d <= r_outer && d >= r_inner {
                        canvas[y * big + x] = brightness;
                    }
                }
            }
            if big == width {
                canvas
            } else {
                resize_bilinear(&canvas, big, big, width, height).unwrap()
            }
        })
        .collect();
    Dataset::new(images, vec![0u8; n], width, height).unwrap()
}

/// Organic handwritten-zero stand-in: rotated ellipses with eccentricity,
/// angle-modulated stroke width, and a smooth Gaussian cross-section,
/// rendered directly at target resolution with subpixel centers.
fn organic_zero_dataset_b(
    n: usize,
    side: usize,
    seed: u64,
    stroke_scale: f64,
    bright: (f64, f64),
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = side as f64 / 8.0;
    let images: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let cx = s * (3.5 + rng.random_range(-0.6..0.6));
            let cy = s * (3.5 + rng.random_range(-0.6..0.6));
            let a = s * rng.random_range(2.1..3.0);
            let b = s * rng.random_range(1.7..2.7);
            let rot: f64 = rng.random_range(-0.6..0.6);
            let w0 = s * stroke_scale * rng.random_range(0.8..1.3);
            let w_mod = rng.random_range(0.0..0.35);
            let w_phase = rng.random_range(0.0..std::f64::consts::TAU);
            let brightness: f64 = rng.random_range(bright.0..bright.1);
            let (sin_r, cos_r) = rot.sin_cos();
            (0..side * side)
                .map(|idx| {
                    let px = (idx % side) as f64 - cx;
                    let py = (idx / side) as f64 - cy;
                    let u = cos_r * px + sin_r * py;
                    let v = -sin_r * px + cos_r * py;
                    let theta = v.atan2(u);
                    let r_pixel = (u * u + v * v).sqrt();
                    let denom = ((b * theta.cos()).powi(2) + (a * theta.sin()).powi(2)).sqrt();
                    let r_ring = a * b / denom.max(1e-9);
                    let w = w0 * (1.0 + w_mod * (theta + w_phase).sin());
                    let d = (r_pixel - r_ring) / w;
                    (brightness * (-d * d * 2.0).exp()).min(1.0)
                })
                .collect()
        })
        .collect();
    Dataset::new(images, vec![0u8; n], side, side).unwrap()
}

/// Dim organic rings with a few bright pen-pressure spots on the stroke:
/// low moments sit close to the generator's early reach while the bright
/// tail is heavy (high kurtosis).
fn spotted_zero_dataset(n: usize, side: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = side as f64 / 8.0;
    let images: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let cx = s * (3.5 + rng.random_range(-0.6..0.6));
            let cy = s * (3.5 + rng.random_range(-0.6..0.6));
            let a = s * rng.random_range(2.1..3.0);
            let b = s * rng.random_range(1.7..2.7);
            let rot: f64 = rng.random_range(-0.6..0.6);
            let w0 = s * 0.9 * rng.random_range(0.8..1.3);
            let brightness: f64 = rng.random_range(0.25..0.45);
            let n_spots = rng.random_range(2..=4);
            let spot_angles: Vec<f64> = (0..n_spots)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            let spot_vals: Vec<f64> = (0..n_spots)
                .map(|_| rng.random_range(0.85..1.0))
                .collect();
            let (sin_r, cos_r) = rot.sin_cos();
            (0..side * side)
                .map(|idx| {
                    let px = (idx % side) as f64 - cx;
                    let py = (idx / side) as f64 - cy;
                    let u = cos_r * px + sin_r * py;
                    let v = -sin_r * px + cos_r * py;
                    let theta = v.atan2(u);
                    let r_pixel = (u * u + v * v).sqrt();
                    let denom = ((b * theta.cos()).powi(2) + (a * theta.sin()).powi(2)).sqrt();
                    let r_ring = a * b / denom.max(1e-9);
                    let d = (r_pixel - r_ring) / w0;
                    let mut val = brightness * (-d * d * 2.0).exp();
                    for (angle, spot) in spot_angles.iter().zip(&spot_vals) {
                        let mut da = (theta - angle).abs();
                        if da > std::f64::consts::PI {
                            da = std::f64::consts::TAU - da;
                        }
                        let along = da * r_ring / s; // arc distance in 8x8 units
                        let radial = (r_pixel - r_ring) / s;
                        let dist2 = along * along + radial * radial;
                        val += spot * (-dist2 * 2.0).exp();
                    }
                    val.min(1.0)
                })
                .collect()
        })
        .collect();
    Dataset::new(images, vec![0u8; n], side, side).unwrap()
}

fn smooth_field(rng: &mut ChaCha8Rng, side: usize, amplitude: f64) -> Vec<f64> {
    let coarse: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..amplitude)).collect();
    resize_bilinear(&coarse, 3, 3, side, side).unwrap()
}

fn textured_zero_dataset(n: usize, side: usize, seed: u64, stroke: f64, amp: f64) -> Dataset {
    let base = organic_zero_dataset(n, side, seed, stroke);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF1E1D);
    let images: Vec<Vec<f64>> = base
        .images()
        .iter()
        .map(|img| {
            let field = smooth_field(&mut rng, side, amp);
            img.iter()
                .zip(&field)
                .map(|(&p, &f)| (p + f).min(1.0))
                .collect()
        })
        .collect();
    Dataset::new(images, vec![0u8; n], side, side).unwrap()
}

fn run_criterion6_stats(dataset: &Dataset, label: &str) {
    use vqkan_gan::training::train;
    let mut all_kids: Vec<Vec<f64>> = Vec::new();
    let mut early = Vec::new();
    let mut late = Vec::new();
    for seed in [42u64, 2, 10] {
        let generator = GeneratorConfig {
            n_qubits: 5,
            n_ancilla: 1,
            depth: 6,
            n_layers: 1,
            n_patches: 4,
            patch_len: 16,
            basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
        };
        let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
        config.seed = seed;
        config.iterations = 500;
        let outcome = train(&config, dataset).unwrap();
        let pts = outcome.log.eval_points();
        early.push(pts.iter().find(|(i, _)| *i == 10).unwrap().1.swd);
        late.push(pts.iter().find(|(i, _)| *i == 500).unwrap().1.swd);
        all_kids.push(pts.iter().map(|(_, e)| e.kid).collect());
    }
    early.sort_by(|a, b| a.partial_cmp(b).unwrap());
    late.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut windows = Vec::new();
    for w in 0..5 {
        let mut acc = 0.0;
        for point in 0..10 {
            let mut vals: Vec<f64> = all_kids.iter().map(|k| k[w * 10 + point]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            acc += vals[1];
        }
        windows.push(((acc / 10.0) * 10000.0).round() / 10000.0);
    }
    let monotone = windows.windows(2).all(|w| w[1] < w[0]);
    println!(
        "{label}: SWD ratio {:.3}  KID {windows:?}  monotone {monotone}",
        late[1] / early[1],
    );
}

fn param_ring_dataset(
    n: usize,
    side: usize,
    seed: u64,
    big: usize,
    radius: (f64, f64),
    stroke: (f64, f64),
    shift: f64,
    bright: (f64, f64),
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = big as f64 / 24.0;
    let images: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut canvas = vec![0.0f64; big * big];
            let half = (big as f64 - 1.0) / 2.0;
            let cx = half + scale * rng.random_range(-shift..shift);
            let cy = half + scale * rng.random_range(-shift..shift);
            let r_outer = scale * rng.random_range(radius.0..radius.1);
            let r_inner = r_outer - scale * rng.random_range(stroke.0..stroke.1);
            let brightness: f64 = rng.random_range(bright.0..bright.1);
            for y in 0..big {
                for x in 0..big {
                    let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
                    if d <= r_outer && d >= r_inner {
                        canvas[y * big + x] = brightness;
                    }
                }
            }
            if big == side {
                canvas
            } else {
                resize_bilinear(&canvas, big, big, side, side).unwrap()
            }
        })
        .collect();
    Dataset::new(images, vec![0u8; n], side, side).unwrap()
}

#[test]
#[ignore]
fn probe_canvas10_grid() {
    let cases: Vec<(&str, Dataset)> = vec![
        (
            "G1 baseline",
            param_ring_dataset(200, 8, 0xD16, 10, (7.0, 9.0), (3.0, 4.5), 1.5, (0.6, 1.0)),
        ),
        (
            "G2 thick",
            param_ring_dataset(200, 8, 0xD16, 10, (7.0, 9.0), (3.5, 5.0), 1.5, (0.6, 1.0)),
        ),
        (
            "G3 dimmer",
            param_ring_dataset(200, 8, 0xD16, 10, (7.0, 9.0), (3.0, 4.5), 1.5, (0.55, 0.95)),
        ),
        (
            "G4 shiftier",
            param_ring_dataset(200, 8, 0xD16, 10, (7.0, 9.0), (3.0, 4.5), 2.0, (0.6, 1.0)),
        ),
        (
            "G5 larger",
            param_ring_dataset(200, 8, 0xD16, 10, (7.5, 9.5), (3.0, 4.5), 1.5, (0.6, 1.0)),
        ),
        (
            "G6 canvas11 thick",
            param_ring_dataset(200, 8, 0xD16, 11, (7.0, 9.0), (3.5, 5.0), 1.5, (0.6, 1.0)),
        ),
    ];
    for (label, dataset) in &cases {
        run_criterion6_stats(dataset, label);
    }
}

#[test]
#[ignore]
fn probe_textured_and_stroke_sweep() {
    for &(stroke, amp) in &[(0.9f64, 0.15f64), (0.9, 0.25), (1.1, 0.2)] {
        let dataset = textured_zero_dataset(200, 8, 0xD16, stroke, amp);
        run_criterion6_stats(&dataset, &format!("textured stroke {stroke} amp {amp}"));
    }
    for &stroke in &[0.85f64, 0.95, 1.0, 1.05] {
        let dataset = organic_zero_dataset(200, 8, 0xD16, stroke);
        run_criterion6_stats(&dataset, &format!("organic stroke {stroke}"));
    }
}

#[test]
#[ignore]
fn probe_spotted() {
    use vqkan_gan::training::train;
    let dataset = spotted_zero_dataset(200, 8, 0xD16);
    for y in 0..8 {
        let mut line = String::new();
        for img in dataset.images().iter().take(4) {
            for x in 0..8 {
                let p = img[y * 8 + x];
                line.push(if p > 0.7 {
                    '#'
                } else if p > 0.4 {
                    '+'
                } else if p > 0.15 {
                    '.'
                } else {
                    ' '
                });
            }
            line.push('|');
        }
        println!("{line}");
    }
    let mut all_kids: Vec<Vec<f64>> = Vec::new();
    let mut early = Vec::new();
    let mut late = Vec::new();
    for seed in [42u64, 2, 10] {
        let generator = GeneratorConfig {
            n_qubits: 5,
            n_ancilla: 1,
            depth: 6,
            n_layers: 1,
            n_patches: 4,
            patch_len: 16,
            basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
        };
        let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
        config.seed = seed;
        config.iterations = 500;
        let outcome = train(&config, &dataset).unwrap();
        let pts = outcome.log.eval_points();
        early.push(pts.iter().find(|(i, _)| *i == 10).unwrap().1.swd);
        late.push(pts.iter().find(|(i, _)| *i == 500).unwrap().1.swd);
        all_kids.push(pts.iter().map(|(_, e)| e.kid).collect());
    }
    early.sort_by(|a, b| a.partial_cmp(b).unwrap());
    late.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut windows = Vec::new();
    for w in 0..5 {
        let mut acc = 0.0;
        for point in 0..10 {
            let mut vals: Vec<f64> = all_kids.iter().map(|k| k[w * 10 + point]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            acc += vals[1];
        }
        windows.push(((acc / 10.0) * 1000.0).round() / 1000.0);
    }
    let monotone = windows.windows(2).all(|w| w[1] < w[0]);
    println!(
        "spotted: SWD ratio {:.3}  KID {windows:?}  monotone {monotone}",
        late[1] / early[1],
    );
    for (i, seed) in [42u64, 2, 10].iter().enumerate() {
        let mut w: Vec<f64> = Vec::new();
        for win in 0..5 {
            let acc: f64 = (0..10).map(|p| all_kids[i][win * 10 + p]).sum();
            w.push(((acc / 10.0) * 1000.0).round() / 1000.0);
        }
        println!("  seed {seed}: {w:?}");
    }
}

#[test]
#[ignore]
fn probe_moment_distance() {
    use vqkan_gan::training::train;
    for &(stroke, lo, hi) in &[(0.6f64, 0.35f64, 0.65f64), (1.3, 0.8, 1.0), (0.6, 0.45, 0.8)] {
        let dataset = organic_zero_dataset_b(200, 8, 0xD16, stroke, (lo, hi));
        let rm: f64 = dataset.images()[..8]
            .iter()
            .flat_map(|im| im.iter())
            .sum::<f64>()
            / (8.0 * 64.0);
        let mut all_kids: Vec<Vec<f64>> = Vec::new();
        let mut early = Vec::new();
        let mut late = Vec::new();
        for seed in [42u64, 2, 10] {
            let generator = GeneratorConfig {
                n_qubits: 5,
                n_ancilla: 1,
                depth: 6,
                n_layers: 1,
                n_patches: 4,
                patch_len: 16,
                basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
            };
            let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
            config.seed = seed;
            config.iterations = 500;
            let outcome = train(&config, &dataset).unwrap();
            let pts = outcome.log.eval_points();
            early.push(pts.iter().find(|(i, _)| *i == 10).unwrap().1.swd);
            late.push(pts.iter().find(|(i, _)| *i == 500).unwrap().1.swd);
            all_kids.push(pts.iter().map(|(_, e)| e.kid).collect());
        }
        early.sort_by(|a, b| a.partial_cmp(b).unwrap());
        late.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut windows = Vec::new();
        for w in 0..5 {
            let mut acc = 0.0;
            for point in 0..10 {
                let mut vals: Vec<f64> = all_kids.iter().map(|k| k[w * 10 + point]).collect();
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                acc += vals[1];
            }
            windows.push(((acc / 10.0) * 1000.0).round() / 1000.0);
        }
        let monotone = windows.windows(2).all(|w| w[1] < w[0]);
        println!(
            "stroke {stroke} bright {lo}..{hi} (real mean {rm:.3}): SWD ratio {:.3}  KID {windows:?}  monotone {monotone}",
            late[1] / early[1],
        );
    }
}

fn organic_zero_dataset(
    n: usize,
    side: usize,
    seed: u64,
    stroke_scale: f64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = side as f64 / 8.0;
    let images: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let cx = s * (3.5 + rng.random_range(-0.6..0.6));
            let cy = s * (3.5 + rng.random_range(-0.6..0.6));
            let a = s * rng.random_range(2.1..3.0);
            let b = s * rng.random_range(1.7..2.7);
            let rot: f64 = rng.random_range(-0.6..0.6);
            let w0 = s * stroke_scale * rng.random_range(0.8..1.3);
            let w_mod = rng.random_range(0.0..0.35);
            let w_phase = rng.random_range(0.0..std::f64::consts::TAU);
            let brightness: f64 = rng.random_range(0.6..1.0);
            let (sin_r, cos_r) = rot.sin_cos();
            (0..side * side)
                .map(|idx| {
                    let px = (idx % side) as f64 - cx;
                    let py = (idx / side) as f64 - cy;
                    let u = cos_r * px + sin_r * py;
                    let v = -sin_r * px + cos_r * py;
                    let theta = v.atan2(u);
                    let r_pixel = (u * u + v * v).sqrt();
                    let denom = ((b * theta.cos()).powi(2) + (a * theta.sin()).powi(2)).sqrt();
                    let r_ring = a * b / denom.max(1e-9);
                    let w = w0 * (1.0 + w_mod * (theta + w_phase).sin());
                    let d = (r_pixel - r_ring) / w;
                    (brightness * (-d * d * 2.0).exp()).min(1.0)
                })
                .collect()
        })
        .collect();
    Dataset::new(images, vec![0u8; n], side, side).unwrap()
}

fn with_noise(dataset: &Dataset, amplitude: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images: Vec<Vec<f64>> = dataset
        .images()
        .iter()
        .map(|img| {
            img.iter()
                .map(|&p| (p + rng.random_range(0.0..amplitude)).min(1.0))
                .collect()
        })
        .collect();
    Dataset::new(images, dataset.labels().to_vec(), dataset.width(), dataset.height()).unwrap()
}

#[test]
#[ignore]
fn probe_organic_noise() {
    use vqkan_gan::training::train;
    for &noise in &[0.0f64, 0.1, 0.2] {
        let base = organic_zero_dataset(200, 8, 0xD16, 0.9);
        let dataset = if noise > 0.0 {
            with_noise(&base, noise, 0xA11CE)
        } else {
            base
        };
        let mut all_kids: Vec<Vec<f64>> = Vec::new();
        let mut early = Vec::new();
        let mut late = Vec::new();
        for seed in [42u64, 2, 10] {
            let generator = GeneratorConfig {
                n_qubits: 5,
                n_ancilla: 1,
                depth: 6,
                n_layers: 1,
                n_patches: 4,
                patch_len: 16,
                basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
            };
            let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
            config.seed = seed;
            config.iterations = 500;
            let outcome = train(&config, &dataset).unwrap();
            let pts = outcome.log.eval_points();
            early.push(pts.iter().find(|(i, _)| *i == 10).unwrap().1.swd);
            late.push(pts.iter().find(|(i, _)| *i == 500).unwrap().1.swd);
            all_kids.push(pts.iter().map(|(_, e)| e.kid).collect());
        }
        early.sort_by(|a, b| a.partial_cmp(b).unwrap());
        late.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (label, reduce) in [
            ("median", 0usize),
            ("mean", 1usize),
        ] {
            let mut windows = Vec::new();
            for w in 0..5 {
                let mut acc = 0.0;
                for point in 0..10 {
                    let mut vals: Vec<f64> =
                        all_kids.iter().map(|k| k[w * 10 + point]).collect();
                    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    acc += if reduce == 0 {
                        vals[1]
                    } else {
                        vals.iter().sum::<f64>() / 3.0
                    };
                }
                windows.push(acc / 10.0);
            }
            let monotone = windows.windows(2).all(|w| w[1] < w[0]);
            println!(
                "noise {noise} [{label}]: SWD ratio {:.3}  KID windows {:?}  monotone {monotone}",
                late[1] / early[1],
                windows
                    .iter()
                    .map(|v| (v * 1000.0).round() / 1000.0)
                    .collect::<Vec<_>>()
            );
        }
        // Per-seed windows to see cycling phase.
        for (i, seed) in [42u64, 2, 10].iter().enumerate() {
            let mut windows = Vec::new();
            for w in 0..5 {
                let acc: f64 = (0..10).map(|p| all_kids[i][w * 10 + p]).sum();
                windows.push(((acc / 10.0) * 1000.0).round() / 1000.0);
            }
            println!("  noise {noise} seed {seed}: {windows:?}");
        }
    }
}

#[test]
#[ignore]
fn probe_overshoot() {
    let dataset = organic_zero_dataset(200, 8, 0xD16, 0.9);
    let real_mean: f64 = dataset.images()[..8]
        .iter()
        .flat_map(|im| im.iter())
        .sum::<f64>()
        / (8.0 * 64.0);
    let real_sq: f64 = dataset.images()[..8]
        .iter()
        .flat_map(|im| im.iter())
        .map(|p| p * p)
        .sum::<f64>()
        / (8.0 * 64.0);
    println!("real mean {real_mean:.4} second moment {real_sq:.4}");

    let generator = GeneratorConfig {
        n_qubits: 5,
        n_ancilla: 1,
        depth: 6,
        n_layers: 1,
        n_patches: 4,
        patch_len: 16,
        basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
    };
    let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
    config.seed = 42;
    config.iterations = 500;
    let mut state = TrainState::new(config.clone()).unwrap();
    let mut latent_rng = ChaCha8Rng::seed_from_u64(4242);
    let eval_latents: Vec<LatentVector> = (0..8)
        .map(|_| LatentVector::sample(&mut latent_rng, 5))
        .collect();
    for iter in 1..=500usize {
        let real = &dataset.images()[(iter - 1) % dataset.len()];
        let z = LatentVector::sample(&mut latent_rng, 5);
        state.step(real, &z).unwrap();
        if iter % 50 == 0 {
            let fakes: Vec<Vec<f64>> = eval_latents
                .iter()
                .map(|z| state.model().generate_image(z).unwrap().pixels)
                .collect();
            let fm: f64 =
                fakes.iter().flat_map(|im| im.iter()).sum::<f64>() / (8.0 * 64.0);
            let fsq: f64 = fakes
                .iter()
                .flat_map(|im| im.iter())
                .map(|p| p * p)
                .sum::<f64>()
                / (8.0 * 64.0);
            println!("iter {iter:4}: fake mean {fm:.4} second moment {fsq:.4}");
        }
    }
    // Final images, coarse render.
    let fakes: Vec<Vec<f64>> = eval_latents
        .iter()
        .map(|z| state.model().generate_image(z).unwrap().pixels)
        .collect();
    for y in 0..8 {
        let mut line = String::new();
        for img in fakes.iter().take(4) {
            for x in 0..8 {
                let p = img[y * 8 + x];
                line.push(if p > 0.6 {
                    '#'
                } else if p > 0.3 {
                    '+'
                } else if p > 0.1 {
                    '.'
                } else {
                    ' '
                });
            }
            line.push('|');
        }
        println!("{line}");
    }
    println!("--- real ---");
    for y in 0..8 {
        let mut line = String::new();
        for img in dataset.images().iter().take(4) {
            for x in 0..8 {
                let p = img[y * 8 + x];
                line.push(if p > 0.6 {
                    '#'
                } else if p > 0.3 {
                    '+'
                } else if p > 0.1 {
                    '.'
                } else {
                    ' '
                });
            }
            line.push('|');
        }
        println!("{line}");
    }
}

#[test]
#[ignore]
fn probe_organic_sweep() {
    use vqkan_gan::training::train;
    for &stroke in &[0.5f64, 0.7, 0.9] {
        let dataset = organic_zero_dataset(200, 8, 0xD16, stroke);
        let mut all_kids: Vec<Vec<f64>> = Vec::new();
        let mut early = Vec::new();
        let mut late = Vec::new();
        for seed in [42u64, 2, 10] {
            let generator = GeneratorConfig {
                n_qubits: 5,
                n_ancilla: 1,
                depth: 6,
                n_layers: 1,
                n_patches: 4,
                patch_len: 16,
                basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
            };
            let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
            config.seed = seed;
            config.iterations = 500;
            let outcome = train(&config, &dataset).unwrap();
            let pts = outcome.log.eval_points();
            early.push(pts.iter().find(|(i, _)| *i == 10).unwrap().1.swd);
            late.push(pts.iter().find(|(i, _)| *i == 500).unwrap().1.swd);
            all_kids.push(pts.iter().map(|(_, e)| e.kid).collect());
        }
        early.sort_by(|a, b| a.partial_cmp(b).unwrap());
        late.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut windows = Vec::new();
        for w in 0..5 {
            let mut acc = 0.0;
            for point in 0..10 {
                let mut vals: Vec<f64> = all_kids.iter().map(|k| k[w * 10 + point]).collect();
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                acc += vals[1];
            }
            windows.push(acc / 10.0);
        }
        let monotone = windows.windows(2).all(|w| w[1] < w[0]);
        println!(
            "stroke {stroke}: SWD ratio {:.3}  KID windows {:?}  monotone {monotone}",
            late[1] / early[1],
            windows
                .iter()
                .map(|v| (v * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        );
    }
}

#[test]
#[ignore]
fn probe_variation_sweep() {
    use vqkan_gan::training::train;
    for &(level, lo) in &[
        (10usize, 0.5f64),
        (10, 0.6),
        (10, 0.7),
        (11, 0.5),
        (11, 0.6),
        (11, 0.7),
    ] {
        let dataset = sharp_ring_dataset(200, 8, 8, 0xD16, level, lo);
        let mut all_kids: Vec<Vec<f64>> = Vec::new();
        let mut early = Vec::new();
        let mut late = Vec::new();
        for seed in [42u64, 2, 10] {
            let generator = GeneratorConfig {
                n_qubits: 5,
                n_ancilla: 1,
                depth: 6,
                n_layers: 1,
                n_patches: 4,
                patch_len: 16,
                basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
            };
            let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
            config.seed = seed;
            config.iterations = 500;
            let outcome = train(&config, &dataset).unwrap();
            let pts = outcome.log.eval_points();
            early.push(pts.iter().find(|(i, _)| *i == 10).unwrap().1.swd);
            late.push(pts.iter().find(|(i, _)| *i == 500).unwrap().1.swd);
            all_kids.push(pts.iter().map(|(_, e)| e.kid).collect());
        }
        early.sort_by(|a, b| a.partial_cmp(b).unwrap());
        late.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut windows = Vec::new();
        for w in 0..5 {
            let mut acc = 0.0;
            for point in 0..10 {
                let mut vals: Vec<f64> = all_kids.iter().map(|k| k[w * 10 + point]).collect();
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                acc += vals[1];
            }
            windows.push(acc / 10.0);
        }
        let monotone = windows.windows(2).all(|w| w[1] < w[0]);
        println!(
            "level {level} lo {lo}: SWD ratio {:.3}  KID windows {:?}  monotone {monotone}",
            late[1] / early[1],
            windows.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        );
    }
}

#[test]
#[ignore]
fn probe_mixed_dataset() {
    use vqkan_gan::training::train;
    let dataset = mixed_digit_dataset(200, 8, 8, 0xD16);
    for s in 0..4 {
        for y in 0..8 {
            let row: String = (0..8)
                .map(|x| {
                    let p = dataset.images()[s][y * 8 + x];
                    if p > 0.6 { '#' } else if p > 0.3 { '+' } else if p > 0.1 { '.' } else { ' ' }
                })
                .collect();
            println!("|{row}|");
        }
        println!("----------");
    }
    let mut all_kids: Vec<Vec<f64>> = Vec::new();
    let mut early = Vec::new();
    let mut late = Vec::new();
    for seed in [42u64, 2, 10] {
        let generator = GeneratorConfig {
            n_qubits: 5,
            n_ancilla: 1,
            depth: 6,
            n_layers: 1,
            n_patches: 4,
            patch_len: 16,
            basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
        };
        let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
        config.seed = seed;
        config.iterations = 500;
        let outcome = train(&config, &dataset).unwrap();
        let pts = outcome.log.eval_points();
        let swd10 = pts.iter().find(|(i, _)| *i == 10).unwrap().1.swd;
        let swd500 = pts.iter().find(|(i, _)| *i == 500).unwrap().1.swd;
        println!(
            "seed {seed}: SWD@10 {swd10:.4} -> SWD@500 {swd500:.4} ({:.1}%)",
            100.0 * swd500 / swd10
        );
        early.push(swd10);
        late.push(swd500);
        all_kids.push(pts.iter().map(|(_, e)| e.kid).collect());
    }
    early.sort_by(|a, b| a.partial_cmp(b).unwrap());
    late.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "median SWD@10 {:.4} -> @500 {:.4} ratio {:.3}",
        early[1],
        late[1],
        late[1] / early[1]
    );
    // Window means: median across seeds, then mean across the 10 points.
    for stat in ["median", "mean"] {
        let mut windows = Vec::new();
        for w in 0..5 {
            let mut acc = 0.0;
            for point in 0..10 {
                let idx = w * 10 + point;
                let mut vals: Vec<f64> = all_kids.iter().map(|k| k[idx]).collect();
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                acc += if stat == "median" {
                    vals[1]
                } else {
                    vals.iter().sum::<f64>() / 3.0
                };
            }
            windows.push(acc / 10.0);
        }
        println!("{stat} KID windows: {windows:?}");
    }
}

#[test]
#[ignore]
fn probe_kid_curves() {
    use vqkan_gan::training::train;
    let dataset = soft_digit_dataset(200, 8, 8, 0xD16);
    for seed in [42u64, 2, 10] {
        let generator = GeneratorConfig {
            n_qubits: 5,
            n_ancilla: 1,
            depth: 6,
            n_layers: 1,
            n_patches: 4,
            patch_len: 16,
            basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
        };
        let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
        config.seed = seed;
        config.iterations = 1000;
        let outcome = train(&config, &dataset).unwrap();
        let pts = outcome.log.eval_points();
        let kids: Vec<String> = pts
            .iter()
            .map(|(i, e)| format!("{}:{:.3}", i, e.kid))
            .collect();
        println!("seed {seed} KID: {}", kids.join(" "));
        let swds: Vec<String> = pts
            .iter()
            .map(|(i, e)| format!("{}:{:.3}", i, e.swd))
            .collect();
        println!("seed {seed} SWD: {}", swds.join(" "));
    }
}

#[test]
#[ignore]
fn probe_dynamics() {
    let dataset = synthetic_digit_dataset(200, 8, 8, 0xD16);
    let generator = GeneratorConfig {
        n_qubits: 5,
        n_ancilla: 1,
        depth: 6,
        n_layers: 1,
        n_patches: 4,
        patch_len: 16,
        basis: BasisConfig::with_trial(BasisFamily::Rbf, 8, 0),
    };
    let mut config = TrainConfig::new(GeneratorKind::Vqkan, generator);
    config.seed = 42;
    config.iterations = 2000;

    let mut state = TrainState::new(config.clone()).unwrap();
    let mut latent_rng = ChaCha8Rng::seed_from_u64(999);
    // replicate train() latent derivation roughly: just use a fresh stream
    let eval_latents: Vec<LatentVector> = (0..8)
        .map(|_| LatentVector::sample(&mut latent_rng, 5))
        .collect();
    let real_eval = ImageSet::new(dataset.images()[..8].to_vec()).unwrap();

    let t0 = Instant::now();
    for iter in 1..=config.iterations {
        let real = &dataset.images()[(iter - 1) % dataset.len()];
        let z = LatentVector::sample(&mut latent_rng, 5);
        let rec = state.step(real, &z).unwrap();
        if iter % 100 == 0 || iter == 1 || iter == 10 {
            let d_fake = state
                .disc()
                .forward(&state.model().generate_image(&z).unwrap().pixels)
                .unwrap();
            let grads = gen_gradient(
                state.model(),
                state.disc(),
                &z,
                GradientMode::FiniteDifference,
                1e-3,
            )
            .unwrap();
            let gnorm: f64 = grads
                .iter()
                .flatten()
                .map(|g| g * g)
                .sum::<f64>()
                .sqrt();
            let cnorm: f64 = (0..4)
                .flat_map(|p| state.model().patch_coefficients(p).to_vec())
                .map(|c| c * c)
                .sum::<f64>()
                .sqrt();
            let fakes: Vec<Vec<f64>> = eval_latents
                .iter()
                .map(|z| state.model().generate_image(z).unwrap().pixels)
                .collect();
            let fs = ImageSet::new(fakes).unwrap();
            let swd = sliced_wasserstein(&fs, &real_eval, 50, 12345).unwrap();
            let k = kid(&fs, &real_eval).unwrap();
            println!(
                "iter {iter:5}  L_D {:8.4}  l_G {:8.4}  D(fake) {:9.6}  |g| {gnorm:9.5}  |c| {cnorm:8.4}  SWD {swd:.4}  KID {k:+.5}  ({:.1}s)",
                rec.loss_disc,
                rec.loss_gen,
                d_fake,
                t0.elapsed().as_secs_f64()
            );
        }
    }
}
