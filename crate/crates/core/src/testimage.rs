//! Deterministic synthetic inputs: JPEG images and mixed-size file corpora.

use std::f64::consts::TAU;

use image::codecs::jpeg::JpegEncoder;
use image::{ExtendedColorType, ImageEncoder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Encodes a smooth colour scene with a few shapes and mild noise as a
/// baseline JPEG. The same arguments always give the same bytes.
pub fn synthetic_jpeg(width: u32, height: u32, seed: u64, quality: u8) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (fx, fy): (f64, f64) = (rng.random_range(0.5..3.0), rng.random_range(0.5..3.0));
    let phase: f64 = rng.random_range(0.0..TAU);
    let discs: Vec<(f64, f64, f64, [f64; 3])> = (0..4)
        .map(|_| {
            (
                rng.random_range(0.0..width as f64),
                rng.random_range(0.0..height as f64),
                rng.random_range(4.0..(width.min(height) as f64 / 3.0).max(5.0)),
                [
                    rng.random_range(0.0..255.0),
                    rng.random_range(0.0..255.0),
                    rng.random_range(0.0..255.0),
                ],
            )
        })
        .collect();
    let mut pixels = Vec::with_capacity((width * height * 3) as usize);
    for y in 0..height {
        for x in 0..width {
            let u = x as f64 / width as f64;
            let v = y as f64 / height as f64;
            let mut rgb = [
                128.0 + 90.0 * (fx * TAU * u + phase).sin(),
                128.0 + 90.0 * (fy * TAU * v).cos(),
                255.0 * (u + v) / 2.0,
            ];
            for &(cx, cy, r, col) in &discs {
                if (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) < r * r {
                    rgb = col;
                }
            }
            for c in rgb {
                let noise: f64 = rng.random_range(-6.0..6.0);
                pixels.push((c + noise).clamp(0.0, 255.0) as u8);
            }
        }
    }
    let mut out = Vec::new();
    JpegEncoder::new_with_quality(&mut out, quality)
        .write_image(&pixels, width, height, ExtendedColorType::Rgb8)
        .expect("in-memory JPEG encoding");
    out
}

/// Seeded random bytes.
pub fn random_bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0u8; len];
    rng.fill(&mut out[..]);
    out
}

/// `count` named files of mixed sizes whose total stays within `budget`
/// bytes. Sizes are spread roughly geometrically.
pub fn mixed_corpus(count: usize, budget: usize, seed: u64) -> Vec<(String, Vec<u8>)> {
    let weights: Vec<f64> = (0..count).map(|i| 1.6f64.powi(i as i32)).collect();
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let len = ((budget as f64 * w / total) as usize).max(1);
            (
                format!("file{i:02}.bin"),
                random_bytes(len, seed.wrapping_add(i as u64)),
            )
        })
        .collect()
}
