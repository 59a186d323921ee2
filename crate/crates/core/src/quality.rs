//! Image quality of retrieved files: PSNR over decoded 8-bit pixels and a
//! loss figure in dB relative to a reference cap.

use std::io::Cursor;
use std::panic::{catch_unwind, AssertUnwindSafe};

use image::{DynamicImage, ImageFormat, ImageReader, Limits};

use crate::error::{Error, Result};

/// Reference PSNR that an undamaged retrieval is measured against.
pub const DEFAULT_REF_DB: f64 = 50.0;

/// Decoded 8-bit image, interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelBuffer {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<u8>,
}

impl PixelBuffer {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::Argument(format!(
                "pixel buffer has {} bytes, expected {expected}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }
}

/// Peak signal-to-noise ratio in dB over all samples of all channels.
/// Identical buffers give `f64::INFINITY`.
pub fn psnr(a: &PixelBuffer, b: &PixelBuffer) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::Argument(format!(
            "image shapes differ: {}x{}x{} vs {}x{}x{}",
            a.width, a.height, a.channels, b.width, b.height, b.channels
        )));
    }
    if a.data.is_empty() {
        return Ok(f64::INFINITY);
    }
    let sse: u64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / a.data.len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}

/// Outcome of evaluating one retrieved file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QualityResult {
    Decoded { loss_db: f64, psnr_db: f64 },
    Undecodable,
}

impl QualityResult {
    /// A decoded result with the given loss against [`DEFAULT_REF_DB`].
    pub fn loss(loss_db: f64) -> Self {
        QualityResult::Decoded {
            loss_db,
            psnr_db: DEFAULT_REF_DB - loss_db,
        }
    }

    pub fn loss_db(&self) -> Option<f64> {
        match self {
            QualityResult::Decoded { loss_db, .. } => Some(*loss_db),
            QualityResult::Undecodable => None,
        }
    }

    pub fn is_undecodable(&self) -> bool {
        matches!(self, QualityResult::Undecodable)
    }

    /// Orders results by damage; undecodable is worst.
    pub fn sort_key(&self) -> f64 {
        self.loss_db().unwrap_or(f64::INFINITY)
    }
}

fn limits_for(max_pixels: u64) -> Limits {
    let mut limits = Limits::default();
    limits.max_alloc = Some((max_pixels * 4).max(1 << 20));
    limits
}

fn to_buffer(img: DynamicImage) -> PixelBuffer {
    let (width, height) = (img.width(), img.height());
    if img.color().has_color() {
        PixelBuffer {
            width,
            height,
            channels: 3,
            data: img.into_rgb8().into_raw(),
        }
    } else {
        PixelBuffer {
            width,
            height,
            channels: 1,
            data: img.into_luma8().into_raw(),
        }
    }
}

fn decode_with_limits(bytes: &[u8], limits: Limits) -> Result<PixelBuffer> {
    let decoded = catch_unwind(AssertUnwindSafe(|| {
        let mut reader = ImageReader::with_format(Cursor::new(bytes), ImageFormat::Jpeg);
        reader.limits(limits);
        reader.decode()
    }));
    match decoded {
        Ok(Ok(img)) => Ok(to_buffer(img)),
        Ok(Err(e)) => Err(Error::Image(e.to_string())),
        Err(_) => Err(Error::Image("decoder panicked".into())),
    }
}

/// Decodes a JPEG to 8-bit gray or RGB.
pub fn decode_jpeg(bytes: &[u8]) -> Result<PixelBuffer> {
    decode_with_limits(bytes, limits_for(64 << 20))
}

/// Compares a retrieved file against its original.
///
/// Byte-identical files lose nothing. A retrieved file that fails to decode
/// or decodes to a different shape is [`QualityResult::Undecodable`].
/// Otherwise the loss is `max(0, ref_db - psnr)`.
pub fn quality_loss(original: &[u8], retrieved: &[u8], ref_db: f64) -> Result<QualityResult> {
    let reference =
        decode_jpeg(original).map_err(|e| Error::Argument(format!("original image does not decode: {e}")))?;
    Ok(quality_against(&reference, original, retrieved, ref_db))
}

/// [`quality_loss`] with the original already decoded.
pub fn quality_against(reference: &PixelBuffer, original: &[u8], retrieved: &[u8], ref_db: f64) -> QualityResult {
    if original == retrieved {
        return QualityResult::Decoded {
            loss_db: 0.0,
            psnr_db: f64::INFINITY,
        };
    }
    // a corrupted header can claim a huge frame; cap decoding near the
    // original size
    let budget = reference.width as u64 * reference.height as u64 * 4;
    let Ok(decoded) = decode_with_limits(retrieved, limits_for(budget)) else {
        return QualityResult::Undecodable;
    };
    if !decoded.same_shape(reference) {
        return QualityResult::Undecodable;
    }
    let p = psnr(reference, &decoded).expect("shapes checked");
    QualityResult::Decoded {
        loss_db: (ref_db - p).max(0.0),
        psnr_db: p,
    }
}

/// A reusable quality function for one original file, suitable for bit-flip
/// profiling.
pub struct QualityProbe {
    original: Vec<u8>,
    reference: PixelBuffer,
    ref_db: f64,
}

impl QualityProbe {
    pub fn new(original: &[u8], ref_db: f64) -> Result<Self> {
        let reference =
            decode_jpeg(original).map_err(|e| Error::Argument(format!("original image does not decode: {e}")))?;
        Ok(Self {
            original: original.to_vec(),
            reference,
            ref_db,
        })
    }

    pub fn evaluate(&self, retrieved: &[u8]) -> QualityResult {
        quality_against(&self.reference, &self.original, retrieved, self.ref_db)
    }

    pub fn original(&self) -> &[u8] {
        &self.original
    }
}

/// Mean loss over decodable results and the undecodable fraction, kept
/// separate so failures are never averaged in.
pub fn summarize(results: &[QualityResult]) -> (Option<f64>, f64) {
    let losses: Vec<f64> = results.iter().filter_map(QualityResult::loss_db).collect();
    let mean = if losses.is_empty() {
        None
    } else {
        Some(losses.iter().sum::<f64>() / losses.len() as f64)
    };
    let failed = results.len() - losses.len();
    let rate = if results.is_empty() {
        0.0
    } else {
        failed as f64 / results.len() as f64
    };
    (mean, rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testimage::synthetic_jpeg;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identical_buffers_are_infinite() {
        let a = PixelBuffer::new(2, 2, 1, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn black_vs_white_pixel_is_zero_db() {
        let a = PixelBuffer::new(1, 1, 1, vec![0]).unwrap();
        let b = PixelBuffer::new(1, 1, 1, vec![255]).unwrap();
        assert_eq!(psnr(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = PixelBuffer::new(1, 2, 1, vec![0, 0]).unwrap();
        let b = PixelBuffer::new(2, 1, 1, vec![0, 0]).unwrap();
        assert!(psnr(&a, &b).is_err());
        assert!(PixelBuffer::new(2, 2, 3, vec![0; 5]).is_err());
    }

    #[test]
    fn psnr_matches_direct_formula_and_is_symmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(1..300);
            let a: Vec<u8> = (0..n * 3).map(|_| rng.random()).collect();
            let b: Vec<u8> = (0..n * 3).map(|_| rng.random()).collect();
            let pa = PixelBuffer::new(n as u32, 1, 3, a.clone()).unwrap();
            let pb = PixelBuffer::new(n as u32, 1, 3, b.clone()).unwrap();
            // independent float computation
            let mse: f64 = a
                .iter()
                .zip(&b)
                .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
                .sum::<f64>()
                / a.len() as f64;
            let expect = 20.0 * 255f64.log10() - 10.0 * mse.log10();
            let got = psnr(&pa, &pb).unwrap();
            assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
            assert_eq!(got, psnr(&pb, &pa).unwrap());
        }
    }

    #[test]
    fn identical_bytes_lose_nothing() {
        let jpeg = synthetic_jpeg(48, 32, 1, 80);
        let q = quality_loss(&jpeg, &jpeg, DEFAULT_REF_DB).unwrap();
        assert_eq!(q.loss_db(), Some(0.0));
    }

    #[test]
    fn truncated_file_is_undecodable() {
        let jpeg = synthetic_jpeg(48, 32, 2, 80);
        let q = quality_loss(&jpeg, &jpeg[..10], DEFAULT_REF_DB).unwrap();
        assert!(q.is_undecodable());
    }

    #[test]
    fn undecodable_original_is_an_error() {
        assert!(quality_loss(b"not a jpeg", b"x", DEFAULT_REF_DB).is_err());
    }

    #[test]
    fn summary_excludes_undecodable() {
        let rs = [
            QualityResult::loss(1.0),
            QualityResult::Undecodable,
            QualityResult::loss(3.0),
        ];
        let (mean, rate) = summarize(&rs);
        assert_eq!(mean, Some(2.0));
        assert!((rate - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn early_flips_hurt_more_than_late_flips() {
        let jpeg = synthetic_jpeg(96, 96, 3, 85);
        let probe = QualityProbe::new(&jpeg, DEFAULT_REF_DB).unwrap();
        let bits = jpeg.len() * 8;
        let region = bits / 10;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let mut loss_of = |lo: usize, hi: usize| {
            let mut total = 0.0;
            for _ in 0..100 {
                let bit = rng.random_range(lo..hi);
                let mut f = jpeg.clone();
                crate::bits::flip_bit(&mut f, bit);
                // undecodable counts as the full reference loss here
                total += probe.evaluate(&f).loss_db().unwrap_or(DEFAULT_REF_DB);
            }
            total / 100.0
        };
        let early = loss_of(0, region);
        let late = loss_of(bits - region, bits);
        assert!(early >= late, "early {early} late {late}");
    }
}
