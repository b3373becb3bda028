use std::f64::consts::PI;

use crate::error::Result;
use crate::imagecore::{GaussianStream, Image};

/// Deterministic smooth test image with a few edges: a tilted gradient,
/// Gaussian blobs, low-frequency waves and one soft-edged rectangle.
/// Samples lie in `[0.05, 0.95]`.
pub fn synthetic_image(height: usize, width: usize, channels: usize, seed: u64) -> Result<Image> {
    let mut rng = GaussianStream::new(seed ^ 0x5EED_1A6E);
    // map a standard normal to (0, 1)
    let mut unit = move || 0.5 * (1.0 + libm::erf(rng.next_standard() / std::f64::consts::SQRT_2));

    let (h, w) = (height as f64, width as f64);
    let gx = unit() - 0.5;
    let gy = unit() - 0.5;
    let blobs: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                unit() * h,
                unit() * w,
                (0.08 + 0.15 * unit()) * h.min(w),
                unit() - 0.4,
            )
        })
        .collect();
    let waves: Vec<(f64, f64, f64, f64)> = (0..2)
        .map(|_| {
            (
                (1.0 + 3.0 * unit()).floor(),
                (1.0 + 3.0 * unit()).floor(),
                2.0 * PI * unit(),
                0.05 + 0.05 * unit(),
            )
        })
        .collect();
    let (r0, c0) = (unit() * 0.5 * h, unit() * 0.5 * w);
    let (r1, c1) = (
        r0 + (0.25 + 0.25 * unit()) * h,
        c0 + (0.25 + 0.25 * unit()) * w,
    );
    let rect_amp = 0.25 * (unit() - 0.5);
    let tints: Vec<f64> = (0..channels).map(|_| 0.9 + 0.2 * unit()).collect();

    Image::from_fn(height, width, channels, |c, y, x| {
        let (yf, xf) = (y as f64, x as f64);
        let mut v = 0.5 + 0.3 * (gx * (xf / w - 0.5) + gy * (yf / h - 0.5));
        for &(by, bx, s, a) in &blobs {
            let d2 = (yf - by).powi(2) + (xf - bx).powi(2);
            v += 0.3 * a * (-d2 / (2.0 * s * s)).exp();
        }
        for &(ky, kx, phase, a) in &waves {
            v += a * (2.0 * PI * (ky * yf / h + kx * xf / w) + phase).sin();
        }
        let inside = |t: f64, lo: f64, hi: f64| {
            let s = |z: f64| 1.0 / (1.0 + (-2.0 * z).exp());
            s(t - lo) * s(hi - t)
        };
        v += rect_amp * inside(yf, r0, r1) * inside(xf, c0, c1);
        (v * tints[c]).clamp(0.05, 0.95)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let a = synthetic_image(32, 48, 3, 9).unwrap();
        let b = synthetic_image(32, 48, 3, 9).unwrap();
        let c = synthetic_image(32, 48, 3, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.samples().all(|v| (0.05..=0.95).contains(&v)));
    }

    #[test]
    fn not_flat() {
        let a = synthetic_image(64, 64, 1, 1).unwrap();
        let mean = a.samples().sum::<f64>() / a.len() as f64;
        let var = a.samples().map(|v| (v - mean).powi(2)).sum::<f64>() / a.len() as f64;
        assert!(var > 1e-4, "variance {var}");
    }
}
