use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::Image;

/// Standard normal deviates from xoshiro256++ (seeded through splitmix64)
/// via the Box–Muller transform.
///
/// Each pair of uniforms yields two deviates, the cosine branch first.
/// Transcendentals come from `libm` so the stream is identical on every
/// platform.
pub struct GaussianStream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the log finite
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }
}

/// `clamp(img + n, 0, 1)` with `n ~ N(mu, sigma²)` drawn per sample in
/// storage order (channel, row, column).
pub fn add_gaussian_noise(img: &Image, sigma: f64, mu: f64, seed: u64) -> Image {
    assert!(sigma >= 0.0, "sigma must be non-negative");
    let mut stream = GaussianStream::new(seed);
    let planes = img
        .planes()
        .iter()
        .map(|p| {
            let data = p
                .data()
                .iter()
                .map(|&v| (v + mu + sigma * stream.next_standard()).clamp(0.0, 1.0))
                .collect();
            super::Plane::new(p.height(), p.width(), data).expect("same shape")
        })
        .collect();
    Image::from_planes(planes).expect("clamped samples are finite")
}
