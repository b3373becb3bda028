//! 2D discrete Fourier analysis, radial high-pass masks and azimuthally
//! averaged power spectra.
//!
//! The forward transform is unnormalized,
//! `F(u,v) = Σ f(x,y)·exp(−2πi(ux/M + vy/N))`, and the inverse carries the
//! `1/(MN)` factor. Spectra use the unshifted layout (DC at `(0, 0)`).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::imagecore::{Image, Plane};

/// Imaginary residue above which [`idft2`] refuses to drop the imaginary part.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-6;

/// Per-channel complex spectrum in unshifted DFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    channels: Vec<Vec<Complex64>>,
}

impl Spectrum {
    pub fn new(height: usize, width: usize, channels: Vec<Vec<Complex64>>) -> Result<Self> {
        if height == 0 || width == 0 || channels.is_empty() {
            return Err(Error::InvalidArgument("empty spectrum".into()));
        }
        if channels.iter().any(|c| c.len() != height * width) {
            return Err(Error::InvalidArgument(format!(
                "spectrum channel length differs from {height}x{width}"
            )));
        }
        if channels
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidArgument("non-finite spectrum entry".into()));
        }
        Ok(Self {
            height,
            width,
            channels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, c: usize) -> &[Complex64] {
        &self.channels[c]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.channels[c]
    }

    #[inline]
    pub fn get(&self, c: usize, u: usize, v: usize) -> Complex64 {
        self.channels[c][u * self.width + v]
    }
}

/// Radix-2 decimation-in-time FFT, in place. `data.len()` must be a power
/// of two. `inverse` flips the twiddle sign; no scaling is applied.
fn fft_in_place(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // twiddles evaluated directly; a recurrence drifts at larger sizes
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / len as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half] * twiddles[k];
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Direct O(n²) 1D DFT with an exact-index twiddle table.
fn dft_direct(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let table: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect();
    (0..n)
        .map(|u| {
            input
                .iter()
                .enumerate()
                .map(|(x, &f)| f * table[(u * x) % n])
                .sum()
        })
        .collect()
}

fn transform_1d(data: &mut [Complex64], inverse: bool) {
    if data.len().is_power_of_two() {
        fft_in_place(data, inverse);
    } else {
        let out = dft_direct(data, inverse);
        data.copy_from_slice(&out);
    }
}

/// Row-column 2D transform of a row-major `height×width` grid.
fn transform_2d(grid: &mut [Complex64], height: usize, width: usize, inverse: bool) {
    for row in grid.chunks_exact_mut(width) {
        transform_1d(row, inverse);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for x in 0..width {
        for y in 0..height {
            column[y] = grid[y * width + x];
        }
        transform_1d(&mut column, inverse);
        for y in 0..height {
            grid[y * width + x] = column[y];
        }
    }
}

pub(crate) fn dft2_plane(p: &Plane) -> Vec<Complex64> {
    let mut grid: Vec<Complex64> = p.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_2d(&mut grid, p.height(), p.width(), false);
    grid
}

/// Inverse transform returning the real part and the largest discarded
/// imaginary magnitude.
pub(crate) fn idft2_plane(spec: &[Complex64], height: usize, width: usize) -> (Plane, f64) {
    let mut grid = spec.to_vec();
    transform_2d(&mut grid, height, width, true);
    let scale = 1.0 / (height * width) as f64;
    let residue = grid
        .iter()
        .map(|z| (z.im * scale).abs())
        .fold(0.0, f64::max);
    let data = grid.iter().map(|z| z.re * scale).collect();
    (
        Plane::new(height, width, data).expect("shape preserved"),
        residue,
    )
}

/// Forward 2D DFT of every channel. Power-of-two axes use the radix-2 FFT;
/// other lengths fall back to direct summation.
pub fn dft2(img: &Image) -> Spectrum {
    Spectrum {
        height: img.height(),
        width: img.width(),
        channels: img.planes().iter().map(dft2_plane).collect(),
    }
}

/// Forward 2D DFT by direct double summation over all pixels for every
/// bin, O(M²N²). Independent of the separable fast path.
pub fn dft2_direct(img: &Image) -> Spectrum {
    let (m, n) = (img.height(), img.width());
    let row_table: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / m as f64))
        .collect();
    let col_table: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    let channels = img
        .planes()
        .iter()
        .map(|p| {
            let mut out = Vec::with_capacity(m * n);
            for u in 0..m {
                for v in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for y in 0..m {
                        let ry = row_table[(u * y) % m];
                        for x in 0..n {
                            acc += ry * col_table[(v * x) % n] * p.get(y, x);
                        }
                    }
                    out.push(acc);
                }
            }
            out
        })
        .collect();
    Spectrum {
        height: m,
        width: n,
        channels,
    }
}

/// Inverse 2D DFT with `1/(MN)` normalization, keeping the real part.
///
/// Fails with [`Error::AsymmetricSpectrum`] when the discarded imaginary
/// part exceeds [`ASYMMETRY_TOLERANCE`].
pub fn idft2(spec: &Spectrum) -> Result<Image> {
    let mut planes = Vec::with_capacity(spec.channels());
    for ch in &spec.channels {
        let (plane, residue) = idft2_plane(ch, spec.height, spec.width);
        if residue > ASYMMETRY_TOLERANCE {
            return Err(Error::AsymmetricSpectrum(residue));
        }
        planes.push(plane);
    }
    Image::from_planes(planes)
}

/// Signed frequency index of unshifted bin `k` on an axis of length `len`,
/// i.e. its offset from the centered DC bin at `⌊len/2⌋` after fftshift.
#[inline]
pub fn centered_offset(k: usize, len: usize) -> isize {
    ((k + len / 2) % len) as isize - (len / 2) as isize
}

/// Euclidean distance of unshifted bin `(u, v)` from the centered DC bin.
#[inline]
pub fn radial_distance(u: usize, v: usize, height: usize, width: usize) -> f64 {
    let du = centered_offset(u, height) as f64;
    let dv = centered_offset(v, width) as f64;
    (du * du + dv * dv).sqrt()
}

/// Binary radial high-pass mask in unshifted layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMask {
    height: usize,
    width: usize,
    omega: f64,
    pass: Vec<bool>,
}

impl FrequencyMask {
    /// A mask that blocks every bin.
    pub fn empty(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            omega: f64::INFINITY,
            pass: vec![false; height * width],
        }
    }

    /// A mask that passes every bin, DC included.
    pub fn all_pass(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            omega: f64::NEG_INFINITY,
            pass: vec![true; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    #[inline]
    pub fn passes(&self, u: usize, v: usize) -> bool {
        self.pass[u * self.width + v]
    }

    pub fn pass_count(&self) -> usize {
        self.pass.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        self.pass_count() == 0
    }

    pub fn bins(&self) -> &[bool] {
        &self.pass
    }
}

/// Passes bin `(u, v)` iff its radial distance from the centered DC bin is
/// strictly greater than `omega`.
pub fn highpass_mask(height: usize, width: usize, omega: f64) -> Result<FrequencyMask> {
    if omega.is_nan() || omega < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "omega must be >= 0, got {omega}"
        )));
    }
    let mut pass = Vec::with_capacity(height * width);
    for u in 0..height {
        for v in 0..width {
            pass.push(radial_distance(u, v, height, width) > omega);
        }
    }
    Ok(FrequencyMask {
        height,
        width,
        omega,
        pass,
    })
}

/// Filters one plane: forward DFT, zero blocked bins, inverse, real part.
pub(crate) fn highpass_plane(p: &Plane, mask: &FrequencyMask) -> Result<Plane> {
    if mask.is_empty() {
        return Ok(Plane::zeros(p.height(), p.width()));
    }
    let mut spec = dft2_plane(p);
    for (z, &keep) in spec.iter_mut().zip(&mask.pass) {
        if !keep {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    let (out, residue) = idft2_plane(&spec, p.height(), p.width());
    if residue > ASYMMETRY_TOLERANCE {
        return Err(Error::AsymmetricSpectrum(residue));
    }
    Ok(out)
}

/// Applies the high-pass mask to every channel. The output is unclamped.
pub fn apply_highpass(img: &Image, mask: &FrequencyMask) -> Result<Image> {
    if mask.dims() != (img.height(), img.width()) {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} vs image {}x{}",
            mask.height,
            mask.width,
            img.height(),
            img.width()
        )));
    }
    img.try_map_planes(|p| highpass_plane(p, mask))
}

/// One ring of the azimuthally averaged power spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBin {
    pub radius: usize,
    pub power: f64,
}

/// Mean `|F|²` over rings `⌊distance⌋ = r` for `r = 0..=⌊min(M,N)/2⌋`.
/// Bins beyond the largest full ring are dropped.
pub fn radial_power_spectrum(img: &Image) -> Result<Vec<RadialBin>> {
    if img.channels() != 1 {
        return Err(Error::InvalidArgument(format!(
            "radial power spectrum needs a 1-channel image, got {} channels",
            img.channels()
        )));
    }
    let (m, n) = (img.height(), img.width());
    let max_radius = m.min(n) / 2;
    let spec = dft2_plane(img.plane(0));
    let mut sums = vec![0.0; max_radius + 1];
    let mut counts = vec![0usize; max_radius + 1];
    for u in 0..m {
        for v in 0..n {
            let r = radial_distance(u, v, m, n).floor() as usize;
            if r <= max_radius {
                sums[r] += spec[u * n + v].norm_sqr();
                counts[r] += 1;
            }
        }
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .enumerate()
        .map(|(radius, (&s, &c))| RadialBin {
            radius,
            power: if c > 0 { s / c as f64 } else { 0.0 },
        })
        .collect())
}
