//! Image representation, file I/O, color conversion and degradations.
//!
//! Samples are `f64` with a nominal range of `[0, 1]`. Multi-channel images
//! are stored planar: one [`Plane`] per channel, each row-major.

mod io;
mod noise;
mod resample;

pub use io::{load_image, save_image};
pub use noise::{add_gaussian_noise, GaussianStream};
pub use resample::{catmull_rom, downscale_bicubic, to_grayscale, upscale_bicubic};

use crate::error::{Error, Result};

/// Smallest side length an [`Image`] may have.
pub const MIN_SIDE: usize = 8;

/// A single-channel, row-major real grid of any positive size.
///
/// Planes carry intermediate results (pyramid levels, filtered residuals)
/// and are allowed to hold negative or out-of-range values.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidImage(format!("empty plane {height}x{width}")));
        }
        if data.len() != height * width {
            return Err(Error::InvalidImage(format!(
                "plane {height}x{width} needs {} samples, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "empty plane");
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "empty plane");
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two planes of identical shape.
    pub fn zip_with(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dims(), other.dims(), "plane shape mismatch");
        Self {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Plain (unweighted) inner product.
    pub fn dot(&self, other: &Plane) -> f64 {
        assert_eq!(self.dims(), other.dims(), "plane shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// An `H×W×C` image with `C ∈ {1, 3}`, `H, W ≥ 8` and finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    planes: Vec<Plane>,
}

impl Image {
    /// Builds an image from planar data: all of channel 0 row-major, then
    /// channel 1, and so on.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::InvalidImage(format!(
                "{height}x{width}x{channels} image needs {} samples, got {}",
                height * width * channels,
                data.len()
            )));
        }
        let plane_len = height * width;
        let planes = (0..channels)
            .map(|c| Plane {
                height,
                width,
                data: data[c * plane_len..(c + 1) * plane_len].to_vec(),
            })
            .collect();
        Self::from_planes(planes)
    }

    pub fn from_planes(planes: Vec<Plane>) -> Result<Self> {
        let Some(first) = planes.first() else {
            return Err(Error::InvalidImage("no channels".into()));
        };
        let (height, width) = first.dims();
        if planes.len() != 1 && planes.len() != 3 {
            return Err(Error::InvalidImage(format!(
                "channel count must be 1 or 3, got {}",
                planes.len()
            )));
        }
        if planes.iter().any(|p| p.dims() != (height, width)) {
            return Err(Error::InvalidImage("channel planes differ in size".into()));
        }
        if height < MIN_SIDE || width < MIN_SIDE {
            return Err(Error::InvalidImage(format!(
                "{height}x{width} is below the {MIN_SIDE}x{MIN_SIDE} minimum"
            )));
        }
        if planes
            .iter()
            .flat_map(|p| p.data.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidImage("non-finite sample".into()));
        }
        Ok(Self {
            height,
            width,
            planes,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            vec![value; height * width * channels],
        )
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let planes = (0..channels)
            .map(|c| Plane::from_fn(height, width, |y, x| f(c, y, x)))
            .collect();
        Self::from_planes(planes)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.planes.len())
    }

    /// Total number of samples across all channels.
    #[inline]
    pub fn len(&self) -> usize {
        self.height * self.width * self.planes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn plane(&self, channel: usize) -> &Plane {
        &self.planes[channel]
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<Plane> {
        self.planes
    }

    #[inline]
    pub fn get(&self, channel: usize, y: usize, x: usize) -> f64 {
        self.planes[channel].get(y, x)
    }

    /// Planar sample vector, the inverse of [`Image::new`].
    pub fn to_planar(&self) -> Vec<f64> {
        self.planes
            .iter()
            .flat_map(|p| p.data.iter().copied())
            .collect()
    }

    /// Iterates samples in storage order (channel, then row, then column).
    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.planes.iter().flat_map(|p| p.data.iter().copied())
    }

    /// Applies `f` to every plane. The result must still satisfy the image
    /// invariants.
    pub fn map_planes(&self, f: impl FnMut(&Plane) -> Plane) -> Result<Self> {
        Self::from_planes(self.planes.iter().map(f).collect())
    }

    pub fn try_map_planes(&self, f: impl FnMut(&Plane) -> Result<Plane>) -> Result<Self> {
        Self::from_planes(self.planes.iter().map(f).collect::<Result<Vec<_>>>()?)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.map_planes(|p| p.map(&f))
    }

    pub fn zip_with(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other)?;
        Self::from_planes(
            self.planes
                .iter()
                .zip(&other.planes)
                .map(|(a, b)| a.zip_with(b, &f))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Image) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn clamp01(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            planes: self
                .planes
                .iter()
                .map(|p| p.map(|v| v.clamp(0.0, 1.0)))
                .collect(),
        }
    }

    pub fn dot(&self, other: &Image) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .planes
            .iter()
            .zip(&other.planes)
            .map(|(a, b)| a.dot(b))
            .sum())
    }

    pub fn sum_sq(&self) -> f64 {
        self.planes.iter().map(Plane::sum_sq).sum()
    }

    /// Mean of squared samples over all channels.
    pub fn mean_sq(&self) -> f64 {
        self.sum_sq() / self.len() as f64
    }

    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .samples()
            .zip(other.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }
}
