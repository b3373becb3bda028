//! Gaussian and Laplacian pyramids with the 5-tap binomial kernel and
//! periodic borders.
//!
//! With periodic borders every operator here is linear and circulant up to
//! the rate change, so exact adjoints are cheap:
//!
//! * `d = decimate ∘ blur`, `dᵀ = blur ∘ zero_insert = u / 4`
//! * `u = 4·blur ∘ zero_insert`, `uᵀ = 4·decimate ∘ blur = 4·d`
//! * `L = Id − u∘d`, `Lᵀ = Id − dᵀ∘uᵀ`

use crate::error::{Error, Result};
use crate::imagecore::{Image, Plane, MIN_SIDE};

/// `[1, 4, 6, 4, 1] / 16`, centered.
pub const BINOMIAL_5: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Separable circular convolution with `gain · BINOMIAL_5` along each axis.
fn blur(p: &Plane, gain: f64) -> Plane {
    let (h, w) = p.dims();
    let k: Vec<f64> = BINOMIAL_5.iter().map(|c| c * gain).collect();
    let rows = Plane::from_fn(h, w, |y, x| {
        (0..5)
            .map(|t| k[t] * p.get(y, wrap(x as isize + t as isize - 2, w)))
            .sum()
    });
    Plane::from_fn(h, w, |y, x| {
        (0..5)
            .map(|t| k[t] * rows.get(wrap(y as isize + t as isize - 2, h), x))
            .sum()
    })
}

fn decimate(p: &Plane) -> Plane {
    Plane::from_fn(p.height() / 2, p.width() / 2, |y, x| p.get(2 * y, 2 * x))
}

fn zero_insert(p: &Plane) -> Plane {
    let mut out = Plane::zeros(p.height() * 2, p.width() * 2);
    for y in 0..p.height() {
        for x in 0..p.width() {
            out.set(2 * y, 2 * x, p.get(y, x));
        }
    }
    out
}

fn check_even(p: &Plane) -> Result<()> {
    let (h, w) = p.dims();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::OddDimensions {
            height: h,
            width: w,
        });
    }
    Ok(())
}

/// Blur with the binomial kernel, then keep even-indexed samples.
pub fn downsample(p: &Plane) -> Result<Plane> {
    check_even(p)?;
    Ok(decimate(&blur(p, 1.0)))
}

/// Zero-insertion to twice the size, then blur with `2·BINOMIAL_5` per axis
/// (total gain 4) so constants are preserved.
pub fn upsample(p: &Plane) -> Plane {
    blur(&zero_insert(p), 2.0)
}

/// Adjoint of [`downsample`]: `blur ∘ zero_insert`.
pub fn downsample_adjoint(p: &Plane) -> Plane {
    blur(&zero_insert(p), 1.0)
}

/// Adjoint of [`upsample`]: `4·decimate ∘ blur`.
pub fn upsample_adjoint(p: &Plane) -> Result<Plane> {
    check_even(p)?;
    Ok(decimate(&blur(p, 2.0)))
}

/// `h₀ = p − u(d(p))` for one plane.
pub fn laplacian_plane(p: &Plane) -> Result<Plane> {
    let smooth = upsample(&downsample(p)?);
    Ok(p.zip_with(&smooth, |a, b| a - b))
}

/// `Lᵀ y = y − dᵀ(uᵀ(y))`, assembled from the individual adjoints.
pub fn laplacian_plane_adjoint(p: &Plane) -> Result<Plane> {
    let back = downsample_adjoint(&upsample_adjoint(p)?);
    Ok(p.zip_with(&back, |a, b| a - b))
}

fn check_depth1(img: &Image) -> Result<()> {
    let (h, w, _) = img.dims();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::OddDimensions {
            height: h,
            width: w,
        });
    }
    if h < 2 * MIN_SIDE || w < 2 * MIN_SIDE {
        return Err(Error::ImageTooSmall(format!(
            "depth-1 Laplacian needs at least {0}x{0}, got {h}x{w}",
            2 * MIN_SIDE
        )));
    }
    Ok(())
}

/// The single detail level `I − u(d(I))` of a depth-1 Laplacian pyramid,
/// per channel.
pub fn laplacian_depth1(img: &Image) -> Result<Image> {
    check_depth1(img)?;
    img.try_map_planes(laplacian_plane)
}

/// Adjoint of [`laplacian_depth1`] under the plain sample inner product.
pub fn laplacian_depth1_adjoint(img: &Image) -> Result<Image> {
    check_depth1(img)?;
    img.try_map_planes(laplacian_plane_adjoint)
}

/// Detail levels `h_0..h_{N−1}` plus the Gaussian base `I_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPyramid {
    levels: Vec<Image>,
    base: Image,
}

impl LaplacianPyramid {
    /// Assembles a pyramid from parts, checking that every level halves the
    /// previous one and the base sits one octave below the last level.
    pub fn from_parts(levels: Vec<Image>, base: Image) -> Result<Self> {
        let mut expect = (base.height(), base.width());
        for level in levels.iter().rev() {
            expect = (expect.0 * 2, expect.1 * 2);
            if (level.height(), level.width()) != expect || level.channels() != base.channels() {
                return Err(Error::DimensionMismatch(
                    "pyramid levels do not halve consistently".into(),
                ));
            }
        }
        Ok(Self { levels, base })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Image] {
        &self.levels
    }

    pub fn base(&self) -> &Image {
        &self.base
    }

    pub fn into_parts(self) -> (Vec<Image>, Image) {
        (self.levels, self.base)
    }
}

/// Builds `depth` Laplacian levels. The base must remain at least 8×8 and
/// both sides must be divisible by `2^depth`.
pub fn build_laplacian(img: &Image, depth: usize) -> Result<LaplacianPyramid> {
    let (h, w, _) = img.dims();
    let factor = 1usize.checked_shl(depth as u32).unwrap_or(0);
    if depth == 0
        || factor == 0
        || h % factor != 0
        || w % factor != 0
        || h / factor < MIN_SIDE
        || w / factor < MIN_SIDE
    {
        return Err(Error::DepthTooLarge {
            depth,
            height: h,
            width: w,
        });
    }
    let mut levels = Vec::with_capacity(depth);
    let mut current = img.clone();
    for _ in 0..depth {
        let next = current.try_map_planes(downsample)?;
        let detail = Image::from_planes(
            current
                .planes()
                .iter()
                .zip(next.planes())
                .map(|(cur, low)| cur.zip_with(&upsample(low), |a, b| a - b))
                .collect(),
        )?;
        levels.push(detail);
        current = next;
    }
    Ok(LaplacianPyramid {
        levels,
        base: current,
    })
}

/// Inverts [`build_laplacian`]: `I_n = u(I_{n+1}) + h_n` from the base up.
pub fn reconstruct(pyr: &LaplacianPyramid) -> Image {
    let mut current = pyr.base.clone();
    for level in pyr.levels.iter().rev() {
        current = Image::from_planes(
            current
                .planes()
                .iter()
                .zip(level.planes())
                .map(|(low, detail)| upsample(low).zip_with(detail, |a, b| a + b))
                .collect(),
        )
        .expect("levels validated at construction");
    }
    current
}
