use super::{Image, Plane};
use crate::error::{Error, Result};

const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Rec. 601 luma. Single-channel images are returned unchanged.
pub fn to_grayscale(img: &Image) -> Image {
    if img.channels() == 1 {
        return img.clone();
    }
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let data = (0..r.len())
        .map(|i| LUMA[0] * r.data()[i] + LUMA[1] * g.data()[i] + LUMA[2] * b.data()[i])
        .collect();
    Image::new(img.height(), img.width(), 1, data).expect("same shape as input")
}

/// Catmull-Rom cubic convolution kernel (Keys, a = -0.5).
pub fn catmull_rom(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        ((A + 2.0) * t - (A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((A * t - 5.0 * A) * t + 8.0 * A) * t - 4.0 * A
    } else {
        0.0
    }
}

/// Four-tap weights for every output position along one axis.
///
/// Output sample `i` reads the source at `(i + 0.5)·src/dst − 0.5`, which is
/// the block center when shrinking by an integer factor. Out-of-range taps
/// are clamped to the edge.
fn axis_taps(src: usize, dst: usize) -> Vec<[(usize, f64); 4]> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let pos = (i as f64 + 0.5) * scale - 0.5;
            let base = pos.floor() as isize;
            let mut taps = [(0usize, 0.0f64); 4];
            for (k, tap) in taps.iter_mut().enumerate() {
                let j = base - 1 + k as isize;
                let idx = j.clamp(0, src as isize - 1) as usize;
                *tap = (idx, catmull_rom(pos - j as f64));
            }
            taps
        })
        .collect()
}

fn resample_plane(p: &Plane, out_h: usize, out_w: usize) -> Plane {
    let (h, w) = p.dims();
    let col_taps = axis_taps(w, out_w);
    let row_taps = axis_taps(h, out_h);
    let horizontal = Plane::from_fn(h, out_w, |y, x| {
        col_taps[x].iter().map(|&(j, wt)| wt * p.get(y, j)).sum()
    });
    Plane::from_fn(out_h, out_w, |y, x| {
        row_taps[y]
            .iter()
            .map(|&(j, wt)| wt * horizontal.get(j, x))
            .sum()
    })
}

/// Bicubic decimation by an integer factor, sampling the center of each
/// `factor×factor` block.
pub fn downscale_bicubic(img: &Image, factor: usize) -> Result<Image> {
    if factor < 2 {
        return Err(Error::InvalidArgument(format!(
            "downscale factor {factor} < 2"
        )));
    }
    let (h, w, _) = img.dims();
    if h % factor != 0 || w % factor != 0 {
        return Err(Error::DimensionNotDivisible {
            height: h,
            width: w,
            factor,
        });
    }
    img.map_planes(|p| resample_plane(p, h / factor, w / factor))
}

/// Bicubic enlargement by an integer factor (same kernel and border rule as
/// [`downscale_bicubic`]).
pub fn upscale_bicubic(img: &Image, factor: usize) -> Result<Image> {
    if factor < 1 {
        return Err(Error::InvalidArgument(
            "upscale factor must be positive".into(),
        ));
    }
    let (h, w, _) = img.dims();
    img.map_planes(|p| resample_plane(p, h * factor, w * factor))
}
