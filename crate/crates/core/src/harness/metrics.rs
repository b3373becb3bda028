use crate::error::{Error, Result};
use crate::imagecore::{Image, Plane};
use crate::loss::mse_loss;

/// PSNR reported when the MSE is (numerically) zero.
pub const PSNR_CAP_DB: f64 = 120.0;
const PSNR_MSE_FLOOR: f64 = 1e-12;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Peak signal-to-noise ratio for peak value 1.0, capped at
/// [`PSNR_CAP_DB`].
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    Ok(psnr_from_mse(mse_loss(a, b)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse < PSNR_MSE_FLOOR {
        PSNR_CAP_DB
    } else {
        -10.0 * mse.log10()
    }
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Separable weighted mean over every fully-contained window ("valid").
fn filter_valid(p: &[f64], height: usize, width: usize, win: &[f64]) -> Plane {
    let k = win.len();
    let (oh, ow) = (height - k + 1, width - k + 1);
    let rows = Plane::from_fn(height, ow, |y, x| {
        win.iter()
            .enumerate()
            .map(|(t, w)| w * p[y * width + x + t])
            .sum()
    });
    Plane::from_fn(oh, ow, |y, x| {
        win.iter()
            .enumerate()
            .map(|(t, w)| w * rows.get(y + t, x))
            .sum()
    })
}

fn ssim_plane(a: &Plane, b: &Plane, win: &[f64]) -> f64 {
    let (h, w) = a.dims();
    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);
    let aa: Vec<f64> = a.data().iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.data().iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(a.data(), h, w, win);
    let mu_b = filter_valid(b.data(), h, w, win);
    let e_aa = filter_valid(&aa, h, w, win);
    let e_bb = filter_valid(&bb, h, w, win);
    let e_ab = filter_valid(&ab, h, w, win);
    let n = mu_a.len();
    let mut total = 0.0;
    for i in 0..n {
        let (ma, mb) = (mu_a.data()[i], mu_b.data()[i]);
        let var_a = e_aa.data()[i] - ma * ma;
        let var_b = e_bb.data()[i] - mb * mb;
        let cov = e_ab.data()[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
    total / n as f64
}

/// Mean structural similarity: 11×11 Gaussian window (σ = 1.5),
/// K₁ = 0.01, K₂ = 0.03, dynamic range 1, averaged over channels.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_shape(b)?;
    if a.height() < SSIM_WINDOW || a.width() < SSIM_WINDOW {
        return Err(Error::ImageTooSmall(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {}x{}",
            a.height(),
            a.width()
        )));
    }
    let win = gaussian_window();
    let sum: f64 = a
        .planes()
        .iter()
        .zip(b.planes())
        .map(|(pa, pb)| ssim_plane(pa, pb, &win))
        .sum();
    Ok(sum / a.channels() as f64)
}
