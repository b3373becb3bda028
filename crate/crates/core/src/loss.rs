//! Guided frequency loss and baseline losses, with analytic gradients with
//! respect to the restored image.
//!
//! ```text
//! GFL = √(Ch_C + Π_C + Θ_C)
//! Ch_C = mean((I_R − I_HQ)²) + ε²
//! Π_C  = mean((Π(I_R) − Π(I_HQ))²)      Π = depth-1 Laplacian detail
//! Θ_C  = mean((Θ(I_R) − Θ(I_HQ))²)      Θ = radial high-pass filter
//! ```
//!
//! Every squared norm is a per-sample mean over all channels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::Image;
use crate::pyramid::{laplacian_depth1, laplacian_depth1_adjoint};
use crate::spectral::{apply_highpass, FrequencyMask};

pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Parameters of one GFL evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GflParams {
    epsilon: f64,
    mask: FrequencyMask,
    with_pi: bool,
}

impl GflParams {
    pub fn new(epsilon: f64, mask: FrequencyMask) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            mask,
            with_pi: true,
        })
    }

    /// Drops the Laplacian component (ablation).
    pub fn without_pi(mut self) -> Self {
        self.with_pi = false;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mask(&self) -> &FrequencyMask {
        &self.mask
    }

    pub fn with_pi(&self) -> bool {
        self.with_pi
    }

    /// Replaces the Θ mask, e.g. at a schedule stage change.
    pub fn set_mask(&mut self, mask: FrequencyMask) {
        self.mask = mask;
    }
}

/// The three GFL components and their composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub ch_c: f64,
    pub pi_c: f64,
    pub theta_c: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub const CSV_HEADER: &'static str = "ch_c,pi_c,theta_c,total";

    pub fn from_components(ch_c: f64, pi_c: f64, theta_c: f64) -> Self {
        Self {
            ch_c,
            pi_c,
            theta_c,
            total: (ch_c + pi_c + theta_c).sqrt(),
        }
    }

    /// A breakdown carrying only a scalar loss value (baselines).
    pub fn scalar(total: f64) -> Self {
        Self {
            ch_c: 0.0,
            pi_c: 0.0,
            theta_c: 0.0,
            total,
        }
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.ch_c, self.pi_c, self.theta_c, self.total
        )
    }
}

/// `ρ(x) = √(x² + ε²)`.
pub fn charbonnier_penalty(x: f64, epsilon: f64) -> f64 {
    (x * x + epsilon * epsilon).sqrt()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "epsilon must be > 0, got {epsilon}"
        )))
    }
}

fn mean_sq_diff(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_shape(b)?;
    let sum: f64 = a
        .samples()
        .zip(b.samples())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}

/// `mean((I_R − I_HQ)²)`.
pub fn mse_loss(restored: &Image, target: &Image) -> Result<f64> {
    mean_sq_diff(restored, target)
}

/// `Ch_C = mean((I_R − I_HQ)²) + ε²`.
pub fn ch_component(restored: &Image, target: &Image, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(mean_sq_diff(restored, target)? + epsilon * epsilon)
}

/// `√(mean((I_R − I_HQ)²) + ε²)`.
pub fn charbonnier_loss(restored: &Image, target: &Image, epsilon: f64) -> Result<f64> {
    Ok(ch_component(restored, target, epsilon)?.sqrt())
}

/// `Π_C`, the mean squared difference of depth-1 Laplacian details.
///
/// `Π` is linear, so this is evaluated on the residual directly.
pub fn pi_component(restored: &Image, target: &Image) -> Result<f64> {
    let residual = restored.sub(target)?;
    Ok(laplacian_depth1(&residual)?.mean_sq())
}

/// `Θ_C`, the mean squared difference of high-pass filtered images.
pub fn theta_component(restored: &Image, target: &Image, mask: &FrequencyMask) -> Result<f64> {
    let residual = restored.sub(target)?;
    if mask.is_empty() {
        return Ok(0.0);
    }
    Ok(apply_highpass(&residual, mask)?.mean_sq())
}

/// `√Π_C`, the edge baseline.
pub fn edge_loss(restored: &Image, target: &Image) -> Result<f64> {
    Ok(pi_component(restored, target)?.sqrt())
}

/// Evaluates all components and composes them.
pub fn gfl(restored: &Image, target: &Image, params: &GflParams) -> Result<LossBreakdown> {
    restored.check_same_shape(target)?;
    check_mask(restored, params.mask())?;
    let ch_c = ch_component(restored, target, params.epsilon)?;
    let pi_c = if params.with_pi {
        pi_component(restored, target)?
    } else {
        0.0
    };
    let theta_c = theta_component(restored, target, &params.mask)?;
    Ok(LossBreakdown::from_components(ch_c, pi_c, theta_c))
}

fn check_mask(img: &Image, mask: &FrequencyMask) -> Result<()> {
    if mask.dims() != (img.height(), img.width()) {
        return Err(Error::DimensionMismatch(format!(
            "mask {:?} vs image {}x{}",
            mask.dims(),
            img.height(),
            img.width()
        )));
    }
    Ok(())
}

/// GFL value together with `∂GFL/∂I_R`.
///
/// With `Δ = I_R − I_HQ` and `P` samples,
/// `∂GFL/∂I_R = (Δ + Lᵀ(LΔ) + Hᵀ(HΔ)) / (P·GFL)`, where `L` is the
/// depth-1 Laplacian and `H` the (self-adjoint) high-pass filter.
pub fn gfl_with_gradient(
    restored: &Image,
    target: &Image,
    params: &GflParams,
) -> Result<(LossBreakdown, Image)> {
    restored.check_same_shape(target)?;
    check_mask(restored, params.mask())?;
    check_epsilon(params.epsilon)?;
    let residual = restored.sub(target)?;
    let n = residual.len() as f64;

    let ch_c = residual.mean_sq() + params.epsilon * params.epsilon;
    let mut accum = residual.to_planar();

    let mut pi_c = 0.0;
    if params.with_pi {
        let detail = laplacian_depth1(&residual)?;
        pi_c = detail.mean_sq();
        let back = laplacian_depth1_adjoint(&detail)?;
        for (a, b) in accum.iter_mut().zip(back.samples()) {
            *a += b;
        }
    }

    let mut theta_c = 0.0;
    if !params.mask.is_empty() {
        let filtered = apply_highpass(&residual, &params.mask)?;
        theta_c = filtered.mean_sq();
        let back = apply_highpass(&filtered, &params.mask)?;
        for (a, b) in accum.iter_mut().zip(back.samples()) {
            *a += b;
        }
    }

    let breakdown = LossBreakdown::from_components(ch_c, pi_c, theta_c);
    let scale = 1.0 / (n * breakdown.total);
    for a in &mut accum {
        *a *= scale;
    }
    let (h, w, c) = restored.dims();
    Ok((breakdown, Image::new(h, w, c, accum)?))
}

/// `∂GFL/∂I_R`; see [`gfl_with_gradient`].
pub fn gfl_gradient(restored: &Image, target: &Image, params: &GflParams) -> Result<Image> {
    Ok(gfl_with_gradient(restored, target, params)?.1)
}

/// `∂mse/∂I_R = 2Δ/P`.
pub fn mse_gradient(restored: &Image, target: &Image) -> Result<Image> {
    let n = restored.len() as f64;
    restored.zip_with(target, |a, b| 2.0 * (a - b) / n)
}

/// `∂/∂I_R √(mean Δ² + ε²) = Δ / (P·loss)`.
pub fn charbonnier_gradient(restored: &Image, target: &Image, epsilon: f64) -> Result<Image> {
    let loss = charbonnier_loss(restored, target, epsilon)?;
    let n = restored.len() as f64;
    restored.zip_with(target, |a, b| (a - b) / (n * loss))
}

/// `∂√Π_C/∂I_R = Lᵀ(LΔ) / (P·√Π_C)`, taken as zero where `Π_C = 0`.
pub fn edge_gradient(restored: &Image, target: &Image) -> Result<Image> {
    let residual = restored.sub(target)?;
    let detail = laplacian_depth1(&residual)?;
    let value = detail.mean_sq().sqrt();
    if value == 0.0 {
        return residual.map(|_| 0.0);
    }
    let scale = 1.0 / (residual.len() as f64 * value);
    laplacian_depth1_adjoint(&detail)?.map(|v| v * scale)
}

/// Loss functions available to the restoration harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Gfl,
    Mse,
    Charbonnier,
    Edge,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Gfl => "gfl",
            LossKind::Mse => "mse",
            LossKind::Charbonnier => "charbonnier",
            LossKind::Edge => "edge",
        }
    }

    /// Loss value and gradient. `params` supplies ε (and the mask for GFL).
    pub fn evaluate(
        self,
        restored: &Image,
        target: &Image,
        params: &GflParams,
    ) -> Result<(LossBreakdown, Image)> {
        match self {
            LossKind::Gfl => gfl_with_gradient(restored, target, params),
            LossKind::Mse => Ok((
                LossBreakdown::scalar(mse_loss(restored, target)?),
                mse_gradient(restored, target)?,
            )),
            LossKind::Charbonnier => Ok((
                LossBreakdown::scalar(charbonnier_loss(restored, target, params.epsilon)?),
                charbonnier_gradient(restored, target, params.epsilon)?,
            )),
            LossKind::Edge => Ok((
                LossBreakdown::scalar(edge_loss(restored, target)?),
                edge_gradient(restored, target)?,
            )),
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gfl" => Ok(LossKind::Gfl),
            "mse" => Ok(LossKind::Mse),
            "charbonnier" => Ok(LossKind::Charbonnier),
            "edge" => Ok(LossKind::Edge),
            other => Err(Error::InvalidArgument(format!("unknown loss {other:?}"))),
        }
    }
}
