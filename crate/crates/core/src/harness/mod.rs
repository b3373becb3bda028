//! Desk-scale restoration experiments: degradations, pixel-space descent,
//! a trainable linear restorer, and quality metrics.

mod driver;
mod metrics;
mod optimize;
mod restorer;
mod synthetic;

pub use metrics::{psnr, psnr_from_mse, ssim, PSNR_CAP_DB};
pub use optimize::optimize_direct;
pub use restorer::{train_linear_restorer, LinearRestorer, MAX_KERNEL_SIZE};
pub use synthetic::synthetic_image;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{add_gaussian_noise, downscale_bicubic, Image};
use crate::loss::{LossBreakdown, LossKind, DEFAULT_EPSILON};
use crate::scheduler::ScheduleConfig;

pub const SR_FACTOR: usize = 4;
pub const NOISE_SIGMA: f64 = 0.15;
pub const NOISE_MU: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    /// ×4 bicubic downscaling.
    #[serde(rename = "super-resolution", alias = "sr")]
    SuperResolution,
    /// Additive Gaussian noise, σ = 0.15, μ = 0.
    #[serde(rename = "denoising", alias = "denoise")]
    Denoising,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "super-resolution" | "sr" => Ok(Task::SuperResolution),
            "denoising" | "denoise" => Ok(Task::Denoising),
            other => Err(Error::InvalidArgument(format!("unknown task {other:?}"))),
        }
    }
}

/// A degraded input and the clean image it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub degraded: Image,
    pub target: Image,
}

/// Degrades `img` for `task`. `seed` drives the noise (denoising only).
pub fn make_pair(img: &Image, task: Task, seed: u64) -> Result<Pair> {
    let degraded = match task {
        Task::SuperResolution => downscale_bicubic(img, SR_FACTOR)?,
        Task::Denoising => add_gaussian_noise(img, NOISE_SIGMA, NOISE_MU, seed),
    };
    Ok(Pair {
        degraded,
        target: img.clone(),
    })
}

/// Seed for corpus item `index`.
pub fn derived_seed(base: u64, index: usize) -> u64 {
    base ^ index as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub loss: LossKind,
    pub epsilon: f64,
    /// High-pass schedule for GFL; `None` leaves the Θ term empty.
    pub schedule: Option<ScheduleConfig>,
    /// Gradient steps (direct optimization) or epochs (restorer training).
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(task: Task, loss: LossKind, steps: usize, learning_rate: f64) -> Self {
        Self {
            task,
            loss,
            epsilon: DEFAULT_EPSILON,
            schedule: None,
            steps,
            learning_rate,
            seed: 0,
        }
    }

    pub fn with_schedule(mut self, schedule: ScheduleConfig) -> Self {
        self.schedule = Some(schedule);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("iteration budget must be >= 1".into()));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if let Some(s) = &self.schedule {
            s.validate()?;
        }
        Ok(())
    }
}

/// One recorded optimization step (or training epoch).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub step: usize,
    pub breakdown: LossBreakdown,
    /// Θ threshold in force, when a schedule is active.
    pub omega: Option<f64>,
    pub psnr: f64,
}

impl HistoryRow {
    pub const CSV_HEADER: &'static str = "step,ch_c,pi_c,theta_c,total,omega,psnr";

    pub fn to_csv_row(&self) -> String {
        let omega = self.omega.map(|w| w.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{}",
            self.step,
            self.breakdown.to_csv_row(),
            omega,
            self.psnr
        )
    }
}

/// Quality of one restored image against its target.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageMetrics {
    pub name: String,
    pub psnr_in: f64,
    pub psnr_out: f64,
    pub ssim_in: f64,
    pub ssim_out: f64,
}

impl ImageMetrics {
    pub const CSV_HEADER: &'static str = "image,loss,psnr_in,psnr_out,ssim_in,ssim_out";

    pub fn measure(name: &str, input: &Image, output: &Image, target: &Image) -> Result<Self> {
        Ok(Self {
            name: name.to_string(),
            psnr_in: psnr(input, target)?,
            psnr_out: psnr(output, target)?,
            ssim_in: ssim(input, target)?,
            ssim_out: ssim(output, target)?,
        })
    }

    pub fn to_csv_row(&self, loss: LossKind) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            self.name,
            loss.name(),
            self.psnr_in,
            self.psnr_out,
            self.ssim_in,
            self.ssim_out
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    /// Final PSNR (mean over held-out images for the restorer).
    pub psnr: f64,
    pub ssim: f64,
    /// Same metrics for the unrestored input.
    pub psnr_in: f64,
    pub ssim_in: f64,
    pub history: Vec<HistoryRow>,
    /// Θ threshold per (pseudo-)epoch, in order.
    pub omega_trace: Vec<f64>,
    pub per_image: Vec<ImageMetrics>,
}

impl MetricsReport {
    pub fn history_csv(&self) -> String {
        let mut out = String::from(HistoryRow::CSV_HEADER);
        out.push('\n');
        for row in &self.history {
            out.push_str(&row.to_csv_row());
            out.push('\n');
        }
        out
    }

    pub fn report_csv(&self, loss: LossKind) -> String {
        let mut out = String::from(ImageMetrics::CSV_HEADER);
        out.push('\n');
        for m in &self.per_image {
            out.push_str(&m.to_csv_row(loss));
            out.push('\n');
        }
        out
    }
}
