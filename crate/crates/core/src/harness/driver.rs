use crate::error::Result;
use crate::loss::GflParams;
use crate::scheduler::{ScheduleConfig, ScheduleState};
use crate::spectral::{highpass_mask, FrequencyMask};

/// Advances a schedule at epoch boundaries and keeps the Θ mask in
/// `params` in sync, rebuilding it only when the threshold changes.
pub(crate) struct ScheduleDriver {
    config: ScheduleConfig,
    state: ScheduleState,
    dims: (usize, usize),
    mask_omega: Option<f64>,
    epoch_losses: Vec<f64>,
    previous_mean: Option<f64>,
    pub omega_trace: Vec<f64>,
}

impl ScheduleDriver {
    pub fn new(config: &ScheduleConfig, height: usize, width: usize) -> Result<Self> {
        Ok(Self {
            state: ScheduleState::new(config)?,
            config: config.clone(),
            dims: (height, width),
            mask_omega: None,
            epoch_losses: Vec::new(),
            previous_mean: None,
            omega_trace: Vec::new(),
        })
    }

    pub fn epochs(&self) -> usize {
        self.config.epochs
    }

    pub fn current_epoch(&self) -> usize {
        self.state.epoch()
    }

    pub fn omega(&self) -> f64 {
        self.state.omega()
    }

    /// Enters the next epoch, feeding the mean loss recorded during the
    /// previous one to the scheduler.
    pub fn begin_epoch(&mut self, params: &mut GflParams) -> Result<f64> {
        if !self.epoch_losses.is_empty() {
            let n = self.epoch_losses.len() as f64;
            self.previous_mean = Some(self.epoch_losses.iter().sum::<f64>() / n);
            self.epoch_losses.clear();
        }
        let epoch = self.state.epoch() + 1;
        let omega = self
            .state
            .on_epoch(&self.config, epoch, self.previous_mean)?;
        if self.mask_omega != Some(omega) {
            params.set_mask(highpass_mask(self.dims.0, self.dims.1, omega)?);
            self.mask_omega = Some(omega);
        }
        self.omega_trace.push(omega);
        Ok(omega)
    }

    pub fn record_loss(&mut self, total: f64) {
        self.epoch_losses.push(total);
    }
}

pub(crate) fn initial_params(epsilon: f64, height: usize, width: usize) -> Result<GflParams> {
    GflParams::new(epsilon, FrequencyMask::empty(height, width))
}
