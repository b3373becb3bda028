//! Frequency band allocation for the high-pass component.
//!
//! The threshold starts at `omega0` and drops by `(omega0 − omega_final)/S`
//! each time a stage trigger fires. Once the remaining gap is smaller than
//! one step it snaps to `omega_final` and stays there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocationMode {
    /// Advance on a fixed epoch period.
    Static,
    /// Advance when the previous epoch's mean GFL fell below the threshold.
    Dynamic,
}

/// How the static trigger period is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpretation {
    /// Trigger when `epoch mod S = 0`.
    #[default]
    Literal,
    /// Trigger when `epoch mod max(1, ⌊N/S⌋) = 0`.
    StageInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub omega0: f64,
    #[serde(rename = "omegaF")]
    pub omega_final: f64,
    pub epochs: usize,
    pub stages: usize,
    pub mode: AllocationMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_threshold: Option<f64>,
    #[serde(default)]
    pub interpretation: Interpretation,
}

impl ScheduleConfig {
    /// A static schedule with the literal trigger.
    pub fn fixed(omega0: f64, omega_final: f64, epochs: usize, stages: usize) -> Self {
        Self {
            omega0,
            omega_final,
            epochs,
            stages,
            mode: AllocationMode::Static,
            loss_threshold: None,
            interpretation: Interpretation::Literal,
        }
    }

    pub fn dynamic(
        omega0: f64,
        omega_final: f64,
        epochs: usize,
        stages: usize,
        loss_threshold: f64,
    ) -> Self {
        Self {
            mode: AllocationMode::Dynamic,
            loss_threshold: Some(loss_threshold),
            ..Self::fixed(omega0, omega_final, epochs, stages)
        }
    }

    pub fn with_interpretation(mut self, interpretation: Interpretation) -> Self {
        self.interpretation = interpretation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.omega0.is_finite() || !self.omega_final.is_finite() {
            return fail("thresholds must be finite".into());
        }
        if self.omega_final < 0.0 {
            return fail(format!("omegaF must be >= 0, got {}", self.omega_final));
        }
        if self.omega0 <= self.omega_final {
            return fail(format!(
                "omega0 ({}) must exceed omegaF ({})",
                self.omega0, self.omega_final
            ));
        }
        if self.epochs == 0 {
            return fail("epochs must be >= 1".into());
        }
        if self.stages == 0 {
            return fail("stages must be >= 1".into());
        }
        match (self.mode, self.loss_threshold) {
            (AllocationMode::Dynamic, None) => fail("dynamic mode requires loss_threshold".into()),
            (AllocationMode::Dynamic, Some(t)) if !t.is_finite() => {
                fail("loss_threshold must be finite".into())
            }
            (AllocationMode::Static, Some(_)) => {
                fail("loss_threshold is only valid in dynamic mode".into())
            }
            _ => Ok(()),
        }
    }

    /// Threshold decrement per stage.
    pub fn step(&self) -> f64 {
        (self.omega0 - self.omega_final) / self.stages as f64
    }

    fn static_period(&self) -> usize {
        match self.interpretation {
            Interpretation::Literal => self.stages,
            Interpretation::StageInterval => (self.epochs / self.stages).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleState {
    omega_prev: f64,
    epoch: usize,
    frozen: bool,
}

impl ScheduleState {
    /// Initial state: threshold `omega0`, no epoch run yet.
    pub fn new(config: &ScheduleConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            omega_prev: config.omega0,
            epoch: 0,
            frozen: false,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega_prev
    }

    /// Last epoch processed (0 before the first call to `on_epoch`).
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Advances to `epoch` (which must be `self.epoch() + 1`) and returns
    /// the threshold that epoch's filter uses.
    ///
    /// `last_epoch_gfl` is consulted only in dynamic mode; `None` never
    /// triggers a stage change.
    pub fn on_epoch(
        &mut self,
        config: &ScheduleConfig,
        epoch: usize,
        last_epoch_gfl: Option<f64>,
    ) -> Result<f64> {
        if epoch != self.epoch + 1 || epoch > config.epochs {
            return Err(Error::EpochOutOfOrder {
                expected: self.epoch + 1,
                got: epoch,
            });
        }
        self.epoch = epoch;
        if self.frozen {
            return Ok(self.omega_prev);
        }
        let trigger = match config.mode {
            AllocationMode::Static => epoch.is_multiple_of(config.static_period()),
            AllocationMode::Dynamic => match (last_epoch_gfl, config.loss_threshold) {
                (Some(gfl), Some(threshold)) => gfl < threshold,
                _ => false,
            },
        };
        if trigger {
            let step = config.step();
            self.omega_prev -= step;
            if self.omega_prev - config.omega_final < step {
                self.omega_prev = config.omega_final;
            }
            if self.omega_prev == config.omega_final {
                self.frozen = true;
            }
        }
        Ok(self.omega_prev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub omega: f64,
    pub frozen: bool,
}

impl TraceRow {
    pub const CSV_HEADER: &'static str = "epoch,omega,frozen";

    pub fn to_csv_row(&self) -> String {
        format!("{},{},{}", self.epoch, self.omega, self.frozen)
    }
}

/// Expands the schedule over all `config.epochs` epochs.
///
/// In dynamic mode `gfl_sequence[e − 1]` is the loss value checked when
/// entering epoch `e`; epochs past the end of the sequence see no value.
pub fn trace(config: &ScheduleConfig, gfl_sequence: Option<&[f64]>) -> Result<Vec<TraceRow>> {
    let mut state = ScheduleState::new(config)?;
    let seq = match (config.mode, gfl_sequence) {
        (AllocationMode::Dynamic, None) => {
            return Err(Error::InvalidConfig(
                "dynamic schedule trace requires a GFL sequence".into(),
            ))
        }
        (AllocationMode::Dynamic, Some(s)) if s.len() > config.epochs => {
            return Err(Error::InvalidConfig(format!(
                "GFL sequence has {} values for {} epochs",
                s.len(),
                config.epochs
            )))
        }
        (AllocationMode::Dynamic, Some(s)) => s,
        (AllocationMode::Static, _) => &[],
    };
    (1..=config.epochs)
        .map(|epoch| {
            let omega = state.on_epoch(config, epoch, seq.get(epoch - 1).copied())?;
            Ok(TraceRow {
                epoch,
                omega,
                frozen: state.is_frozen(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omegas(rows: &[TraceRow]) -> Vec<f64> {
        rows.iter().map(|r| r.omega).collect()
    }

    #[test]
    fn init_from_ablation_parameters() {
        let cfg = ScheduleConfig::fixed(255.0, 10.0, 100, 2);
        let st = ScheduleState::new(&cfg).unwrap();
        assert_eq!((st.omega(), st.epoch(), st.is_frozen()), (255.0, 0, false));
    }

    #[test]
    fn invalid_configs() {
        assert!(ScheduleState::new(&ScheduleConfig::fixed(10.0, 10.0, 10, 2)).is_err());
        assert!(ScheduleState::new(&ScheduleConfig::fixed(10.0, 20.0, 10, 2)).is_err());
        assert!(ScheduleState::new(&ScheduleConfig::fixed(20.0, 10.0, 0, 2)).is_err());
        assert!(ScheduleState::new(&ScheduleConfig::fixed(20.0, 10.0, 10, 0)).is_err());
        assert!(ScheduleState::new(&ScheduleConfig::fixed(20.0, -1.0, 10, 2)).is_err());
        let mut dynamic = ScheduleConfig::dynamic(20.0, 10.0, 10, 2, 0.1);
        dynamic.loss_threshold = None;
        assert!(matches!(
            ScheduleState::new(&dynamic),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn epochs_must_be_sequential() {
        let cfg = ScheduleConfig::fixed(255.0, 10.0, 5, 2);
        let mut st = ScheduleState::new(&cfg).unwrap();
        assert!(matches!(
            st.on_epoch(&cfg, 2, None),
            Err(Error::EpochOutOfOrder {
                expected: 1,
                got: 2
            })
        ));
        for e in 1..=5 {
            st.on_epoch(&cfg, e, None).unwrap();
        }
        assert!(st.on_epoch(&cfg, 6, None).is_err());
    }

    #[test]
    fn literal_trace() {
        let rows = trace(&ScheduleConfig::fixed(255.0, 10.0, 100, 2), None).unwrap();
        assert_eq!(omegas(&rows[..4]), vec![255.0, 132.5, 132.5, 10.0]);
        assert!(!rows[2].frozen && rows[3].frozen);
        assert!(rows[4..].iter().all(|r| r.omega == 10.0 && r.frozen));
    }

    #[test]
    fn stage_interval_trace() {
        let cfg = ScheduleConfig::fixed(255.0, 10.0, 100, 2)
            .with_interpretation(Interpretation::StageInterval);
        let rows = trace(&cfg, None).unwrap();
        assert!(rows[..49].iter().all(|r| r.omega == 255.0));
        assert!(rows[49..99].iter().all(|r| r.omega == 132.5 && !r.frozen));
        assert_eq!((rows[99].omega, rows[99].frozen), (10.0, true));
    }

    #[test]
    fn single_stage_jumps_immediately() {
        let rows = trace(&ScheduleConfig::fixed(255.0, 10.0, 5, 1), None).unwrap();
        assert!(rows.iter().all(|r| r.omega == 10.0 && r.frozen));
    }

    #[test]
    fn dynamic_trace() {
        let cfg = ScheduleConfig::dynamic(255.0, 10.0, 4, 2, 0.05);
        let rows = trace(&cfg, Some(&[0.2, 0.04, 0.2, 0.03])).unwrap();
        assert_eq!(omegas(&rows), vec![255.0, 132.5, 132.5, 10.0]);
        assert!(trace(&cfg, None).is_err());
        assert!(trace(&cfg, Some(&[0.1; 5])).is_err());
    }

    #[test]
    fn dynamic_never_triggered() {
        let cfg = ScheduleConfig::dynamic(255.0, 10.0, 50, 3, 0.05);
        let rows = trace(&cfg, Some(&[0.05; 50])).unwrap();
        assert!(rows.iter().all(|r| r.omega == 255.0 && !r.frozen));
    }

    #[test]
    fn config_json_shape() {
        let json = r#"{"omega0":255,"omegaF":10,"epochs":100,"stages":2,"mode":"static"}"#;
        let cfg: ScheduleConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg, ScheduleConfig::fixed(255.0, 10.0, 100, 2));
        let bad =
            r#"{"omega0":255,"omegaF":10,"epochs":100,"stages":2,"mode":"static","omega_f":1}"#;
        assert!(serde_json::from_str::<ScheduleConfig>(bad).is_err());
        let si = r#"{"omega0":5,"omegaF":1,"epochs":10,"stages":2,"mode":"dynamic","loss_threshold":0.1,"interpretation":"stage-interval"}"#;
        let cfg: ScheduleConfig = serde_json::from_str(si).unwrap();
        assert_eq!(cfg.interpretation, Interpretation::StageInterval);
        assert_eq!(cfg.loss_threshold, Some(0.1));
    }
}
