use super::driver::{initial_params, ScheduleDriver};
use super::{psnr, ssim, ExperimentConfig, HistoryRow, ImageMetrics, MetricsReport, Pair};
use crate::error::{Error, Result};
use crate::imagecore::{upscale_bicubic, Image};
use crate::loss::LossKind;

/// Gradient descent directly on the pixels of the restored image.
///
/// The image starts at the degraded input (bicubically enlarged first when
/// the pair is a super-resolution pair) and is clamped to `[0, 1]` after
/// every step. With a schedule, `steps / epochs` consecutive steps form one
/// pseudo-epoch and the Θ mask changes only between pseudo-epochs.
///
/// History row `k` holds the loss of the iterate entering step `k`.
pub fn optimize_direct(pair: &Pair, config: &ExperimentConfig) -> Result<(Image, MetricsReport)> {
    config.validate()?;
    let target = &pair.target;
    let start = prepare_input(pair)?;
    let (h, w, _) = target.dims();

    let mut params = initial_params(config.epsilon, h, w)?;
    let mut driver = match (&config.schedule, config.loss) {
        (Some(s), LossKind::Gfl) => Some(ScheduleDriver::new(s, h, w)?),
        _ => None,
    };
    let steps_per_epoch = driver
        .as_ref()
        .map(|d| (config.steps / d.epochs()).max(1))
        .unwrap_or(usize::MAX);

    let mut current = start.clone();
    let mut history = Vec::with_capacity(config.steps);
    for step in 0..config.steps {
        if let Some(d) = driver.as_mut() {
            let epoch = (step / steps_per_epoch + 1).min(d.epochs());
            if epoch > d.current_epoch() {
                d.begin_epoch(&mut params)?;
            }
        }
        let (breakdown, grad) = config.loss.evaluate(&current, target, &params)?;
        if !breakdown.total.is_finite() {
            return Err(Error::NonFiniteLoss { step: step + 1 });
        }
        if let Some(d) = driver.as_mut() {
            d.record_loss(breakdown.total);
        }
        history.push(HistoryRow {
            step: step + 1,
            breakdown,
            omega: driver.as_ref().map(|d| d.omega()),
            psnr: psnr(&current, target)?,
        });
        let lr = config.learning_rate;
        current = match current.zip_with(&grad, |x, g| (x - lr * g).clamp(0.0, 1.0)) {
            Ok(next) => next,
            // NaN survives clamp and fails the finiteness check
            Err(Error::InvalidImage(_)) => return Err(Error::NonFiniteLoss { step: step + 1 }),
            Err(e) => return Err(e),
        };
    }

    let metrics = ImageMetrics::measure("restored", &start, &current, target)?;
    let report = MetricsReport {
        psnr: metrics.psnr_out,
        ssim: ssim(&current, target)?,
        psnr_in: metrics.psnr_in,
        ssim_in: metrics.ssim_in,
        history,
        omega_trace: driver.map(|d| d.omega_trace).unwrap_or_default(),
        per_image: vec![metrics],
    };
    Ok((current, report))
}

fn prepare_input(pair: &Pair) -> Result<Image> {
    let (th, tw, tc) = pair.target.dims();
    let (dh, dw, dc) = pair.degraded.dims();
    if (dh, dw, dc) == (th, tw, tc) {
        return Ok(pair.degraded.clone());
    }
    if dc == tc && dh > 0 && th % dh == 0 && tw % dw == 0 && th / dh == tw / dw {
        return upscale_bicubic(&pair.degraded, th / dh);
    }
    Err(Error::DimensionMismatch(format!(
        "degraded {:?} cannot be aligned with target {:?}",
        pair.degraded.dims(),
        pair.target.dims()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{make_pair, synthetic_image, Task};
    use crate::scheduler::{trace, ScheduleConfig};

    #[test]
    fn perfect_start_is_stationary() {
        let img = synthetic_image(32, 32, 1, 3).unwrap();
        let pair = Pair {
            degraded: img.clone(),
            target: img.clone(),
        };
        let cfg = ExperimentConfig::new(Task::Denoising, LossKind::Mse, 20, 100.0);
        let (out, report) = optimize_direct(&pair, &cfg).unwrap();
        assert_eq!(out, img);
        assert!(report.history.iter().all(|r| r.breakdown.total == 0.0));
    }

    #[test]
    fn huge_steps_stay_finite() {
        let img = synthetic_image(32, 32, 1, 3).unwrap();
        let pair = make_pair(&img, Task::Denoising, 1).unwrap();
        for loss in [LossKind::Mse, LossKind::Gfl, LossKind::Edge] {
            let cfg = ExperimentConfig::new(Task::Denoising, loss, 5, 1e300);
            let (out, report) = optimize_direct(&pair, &cfg).unwrap();
            assert!(out.samples().all(|v| (0.0..=1.0).contains(&v)));
            assert!(report.history.iter().all(|r| r.breakdown.total.is_finite()));
        }
    }

    #[test]
    fn sr_pairs_are_upscaled_first() {
        let img = synthetic_image(32, 32, 3, 4).unwrap();
        let pair = make_pair(&img, Task::SuperResolution, 0).unwrap();
        let cfg = ExperimentConfig::new(Task::SuperResolution, LossKind::Charbonnier, 50, 20.0);
        let (out, report) = optimize_direct(&pair, &cfg).unwrap();
        assert_eq!(out.dims(), (32, 32, 3));
        assert!(report.psnr > report.psnr_in);
    }

    #[test]
    fn recorded_thresholds_follow_the_schedule() {
        let img = synthetic_image(32, 32, 1, 5).unwrap();
        let pair = make_pair(&img, Task::Denoising, 5).unwrap();
        let schedule = ScheduleConfig::fixed(20.0, 2.0, 10, 3);
        let cfg = ExperimentConfig::new(Task::Denoising, LossKind::Gfl, 40, 0.5)
            .with_schedule(schedule.clone());
        let (_, report) = optimize_direct(&pair, &cfg).unwrap();
        let expected: Vec<f64> = trace(&schedule, None)
            .unwrap()
            .iter()
            .map(|r| r.omega)
            .collect();
        assert_eq!(report.omega_trace, expected);
        assert!(report.history.iter().all(|r| r.breakdown.total >= 1e-3));
        assert_eq!(report.history[4].omega, Some(expected[1]));
    }
}
