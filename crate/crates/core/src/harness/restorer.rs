use super::driver::{initial_params, ScheduleDriver};
use super::{ExperimentConfig, HistoryRow, ImageMetrics, MetricsReport, Pair, Task};
use crate::error::{Error, Result};
use crate::imagecore::{Image, Plane};
use crate::loss::{LossBreakdown, LossKind};

pub const MAX_KERNEL_SIZE: usize = 9;

/// A single `k×k` filter shared by all channels, applied as a circular
/// correlation: `out(y,x) = Σ w[a][b] · in(y + a − r, x + b − r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRestorer {
    size: usize,
    weights: Vec<f64>,
}

impl LinearRestorer {
    /// Identity filter (center tap 1).
    pub fn identity(size: usize) -> Result<Self> {
        if size.is_multiple_of(2) || size > MAX_KERNEL_SIZE {
            return Err(Error::InvalidArgument(format!(
                "kernel size must be odd and at most {MAX_KERNEL_SIZE}, got {size}"
            )));
        }
        let mut weights = vec![0.0; size * size];
        weights[(size / 2) * size + size / 2] = 1.0;
        Ok(Self { size, weights })
    }

    pub fn from_weights(size: usize, weights: Vec<f64>) -> Result<Self> {
        let mut k = Self::identity(size)?;
        if weights.len() != size * size {
            return Err(Error::InvalidArgument(format!(
                "{size}x{size} kernel needs {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        k.weights = weights;
        Ok(k)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn radius(&self) -> isize {
        (self.size / 2) as isize
    }

    fn correlate(&self, p: &Plane) -> Plane {
        let (h, w) = p.dims();
        let r = self.radius();
        let k = self.size;
        Plane::from_fn(h, w, |y, x| {
            let mut acc = 0.0;
            for a in 0..k {
                let yy = (y as isize + a as isize - r).rem_euclid(h as isize) as usize;
                for b in 0..k {
                    let xx = (x as isize + b as isize - r).rem_euclid(w as isize) as usize;
                    acc += self.weights[a * k + b] * p.get(yy, xx);
                }
            }
            acc
        })
    }

    pub fn apply(&self, img: &Image) -> Result<Image> {
        img.map_planes(|p| self.correlate(p))
    }

    /// `∂loss/∂w[a][b] = Σ_c Σ_{y,x} g_c(y,x) · in_c(y + a − r, x + b − r)`,
    /// the adjoint of [`LinearRestorer::apply`] with respect to the weights.
    pub fn kernel_gradient(&self, input: &Image, grad_out: &Image) -> Result<Vec<f64>> {
        input.check_same_shape(grad_out)?;
        let (h, w, _) = input.dims();
        let r = self.radius();
        let k = self.size;
        let mut grad = vec![0.0; k * k];
        for (pin, pg) in input.planes().iter().zip(grad_out.planes()) {
            for a in 0..k {
                for b in 0..k {
                    let mut acc = 0.0;
                    for y in 0..h {
                        let yy = (y as isize + a as isize - r).rem_euclid(h as isize) as usize;
                        for x in 0..w {
                            let xx = (x as isize + b as isize - r).rem_euclid(w as isize) as usize;
                            acc += pg.get(y, x) * pin.get(yy, xx);
                        }
                    }
                    grad[a * k + b] += acc;
                }
            }
        }
        Ok(grad)
    }

    /// Loss and kernel gradient for one pair.
    pub fn loss_and_gradient(
        &self,
        pair: &Pair,
        loss: LossKind,
        params: &crate::loss::GflParams,
    ) -> Result<(LossBreakdown, Vec<f64>)> {
        let out = self.apply(&pair.degraded)?;
        let (breakdown, grad_out) = loss.evaluate(&out, &pair.target, params)?;
        Ok((breakdown, self.kernel_gradient(&pair.degraded, &grad_out)?))
    }
}

/// Splits off the held-out tail: the last `max(1, n/5)` pairs. A single
/// pair is used for both training and evaluation.
fn split(corpus: &[Pair]) -> (&[Pair], &[Pair]) {
    if corpus.len() < 2 {
        return (corpus, corpus);
    }
    let held = (corpus.len() / 5).max(1);
    corpus.split_at(corpus.len() - held)
}

/// Trains a shared linear filter by SGD over the training pairs (fixed
/// order, one update per pair, `config.steps` epochs) and evaluates it on
/// the held-out pairs. Outputs are clamped to `[0, 1]` for evaluation only.
pub fn train_linear_restorer(
    corpus: &[Pair],
    config: &ExperimentConfig,
    kernel_size: usize,
) -> Result<(LinearRestorer, MetricsReport)> {
    config.validate()?;
    if config.task != Task::Denoising {
        return Err(Error::InvalidConfig(
            "the linear restorer is trained on denoising pairs only".into(),
        ));
    }
    let first = corpus
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty corpus".into()))?;
    let dims = first.target.dims();
    for pair in corpus {
        if pair.target.dims() != dims || pair.degraded.dims() != dims {
            return Err(Error::DimensionMismatch(
                "corpus pairs must share one size".into(),
            ));
        }
    }

    let mut kernel = LinearRestorer::identity(kernel_size)?;
    let (train, held_out) = split(corpus);
    let mut params = initial_params(config.epsilon, dims.0, dims.1)?;
    let mut driver = match (&config.schedule, config.loss) {
        (Some(s), LossKind::Gfl) => Some(ScheduleDriver::new(s, dims.0, dims.1)?),
        _ => None,
    };

    let mut history = Vec::with_capacity(config.steps);
    for epoch in 1..=config.steps {
        if let Some(d) = driver.as_mut() {
            if epoch <= d.epochs() {
                d.begin_epoch(&mut params)?;
            }
        }
        let mut sums = [0.0; 4];
        let mut psnr_sum = 0.0;
        for pair in train {
            let (bd, grad) = kernel.loss_and_gradient(pair, config.loss, &params)?;
            if !bd.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss { step: epoch });
            }
            if let Some(d) = driver.as_mut() {
                d.record_loss(bd.total);
            }
            for (s, v) in sums
                .iter_mut()
                .zip([bd.ch_c, bd.pi_c, bd.theta_c, bd.total])
            {
                *s += v;
            }
            psnr_sum += super::psnr(&kernel.apply(&pair.degraded)?.clamp01(), &pair.target)?;
            for (w, g) in kernel.weights.iter_mut().zip(&grad) {
                *w -= config.learning_rate * g;
            }
        }
        let n = train.len() as f64;
        history.push(HistoryRow {
            step: epoch,
            breakdown: LossBreakdown {
                ch_c: sums[0] / n,
                pi_c: sums[1] / n,
                theta_c: sums[2] / n,
                total: sums[3] / n,
            },
            omega: driver.as_ref().map(|d| d.omega()),
            psnr: psnr_sum / n,
        });
    }

    let mut per_image = Vec::with_capacity(held_out.len());
    for (i, pair) in held_out.iter().enumerate() {
        let restored = kernel.apply(&pair.degraded)?.clamp01();
        let index = corpus.len() - held_out.len() + i;
        per_image.push(ImageMetrics::measure(
            &format!("{index}"),
            &pair.degraded,
            &restored,
            &pair.target,
        )?);
    }
    let m = per_image.len() as f64;
    let mean = |f: fn(&ImageMetrics) -> f64| per_image.iter().map(f).sum::<f64>() / m;
    let report = MetricsReport {
        psnr: mean(|x| x.psnr_out),
        ssim: mean(|x| x.ssim_out),
        psnr_in: mean(|x| x.psnr_in),
        ssim_in: mean(|x| x.ssim_in),
        history,
        omega_trace: driver.map(|d| d.omega_trace).unwrap_or_default(),
        per_image,
    };
    Ok((kernel, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synthetic_image;

    fn clean_pair(seed: u64) -> Pair {
        let img = synthetic_image(32, 32, 1, seed).unwrap();
        Pair {
            degraded: img.clone(),
            target: img,
        }
    }

    #[test]
    fn identity_kernel_is_identity() {
        let img = synthetic_image(16, 16, 3, 1).unwrap();
        let k = LinearRestorer::identity(5).unwrap();
        assert_eq!(k.apply(&img).unwrap(), img);
    }

    #[test]
    fn kernel_size_checked() {
        assert!(LinearRestorer::identity(4).is_err());
        assert!(LinearRestorer::identity(11).is_err());
        assert!(LinearRestorer::from_weights(3, vec![0.0; 8]).is_err());
    }

    #[test]
    fn shift_kernel_moves_image() {
        // w[1][2] = 1 reads in(y, x + 1)
        let mut w = vec![0.0; 9];
        w[5] = 1.0;
        let k = LinearRestorer::from_weights(3, w).unwrap();
        let img = synthetic_image(16, 16, 1, 2).unwrap();
        let out = k.apply(&img).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(out.get(0, y, x), img.get(0, y, (x + 1) % 16));
            }
        }
    }

    #[test]
    fn noiseless_corpus_keeps_identity() {
        let corpus: Vec<Pair> = (0..3).map(clean_pair).collect();
        let cfg = ExperimentConfig::new(Task::Denoising, LossKind::Mse, 5, 0.1);
        let (kernel, report) = train_linear_restorer(&corpus, &cfg, 3).unwrap();
        let identity = LinearRestorer::identity(3).unwrap();
        for (a, b) in kernel.weights().iter().zip(identity.weights()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert_eq!(report.per_image.len(), 1);
    }

    #[test]
    fn rejects_mixed_sizes_and_sr() {
        let corpus = vec![clean_pair(1), {
            let img = synthetic_image(16, 16, 1, 2).unwrap();
            Pair {
                degraded: img.clone(),
                target: img,
            }
        }];
        let cfg = ExperimentConfig::new(Task::Denoising, LossKind::Mse, 1, 0.1);
        assert!(train_linear_restorer(&corpus, &cfg, 3).is_err());
        let cfg = ExperimentConfig::new(Task::SuperResolution, LossKind::Mse, 1, 0.1);
        assert!(train_linear_restorer(&corpus[..1], &cfg, 3).is_err());
        assert!(train_linear_restorer(&[], &cfg, 3).is_err());
    }

    #[test]
    fn split_holds_out_tail() {
        let corpus: Vec<Pair> = (0..10).map(clean_pair).collect();
        let (train, held) = split(&corpus);
        assert_eq!((train.len(), held.len()), (8, 2));
        let (train, held) = split(&corpus[..3]);
        assert_eq!((train.len(), held.len()), (2, 1));
    }
}
