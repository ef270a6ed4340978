use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::metrics::Metrics;
use super::network::{bce_with_logit, sigmoid, ModelParams, Network};
use super::spec::TowerSpec;

pub const VALIDATION_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 256,
            epochs: 30,
            patience: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if self.batch_size == 0 || self.epochs == 0 || self.patience == 0 {
            return Err(Error::InvalidArgument("batch size, epochs and patience must be positive".into()));
        }
        Ok(())
    }
}

pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: ModelParams,
    v: ModelParams,
}

impl Adam {
    pub fn new(params: &ModelParams) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams, lr: f64) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        for (((p, m), v), g) in params
            .values_mut()
            .zip(self.m.values_mut())
            .zip(self.v.values_mut())
            .zip(grads.values())
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub validation_rows: usize,
    pub stopped_early: bool,
}

fn labels_f64(y: &[u8]) -> Vec<f64> {
    y.iter().map(|&l| if l != 0 { 1.0 } else { 0.0 }).collect()
}

/// Loss and F1 of `params` on the given rows.
fn score(net: &Network, params: &ModelParams, x: ArrayView2<'_, f64>, y: &[u8]) -> Result<(f64, f64)> {
    let logits = net.forward(params, x)?.logits();
    let loss = logits
        .iter()
        .zip(y)
        .map(|(&z, &t)| bce_with_logit(z, f64::from(t.min(1))))
        .sum::<f64>()
        / y.len() as f64;
    let probs: Vec<f64> = logits.iter().map(|&z| sigmoid(z)).collect();
    Ok((loss, Metrics::from_probabilities(&probs, y)?.f1))
}

/// Mini-batch Adam on mean binary cross-entropy over already standardized
/// rows. A seeded tenth of the rows is held out; training stops once
/// validation F1 (ties broken by validation loss) has not improved for
/// `patience` epochs, and the best parameters are returned. With fewer than
/// ten rows there is no hold-out and the training rows are monitored.
pub fn train(spec: &TowerSpec, x: ArrayView2<'_, f64>, y: &[u8], cfg: &TrainConfig) -> Result<(ModelParams, TrainHistory)> {
    cfg.validate()?;
    let net = Network::compile(spec)?;
    if x.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            actual: y.len(),
        });
    }
    if x.ncols() != net.input_width() {
        return Err(Error::DimensionMismatch {
            expected: net.input_width(),
            actual: x.ncols(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = net.init_params(cfg.seed);
    let mut adam = Adam::new(&params);

    let mut rows: Vec<usize> = (0..x.nrows()).collect();
    rows.shuffle(&mut rng);
    let n_val = (x.nrows() as f64 * VALIDATION_FRACTION).floor() as usize;
    let (val_rows, train_rows) = rows.split_at(n_val);
    let monitor = if val_rows.is_empty() { train_rows } else { val_rows };
    let mut monitor_rows = monitor.to_vec();
    monitor_rows.sort_unstable();
    let x_mon = x.select(Axis(0), &monitor_rows);
    let y_mon: Vec<u8> = monitor_rows.iter().map(|&i| y[i]).collect();

    let mut order = train_rows.to_vec();
    let mut history = TrainHistory {
        validation_rows: n_val,
        ..TrainHistory::default()
    };
    let mut best = (params.clone(), f64::NEG_INFINITY, f64::INFINITY);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let xb = x.select(Axis(0), chunk);
            let yb: Vec<f64> = labels_f64(&chunk.iter().map(|&i| y[i]).collect::<Vec<_>>());
            let (loss, grads) = net.loss_and_grad(&params, xb.view(), &yb)?;
            if !loss.is_finite() {
                return Err(Error::NanLoss { epoch, batch: b });
            }
            adam.step(&mut params, &grads, cfg.learning_rate);
            if !params.is_finite() {
                return Err(Error::NanLoss { epoch, batch: b });
            }
            total += loss * chunk.len() as f64;
        }
        let (val_loss, val_f1) = score(&net, &params, x_mon.view(), &y_mon)?;
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: total / order.len() as f64,
            val_loss,
            val_f1,
        });
        log::debug!("epoch {epoch}: train loss {:.5} val loss {val_loss:.5} val f1 {val_f1:.5}", total / order.len() as f64);
        if val_f1 > best.1 || (val_f1 == best.1 && val_loss < best.2) {
            best = (params.clone(), val_f1, val_loss);
            history.best_epoch = epoch;
        } else if epoch - history.best_epoch >= cfg.patience {
            history.stopped_early = true;
            break;
        }
    }
    Ok((best.0, history))
}

/// Logistic regression: the tower spec with a single input `X` and no
/// hidden layers, trained by [`train`].
pub fn train_logistic(x: ArrayView2<'_, f64>, y: &[u8], cfg: &TrainConfig) -> Result<(ModelParams, TrainHistory)> {
    let spec = TowerSpec::logistic(&[("X", x.ncols())])?;
    train(&spec, x, y, cfg)
}
