//! Skip-gram with negative sampling over walk corpora.

use std::cell::Cell;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::EmbeddingMatrix;

pub const MIN_LEARNING_RATE: f64 = 1e-4;
/// Exponent applied to corpus frequencies for the noise distribution.
pub const UNIGRAM_POWER: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// Strictly single-threaded; bit-reproducible.
    Deterministic,
    /// Lock-free concurrent updates across rayon workers; not reproducible.
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub initial_lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub mode: TrainMode,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 64,
            window: 5,
            negatives: 5,
            initial_lr: 0.025,
            epochs: 3,
            seed: 0,
            mode: TrainMode::Deterministic,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 || self.epochs == 0 {
            return Err(Error::InvalidArgument(
                "skip-gram dim, window, negatives and epochs must be positive".into(),
            ));
        }
        if !(self.initial_lr > 0.0) {
            return Err(Error::InvalidArgument("skip-gram learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Mean SGNS loss per (center, context) pair for each epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramHistory {
    pub epoch_loss: Vec<f64>,
}

/// Element storage shared by the two training modes.
trait Weights {
    fn get(&self, i: usize) -> f32;
    fn set(&self, i: usize, v: f32);
}

struct CellWeights<'a>(&'a [Cell<f32>]);

impl Weights for CellWeights<'_> {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        self.0[i].get()
    }
    #[inline]
    fn set(&self, i: usize, v: f32) {
        self.0[i].set(v)
    }
}

struct AtomicWeights(Vec<AtomicU32>);

impl Weights for AtomicWeights {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        f32::from_bits(self.0[i].load(Ordering::Relaxed))
    }
    #[inline]
    fn set(&self, i: usize, v: f32) {
        self.0[i].store(v.to_bits(), Ordering::Relaxed)
    }
}

/// `-log(sigmoid(x))`, stable for large |x|.
#[inline]
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Trainer<'a, W: Weights> {
    dim: usize,
    negatives: usize,
    noise: &'a WeightedAliasIndex<f64>,
    center: &'a W,
    context: &'a W,
}

impl<W: Weights> Trainer<'_, W> {
    /// One SGD step on `(c, o)` plus sampled negatives; returns the loss
    /// before the update.
    fn step<R: Rng>(&self, c: usize, o: usize, lr: f64, rng: &mut R, grad: &mut [f64], uc: &mut [f64]) -> f64 {
        let dim = self.dim;
        let cbase = c * dim;
        for k in 0..dim {
            uc[k] = self.center.get(cbase + k) as f64;
            grad[k] = 0.0;
        }
        let mut loss = 0.0;
        for s in 0..=self.negatives {
            let (target, label) = if s == 0 {
                (o, 1.0)
            } else {
                let n = self.noise.sample(rng);
                if n == o {
                    continue;
                }
                (n, 0.0)
            };
            let tbase = target * dim;
            let mut f = 0.0;
            for k in 0..dim {
                f += uc[k] * self.context.get(tbase + k) as f64;
            }
            loss += if label == 1.0 { neg_log_sigmoid(f) } else { neg_log_sigmoid(-f) };
            let g = (label - sigmoid(f)) * lr;
            for k in 0..dim {
                let vt = self.context.get(tbase + k) as f64;
                grad[k] += g * vt;
                self.context.set(tbase + k, (vt + g * uc[k]) as f32);
            }
        }
        for k in 0..dim {
            self.center.set(cbase + k, (uc[k] + grad[k]) as f32);
        }
        loss
    }

    /// Train on every (center, context) pair of one walk.
    fn walk<R: Rng>(&self, walk: &[u32], window: usize, lr: f64, rng: &mut R, grad: &mut [f64], uc: &mut [f64]) -> (f64, usize) {
        let (mut loss, mut pairs) = (0.0, 0);
        for (i, &c) in walk.iter().enumerate() {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(walk.len() - 1);
            for (j, &o) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                if j == i {
                    continue;
                }
                loss += self.step(c as usize, o as usize, lr, rng, grad, uc);
                pairs += 1;
            }
        }
        (loss, pairs)
    }
}

fn noise_distribution(walks: &[Vec<u32>], node_count: usize) -> Result<WeightedAliasIndex<f64>> {
    let mut freq = vec![0u64; node_count];
    for w in walks {
        for &v in w {
            let v = v as usize;
            if v >= node_count {
                return Err(Error::InvalidNode(v));
            }
            freq[v] += 1;
        }
    }
    let weights: Vec<f64> = freq.iter().map(|&f| (f as f64).powf(UNIGRAM_POWER)).collect();
    WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidArgument(format!("noise distribution: {e}")))
}

fn learning_rate(cfg: &SkipGramConfig, done: usize, total: usize) -> f64 {
    let progress = done as f64 / total.max(1) as f64;
    (cfg.initial_lr - (cfg.initial_lr - MIN_LEARNING_RATE) * progress).max(MIN_LEARNING_RATE)
}

/// Train node vectors from walks over a graph with `node_count` nodes.
///
/// Center vectors start uniform in `[-0.5/dim, 0.5/dim]`, context vectors
/// at zero. The learning rate decays linearly per walk from `initial_lr` to
/// [`MIN_LEARNING_RATE`] over all epochs.
pub fn train_skipgram(walks: &[Vec<u32>], node_count: usize, cfg: &SkipGramConfig) -> Result<(EmbeddingMatrix, SkipGramHistory)> {
    cfg.validate()?;
    if walks.iter().all(|w| w.len() < 2) {
        return Err(Error::InvalidArgument("walk corpus has no context pairs".into()));
    }
    let dim = cfg.dim;
    let noise = noise_distribution(walks, node_count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = 0.5 / dim as f64;
    let mut center: Vec<f32> = (0..node_count * dim)
        .map(|_| rng.random_range(-half..half) as f32)
        .collect();
    let mut context = vec![0.0f32; node_count * dim];
    let total = walks.len() * cfg.epochs;

    let epoch_loss = match cfg.mode {
        TrainMode::Deterministic => {
            let c = CellWeights(Cell::from_mut(center.as_mut_slice()).as_slice_of_cells());
            let o = CellWeights(Cell::from_mut(context.as_mut_slice()).as_slice_of_cells());
            let trainer = Trainer {
                dim,
                negatives: cfg.negatives,
                noise: &noise,
                center: &c,
                context: &o,
            };
            let (mut grad, mut uc) = (vec![0.0; dim], vec![0.0; dim]);
            let mut losses = Vec::with_capacity(cfg.epochs);
            let mut done = 0;
            for _ in 0..cfg.epochs {
                let (mut loss, mut pairs) = (0.0, 0usize);
                for w in walks {
                    let lr = learning_rate(cfg, done, total);
                    let (l, p) = trainer.walk(w, cfg.window, lr, &mut rng, &mut grad, &mut uc);
                    loss += l;
                    pairs += p;
                    done += 1;
                }
                losses.push(loss / pairs.max(1) as f64);
            }
            losses
        }
        TrainMode::Parallel => {
            let c = AtomicWeights(center.iter().map(|v| AtomicU32::new(v.to_bits())).collect());
            let o = AtomicWeights(context.iter().map(|v| AtomicU32::new(v.to_bits())).collect());
            let trainer = Trainer {
                dim,
                negatives: cfg.negatives,
                noise: &noise,
                center: &c,
                context: &o,
            };
            let done = AtomicU64::new(0);
            let chunk = walks.len().div_ceil(rayon::current_num_threads().max(1) * 8).max(1);
            let mut losses = Vec::with_capacity(cfg.epochs);
            for epoch in 0..cfg.epochs {
                let (loss, pairs) = walks
                    .par_chunks(chunk)
                    .enumerate()
                    .map(|(ci, ws)| {
                        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                        rng.set_stream((epoch * walks.len() + ci) as u64 + 1);
                        let (mut grad, mut uc) = (vec![0.0; dim], vec![0.0; dim]);
                        let (mut loss, mut pairs) = (0.0, 0usize);
                        for w in ws {
                            let lr = learning_rate(cfg, done.fetch_add(1, Ordering::Relaxed) as usize, total);
                            let (l, p) = trainer.walk(w, cfg.window, lr, &mut rng, &mut grad, &mut uc);
                            loss += l;
                            pairs += p;
                        }
                        (loss, pairs)
                    })
                    .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
                losses.push(loss / pairs.max(1) as f64);
            }
            center = c.0.iter().map(|a| f32::from_bits(a.load(Ordering::Relaxed))).collect();
            context = o.0.iter().map(|a| f32::from_bits(a.load(Ordering::Relaxed))).collect();
            losses
        }
    };

    if center.iter().chain(&context).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("skip-gram produced non-finite vectors".into()));
    }
    Ok((
        EmbeddingMatrix {
            dim,
            vectors: center,
            context_vectors: context,
        },
        SkipGramHistory { epoch_loss },
    ))
}
