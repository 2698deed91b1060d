//! Empirical risk minimization with minibatch Adam and early stopping.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dgp::SupervisedPairs;
use crate::losses::LossSpec;
use crate::mlp::{gather_rows, ClassSpec, NetworkArchitecture, NetworkParams};
use crate::seed;
use crate::{Error, Result, CSV_VERSION_LINE};

const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Epochs without a strict improvement of the best empirical risk before stopping.
    pub patience: usize,
    pub max_epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// When set, every optimizer step is followed by a projection onto the class
    /// and outputs are clamped to its output bound.
    pub class_spec: Option<ClassSpec>,
    pub shuffle: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 32,
            patience: 30,
            max_epochs: 1000,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            class_spec: None,
            shuffle: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidSpec(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidSpec("batch size must be >= 1".into()));
        }
        if self.patience == 0 {
            return Err(Error::InvalidSpec("patience must be >= 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidSpec("max epochs must be >= 1".into()));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::InvalidSpec(format!("{name} must lie in (0, 1), got {b}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidSpec("adam epsilon must be positive".into()));
        }
        if let Some(spec) = &self.class_spec {
            spec.validate()?;
        }
        Ok(())
    }

    fn clamp(&self) -> Option<f64> {
        self.class_spec
            .as_ref()
            .map(|c| c.output_bound)
            .filter(|f| f.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Snapshot with the lowest empirical risk seen at an epoch boundary.
    pub params: NetworkParams,
    pub best_risk: f64,
    pub epochs_run: usize,
    /// Full-sample empirical risk after each epoch.
    pub history: Vec<f64>,
}

impl TrainReport {
    pub fn write_history_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_VERSION_LINE}")?;
        writeln!(w, "epoch,risk")?;
        for (i, r) in self.history.iter().enumerate() {
            writeln!(w, "{},{r}", i + 1)?;
        }
        Ok(())
    }
}

/// `(1/n) Σ ℓ(h(X_i), Y_i)`.
pub fn empirical_risk(params: &NetworkParams, pairs: &SupervisedPairs, loss: &LossSpec) -> Result<f64> {
    empirical_risk_clamped(params, pairs, loss, None)
}

pub fn empirical_risk_clamped(
    params: &NetworkParams,
    pairs: &SupervisedPairs,
    loss: &LossSpec,
    clamp: Option<f64>,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData("empirical risk of an empty sample".into()));
    }
    let out = params.forward_batch(pairs.x(), clamp)?;
    let total: f64 = out
        .iter()
        .zip(pairs.y().iter())
        .map(|(h, y)| loss.loss_unchecked(h - y))
        .sum();
    Ok(total / pairs.len() as f64)
}

struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(cfg: &TrainConfig, n: usize) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.epsilon,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        let step = self.lr / bc1;
        for (((p, g), m), v) in theta.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= step * *m / ((*v / bc2).sqrt() + self.eps);
        }
    }
}

/// Fit a network of architecture `arch` by minimizing the empirical risk.
pub fn fit(pairs: &SupervisedPairs, arch: &NetworkArchitecture, loss: &LossSpec, cfg: &TrainConfig) -> Result<TrainReport> {
    let mut rng = seed::rng_from(seed::derive(cfg.seed, &[STREAM_INIT]));
    let init = NetworkParams::he_uniform(arch.clone(), &mut rng);
    fit_from(pairs, init, loss, cfg)
}

/// As [`fit`] but starting from the given parameters.
pub fn fit_from(pairs: &SupervisedPairs, init: NetworkParams, loss: &LossSpec, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    loss.validate()?;
    if pairs.is_empty() {
        return Err(Error::InsufficientData("cannot train on an empty sample".into()));
    }
    if pairs.dim() != init.arch().input_dim() {
        return Err(Error::Shape(format!(
            "data has {} features, network expects {}",
            pairs.dim(),
            init.arch().input_dim()
        )));
    }
    let clamp = cfg.clamp();
    let mut params = init;
    if let Some(spec) = &cfg.class_spec {
        params.project_in_place(spec)?;
    }
    let n = pairs.len();
    let mut adam = Adam::new(cfg, params.theta().len());
    let mut grad = vec![0.0; params.theta().len()];
    let mut order: Vec<usize> = (0..n).collect();

    let mut best = params.clone();
    let mut best_risk = f64::INFINITY;
    let mut history = Vec::new();
    let mut stale = 0;

    for epoch in 1..=cfg.max_epochs {
        if cfg.shuffle {
            order.sort_unstable();
            let mut rng = seed::rng_from(seed::derive(cfg.seed, &[STREAM_SHUFFLE, epoch as u64]));
            order.shuffle(&mut rng);
        }
        for (b, rows) in order.chunks(cfg.batch_size).enumerate() {
            let xb = gather_rows(pairs.x(), rows);
            let scale = 1.0 / rows.len() as f64;
            let mut finite = true;
            params.backward_batch(
                xb.view(),
                clamp,
                |i, h| {
                    let r = h - pairs.y[rows[i]];
                    if !r.is_finite() {
                        finite = false;
                    }
                    loss.derivative_unchecked(r) * scale
                },
                &mut grad,
            )?;
            if !finite || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::TrainingDiverged { epoch, batch: b + 1 });
            }
            adam.step(params.theta_mut(), &grad);
            if let Some(spec) = &cfg.class_spec {
                params.project_in_place(spec)?;
            }
        }
        let risk = empirical_risk_clamped(&params, pairs, loss, clamp)?;
        if !risk.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                batch: n.div_ceil(cfg.batch_size),
            });
        }
        history.push(risk);
        if risk < best_risk {
            best_risk = risk;
            best.clone_from(&params);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }

    Ok(TrainReport {
        params: best,
        best_risk,
        epochs_run: history.len(),
        history,
    })
}
