//! Losses, exact backpropagation through time (in [`backprop`]), the
//! finite-difference gradient oracle, Adam, dropout mask generation, and
//! the seeded training loop.

pub mod backprop;
pub mod check;

pub use backprop::{backward, batch_loss, finite_diff_grad, Example};

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::data::{DatasetRecord, TaskKind, TaskSchema};
use crate::metrics::{self, MetricError};
use crate::model::{BilstmModel, Hyperparams, LstmParams, ModelError};
use crate::rng::Rng;
use crate::smiles::Vocabulary;
use crate::tensor::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("batch has no unmasked label entries")]
    EmptyBatch,
    #[error("training and validation sets must be non-empty")]
    EmptyDataset,
    #[error("non-finite loss at epoch {epoch}, batch {batch}; lower the learning rate (1e-3 is a safe fallback)")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("finite-difference step must be positive")]
    InvalidEps,
    #[error("dropout rate must lie in [0, 1), got {0}")]
    RateOutOfRange(f64),
    #[error("shape mismatch in {0}")]
    ShapeMismatch(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("validation metric failed: {0}")]
    Eval(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Probabilities are clipped to [1e-12, 1 - 1e-12] before taking logs.
pub const BCE_CLIP: f64 = 1e-12;

/// Binary cross-entropy for one prediction/label pair.
pub fn bce_loss(p: f64, y: f64) -> f64 {
    debug_assert!(y == 0.0 || y == 1.0, "binary label expected");
    let p = p.clamp(BCE_CLIP, 1.0 - BCE_CLIP);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Squared error for one prediction/target pair.
pub fn mse_loss(pred: f64, y: f64) -> f64 {
    (pred - y) * (pred - y)
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else
/// 1/(1-rate), so masked forward passes need no inference-time rescaling.
pub fn make_dropout_mask(rng: &mut Rng, width: usize, rate: f64) -> Result<Vec<f64>, TrainError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(TrainError::RateOutOfRange(rate));
    }
    let keep_scale = 1.0 / (1.0 - rate);
    Ok((0..width)
        .map(|_| if rng.next_f64() < rate { 0.0 } else { keep_scale })
        .collect())
}

/// Parameter-shaped gradient container, one tensor per model tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embedding: Matrix,
    pub fwd: LstmParams,
    pub bwd: LstmParams,
    pub head_w: Matrix,
    pub head_b: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(model: &BilstmModel) -> Self {
        Gradients {
            embedding: Matrix::zeros(model.embedding.rows, model.embedding.cols),
            fwd: LstmParams::zeros(model.config.units, model.config.embed_dim),
            bwd: LstmParams::zeros(model.config.units, model.config.embed_dim),
            head_w: Matrix::zeros(model.head_w.rows, model.head_w.cols),
            head_b: vec![0.0; model.head_b.len()],
        }
    }

    /// Named tensor views in the model's serialization order.
    pub fn blocks(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("embedding", &self.embedding.data),
            ("fwd.W_f", &self.fwd.w_f.data),
            ("fwd.W_i", &self.fwd.w_i.data),
            ("fwd.W_o", &self.fwd.w_o.data),
            ("fwd.W_c", &self.fwd.w_c.data),
            ("fwd.b_f", &self.fwd.b_f),
            ("fwd.b_i", &self.fwd.b_i),
            ("fwd.b_o", &self.fwd.b_o),
            ("fwd.b_c", &self.fwd.b_c),
            ("bwd.W_f", &self.bwd.w_f.data),
            ("bwd.W_i", &self.bwd.w_i.data),
            ("bwd.W_o", &self.bwd.w_o.data),
            ("bwd.W_c", &self.bwd.w_c.data),
            ("bwd.b_f", &self.bwd.b_f),
            ("bwd.b_i", &self.bwd.b_i),
            ("bwd.b_o", &self.bwd.b_o),
            ("bwd.b_c", &self.bwd.b_c),
            ("head_W", &self.head_w.data),
            ("head_b", &self.head_b),
        ]
    }

    pub fn blocks_mut(&mut self) -> Vec<(&'static str, &mut Vec<f64>)> {
        vec![
            ("embedding", &mut self.embedding.data),
            ("fwd.W_f", &mut self.fwd.w_f.data),
            ("fwd.W_i", &mut self.fwd.w_i.data),
            ("fwd.W_o", &mut self.fwd.w_o.data),
            ("fwd.W_c", &mut self.fwd.w_c.data),
            ("fwd.b_f", &mut self.fwd.b_f),
            ("fwd.b_i", &mut self.fwd.b_i),
            ("fwd.b_o", &mut self.fwd.b_o),
            ("fwd.b_c", &mut self.fwd.b_c),
            ("bwd.W_f", &mut self.bwd.w_f.data),
            ("bwd.W_i", &mut self.bwd.w_i.data),
            ("bwd.W_o", &mut self.bwd.w_o.data),
            ("bwd.W_c", &mut self.bwd.w_c.data),
            ("bwd.b_f", &mut self.bwd.b_f),
            ("bwd.b_i", &mut self.bwd.b_i),
            ("bwd.b_o", &mut self.bwd.b_o),
            ("bwd.b_c", &mut self.bwd.b_c),
            ("head_W", &mut self.head_w.data),
            ("head_b", &mut self.head_b),
        ]
    }

    pub fn global_norm(&self) -> f64 {
        let sum_sq: f64 = self
            .blocks()
            .iter()
            .flat_map(|(_, d)| d.iter())
            .map(|g| g * g)
            .sum();
        sum_sq.sqrt()
    }

    /// Scales all gradients down so the global norm does not exceed `max`.
    pub fn clip_global_norm(&mut self, max: f64) {
        let norm = self.global_norm();
        if norm > max {
            let scale = max / norm;
            for (_, d) in self.blocks_mut() {
                for g in d.iter_mut() {
                    *g *= scale;
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.blocks()
            .iter()
            .all(|(_, d)| d.iter().all(|g| g.is_finite()))
    }
}

/// Adam moment accumulators and constants.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(model: &BilstmModel) -> Self {
        AdamState {
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One Adam update:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
/// with bias-corrected m_hat, v_hat.
pub fn adam_step(
    model: &mut BilstmModel,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<(), TrainError> {
    state.t += 1;
    let (beta1, beta2, eps) = (state.beta1, state.beta2, state.epsilon);
    let bc1 = 1.0 - beta1.powi(state.t.min(i32::MAX as u64) as i32);
    let bc2 = 1.0 - beta2.powi(state.t.min(i32::MAX as u64) as i32);
    let theta_blocks = model.param_blocks_mut();
    let g_blocks = grads.blocks();
    let m_blocks = state.m.blocks_mut();
    let v_blocks = state.v.blocks_mut();
    for (((name, theta), (_, g)), ((_, m), (_, v))) in theta_blocks
        .into_iter()
        .zip(g_blocks)
        .zip(m_blocks.into_iter().zip(v_blocks))
    {
        if theta.len() != g.len() || theta.len() != m.len() {
            return Err(TrainError::ShapeMismatch(name));
        }
        for k in 0..theta.len() {
            m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
            v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            theta[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_metric: f64,
}

/// Losses and validation metrics for every completed epoch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("epoch,train_loss,valid_metric\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{}\n", r.epoch, r.train_loss, r.valid_metric));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), TrainError> {
        fs::write(path, self.to_csv_string())
            .map_err(|e| TrainError::Model(ModelError::Io(e.to_string())))
    }
}

fn validate_config(hp: &Hyperparams) -> Result<(), TrainError> {
    if !(0.0..1.0).contains(&hp.dropout_rate) {
        return Err(TrainError::RateOutOfRange(hp.dropout_rate));
    }
    if !(hp.learning_rate >= 0.0 && hp.learning_rate.is_finite()) {
        return Err(TrainError::InvalidConfig(
            "learning_rate must be finite and non-negative".to_string(),
        ));
    }
    for (value, name) in [
        (hp.units, "units"),
        (hp.embed_dim, "embed_dim"),
        (hp.max_len, "max_len"),
        (hp.epochs, "epochs"),
        (hp.batch_size, "batch_size"),
    ] {
        if value == 0 {
            return Err(TrainError::InvalidConfig(format!("{name} must be positive")));
        }
    }
    if let Some(c) = hp.clip_norm {
        if !(c > 0.0 && c.is_finite()) {
            return Err(TrainError::InvalidConfig(
                "clip_norm must be positive when set".to_string(),
            ));
        }
    }
    Ok(())
}

/// Whether the candidate metric beats the incumbent, given the direction.
fn improves(higher_better: bool, candidate: f64, best: f64) -> bool {
    if higher_better {
        candidate > best
    } else {
        candidate < best
    }
}

/// Seeded end-to-end training. Per epoch: shuffle, mini-batch, forward with
/// fresh dropout masks, exact backward, optional global-norm clip, Adam.
/// Records train loss and the validation metric (mean ROC-AUC for
/// classification, RMSE for regression) each epoch and returns the
/// best-validation-epoch snapshot. When the validation set supports no
/// metric (a single class on every task), selection falls back to train
/// loss. The RNG consumption order (init draws, then per epoch the shuffle
/// followed by per-batch dropout masks) is fixed and part of the
/// determinism contract.
pub fn train(
    hp: &Hyperparams,
    vocab: Vocabulary,
    train_set: &[DatasetRecord],
    valid_set: &[DatasetRecord],
    schema: &TaskSchema,
) -> Result<(BilstmModel, TrainHistory), TrainError> {
    validate_config(hp)?;
    if train_set.is_empty() || valid_set.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let kind = if schema.is_regression() {
        TaskKind::Regression
    } else {
        TaskKind::Classification
    };
    let mut rng = Rng::new(hp.seed);
    let mut model = BilstmModel::init(vocab, schema.task_names(), kind, hp.clone(), &mut rng);

    // Centering the regression head on the training-target mean keeps early
    // losses small without touching the targets themselves.
    if kind == TaskKind::Regression {
        let (mut sum, mut count) = (0.0, 0usize);
        for r in train_set {
            if r.mask[0] {
                sum += r.labels[0];
                count += 1;
            }
        }
        if count > 0 {
            model.head_b[0] = sum / count as f64;
        }
    }

    let examples = train_set
        .iter()
        .map(|r| Example::from_record(r, &model.vocab, hp.max_len))
        .collect::<Result<Vec<_>, _>>()
        .map_err(ModelError::Codec)?;

    let valid_evaluable = match metrics::evaluate(&model, valid_set, schema) {
        Ok(_) => true,
        Err(MetricError::NothingEvaluable) => false,
        Err(e) => return Err(TrainError::Eval(e.to_string())),
    };
    let higher_better = valid_evaluable && kind == TaskKind::Classification;

    let mut adam = AdamState::new(&model);
    let mut history = TrainHistory::default();
    let mut best: Option<(f64, BilstmModel)> = None;
    let mut epochs_since_best = 0usize;

    for epoch in 1..=hp.epochs {
        let mut order: Vec<usize> = (0..examples.len()).collect();
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut entry_sum = 0usize;
        for (batch_idx, chunk) in order.chunks(hp.batch_size).enumerate() {
            let batch: Vec<Example> = chunk.iter().map(|&i| examples[i].clone()).collect();
            let dropout = if hp.dropout_rate > 0.0 {
                let masks = batch
                    .iter()
                    .map(|_| make_dropout_mask(&mut rng, 2 * hp.units, hp.dropout_rate))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(masks)
            } else {
                None
            };
            let (loss, mut grads) = backward(&model, &batch, dropout.as_deref())?;
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    batch: batch_idx,
                });
            }
            let entries: usize = batch
                .iter()
                .map(|ex| ex.mask.iter().filter(|&&m| m).count())
                .sum();
            loss_sum += loss * entries as f64;
            entry_sum += entries;
            if let Some(c) = hp.clip_norm {
                grads.clip_global_norm(c);
            }
            adam_step(&mut model, &grads, &mut adam, hp.learning_rate)?;
        }
        let train_loss = loss_sum / entry_sum as f64;
        let valid_metric = if valid_evaluable {
            metrics::evaluate(&model, valid_set, schema)
                .map_err(|e| TrainError::Eval(e.to_string()))?
                .mean
        } else {
            train_loss
        };
        history.records.push(EpochRecord {
            epoch,
            train_loss,
            valid_metric,
        });
        let is_better = match &best {
            None => true,
            Some((incumbent, _)) => improves(higher_better, valid_metric, *incumbent),
        };
        if is_better {
            best = Some((valid_metric, model.clone()));
            epochs_since_best = 0;
        } else {
            epochs_since_best += 1;
            if hp.patience > 0 && epochs_since_best >= hp.patience {
                break;
            }
        }
    }
    let (_, best_model) = best.expect("at least one epoch ran");
    Ok((best_model, history))
}
