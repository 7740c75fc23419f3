//! Gradient-check harness: synthesizes a tiny random model and batch from
//! a seed, compares the analytic gradient against central differences, and
//! reports the worst relative error per parameter tensor. Shared by the
//! unit tests, the acceptance suite, and the command-line `gradcheck`.

use crate::data::TaskKind;
use crate::model::{BilstmModel, Hyperparams};
use crate::rng::Rng;
use crate::smiles::{EncodedSequence, Vocabulary, PAD_INDEX, UNK_INDEX};

use super::backprop::{backward, finite_diff_grad, Example};
use super::{make_dropout_mask, TrainError};

/// Central-difference step.
pub const GRADCHECK_EPS: f64 = 1e-4;

/// A check passes when every entry's relative error is below this.
pub const GRADCHECK_TOL: f64 = 1e-4;

/// Dimensions of the synthesized model and batch. The defaults keep the
/// finite-difference sweep cheap while still exercising every tensor.
#[derive(Debug, Clone)]
pub struct CheckDims {
    pub units: usize,
    pub embed_dim: usize,
    pub vocab_size: usize,
    pub n_tasks: usize,
    pub max_seq_len: usize,
    pub batch: usize,
}

impl Default for CheckDims {
    fn default() -> Self {
        CheckDims {
            units: 3,
            embed_dim: 4,
            vocab_size: 8,
            n_tasks: 2,
            max_seq_len: 6,
            batch: 2,
        }
    }
}

const CHAR_POOL: [char; 18] = [
    'C', 'N', 'O', 'S', 'P', 'F', 'I', 'B', 'c', 'n', 'o', 's', '=', '#', '(', ')', '1', '2',
];

/// Randomly initialized model over a synthetic vocabulary of exactly
/// `dims.vocab_size` entries (pad and unknown included).
pub fn gradcheck_model(seed: u64, dims: &CheckDims, kind: TaskKind) -> BilstmModel {
    assert!(
        (3..=2 + CHAR_POOL.len()).contains(&dims.vocab_size),
        "vocab_size out of range for the character pool"
    );
    let corpus: String = CHAR_POOL[..dims.vocab_size - 2].iter().collect();
    let vocab = Vocabulary::build(&[corpus.as_str()]).expect("non-empty corpus");
    let task_names = (0..dims.n_tasks).map(|k| format!("task_{k}")).collect();
    let config = Hyperparams {
        units: dims.units,
        embed_dim: dims.embed_dim,
        max_len: dims.max_seq_len,
        ..Default::default()
    };
    let mut rng = Rng::new(seed.wrapping_mul(2).wrapping_add(1));
    BilstmModel::init(vocab, task_names, kind, config, &mut rng)
}

/// Random batch for the model: variable true lengths, an occasional
/// unknown token, and random label masks (repaired so at least one entry
/// stays unmasked).
pub fn gradcheck_batch(seed: u64, dims: &CheckDims, model: &BilstmModel) -> Vec<Example> {
    let mut rng = Rng::new(seed.wrapping_mul(2));
    let mut batch = Vec::with_capacity(dims.batch);
    for _ in 0..dims.batch {
        let len = 1 + rng.below(dims.max_seq_len);
        let mut tokens: Vec<usize> = (0..len)
            .map(|_| {
                if rng.next_f64() < 0.1 {
                    UNK_INDEX
                } else {
                    2 + rng.below(model.vocab.size() - 2)
                }
            })
            .collect();
        tokens.resize(dims.max_seq_len, PAD_INDEX);
        let labels: Vec<f64> = (0..dims.n_tasks)
            .map(|_| match model.task_kind {
                TaskKind::Classification => rng.below(2) as f64,
                TaskKind::Regression => rng.uniform(-2.0, 2.0),
            })
            .collect();
        let mask: Vec<bool> = (0..dims.n_tasks).map(|_| rng.next_f64() < 0.8).collect();
        batch.push(Example {
            seq: EncodedSequence {
                tokens,
                true_length: len,
            },
            labels,
            mask,
        });
    }
    if batch.iter().all(|ex| ex.mask.iter().all(|&m| !m)) {
        batch[0].mask[0] = true;
    }
    batch
}

/// Worst relative error within one parameter tensor.
#[derive(Debug, Clone)]
pub struct BlockCheck {
    pub name: &'static str,
    pub max_rel_err: f64,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub blocks: Vec<BlockCheck>,
    pub max_rel_err: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err < GRADCHECK_TOL
    }
}

/// |analytic - reference| / max(|reference|, 1e-8).
pub fn rel_err(analytic: f64, reference: f64) -> f64 {
    (analytic - reference).abs() / reference.abs().max(1e-8)
}

/// Builds the seeded fixture, runs one exact backward pass and the full
/// central-difference sweep, and reports per-tensor worst relative errors.
/// With `perturb` set, one analytic entry is deliberately corrupted first;
/// a sound harness must then report a failure.
pub fn run_gradient_check(
    seed: u64,
    kind: TaskKind,
    dropout_rate: f64,
    dims: &CheckDims,
    perturb: bool,
) -> Result<CheckReport, TrainError> {
    let model = gradcheck_model(seed, dims, kind);
    let batch = gradcheck_batch(seed, dims, &model);
    let masks = if dropout_rate > 0.0 {
        let mut rng = Rng::new(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
        let masks = batch
            .iter()
            .map(|_| make_dropout_mask(&mut rng, 2 * dims.units, dropout_rate))
            .collect::<Result<Vec<_>, _>>()?;
        Some(masks)
    } else {
        None
    };
    let (_, mut analytic) = backward(&model, &batch, masks.as_deref())?;
    if perturb {
        analytic.fwd.w_f.data[0] += 1e-3;
    }
    let reference = finite_diff_grad(&model, &batch, masks.as_deref(), GRADCHECK_EPS)?;
    let mut blocks = Vec::new();
    let mut overall: f64 = 0.0;
    for ((name, a), (_, r)) in analytic.blocks().into_iter().zip(reference.blocks()) {
        let mut worst: f64 = 0.0;
        for (ga, gr) in a.iter().zip(r.iter()) {
            worst = worst.max(rel_err(*ga, *gr));
        }
        overall = overall.max(worst);
        blocks.push(BlockCheck {
            name,
            max_rel_err: worst,
        });
    }
    Ok(CheckReport {
        blocks,
        max_rel_err: overall,
    })
}
