//! Exact gradients for the bidirectional model: backpropagation through
//! time over the cached forward traces, plus a central-difference oracle
//! used by the gradient checks.

use crate::data::{DatasetRecord, TaskKind};
use crate::model::{BilstmModel, GateActivations, LstmParams, LstmState};
use crate::smiles::{encode, CodecError, EncodedSequence, Vocabulary};
use crate::tensor::concat;

use super::{bce_loss, mse_loss, Gradients, TrainError};

/// One training example: an encoded sequence with per-task labels and a
/// mask marking which label entries are observed.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub seq: EncodedSequence,
    pub labels: Vec<f64>,
    pub mask: Vec<bool>,
}

impl Example {
    /// Encodes a dataset record, truncating sequences longer than `max_len`.
    pub fn from_record(
        record: &DatasetRecord,
        vocab: &Vocabulary,
        max_len: usize,
    ) -> Result<Self, CodecError> {
        let (seq, _) = encode(vocab, &record.smiles, max_len)?;
        Ok(Example {
            seq,
            labels: record.labels.clone(),
            mask: record.mask.clone(),
        })
    }
}

fn validate_batch(
    model: &BilstmModel,
    batch: &[Example],
    dropout: Option<&[Vec<f64>]>,
) -> Result<(), TrainError> {
    if batch.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let n_tasks = model.n_tasks();
    for ex in batch {
        if ex.labels.len() != n_tasks || ex.mask.len() != n_tasks {
            return Err(TrainError::ShapeMismatch("example labels"));
        }
    }
    if let Some(masks) = dropout {
        if masks.len() != batch.len() {
            return Err(TrainError::ShapeMismatch("dropout masks"));
        }
        if masks.iter().any(|m| m.len() != 2 * model.config.units) {
            return Err(TrainError::ShapeMismatch("dropout mask width"));
        }
    }
    Ok(())
}

/// Total unmasked label entries across the batch. The per-entry mean over
/// this count is the quantity both the loss and the gradients normalize
/// by, which is what makes masking an entry exactly equivalent to deleting
/// it.
fn unmasked_entries(batch: &[Example]) -> usize {
    batch
        .iter()
        .map(|ex| ex.mask.iter().filter(|&&m| m).count())
        .sum()
}

fn entry_loss(kind: TaskKind, output: f64, label: f64) -> f64 {
    match kind {
        TaskKind::Classification => bce_loss(output, label),
        TaskKind::Regression => mse_loss(output, label),
    }
}

/// Mean loss over all unmasked label entries in the batch, with dropout
/// masks applied when given. This is the exact objective `backward`
/// differentiates.
pub fn batch_loss(
    model: &BilstmModel,
    batch: &[Example],
    dropout: Option<&[Vec<f64>]>,
) -> Result<f64, TrainError> {
    validate_batch(model, batch, dropout)?;
    let total_entries = unmasked_entries(batch);
    if total_entries == 0 {
        return Err(TrainError::EmptyBatch);
    }
    let mut total = 0.0;
    for (e, ex) in batch.iter().enumerate() {
        let mask_e = dropout.map(|m| m[e].as_slice());
        let (output, _) = model.forward(&ex.seq, mask_e)?;
        for k in 0..model.n_tasks() {
            if ex.mask[k] {
                total += entry_loss(model.task_kind, output[k], ex.labels[k]);
            }
        }
    }
    Ok(total / total_entries as f64)
}

/// Derivative of the per-entry loss with respect to the head
/// pre-activation, already divided by the entry count. For sigmoid plus
/// cross-entropy the two chain-rule factors collapse to p - y; for the
/// identity head and squared error it is 2 (pred - y).
fn head_delta(kind: TaskKind, output: f64, label: f64, total_entries: usize) -> f64 {
    let raw = match kind {
        TaskKind::Classification => output - label,
        TaskKind::Regression => 2.0 * (output - label),
    };
    raw / total_entries as f64
}

/// Runs backpropagation through time for one direction of one example.
///
/// `trace` holds the per-step states and gate activations in processing
/// order; for the backward direction, processing step s corresponds to
/// original position len-1-s, and `d_embedded` is indexed by original
/// position. Weight and bias gradients accumulate into `grads`.
fn backprop_direction(
    params: &LstmParams,
    embedded: &[Vec<f64>],
    trace: &[(LstmState, GateActivations)],
    reversed: bool,
    dh_final: &[f64],
    grads: &mut LstmParams,
    d_embedded: &mut [Vec<f64>],
) {
    let units = params.units();
    let steps = trace.len();
    let embed_dim = if steps > 0 { embedded[0].len() } else { 0 };
    let zeros = vec![0.0; units];
    let mut dh = dh_final.to_vec();
    let mut dc = vec![0.0; units];
    let mut dz_f = vec![0.0; units];
    let mut dz_i = vec![0.0; units];
    let mut dz_o = vec![0.0; units];
    let mut dz_c = vec![0.0; units];
    for s in (0..steps).rev() {
        let original = if reversed { steps - 1 - s } else { s };
        let (state, gates) = &trace[s];
        let (h_prev, c_prev) = if s > 0 {
            (trace[s - 1].0.h.as_slice(), trace[s - 1].0.c.as_slice())
        } else {
            (zeros.as_slice(), zeros.as_slice())
        };
        for u in 0..units {
            let tc = state.c[u].tanh();
            let d_out = dh[u] * tc;
            dc[u] += dh[u] * gates.o[u] * (1.0 - tc * tc);
            let d_forget = dc[u] * c_prev[u];
            let d_input = dc[u] * gates.c_tilde[u];
            let d_candidate = dc[u] * gates.i[u];
            dz_f[u] = d_forget * gates.f[u] * (1.0 - gates.f[u]);
            dz_i[u] = d_input * gates.i[u] * (1.0 - gates.i[u]);
            dz_o[u] = d_out * gates.o[u] * (1.0 - gates.o[u]);
            dz_c[u] = d_candidate * (1.0 - gates.c_tilde[u] * gates.c_tilde[u]);
        }
        let a = concat(h_prev, &embedded[original]);
        let mut da = vec![0.0; units + embed_dim];
        for (w, gw, gb, dz) in [
            (&params.w_f, &mut grads.w_f, &mut grads.b_f, &dz_f),
            (&params.w_i, &mut grads.w_i, &mut grads.b_i, &dz_i),
            (&params.w_o, &mut grads.w_o, &mut grads.b_o, &dz_o),
            (&params.w_c, &mut grads.w_c, &mut grads.b_c, &dz_c),
        ] {
            for u in 0..units {
                let z = dz[u];
                for (j, aj) in a.iter().enumerate() {
                    *gw.at_mut(u, j) += z * aj;
                    da[j] += w.at(u, j) * z;
                }
                gb[u] += z;
            }
        }
        dh.copy_from_slice(&da[..units]);
        for u in 0..units {
            dc[u] *= gates.f[u];
        }
        for (j, d) in da[units..].iter().enumerate() {
            d_embedded[original][j] += d;
        }
    }
}

/// Mean batch loss and its exact gradient for every parameter tensor.
///
/// The head deltas flow back through the optional dropout masks, then BPTT
/// runs over both directions of every example, and input gradients
/// accumulate into the embedding rows of the corresponding tokens. Rows of
/// tokens absent from the batch stay exactly zero.
pub fn backward(
    model: &BilstmModel,
    batch: &[Example],
    dropout: Option<&[Vec<f64>]>,
) -> Result<(f64, Gradients), TrainError> {
    validate_batch(model, batch, dropout)?;
    let total_entries = unmasked_entries(batch);
    if total_entries == 0 {
        return Err(TrainError::EmptyBatch);
    }
    let units = model.config.units;
    let n_tasks = model.n_tasks();
    let mut grads = Gradients::zeros_like(model);
    let mut total_loss = 0.0;

    for (e, ex) in batch.iter().enumerate() {
        let mask_e = dropout.map(|m| m[e].as_slice());
        let (output, trace) = model.forward(&ex.seq, mask_e)?;
        let len = trace.embedded.len();

        // Head: loss, deltas, and gradients for weights and bias.
        let mut delta = vec![0.0; n_tasks];
        for k in 0..n_tasks {
            if ex.mask[k] {
                total_loss += entry_loss(model.task_kind, output[k], ex.labels[k]);
                delta[k] = head_delta(model.task_kind, output[k], ex.labels[k], total_entries);
            }
        }
        let mut d_dropped = vec![0.0; 2 * units];
        for k in 0..n_tasks {
            let z = delta[k];
            if z == 0.0 {
                continue;
            }
            for j in 0..2 * units {
                *grads.head_w.at_mut(k, j) += z * trace.dropped[j];
                d_dropped[j] += model.head_w.at(k, j) * z;
            }
            grads.head_b[k] += z;
        }

        // Back through the dropout mask onto the concatenated final states.
        let d_rep: Vec<f64> = match mask_e {
            Some(m) => d_dropped.iter().zip(m).map(|(d, s)| d * s).collect(),
            None => d_dropped,
        };

        let mut d_embedded = vec![vec![0.0; model.config.embed_dim]; len];
        backprop_direction(
            &model.forward_cell,
            &trace.embedded,
            &trace.fwd,
            false,
            &d_rep[..units],
            &mut grads.fwd,
            &mut d_embedded,
        );
        backprop_direction(
            &model.backward_cell,
            &trace.embedded,
            &trace.bwd,
            true,
            &d_rep[units..],
            &mut grads.bwd,
            &mut d_embedded,
        );

        // Input gradients land on the embedding rows of the active tokens.
        for (pos, d_x) in d_embedded.iter().enumerate() {
            let token = ex.seq.tokens[pos];
            for (j, d) in d_x.iter().enumerate() {
                *grads.embedding.at_mut(token, j) += d;
            }
        }
    }
    Ok((total_loss / total_entries as f64, grads))
}

/// Central-difference gradient of `batch_loss`, one coordinate at a time:
/// (L(theta + eps) - L(theta - eps)) / (2 eps). Slow and exact in the
/// limit; used only to validate `backward`.
pub fn finite_diff_grad(
    model: &BilstmModel,
    batch: &[Example],
    dropout: Option<&[Vec<f64>]>,
    eps: f64,
) -> Result<Gradients, TrainError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(TrainError::InvalidEps);
    }
    let mut work = model.clone();
    let mut grads = Gradients::zeros_like(model);
    let n_blocks = grads.blocks().len();
    for b in 0..n_blocks {
        let len = work.param_blocks()[b].1.len();
        for k in 0..len {
            let original = work.param_blocks()[b].1[k];
            work.param_blocks_mut()[b].1[k] = original + eps;
            let plus = batch_loss(&work, batch, dropout)?;
            work.param_blocks_mut()[b].1[k] = original - eps;
            let minus = batch_loss(&work, batch, dropout)?;
            work.param_blocks_mut()[b].1[k] = original;
            grads.blocks_mut()[b].1[k] = (plus - minus) / (2.0 * eps);
        }
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::super::check::{self, CheckDims};
    use super::*;
    use crate::model::Hyperparams;
    use crate::rng::Rng;
    use crate::tensor::Matrix;

    #[test]
    fn central_difference_recovers_a_known_derivative() {
        // d/dw of w^2 at 3 is 6; the quadratic makes central differences
        // exact up to rounding.
        let f = |w: f64| w * w;
        let eps = 1e-4;
        let fd = (f(3.0 + eps) - f(3.0 - eps)) / (2.0 * eps);
        assert!((fd - 6.0).abs() < 1e-8);
    }

    #[test]
    fn finite_diff_rejects_bad_eps() {
        let model = check::gradcheck_model(0, &CheckDims::default(), TaskKind::Classification);
        let batch = check::gradcheck_batch(0, &CheckDims::default(), &model);
        assert_eq!(
            finite_diff_grad(&model, &batch, None, 0.0).unwrap_err(),
            TrainError::InvalidEps
        );
        assert_eq!(
            finite_diff_grad(&model, &batch, None, -1e-4).unwrap_err(),
            TrainError::InvalidEps
        );
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for seed in 0..3u64 {
            for kind in [TaskKind::Classification, TaskKind::Regression] {
                for rate in [0.0, 0.4] {
                    let report = check::run_gradient_check(
                        seed,
                        kind,
                        rate,
                        &CheckDims::default(),
                        false,
                    )
                    .unwrap();
                    assert!(
                        report.max_rel_err < 1e-4,
                        "seed {seed} {kind:?} rate {rate}: {}",
                        report.max_rel_err
                    );
                }
            }
        }
    }

    #[test]
    fn perturbed_gradient_fails_the_check() {
        let report = check::run_gradient_check(
            0,
            TaskKind::Classification,
            0.0,
            &CheckDims::default(),
            true,
        )
        .unwrap();
        assert!(report.max_rel_err >= 1e-4);
    }

    #[test]
    fn unused_embedding_rows_get_zero_gradient() {
        let dims = CheckDims::default();
        let model = check::gradcheck_model(9, &dims, TaskKind::Classification);
        let batch = check::gradcheck_batch(9, &dims, &model);
        let (_, grads) = backward(&model, &batch, None).unwrap();
        let mut used = vec![false; model.vocab.size()];
        for ex in &batch {
            for &t in &ex.seq.tokens[..ex.seq.true_length] {
                used[t] = true;
            }
        }
        assert!(used.iter().any(|&u| !u), "fixture should leave rows unused");
        for (row, &row_used) in used.iter().enumerate() {
            let all_zero = (0..model.config.embed_dim).all(|j| grads.embedding.at(row, j) == 0.0);
            if !row_used {
                assert!(all_zero, "unused row {row} has nonzero gradient");
            }
        }
        // Padding never contributes gradient mass.
        assert!((0..model.config.embed_dim).all(|j| grads.embedding.at(0, j) == 0.0));
    }

    #[test]
    fn gradient_vanishes_at_a_perfect_regression_fit() {
        let dims = CheckDims {
            n_tasks: 1,
            ..Default::default()
        };
        let mut model = check::gradcheck_model(11, &dims, TaskKind::Regression);
        model.head_w = Matrix::zeros(1, 2 * model.config.units);
        model.head_b = vec![2.5];
        let mut batch = check::gradcheck_batch(11, &dims, &model);
        for ex in &mut batch {
            ex.labels = vec![2.5];
            ex.mask = vec![true];
        }
        let (loss, grads) = backward(&model, &batch, None).unwrap();
        assert_eq!(loss, 0.0);
        for (name, data) in grads.blocks() {
            assert!(data.iter().all(|&g| g == 0.0), "{name} nonzero at optimum");
        }
    }

    #[test]
    fn masking_an_entry_equals_deleting_the_example() {
        let dims = CheckDims {
            n_tasks: 1,
            ..Default::default()
        };
        let model = check::gradcheck_model(13, &dims, TaskKind::Classification);
        let batch = check::gradcheck_batch(13, &dims, &model);
        assert!(batch.len() >= 2);

        let mut masked = batch.clone();
        masked[1].mask = vec![false];
        masked[1].labels = vec![57.0];
        let solo = vec![batch[0].clone()];

        let (loss_masked, grads_masked) = backward(&model, &masked, None).unwrap();
        let (loss_solo, grads_solo) = backward(&model, &solo, None).unwrap();
        assert_eq!(loss_masked, loss_solo);
        assert_eq!(grads_masked, grads_solo);
        assert_eq!(
            batch_loss(&model, &masked, None).unwrap(),
            batch_loss(&model, &solo, None).unwrap()
        );
    }

    #[test]
    fn fully_masked_batch_is_rejected() {
        let dims = CheckDims::default();
        let model = check::gradcheck_model(14, &dims, TaskKind::Classification);
        let mut batch = check::gradcheck_batch(14, &dims, &model);
        for ex in &mut batch {
            ex.mask = vec![false; ex.mask.len()];
        }
        assert_eq!(
            backward(&model, &batch, None).unwrap_err(),
            TrainError::EmptyBatch
        );
        assert_eq!(
            batch_loss(&model, &batch, None).unwrap_err(),
            TrainError::EmptyBatch
        );
    }

    #[test]
    fn backward_is_pure() {
        let dims = CheckDims::default();
        let model = check::gradcheck_model(15, &dims, TaskKind::Regression);
        let batch = check::gradcheck_batch(15, &dims, &model);
        let mut rng = Rng::new(77);
        let masks: Vec<Vec<f64>> = batch
            .iter()
            .map(|_| super::super::make_dropout_mask(&mut rng, 2 * model.config.units, 0.3).unwrap())
            .collect();
        let (loss_a, grads_a) = backward(&model, &batch, Some(&masks)).unwrap();
        let (loss_b, grads_b) = backward(&model, &batch, Some(&masks)).unwrap();
        assert_eq!(loss_a, loss_b);
        assert_eq!(grads_a, grads_b);
    }

    #[test]
    fn dropout_mask_shape_is_validated() {
        let dims = CheckDims::default();
        let model = check::gradcheck_model(16, &dims, TaskKind::Classification);
        let batch = check::gradcheck_batch(16, &dims, &model);
        let bad = vec![vec![1.0; 3]; batch.len()];
        assert!(matches!(
            backward(&model, &batch, Some(&bad)),
            Err(TrainError::ShapeMismatch(_))
        ));
        let wrong_count = vec![vec![1.0; 2 * model.config.units]];
        assert!(matches!(
            batch_loss(&model, &batch, Some(&wrong_count)),
            Err(TrainError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn example_from_record_truncates_and_masks() {
        let vocab = Vocabulary::build(&["CNO"]).unwrap();
        let record = DatasetRecord::new("CCCCCC", vec![1.0, f64::NAN], vec![true, false]);
        let hp = Hyperparams::default();
        assert_eq!(hp.max_len, 128);
        let ex = Example::from_record(&record, &vocab, 4).unwrap();
        assert_eq!(ex.seq.true_length, 4);
        assert_eq!(ex.mask, vec![true, false]);
    }
}
