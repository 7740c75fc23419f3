//! The network: embedding lookup, the LSTM cell, bidirectional sequence
//! processing, dropout application, task heads, and deterministic model
//! serialization (in [`io`]).

pub mod io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::TaskKind;
use crate::rng::Rng;
use crate::smiles::{encode, CodecError, EncodedSequence, Vocabulary};
use crate::tensor::{
    affine, concat, glorot_scale, init_uniform, sigmoid, tanh_v, Matrix, TensorError,
};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("token {token} at position {position} is outside the embedding table")]
    TokenOutOfRange { position: usize, token: usize },
    #[error("sequence has no non-pad tokens")]
    EmptyInput,
    #[error("io error: {0}")]
    Io(String),
    #[error("unsupported model format version '{0}'")]
    FormatVersionMismatch(String),
    #[error("model file checksum does not match its contents")]
    ChecksumMismatch,
    #[error("model file is malformed at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Training-relevant knobs. The tuned defaults are dropout 0.3, learning
/// rate 0.1, and 32 units; learning rate 0.1 is aggressive for Adam, so
/// runs that diverge should fall back to 1e-3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub units: usize,
    pub embed_dim: usize,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub max_len: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Early-stopping patience in epochs; 0 disables early stopping.
    pub patience: usize,
    /// Global-norm gradient clip threshold; None disables clipping.
    pub clip_norm: Option<f64>,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            units: 32,
            embed_dim: 32,
            dropout_rate: 0.3,
            learning_rate: 0.1,
            max_len: 128,
            epochs: 50,
            batch_size: 32,
            seed: 0,
            patience: 10,
            clip_norm: Some(5.0),
        }
    }
}

/// Gate parameters for one direction. Each weight matrix is
/// units x (units + embed_dim) and acts on concat(h_prev, x_t).
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_f: Matrix,
    pub w_i: Matrix,
    pub w_o: Matrix,
    pub w_c: Matrix,
    pub b_f: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_o: Vec<f64>,
    pub b_c: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(units: usize, embed_dim: usize) -> Self {
        let shape = || Matrix::zeros(units, units + embed_dim);
        LstmParams {
            w_f: shape(),
            w_i: shape(),
            w_o: shape(),
            w_c: shape(),
            b_f: vec![0.0; units],
            b_i: vec![0.0; units],
            b_o: vec![0.0; units],
            b_c: vec![0.0; units],
        }
    }

    /// Glorot-uniform weights, zero biases except the forget bias at +1
    /// (the usual trick to keep early gradients flowing through the cell
    /// state). Consumes the RNG in gate order f, i, o, c.
    pub fn init(units: usize, embed_dim: usize, rng: &mut Rng) -> Self {
        let scale = glorot_scale(units + embed_dim, units);
        let draw = |rng: &mut Rng| {
            init_uniform(rng, units, units + embed_dim, scale).expect("positive glorot scale")
        };
        LstmParams {
            w_f: draw(rng),
            w_i: draw(rng),
            w_o: draw(rng),
            w_c: draw(rng),
            b_f: vec![1.0; units],
            b_i: vec![0.0; units],
            b_o: vec![0.0; units],
            b_c: vec![0.0; units],
        }
    }

    pub fn units(&self) -> usize {
        self.w_f.rows
    }
}

/// Hidden and cell state after a step.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(units: usize) -> Self {
        LstmState {
            h: vec![0.0; units],
            c: vec![0.0; units],
        }
    }
}

/// Sigmoid gate outputs and the tanh candidate, kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct GateActivations {
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub o: Vec<f64>,
    pub c_tilde: Vec<f64>,
}

/// One LSTM step:
///   f_t = sigmoid(W_f . [h_prev, x_t] + b_f)
///   i_t = sigmoid(W_i . [h_prev, x_t] + b_i)
///   o_t = sigmoid(W_o . [h_prev, x_t] + b_o)
///   c~_t = tanh(W_c . [h_prev, x_t] + b_c)
///   C_t = f_t * C_prev + i_t * c~_t
///   h_t = o_t * tanh(C_t)
/// with * elementwise.
pub fn lstm_cell_step(
    p: &LstmParams,
    x_t: &[f64],
    prev: &LstmState,
) -> Result<(LstmState, GateActivations), ModelError> {
    let a = concat(&prev.h, x_t);
    let f = sigmoid(&affine(&p.w_f, &a, &p.b_f)?);
    let i = sigmoid(&affine(&p.w_i, &a, &p.b_i)?);
    let o = sigmoid(&affine(&p.w_o, &a, &p.b_o)?);
    let c_tilde = tanh_v(&affine(&p.w_c, &a, &p.b_c)?);
    let units = f.len();
    let mut c = vec![0.0; units];
    let mut h = vec![0.0; units];
    for u in 0..units {
        c[u] = f[u] * prev.c[u] + i[u] * c_tilde[u];
        h[u] = o[u] * c[u].tanh();
    }
    Ok((LstmState { h, c }, GateActivations { f, i, o, c_tilde }))
}

/// Runs the cell over a sequence of input vectors from a zero initial
/// state. `reversed` walks the inputs end to start. The trace holds one
/// (state, gates) pair per step in processing order.
pub fn run_direction(
    p: &LstmParams,
    inputs: &[Vec<f64>],
    reversed: bool,
) -> Result<(LstmState, Vec<(LstmState, GateActivations)>), ModelError> {
    if inputs.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    let mut state = LstmState::zeros(p.units());
    let mut trace = Vec::with_capacity(inputs.len());
    let indices: Vec<usize> = if reversed {
        (0..inputs.len()).rev().collect()
    } else {
        (0..inputs.len()).collect()
    };
    for idx in indices {
        let (next, gates) = lstm_cell_step(p, &inputs[idx], &state)?;
        state = next.clone();
        trace.push((next, gates));
    }
    Ok((state, trace))
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Embedded inputs in original (left-to-right) order, pads excluded.
    pub embedded: Vec<Vec<f64>>,
    pub fwd: Vec<(LstmState, GateActivations)>,
    pub bwd: Vec<(LstmState, GateActivations)>,
    /// concat(final forward h, final backward h), before dropout.
    pub representation: Vec<f64>,
    /// Representation after the dropout mask (identical when no mask).
    pub dropped: Vec<f64>,
    /// Head pre-activations, one per task.
    pub pre_activation: Vec<f64>,
    /// Final outputs (sigmoid of pre-activation for classification).
    pub output: Vec<f64>,
}

/// The bidirectional model. Immutable during inference; the training loop
/// owns it exclusively while updating parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BilstmModel {
    pub vocab: Vocabulary,
    pub embedding: Matrix,
    pub forward_cell: LstmParams,
    pub backward_cell: LstmParams,
    pub head_w: Matrix,
    pub head_b: Vec<f64>,
    pub task_kind: TaskKind,
    pub task_names: Vec<String>,
    pub config: Hyperparams,
}

impl BilstmModel {
    /// Seeded initialization. Parameter draw order (embedding, forward
    /// cell, backward cell, head) is fixed and part of the determinism
    /// contract.
    pub fn init(
        vocab: Vocabulary,
        task_names: Vec<String>,
        task_kind: TaskKind,
        config: Hyperparams,
        rng: &mut Rng,
    ) -> Self {
        let n_tasks = task_names.len();
        assert!(n_tasks > 0, "model needs at least one task");
        let (units, dim) = (config.units, config.embed_dim);
        let embedding = init_uniform(rng, vocab.size(), dim, glorot_scale(vocab.size(), dim))
            .expect("positive glorot scale");
        let forward_cell = LstmParams::init(units, dim, rng);
        let backward_cell = LstmParams::init(units, dim, rng);
        let head_w = init_uniform(rng, n_tasks, 2 * units, glorot_scale(2 * units, n_tasks))
            .expect("positive glorot scale");
        BilstmModel {
            vocab,
            embedding,
            forward_cell,
            backward_cell,
            head_w,
            head_b: vec![0.0; n_tasks],
            task_kind,
            task_names,
            config,
        }
    }

    pub fn n_tasks(&self) -> usize {
        self.head_b.len()
    }

    /// Embedding rows for the non-pad prefix of a sequence. The pad row
    /// exists in the table but is never consumed.
    pub fn embed(&self, seq: &EncodedSequence) -> Result<Vec<Vec<f64>>, ModelError> {
        let mut out = Vec::with_capacity(seq.true_length);
        for (position, &token) in seq.tokens[..seq.true_length].iter().enumerate() {
            if token >= self.embedding.rows {
                return Err(ModelError::TokenOutOfRange { position, token });
            }
            out.push(self.embedding.row(token).to_vec());
        }
        Ok(out)
    }

    /// Full forward pass. The optional dropout mask (length 2 * units,
    /// entries 0 or 1/(1-rate)) multiplies the concatenated representation
    /// before the head; inference passes None.
    pub fn forward(
        &self,
        seq: &EncodedSequence,
        dropout_mask: Option<&[f64]>,
    ) -> Result<(Vec<f64>, ForwardTrace), ModelError> {
        let embedded = self.embed(seq)?;
        let (fwd_final, fwd) = run_direction(&self.forward_cell, &embedded, false)?;
        let (bwd_final, bwd) = run_direction(&self.backward_cell, &embedded, true)?;
        let representation = concat(&fwd_final.h, &bwd_final.h);
        let dropped = match dropout_mask {
            Some(mask) => {
                if mask.len() != representation.len() {
                    return Err(ModelError::Tensor(TensorError::DimensionMismatch {
                        context: "dropout mask",
                        expected: representation.len(),
                        got: mask.len(),
                    }));
                }
                representation
                    .iter()
                    .zip(mask)
                    .map(|(r, m)| r * m)
                    .collect()
            }
            None => representation.clone(),
        };
        let pre_activation = affine(&self.head_w, &dropped, &self.head_b)?;
        let output = match self.task_kind {
            TaskKind::Classification => sigmoid(&pre_activation),
            TaskKind::Regression => pre_activation.clone(),
        };
        let out = output.clone();
        Ok((
            out,
            ForwardTrace {
                embedded,
                fwd,
                bwd,
                representation,
                dropped,
                pre_activation,
                output,
            },
        ))
    }

    /// Inference entry point: encode, run forward with no dropout, return
    /// per-task probabilities (classification) or real values (regression).
    /// Strings longer than the configured max_len are truncated.
    pub fn predict(&self, smiles: &str) -> Result<Vec<f64>, ModelError> {
        let (seq, _truncated) = encode(&self.vocab, smiles, self.config.max_len)?;
        let (output, _) = self.forward(&seq, None)?;
        Ok(output)
    }

    /// Named views of every parameter tensor, in serialization order.
    pub fn param_blocks(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("embedding", &self.embedding.data),
            ("fwd.W_f", &self.forward_cell.w_f.data),
            ("fwd.W_i", &self.forward_cell.w_i.data),
            ("fwd.W_o", &self.forward_cell.w_o.data),
            ("fwd.W_c", &self.forward_cell.w_c.data),
            ("fwd.b_f", &self.forward_cell.b_f),
            ("fwd.b_i", &self.forward_cell.b_i),
            ("fwd.b_o", &self.forward_cell.b_o),
            ("fwd.b_c", &self.forward_cell.b_c),
            ("bwd.W_f", &self.backward_cell.w_f.data),
            ("bwd.W_i", &self.backward_cell.w_i.data),
            ("bwd.W_o", &self.backward_cell.w_o.data),
            ("bwd.W_c", &self.backward_cell.w_c.data),
            ("bwd.b_f", &self.backward_cell.b_f),
            ("bwd.b_i", &self.backward_cell.b_i),
            ("bwd.b_o", &self.backward_cell.b_o),
            ("bwd.b_c", &self.backward_cell.b_c),
            ("head_W", &self.head_w.data),
            ("head_b", &self.head_b),
        ]
    }

    /// Mutable counterpart of [`param_blocks`], same order.
    pub fn param_blocks_mut(&mut self) -> Vec<(&'static str, &mut Vec<f64>)> {
        vec![
            ("embedding", &mut self.embedding.data),
            ("fwd.W_f", &mut self.forward_cell.w_f.data),
            ("fwd.W_i", &mut self.forward_cell.w_i.data),
            ("fwd.W_o", &mut self.forward_cell.w_o.data),
            ("fwd.W_c", &mut self.forward_cell.w_c.data),
            ("fwd.b_f", &mut self.forward_cell.b_f),
            ("fwd.b_i", &mut self.forward_cell.b_i),
            ("fwd.b_o", &mut self.forward_cell.b_o),
            ("fwd.b_c", &mut self.forward_cell.b_c),
            ("bwd.W_f", &mut self.backward_cell.w_f.data),
            ("bwd.W_i", &mut self.backward_cell.w_i.data),
            ("bwd.W_o", &mut self.backward_cell.w_o.data),
            ("bwd.W_c", &mut self.backward_cell.w_c.data),
            ("bwd.b_f", &mut self.backward_cell.b_f),
            ("bwd.b_i", &mut self.backward_cell.b_i),
            ("bwd.b_o", &mut self.backward_cell.b_o),
            ("bwd.b_c", &mut self.backward_cell.b_c),
            ("head_W", &mut self.head_w.data),
            ("head_b", &mut self.head_b),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_vocab() -> Vocabulary {
        Vocabulary::build(&["CCO", "N#C", "c1ccccc1"]).unwrap()
    }

    fn tiny_config(units: usize, embed_dim: usize) -> Hyperparams {
        Hyperparams {
            units,
            embed_dim,
            dropout_rate: 0.0,
            max_len: 12,
            ..Default::default()
        }
    }

    fn tiny_model(seed: u64) -> BilstmModel {
        let mut rng = Rng::new(seed);
        BilstmModel::init(
            tiny_vocab(),
            vec!["A".to_string(), "B".to_string()],
            TaskKind::Classification,
            tiny_config(3, 4),
            &mut rng,
        )
    }

    #[test]
    fn embed_looks_up_rows_and_skips_pads() {
        let model = tiny_model(1);
        let seq = EncodedSequence {
            tokens: vec![2, 2, 3, 0, 0],
            true_length: 3,
        };
        let vectors = model.embed(&seq).unwrap();
        assert_eq!(vectors.len(), 3);
        assert_eq!(vectors[0], model.embedding.row(2).to_vec());
        assert_eq!(vectors[1], vectors[0]);
        assert_eq!(vectors[2], model.embedding.row(3).to_vec());
    }

    #[test]
    fn embed_rejects_out_of_range_tokens() {
        let model = tiny_model(1);
        let seq = EncodedSequence {
            tokens: vec![2, 99],
            true_length: 2,
        };
        assert_eq!(
            model.embed(&seq),
            Err(ModelError::TokenOutOfRange {
                position: 1,
                token: 99
            })
        );
    }

    #[test]
    fn zero_parameter_cell_gives_half_gates_and_zero_state() {
        let p = LstmParams::zeros(3, 2);
        let prev = LstmState::zeros(3);
        let (state, gates) = lstm_cell_step(&p, &[0.7, -0.4], &prev).unwrap();
        for u in 0..3 {
            assert_eq!(gates.f[u], 0.5);
            assert_eq!(gates.i[u], 0.5);
            assert_eq!(gates.o[u], 0.5);
            assert_eq!(gates.c_tilde[u], 0.0);
            assert_eq!(state.c[u], 0.0);
            assert_eq!(state.h[u], 0.0);
        }
    }

    #[test]
    fn saturated_forget_gate_preserves_cell_state() {
        let mut p = LstmParams::zeros(2, 2);
        p.b_f = vec![100.0, 100.0];
        let prev = LstmState {
            h: vec![0.0, 0.0],
            c: vec![0.8, -1.7],
        };
        let (state, gates) = lstm_cell_step(&p, &[0.3, 0.3], &prev).unwrap();
        for u in 0..2 {
            assert!(gates.f[u] > 1.0 - 1e-9);
            // C_t = f*c_prev + i*c_tilde = 1*c_prev + 0.5*0
            assert!((state.c[u] - prev.c[u]).abs() < 1e-9);
        }
    }

    #[test]
    fn suppressed_input_gate_reduces_cell_update_to_decay() {
        let mut rng = Rng::new(5);
        let mut p = LstmParams::init(2, 3, &mut rng);
        p.b_i = vec![-100.0, -100.0];
        let prev = LstmState {
            h: vec![0.2, -0.1],
            c: vec![1.3, -0.4],
        };
        let x = [0.5, -0.2, 0.9];
        let (state, gates) = lstm_cell_step(&p, &x, &prev).unwrap();
        for u in 0..2 {
            let expected = gates.f[u] * prev.c[u];
            assert!((state.c[u] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn scalar_hand_oracle() {
        // units=1, embed_dim=1, weights all 0.5, biases 0, x=1, zero state:
        // every gate sees 0.5, so f=i=o=sigmoid(0.5), c~=tanh(0.5),
        // C=i*c~, h=o*tanh(C). Constants frozen from an independent
        // evaluation of those expressions.
        let mut p = LstmParams::zeros(1, 1);
        for w in [&mut p.w_f, &mut p.w_i, &mut p.w_o, &mut p.w_c] {
            w.data = vec![0.5, 0.5];
        }
        let (state, gates) = lstm_cell_step(&p, &[1.0], &LstmState::zeros(1)).unwrap();
        let sig = 0.6224593312018546;
        let th = 0.46211715726000974;
        assert!((gates.f[0] - sig).abs() < 1e-15);
        assert!((gates.i[0] - sig).abs() < 1e-15);
        assert!((gates.o[0] - sig).abs() < 1e-15);
        assert!((gates.c_tilde[0] - th).abs() < 1e-15);
        assert!((state.c[0] - 0.28764913664496794).abs() < 1e-15);
        assert!((state.h[0] - 0.17426971865610508).abs() < 1e-15);
    }

    #[test]
    fn gate_ranges_and_h_bound_hold_for_random_parameters() {
        for seed in 0..10 {
            let mut rng = Rng::new(seed);
            let p = LstmParams::init(4, 3, &mut rng);
            let mut state = LstmState::zeros(4);
            for _ in 0..15 {
                let x: Vec<f64> = (0..3).map(|_| rng.uniform(-3.0, 3.0)).collect();
                let (next, gates) = lstm_cell_step(&p, &x, &state).unwrap();
                for u in 0..4 {
                    for g in [gates.f[u], gates.i[u], gates.o[u]] {
                        assert!(g > 0.0 && g < 1.0);
                    }
                    assert!(gates.c_tilde[u] > -1.0 && gates.c_tilde[u] < 1.0);
                    assert!(next.h[u] > -1.0 && next.h[u] < 1.0);
                    assert!(next.c[u].is_finite());
                }
                state = next;
            }
        }
    }

    #[test]
    fn run_direction_traces_and_reverses() {
        let mut rng = Rng::new(3);
        let p = LstmParams::init(2, 2, &mut rng);
        let v1 = vec![0.1, -0.2];
        let v2 = vec![0.9, 0.4];
        let inputs = vec![v1.clone(), v2.clone()];

        let (final_fwd, trace_fwd) = run_direction(&p, &inputs, false).unwrap();
        assert_eq!(trace_fwd.len(), 2);
        assert_eq!(final_fwd, trace_fwd[1].0);

        // reversed=true must process v2 first: its first step equals the
        // forward first step on [v2, v1].
        let (_, trace_rev) = run_direction(&p, &inputs, true).unwrap();
        let (_, trace_swapped) = run_direction(&p, &[v2, v1], false).unwrap();
        assert_eq!(trace_rev[0], trace_swapped[0]);

        let single = run_direction(&p, &inputs[..1], false).unwrap();
        assert_eq!(single.1.len(), 1);
        assert_eq!(single.0, single.1[0].0);

        assert_eq!(
            run_direction(&p, &[], false).unwrap_err(),
            ModelError::EmptyInput
        );
    }

    #[test]
    fn zero_head_classification_outputs_half() {
        let mut model = tiny_model(2);
        model.head_w = Matrix::zeros(2, 6);
        model.head_b = vec![0.0, 0.0];
        let out = model.predict("CCO").unwrap();
        assert_eq!(out, vec![0.5, 0.5]);
    }

    #[test]
    fn zero_weight_regression_head_outputs_bias() {
        let mut rng = Rng::new(4);
        let mut model = BilstmModel::init(
            tiny_vocab(),
            vec!["expt".to_string()],
            TaskKind::Regression,
            tiny_config(3, 4),
            &mut rng,
        );
        model.head_w = Matrix::zeros(1, 6);
        model.head_b = vec![2.5];
        assert_eq!(model.predict("CCO").unwrap(), vec![2.5]);
        assert_eq!(model.predict("N#C").unwrap(), vec![2.5]);
    }

    #[test]
    fn bidirectional_symmetry_with_shared_cells() {
        let mut model = tiny_model(6);
        model.backward_cell = model.forward_cell.clone();
        let (seq, _) = encode(&model.vocab, "CCOc1N", 10).unwrap();
        let mut rev_tokens: Vec<usize> = seq.tokens[..seq.true_length].to_vec();
        rev_tokens.reverse();
        rev_tokens.resize(10, 0);
        let rev = EncodedSequence {
            tokens: rev_tokens,
            true_length: seq.true_length,
        };
        let (_, trace) = model.forward(&seq, None).unwrap();
        let (_, trace_rev) = model.forward(&rev, None).unwrap();
        let units = model.config.units;
        assert_eq!(
            trace.representation[..units],
            trace_rev.representation[units..]
        );
        assert_eq!(
            trace.representation[units..],
            trace_rev.representation[..units]
        );
    }

    #[test]
    fn pad_region_never_influences_output() {
        let model = tiny_model(8);
        let (seq, _) = encode(&model.vocab, "c1cc1", 9).unwrap();
        let (base, _) = model.forward(&seq, None).unwrap();
        let mut mutated = seq.clone();
        for t in seq.true_length..mutated.tokens.len() {
            mutated.tokens[t] = 3;
        }
        let (out, _) = model.forward(&mutated, None).unwrap();
        assert_eq!(base, out);
    }

    #[test]
    fn dropout_mask_scales_representation() {
        let model = tiny_model(9);
        let (seq, _) = encode(&model.vocab, "CCO", 5).unwrap();
        let mask = vec![0.0, 2.0, 0.0, 2.0, 2.0, 0.0];
        let (_, trace) = model.forward(&seq, Some(&mask)).unwrap();
        for (k, (&d, &r)) in trace.dropped.iter().zip(&trace.representation).enumerate() {
            assert_eq!(d, r * mask[k]);
        }
        let short = vec![1.0; 3];
        assert!(model.forward(&seq, Some(&short)).is_err());
    }

    #[test]
    fn predict_is_deterministic_and_composes() {
        let model = tiny_model(10);
        let a = model.predict("c1ccccc1CCO").unwrap();
        let b = model.predict("c1ccccc1CCO").unwrap();
        assert_eq!(a, b);
        for v in &a {
            assert!(*v > 0.0 && *v < 1.0);
        }
        let (seq, _) = encode(&model.vocab, "c1ccccc1CCO", model.config.max_len).unwrap();
        let (direct, _) = model.forward(&seq, None).unwrap();
        assert_eq!(a, direct);
        assert_eq!(model.predict("").unwrap_err(), ModelError::Codec(CodecError::EmptyString));
    }

    #[test]
    fn init_is_seed_deterministic_with_fixed_draw_order() {
        let a = tiny_model(42);
        let b = tiny_model(42);
        assert_eq!(a, b);
        let c = tiny_model(43);
        assert_ne!(a, c);
        assert_eq!(a.forward_cell.b_f, vec![1.0, 1.0, 1.0]);
        assert_eq!(a.head_b, vec![0.0, 0.0]);
    }

    #[test]
    fn param_blocks_cover_all_tensors() {
        let model = tiny_model(11);
        let blocks = model.param_blocks();
        assert_eq!(blocks.len(), 19);
        let total: usize = blocks.iter().map(|(_, d)| d.len()).sum();
        let v = model.vocab.size();
        let expected = v * 4 + 2 * (4 * (3 * 7) + 4 * 3) + 2 * 6 + 2;
        assert_eq!(total, expected);
    }
}
