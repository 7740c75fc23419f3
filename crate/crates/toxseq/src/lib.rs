//! A from-scratch bidirectional-LSTM engine that predicts molecular properties
//! directly from SMILES strings.
//!
//! The crate covers the whole pipeline: character-level SMILES tokenization,
//! dataset ingestion with class balancing, a BiLSTM network built on a minimal
//! dense linear-algebra core, exact backpropagation through time verified
//! against finite differences, Adam-driven training, and ROC-AUC / RMSE
//! evaluation. Everything is deterministic: a fixed 64-bit PRNG seeds
//! initialization, shuffling, dropout, and splits, so identical configs
//! produce byte-identical artifacts.
//!
//! - [`smiles`]: lexing, vocabulary construction, integer encoding, validation
//! - [`tensor`]: dense matrices, activations, parameter initialization
//! - [`rng`]: the seeded generator every randomized operation draws from
//! - [`model`]: embedding, LSTM cell, bidirectional wrapper, task heads, model files
//! - [`train`]: losses, BPTT gradients, finite-difference checking, Adam, the training loop
//! - [`data`]: CSV ingestion, schema presets, undersampling, seeded splits
//! - [`metrics`]: ROC-AUC, RMSE, accuracy, per-task report aggregation

pub mod data;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod smiles;
pub mod tensor;
pub mod train;

pub use data::{DatasetRecord, SplitSpec, TaskKind, TaskSchema};
pub use metrics::EvalReport;
pub use model::{BilstmModel, Hyperparams, LstmParams, LstmState};
pub use rng::Rng;
pub use smiles::{EncodedSequence, ValidationReport, Vocabulary};
pub use tensor::Matrix;
pub use train::{AdamState, Gradients, TrainHistory};
