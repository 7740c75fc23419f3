//! `toxseq train`: load, optionally undersample, split, build the
//! vocabulary from the training split only, train, and write artifacts.

use std::fs;
use std::path::PathBuf;

use clap::Args;

use toxseq::data::{
    class_counts, load_dataset_with, split, undersample, write_dataset, LoadOptions, SplitSpec,
    TaskSchema,
};
use toxseq::metrics::{evaluate, MetricError};
use toxseq::model::io::save_model;
use toxseq::model::Hyperparams;
use toxseq::smiles::Vocabulary;
use toxseq::train::train;

use crate::config::RunConfig;

use super::{load_schema, print_report, write_text, CliError};

/// Sequences longer than this never inform the automatic max_len.
const MAX_LEN_CAP: usize = 256;

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training dataset CSV
    #[arg(long, required_unless_present = "config")]
    data: Option<PathBuf>,

    /// Dataset schema preset (clintox, tox21, or freesolv)
    #[arg(long)]
    preset: Option<String>,

    /// JSON schema file for custom datasets
    #[arg(long)]
    schema: Option<PathBuf>,

    /// Output directory for run artifacts
    #[arg(long, default_value = "run")]
    out: PathBuf,

    /// Rerun from a previously written config.json; other data and
    /// hyperparameter flags are ignored
    #[arg(long)]
    config: Option<PathBuf>,

    /// LSTM units per direction
    #[arg(long, default_value_t = 32)]
    units: usize,

    /// Embedding dimension
    #[arg(long, default_value_t = 32)]
    embed_dim: usize,

    /// Dropout rate on the concatenated representation
    #[arg(long, default_value_t = 0.3)]
    dropout: f64,

    /// Adam learning rate
    #[arg(long, default_value_t = 0.1)]
    lr: f64,

    /// Maximum training epochs
    #[arg(long, default_value_t = 50)]
    epochs: usize,

    /// Mini-batch size
    #[arg(long, default_value_t = 32)]
    batch_size: usize,

    /// Maximum sequence length; defaults to the longest training SMILES
    /// (capped at 256)
    #[arg(long)]
    max_len: Option<usize>,

    /// Seed for initialization, shuffling, dropout, and the split
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Early-stopping patience in epochs; 0 disables early stopping
    #[arg(long, default_value_t = 10)]
    patience: usize,

    /// Gradient clipping threshold on the global norm
    #[arg(long, default_value_t = 5.0)]
    clip_norm: f64,

    /// Disable gradient clipping
    #[arg(long)]
    no_clip: bool,

    /// Fraction of records assigned to the training split
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,

    /// Balance classes by undersampling the majority class; takes an
    /// optional task name (default: CT_TOX when present, else the first
    /// task)
    #[arg(long, num_args = 0..=1, default_missing_value = "")]
    undersample: Option<String>,

    /// Reject structurally implausible SMILES at load time
    #[arg(long)]
    strict: bool,

    /// Drop duplicate SMILES rows, keeping the first occurrence
    #[arg(long)]
    dedup: bool,
}

fn resolve_undersample(
    requested: &Option<String>,
    schema: &TaskSchema,
) -> Result<Option<String>, CliError> {
    let Some(name) = requested else {
        return Ok(None);
    };
    if schema.is_regression() {
        return Err(CliError::Config(
            "undersampling applies to classification datasets only".to_string(),
        ));
    }
    let resolved = if name.is_empty() {
        if schema.task_index("CT_TOX").is_some() {
            "CT_TOX".to_string()
        } else {
            schema.task_names()[0].clone()
        }
    } else {
        name.clone()
    };
    if schema.task_index(&resolved).is_none() {
        return Err(CliError::Config(format!(
            "unknown undersampling task '{resolved}'"
        )));
    }
    Ok(Some(resolved))
}

fn resolve_config(args: &TrainArgs) -> Result<RunConfig, CliError> {
    if let Some(path) = &args.config {
        let text = super::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config file: {e}")))?;
        if config.subcommand != "train" {
            return Err(CliError::Config(format!(
                "config file is for subcommand '{}', not train",
                config.subcommand
            )));
        }
        return Ok(config);
    }
    let data = args
        .data
        .clone()
        .ok_or_else(|| CliError::Config("--data is required".to_string()))?;
    let schema = load_schema(&args.preset, &args.schema)?;
    let undersample = resolve_undersample(&args.undersample, &schema)?;
    let hyperparams = Hyperparams {
        units: args.units,
        embed_dim: args.embed_dim,
        dropout_rate: args.dropout,
        learning_rate: args.lr,
        // 0 is the in-flight "resolve from the training split" marker; it
        // is replaced before the config is written or used.
        max_len: args.max_len.unwrap_or(0),
        epochs: args.epochs,
        batch_size: args.batch_size,
        seed: args.seed,
        patience: args.patience,
        clip_norm: if args.no_clip {
            None
        } else {
            Some(args.clip_norm)
        },
    };
    Ok(RunConfig {
        subcommand: "train".to_string(),
        data,
        preset: args.preset.clone(),
        schema,
        hyperparams,
        train_fraction: args.train_fraction,
        undersample,
        strict: args.strict,
        dedup: args.dedup,
    })
}

pub fn run(args: TrainArgs) -> Result<(), CliError> {
    let mut config = resolve_config(&args)?;
    let out = &args.out;

    let load = load_dataset_with(
        &config.data,
        &config.schema,
        LoadOptions {
            strict: config.strict,
            dedup: config.dedup,
        },
    )?;
    let mut records = load.records;
    println!(
        "loaded {} records from {} ({} schema)",
        records.len(),
        config.data.display(),
        config.schema.name
    );
    if !load.flagged.is_empty() {
        println!(
            "note: {} rows flagged by the SMILES plausibility screen",
            load.flagged.len()
        );
    }

    if let Some(task) = &config.undersample {
        let index = config
            .schema
            .task_index(task)
            .ok_or_else(|| CliError::Config(format!("unknown undersampling task '{task}'")))?;
        records = undersample(&records, index, config.hyperparams.seed)?;
        let (neg, pos) = class_counts(&records, index);
        println!("undersampled on {task}: {neg} negative / {pos} positive");
    }

    let (train_set, test_set) = split(
        &records,
        &SplitSpec {
            train_fraction: config.train_fraction,
            seed: config.hyperparams.seed,
        },
    )?;
    println!(
        "split with seed {}: {} train / {} test records",
        config.hyperparams.seed,
        train_set.len(),
        test_set.len()
    );

    let corpus: Vec<&str> = train_set.iter().map(|r| r.smiles.as_str()).collect();
    let vocab = Vocabulary::build(&corpus)?;
    if config.hyperparams.max_len == 0 {
        let longest = train_set
            .iter()
            .map(|r| r.smiles.chars().count())
            .max()
            .unwrap_or(1);
        config.hyperparams.max_len = longest.clamp(1, MAX_LEN_CAP);
    }
    println!(
        "vocabulary: {} entries; max_len {}",
        vocab.size(),
        config.hyperparams.max_len
    );

    fs::create_dir_all(out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))?;
    write_text(&out.join("config.json"), &config.to_json_string())?;

    let hp = &config.hyperparams;
    println!(
        "training up to {} epochs (units {}, dropout {}, lr {})",
        hp.epochs, hp.units, hp.dropout_rate, hp.learning_rate
    );
    let (model, history) = train(hp, vocab, &train_set, &test_set, &config.schema)?;
    let last = history.records.last().expect("at least one epoch");
    println!(
        "trained {} epochs; last train loss {:.4}",
        history.records.len(),
        last.train_loss
    );

    save_model(&model, &out.join("model.txt"))?;
    model.vocab.save(&out.join("vocab.txt"))?;
    history.save(&out.join("history.csv"))?;
    write_dataset(&out.join("train.csv"), &train_set, &config.schema)?;
    write_dataset(&out.join("test.csv"), &test_set, &config.schema)?;

    match evaluate(&model, &test_set, &config.schema) {
        Ok(report) => {
            write_text(&out.join("eval.json"), &report.to_json_string())?;
            write_text(&out.join("eval.csv"), &report.to_csv_string())?;
            print_report(&report);
        }
        Err(MetricError::NothingEvaluable) => {
            println!("test split supports no metric (single class on every task); no eval report");
        }
        Err(e) => return Err(e.into()),
    }

    println!("artifacts written to {}", out.display());
    Ok(())
}
