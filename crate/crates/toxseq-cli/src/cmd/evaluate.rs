//! `toxseq evaluate`: score a saved model on a dataset and write the
//! report as JSON and CSV.

use std::fs;
use std::path::PathBuf;

use clap::Args;

use toxseq::data::{load_dataset_with, LoadOptions};
use toxseq::metrics::evaluate;
use toxseq::model::io::load_model;

use super::{load_schema, print_report, schema_from_model, write_text, CliError};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Saved model file
    #[arg(long)]
    model: PathBuf,

    /// Dataset CSV to score
    #[arg(long)]
    data: PathBuf,

    /// Dataset schema preset (clintox, tox21, or freesolv); when neither
    /// --preset nor --schema is given, the model's own task layout is used
    #[arg(long)]
    preset: Option<String>,

    /// JSON schema file for custom datasets
    #[arg(long)]
    schema: Option<PathBuf>,

    /// Directory for eval.json and eval.csv
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Reject structurally implausible SMILES at load time
    #[arg(long)]
    strict: bool,
}

pub fn run(args: EvaluateArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let schema = if args.preset.is_none() && args.schema.is_none() {
        schema_from_model(&model)?
    } else {
        load_schema(&args.preset, &args.schema)?
    };
    let load = load_dataset_with(
        &args.data,
        &schema,
        LoadOptions {
            strict: args.strict,
            dedup: false,
        },
    )?;
    let report = evaluate(&model, &load.records, &schema)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", args.out.display())))?;
    write_text(&args.out.join("eval.json"), &report.to_json_string())?;
    write_text(&args.out.join("eval.csv"), &report.to_csv_string())?;
    print_report(&report);
    Ok(())
}
