//! `toxseq predict`: run a saved model over SMILES strings and emit a CSV
//! of per-task values, one row per input in input order.

use std::io;
use std::path::PathBuf;

use clap::Args;

use toxseq::model::io::load_model;
use toxseq::smiles::validate_smiles;

use super::CliError;

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["smiles", "input"])))]
pub struct PredictArgs {
    /// Saved model file
    #[arg(long)]
    model: PathBuf,

    /// Single SMILES string
    #[arg(long)]
    smiles: Option<String>,

    /// Newline-delimited file of SMILES strings
    #[arg(long)]
    input: Option<PathBuf>,

    /// Output CSV path (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Screen inputs first; implausible rows get a diagnostics column
    /// instead of numbers
    #[arg(long)]
    strict: bool,
}

fn format_issues(report: &toxseq::smiles::ValidationReport) -> String {
    let parts: Vec<String> = report
        .issues
        .iter()
        .map(|(pos, kind)| format!("{kind} at {pos}"))
        .collect();
    format!("invalid: {}", parts.join("; "))
}

pub fn run(args: PredictArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let inputs: Vec<String> = match (&args.smiles, &args.input) {
        (Some(s), None) => vec![s.clone()],
        (None, Some(path)) => super::read_to_string(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect(),
        _ => unreachable!("clap enforces exactly one source"),
    };
    if inputs.is_empty() {
        return Err(CliError::Data("input contains no SMILES strings".to_string()));
    }

    // Diagnostics rows are shorter than prediction rows, hence flexible.
    let mut builder = csv::WriterBuilder::new();
    builder.flexible(true);
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(inputs.len() + 1);
    let mut header = vec!["smiles".to_string()];
    header.extend(model.task_names.iter().cloned());
    rows.push(header);

    for smiles in &inputs {
        if args.strict {
            let report = validate_smiles(smiles);
            if !report.is_plausible() {
                rows.push(vec![smiles.clone(), format_issues(&report)]);
                continue;
            }
        }
        let values = model.predict(smiles)?;
        let mut row = vec![smiles.clone()];
        row.extend(values.iter().map(|v| format!("{v}")));
        rows.push(row);
    }

    match &args.out {
        Some(path) => {
            let mut wtr = builder
                .from_path(path)
                .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
            for row in &rows {
                wtr.write_record(row)
                    .map_err(|e| CliError::Data(e.to_string()))?;
            }
            wtr.flush().map_err(|e| CliError::Data(e.to_string()))?;
            println!("wrote {} predictions to {}", inputs.len(), path.display());
        }
        None => {
            let mut wtr = builder.from_writer(io::stdout());
            for row in &rows {
                wtr.write_record(row)
                    .map_err(|e| CliError::Data(e.to_string()))?;
            }
            wtr.flush().map_err(|e| CliError::Data(e.to_string()))?;
        }
    }
    Ok(())
}
