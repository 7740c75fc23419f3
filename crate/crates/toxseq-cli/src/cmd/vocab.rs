//! `toxseq vocab`: build a character vocabulary from a dataset's SMILES
//! column and write it in the two-column index/character format.

use std::path::PathBuf;

use clap::Args;

use toxseq::smiles::Vocabulary;

use super::CliError;

#[derive(Args, Debug)]
pub struct VocabArgs {
    /// Dataset CSV
    #[arg(long)]
    data: PathBuf,

    /// Column holding the SMILES strings
    #[arg(long, default_value = "smiles")]
    smiles_column: String,

    /// Output path (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: VocabArgs) -> Result<(), CliError> {
    let mut rdr = csv::Reader::from_path(&args.data)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", args.data.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Data(e.to_string()))?
        .clone();
    let index = headers
        .iter()
        .position(|h| h == args.smiles_column)
        .ok_or_else(|| {
            CliError::Data(format!(
                "column '{}' not found in {}",
                args.smiles_column,
                args.data.display()
            ))
        })?;
    let mut corpus = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Data(e.to_string()))?;
        let smiles = record.get(index).unwrap_or("");
        if !smiles.is_empty() {
            corpus.push(smiles.to_string());
        }
    }
    let vocab = Vocabulary::build(&corpus)?;
    match &args.out {
        Some(path) => {
            vocab.save(path)?;
            println!(
                "wrote vocabulary of {} entries ({} SMILES scanned) to {}",
                vocab.size(),
                corpus.len(),
                path.display()
            );
        }
        None => print!("{}", vocab.to_file_string()),
    }
    Ok(())
}
