//! `toxseq export-metrics`: merge evaluation reports into one long-format
//! CSV ("run,task,metric,value") for external plotting.

use std::path::{Path, PathBuf};

use clap::Args;

use toxseq::metrics::EvalReport;

use super::CliError;

#[derive(Args, Debug)]
pub struct ExportMetricsArgs {
    /// One or more EvalReport JSON files
    #[arg(required = true)]
    reports: Vec<PathBuf>,

    /// Output CSV path (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A report's run identifier: its path with the extension removed.
fn run_id(path: &Path) -> String {
    path.with_extension("").to_string_lossy().into_owned()
}

fn push_row(out: &mut String, fields: &[&str]) {
    let escaped: Vec<String> = fields
        .iter()
        .map(|f| {
            if f.contains(',') || f.contains('"') || f.contains('\n') {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                (*f).to_string()
            }
        })
        .collect();
    out.push_str(&escaped.join(","));
    out.push('\n');
}

pub fn run(args: ExportMetricsArgs) -> Result<(), CliError> {
    let mut out = String::from("run,task,metric,value\n");
    for path in &args.reports {
        let text = super::read_to_string(path)?;
        let report = EvalReport::from_json_str(&text).map_err(|e| {
            CliError::Data(format!("malformed report {}: {e}", path.display()))
        })?;
        let run = run_id(path);
        for t in &report.tasks {
            push_row(&mut out, &[&run, &t.name, &t.metric, &format!("{}", t.value)]);
        }
        for name in &report.skipped {
            push_row(&mut out, &[&run, name, "skipped", ""]);
        }
        let metric = report
            .tasks
            .first()
            .map(|t| t.metric.clone())
            .unwrap_or_default();
        push_row(&mut out, &[&run, "__mean__", &metric, &format!("{}", report.mean)]);
        push_row(&mut out, &[&run, "__std__", &metric, &format!("{}", report.std)]);
        push_row(
            &mut out,
            &[&run, "__n_records__", "count", &format!("{}", report.n_records)],
        );
    }
    match &args.out {
        Some(path) => {
            super::write_text(path, &out)?;
            println!("wrote metrics for {} reports to {}", args.reports.len(), path.display());
        }
        None => print!("{out}"),
    }
    Ok(())
}
