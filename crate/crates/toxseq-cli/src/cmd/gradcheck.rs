//! `toxseq gradcheck`: synthesize a tiny random model from a seed and
//! compare its exact backward pass against central finite differences.
//! The CI tripwire: exit 5 whenever any tensor misses the tolerance.

use clap::Args;

use toxseq::data::TaskKind;
use toxseq::train::check::{run_gradient_check, CheckDims, GRADCHECK_TOL};

use super::CliError;

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    /// Seed for the synthesized model and batch
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Task head to check
    #[arg(long, value_parser = ["classification", "regression"], default_value = "classification")]
    kind: String,

    /// Dropout rate applied through a fixed mask
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,

    /// Deliberately corrupt one analytic gradient entry first; the check
    /// must then fail (negative control)
    #[arg(long)]
    perturb: bool,
}

pub fn run(args: GradcheckArgs) -> Result<(), CliError> {
    let kind = match args.kind.as_str() {
        "regression" => TaskKind::Regression,
        _ => TaskKind::Classification,
    };
    let report = run_gradient_check(args.seed, kind, args.dropout, &CheckDims::default(), args.perturb)?;
    println!("{:<12} max relative error", "parameter");
    for block in &report.blocks {
        println!("{:<12} {:.3e}", block.name, block.max_rel_err);
    }
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    println!(
        "overall {:.3e} (tolerance {GRADCHECK_TOL:.0e}): {verdict}",
        report.max_rel_err
    );
    if !report.passed() {
        return Err(CliError::Tolerance(format!(
            "max relative error {:.3e} exceeds {GRADCHECK_TOL:.0e}",
            report.max_rel_err
        )));
    }
    Ok(())
}
