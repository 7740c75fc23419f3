//! The fully resolved training configuration echoed into every run
//! directory. Re-running `train --config <dir>/config.json` reproduces the
//! run's artifacts byte for byte.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use toxseq::data::TaskSchema;
use toxseq::model::Hyperparams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub data: PathBuf,
    /// Preset name when one was used; the resolved schema is authoritative.
    pub preset: Option<String>,
    pub schema: TaskSchema,
    pub hyperparams: Hyperparams,
    pub train_fraction: f64,
    /// Task the classes were balanced on, when undersampling was requested.
    pub undersample: Option<String>,
    pub strict: bool,
    pub dedup: bool,
}

impl RunConfig {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
