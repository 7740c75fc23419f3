//! Deterministic text serialization of trained models.
//!
//! Format, version 1:
//! ```text
//! TOXSEQ-MODEL v1
//! <key=value config lines, fixed order>
//! vocab
//! <one index<TAB>character line per vocabulary entry>
//! param <name> <rows> <cols>
//! <rows lines of cols space-separated floats>   (one block per tensor)
//! checksum=<16 hex digits>
//! ```
//! Floats are written with 17 significant digits, which round-trips every
//! f64 bit pattern exactly; the checksum is 64-bit FNV-1a over every byte
//! that precedes the checksum line. Two saves of the same model are
//! byte-identical.

use std::fs;
use std::path::Path;

use crate::data::TaskKind;
use crate::model::{BilstmModel, Hyperparams, LstmParams, ModelError};
use crate::smiles::Vocabulary;
use crate::tensor::Matrix;

const MAGIC: &str = "TOXSEQ-MODEL v1";

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn push_block(out: &mut String, name: &str, rows: usize, cols: usize, data: &[f64]) {
    assert_eq!(data.len(), rows * cols, "block {name} shape");
    out.push_str(&format!("param {name} {rows} {cols}\n"));
    for r in 0..rows {
        let row = &data[r * cols..(r + 1) * cols];
        let rendered: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&rendered.join(" "));
        out.push('\n');
    }
}

pub fn to_model_string(model: &BilstmModel) -> String {
    let hp = &model.config;
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let kind = match model.task_kind {
        TaskKind::Classification => "classification",
        TaskKind::Regression => "regression",
    };
    assert!(
        model.task_names.iter().all(|n| !n.contains(',') && !n.contains('\n')),
        "task names must not contain commas or newlines"
    );
    out.push_str(&format!("task_kind={kind}\n"));
    out.push_str(&format!("task_names={}\n", model.task_names.join(",")));
    out.push_str(&format!("units={}\n", hp.units));
    out.push_str(&format!("embed_dim={}\n", hp.embed_dim));
    out.push_str(&format!("dropout_rate={}\n", hp.dropout_rate));
    out.push_str(&format!("learning_rate={}\n", hp.learning_rate));
    out.push_str(&format!("max_len={}\n", hp.max_len));
    out.push_str(&format!("epochs={}\n", hp.epochs));
    out.push_str(&format!("batch_size={}\n", hp.batch_size));
    out.push_str(&format!("seed={}\n", hp.seed));
    out.push_str(&format!("patience={}\n", hp.patience));
    match hp.clip_norm {
        Some(c) => out.push_str(&format!("clip_norm={c}\n")),
        None => out.push_str("clip_norm=none\n"),
    }
    out.push_str(&format!("vocab_size={}\n", model.vocab.size()));
    out.push_str("vocab\n");
    out.push_str(&model.vocab.to_file_string());
    for (name, data) in model.param_blocks() {
        let (rows, cols) = block_shape(
            name,
            model.vocab.size(),
            hp.units,
            hp.embed_dim,
            model.n_tasks(),
        );
        push_block(&mut out, name, rows, cols, data);
    }
    let checksum = fnv1a64(out.as_bytes());
    out.push_str(&format!("checksum={checksum:016x}\n"));
    out
}

pub fn save_model(model: &BilstmModel, path: &Path) -> Result<(), ModelError> {
    fs::write(path, to_model_string(model)).map_err(|e| ModelError::Io(e.to_string()))
}

fn block_shape(
    name: &str,
    vocab_size: usize,
    units: usize,
    embed_dim: usize,
    n_tasks: usize,
) -> (usize, usize) {
    match name {
        "embedding" => (vocab_size, embed_dim),
        "head_W" => (n_tasks, 2 * units),
        "head_b" => (1, n_tasks),
        _ if name.ends_with(".W_f")
            || name.ends_with(".W_i")
            || name.ends_with(".W_o")
            || name.ends_with(".W_c") =>
        {
            (units, units + embed_dim)
        }
        _ => (1, units),
    }
}

struct Cursor<'a> {
    lines: Vec<&'a str>,
    at: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> ModelError {
        ModelError::Parse {
            line: self.at,
            reason: reason.into(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str, ModelError> {
        let line = self
            .lines
            .get(self.at)
            .copied()
            .ok_or_else(|| ModelError::Parse {
                line: self.at + 1,
                reason: "unexpected end of file".to_string(),
            })?;
        self.at += 1;
        Ok(line)
    }

    fn expect_value(&mut self, key: &str) -> Result<&'a str, ModelError> {
        let line = self.next_line()?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| self.err(format!("expected '{key}=...'")))
    }

    fn parse_value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ModelError> {
        let raw = self.expect_value(key)?;
        raw.parse()
            .map_err(|_| self.err(format!("invalid value for '{key}'")))
    }
}

pub fn from_model_string(text: &str) -> Result<BilstmModel, ModelError> {
    // Checksum first: corruption is reported before any structural error.
    let trimmed = text.strip_suffix('\n').unwrap_or(text);
    let tail_start = trimmed.rfind('\n').map(|p| p + 1).unwrap_or(0);
    let last_line = &trimmed[tail_start..];
    let n_lines = trimmed.lines().count();
    let hex = last_line
        .strip_prefix("checksum=")
        .ok_or(ModelError::Parse {
            line: n_lines,
            reason: "missing checksum line".to_string(),
        })?;
    let declared = u64::from_str_radix(hex, 16).map_err(|_| ModelError::Parse {
        line: n_lines,
        reason: "checksum is not 64-bit hex".to_string(),
    })?;
    let content = &text[..tail_start];
    if fnv1a64(content.as_bytes()) != declared {
        return Err(ModelError::ChecksumMismatch);
    }

    let mut cur = Cursor {
        lines: content.lines().collect(),
        at: 0,
    };
    let version = cur.next_line()?;
    if version != MAGIC {
        return match version.strip_prefix("TOXSEQ-MODEL ") {
            Some(v) => Err(ModelError::FormatVersionMismatch(v.to_string())),
            None => Err(cur.err("not a model file")),
        };
    }

    let task_kind = match cur.expect_value("task_kind")? {
        "classification" => TaskKind::Classification,
        "regression" => TaskKind::Regression,
        other => return Err(cur.err(format!("unknown task_kind '{other}'"))),
    };
    let task_names: Vec<String> = cur
        .expect_value("task_names")?
        .split(',')
        .map(|s| s.to_string())
        .collect();
    if task_names.is_empty() || task_names.iter().any(|n| n.is_empty()) {
        return Err(cur.err("task_names must be a non-empty comma list"));
    }
    let units: usize = cur.parse_value("units")?;
    let embed_dim: usize = cur.parse_value("embed_dim")?;
    let dropout_rate: f64 = cur.parse_value("dropout_rate")?;
    let learning_rate: f64 = cur.parse_value("learning_rate")?;
    let max_len: usize = cur.parse_value("max_len")?;
    let epochs: usize = cur.parse_value("epochs")?;
    let batch_size: usize = cur.parse_value("batch_size")?;
    let seed: u64 = cur.parse_value("seed")?;
    let patience: usize = cur.parse_value("patience")?;
    let clip_norm = match cur.expect_value("clip_norm")? {
        "none" => None,
        raw => Some(
            raw.parse::<f64>()
                .map_err(|_| cur.err("invalid clip_norm"))?,
        ),
    };
    let vocab_size: usize = cur.parse_value("vocab_size")?;
    if units == 0 || embed_dim == 0 || vocab_size < 2 {
        return Err(cur.err("degenerate model dimensions"));
    }

    if cur.next_line()? != "vocab" {
        return Err(cur.err("expected 'vocab' section"));
    }
    let mut vocab_text = String::new();
    for _ in 0..vocab_size {
        vocab_text.push_str(cur.next_line()?);
        vocab_text.push('\n');
    }
    let vocab = Vocabulary::from_file_string(&vocab_text).map_err(|e| cur.err(e.to_string()))?;
    if vocab.size() != vocab_size {
        return Err(cur.err("vocab_size does not match vocabulary block"));
    }

    let n_tasks = task_names.len();
    let mut embedding = Matrix::zeros(0, 0);
    let mut fwd = LstmParams::zeros(units, embed_dim);
    let mut bwd = LstmParams::zeros(units, embed_dim);
    let mut head_w = Matrix::zeros(0, 0);
    let mut head_b = Vec::new();

    let block_names = [
        "embedding", "fwd.W_f", "fwd.W_i", "fwd.W_o", "fwd.W_c", "fwd.b_f", "fwd.b_i", "fwd.b_o",
        "fwd.b_c", "bwd.W_f", "bwd.W_i", "bwd.W_o", "bwd.W_c", "bwd.b_f", "bwd.b_i", "bwd.b_o",
        "bwd.b_c", "head_W", "head_b",
    ];
    for name in block_names {
        let (rows, cols) = block_shape(name, vocab_size, units, embed_dim, n_tasks);
        let header = cur.next_line()?;
        let expected = format!("param {name} {rows} {cols}");
        if header != expected {
            return Err(cur.err(format!("expected '{expected}', found '{header}'")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = cur.next_line()?;
            let before = data.len();
            for tok in line.split(' ') {
                data.push(
                    tok.parse::<f64>()
                        .map_err(|_| cur.err(format!("bad float '{tok}' in block {name}")))?,
                );
            }
            if data.len() - before != cols {
                return Err(cur.err(format!(
                    "block {name} row has {} values, expected {cols}",
                    data.len() - before
                )));
            }
        }
        match name {
            "embedding" => {
                embedding = Matrix {
                    rows,
                    cols,
                    data,
                }
            }
            "head_W" => {
                head_w = Matrix {
                    rows,
                    cols,
                    data,
                }
            }
            "head_b" => head_b = data,
            _ => {
                let cell = if name.starts_with("fwd.") {
                    &mut fwd
                } else {
                    &mut bwd
                };
                match &name[4..] {
                    "W_f" => cell.w_f = Matrix { rows, cols, data },
                    "W_i" => cell.w_i = Matrix { rows, cols, data },
                    "W_o" => cell.w_o = Matrix { rows, cols, data },
                    "W_c" => cell.w_c = Matrix { rows, cols, data },
                    "b_f" => cell.b_f = data,
                    "b_i" => cell.b_i = data,
                    "b_o" => cell.b_o = data,
                    "b_c" => cell.b_c = data,
                    _ => unreachable!("block list is fixed"),
                }
            }
        }
    }
    if cur.at != cur.lines.len() {
        return Err(cur.err("trailing content after parameter blocks"));
    }

    Ok(BilstmModel {
        vocab,
        embedding,
        forward_cell: fwd,
        backward_cell: bwd,
        head_w,
        head_b,
        task_kind,
        task_names,
        config: Hyperparams {
            units,
            embed_dim,
            dropout_rate,
            learning_rate,
            max_len,
            epochs,
            batch_size,
            seed,
            patience,
            clip_norm,
        },
    })
}

pub fn load_model(path: &Path) -> Result<BilstmModel, ModelError> {
    let text = fs::read_to_string(path).map_err(|e| ModelError::Io(e.to_string()))?;
    from_model_string(&text)
}
