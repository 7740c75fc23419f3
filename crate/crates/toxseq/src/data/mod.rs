//! Dataset ingestion and preparation: CSV loading against a task schema,
//! synthetic multi-task merging, class balancing by undersampling, and
//! seeded train/test splitting.
//!
//! Every randomized operation here is a pure function of its inputs and an
//! explicit seed, so whole pipelines replay bit-for-bit.

pub mod synth;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;
use crate::smiles::validate_smiles;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("column '{0}' not found in header")]
    MissingColumn(String),
    #[error("malformed row at line {row}: {reason}")]
    MalformedRow { row: u64, reason: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("merge requires two classification schemas")]
    KindMismatch,
    #[error("task has only one class among labeled records")]
    SingleClass,
    #[error("need at least 2 records to split")]
    TooFewRecords,
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Classification,
    Regression,
}

/// Names the SMILES column and the labeled tasks of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSchema {
    pub name: String,
    pub smiles_column: String,
    pub task_columns: Vec<(String, TaskKind)>,
    /// When true, blank or non-numeric label cells become masked-out entries
    /// instead of load errors.
    pub allow_missing: bool,
}

impl TaskSchema {
    /// Validated constructor: at least one task; regression schemas carry
    /// exactly one task and cannot allow missing labels.
    pub fn new(
        name: &str,
        smiles_column: &str,
        task_columns: Vec<(String, TaskKind)>,
        allow_missing: bool,
    ) -> Result<Self, DataError> {
        if task_columns.is_empty() {
            return Err(DataError::InvalidSchema(
                "schema needs at least one task column".to_string(),
            ));
        }
        let has_regression = task_columns
            .iter()
            .any(|(_, k)| *k == TaskKind::Regression);
        if has_regression && (task_columns.len() != 1 || allow_missing) {
            return Err(DataError::InvalidSchema(
                "regression schemas have exactly one task and require labels on every row"
                    .to_string(),
            ));
        }
        Ok(TaskSchema {
            name: name.to_string(),
            smiles_column: smiles_column.to_string(),
            task_columns,
            allow_missing,
        })
    }

    pub fn n_tasks(&self) -> usize {
        self.task_columns.len()
    }

    pub fn task_names(&self) -> Vec<String> {
        self.task_columns.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn is_regression(&self) -> bool {
        self.task_columns[0].1 == TaskKind::Regression
    }

    /// Position of a task by column name.
    pub fn task_index(&self, name: &str) -> Option<usize> {
        self.task_columns.iter().position(|(n, _)| n == name)
    }

    /// Two binary tasks: FDA approval status and clinical-trial toxicity.
    pub fn clintox() -> Self {
        let tasks = ["FDA_APPROVED", "CT_TOX"]
            .iter()
            .map(|n| (n.to_string(), TaskKind::Classification))
            .collect();
        Self::new("clintox", "smiles", tasks, false).unwrap()
    }

    /// Twelve assay tasks with partially missing labels.
    pub fn tox21() -> Self {
        let tasks = [
            "NR-AR",
            "NR-AR-LBD",
            "NR-AhR",
            "NR-Aromatase",
            "NR-ER",
            "NR-ER-LBD",
            "NR-PPAR-gamma",
            "SR-ARE",
            "SR-ATAD5",
            "SR-HSE",
            "SR-MMP",
            "SR-p53",
        ]
        .iter()
        .map(|n| (n.to_string(), TaskKind::Classification))
        .collect();
        Self::new("tox21", "smiles", tasks, true).unwrap()
    }

    /// One regression task: experimental hydration free energy in kcal/mol.
    pub fn freesolv() -> Self {
        let tasks = vec![("expt".to_string(), TaskKind::Regression)];
        Self::new("freesolv", "smiles", tasks, false).unwrap()
    }

    /// Shipped presets by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "clintox" => Some(Self::clintox()),
            "tox21" => Some(Self::tox21()),
            "freesolv" => Some(Self::freesolv()),
            _ => None,
        }
    }
}

/// One molecule with its label vector and a per-task presence mask.
/// Masked-out entries hold NaN as a sentinel and are never read.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub smiles: String,
    pub labels: Vec<f64>,
    pub mask: Vec<bool>,
}

impl DatasetRecord {
    pub fn new(smiles: &str, labels: Vec<f64>, mask: Vec<bool>) -> Self {
        assert_eq!(labels.len(), mask.len(), "labels and mask must align");
        DatasetRecord {
            smiles: smiles.to_string(),
            labels,
            mask,
        }
    }

    /// Record with every task labeled.
    pub fn fully_labeled(smiles: &str, labels: Vec<f64>) -> Self {
        let mask = vec![true; labels.len()];
        Self::new(smiles, labels, mask)
    }
}

/// Seeded train/test partition parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Reject rows whose SMILES fails the structural plausibility screen.
    pub strict: bool,
    /// Keep only the first row for each distinct SMILES string.
    pub dedup: bool,
}

/// Load result: the records plus the file lines whose SMILES were flagged
/// by the plausibility screen (kept in `records` unless strict mode was on,
/// in which case flagged rows fail the load instead).
#[derive(Debug)]
pub struct LoadReport {
    pub records: Vec<DatasetRecord>,
    pub flagged: Vec<(u64, String)>,
}

/// Loads a CSV dataset with default options. See [`load_dataset_with`].
pub fn load_dataset(path: &Path, schema: &TaskSchema) -> Result<Vec<DatasetRecord>, DataError> {
    load_dataset_with(path, schema, LoadOptions::default()).map(|r| r.records)
}

/// Loads a CSV dataset against a schema. Comma-separated, double-quote
/// escaped, UTF-8, header required. Row numbers in errors are 1-based file
/// lines (the header is line 1). Duplicate SMILES are kept unless `dedup`.
pub fn load_dataset_with(
    path: &Path,
    schema: &TaskSchema,
    options: LoadOptions,
) -> Result<LoadReport, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| DataError::Io(e.to_string()))?;

    let headers = rdr.headers().map_err(|e| DataError::Io(e.to_string()))?;
    let col_index = |name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let smiles_col = col_index(&schema.smiles_column)?;
    let task_cols = schema
        .task_columns
        .iter()
        .map(|(name, kind)| Ok((col_index(name)?, *kind)))
        .collect::<Result<Vec<_>, DataError>>()?;

    let mut records = Vec::new();
    let mut flagged = Vec::new();
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| match e.position() {
            Some(p) => DataError::MalformedRow {
                row: p.line(),
                reason: "unparseable CSV record".to_string(),
            },
            None => DataError::Io(e.to_string()),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let malformed = |reason: String| DataError::MalformedRow { row: line, reason };

        let smiles = row
            .get(smiles_col)
            .ok_or_else(|| malformed("missing SMILES cell".to_string()))?
            .trim();
        if smiles.is_empty() {
            return Err(malformed("empty SMILES".to_string()));
        }

        let mut labels = Vec::with_capacity(task_cols.len());
        let mut mask = Vec::with_capacity(task_cols.len());
        for &(col, kind) in &task_cols {
            let cell = row.get(col).unwrap_or("").trim();
            let parsed = if cell.is_empty() {
                None
            } else {
                cell.parse::<f64>().ok()
            };
            match parsed {
                Some(v) => {
                    match kind {
                        TaskKind::Classification if v != 0.0 && v != 1.0 => {
                            return Err(malformed(format!(
                                "classification label must be 0 or 1, got '{cell}'"
                            )));
                        }
                        TaskKind::Regression if !v.is_finite() => {
                            return Err(malformed(format!("non-finite label '{cell}'")));
                        }
                        _ => {}
                    }
                    labels.push(v);
                    mask.push(true);
                }
                None if schema.allow_missing => {
                    labels.push(f64::NAN);
                    mask.push(false);
                }
                None => {
                    return Err(malformed(format!("missing or non-numeric label '{cell}'")));
                }
            }
        }

        let report = validate_smiles(smiles);
        if !report.is_plausible() {
            let summary = report
                .issues
                .iter()
                .map(|(pos, kind)| format!("{kind} at position {pos}"))
                .collect::<Vec<_>>()
                .join("; ");
            if options.strict {
                return Err(malformed(format!("implausible SMILES: {summary}")));
            }
            flagged.push((line, summary));
        }

        if options.dedup && !seen.insert(smiles.to_string()) {
            continue;
        }
        records.push(DatasetRecord::new(smiles, labels, mask));
    }
    Ok(LoadReport { records, flagged })
}

/// Writes records back to the same CSV layout [`load_dataset`] reads.
/// Masked-out entries become blank cells; classification labels print as
/// `0`/`1`; regression labels print in shortest round-trip decimal form, so
/// a load of the written file reproduces every unmasked value exactly.
pub fn write_dataset(
    path: &Path,
    records: &[DatasetRecord],
    schema: &TaskSchema,
) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| DataError::Io(e.to_string()))?;
    let mut header = vec![schema.smiles_column.clone()];
    header.extend(schema.task_names());
    wtr.write_record(&header)
        .map_err(|e| DataError::Io(e.to_string()))?;
    for r in records {
        let mut row = vec![r.smiles.clone()];
        for (k, &(_, kind)) in schema.task_columns.iter().enumerate() {
            if !r.mask[k] {
                row.push(String::new());
            } else {
                match kind {
                    TaskKind::Classification => row.push(format!("{}", r.labels[k] as i64)),
                    TaskKind::Regression => row.push(format!("{}", r.labels[k])),
                }
            }
        }
        wtr.write_record(&row)
            .map_err(|e| DataError::Io(e.to_string()))?;
    }
    wtr.flush().map_err(|e| DataError::Io(e.to_string()))?;
    Ok(())
}

/// Combines two classification datasets into one multi-task set: the merged
/// schema carries a's tasks then b's, records from each side are masked out
/// on the other side's tasks, and every original label and mask survives.
pub fn merge_synthetic(
    a: &[DatasetRecord],
    schema_a: &TaskSchema,
    b: &[DatasetRecord],
    schema_b: &TaskSchema,
) -> Result<(Vec<DatasetRecord>, TaskSchema), DataError> {
    if schema_a.is_regression() || schema_b.is_regression() {
        return Err(DataError::KindMismatch);
    }
    let mut task_columns = schema_a.task_columns.clone();
    task_columns.extend(schema_b.task_columns.clone());
    let merged_schema = TaskSchema::new(
        &format!("{}+{}", schema_a.name, schema_b.name),
        &schema_a.smiles_column,
        task_columns,
        true,
    )?;
    let (na, nb) = (schema_a.n_tasks(), schema_b.n_tasks());
    let mut out = Vec::with_capacity(a.len() + b.len());
    for r in a {
        let mut labels = r.labels.clone();
        labels.extend(std::iter::repeat(f64::NAN).take(nb));
        let mut mask = r.mask.clone();
        mask.extend(std::iter::repeat(false).take(nb));
        out.push(DatasetRecord::new(&r.smiles, labels, mask));
    }
    for r in b {
        let mut labels = vec![f64::NAN; na];
        labels.extend_from_slice(&r.labels);
        let mut mask = vec![false; na];
        mask.extend_from_slice(&r.mask);
        out.push(DatasetRecord::new(&r.smiles, labels, mask));
    }
    Ok((out, merged_schema))
}

/// Count of (negative, positive) labeled records on a task.
pub fn class_counts(records: &[DatasetRecord], task_index: usize) -> (usize, usize) {
    let mut neg = 0;
    let mut pos = 0;
    for r in records {
        if r.mask[task_index] {
            if r.labels[task_index] == 1.0 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
    }
    (neg, pos)
}

/// Balances classes on one task by randomly discarding majority-class
/// records until both classes match the minority count. Records without a
/// label on the balancing task are dropped, keeping the exact-balance
/// guarantee meaningful. Deterministic for a fixed (input, seed) pair; the
/// result is a shuffled sub-multiset of the input.
pub fn undersample(
    records: &[DatasetRecord],
    task_index: usize,
    seed: u64,
) -> Result<Vec<DatasetRecord>, DataError> {
    assert!(
        records.iter().all(|r| task_index < r.labels.len()),
        "task_index out of range"
    );
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if r.mask[task_index] {
            if r.labels[task_index] == 1.0 {
                pos.push(i);
            } else {
                neg.push(i);
            }
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(DataError::SingleClass);
    }
    let mut rng = Rng::new(seed);
    let (mut majority, minority) = if pos.len() >= neg.len() {
        (pos, neg)
    } else {
        (neg, pos)
    };
    rng.shuffle(&mut majority);
    majority.truncate(minority.len());
    let mut selected = minority;
    selected.extend(majority);
    rng.shuffle(&mut selected);
    Ok(selected.into_iter().map(|i| records[i].clone()).collect())
}

/// Seeded shuffle followed by a prefix/suffix cut at
/// `round(train_fraction * n)`, clamped so both sides are non-empty. The two
/// halves are disjoint and together exhaust the input.
pub fn split(
    records: &[DatasetRecord],
    spec: &SplitSpec,
) -> Result<(Vec<DatasetRecord>, Vec<DatasetRecord>), DataError> {
    if records.len() < 2 {
        return Err(DataError::TooFewRecords);
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(DataError::InvalidSchema(
            "train_fraction must lie strictly between 0 and 1".to_string(),
        ));
    }
    let n = records.len();
    let cut = ((spec.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut indices: Vec<usize> = (0..n).collect();
    Rng::new(spec.seed).shuffle(&mut indices);
    let train = indices[..cut].iter().map(|&i| records[i].clone()).collect();
    let test = indices[cut..].iter().map(|&i| records[i].clone()).collect();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn schema_invariants() {
        assert!(TaskSchema::new("x", "smiles", vec![], false).is_err());
        let two_reg = vec![
            ("a".to_string(), TaskKind::Regression),
            ("b".to_string(), TaskKind::Regression),
        ];
        assert!(TaskSchema::new("x", "smiles", two_reg, false).is_err());
        let reg = vec![("a".to_string(), TaskKind::Regression)];
        assert!(TaskSchema::new("x", "smiles", reg.clone(), true).is_err());
        assert!(TaskSchema::new("x", "smiles", reg, false).is_ok());
    }

    #[test]
    fn presets_have_expected_shapes() {
        assert_eq!(TaskSchema::clintox().n_tasks(), 2);
        assert_eq!(TaskSchema::tox21().n_tasks(), 12);
        assert_eq!(TaskSchema::freesolv().n_tasks(), 1);
        assert!(TaskSchema::freesolv().is_regression());
        assert!(TaskSchema::preset("clintox").is_some());
        assert!(TaskSchema::preset("nope").is_none());
        assert_eq!(TaskSchema::clintox().task_index("CT_TOX"), Some(1));
    }

    #[test]
    fn load_basic_clintox_shape() {
        let f = write_temp("smiles,FDA_APPROVED,CT_TOX\nCCO,1,0\nCCN,0,1\n");
        let recs = load_dataset(f.path(), &TaskSchema::clintox()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].smiles, "CCO");
        assert_eq!(recs[0].labels, vec![1.0, 0.0]);
        assert!(recs[0].mask.iter().all(|&m| m));
    }

    #[test]
    fn load_missing_column() {
        let f = write_temp("smiles,FDA_APPROVED\nCCO,1\n");
        assert_eq!(
            load_dataset(f.path(), &TaskSchema::clintox()),
            Err(DataError::MissingColumn("CT_TOX".to_string()))
        );
    }

    #[test]
    fn load_rejects_out_of_domain_label() {
        let f = write_temp("smiles,FDA_APPROVED,CT_TOX\nCCO,2,0\n");
        let err = load_dataset(f.path(), &TaskSchema::clintox()).unwrap_err();
        assert!(matches!(err, DataError::MalformedRow { row: 2, .. }));
    }

    #[test]
    fn load_rejects_empty_smiles_with_line_number() {
        let f = write_temp("smiles,FDA_APPROVED,CT_TOX\nCCO,1,0\n,1,0\n");
        let err = load_dataset(f.path(), &TaskSchema::clintox()).unwrap_err();
        assert!(matches!(err, DataError::MalformedRow { row: 3, .. }));
    }

    #[test]
    fn blank_cells_mask_only_when_allowed() {
        let header = "smiles,NR-AR,NR-AR-LBD,NR-AhR,NR-Aromatase,NR-ER,NR-ER-LBD,\
                      NR-PPAR-gamma,SR-ARE,SR-ATAD5,SR-HSE,SR-MMP,SR-p53";
        let f = write_temp(&format!("{header}\nCCO,1,,0,1,,0,1,0,,1,0,1\n"));
        let recs = load_dataset(f.path(), &TaskSchema::tox21()).unwrap();
        assert_eq!(recs[0].mask.iter().filter(|&&m| !m).count(), 3);
        assert!(recs[0].labels[1].is_nan());

        let g = write_temp("smiles,FDA_APPROVED,CT_TOX\nCCO,,0\n");
        assert!(load_dataset(g.path(), &TaskSchema::clintox()).is_err());
    }

    #[test]
    fn strict_mode_rejects_implausible_smiles() {
        let f = write_temp("smiles,FDA_APPROVED,CT_TOX\nC(C,1,0\n");
        let report = load_dataset_with(f.path(), &TaskSchema::clintox(), LoadOptions::default())
            .unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.flagged.len(), 1);
        assert_eq!(report.flagged[0].0, 2);

        let strict = LoadOptions {
            strict: true,
            ..Default::default()
        };
        assert!(load_dataset_with(f.path(), &TaskSchema::clintox(), strict).is_err());
    }

    #[test]
    fn dedup_keeps_first_occurrence() {
        let f = write_temp("smiles,FDA_APPROVED,CT_TOX\nCCO,1,0\nCCO,0,1\nCCN,1,0\n");
        let opts = LoadOptions {
            dedup: true,
            ..Default::default()
        };
        let report = load_dataset_with(f.path(), &TaskSchema::clintox(), opts).unwrap();
        assert_eq!(report.records.len(), 2);
        assert_eq!(report.records[0].labels, vec![1.0, 0.0]);
    }

    #[test]
    fn write_then_load_is_lossless() {
        let schema = TaskSchema::freesolv();
        let records = vec![
            DatasetRecord::fully_labeled("CCO", vec![-5.02]),
            DatasetRecord::fully_labeled("C1CCCCC1", vec![1.23e-3]),
            DatasetRecord::fully_labeled("CO", vec![-17.0]),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dump.csv");
        write_dataset(&path, &records, &schema).unwrap();
        let back = load_dataset(&path, &schema).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn write_then_load_preserves_masks() {
        let schema = TaskSchema::tox21();
        let mut labels = vec![f64::NAN; 12];
        labels[3] = 1.0;
        let mut mask = vec![false; 12];
        mask[3] = true;
        let records = vec![DatasetRecord::new("CCO", labels, mask.clone())];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dump.csv");
        write_dataset(&path, &records, &schema).unwrap();
        let back = load_dataset(&path, &schema).unwrap();
        assert_eq!(back[0].mask, mask);
        assert_eq!(back[0].labels[3], 1.0);
    }

    #[test]
    fn merge_widens_schema_and_masks() {
        let a = vec![DatasetRecord::fully_labeled("CCO", vec![1.0, 0.0])];
        let b = vec![
            DatasetRecord::fully_labeled("CCN", vec![0.0]),
            DatasetRecord::fully_labeled("CCC", vec![1.0]),
        ];
        let sa = TaskSchema::clintox();
        let sb = TaskSchema::new(
            "mini",
            "smiles",
            vec![("T".to_string(), TaskKind::Classification)],
            false,
        )
        .unwrap();
        let (merged, schema) = merge_synthetic(&a, &sa, &b, &sb).unwrap();
        assert_eq!(schema.n_tasks(), 3);
        assert_eq!(merged.len(), 3);
        assert_eq!(merged[0].mask, vec![true, true, false]);
        assert_eq!(merged[1].mask, vec![false, false, true]);
        assert_eq!(merged[0].labels[..2], [1.0, 0.0]);
        assert_eq!(merged[2].labels[2], 1.0);
        assert!(merged.iter().all(|r| r.mask.iter().any(|&m| m)));
    }

    #[test]
    fn merge_with_empty_side_widens_only() {
        let a = vec![DatasetRecord::fully_labeled("CCO", vec![1.0, 0.0])];
        let (merged, schema) =
            merge_synthetic(&a, &TaskSchema::clintox(), &[], &TaskSchema::tox21()).unwrap();
        assert_eq!(schema.n_tasks(), 14);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].mask[2..], [false; 12]);
    }

    #[test]
    fn merge_rejects_regression() {
        let a = vec![DatasetRecord::fully_labeled("CCO", vec![1.0, 0.0])];
        let b = vec![DatasetRecord::fully_labeled("CCN", vec![-3.0])];
        assert_eq!(
            merge_synthetic(&a, &TaskSchema::clintox(), &b, &TaskSchema::freesolv()),
            Err(DataError::KindMismatch)
        );
    }

    fn labeled(smiles: &str, y: f64) -> DatasetRecord {
        DatasetRecord::fully_labeled(smiles, vec![y])
    }

    #[test]
    fn undersample_balances_exactly() {
        let mut records: Vec<_> = (0..10).map(|i| labeled(&format!("C{i}"), 1.0)).collect();
        records.extend((0..4).map(|i| labeled(&format!("N{i}"), 0.0)));
        let out = undersample(&records, 0, 7).unwrap();
        assert_eq!(out.len(), 8);
        assert_eq!(class_counts(&out, 0), (4, 4));
    }

    #[test]
    fn undersample_is_a_sub_multiset_and_deterministic() {
        let mut records: Vec<_> = (0..9).map(|i| labeled(&format!("C{i}"), 1.0)).collect();
        records.extend((0..3).map(|i| labeled(&format!("N{i}"), 0.0)));
        let a = undersample(&records, 0, 42).unwrap();
        let b = undersample(&records, 0, 42).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(records.contains(r));
        }
        let mut names: Vec<_> = a.iter().map(|r| r.smiles.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), a.len());
    }

    #[test]
    fn undersample_balanced_input_is_a_permutation() {
        let records: Vec<_> = (0..6)
            .map(|i| labeled(&format!("C{i}"), (i % 2) as f64))
            .collect();
        let out = undersample(&records, 0, 3).unwrap();
        assert_eq!(out.len(), 6);
        let mut a: Vec<_> = out.iter().map(|r| r.smiles.clone()).collect();
        let mut b: Vec<_> = records.iter().map(|r| r.smiles.clone()).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn undersample_single_class_errors() {
        let records: Vec<_> = (0..5).map(|i| labeled(&format!("C{i}"), 1.0)).collect();
        assert_eq!(undersample(&records, 0, 0), Err(DataError::SingleClass));
    }

    #[test]
    fn undersample_drops_unlabeled_records() {
        let mut records = vec![
            labeled("CC", 1.0),
            labeled("CN", 0.0),
            DatasetRecord::new("CO", vec![f64::NAN], vec![false]),
        ];
        records.push(labeled("CCC", 1.0));
        let out = undersample(&records, 0, 1).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|r| r.mask[0]));
    }

    #[test]
    fn split_80_20() {
        let records: Vec<_> = (0..100).map(|i| labeled(&format!("C{i}"), 0.0)).collect();
        let spec = SplitSpec {
            train_fraction: 0.8,
            seed: 11,
        };
        let (train, test) = split(&records, &spec).unwrap();
        assert_eq!((train.len(), test.len()), (80, 20));

        let mut all: Vec<_> = train.iter().chain(&test).map(|r| &r.smiles).collect();
        all.sort();
        let mut orig: Vec<_> = records.iter().map(|r| &r.smiles).collect();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn split_is_seed_deterministic() {
        let records: Vec<_> = (0..50).map(|i| labeled(&format!("C{i}"), 0.0)).collect();
        let spec = SplitSpec {
            train_fraction: 0.8,
            seed: 5,
        };
        let (a, _) = split(&records, &spec).unwrap();
        let (b, _) = split(&records, &spec).unwrap();
        assert_eq!(a, b);
        let other = SplitSpec {
            train_fraction: 0.8,
            seed: 6,
        };
        let (c, _) = split(&records, &other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn split_edge_cases() {
        let one = vec![labeled("C", 0.0)];
        let spec = SplitSpec {
            train_fraction: 0.8,
            seed: 0,
        };
        assert_eq!(split(&one, &spec), Err(DataError::TooFewRecords));

        let two = vec![labeled("C", 0.0), labeled("N", 1.0)];
        let extreme = SplitSpec {
            train_fraction: 0.999,
            seed: 0,
        };
        let (train, test) = split(&two, &extreme).unwrap();
        assert_eq!((train.len(), test.len()), (1, 1));

        let bad = SplitSpec {
            train_fraction: 1.0,
            seed: 0,
        };
        assert!(split(&two, &bad).is_err());
    }
}
