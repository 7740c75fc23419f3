//! Regenerates the bundled sample datasets under `data/`.
//!
//! The corpora are synthetic stand-ins with the public datasets' shapes:
//! 1491 two-task clinical records, 7831 twelve-assay records with missing
//! labels, and 642 hydration free energies. Seeds are fixed, so the files
//! are reproducible byte for byte.
//!
//! Run from the workspace root: `cargo run --example make_sample_data`

use std::fs;
use std::path::Path;

use toxseq::data::synth::{clintox_like, freesolv_like, tox21_like};
use toxseq::data::write_dataset;

fn main() {
    let out_dir = Path::new("data");
    fs::create_dir_all(out_dir).expect("create data directory");
    for (name, (records, schema)) in [
        ("clintox.csv", clintox_like(1491, 2024)),
        ("tox21.csv", tox21_like(7831, 2025)),
        ("freesolv.csv", freesolv_like(642, 2026)),
    ] {
        let path = out_dir.join(name);
        write_dataset(&path, &records, &schema).expect("write dataset");
        println!("wrote {} ({} records)", path.display(), records.len());
    }
}
