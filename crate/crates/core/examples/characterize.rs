//! Characterize a measurement file and print the derived source figures.
//!
//! cargo run --release --example characterize -- [file.meas]

use hsps::inference::{characterize_with, CharacterizeOptions};
use hsps::io::{report, MeasurementFile};

const REFERENCE: &str = include_str!("../data/paper_sec5.meas");

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).expect("readable measurement file"),
        None => REFERENCE.to_string(),
    };
    let file = MeasurementFile::parse(&text).unwrap_or_else(|e| panic!("{e}"));
    let options = CharacterizeOptions {
        integration_time: file.integration_time,
    };
    let r = characterize_with(&file.measured, &file.params, &options).expect("characterization");
    print!(
        "{}",
        report::characterization_text(&r, file.label.as_deref())
    );
}
