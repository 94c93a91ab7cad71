//! Runs the simulator against the closed-form gate statistics over the
//! oracle matrix and the inversion round trip.
//!
//! cargo run --release --example oracle_validation -- [gates per point]

use hsps::sim::SimConfig;
use hsps::validate::validate;

fn main() {
    let gates: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("gate count"))
        .unwrap_or(100_000);
    let round_trip = SimConfig {
        duration: 2.0,
        ..SimConfig::reference()
    };
    let summary = validate(gates, 7, Some(&round_trip)).expect("validation");
    for c in &summary.checks {
        println!("{c}");
    }
    let failed = summary.checks.iter().filter(|c| !c.passed()).count();
    println!(
        "{failed} of {} checks outside 3 standard errors",
        summary.checks.len()
    );
    if let Some(w) = summary.worst() {
        println!("largest |z|: {w}");
    }
}
