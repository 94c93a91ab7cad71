//! Heralded idler click rate as the gate is swept across the twin photon,
//! with and without a finite gate rise time.
//!
//! cargo run --release --example delay_scan

use hsps::sim::{delay_scan, SimConfig};

fn main() {
    let sharp = SimConfig {
        duration: 0.2,
        ..SimConfig::reference()
    };
    let mut soft = sharp;
    soft.idler.rise_time = 2e-9;
    let delays: Vec<f64> = (80..=120).step_by(2).map(|ns| ns as f64 * 1e-9).collect();
    let a = delay_scan(&sharp, &delays).expect("scan");
    let b = delay_scan(&soft, &delays).expect("scan");
    println!(
        "{:>8} {:>12} {:>12}",
        "delay/ns", "sharp /s", "2 ns rise /s"
    );
    for (x, y) in a.iter().zip(&b) {
        println!(
            "{:>8.0} {:>12.0} {:>12.0}",
            x.gate_delay * 1e9,
            x.click_rate.value,
            y.click_rate.value
        );
    }
}
