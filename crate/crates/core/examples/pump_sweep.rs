//! Scales the pump of the reference setup and compares the simulated
//! g2(0) with the closed form for each power.
//!
//! cargo run --release --example pump_sweep

use hsps::sim::{sweep_pump_power, SimConfig};
use hsps::stats::g2_zero;

fn main() {
    let config = SimConfig {
        duration: 0.5,
        ..SimConfig::reference()
    };
    let scales = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let points = sweep_pump_power(&config, &scales).expect("sweep");
    println!(
        "{:>6} {:>10} {:>8} {:>10} {:>9} {:>9}",
        "scale", "R0 /s", "b0", "g2 mc", "+-", "model"
    );
    for p in points {
        let scaled = SimConfig {
            pump: config.pump.scaled(p.scale),
            ..config
        };
        let model = g2_zero(&scaled.expected_gate_statistics().expect("model")).expect("g2");
        let g2 = p.g2_zero.expect("photons in gates");
        println!(
            "{:>6} {:>10.0} {:>8.5} {:>10.5} {:>9.5} {:>9.5}",
            p.scale, p.heralding_rate.value, p.b0, g2.value, g2.std_error, model
        );
    }
}
