//! Pulsed against CW pumping at equal heralding load: closed forms and
//! Monte Carlo.
//!
//! cargo run --release --example pulsed_vs_cw

use hsps::cli::curve_sample;
use hsps::stats::g2_curves;

fn main() {
    let gate_period = 10e-9;
    let b0s = [0.01, 0.05, 0.1, 0.2, 0.3];
    let rates: Vec<f64> = b0s.iter().map(|b0| b0 / gate_period).collect();
    let curves = g2_curves(gate_period, &rates, None).expect("curves");
    println!(
        "{:>5} {:>9} {:>9} {:>16} {:>16}",
        "b0", "cw", "pulsed", "cw mc", "pulsed mc"
    );
    for (i, p) in curves.iter().enumerate() {
        let mc = curve_sample(p.b0, gate_period, 100_000, 1 + i as u64).expect("simulation");
        let show = |e: Option<hsps::sim::Estimate>| {
            e.map_or("-".to_string(), |e| {
                format!("{:.4}+-{:.4}", e.value, e.std_error)
            })
        };
        println!(
            "{:>5} {:>9.4} {:>9.4} {:>16} {:>16}",
            p.b0,
            p.g2_cw.value().unwrap_or(f64::NAN),
            p.g2_pulsed.value().unwrap_or(f64::NAN),
            show(mc.g2_cw),
            show(mc.g2_pulsed)
        );
    }
}
