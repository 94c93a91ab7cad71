//! g2(0) of the heralded output against heralding load, for CW and pulsed
//! pumping, with a lossy heralding curve alongside.
//!
//! cargo run --example g2_curves

use hsps::stats::{g2_curves, CurveValue};

fn cell(v: CurveValue) -> String {
    match v {
        CurveValue::Value(x) => format!("{x:.5}"),
        CurveValue::Undefined => "undefined".into(),
        CurveValue::Diverged => "diverged".into(),
    }
}

fn main() {
    let gate_period = 10e-9;
    let rates: Vec<f64> = [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 0.95, 1.0]
        .iter()
        .map(|b0| b0 / gate_period)
        .collect();
    let points = g2_curves(gate_period, &rates, Some(0.48)).expect("curves");
    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>12}",
        "b0", "cw", "random", "pulsed", "p_cor=0.48"
    );
    for p in points {
        println!(
            "{:>5} {:>10} {:>10} {:>10} {:>12}",
            p.b0,
            cell(p.g2_cw),
            cell(p.g2_random),
            cell(p.g2_pulsed),
            cell(p.g2_model.expect("model requested"))
        );
    }
}
