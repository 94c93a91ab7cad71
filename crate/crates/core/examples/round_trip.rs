//! Simulate the four measurement passes for the reference setup, invert
//! them, and compare with the rates the simulator was configured with.
//!
//! cargo run --release --example round_trip -- [seconds]

use hsps::inference::{characterize_with, CharacterizeOptions};
use hsps::sim::{simulate_measurements, SimConfig};

fn main() {
    let seconds: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("duration in seconds"))
        .unwrap_or(10.0);
    let config = SimConfig {
        duration: seconds,
        ..SimConfig::reference()
    };
    let sim = simulate_measurements(&config).expect("simulation");
    let m = sim.measured;
    println!("simulated counting over {seconds} s per pass");
    println!(
        "  r_p={:.0} r_s={:.0} R0={:.0} r_c={:.1} r_i={:.2} r_s_dark={:.2} r_i_dark={:.2}",
        m.r_p, m.r_s, m.heralding_rate, m.r_c, m.r_i, m.r_s_dark, m.r_i_dark
    );

    let options = CharacterizeOptions {
        integration_time: sim.integration_time,
    };
    let report = characterize_with(&m, &sim.params, &options).expect("characterization");
    let f = report.figures;
    let u = report.uncertainties;
    let rows = [
        (
            "R_p",
            config.pump.mean_pair_rate(),
            f.pair_rate,
            u.pair_rate,
        ),
        (
            "R_s",
            config.signal_fiber_rate(),
            f.signal_fiber_rate,
            u.signal_fiber_rate,
        ),
        (
            "R_i",
            config.idler_fiber_rate(),
            f.idler_fiber_rate,
            u.idler_fiber_rate,
        ),
        (
            "R_c",
            config.correlated_rate(),
            f.correlated_rate,
            u.correlated_rate,
        ),
        ("gamma_s", config.coupling.gamma_s, f.gamma_s, u.gamma_s),
        ("gamma_i", config.coupling.gamma_i, f.gamma_i, u.gamma_i),
        ("gamma_c", config.coupling.gamma_c, f.gamma_c, u.gamma_c),
    ];
    println!(
        "{:>8} {:>14} {:>14} {:>12} {:>7}",
        "", "configured", "recovered", "sigma", "z"
    );
    for (name, want, got, sigma) in rows {
        println!(
            "{name:>8} {want:>14.6e} {got:>14.6e} {sigma:>12.3e} {:>7.2}",
            (got - want) / sigma
        );
    }
    if let Some(s) = &sim.heralded.statistics {
        let g2 = s.g2_zero.expect("gates with photons");
        println!(
            "gate statistics: P(0)={:.4} P(1)={:.4} g2={:.5} +- {:.5} (inverted {:.5})",
            s.probability(0).value,
            s.probability(1).value,
            g2.value,
            g2.std_error,
            report.g2_zero
        );
    }
}
