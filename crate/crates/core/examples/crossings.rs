//! Heralding load at which CW-pumped g2(0) reaches 1, for several heralding
//! probabilities.
//!
//! cargo run --example crossings

use hsps::stats::{find_poisson_crossing, StatsError};

fn main() {
    for p_cor in [1.0, 0.75, 0.5, 0.25, 0.1, 1e-3, 1e-12] {
        match find_poisson_crossing(p_cor) {
            Ok(b0) => println!("p_cor = {p_cor:<6}  b0 = {b0:.4}"),
            Err(StatsError::NoCrossing { .. }) => println!("p_cor = {p_cor:<6}  no crossing"),
            Err(e) => panic!("{e}"),
        }
    }
}
