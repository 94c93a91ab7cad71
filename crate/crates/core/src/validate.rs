//! Monte Carlo against closed forms, and simulated measurements against
//! the inversion, reported as z-scores.

use std::fmt;

use rayon::prelude::*;

use crate::inference::{characterize_with, CharacterizeError, CharacterizeOptions};
use crate::sim::report::g2_std_error;
use crate::sim::{self, Coupling, GatingMode, PumpMode, SimConfig, SimError};
use crate::stats::{
    exact_count_probability, g2_zero, heralded_tail, GatedStatisticsInput, StatsError,
};

pub const Z_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub std_error: f64,
}

impl Check {
    pub fn z(&self) -> f64 {
        sim::report::z_score(self.value, self.expected, self.std_error)
    }

    pub fn passed(&self) -> bool {
        self.z().abs() < Z_LIMIT
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<40} {:>14.6e} {:>14.6e} {:>11.3e} z={:>6.2} {}",
            self.name,
            self.value,
            self.expected,
            self.std_error,
            self.z(),
            if self.passed() { "ok" } else { "FAIL" }
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ValidateError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Characterize(#[from] CharacterizeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePoint {
    pub p_cor: f64,
    pub b: f64,
}

/// Twelve points: `p_cor` in {0, 0.5, 1} times `b` in {0.005, 0.1, 0.7, 3}.
pub fn oracle_matrix() -> Vec<OraclePoint> {
    let mut out = Vec::new();
    for &p_cor in &[0.0, 0.5, 1.0] {
        for &b in &[0.005, 0.1, 0.7, 3.0] {
            out.push(OraclePoint { p_cor, b });
        }
    }
    out
}

const ORACLE_GATE: f64 = 10e-9;

/// Lossless configuration realizing `point` with at least `min_gates`
/// gates on average (2 % margin).
///
/// `p_cor = 0` uses Poisson gating at `b0 = 0.2` with no signal coupling;
/// otherwise heralded gating with `gamma_i = 0.5`, load
/// `b0 = min(0.5, b/2)` and `gamma_c = p_cor * gamma_s`.
pub fn oracle_config(point: OraclePoint, min_gates: u64, seed: u64) -> SimConfig {
    let gamma_i = 0.5;
    let pair_rate = point.b / (gamma_i * ORACLE_GATE);
    let base = SimConfig::ideal(pair_rate, ORACLE_GATE);
    let gates = 1.02 * min_gates as f64;
    if point.p_cor == 0.0 {
        let rate = 0.2 / ORACLE_GATE;
        SimConfig {
            coupling: Coupling {
                gamma_s: 0.0,
                gamma_i,
                gamma_c: 0.0,
            },
            gating: GatingMode::Random { rate },
            duration: gates / rate,
            seed,
            ..base
        }
    } else {
        let b0 = (point.b / 2.0).min(0.5);
        let gamma_s = gamma_i * b0 / point.b;
        let heralds = gamma_s * pair_rate;
        SimConfig {
            coupling: Coupling {
                gamma_s,
                gamma_i,
                gamma_c: point.p_cor * gamma_s,
            },
            pump: PumpMode::Cw { pair_rate },
            duration: gates / heralds,
            seed,
            ..base
        }
    }
}

fn label(point: OraclePoint, what: &str) -> String {
    format!("p_cor={} b={} {what}", point.p_cor, point.b)
}

/// Simulates one matrix point and compares P(0..3) and g2 with the closed
/// forms. Standard errors come from the expected probabilities.
pub fn check_oracle_point(
    point: OraclePoint,
    min_gates: u64,
    seed: u64,
) -> Result<(u64, Vec<Check>), ValidateError> {
    let config = oracle_config(point, min_gates, seed);
    let input = GatedStatisticsInput::poisson(point.p_cor, point.b)?;
    let report = sim::simulate(&config)?;
    let stats = report.statistics.ok_or(SimError::EmptyReport)?;
    let n = stats.gates as f64;
    let mut checks = Vec::new();
    for k in 0..4u32 {
        let want = exact_count_probability(&input, k);
        checks.push(Check {
            name: label(point, &format!("P({k})")),
            value: stats.probability(k as usize).value,
            expected: want,
            std_error: (want * (1.0 - want) / n).sqrt(),
        });
    }
    let (f1, f2) = (heralded_tail(&input, 1), heralded_tail(&input, 2));
    checks.push(Check {
        name: label(point, "g2(0)"),
        value: stats.g2_zero.map_or(f64::NAN, |g| g.value),
        expected: g2_zero(&input)?,
        std_error: g2_std_error(f1, f2, n),
    });
    Ok((stats.gates, checks))
}

/// Simulates the measurement campaign for `config` and checks that the
/// inversion recovers the configured rates and couplings.
pub fn check_round_trip(config: &SimConfig) -> Result<Vec<Check>, ValidateError> {
    let sim = sim::simulate_measurements(config)?;
    let options = CharacterizeOptions {
        integration_time: sim.integration_time,
    };
    let report = characterize_with(&sim.measured, &sim.params, &options)?;
    let (f, u) = (report.figures, report.uncertainties);
    let c = config.coupling;
    let rows = [
        (
            "R_p",
            f.pair_rate,
            config.pump.mean_pair_rate(),
            u.pair_rate,
        ),
        (
            "R_s",
            f.signal_fiber_rate,
            config.signal_fiber_rate(),
            u.signal_fiber_rate,
        ),
        (
            "R_i",
            f.idler_fiber_rate,
            config.idler_fiber_rate(),
            u.idler_fiber_rate,
        ),
        (
            "R_c",
            f.correlated_rate,
            config.correlated_rate(),
            u.correlated_rate,
        ),
        ("gamma_s", f.gamma_s, c.gamma_s, u.gamma_s),
        ("gamma_i", f.gamma_i, c.gamma_i, u.gamma_i),
        ("gamma_c", f.gamma_c, c.gamma_c, u.gamma_c),
    ];
    Ok(rows
        .into_iter()
        .map(|(name, value, expected, std_error)| Check {
            name: format!("round trip {name}"),
            value,
            expected,
            std_error,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationSummary {
    pub checks: Vec<Check>,
    /// Smallest number of gates over the matrix points.
    pub min_gates_seen: u64,
}

impl ValidationSummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn worst(&self) -> Option<&Check> {
        self.checks
            .iter()
            .max_by(|a, b| a.z().abs().total_cmp(&b.z().abs()))
    }
}

/// The full matrix plus a round trip on `round_trip` (if given).
pub fn validate(
    min_gates: u64,
    seed: u64,
    round_trip: Option<&SimConfig>,
) -> Result<ValidationSummary, ValidateError> {
    let points = oracle_matrix();
    let results = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| check_oracle_point(*p, min_gates, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut summary = ValidationSummary {
        min_gates_seen: results.iter().map(|r| r.0).min().unwrap_or(0),
        ..Default::default()
    };
    for (_, checks) in results {
        summary.checks.extend(checks);
    }
    if let Some(config) = round_trip {
        summary.checks.extend(check_round_trip(config)?);
    }
    Ok(summary)
}
