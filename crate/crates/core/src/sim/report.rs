//! Empirical statistics of gate records.

use super::engine::{GateRecord, SimRun};
use super::{Result, SimError};

/// A value with its one-sigma standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `(value - expected) / std_error`; zero when both sides agree exactly.
    pub fn z_score(&self, expected: f64) -> f64 {
        z_score(self.value, expected, self.std_error)
    }
}

pub fn z_score(value: f64, expected: f64, std_error: f64) -> f64 {
    let diff = value - expected;
    if diff == 0.0 {
        0.0
    } else {
        diff / std_error
    }
}

/// Binomial error of a fraction `k / n`.
pub fn binomial(k: u64, n: u64) -> Estimate {
    let p = k as f64 / n as f64;
    Estimate {
        value: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
    }
}

/// Standard error of `2 f2 / f1^2` for multinomial fractions `f1 >= f2`
/// over `n` gates, by the delta method.
pub fn g2_std_error(f1: f64, f2: f64, n: f64) -> f64 {
    if f1 <= 0.0 {
        return f64::NAN;
    }
    // gradient of g = 2 f2 / f1^2
    let d1 = -4.0 * f2 / (f1 * f1 * f1);
    let d2 = 2.0 / (f1 * f1);
    // f2 counts are a subset of f1 counts
    let var1 = f1 * (1.0 - f1);
    let var2 = f2 * (1.0 - f2);
    let cov = f2 * (1.0 - f1);
    ((d1 * d1 * var1 + d2 * d2 * var2 + 2.0 * d1 * d2 * cov) / n).sqrt()
}

/// Photon-number statistics of a set of gates.
#[derive(Debug, Clone, PartialEq)]
pub struct GateStatistics {
    pub gates: u64,
    /// `histogram[n]` gates held exactly `n` photons.
    pub histogram: Vec<u64>,
    pub at_least_one: Estimate,
    pub at_least_two: Estimate,
    /// `2 P(m>=2) / P(m>=1)^2`; `None` when no gate held a photon.
    pub g2_zero: Option<Estimate>,
    pub mean: Estimate,
    /// `1 + (var - mean) / mean^2` from the sample moments.
    pub g2_moments: Option<f64>,
    pub twin_fraction: Estimate,
    pub click_fraction: Estimate,
}

impl GateStatistics {
    pub fn probability(&self, n: usize) -> Estimate {
        binomial(self.histogram.get(n).copied().unwrap_or(0), self.gates)
    }
}

pub fn estimate_statistics(records: &[GateRecord]) -> Result<GateStatistics> {
    if records.is_empty() {
        return Err(SimError::EmptyReport);
    }
    let n = records.len() as u64;
    let mut histogram: Vec<u64> = Vec::new();
    let mut twins = 0u64;
    let mut clicks = 0u64;
    for r in records {
        let k = r.photon_count_in_fiber as usize;
        if histogram.len() <= k {
            histogram.resize(k + 1, 0);
        }
        histogram[k] += 1;
        twins += u64::from(r.contains_twin);
        clicks += u64::from(r.click);
    }
    let ge1: u64 = histogram.iter().skip(1).sum();
    let ge2: u64 = histogram.iter().skip(2).sum();
    let nf = n as f64;
    let (mut s1, mut s2) = (0.0, 0.0);
    for (k, &c) in histogram.iter().enumerate() {
        let k = k as f64;
        s1 += k * c as f64;
        s2 += k * k * c as f64;
    }
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    let f1 = ge1 as f64 / nf;
    let f2 = ge2 as f64 / nf;
    let g2_zero = (ge1 > 0).then(|| Estimate {
        value: 2.0 * f2 / (f1 * f1),
        std_error: g2_std_error(f1, f2, nf),
    });
    let g2_moments = (mean > 0.0).then(|| 1.0 + (var - mean) / (mean * mean));
    Ok(GateStatistics {
        gates: n,
        histogram,
        at_least_one: binomial(ge1, n),
        at_least_two: binomial(ge2, n),
        g2_zero,
        mean: Estimate {
            value: mean,
            std_error: (var / nf).sqrt(),
        },
        g2_moments,
        twin_fraction: binomial(twins, n),
        click_fraction: binomial(clicks, n),
    })
}

/// Rates observed in a run, per second of booked time, each with its
/// Poisson error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRates {
    pub pair_rate: Estimate,
    pub signal_fiber_rate: Estimate,
    pub idler_fiber_rate: Estimate,
    pub correlated_rate: Estimate,
    /// Signal detector clicks (`r_s` or `r_p`).
    pub signal_click_rate: Estimate,
    /// Gates per second; the heralding rate `R0` for heralded gating.
    pub gate_rate: Estimate,
    /// Idler clicks per second (`r_c` heralded, `r_i` random).
    pub click_rate: Estimate,
}

fn poisson_rate(count: u64, duration: f64) -> Estimate {
    Estimate {
        value: count as f64 / duration,
        std_error: (count as f64).sqrt() / duration,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub duration: f64,
    pub rates: EmpiricalRates,
    /// `None` when the run produced no gates.
    pub statistics: Option<GateStatistics>,
}

impl SimReport {
    pub fn from_run(run: &SimRun) -> Self {
        let t = run.duration;
        let c = &run.tally;
        SimReport {
            duration: t,
            rates: EmpiricalRates {
                pair_rate: poisson_rate(c.pairs, t),
                signal_fiber_rate: poisson_rate(c.signal_photons, t),
                idler_fiber_rate: poisson_rate(c.idler_photons, t),
                correlated_rate: poisson_rate(c.coincident_pairs, t),
                signal_click_rate: poisson_rate(c.signal_clicks, t),
                gate_rate: poisson_rate(c.gates, t),
                click_rate: poisson_rate(c.gate_clicks, t),
            },
            statistics: estimate_statistics(&run.records).ok(),
        }
    }
}
