//! Inversion of detector-level count rates into photon rates inside the
//! fibers, coupling efficiencies and source-quality figures.
//!
//! All rates are in counts (or photons) per second, all times in seconds.

mod characterize;

pub use characterize::{
    characterize, characterize_with, CharacterizationReport, CharacterizeError,
    CharacterizeOptions, Figures, RegimeWarning, Stage,
};

use std::fmt;

use thiserror::Error;

use crate::roots::{self, Tolerance};
use crate::stats::{self, GatedStatisticsInput};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("{name} = {value} is outside its domain ({expected})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("detector saturated: rate {rate} s^-1 with dead time {dead_time} s gives rate*dead_time >= 1")]
    Saturated { rate: f64, dead_time: f64 },
    #[error("{quantity}: corrected count rate is below the dark floor (numerator {numerator})")]
    BelowDarkFloor {
        quantity: &'static str,
        numerator: f64,
    },
    #[error("gating saturated: click rate {click_rate} s^-1 >= gate rate {gate_rate} s^-1")]
    SaturatedGating { click_rate: f64, gate_rate: f64 },
    #[error("randomly gated click rate {r_i} s^-1 is below the idler dark rate {r_i_dark} s^-1")]
    NegativeRate { r_i: f64, r_i_dark: f64 },
    #[error("inconsistent measurements: {0}")]
    InconsistentMeasurements(String),
    #[error("inconsistent coupling ({violation}): {set}")]
    InconsistentCoupling { set: CouplingSet, violation: String },
    #[error("coupling efficiencies need strictly positive rates (R_p={pair_rate}, R_s={signal_rate}, R_i={idler_rate}, R_c={correlated_rate})")]
    NonPositiveRates {
        pair_rate: f64,
        signal_rate: f64,
        idler_rate: f64,
        correlated_rate: f64,
    },
    #[error(transparent)]
    Statistics(#[from] stats::StatsError),
}

pub type Result<T> = std::result::Result<T, InferenceError>;

fn param(name: &'static str, value: f64, expected: &'static str) -> InferenceError {
    InferenceError::InvalidParameter {
        name,
        value,
        expected,
    }
}

/// Raw detector-level rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredRates {
    /// Signal detections through a multimode fiber.
    pub r_p: f64,
    /// Signal detections through the single-mode fiber.
    pub r_s: f64,
    /// Gate rate delivered by the delay generator (`R0`).
    pub heralding_rate: f64,
    /// Idler clicks in heralded gates.
    pub r_c: f64,
    /// Idler clicks with the gate driven at random at `heralding_rate`.
    pub r_i: f64,
    /// Signal detector dark rate.
    pub r_s_dark: f64,
    /// Idler dark clicks per second when gated at `heralding_rate`, i.e.
    /// `r_i_dark / heralding_rate` is the dark-click probability per gate.
    pub r_i_dark: f64,
}

impl MeasuredRates {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r_p", self.r_p),
            ("r_s", self.r_s),
            ("heralding_rate", self.heralding_rate),
            ("r_c", self.r_c),
            ("r_i", self.r_i),
            ("r_s_dark", self.r_s_dark),
            ("r_i_dark", self.r_i_dark),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value >= 0.0) {
                return Err(InferenceError::InvalidMeasurement(format!(
                    "{name} = {value} must be finite and >= 0"
                )));
            }
        }
        let r0 = self.heralding_rate;
        if r0 <= 0.0 {
            return Err(InferenceError::InvalidMeasurement(
                "heralding_rate must be > 0".into(),
            ));
        }
        let ordered = [
            ("r_c", self.r_c, "heralding_rate", r0),
            ("r_i", self.r_i, "heralding_rate", r0),
            ("heralding_rate", r0, "r_s", self.r_s),
        ];
        for (a, va, b, vb) in ordered {
            if va > vb {
                return Err(InferenceError::InvalidMeasurement(format!(
                    "{a} = {va} exceeds {b} = {vb}"
                )));
            }
        }
        for (name, value) in [("r_i", self.r_i), ("r_i_dark", self.r_i_dark)] {
            if value >= r0 {
                return Err(InferenceError::InvalidMeasurement(format!(
                    "{name} / heralding_rate = {} must be < 1",
                    value / r0
                )));
            }
        }
        Ok(())
    }

    /// Gated click rates with the idler hold-off losses undone.
    ///
    /// After a click the idler detector ignores every gate for `holdoff`
    /// seconds. With gates arriving at `heralding_rate` that blocks on
    /// average `heralding_rate * holdoff` gates per click, so the click
    /// probability per gate is `r / (R0 - r * R0 * holdoff)`. The returned
    /// rates are that probability times `R0`. Identity when `holdoff = 0`.
    pub fn holdoff_corrected(&self, params: &SystemParams) -> Result<MeasuredRates> {
        let h = params.holdoff_idler;
        if h == 0.0 {
            return Ok(*self);
        }
        let correct = |rate: f64| -> Result<f64> {
            let blocked = rate * h;
            if blocked >= 1.0 {
                return Err(InferenceError::Saturated { rate, dead_time: h });
            }
            Ok(rate / (1.0 - blocked))
        };
        Ok(MeasuredRates {
            r_c: correct(self.r_c)?,
            r_i: correct(self.r_i)?,
            r_i_dark: correct(self.r_i_dark)?,
            ..*self
        })
    }
}

/// Setup parameters measured independently of the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub eta_s: f64,
    pub eta_i: f64,
    pub delta_s: f64,
    pub delta_i: f64,
    /// Signal/idler filter bandwidth matching factor.
    pub zeta: f64,
    pub gate_period: f64,
    pub dead_time_signal: f64,
    pub dead_time_generator: f64,
    pub holdoff_idler: f64,
    /// Only used to flag the Poisson-statistics regime.
    pub coherence_time: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let probabilities = [
            ("eta_s", self.eta_s),
            ("eta_i", self.eta_i),
            ("delta_s", self.delta_s),
            ("delta_i", self.delta_i),
            ("zeta", self.zeta),
        ];
        for (name, v) in probabilities {
            if !(v > 0.0 && v <= 1.0) {
                return Err(param(name, v, "0 < value <= 1"));
            }
        }
        if !(self.gate_period > 0.0 && self.gate_period.is_finite()) {
            return Err(param("gate_period", self.gate_period, "> 0"));
        }
        let times = [
            ("dead_time_signal", self.dead_time_signal),
            ("dead_time_generator", self.dead_time_generator),
            ("holdoff_idler", self.holdoff_idler),
            ("coherence_time", self.coherence_time),
        ];
        for (name, v) in times {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(param(name, v, "finite and >= 0"));
            }
        }
        Ok(())
    }

    /// True when the gate is long enough for Poisson statistics inside it.
    pub fn poisson_regime(&self) -> bool {
        self.coherence_time <= self.gate_period / 10.0
    }
}

/// Photon rates recovered from the measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    /// Generated pairs within the filter bandwidth (`R_p`).
    pub pair_rate: f64,
    /// Signal photons in the single-mode fiber (`R_s`).
    pub signal_fiber_rate: f64,
    /// Idler photons in the single-mode fiber (`R_i`).
    pub idler_fiber_rate: f64,
    /// Pairs with both photons in their fibers (`R_c`).
    pub correlated_rate: f64,
    /// Mean accidental photons per gate (`b`).
    pub accidental_mean: f64,
}

impl DerivedRates {
    /// Probability the twin is in a heralded gate, `R_c / R_s`.
    pub fn p_cor(&self) -> f64 {
        if self.correlated_rate == 0.0 {
            0.0
        } else {
            self.correlated_rate / self.signal_fiber_rate
        }
    }
}

/// Coupling efficiencies and conditional coincidences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSet {
    pub gamma_s: f64,
    pub gamma_i: f64,
    pub gamma_c: f64,
    pub mu_i_given_s: f64,
    pub mu_s_given_i: f64,
}

impl fmt::Display for CouplingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gamma_s={:.6}, gamma_i={:.6}, gamma_c={:.6}, mu_i|s={:.6}, mu_s|i={:.6}",
            self.gamma_s, self.gamma_i, self.gamma_c, self.mu_i_given_s, self.mu_s_given_i
        )
    }
}

impl CouplingSet {
    /// Checks the set-containment constraints. `slack` absorbs rounding.
    pub fn check(&self, slack: f64) -> Result<()> {
        let violation = if self.gamma_c > self.gamma_s.min(self.gamma_i) + slack {
            Some("gamma_c exceeds min(gamma_s, gamma_i)")
        } else if self.gamma_s + self.gamma_i - self.gamma_c > 1.0 + slack {
            Some("gamma_s + gamma_i - gamma_c exceeds 1")
        } else if [
            self.gamma_s,
            self.gamma_i,
            self.gamma_c,
            self.mu_i_given_s,
            self.mu_s_given_i,
        ]
        .iter()
        .any(|v| !(*v >= 0.0 && *v <= 1.0 + slack))
        {
            Some("a coupling value lies outside [0, 1]")
        } else {
            None
        };
        match violation {
            Some(v) => Err(InferenceError::InconsistentCoupling {
                set: *self,
                violation: v.to_string(),
            }),
            None => Ok(()),
        }
    }
}

/// Non-paralyzable dead-time correction `1 / (1 - rate * dead_time)`.
pub fn dead_time_correction(rate: f64, dead_time: f64) -> Result<f64> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(param("rate", rate, "finite and >= 0"));
    }
    if !(dead_time >= 0.0 && dead_time.is_finite()) {
        return Err(param("dead_time", dead_time, "finite and >= 0"));
    }
    let load = rate * dead_time;
    if load >= 1.0 {
        return Err(InferenceError::Saturated { rate, dead_time });
    }
    Ok(1.0 / (1.0 - load))
}

fn above_dark_floor(quantity: &'static str, numerator: f64) -> Result<f64> {
    if numerator < 0.0 {
        Err(InferenceError::BelowDarkFloor {
            quantity,
            numerator,
        })
    } else {
        Ok(numerator)
    }
}

/// `R_p = (r_p * alpha - r_s_dark) / (eta_s * zeta * delta_s)`.
pub fn infer_pair_rate(m: &MeasuredRates, p: &SystemParams) -> Result<f64> {
    let alpha = dead_time_correction(m.r_p, p.dead_time_signal)?;
    let numerator = above_dark_floor("pair rate", m.r_p * alpha - m.r_s_dark)?;
    Ok(numerator / (p.eta_s * p.zeta * p.delta_s))
}

/// `R_s = (r_s * alpha - r_s_dark) / eta_s`.
pub fn infer_signal_fiber_rate(m: &MeasuredRates, p: &SystemParams) -> Result<f64> {
    let alpha = dead_time_correction(m.r_s, p.dead_time_signal)?;
    let numerator = above_dark_floor("signal fiber rate", m.r_s * alpha - m.r_s_dark)?;
    Ok(numerator / p.eta_s)
}

/// Idler rate in the fiber from the randomly gated click rate, assuming
/// Poisson photon statistics inside the gate:
/// `R_i = ln((1 - r_i_dark/R0) / (1 - r_i/R0)) / (eta_i * gate_period)`.
pub fn infer_idler_fiber_rate(m: &MeasuredRates, p: &SystemParams) -> Result<f64> {
    let m = m.holdoff_corrected(p)?;
    let r0 = m.heralding_rate;
    if m.r_i >= r0 {
        return Err(InferenceError::SaturatedGating {
            click_rate: m.r_i,
            gate_rate: r0,
        });
    }
    if m.r_i < m.r_i_dark {
        return Err(InferenceError::NegativeRate {
            r_i: m.r_i,
            r_i_dark: m.r_i_dark,
        });
    }
    if m.r_i == m.r_i_dark {
        return Ok(0.0);
    }
    // ln(1 - x) via ln_1p keeps precision for click probabilities ~1e-3.
    let log_ratio = (-m.r_i_dark / r0).ln_1p() - (-m.r_i / r0).ln_1p();
    Ok(log_ratio / (p.eta_i * p.gate_period))
}

/// Residual of the implicit heralded-click equation,
/// `1 - (1 - eta_i R_c/R_s)(1 - r_i_dark/R0) exp(-eta_i dt (R_i - R_c R0/R_s)) - r_c/R0`.
fn correlated_residual(m: &MeasuredRates, p: &SystemParams, r_s: f64, r_i: f64, r_c: f64) -> f64 {
    let r0 = m.heralding_rate;
    let q = r_c / r_s;
    let survive = (1.0 - p.eta_i * q)
        * (1.0 - m.r_i_dark / r0)
        * (-p.eta_i * p.gate_period * (r_i - r_c * r0 / r_s)).exp();
    1.0 - survive - m.r_c / r0
}

/// Solves the implicit heralded-click equation for the correlated pair rate
/// `R_c` on `[0, min(R_s, R_i)]` with Brent's method.
///
/// When either fiber rate is zero there is no correlated light and `R_c = 0`.
pub fn solve_correlated_rate(
    m: &MeasuredRates,
    p: &SystemParams,
    signal_fiber_rate: f64,
    idler_fiber_rate: f64,
) -> Result<f64> {
    let m = m.holdoff_corrected(p)?;
    if !(signal_fiber_rate >= 0.0 && idler_fiber_rate >= 0.0) {
        return Err(InferenceError::InconsistentMeasurements(format!(
            "negative fiber rates (R_s={signal_fiber_rate}, R_i={idler_fiber_rate})"
        )));
    }
    let upper = signal_fiber_rate.min(idler_fiber_rate);
    if upper == 0.0 {
        return Ok(0.0);
    }
    let f = |r_c: f64| correlated_residual(&m, p, signal_fiber_rate, idler_fiber_rate, r_c);
    let tol = Tolerance {
        x_abs: 0.0,
        x_rel: 1e-14,
        f_abs: 0.0,
        max_iterations: 200,
    };
    roots::brent(f, 0.0, upper, tol).map_err(|e| match e {
        roots::RootError::NotBracketed { f_lo, f_hi, .. } => {
            InferenceError::InconsistentMeasurements(format!(
                "heralded click rate r_c = {} s^-1 is not reachable for R_c in [0, {upper}] \
                 (residual {f_lo:.3e} .. {f_hi:.3e})",
                m.r_c
            ))
        }
        other => InferenceError::InconsistentMeasurements(other.to_string()),
    })
}

/// Relative residual of the implicit equation at `r_c`, normalized by `r_c/R0`.
pub fn correlated_rate_residual(
    m: &MeasuredRates,
    p: &SystemParams,
    signal_fiber_rate: f64,
    idler_fiber_rate: f64,
    correlated_rate: f64,
) -> Result<f64> {
    let m = m.holdoff_corrected(p)?;
    let raw = correlated_residual(&m, p, signal_fiber_rate, idler_fiber_rate, correlated_rate);
    let scale = (m.r_c / m.heralding_rate).max(f64::MIN_POSITIVE);
    Ok(raw / scale)
}

/// `b = gate_period * (R_i - R_c * R0 / R_s)`.
pub fn accidental_mean(
    m: &MeasuredRates,
    p: &SystemParams,
    signal_fiber_rate: f64,
    idler_fiber_rate: f64,
    correlated_rate: f64,
) -> f64 {
    let twins = if correlated_rate == 0.0 {
        0.0
    } else {
        correlated_rate * m.heralding_rate / signal_fiber_rate
    };
    p.gate_period * (idler_fiber_rate - twins)
}

/// Runs the four rate inversions in dependency order.
pub fn derive_rates(m: &MeasuredRates, p: &SystemParams) -> Result<DerivedRates> {
    let pair_rate = infer_pair_rate(m, p)?;
    let signal = infer_signal_fiber_rate(m, p)?;
    let idler = infer_idler_fiber_rate(m, p)?;
    let correlated = solve_correlated_rate(m, p, signal, idler)?;
    Ok(DerivedRates {
        pair_rate,
        signal_fiber_rate: signal,
        idler_fiber_rate: idler,
        correlated_rate: correlated,
        accidental_mean: accidental_mean(m, p, signal, idler, correlated),
    })
}

/// Single and pair coupling efficiencies plus conditional coincidences.
///
/// Violations of the containment constraints are returned as errors
/// carrying every value; nothing is clamped.
pub fn coupling_efficiencies(d: &DerivedRates, p: &SystemParams) -> Result<CouplingSet> {
    let rates = [
        d.pair_rate,
        d.signal_fiber_rate,
        d.idler_fiber_rate,
        d.correlated_rate,
    ];
    if rates.iter().any(|r| !(*r > 0.0)) {
        return Err(InferenceError::NonPositiveRates {
            pair_rate: d.pair_rate,
            signal_rate: d.signal_fiber_rate,
            idler_rate: d.idler_fiber_rate,
            correlated_rate: d.correlated_rate,
        });
    }
    let set = CouplingSet {
        gamma_s: d.signal_fiber_rate / (p.zeta * p.delta_s * d.pair_rate),
        gamma_i: d.idler_fiber_rate / (p.delta_i * d.pair_rate),
        gamma_c: d.correlated_rate / (p.zeta * p.delta_s * p.delta_i * d.pair_rate),
        mu_i_given_s: d.correlated_rate / d.signal_fiber_rate,
        mu_s_given_i: d.correlated_rate / d.idler_fiber_rate,
    };
    set.check(1e-12)?;
    Ok(set)
}

/// Gate statistics implied by the derived rates: `p_cor = R_c/R_s`, Poisson accidentals of mean `b`.
pub fn gate_statistics(d: &DerivedRates) -> Result<GatedStatisticsInput> {
    Ok(GatedStatisticsInput::poisson(
        d.p_cor(),
        d.accidental_mean.max(0.0),
    )?)
}

/// `P(m>=1) = 1 - (1 - R_c/R_s) e^-b`.
pub fn at_least_one_from_rates(d: &DerivedRates) -> f64 {
    1.0 - (1.0 - d.p_cor()) * (-d.accidental_mean).exp()
}

/// `P(m>=2) = 1 - [1 + (1 - R_c/R_s) b] e^-b`.
pub fn at_least_two_from_rates(d: &DerivedRates) -> f64 {
    let b = d.accidental_mean;
    1.0 - (1.0 + (1.0 - d.p_cor()) * b) * (-b).exp()
}

/// `g2(0)` written directly in terms of the photon rates.
pub fn g2_zero_from_rates(d: &DerivedRates) -> Result<f64> {
    if !(d.signal_fiber_rate > 0.0) {
        return Err(InferenceError::NonPositiveRates {
            pair_rate: d.pair_rate,
            signal_rate: d.signal_fiber_rate,
            idler_rate: d.idler_fiber_rate,
            correlated_rate: d.correlated_rate,
        });
    }
    let one = at_least_one_from_rates(d);
    if !(one > 0.0) {
        return Err(stats::StatsError::UndefinedStatistic.into());
    }
    Ok(2.0 * at_least_two_from_rates(d) / (one * one))
}

/// Small-`b` approximation `2 b R_s / R_c`.
pub fn g2_zero_small_b(d: &DerivedRates) -> Result<f64> {
    if !(d.correlated_rate > 0.0) {
        return Err(stats::StatsError::UndefinedStatistic.into());
    }
    Ok(2.0 * d.accidental_mean * d.signal_fiber_rate / d.correlated_rate)
}

/// Approximation `2 dt (gamma_s gamma_i / gamma_c * R_p - R0)` in terms of the
/// coupling efficiencies. Not an identity: it is the small-`b` form above
/// rewritten.
pub fn g2_zero_from_couplings(
    c: &CouplingSet,
    pair_rate: f64,
    heralding_rate: f64,
    p: &SystemParams,
) -> Result<f64> {
    if !(c.gamma_c > 0.0) {
        return Err(param("gamma_c", c.gamma_c, "> 0"));
    }
    Ok(2.0 * p.gate_period * (c.gamma_s * c.gamma_i / c.gamma_c * pair_rate - heralding_rate))
}

/// Probability that a herald is accompanied by exactly one photon:
/// `((1 - R_c/R_s) b + R_c/R_s) e^-b`.
pub fn mu_her(d: &DerivedRates) -> f64 {
    let q = d.p_cor();
    let b = d.accidental_mean;
    ((1.0 - q) * b + q) * (-b).exp()
}
