//! Full pipeline from detector rates to source figures, with counting-error
//! propagation.

use std::fmt;

use thiserror::Error;

use super::{
    accidental_mean, at_least_one_from_rates, at_least_two_from_rates, coupling_efficiencies,
    g2_zero_from_couplings, g2_zero_from_rates, g2_zero_small_b, gate_statistics,
    infer_idler_fiber_rate, infer_pair_rate, infer_signal_fiber_rate, mu_her,
    solve_correlated_rate, CouplingSet, DerivedRates, InferenceError, MeasuredRates, SystemParams,
};
use crate::stats::PhotonNumberDistribution;

/// Pipeline stage an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Input,
    PairRate,
    SignalRate,
    IdlerRate,
    CorrelatedRate,
    Coupling,
    Statistics,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Input => "input validation",
            Stage::PairRate => "pair rate",
            Stage::SignalRate => "signal fiber rate",
            Stage::IdlerRate => "idler fiber rate",
            Stage::CorrelatedRate => "correlated rate",
            Stage::Coupling => "coupling efficiencies",
            Stage::Statistics => "photon statistics",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{stage} stage: {source}")]
pub struct CharacterizeError {
    pub stage: Stage,
    #[source]
    pub source: InferenceError,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, CharacterizeError>;
}

impl<T, E: Into<InferenceError>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, CharacterizeError> {
        self.map_err(|e| CharacterizeError {
            stage,
            source: e.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacterizeOptions {
    /// Time over which each raw rate was counted, for the `sqrt(N)` errors.
    pub integration_time: f64,
}

impl Default for CharacterizeOptions {
    fn default() -> Self {
        Self {
            integration_time: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegimeWarning {
    /// Coherence time not well below the gate; Poisson statistics inside
    /// the gate is questionable.
    CoherenceTime {
        coherence_time: f64,
        gate_period: f64,
    },
    /// The generator dead time plus signal clicks cannot produce the
    /// measured gate rate.
    GateRateAboveGeneratorLimit { heralding_rate: f64, limit: f64 },
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::CoherenceTime {
                coherence_time,
                gate_period,
            } => write!(
                f,
                "coherence time {coherence_time:e} s is not below gate_period/10 ({:e} s); \
                 Poisson statistics inside the gate may not hold",
                gate_period / 10.0
            ),
            RegimeWarning::GateRateAboveGeneratorLimit {
                heralding_rate,
                limit,
            } => write!(
                f,
                "gate rate {heralding_rate:e} s^-1 exceeds what the generator dead time allows \
                 for the measured signal rate ({limit:e} s^-1)"
            ),
        }
    }
}

/// Every scalar the pipeline reports. Used both for the values and for
/// their one-sigma uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Figures {
    pub pair_rate: f64,
    pub signal_fiber_rate: f64,
    pub idler_fiber_rate: f64,
    pub correlated_rate: f64,
    pub accidental_mean: f64,
    pub gamma_s: f64,
    pub gamma_i: f64,
    pub gamma_c: f64,
    pub mu_i_given_s: f64,
    pub mu_s_given_i: f64,
    pub p0: f64,
    pub p1: f64,
    pub p_at_least_one: f64,
    pub p_at_least_two: f64,
    pub g2_zero: f64,
    pub mu_her: f64,
}

impl Figures {
    pub const NAMES: [&'static str; 16] = [
        "R_p",
        "R_s",
        "R_i",
        "R_c",
        "b",
        "gamma_s",
        "gamma_i",
        "gamma_c",
        "mu_i_given_s",
        "mu_s_given_i",
        "P0",
        "P1",
        "P_at_least_1",
        "P_at_least_2",
        "g2_zero",
        "mu_her",
    ];

    pub fn to_array(&self) -> [f64; 16] {
        [
            self.pair_rate,
            self.signal_fiber_rate,
            self.idler_fiber_rate,
            self.correlated_rate,
            self.accidental_mean,
            self.gamma_s,
            self.gamma_i,
            self.gamma_c,
            self.mu_i_given_s,
            self.mu_s_given_i,
            self.p0,
            self.p1,
            self.p_at_least_one,
            self.p_at_least_two,
            self.g2_zero,
            self.mu_her,
        ]
    }

    pub fn from_array(a: [f64; 16]) -> Self {
        Self {
            pair_rate: a[0],
            signal_fiber_rate: a[1],
            idler_fiber_rate: a[2],
            correlated_rate: a[3],
            accidental_mean: a[4],
            gamma_s: a[5],
            gamma_i: a[6],
            gamma_c: a[7],
            mu_i_given_s: a[8],
            mu_s_given_i: a[9],
            p0: a[10],
            p1: a[11],
            p_at_least_one: a[12],
            p_at_least_two: a[13],
            g2_zero: a[14],
            mu_her: a[15],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationReport {
    pub measured: MeasuredRates,
    pub params: SystemParams,
    pub derived: DerivedRates,
    pub coupling: CouplingSet,
    pub distribution: PhotonNumberDistribution,
    pub g2_zero: f64,
    pub g2_small_b: f64,
    pub g2_from_couplings: f64,
    pub mu_her: f64,
    pub figures: Figures,
    /// One-sigma estimates from Poisson counting errors on the seven raw
    /// rates, propagated to first order. Parameters are taken as exact.
    pub uncertainties: Figures,
    pub integration_time: f64,
    pub warnings: Vec<RegimeWarning>,
}

struct Core {
    derived: DerivedRates,
    coupling: CouplingSet,
    distribution: PhotonNumberDistribution,
    g2_zero: f64,
    mu_her: f64,
    figures: Figures,
}

fn run_core(m: &MeasuredRates, p: &SystemParams) -> Result<Core, CharacterizeError> {
    m.validate().at(Stage::Input)?;
    p.validate().at(Stage::Input)?;
    let pair_rate = infer_pair_rate(m, p).at(Stage::PairRate)?;
    let signal = infer_signal_fiber_rate(m, p).at(Stage::SignalRate)?;
    let idler = infer_idler_fiber_rate(m, p).at(Stage::IdlerRate)?;
    let correlated = solve_correlated_rate(m, p, signal, idler).at(Stage::CorrelatedRate)?;
    let derived = DerivedRates {
        pair_rate,
        signal_fiber_rate: signal,
        idler_fiber_rate: idler,
        correlated_rate: correlated,
        accidental_mean: accidental_mean(m, p, signal, idler, correlated),
    };
    let coupling = coupling_efficiencies(&derived, p).at(Stage::Coupling)?;
    if derived.accidental_mean < 0.0 {
        return Err(InferenceError::InconsistentMeasurements(format!(
            "accidental mean b = {} is negative",
            derived.accidental_mean
        )))
        .at(Stage::Statistics);
    }
    let input = gate_statistics(&derived).at(Stage::Statistics)?;
    let distribution = PhotonNumberDistribution::from_input(&input);
    let g2_zero = g2_zero_from_rates(&derived).at(Stage::Statistics)?;
    let mu_her = mu_her(&derived);
    let figures = Figures {
        pair_rate,
        signal_fiber_rate: signal,
        idler_fiber_rate: idler,
        correlated_rate: correlated,
        accidental_mean: derived.accidental_mean,
        gamma_s: coupling.gamma_s,
        gamma_i: coupling.gamma_i,
        gamma_c: coupling.gamma_c,
        mu_i_given_s: coupling.mu_i_given_s,
        mu_s_given_i: coupling.mu_s_given_i,
        p0: distribution.probability(0),
        p1: distribution.probability(1),
        p_at_least_one: at_least_one_from_rates(&derived),
        p_at_least_two: at_least_two_from_rates(&derived),
        g2_zero,
        mu_her,
    };
    Ok(Core {
        derived,
        coupling,
        distribution,
        g2_zero,
        mu_her,
        figures,
    })
}

fn figures_at(m: &MeasuredRates, p: &SystemParams) -> Option<[f64; 16]> {
    run_core(m, p).ok().map(|c| c.figures.to_array())
}

fn with_input(m: &MeasuredRates, index: usize, value: f64) -> MeasuredRates {
    let mut out = *m;
    let slot = match index {
        0 => &mut out.r_p,
        1 => &mut out.r_s,
        2 => &mut out.heralding_rate,
        3 => &mut out.r_c,
        4 => &mut out.r_i,
        5 => &mut out.r_s_dark,
        _ => &mut out.r_i_dark,
    };
    *slot = value;
    out
}

fn inputs(m: &MeasuredRates) -> [f64; 7] {
    [
        m.r_p,
        m.r_s,
        m.heralding_rate,
        m.r_c,
        m.r_i,
        m.r_s_dark,
        m.r_i_dark,
    ]
}

/// First-order propagation of `sqrt(N)` counting errors. Each raw rate `r`
/// counted over `T` has `sigma = sqrt(r / T)`; inputs are treated as
/// independent. Derivatives are central differences, one-sided when a
/// step leaves the valid domain, and dropped when both sides do.
fn propagate(
    m: &MeasuredRates,
    p: &SystemParams,
    centre: &[f64; 16],
    integration_time: f64,
) -> Figures {
    let mut variance = [0.0; 16];
    for (k, x) in inputs(m).into_iter().enumerate() {
        let sigma = (x / integration_time).sqrt();
        if sigma == 0.0 {
            continue;
        }
        let h = (1e-3 * sigma).min(0.5 * x).max(f64::MIN_POSITIVE);
        let up = figures_at(&with_input(m, k, x + h), p);
        let down = figures_at(&with_input(m, k, x - h), p);
        let slope = |j: usize| match (&up, &down) {
            (Some(u), Some(d)) => (u[j] - d[j]) / (2.0 * h),
            (Some(u), None) => (u[j] - centre[j]) / h,
            (None, Some(d)) => (centre[j] - d[j]) / h,
            (None, None) => 0.0,
        };
        for (j, v) in variance.iter_mut().enumerate() {
            let s = slope(j) * sigma;
            *v += s * s;
        }
    }
    Figures::from_array(variance.map(f64::sqrt))
}

fn regime_warnings(m: &MeasuredRates, p: &SystemParams) -> Vec<RegimeWarning> {
    let mut out = Vec::new();
    if !p.poisson_regime() {
        out.push(RegimeWarning::CoherenceTime {
            coherence_time: p.coherence_time,
            gate_period: p.gate_period,
        });
    }
    if p.dead_time_generator > 0.0 {
        let limit = m.r_s / (1.0 + m.r_s * p.dead_time_generator);
        if m.heralding_rate > limit * 1.05 {
            out.push(RegimeWarning::GateRateAboveGeneratorLimit {
                heralding_rate: m.heralding_rate,
                limit,
            });
        }
    }
    out
}

/// Runs the whole pipeline with a 1 s integration time.
pub fn characterize(
    m: &MeasuredRates,
    p: &SystemParams,
) -> Result<CharacterizationReport, CharacterizeError> {
    characterize_with(m, p, &CharacterizeOptions::default())
}

pub fn characterize_with(
    m: &MeasuredRates,
    p: &SystemParams,
    options: &CharacterizeOptions,
) -> Result<CharacterizationReport, CharacterizeError> {
    let t = options.integration_time;
    if !(t > 0.0 && t.is_finite()) {
        return Err(InferenceError::InvalidParameter {
            name: "integration_time",
            value: t,
            expected: "> 0",
        })
        .at(Stage::Input);
    }
    let core = run_core(m, p)?;
    let g2_small_b = g2_zero_small_b(&core.derived).at(Stage::Statistics)?;
    let g2_from_couplings =
        g2_zero_from_couplings(&core.coupling, core.derived.pair_rate, m.heralding_rate, p)
            .at(Stage::Statistics)?;
    let centre = core.figures.to_array();
    Ok(CharacterizationReport {
        measured: *m,
        params: *p,
        derived: core.derived,
        coupling: core.coupling,
        distribution: core.distribution,
        g2_zero: core.g2_zero,
        g2_small_b,
        g2_from_couplings,
        mu_her: core.mu_her,
        figures: core.figures,
        uncertainties: propagate(m, p, &centre, t),
        integration_time: t,
        warnings: regime_warnings(m, p),
    })
}
