//! Photon-number statistics of a conditionally gated source.
//!
//! A heralded gate holds the "true" twin photon with probability `p_cor` plus
//! an independent number of accidental photons drawn from the original
//! distribution (Poisson for a CW pump, single-mode thermal for a pulsed one)
//! with mean `b`. Everything here is closed form and allocation free except
//! [`PhotonNumberDistribution`].

mod curves;

pub use curves::{
    find_poisson_crossing, g2_curves, pulsed_thermal_mean, CurveValue, LoadCurvePoint,
};

use thiserror::Error;

/// Truncation threshold for distributions and series.
pub const TAIL_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("g2(0) is undefined: the gate is never occupied (P(m>=1) = 0)")]
    UndefinedStatistic,
    #[error("heralding load b0 = {b0} >= 1: the accidental mean diverges")]
    Divergent { b0: f64 },
    #[error("g2(0) does not cross 1 for p_cor = {p_cor} inside (1e-6, 1 - 1e-6)")]
    NoCrossing { p_cor: f64 },
}

pub type Result<T> = std::result::Result<T, StatsError>;

fn domain(name: &'static str, value: f64, expected: &'static str) -> StatsError {
    StatsError::Domain {
        name,
        value,
        expected,
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(domain(name, value, "0 <= p <= 1"))
    }
}

pub(crate) fn check_mean(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(domain(name, value, "finite and >= 0"))
    }
}

/// Original (pre-heralding) photon-number distribution of the accidentals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OriginalDistribution {
    /// Many mutually incoherent processes: CW pump, coherence time much
    /// shorter than the gate.
    #[default]
    Poisson,
    /// Single coherent process (Bose-Einstein): pulsed pump.
    Thermal,
}

impl OriginalDistribution {
    /// Probability of at least `k` photons for this distribution with mean `mean`.
    pub fn tail(self, mean: f64, k: u32) -> f64 {
        match self {
            Self::Poisson => poisson_tail_unchecked(mean, k),
            Self::Thermal => thermal_tail_unchecked(mean, k),
        }
    }

    /// Probability of exactly `n` photons.
    pub fn pmf(self, mean: f64, n: u32) -> f64 {
        match self {
            Self::Poisson => poisson_pmf(mean, n),
            Self::Thermal => thermal_pmf(mean, n),
        }
    }
}

/// Sum with Neumaier compensation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|j| f64::from(j).ln()).sum()
}

fn poisson_pmf(b: f64, n: u32) -> f64 {
    if b == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (f64::from(n) * b.ln() - b - ln_factorial(n)).exp()
}

fn thermal_pmf(mu: f64, n: u32) -> f64 {
    let ratio = mu / (1.0 + mu);
    ratio.powi(n as i32) / (1.0 + mu)
}

fn poisson_tail_unchecked(b: f64, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if b == 0.0 {
        return 0.0;
    }
    if k == 1 {
        return -(-b).exp_m1();
    }
    if f64::from(k) > b {
        // Upper series: terms shrink by b/(j+1) < 1, no cancellation.
        let mut term = poisson_pmf(b, k);
        let mut acc = CompensatedSum::default();
        let mut j = k;
        while term > 0.0 {
            acc.add(term);
            j += 1;
            term *= b / f64::from(j);
            if term < acc.value() * 1e-17 {
                break;
            }
        }
        acc.value()
    } else {
        let mut acc = CompensatedSum::default();
        let mut term = (-b).exp();
        for j in 0..k {
            acc.add(term);
            term *= b / f64::from(j + 1);
        }
        (1.0 - acc.value()).max(0.0)
    }
}

fn thermal_tail_unchecked(mu: f64, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    (mu / (1.0 + mu)).powi(k as i32)
}

/// Probability of at least `k` photons from a Poisson distribution with mean `b`.
pub fn poisson_tail(b: f64, k: u32) -> Result<f64> {
    check_mean("b", b)?;
    Ok(poisson_tail_unchecked(b, k))
}

/// Probability of at least `k` photons from a single-mode thermal
/// (Bose-Einstein) distribution with mean `mu`: `(mu / (1 + mu))^k`.
pub fn thermal_tail(mu: f64, k: u32) -> Result<f64> {
    check_mean("mu", mu)?;
    Ok(thermal_tail_unchecked(mu, k))
}

/// Inputs of the gated-source model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatedStatisticsInput {
    p_cor: f64,
    b: f64,
    distribution: OriginalDistribution,
}

impl GatedStatisticsInput {
    pub fn new(p_cor: f64, b: f64, distribution: OriginalDistribution) -> Result<Self> {
        Ok(Self {
            p_cor: check_probability("p_cor", p_cor)?,
            b: check_mean("b", b)?,
            distribution,
        })
    }

    pub fn poisson(p_cor: f64, b: f64) -> Result<Self> {
        Self::new(p_cor, b, OriginalDistribution::Poisson)
    }

    pub fn thermal(p_cor: f64, b: f64) -> Result<Self> {
        Self::new(p_cor, b, OriginalDistribution::Thermal)
    }

    /// Probability that the heralded twin photon is in the gate.
    pub fn p_cor(&self) -> f64 {
        self.p_cor
    }

    /// Mean number of accidental photons per gate.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn distribution(&self) -> OriginalDistribution {
        self.distribution
    }

    fn accidental_tail(&self, k: u32) -> f64 {
        self.distribution.tail(self.b, k)
    }
}

/// Probability of at least `k` photons in a heralded gate.
///
/// `k = 0` is degenerate and returns 1.
pub fn heralded_tail(input: &GatedStatisticsInput, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let p = input.p_cor;
    p * input.accidental_tail(k - 1) + (1.0 - p) * input.accidental_tail(k)
}

/// Probability of exactly `n` photons in a heralded gate. For `n = 1` this
/// is the single-photon heralding probability.
///
/// Evaluated as `p_cor * P_acc(n-1) + (1 - p_cor) * P_acc(n)`, which is the
/// difference of consecutive tails without the cancellation.
pub fn exact_count_probability(input: &GatedStatisticsInput, n: u32) -> f64 {
    let p = input.p_cor;
    let twin = if n == 0 {
        0.0
    } else {
        p * input.distribution.pmf(input.b, n - 1)
    };
    twin + (1.0 - p) * input.distribution.pmf(input.b, n)
}

/// `g2(0) = 2 P(m>=2) / P(m>=1)^2`.
pub fn g2_zero(input: &GatedStatisticsInput) -> Result<f64> {
    let at_least_one = heralded_tail(input, 1);
    if at_least_one <= 0.0 {
        return Err(StatsError::UndefinedStatistic);
    }
    Ok(2.0 * heralded_tail(input, 2) / (at_least_one * at_least_one))
}

/// `g2(0) = 2 (1 - e^-b)` for perfect heralding (`p_cor = 1`) and Poisson accidentals.
pub fn g2_zero_ideal_cw(b: f64) -> Result<f64> {
    check_mean("b", b)?;
    Ok(-2.0 * (-b).exp_m1())
}

/// `<n> = b + p_cor`.
pub fn mean_photon_number(input: &GatedStatisticsInput) -> f64 {
    input.b + input.p_cor
}

/// `g2(0) = 1 + (<dn^2> - <n>) / <n>^2`.
pub fn g2_from_moments(mean: f64, variance: f64) -> Result<f64> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(domain("mean", mean, "> 0"));
    }
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(domain("variance", variance, ">= 0"));
    }
    Ok(1.0 + (variance - mean) / (mean * mean))
}

/// Heralding load of a gated detector: `b0 = gate_period * heralding_rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldingLoad {
    b0: f64,
    gate_period: f64,
    heralding_rate: f64,
}

impl HeraldingLoad {
    pub fn new(gate_period: f64, heralding_rate: f64) -> Result<Self> {
        if !(gate_period > 0.0 && gate_period.is_finite()) {
            return Err(domain("gate_period", gate_period, "> 0"));
        }
        check_mean("heralding_rate", heralding_rate)?;
        Self::checked(gate_period * heralding_rate, gate_period, heralding_rate)
    }

    pub fn from_b0(b0: f64, gate_period: f64) -> Result<Self> {
        if !(gate_period > 0.0 && gate_period.is_finite()) {
            return Err(domain("gate_period", gate_period, "> 0"));
        }
        check_mean("b0", b0)?;
        Self::checked(b0, gate_period, b0 / gate_period)
    }

    fn checked(b0: f64, gate_period: f64, heralding_rate: f64) -> Result<Self> {
        if b0 >= 1.0 {
            return Err(StatsError::Divergent { b0 });
        }
        Ok(Self {
            b0,
            gate_period,
            heralding_rate,
        })
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn gate_period(&self) -> f64 {
        self.gate_period
    }

    pub fn heralding_rate(&self) -> f64 {
        self.heralding_rate
    }
}

/// Mean accidental count per gate for a heralding load, assuming equal total
/// signal and idler rates: `b = b0 / (1 - b0) - p_cor * b0`.
///
/// This is a rate-balance relation: it removes the heralded twins from the
/// total idler rate. An event-level CW simulation instead sees the other
/// pairs' photons at the full rate inside every gate, so its accidental mean
/// exceeds this value by `p_cor * b0`.
pub fn b_from_b0(load: &HeraldingLoad, p_cor: f64) -> Result<f64> {
    let p = check_probability("p_cor", p_cor)?;
    let b0 = load.b0;
    Ok((b0 / (1.0 - b0) - p * b0).max(0.0))
}

/// Photon-number distribution of a heralded gate, truncated once the
/// remaining tail drops below [`TAIL_CUTOFF`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDistribution {
    probabilities: Vec<f64>,
    residual_tail: f64,
}

impl PhotonNumberDistribution {
    const MAX_TERMS: u32 = 100_000;

    pub fn from_input(input: &GatedStatisticsInput) -> Self {
        let mut probabilities = Vec::new();
        let mut n = 0u32;
        loop {
            probabilities.push(exact_count_probability(input, n));
            let residual = heralded_tail(input, n + 1);
            if residual < TAIL_CUTOFF || n + 1 >= Self::MAX_TERMS {
                return Self {
                    probabilities,
                    residual_tail: residual,
                };
            }
            n += 1;
        }
    }

    /// Unheralded single-mode thermal light with mean `mu`.
    pub fn thermal(mu: f64) -> Result<Self> {
        Ok(Self::from_input(&GatedStatisticsInput::thermal(0.0, mu)?))
    }

    /// Builds a distribution from explicit probabilities (e.g. an empirical
    /// histogram). The residual tail is whatever is missing from unity.
    pub fn from_probabilities(probabilities: Vec<f64>) -> Result<Self> {
        let mut total = CompensatedSum::default();
        for &p in &probabilities {
            check_probability("P(n)", p)?;
            total.add(p);
        }
        let total = total.value();
        if total > 1.0 + 1e-9 {
            return Err(domain("sum P(n)", total, "<= 1"));
        }
        Ok(Self {
            probabilities,
            residual_tail: (1.0 - total).max(0.0),
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Largest photon number kept.
    pub fn n_max(&self) -> usize {
        self.probabilities.len().saturating_sub(1)
    }

    /// Probability mass beyond `n_max`.
    pub fn residual_tail(&self) -> f64 {
        self.residual_tail
    }

    pub fn probability(&self, n: usize) -> f64 {
        self.probabilities.get(n).copied().unwrap_or(0.0)
    }

    /// `P(m >= k)` including the truncated remainder.
    pub fn tail(&self, k: usize) -> f64 {
        let mut acc = CompensatedSum::default();
        acc.add(self.residual_tail);
        for &p in self.probabilities.iter().skip(k) {
            acc.add(p);
        }
        acc.value().min(1.0)
    }

    pub fn mean(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for (n, &p) in self.probabilities.iter().enumerate() {
            acc.add(n as f64 * p);
        }
        acc.value()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let mut acc = CompensatedSum::default();
        for (n, &p) in self.probabilities.iter().enumerate() {
            let d = n as f64 - mean;
            acc.add(d * d * p);
        }
        acc.value()
    }

    /// `g2(0)` from the first two moments.
    pub fn g2_from_moments(&self) -> Result<f64> {
        g2_from_moments(self.mean(), self.variance())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: direct lower-sum series without any branching.
    fn poisson_tail_series(b: f64, k: u32) -> f64 {
        let mut s = 0.0;
        let mut term = (-b).exp();
        for j in 0..k {
            s += term;
            term *= b / f64::from(j + 1);
        }
        1.0 - s
    }

    fn input(p: f64, b: f64) -> GatedStatisticsInput {
        GatedStatisticsInput::poisson(p, b).unwrap()
    }

    #[test]
    fn poisson_tail_trivial_cases() {
        assert_eq!(poisson_tail(0.0, 1).unwrap(), 0.0);
        assert_eq!(poisson_tail(3.7, 0).unwrap(), 1.0);
        assert_eq!(poisson_tail(0.0, 0).unwrap(), 1.0);
    }

    #[test]
    fn poisson_tail_at_small_mean() {
        let oracle = poisson_tail_series(0.0057, 1);
        let got = poisson_tail(0.0057, 1).unwrap();
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - 0.005684).abs() < 5e-7, "{got}");
    }

    #[test]
    fn poisson_tail_matches_statrs_cdf() {
        use statrs::distribution::{DiscreteCDF, Poisson};
        for &b in &[0.05, 0.7, 3.0, 12.5, 40.0] {
            let dist = Poisson::new(b).unwrap();
            for k in 1..25u32 {
                let oracle = 1.0 - dist.cdf(u64::from(k - 1));
                let got = poisson_tail(b, k).unwrap();
                assert!(
                    (got - oracle).abs() < 1e-12,
                    "b={b} k={k}: {got} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn poisson_tail_keeps_relative_precision_for_rare_events() {
        // P(n >= 3) for b = 1e-6 is b^3/6 to leading order.
        let got = poisson_tail(1e-6, 3).unwrap();
        let expected = 1e-18 / 6.0 * (1.0 - 0.75e-6);
        assert!(((got - expected) / expected).abs() < 1e-9, "{got}");
    }

    #[test]
    fn negative_mean_is_a_domain_error() {
        assert!(matches!(
            poisson_tail(-0.1, 1),
            Err(StatsError::Domain { name: "b", .. })
        ));
        assert!(matches!(
            thermal_tail(-1.0, 2),
            Err(StatsError::Domain { name: "mu", .. })
        ));
        assert!(GatedStatisticsInput::poisson(1.2, 0.1).is_err());
        assert!(GatedStatisticsInput::poisson(0.5, f64::NAN).is_err());
    }

    #[test]
    fn thermal_tail_examples() {
        assert_eq!(thermal_tail(0.0, 1).unwrap(), 0.0);
        assert_eq!(thermal_tail(1.0, 1).unwrap(), 0.5);
        // oracle: direct pmf summation
        let mu: f64 = 0.25;
        let lower: f64 = (0..2).map(|j| mu.powi(j) / (1.0 + mu).powi(j + 1)).sum();
        let got = thermal_tail(mu, 2).unwrap();
        assert!((got - (1.0 - lower)).abs() < 1e-15);
        assert!((got - 0.04).abs() < 1e-15);
    }

    #[test]
    fn heralded_tail_examples() {
        assert_eq!(heralded_tail(&input(1.0, 0.0), 1), 1.0);
        assert_eq!(heralded_tail(&input(0.3, 0.2), 0), 1.0);
        let op = input(0.483, 0.00576);
        assert!((heralded_tail(&op, 1) - 0.486).abs() < 0.003);
        assert!((heralded_tail(&op, 2) - 0.0028).abs() < 0.00002);
    }

    #[test]
    fn exact_count_examples() {
        let op = input(0.483, 0.00576);
        assert!((exact_count_probability(&op, 0) - 0.514).abs() < 0.003);
        assert!((exact_count_probability(&op, 1) - 0.483).abs() < 0.003);
        assert_eq!(exact_count_probability(&input(1.0, 0.0), 1), 1.0);
    }

    #[test]
    fn g2_examples() {
        let op = input(0.483, 0.00576);
        assert!((g2_zero(&op).unwrap() - 0.0235).abs() < 0.0005);
        assert!(g2_zero(&input(1.0, 1e-12)).unwrap() < 1e-11);
        // randomly gated Poisson source, direct evaluation
        let b: f64 = 3.0;
        let oracle = 2.0 * (1.0 - (1.0 + b) * (-b).exp()) / (1.0 - (-b).exp()).powi(2);
        let got = g2_zero(&input(0.0, 3.0)).unwrap();
        assert!((got - oracle).abs() < 1e-13);
        assert!((got - 1.773_945_36).abs() < 1e-8);
        assert_eq!(
            g2_zero(&input(0.0, 0.0)),
            Err(StatsError::UndefinedStatistic)
        );
    }

    #[test]
    fn ideal_cw_examples() {
        assert_eq!(g2_zero_ideal_cw(0.0).unwrap(), 0.0);
        assert!((g2_zero_ideal_cw(2f64.ln()).unwrap() - 1.0).abs() < 1e-15);
        let oracle = 2.0 * (1.0 - (-0.0057f64).exp());
        let got = g2_zero_ideal_cw(0.0057).unwrap();
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - 0.01137).abs() < 5e-6);
    }

    #[test]
    fn ideal_cw_equals_perfect_heralding_on_a_grid() {
        for i in 0..=2000 {
            let b = 20.0 * f64::from(i) / 2000.0;
            let general = g2_zero(&input(1.0, b)).unwrap();
            let ideal = g2_zero_ideal_cw(b).unwrap();
            assert!(
                (general - ideal).abs() <= 2.0 * f64::EPSILON * ideal.max(1e-300),
                "b={b}: {general} vs {ideal}"
            );
        }
    }

    #[test]
    fn b_from_b0_examples() {
        let zero = HeraldingLoad::from_b0(0.0, 10e-9).unwrap();
        assert_eq!(b_from_b0(&zero, 0.7).unwrap(), 0.0);
        let ideal = HeraldingLoad::from_b0(0.555, 10e-9).unwrap();
        assert!((b_from_b0(&ideal, 1.0).unwrap() - 2f64.ln()).abs() < 2e-3);
        let half = HeraldingLoad::from_b0(0.42, 10e-9).unwrap();
        let b = b_from_b0(&half, 0.5).unwrap();
        assert!((b - 0.514).abs() < 1e-3, "{b}");
        let g2 = g2_zero(&input(0.5, b)).unwrap();
        assert!((g2 - 1.0).abs() < 0.02, "{g2}");
    }

    #[test]
    fn load_invariants() {
        let load = HeraldingLoad::new(10e-9, 81e3).unwrap();
        assert!((load.b0() - 10e-9 * 81e3).abs() < 1e-12);
        assert!(matches!(
            HeraldingLoad::from_b0(1.0, 10e-9),
            Err(StatsError::Divergent { .. })
        ));
        assert!(HeraldingLoad::new(10e-9, 1e8).is_err());
        assert!(HeraldingLoad::new(0.0, 1e3).is_err());
    }

    #[test]
    fn mean_photon_number_examples() {
        assert_eq!(mean_photon_number(&input(1.0, 0.0)), 1.0);
        assert_eq!(mean_photon_number(&input(0.0, 0.0)), 0.0);
        assert!((mean_photon_number(&input(0.483, 0.00576)) - 0.48876).abs() < 1e-12);
    }

    #[test]
    fn moment_examples() {
        assert_eq!(g2_from_moments(0.37, 0.37).unwrap(), 1.0);
        assert_eq!(g2_from_moments(1.0, 0.0).unwrap(), 0.0);
        assert!(g2_from_moments(0.0, 1.0).is_err());
        let dist = PhotonNumberDistribution::from_input(&input(0.483, 0.00576));
        let via_moments = dist.g2_from_moments().unwrap();
        assert!((via_moments - 0.0235).abs() < 0.0005, "{via_moments}");
    }

    #[test]
    fn moments_match_factorial_moment_closed_form() {
        // n = B + X with B ~ Bernoulli(p), X ~ Poisson(b):
        // E[n] = p + b, E[n(n-1)] = 2 p b + b^2.
        for &(p, b) in &[(0.483, 0.00576), (1.0, 0.1), (0.5, 0.7), (0.2, 3.0)] {
            let dist = PhotonNumberDistribution::from_input(&input(p, b));
            let mean = p + b;
            let expected = (2.0 * p * b + b * b) / (mean * mean);
            let got = dist.g2_from_moments().unwrap();
            assert!(
                (got - expected).abs() < 1e-9,
                "p={p} b={b}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn moment_and_probability_routes_converge_at_low_occupation() {
        // The two g2 definitions agree only to leading order in the occupation;
        // the gap shrinks with b.
        let mut last_gap = f64::INFINITY;
        for &b in &[0.1, 0.01, 0.001, 0.0001] {
            let inp = input(0.0, b);
            let dist = PhotonNumberDistribution::from_input(&inp);
            let gap = (dist.g2_from_moments().unwrap() - g2_zero(&inp).unwrap()).abs();
            assert!(gap < last_gap);
            last_gap = gap;
        }
        assert!(last_gap < 1e-4);
    }

    #[test]
    fn thermal_moments_give_two() {
        for &mu in &[0.5, 1.0, 2.0, 0.25] {
            assert_eq!(g2_from_moments(mu, mu + mu * mu).unwrap(), 2.0);
        }
        let dist = PhotonNumberDistribution::thermal(0.3).unwrap();
        assert!((dist.g2_from_moments().unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn limits() {
        let low = g2_zero(&input(0.0, 1e-8)).unwrap();
        assert!((low - 1.0).abs() < 1e-6, "{low}");
        for &p in &[0.0, 0.3, 1.0] {
            let high = g2_zero(&input(p, 50.0)).unwrap();
            assert!((high - 2.0).abs() < 1e-6, "{high}");
        }
    }

    #[test]
    fn empirical_distribution_residual() {
        let d = PhotonNumberDistribution::from_probabilities(vec![0.5, 0.25]).unwrap();
        assert_eq!(d.residual_tail(), 0.25);
        assert_eq!(d.tail(1), 0.5);
        assert!(PhotonNumberDistribution::from_probabilities(vec![0.9, 0.2]).is_err());
    }

    fn any_input() -> impl Strategy<Value = GatedStatisticsInput> {
        (0.0..=1.0f64, 0.0..20.0f64, prop::bool::ANY).prop_map(|(p, b, thermal)| {
            let dist = if thermal {
                OriginalDistribution::Thermal
            } else {
                OriginalDistribution::Poisson
            };
            GatedStatisticsInput::new(p, b, dist).unwrap()
        })
    }

    proptest! {
        #[test]
        fn normalization(inp in any_input()) {
            let dist = PhotonNumberDistribution::from_input(&inp);
            let total: f64 = dist.probabilities().iter().sum::<f64>() + dist.residual_tail();
            prop_assert!((total - 1.0).abs() < 1e-10, "total {}", total);
            prop_assert!(dist.residual_tail() < TAIL_CUTOFF || dist.n_max() + 1 >= 100_000);
        }

        #[test]
        fn tails_are_monotone_probabilities(inp in any_input()) {
            let mut prev = 1.0;
            for k in 0..40 {
                let t = heralded_tail(&inp, k);
                prop_assert!((0.0..=1.0).contains(&t));
                prop_assert!(t <= prev + 1e-15);
                prev = t;
            }
        }

        #[test]
        fn first_tail_complements_empty_gate(inp in any_input()) {
            let lhs = heralded_tail(&inp, 1);
            let rhs = 1.0 - exact_count_probability(&inp, 0);
            prop_assert!((lhs - rhs).abs() < 1e-14);
        }

        #[test]
        fn exact_counts_match_tail_differences(inp in any_input(), n in 0u32..12) {
            let diff = heralded_tail(&inp, n) - heralded_tail(&inp, n + 1);
            prop_assert!((exact_count_probability(&inp, n) - diff).abs() < 1e-13);
        }

        #[test]
        fn poisson_tail_agrees_with_series(b in 0.0..30.0f64, k in 0u32..30) {
            let got = poisson_tail(b, k).unwrap();
            let oracle = poisson_tail_series(b, k);
            prop_assert!((got - oracle).abs() < 1e-12, "{} vs {}", got, oracle);
        }
    }
}
