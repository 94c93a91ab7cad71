//! `g2(0)` against heralding load, and the load where a heralded source
//! turns Poissonian.

use super::{
    b_from_b0, check_probability, g2_zero, GatedStatisticsInput, HeraldingLoad, Result, StatsError,
};
use crate::roots::{self, Tolerance};

const CROSSING_LO: f64 = 1e-6;
const CROSSING_HI: f64 = 1.0 - 1e-6;

/// Per-pulse thermal mean for a pulsed source whose pulse period equals the
/// gate period, chosen so the heralding probability per pulse
/// `mu / (1 + mu)` equals `b0`.
///
/// With perfect coupling every heralded pulse holds the twin plus, by the
/// memorylessness of the geometric distribution, a thermal number of extra
/// pairs with the same mean `mu`. The pulsed curve is therefore
/// `g2_zero(p_cor = 1, b = mu, Thermal)`, which simplifies to `2 b0`.
pub fn pulsed_thermal_mean(b0: f64) -> Result<f64> {
    let load = HeraldingLoad::from_b0(b0, 1.0)?;
    Ok(load.b0() / (1.0 - load.b0()))
}

/// One cell of a load curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveValue {
    Value(f64),
    /// The statistic has no value at this point (empty gates).
    Undefined,
    /// `b0 >= 1`.
    Diverged,
}

impl CurveValue {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(v),
            _ => None,
        }
    }

    fn from_result(r: Result<f64>) -> Self {
        match r {
            Ok(v) => Self::Value(v),
            Err(StatsError::Divergent { .. }) => Self::Diverged,
            Err(_) => Self::Undefined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadCurvePoint {
    pub b0: f64,
    pub heralding_rate: f64,
    /// CW pump, perfect heralding, Poisson accidentals.
    pub g2_cw: CurveValue,
    /// Poisson source gated at random (`p_cor = 0`).
    pub g2_random: CurveValue,
    /// Pulsed pump, one thermal mode per pulse, pulse period = gate period.
    pub g2_pulsed: CurveValue,
    /// CW pump with a lossy heralding probability, when one was supplied.
    pub g2_model: Option<CurveValue>,
}

impl LoadCurvePoint {
    pub fn diverged(&self) -> bool {
        self.b0 >= 1.0
    }
}

fn cw_curve(b0: f64, gate_period: f64, p_cor: f64) -> Result<f64> {
    let load = HeraldingLoad::from_b0(b0, gate_period)?;
    let b = b_from_b0(&load, p_cor)?;
    g2_zero(&GatedStatisticsInput::poisson(p_cor, b)?)
}

fn pulsed_curve(b0: f64) -> Result<f64> {
    let mu = pulsed_thermal_mean(b0)?;
    g2_zero(&GatedStatisticsInput::thermal(1.0, mu)?)
}

/// Evaluates the load curves on a grid of heralding rates.
///
/// `model_p_cor`, when given, adds the CW curve for that (lossy) heralding
/// probability. Points with `b0 >= 1` are returned flagged, not computed.
pub fn g2_curves(
    gate_period: f64,
    rate_grid: &[f64],
    model_p_cor: Option<f64>,
) -> Result<Vec<LoadCurvePoint>> {
    if !(gate_period > 0.0 && gate_period.is_finite()) {
        return Err(StatsError::Domain {
            name: "gate_period",
            value: gate_period,
            expected: "> 0",
        });
    }
    if let Some(p) = model_p_cor {
        check_probability("p_cor", p)?;
    }
    rate_grid
        .iter()
        .map(|&rate| {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(StatsError::Domain {
                    name: "heralding_rate",
                    value: rate,
                    expected: "finite and >= 0",
                });
            }
            let b0 = rate * gate_period;
            Ok(LoadCurvePoint {
                b0,
                heralding_rate: rate,
                g2_cw: CurveValue::from_result(cw_curve(b0, gate_period, 1.0)),
                g2_random: CurveValue::from_result(cw_curve(b0, gate_period, 0.0)),
                g2_pulsed: CurveValue::from_result(pulsed_curve(b0)),
                g2_model: model_p_cor
                    .map(|p| CurveValue::from_result(cw_curve(b0, gate_period, p))),
            })
        })
        .collect()
}

/// Load `b0` at which `g2(0) = 1` for heralding probability `p_cor`, using
/// the CW load relation and Poisson accidentals.
///
/// Bisection over `(1e-6, 1 - 1e-6)` until `|g2 - 1| < 1e-9`.
pub fn find_poisson_crossing(p_cor: f64) -> Result<f64> {
    if !(p_cor > 0.0 && p_cor <= 1.0) {
        return Err(StatsError::Domain {
            name: "p_cor",
            value: p_cor,
            expected: "0 < p_cor <= 1",
        });
    }
    // b0 cancels out of the g2 expression except through b, so any gate
    // period works here.
    let excess = |b0: f64| cw_curve(b0, 1.0, p_cor).map_or(f64::NAN, |g2| g2 - 1.0);
    let tol = Tolerance {
        x_abs: 0.0,
        x_rel: 0.0,
        f_abs: 1e-9,
        max_iterations: 200,
    };
    roots::bisect(excess, CROSSING_LO, CROSSING_HI, tol)
        .map_err(|_| StatsError::NoCrossing { p_cor })
}
