//! Multi-pass experiments built on single runs: the four measurements the
//! inversion needs, gate-delay scans and pump sweeps.

use rayon::prelude::*;

use super::config::{Coupling, GatingMode, PumpMode, SimConfig};
use super::engine::run_pass;
use super::report::{Estimate, SimReport};
use super::{Result, SimError};
use crate::inference::{MeasuredRates, SystemParams};

/// Outcome of simulating the measurement campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedMeasurement {
    pub measured: MeasuredRates,
    pub params: SystemParams,
    /// Counting time of each pass.
    pub integration_time: f64,
    pub heralded: SimReport,
    pub multimode: SimReport,
    pub random: SimReport,
    pub dark: SimReport,
}

/// Setup parameters as the inversion sees them.
pub fn system_params(config: &SimConfig) -> SystemParams {
    SystemParams {
        eta_s: config.signal.efficiency,
        eta_i: config.idler.efficiency,
        delta_s: config.delta_s,
        delta_i: config.delta_i,
        zeta: config.zeta,
        gate_period: config.gate_period,
        dead_time_signal: config.signal.dead_time,
        dead_time_generator: config.generator_dead_time,
        holdoff_idler: config.idler.holdoff,
        coherence_time: 0.0,
    }
}

fn click_rate_at(report: &SimReport, gate_rate: f64) -> f64 {
    report
        .statistics
        .as_ref()
        .map_or(0.0, |s| s.click_fraction.value * gate_rate)
}

/// Runs the four passes behind one measurement set, using RNG passes
/// `pass_base .. pass_base + 4`:
///
/// 1. heralded gating, giving `r_s`, `R0` and `r_c`;
/// 2. the signal through a multimode fiber (`gamma_s = 1`), giving `r_p`;
/// 3. gates from a Poisson train at the measured `R0`, giving `r_i`;
/// 4. pump off with the same random gating, giving both dark rates.
///
/// Gated rates are reported as click fraction times `R0`, which is what a
/// counter gated at `R0` would show.
pub fn simulate_measurements_with(
    config: &SimConfig,
    pass_base: u64,
) -> Result<SimulatedMeasurement> {
    config.validate()?;
    let heralded_cfg = SimConfig {
        gating: GatingMode::Heralded,
        ..*config
    };
    let heralded = SimReport::from_run(&run_pass(&heralded_cfg, pass_base, false)?);
    let r0 = heralded.rates.gate_rate.value;
    if r0 <= 0.0 {
        return Err(SimError::EmptyReport);
    }

    let multimode_cfg = SimConfig {
        coupling: Coupling {
            gamma_s: 1.0,
            gamma_i: config.coupling.gamma_i,
            gamma_c: config.coupling.gamma_i,
        },
        gating: GatingMode::Random { rate: 0.0 },
        ..*config
    };
    let random_cfg = SimConfig {
        gating: GatingMode::Random { rate: r0 },
        ..*config
    };
    let dark_cfg = SimConfig {
        pump: config.pump.scaled(0.0),
        ..random_cfg
    };
    let jobs = [
        (multimode_cfg, pass_base + 1),
        (random_cfg, pass_base + 2),
        (dark_cfg, pass_base + 3),
    ];
    let mut reports = jobs
        .par_iter()
        .map(|(cfg, pass)| run_pass(cfg, *pass, false).map(|r| SimReport::from_run(&r)))
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let multimode = reports.next().expect("three passes");
    let random = reports.next().expect("three passes");
    let dark = reports.next().expect("three passes");

    let measured = MeasuredRates {
        r_p: multimode.rates.signal_click_rate.value,
        r_s: heralded.rates.signal_click_rate.value,
        heralding_rate: r0,
        r_c: heralded.rates.click_rate.value,
        r_i: click_rate_at(&random, r0),
        r_s_dark: dark.rates.signal_click_rate.value,
        r_i_dark: click_rate_at(&dark, r0),
    };
    Ok(SimulatedMeasurement {
        measured,
        params: system_params(config),
        integration_time: heralded.duration,
        heralded,
        multimode,
        random,
        dark,
    })
}

pub fn simulate_measurements(config: &SimConfig) -> Result<SimulatedMeasurement> {
    simulate_measurements_with(config, 0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayPoint {
    /// Gate opening time after the herald, seconds.
    pub gate_delay: f64,
    pub gates: u64,
    /// Heralded idler clicks per second.
    pub click_rate: Estimate,
}

/// Heralded click rate for each gate delay, one independent run per delay.
pub fn delay_scan(config: &SimConfig, delays: &[f64]) -> Result<Vec<DelayPoint>> {
    config.validate()?;
    delays
        .par_iter()
        .enumerate()
        .map(|(i, &gate_delay)| {
            let cfg = SimConfig {
                gate_delay,
                gating: GatingMode::Heralded,
                ..*config
            };
            let run = run_pass(&cfg, 1_000 + i as u64, false)?;
            let report = SimReport::from_run(&run);
            Ok(DelayPoint {
                gate_delay,
                gates: run.tally.gates,
                click_rate: report.rates.click_rate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub scale: f64,
    pub pair_rate: f64,
    pub signal_click_rate: Estimate,
    pub heralding_rate: Estimate,
    /// Heralded idler clicks per second.
    pub heralded_click_rate: Estimate,
    /// Idler clicks per second with random gating at the same gate rate.
    pub accidental_click_rate: f64,
    pub b0: f64,
    pub g2_zero: Option<Estimate>,
    pub measurement: SimulatedMeasurement,
}

/// Reruns the measurement campaign with the pump scaled by each value.
pub fn sweep_pump_power(config: &SimConfig, scales: &[f64]) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    if let Some(&bad) = scales.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(SimError::InvalidConfig {
            name: "scale",
            value: bad,
            expected: "> 0",
        });
    }
    scales
        .iter()
        .enumerate()
        .map(|(i, &scale)| {
            let cfg = SimConfig {
                pump: config.pump.scaled(scale),
                ..*config
            };
            cfg.validate()?;
            let m = simulate_measurements_with(&cfg, 2_000 + 4 * i as u64)?;
            let h = &m.heralded;
            Ok(SweepPoint {
                scale,
                pair_rate: cfg.pump.mean_pair_rate(),
                signal_click_rate: h.rates.signal_click_rate,
                heralding_rate: h.rates.gate_rate,
                heralded_click_rate: h.rates.click_rate,
                accidental_click_rate: m.measured.r_i,
                b0: h.rates.gate_rate.value * cfg.gate_period,
                g2_zero: h.statistics.as_ref().and_then(|s| s.g2_zero),
                measurement: m,
            })
        })
        .collect()
}

/// Pulsed configuration with one thermal mode per pulse, perfect coupling
/// and detection, and gates as long as the pulse period centred on the
/// twin. `b0` is the heralding probability per pulse.
pub fn pulsed_reference(b0: f64, pulse_rate: f64, duration: f64, seed: u64) -> SimConfig {
    let period = 1.0 / pulse_rate;
    SimConfig {
        pump: PumpMode::Pulsed {
            mean_per_pulse: b0 / (1.0 - b0),
            pulse_rate,
        },
        gate_delay: 100e-9 - period / 2.0,
        duration,
        seed,
        ..SimConfig::ideal(0.0, period)
    }
}
