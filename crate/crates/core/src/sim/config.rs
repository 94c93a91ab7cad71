//! Simulation configuration and presets.

use super::{Result, SimError};
use crate::stats::{GatedStatisticsInput, OriginalDistribution};

pub const PS_PER_S: f64 = 1e12;

pub(crate) fn to_ps(seconds: f64) -> i64 {
    (seconds * PS_PER_S).round() as i64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpMode {
    /// Pairs created by a homogeneous Poisson process.
    Cw { pair_rate: f64 },
    /// Thermal number of pairs per pulse, all at the pulse time.
    Pulsed {
        mean_per_pulse: f64,
        pulse_rate: f64,
    },
}

impl PumpMode {
    /// Mean generated pairs per second.
    pub fn mean_pair_rate(&self) -> f64 {
        match *self {
            PumpMode::Cw { pair_rate } => pair_rate,
            PumpMode::Pulsed {
                mean_per_pulse,
                pulse_rate,
            } => mean_per_pulse * pulse_rate,
        }
    }

    /// Same mode with the pair rate (or mean per pulse) multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        match *self {
            PumpMode::Cw { pair_rate } => PumpMode::Cw {
                pair_rate: pair_rate * scale,
            },
            PumpMode::Pulsed {
                mean_per_pulse,
                pulse_rate,
            } => PumpMode::Pulsed {
                mean_per_pulse: mean_per_pulse * scale,
                pulse_rate,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GatingMode {
    /// One gate per herald from the delay generator.
    Heralded,
    /// Gates from an independent Poisson train.
    Random { rate: f64 },
    /// Gates on a fixed grid, `phase` seconds after each multiple of `1/rate`.
    Periodic { rate: f64, phase: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub gamma_s: f64,
    pub gamma_i: f64,
    pub gamma_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalDetector {
    pub efficiency: f64,
    pub dark_rate: f64,
    /// Non-paralyzable. Values below 1 ps are raised to 1 ps so that
    /// simultaneous photons give one click.
    pub dead_time: f64,
    /// Standard deviation of Gaussian timing jitter.
    pub jitter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdlerDetector {
    pub efficiency: f64,
    /// Dark-count rate while the gate is open.
    pub dark_rate: f64,
    /// Gates opening within this time after a click are ignored.
    pub holdoff: f64,
    /// Linear efficiency ramp at both gate edges.
    pub rise_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub pump: PumpMode,
    pub coupling: Coupling,
    pub zeta: f64,
    pub delta_s: f64,
    pub delta_i: f64,
    pub signal: SignalDetector,
    /// Dead time of the delay/pulse generator between heralds.
    pub generator_dead_time: f64,
    pub idler: IdlerDetector,
    pub gate_period: f64,
    /// Gate opening time after the trigger.
    pub gate_delay: f64,
    /// Arrival of the idler at its detector relative to the signal.
    pub idler_delay: f64,
    pub gating: GatingMode,
    pub duration: f64,
    pub seed: u64,
    /// Upper bound on `duration * pair_rate`.
    pub event_budget: f64,
    /// Length of the independent segments; `None` picks one from the rates.
    pub segment_length: Option<f64>,
}

pub const DEFAULT_EVENT_BUDGET: f64 = 5e9;

impl SimConfig {
    /// Source and setup matching the golden measurement set.
    ///
    /// Coupling efficiencies are the ones the inversion recovers from that
    /// set. The generator dead time is tuned so that `R0 / r_s` comes out
    /// near 81/88 and the idler dark rate so that 40 dark clicks per second
    /// appear at 81e3 gates per second. No hold-off, so the click rates are
    /// directly comparable with the inversion formulas.
    pub fn reference() -> Self {
        SimConfig {
            pump: PumpMode::Cw {
                pair_rate: 1.345_123e6,
            },
            coupling: Coupling {
                gamma_s: 0.403_4,
                gamma_i: 0.729_2,
                gamma_c: 0.311_2,
            },
            zeta: 0.5,
            delta_s: 0.54,
            delta_i: 0.63,
            signal: SignalDetector {
                efficiency: 0.60,
                dark_rate: 90.0,
                dead_time: 50e-9,
                jitter: 0.0,
            },
            generator_dead_time: 930e-9,
            idler: IdlerDetector {
                efficiency: 0.18,
                dark_rate: 40.0 / 81e3 / 10e-9,
                holdoff: 0.0,
                rise_time: 0.0,
            },
            gate_period: 10e-9,
            gate_delay: 95e-9,
            idler_delay: 100e-9,
            gating: GatingMode::Heralded,
            duration: 1.0,
            seed: 0x5eed,
            event_budget: DEFAULT_EVENT_BUDGET,
            segment_length: None,
        }
    }

    /// Lossless, noiseless CW source with the twin centred in the gate.
    pub fn ideal(pair_rate: f64, gate_period: f64) -> Self {
        SimConfig {
            pump: PumpMode::Cw { pair_rate },
            coupling: Coupling {
                gamma_s: 1.0,
                gamma_i: 1.0,
                gamma_c: 1.0,
            },
            zeta: 1.0,
            delta_s: 1.0,
            delta_i: 1.0,
            signal: SignalDetector {
                efficiency: 1.0,
                dark_rate: 0.0,
                dead_time: 0.0,
                jitter: 0.0,
            },
            generator_dead_time: 0.0,
            idler: IdlerDetector {
                efficiency: 1.0,
                dark_rate: 0.0,
                holdoff: 0.0,
                rise_time: 0.0,
            },
            gate_period,
            gate_delay: 100e-9 - gate_period / 2.0,
            idler_delay: 100e-9,
            gating: GatingMode::Heralded,
            duration: 1.0,
            seed: 1,
            event_budget: DEFAULT_EVENT_BUDGET,
            segment_length: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64, expected: &'static str| {
            Err(SimError::InvalidConfig {
                name,
                value,
                expected,
            })
        };
        match self.pump {
            PumpMode::Cw { pair_rate } => {
                if !(pair_rate >= 0.0 && pair_rate.is_finite()) {
                    return bad("pair_rate", pair_rate, "finite and >= 0");
                }
            }
            PumpMode::Pulsed {
                mean_per_pulse,
                pulse_rate,
            } => {
                if !(mean_per_pulse >= 0.0 && mean_per_pulse.is_finite()) {
                    return bad("mean_per_pulse", mean_per_pulse, "finite and >= 0");
                }
                if !(pulse_rate > 0.0 && pulse_rate <= 1e12) {
                    return bad("pulse_rate", pulse_rate, "0 < rate <= 1e12");
                }
            }
        }
        let probabilities = [
            ("gamma_s", self.coupling.gamma_s),
            ("gamma_i", self.coupling.gamma_i),
            ("gamma_c", self.coupling.gamma_c),
            ("zeta", self.zeta),
            ("delta_s", self.delta_s),
            ("delta_i", self.delta_i),
            ("eta_s", self.signal.efficiency),
            ("eta_i", self.idler.efficiency),
        ];
        for (name, v) in probabilities {
            if !(0.0..=1.0).contains(&v) {
                return bad(name, v, "0 <= value <= 1");
            }
        }
        let c = self.coupling;
        if c.gamma_c > c.gamma_s.min(c.gamma_i) + 1e-12 {
            return bad("gamma_c", c.gamma_c, "<= min(gamma_s, gamma_i)");
        }
        if c.gamma_s + c.gamma_i - c.gamma_c > 1.0 + 1e-12 {
            return bad(
                "gamma_s + gamma_i - gamma_c",
                c.gamma_s + c.gamma_i - c.gamma_c,
                "<= 1",
            );
        }
        let non_negative = [
            ("signal dark_rate", self.signal.dark_rate),
            ("signal dead_time", self.signal.dead_time),
            ("signal jitter", self.signal.jitter),
            ("generator_dead_time", self.generator_dead_time),
            ("idler dark_rate", self.idler.dark_rate),
            ("holdoff", self.idler.holdoff),
            ("rise_time", self.idler.rise_time),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(name, v, "finite and >= 0");
            }
        }
        if !(self.gate_period >= 1e-12 && self.gate_period.is_finite()) {
            return bad("gate_period", self.gate_period, ">= 1 ps");
        }
        if 2.0 * self.idler.rise_time > self.gate_period {
            return bad("rise_time", self.idler.rise_time, "<= gate_period / 2");
        }
        for (name, v) in [
            ("gate_delay", self.gate_delay),
            ("idler_delay", self.idler_delay),
        ] {
            if !(v.is_finite() && v.abs() < 1.0) {
                return bad(name, v, "finite, |value| < 1 s");
            }
        }
        match self.gating {
            GatingMode::Heralded => {}
            GatingMode::Random { rate } | GatingMode::Periodic { rate, .. } => {
                if !(rate >= 0.0 && rate <= 1e12) {
                    return bad("gate rate", rate, "0 <= rate <= 1e12");
                }
            }
        }
        if let GatingMode::Periodic { rate, phase } = self.gating {
            if rate == 0.0 {
                return bad("gate rate", rate, "> 0 for periodic gating");
            }
            if !phase.is_finite() {
                return bad("phase", phase, "finite");
            }
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration", self.duration, "> 0");
        }
        if let Some(len) = self.segment_length {
            if !(len >= 1e-9 && len.is_finite()) {
                return bad("segment_length", len, ">= 1 ns");
            }
        }
        let requested = self.duration * self.pump.mean_pair_rate();
        if requested > self.event_budget {
            return Err(SimError::EventBudget {
                requested,
                budget: self.event_budget,
            });
        }
        Ok(())
    }

    /// Pair rate with the signal in band and both transmissions passed,
    /// i.e. photons reaching each detector.
    pub fn signal_fiber_rate(&self) -> f64 {
        self.coupling.gamma_s * self.zeta * self.delta_s * self.pump.mean_pair_rate()
    }

    pub fn idler_fiber_rate(&self) -> f64 {
        self.coupling.gamma_i * self.delta_i * self.pump.mean_pair_rate()
    }

    pub fn correlated_rate(&self) -> f64 {
        self.coupling.gamma_c * self.zeta * self.delta_s * self.delta_i * self.pump.mean_pair_rate()
    }

    /// Gate statistics this configuration should produce for a CW pump with
    /// the twin inside the gate.
    ///
    /// `p_cor` is the chance a trigger came from a signal photon whose twin
    /// reached the idler detector; darks dilute it. Accidentals are Poisson
    /// with mean `gate_period * R_i`, less a first-order dead-time term: a
    /// pair created shortly before the trigger cannot have had its signal
    /// detected, or there would be no trigger. Over the part of the gate
    /// fed by such pairs the idler rate drops by `eta_s * R_c`.
    pub fn expected_gate_statistics(&self) -> Result<GatedStatisticsInput> {
        let eta = self.signal.efficiency;
        let (p_cor, blind) = match self.gating {
            GatingMode::Heralded => {
                let clicks = eta * self.signal_fiber_rate() + self.signal.dark_rate;
                let p_cor = if clicks > 0.0 {
                    eta * self.correlated_rate() / clicks
                } else {
                    0.0
                };
                // creation times, relative to the trigger, of pairs whose
                // idler lands in the gate
                let lo = self.gate_delay - self.idler_delay;
                let hi = lo + self.gate_period;
                let memory = (self.effective_signal_dead_time_ps() as f64 / PS_PER_S)
                    .max(self.generator_dead_time);
                let blind = (hi.min(0.0) - lo.max(-memory)).max(0.0);
                (p_cor, blind)
            }
            _ => (0.0, 0.0),
        };
        let b = self.gate_period * self.idler_fiber_rate() - blind * eta * self.correlated_rate();
        Ok(GatedStatisticsInput::new(
            p_cor,
            b.max(0.0),
            OriginalDistribution::Poisson,
        )?)
    }

    pub(crate) fn effective_signal_dead_time_ps(&self) -> i64 {
        to_ps(self.signal.dead_time).max(1)
    }

    /// Warm-up before each segment, long enough for dead-time and hold-off
    /// state to forget its start.
    pub(crate) fn pre_roll(&self) -> f64 {
        let memory = self.signal.dead_time + self.generator_dead_time + self.idler.holdoff;
        10.0 * memory
            + 10.0 * self.signal.jitter
            + self.gate_period
            + self.gate_delay.abs()
            + self.idler_delay.abs()
            + 1e-9
    }

    /// Tail after each segment so gates near its end still see every photon.
    pub(crate) fn post_roll(&self) -> f64 {
        self.gate_delay.abs()
            + self.idler_delay.abs()
            + self.gate_period
            + 10.0 * self.signal.jitter
            + 1e-9
    }

    /// Segment length: the configured one, or one holding roughly 2e5
    /// random events, capped at 10 ms.
    pub(crate) fn segment_seconds(&self) -> f64 {
        if let Some(len) = self.segment_length {
            return len;
        }
        let gate_rate = match self.gating {
            GatingMode::Heralded => 0.0,
            GatingMode::Random { rate } | GatingMode::Periodic { rate, .. } => rate,
        };
        let events = self.pump.mean_pair_rate() + self.signal.dark_rate + gate_rate;
        let len = if events > 0.0 { 2e5 / events } else { 10e-3 };
        len.clamp(1e-6, 10e-3).max(self.pre_roll())
    }
}
