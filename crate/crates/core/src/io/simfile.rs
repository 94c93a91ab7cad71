//! Simulation configs (`.sim`). Every key is optional; missing keys take
//! the values of [`SimConfig::reference`].
//!
//! ```text
//! [source]
//! mode = cw                 # cw | pulsed
//! pair_rate = 1.345e6       # cw
//! mean_per_pulse = 0.1      # pulsed
//! pulse_rate = 100e6        # pulsed
//! [coupling]
//! gamma_s = 0.4034
//! gamma_i = 0.7292
//! gamma_c = 0.3112
//! zeta = 0.5
//! delta_s = 0.54
//! delta_i = 0.63
//! [signal]
//! efficiency = 0.60
//! dark_rate = 90
//! dead_time = 50 ns
//! jitter = 0 ns
//! generator_dead_time = 930 ns
//! [idler]
//! efficiency = 0.18
//! dark_rate = 49383 s^-1    # while the gate is open
//! holdoff = 0 ns
//! rise_time = 0 ns
//! [gate]
//! mode = heralded           # heralded | random | periodic
//! rate = 81e3               # random, periodic
//! phase = 0 ns              # periodic
//! period = 10 ns
//! delay = 95 ns
//! idler_delay = 100 ns
//! [run]
//! duration = 1 s
//! seed = 24301
//! event_budget = 5e9
//! segment_length = 1 ms     # omit to choose automatically
//! ```

use std::fmt::Write as _;

use super::text::{Document, Reader, TextError};
use crate::sim::{GatingMode, PumpMode, SimConfig, SimError};

const SECTIONS: [&str; 6] = ["source", "coupling", "signal", "idler", "gate", "run"];

/// Where each validated field lives in the file.
const FIELD_KEYS: [(&str, &str, &str); 21] = [
    ("pair_rate", "source", "pair_rate"),
    ("mean_per_pulse", "source", "mean_per_pulse"),
    ("pulse_rate", "source", "pulse_rate"),
    ("gamma_s", "coupling", "gamma_s"),
    ("gamma_i", "coupling", "gamma_i"),
    ("gamma_c", "coupling", "gamma_c"),
    ("gamma_s + gamma_i - gamma_c", "coupling", "gamma_c"),
    ("zeta", "coupling", "zeta"),
    ("delta_s", "coupling", "delta_s"),
    ("delta_i", "coupling", "delta_i"),
    ("eta_s", "signal", "efficiency"),
    ("eta_i", "idler", "efficiency"),
    ("signal dark_rate", "signal", "dark_rate"),
    ("signal dead_time", "signal", "dead_time"),
    ("signal jitter", "signal", "jitter"),
    ("generator_dead_time", "signal", "generator_dead_time"),
    ("idler dark_rate", "idler", "dark_rate"),
    ("holdoff", "idler", "holdoff"),
    ("rise_time", "idler", "rise_time"),
    ("gate_period", "gate", "period"),
    ("duration", "run", "duration"),
];

fn line_of(doc: &Document, section: &str, key: &str) -> usize {
    doc.section(section).map_or(0, |s| {
        s.entries
            .iter()
            .find(|e| e.key == key)
            .map_or(s.line, |e| e.line)
    })
}

fn bad_word(line: usize, key: &str, got: &str, allowed: &str) -> TextError {
    TextError {
        line,
        message: format!("'{got}' is not a valid {key} (expected {allowed})"),
    }
}

/// Parses a config and checks it with [`SimConfig::validate`].
pub fn parse_sim_config(text: &str) -> Result<SimConfig, TextError> {
    let doc = Document::parse(text)?;
    doc.only_sections(&SECTIONS)?;
    let base = SimConfig::reference();

    let mut r = Reader::new(&doc, "source");
    let (mode, mode_line) = r.word_or("mode", "cw")?;
    let pump = match mode {
        "cw" => PumpMode::Cw {
            pair_rate: r.rate_or("pair_rate", base.pump.mean_pair_rate())?,
        },
        "pulsed" => PumpMode::Pulsed {
            mean_per_pulse: r.number_or("mean_per_pulse", 0.1)?,
            pulse_rate: r.rate_or("pulse_rate", 100e6)?,
        },
        other => return Err(bad_word(mode_line, "source mode", other, "cw or pulsed")),
    };
    r.finish()?;

    let mut r = Reader::new(&doc, "coupling");
    let mut coupling = base.coupling;
    coupling.gamma_s = r.number_or("gamma_s", coupling.gamma_s)?;
    coupling.gamma_i = r.number_or("gamma_i", coupling.gamma_i)?;
    coupling.gamma_c = r.number_or("gamma_c", coupling.gamma_c)?;
    let zeta = r.number_or("zeta", base.zeta)?;
    let delta_s = r.number_or("delta_s", base.delta_s)?;
    let delta_i = r.number_or("delta_i", base.delta_i)?;
    r.finish()?;

    let mut r = Reader::new(&doc, "signal");
    let mut signal = base.signal;
    signal.efficiency = r.number_or("efficiency", signal.efficiency)?;
    signal.dark_rate = r.rate_or("dark_rate", signal.dark_rate)?;
    signal.dead_time = r.time_or("dead_time", signal.dead_time)?;
    signal.jitter = r.time_or("jitter", signal.jitter)?;
    let generator_dead_time = r.time_or("generator_dead_time", base.generator_dead_time)?;
    r.finish()?;

    let mut r = Reader::new(&doc, "idler");
    let mut idler = base.idler;
    idler.efficiency = r.number_or("efficiency", idler.efficiency)?;
    idler.dark_rate = r.rate_or("dark_rate", idler.dark_rate)?;
    idler.holdoff = r.time_or("holdoff", idler.holdoff)?;
    idler.rise_time = r.time_or("rise_time", idler.rise_time)?;
    r.finish()?;

    let mut r = Reader::new(&doc, "gate");
    let (mode, mode_line) = r.word_or("mode", "heralded")?;
    let gating = match mode {
        "heralded" => GatingMode::Heralded,
        "random" => GatingMode::Random {
            rate: r.rate_or("rate", 81e3)?,
        },
        "periodic" => GatingMode::Periodic {
            rate: r.rate_or("rate", 81e3)?,
            phase: r.time_or("phase", 0.0)?,
        },
        other => {
            return Err(bad_word(
                mode_line,
                "gate mode",
                other,
                "heralded, random or periodic",
            ))
        }
    };
    let gate_period = r.time_or("period", base.gate_period)?;
    let gate_delay = r.time_or("delay", base.gate_delay)?;
    let idler_delay = r.time_or("idler_delay", base.idler_delay)?;
    r.finish()?;

    let mut r = Reader::new(&doc, "run");
    let duration_line = r.line_of("duration");
    let duration = r.time_or("duration", base.duration)?;
    if duration_line != 0
        && doc.section("run").is_some_and(|s| {
            s.entries
                .iter()
                .any(|e| e.key == "duration" && e.unit.is_none())
        })
    {
        return Err(TextError {
            line: duration_line,
            message: "duration needs a unit (e.g. '10 s')".into(),
        });
    }
    let seed = r.u64_or("seed", base.seed)?;
    let event_budget = r.number_or("event_budget", base.event_budget)?;
    let segment_length = if r.line_of("segment_length") == 0 {
        None
    } else {
        Some(r.time_or("segment_length", 0.0)?)
    };
    r.finish()?;

    let config = SimConfig {
        pump,
        coupling,
        zeta,
        delta_s,
        delta_i,
        signal,
        generator_dead_time,
        idler,
        gate_period,
        gate_delay,
        idler_delay,
        gating,
        duration,
        seed,
        event_budget,
        segment_length,
    };
    config.validate().map_err(|e| {
        let line = match &e {
            SimError::InvalidConfig { name, .. } => FIELD_KEYS
                .iter()
                .find(|(field, _, _)| field == name)
                .map_or(0, |(_, section, key)| line_of(&doc, section, key)),
            _ => 0,
        };
        TextError {
            line,
            message: e.to_string(),
        }
    })?;
    Ok(config)
}

/// Writes every field, so the file reproduces `config` exactly when parsed.
pub fn write_sim_config(config: &SimConfig) -> String {
    let mut out = String::new();
    let mut section = |name: &str, entries: &[(&str, String)]| {
        writeln!(out, "[{name}]").expect("string write");
        for (k, v) in entries {
            writeln!(out, "{k} = {v}").expect("string write");
        }
    };
    // shortest exact spellings, so parsing gives back the same bits
    let exact = |v: f64| format!("{v:?}");
    let num = exact;
    let rate = |v: f64| format!("{v:?} s^-1");
    let secs = |v: f64| format!("{v:?} s");

    let source = match config.pump {
        PumpMode::Cw { pair_rate } => vec![("mode", "cw".into()), ("pair_rate", exact(pair_rate))],
        PumpMode::Pulsed {
            mean_per_pulse,
            pulse_rate,
        } => vec![
            ("mode", "pulsed".into()),
            ("mean_per_pulse", exact(mean_per_pulse)),
            ("pulse_rate", exact(pulse_rate)),
        ],
    };
    section("source", &source);
    let c = config.coupling;
    section(
        "coupling",
        &[
            ("gamma_s", exact(c.gamma_s)),
            ("gamma_i", exact(c.gamma_i)),
            ("gamma_c", exact(c.gamma_c)),
            ("zeta", num(config.zeta)),
            ("delta_s", num(config.delta_s)),
            ("delta_i", num(config.delta_i)),
        ],
    );
    let s = config.signal;
    section(
        "signal",
        &[
            ("efficiency", num(s.efficiency)),
            ("dark_rate", rate(s.dark_rate)),
            ("dead_time", secs(s.dead_time)),
            ("jitter", secs(s.jitter)),
            ("generator_dead_time", secs(config.generator_dead_time)),
        ],
    );
    let i = config.idler;
    section(
        "idler",
        &[
            ("efficiency", num(i.efficiency)),
            ("dark_rate", rate(i.dark_rate)),
            ("holdoff", secs(i.holdoff)),
            ("rise_time", secs(i.rise_time)),
        ],
    );
    let mut gate = match config.gating {
        GatingMode::Heralded => vec![("mode", "heralded".to_string())],
        GatingMode::Random { rate: r } => vec![("mode", "random".into()), ("rate", rate(r))],
        GatingMode::Periodic { rate: r, phase } => vec![
            ("mode", "periodic".into()),
            ("rate", rate(r)),
            ("phase", secs(phase)),
        ],
    };
    gate.extend([
        ("period", secs(config.gate_period)),
        ("delay", secs(config.gate_delay)),
        ("idler_delay", secs(config.idler_delay)),
    ]);
    section("gate", &gate);
    let mut run = vec![
        ("duration", format!("{:?} s", config.duration)),
        ("seed", config.seed.to_string()),
        ("event_budget", num(config.event_budget)),
    ];
    if let Some(len) = config.segment_length {
        run.push(("segment_length", format!("{len:?} s")));
    }
    section("run", &run);
    out
}
