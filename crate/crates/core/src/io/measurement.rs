//! Measurement files (`.meas`).
//!
//! ```text
//! [measured]          # rates in s^-1
//! r_p = 218e3
//! r_s = 88e3
//! heralding_rate = 81e3
//! r_c = 7200
//! r_i = 130
//! r_s_dark = 90
//! r_i_dark = 40
//! [system]            # times in ns unless a unit is given
//! eta_s = 0.60
//! eta_i = 0.18
//! delta_s = 0.54
//! delta_i = 0.63
//! zeta = 0.5
//! gate_period = 10 ns
//! [meta]
//! integration_time = 1 s
//! label = reference
//! ```
//!
//! `R0` is accepted as an alias of `heralding_rate`. Optional system keys:
//! `dead_time_signal`, `dead_time_generator`, `holdoff_idler`,
//! `coherence_time` (all default 0).

use std::fmt::Write as _;

use super::text::{format_quantity, Document, Reader, TextError};
use crate::inference::{InferenceError, MeasuredRates, SystemParams};

const SECTIONS: [&str; 3] = ["measured", "system", "meta"];

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFile {
    pub measured: MeasuredRates,
    pub params: SystemParams,
    /// Seconds each rate was counted for.
    pub integration_time: f64,
    pub label: Option<String>,
}

fn invalid(line: usize, e: InferenceError) -> TextError {
    TextError {
        line,
        message: e.to_string(),
    }
}

impl MeasurementFile {
    /// Parses and checks the invariants of both sections. Every error
    /// carries the line it refers to, when there is one.
    pub fn parse(text: &str) -> Result<Self, TextError> {
        let doc = Document::parse(text)?;
        doc.only_sections(&SECTIONS)?;
        let section_line = |name: &str| doc.section(name).map_or(0, |s| s.line);
        if doc.section("measured").is_none() {
            return Err(TextError {
                line: 0,
                message: "missing section [measured]".into(),
            });
        }
        if doc.section("system").is_none() {
            return Err(TextError {
                line: 0,
                message: "missing section [system]".into(),
            });
        }

        let mut r = Reader::new(&doc, "measured");
        let has_alias = r.line_of("R0") != 0;
        let heralding_rate = if has_alias && r.line_of("heralding_rate") == 0 {
            r.required_rate("R0")?
        } else {
            r.required_rate("heralding_rate")?
        };
        let measured = MeasuredRates {
            r_p: r.required_rate("r_p")?,
            r_s: r.required_rate("r_s")?,
            heralding_rate,
            r_c: r.required_rate("r_c")?,
            r_i: r.required_rate("r_i")?,
            r_s_dark: r.required_rate("r_s_dark")?,
            r_i_dark: r.required_rate("r_i_dark")?,
        };
        r.finish()?;

        let mut s = Reader::new(&doc, "system");
        let params = SystemParams {
            eta_s: s.required_number("eta_s")?,
            eta_i: s.required_number("eta_i")?,
            delta_s: s.required_number("delta_s")?,
            delta_i: s.required_number("delta_i")?,
            zeta: s.required_number("zeta")?,
            gate_period: s.required_time("gate_period")?,
            dead_time_signal: s.time_or("dead_time_signal", 0.0)?,
            dead_time_generator: s.time_or("dead_time_generator", 0.0)?,
            holdoff_idler: s.time_or("holdoff_idler", 0.0)?,
            coherence_time: s.time_or("coherence_time", 0.0)?,
        };
        let system_lines: Vec<(String, usize)> = doc
            .section("system")
            .map(|sec| {
                sec.entries
                    .iter()
                    .map(|e| (e.key.clone(), e.line))
                    .collect()
            })
            .unwrap_or_default();
        s.finish()?;

        let mut meta = Reader::new(&doc, "meta");
        let integration_time = meta.time_or("integration_time", f64::NAN)?;
        let integration_time = if integration_time.is_nan() {
            1.0
        } else {
            integration_time
        };
        if !(integration_time > 0.0) {
            return Err(TextError {
                line: meta.line_of("integration_time"),
                message: format!("integration_time = {integration_time} s must be > 0"),
            });
        }
        let label = match meta.word_or("label", "")? {
            ("", _) => None,
            (w, _) => Some(w.to_string()),
        };
        meta.finish()?;

        measured
            .validate()
            .map_err(|e| invalid(section_line("measured"), e))?;
        params.validate().map_err(|e| {
            let line = match &e {
                InferenceError::InvalidParameter { name, .. } => system_lines
                    .iter()
                    .find(|(k, _)| k == name)
                    .map_or(section_line("system"), |(_, l)| *l),
                _ => section_line("system"),
            };
            invalid(line, e)
        })?;

        Ok(MeasurementFile {
            measured,
            params,
            integration_time,
            label,
        })
    }

    pub fn to_text(&self) -> String {
        let m = &self.measured;
        let p = &self.params;
        let rate = Some("s^-1");
        let ns = Some("ns");
        let sections: [(&str, Vec<(&str, f64, Option<&str>)>); 3] = [
            (
                "measured",
                vec![
                    ("r_p", m.r_p, rate),
                    ("r_s", m.r_s, rate),
                    ("heralding_rate", m.heralding_rate, rate),
                    ("r_c", m.r_c, rate),
                    ("r_i", m.r_i, rate),
                    ("r_s_dark", m.r_s_dark, rate),
                    ("r_i_dark", m.r_i_dark, rate),
                ],
            ),
            (
                "system",
                vec![
                    ("eta_s", p.eta_s, None),
                    ("eta_i", p.eta_i, None),
                    ("delta_s", p.delta_s, None),
                    ("delta_i", p.delta_i, None),
                    ("zeta", p.zeta, None),
                    ("gate_period", p.gate_period * 1e9, ns),
                    ("dead_time_signal", p.dead_time_signal * 1e9, ns),
                    ("dead_time_generator", p.dead_time_generator * 1e9, ns),
                    ("holdoff_idler", p.holdoff_idler * 1e9, ns),
                    ("coherence_time", p.coherence_time * 1e9, ns),
                ],
            ),
            (
                "meta",
                vec![("integration_time", self.integration_time, Some("s"))],
            ),
        ];
        let mut out = String::new();
        for (name, entries) in sections {
            writeln!(out, "[{name}]").expect("string write");
            for (key, v, unit) in entries {
                writeln!(out, "{key} = {}", format_quantity(v, unit)).expect("string write");
            }
        }
        if let Some(l) = &self.label {
            writeln!(out, "label = {l}").expect("string write");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "\
[measured]
r_p = 218e3 s^-1
r_s = 88e3
R0 = 81e3 Hz
r_c = 7200
r_i = 130
r_s_dark = 90
r_i_dark = 40
[system]
eta_s = 0.60
eta_i = 18 %
delta_s = 0.54
delta_i = 0.63
zeta = 0.5
gate_period = 10
";

    #[test]
    fn parses_with_aliases_and_defaults() {
        let f = MeasurementFile::parse(GOLDEN).unwrap();
        assert_eq!(f.measured.heralding_rate, 81e3);
        assert!((f.params.eta_i - 0.18).abs() < 1e-15);
        assert!((f.params.gate_period - 10e-9).abs() < 1e-24);
        assert_eq!(f.integration_time, 1.0);
        assert_eq!(f.label, None);
    }

    #[test]
    fn round_trips_through_text() {
        let mut f = MeasurementFile::parse(GOLDEN).unwrap();
        f.params.dead_time_signal = 50e-9;
        f.integration_time = 10.0;
        f.label = Some("x1".into());
        let text = f.to_text();
        let g = MeasurementFile::parse(&text).unwrap();
        assert_eq!(g.measured, f.measured);
        assert_eq!(g.label, f.label);
        assert_eq!(g.integration_time, 10.0);
        assert!((g.params.dead_time_signal - 50e-9).abs() < 1e-20);
        assert!(
            text.starts_with("[measured]\nr_p = 218000 s^-1\n"),
            "{text}"
        );
    }

    #[test]
    fn missing_key_is_named() {
        let text = GOLDEN.replace("r_i = 130\n", "");
        let e = MeasurementFile::parse(&text).unwrap_err();
        assert!(e.message.contains("'r_i'"), "{e}");
        assert_eq!(e.line, 1);
    }

    #[test]
    fn invariant_violations_are_reported() {
        let e = MeasurementFile::parse(&GOLDEN.replace("r_c = 7200", "r_c = 9e4")).unwrap_err();
        assert!(
            e.message.contains("r_c") && e.message.contains("heralding_rate"),
            "{e}"
        );
        let e = MeasurementFile::parse(&GOLDEN.replace("zeta = 0.5", "zeta = 1.5")).unwrap_err();
        assert_eq!(e.line, 14);
        let e = MeasurementFile::parse(&format!("{GOLDEN}[extra]\n")).unwrap_err();
        assert_eq!(e.line, 16);
    }
}
