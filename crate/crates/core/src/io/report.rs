//! Output documents: the characterization report and the CSV tables behind
//! each command.

use std::fmt::Write as _;

use super::table::{fmt_sig, Cell, Table};
use super::text::format_quantity;
use crate::inference::{CharacterizationReport, Figures};
use crate::sim::{DelayPoint, Estimate, GateStatistics, SimReport, SweepPoint};
use crate::stats::{exact_count_probability, CurveValue, GatedStatisticsInput, LoadCurvePoint};
use crate::validate::ValidationSummary;

/// Unit of each entry of [`Figures::NAMES`].
const FIGURE_UNITS: [Option<&str>; 16] = [
    Some("s^-1"),
    Some("s^-1"),
    Some("s^-1"),
    Some("s^-1"),
    None,
    None,
    None,
    None,
    None,
    None,
    None,
    None,
    None,
    None,
    None,
    None,
];

/// Photon numbers listed in the report's distribution section.
pub const REPORT_MAX_N: usize = 5;

fn push(out: &mut String, key: &str, value: f64, unit: Option<&str>) {
    writeln!(out, "{key} = {}", format_quantity(value, unit)).expect("string write");
}

/// Structured-text report, readable back with [`super::text::Document`].
/// Warnings are written as comment lines.
pub fn characterization_text(r: &CharacterizationReport, label: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(l) = label {
        writeln!(out, "# {l}").expect("string write");
    }
    for w in &r.warnings {
        writeln!(out, "# warning: {w}").expect("string write");
    }
    let d = &r.derived;
    out.push_str("[derived]\n");
    push(&mut out, "R_p", d.pair_rate, Some("s^-1"));
    push(&mut out, "R_s", d.signal_fiber_rate, Some("s^-1"));
    push(&mut out, "R_i", d.idler_fiber_rate, Some("s^-1"));
    push(&mut out, "R_c", d.correlated_rate, Some("s^-1"));
    push(&mut out, "b", d.accidental_mean, None);
    push(&mut out, "p_cor", d.p_cor(), None);
    let c = &r.coupling;
    out.push_str("[coupling]\n");
    push(&mut out, "gamma_s", c.gamma_s, None);
    push(&mut out, "gamma_i", c.gamma_i, None);
    push(&mut out, "gamma_c", c.gamma_c, None);
    push(&mut out, "mu_i_given_s", c.mu_i_given_s, None);
    push(&mut out, "mu_s_given_i", c.mu_s_given_i, None);
    out.push_str("[statistics]\n");
    push(&mut out, "g2_zero", r.g2_zero, None);
    push(&mut out, "g2_zero_small_b", r.g2_small_b, None);
    push(
        &mut out,
        "g2_zero_from_couplings",
        r.g2_from_couplings,
        None,
    );
    push(&mut out, "mu_her", r.mu_her, None);
    push(&mut out, "P_at_least_1", r.figures.p_at_least_one, None);
    push(&mut out, "P_at_least_2", r.figures.p_at_least_two, None);
    out.push_str("[distribution]\n");
    for n in 0..=REPORT_MAX_N {
        push(
            &mut out,
            &format!("P{n}"),
            r.distribution.probability(n),
            None,
        );
    }
    out.push_str("[uncertainty]\n");
    push(&mut out, "integration_time", r.integration_time, Some("s"));
    let u = r.uncertainties.to_array();
    for ((name, v), unit) in Figures::NAMES.iter().zip(u).zip(FIGURE_UNITS) {
        push(&mut out, name, v, unit);
    }
    out
}

/// Every figure with its one-sigma uncertainty.
pub fn figures_table(r: &CharacterizationReport) -> Table {
    let mut t = Table::new(&["quantity", "value", "std_error", "unit"]);
    t.comment("characterization of a measurement set");
    t.comment(format!(
        "std_error: Poisson counting over {} s per rate, propagated to first order",
        fmt_sig(r.integration_time)
    ));
    let (v, u) = (r.figures.to_array(), r.uncertainties.to_array());
    for i in 0..Figures::NAMES.len() {
        t.row(vec![
            Figures::NAMES[i].into(),
            v[i].into(),
            u[i].into(),
            FIGURE_UNITS[i].unwrap_or("1").into(),
        ]);
    }
    t
}

/// A few lines for the terminal.
pub fn characterization_summary(r: &CharacterizationReport) -> String {
    let (f, u) = (&r.figures, &r.uncertainties);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "R_p = {:.4e} s^-1   R_s = {:.4e} s^-1   R_i = {:.4e} s^-1   R_c = {:.4e} s^-1",
        f.pair_rate, f.signal_fiber_rate, f.idler_fiber_rate, f.correlated_rate
    );
    let _ = writeln!(
        s,
        "gamma_s = {:.4}   gamma_i = {:.4}   gamma_c = {:.4}   mu_i|s = {:.4}   mu_s|i = {:.4}",
        f.gamma_s, f.gamma_i, f.gamma_c, f.mu_i_given_s, f.mu_s_given_i
    );
    let _ = writeln!(
        s,
        "b = {:.4e}   P(0) = {:.4}   P(1) = {:.4}   P(m>=2) = {:.4e}",
        f.accidental_mean, f.p0, f.p1, f.p_at_least_two
    );
    let _ = writeln!(
        s,
        "g2(0) = {:.5} +- {:.5}   mu_her = {:.4}",
        f.g2_zero, u.g2_zero, f.mu_her
    );
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

fn curve_cell(v: CurveValue) -> Cell {
    match v {
        CurveValue::Value(x) => x.into(),
        CurveValue::Undefined => "undefined".into(),
        CurveValue::Diverged => "diverged".into(),
    }
}

/// Monte Carlo counterparts of the CW and pulsed curves at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub g2_cw: Option<Estimate>,
    pub g2_pulsed: Option<Estimate>,
}

/// `g2(0)` against heralding load. `model_p_cor` is echoed in the header;
/// `samples`, when given, adds simulated columns (one entry per point).
pub fn curve_table(
    points: &[LoadCurvePoint],
    gate_period: f64,
    model_p_cor: Option<f64>,
    samples: Option<&[CurveSample]>,
) -> Table {
    let mut header = vec![
        "b0",
        "R0",
        "g2_cw",
        "g2_random",
        "g2_pulsed",
        "g2_experimental_model",
    ];
    if samples.is_some() {
        header.extend(["g2_cw_mc", "g2_cw_mc_se", "g2_pulsed_mc", "g2_pulsed_mc_se"]);
    }
    let mut t = Table::new(&header);
    t.comment("g2(0) of the heralded output against the heralding load b0 = R0 * gate_period");
    t.comment("g2_cw: CW pump, lossless heralding, Poisson accidentals");
    t.comment("g2_random: the same source gated at random (no heralded photon)");
    t.comment("g2_pulsed: pulsed pump, one thermal mode per pulse, pulse period = gate period");
    match model_p_cor {
        Some(p) => t.comment(format!(
            "g2_experimental_model: CW pump with heralding probability p_cor = R_c/R_s = {}",
            fmt_sig(p)
        )),
        None => t.comment("g2_experimental_model: empty, no measurement file given"),
    };
    t.comment(format!("gate_period = {} s", fmt_sig(gate_period)));
    if samples.is_some() {
        t.comment("*_mc: Monte Carlo estimate at the same b0 with its standard error");
        t.comment("g2_cw_mc: CW source heralding every pair, no generator dead time, so b = b0");
        t.comment(
            "and g2 tends to 2 * (1 - exp(-b0)); g2_cw takes b = b0/(1-b0) - b0 and lies below it",
        );
    }
    let est = |e: Option<Estimate>| -> [Cell; 2] {
        match e {
            Some(e) => [e.value.into(), e.std_error.into()],
            None => ["".into(), "".into()],
        }
    };
    for (i, p) in points.iter().enumerate() {
        let mut row = vec![
            p.b0.into(),
            p.heralding_rate.into(),
            curve_cell(p.g2_cw),
            curve_cell(p.g2_random),
            curve_cell(p.g2_pulsed),
            p.g2_model.map_or("".into(), curve_cell),
        ];
        if let Some(s) = samples {
            let s = s.get(i).copied().unwrap_or(CurveSample {
                g2_cw: None,
                g2_pulsed: None,
            });
            row.extend(est(s.g2_cw));
            row.extend(est(s.g2_pulsed));
        }
        t.row(row);
    }
    t
}

/// Load where `g2(0) = 1`, or a `no-crossing` flag.
pub fn crossings_table(rows: &[(f64, Option<f64>)]) -> Table {
    let mut t = Table::new(&["p_cor", "b0_crossing", "status"]);
    t.comment("heralding load b0 at which g2(0) = 1 for CW pumping with Poisson accidentals");
    t.comment("status no-crossing: g2(0) stays at or above 1 over 0 < b0 < 1");
    for &(p, b0) in rows {
        t.row(match b0 {
            Some(b) => vec![p.into(), b.into(), "ok".into()],
            None => vec![p.into(), "".into(), "no-crossing".into()],
        });
    }
    t
}

/// Empirical rates of one simulated run.
pub fn sim_rates_table(r: &SimReport, seed: u64) -> Table {
    let mut t = Table::new(&["quantity", "value", "std_error", "unit"]);
    t.comment("rates observed in a simulated run; std_error from Poisson counting");
    t.comment(format!(
        "duration = {} s, seed = {seed}",
        fmt_sig(r.duration)
    ));
    let x = &r.rates;
    let rows = [
        ("pair_rate", x.pair_rate),
        ("signal_fiber_rate", x.signal_fiber_rate),
        ("idler_fiber_rate", x.idler_fiber_rate),
        ("correlated_rate", x.correlated_rate),
        ("signal_click_rate", x.signal_click_rate),
        ("gate_rate", x.gate_rate),
        ("click_rate", x.click_rate),
    ];
    for (name, e) in rows {
        t.row(vec![
            name.into(),
            e.value.into(),
            e.std_error.into(),
            "s^-1".into(),
        ]);
    }
    if let Some(s) = &r.statistics {
        let g2 = s.g2_zero.unwrap_or(Estimate {
            value: f64::NAN,
            std_error: f64::NAN,
        });
        t.row(vec![
            "gates".into(),
            Cell::Int(s.gates),
            "".into(),
            "1".into(),
        ]);
        t.row(vec![
            "g2_zero".into(),
            g2.value.into(),
            g2.std_error.into(),
            "1".into(),
        ]);
        t.row(vec![
            "twin_fraction".into(),
            s.twin_fraction.value.into(),
            s.twin_fraction.std_error.into(),
            "1".into(),
        ]);
    }
    t
}

/// Photons per gate. `expected`, when given, adds the closed-form column.
pub fn histogram_table(s: &GateStatistics, expected: Option<&GatedStatisticsInput>) -> Table {
    let mut header = vec!["n", "gates", "probability", "std_error"];
    if expected.is_some() {
        header.push("expected");
    }
    let mut t = Table::new(&header);
    t.comment("number of photons inside each gate; std_error binomial");
    if let Some(e) = expected {
        t.comment(format!(
            "expected: closed form with p_cor = {} and b = {}",
            fmt_sig(e.p_cor()),
            fmt_sig(e.b())
        ));
    }
    for (n, &count) in s.histogram.iter().enumerate() {
        let p = s.probability(n);
        let mut row = vec![
            Cell::Int(n as u64),
            Cell::Int(count),
            p.value.into(),
            p.std_error.into(),
        ];
        if let Some(e) = expected {
            row.push(exact_count_probability(e, n as u32).into());
        }
        t.row(row);
    }
    t
}

/// Heralded click rate against gate delay.
pub fn delay_table(points: &[DelayPoint], gate_period: f64) -> Table {
    let mut t = Table::new(&["gate_delay_ns", "gates", "click_rate", "std_error"]);
    t.comment("heralded idler click rate against the delay between herald and gate opening");
    t.comment(format!("gate_period = {} ns", fmt_sig(gate_period * 1e9)));
    for p in points {
        t.row(vec![
            (p.gate_delay * 1e9).into(),
            Cell::Int(p.gates),
            p.click_rate.value.into(),
            p.click_rate.std_error.into(),
        ]);
    }
    t
}

/// Simulated rates and `g2(0)` against pump scale. `model` gives the
/// closed-form `g2(0)` expected at each point, when supplied.
pub fn pump_sweep_table(points: &[SweepPoint], model: Option<&[f64]>) -> Table {
    let mut header = vec![
        "scale",
        "pair_rate",
        "r_s",
        "R0",
        "r_c",
        "r_i",
        "b0",
        "g2_zero",
        "g2_std_error",
    ];
    if model.is_some() {
        header.push("g2_model");
    }
    let mut t = Table::new(&header);
    t.comment("simulated count rates and heralded g2(0) with the pump rate scaled");
    t.comment("r_i: idler clicks with random gates at the same gate rate");
    if model.is_some() {
        t.comment("g2_model: closed form for the configured source, p_cor from the heralding chain, b = gate_period * R_i");
    }
    for (i, p) in points.iter().enumerate() {
        let g2 = p.g2_zero.unwrap_or(Estimate {
            value: f64::NAN,
            std_error: f64::NAN,
        });
        let mut row: Vec<Cell> = vec![
            p.scale.into(),
            p.pair_rate.into(),
            p.signal_click_rate.value.into(),
            p.heralding_rate.value.into(),
            p.heralded_click_rate.value.into(),
            p.accidental_click_rate.into(),
            p.b0.into(),
            g2.value.into(),
            g2.std_error.into(),
        ];
        if let Some(m) = model {
            row.push(m.get(i).copied().unwrap_or(f64::NAN).into());
        }
        t.row(row);
    }
    t
}

pub fn validation_table(s: &ValidationSummary) -> Table {
    let mut t = Table::new(&["check", "value", "expected", "std_error", "z", "pass"]);
    t.comment("Monte Carlo against closed forms and inversion round trip");
    t.comment(format!(
        "smallest gate count over the matrix: {}",
        s.min_gates_seen
    ));
    for c in &s.checks {
        t.row(vec![
            c.name.as_str().into(),
            c.value.into(),
            c.expected.into(),
            c.std_error.into(),
            c.z().into(),
            if c.passed() { "yes" } else { "no" }.into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{characterize, MeasuredRates, SystemParams};
    use crate::io::text::{Document, Reader};

    fn golden() -> CharacterizationReport {
        let m = MeasuredRates {
            r_p: 218e3,
            r_s: 88e3,
            heralding_rate: 81e3,
            r_c: 7200.0,
            r_i: 130.0,
            r_s_dark: 90.0,
            r_i_dark: 40.0,
        };
        let p = SystemParams {
            eta_s: 0.6,
            eta_i: 0.18,
            delta_s: 0.54,
            delta_i: 0.63,
            zeta: 0.5,
            gate_period: 10e-9,
            dead_time_signal: 0.0,
            dead_time_generator: 0.0,
            holdoff_idler: 0.0,
            coherence_time: 0.0,
        };
        characterize(&m, &p).unwrap()
    }

    #[test]
    fn report_reads_back() {
        let r = golden();
        let text = characterization_text(&r, Some("golden"));
        let doc = Document::parse(&text).unwrap();
        let mut s = Reader::new(&doc, "statistics");
        let g2 = s.required_number("g2_zero").unwrap();
        assert_eq!(fmt_sig(g2), fmt_sig(r.g2_zero));
        let mut d = Reader::new(&doc, "derived");
        assert!((d.required_rate("R_i").unwrap() / r.derived.idler_fiber_rate - 1.0).abs() < 1e-8);
        assert!(Reader::new(&doc, "distribution").exists());
    }

    #[test]
    fn curve_table_flags_divergence() {
        let pts = crate::stats::g2_curves(1.0, &[0.5, 1.0], Some(0.5)).unwrap();
        let csv = curve_table(&pts, 1.0, Some(0.5), None).to_string_lossy();
        let last = csv.lines().last().unwrap();
        assert!(last.starts_with("1,1,diverged,"), "{last}");
    }

    #[test]
    fn crossing_rows() {
        let csv = crossings_table(&[(1.0, Some(0.55)), (1e-6, None)]).to_string_lossy();
        assert!(csv.ends_with("1,0.55,ok\n1e-6,,no-crossing\n"), "{csv}");
    }
}
