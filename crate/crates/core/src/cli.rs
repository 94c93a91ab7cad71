//! The `hsps` command line. Exit codes: 0 success, 2 input or schema
//! error, 3 computation error (including failed validation checks).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::inference::{characterize_with, CharacterizeOptions};
use crate::io::report::{self, CurveSample};
use crate::io::{parse_sim_config, MeasurementFile, Table, TextError};
use crate::sim::{self, timetag, GatingMode, SimConfig, SimError};
use crate::stats::{self, StatsError};
use crate::validate;

#[derive(Debug, Parser)]
#[command(
    name = "hsps",
    version,
    about = "Heralded single-photon source characterization and simulation"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Global {
    /// Input file: a measurement file (.meas) or a simulation config (.sim).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, env = "HSPS_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
    /// RNG seed, overriding the one in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// START:STOP:STEPS, STEPS points including both ends.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Print nothing on success.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infer true rates, couplings and photon statistics from a .meas file.
    Characterize,
    /// Run the simulator on a .sim config (reference setup if none).
    Simulate {
        /// Simulate the four measurement passes and write simulated.meas.
        #[arg(long)]
        measure: bool,
        /// Write the raw event stream as binary time tags to this file.
        #[arg(long, value_name = "FILE")]
        time_tags: Option<PathBuf>,
        /// Simulated time in seconds, overriding the config.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// g2(0) against heralding load b0 (default grid 0.01:0.99:99), or with
    /// --pump, simulated rates against pump scale.
    Sweep {
        /// Add Monte Carlo columns with at least this many gates per point.
        #[arg(long)]
        mc_gates: Option<u64>,
        /// Gate period in ns when no measurement file is given.
        #[arg(long, default_value_t = 10.0)]
        gate_ns: f64,
        /// Sweep the pump of a .sim config; the grid holds pump scales.
        #[arg(long)]
        pump: bool,
    },
    /// Load b0 where g2(0) = 1 for each heralding probability.
    Crossings {
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.25, 0.1, 1e-12])]
        p_cor: Vec<f64>,
    },
    /// Monte Carlo against the closed forms plus an inversion round trip.
    Validate {
        /// Minimum gates per matrix point.
        #[arg(long, default_value_t = 1_000_000)]
        gates: u64,
        /// Simulated seconds for the round trip (reference setup or --config).
        #[arg(long, default_value_t = 10.0)]
        round_trip_seconds: f64,
    },
    /// Heralded click rate against gate delay in ns (default grid 80:120:41).
    DelayScan,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Compute(String),
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) | CliError::ChecksFailed(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Compute(m) | CliError::ChecksFailed(m) => m,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn schema(path: &Path, e: TextError) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::InvalidConfig { .. } => CliError::Input(e.to_string()),
        other => CliError::Compute(other.to_string()),
    }
}

fn stats_error(e: StatsError) -> CliError {
    CliError::Compute(e.to_string())
}

/// Parses `START:STOP:STEPS` into `STEPS` evenly spaced values.
pub fn parse_grid(spec: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, steps] = parts[..] else {
        return Err(format!("grid '{spec}' is not START:STOP:STEPS"));
    };
    let num = |s: &str| -> std::result::Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("'{s}' in grid '{spec}' is not a finite number"))
    };
    let (start, stop) = (num(start)?, num(stop)?);
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| format!("'{steps}' in grid '{spec}' is not a point count"))?;
    Ok(match steps {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    })
}

fn grid_or(g: &Global, default: &str) -> Result<Vec<f64>> {
    parse_grid(g.grid.as_deref().unwrap_or(default)).map_err(CliError::Input)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_measurement(g: &Global) -> Result<Option<MeasurementFile>> {
    g.config
        .as_deref()
        .map(|p| MeasurementFile::parse(&read(p)?).map_err(|e| schema(p, e)))
        .transpose()
}

fn load_sim(g: &Global) -> Result<SimConfig> {
    let mut config = match g.config.as_deref() {
        Some(p) => parse_sim_config(&read(p)?).map_err(|e| schema(p, e))?,
        None => SimConfig::reference(),
    };
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    Ok(config)
}

struct Output<'a> {
    dir: &'a Path,
    quiet: bool,
}

impl Output<'_> {
    fn new(g: &Global) -> Result<Output<'_>> {
        fs::create_dir_all(&g.out)
            .map_err(|e| CliError::Input(format!("output directory {}: {e}", g.out.display())))?;
        Ok(Output {
            dir: &g.out,
            quiet: g.quiet,
        })
    }

    fn file(&self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.say(&format!("wrote {}", path.display()));
        Ok(())
    }

    fn table(&self, name: &str, t: &Table) -> Result<()> {
        self.file(name, t.to_string_lossy().as_bytes())
    }

    fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }
}

fn characterize_cmd(g: &Global) -> Result<()> {
    let Some(path) = g.config.as_deref() else {
        return Err(CliError::Input(
            "characterize needs --config FILE.meas".into(),
        ));
    };
    let file = load_measurement(g)?.expect("config given");
    let options = CharacterizeOptions {
        integration_time: file.integration_time,
    };
    let r = characterize_with(&file.measured, &file.params, &options)
        .map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))?;
    let out = Output::new(g)?;
    let label = file.label.as_deref();
    out.file(
        "characterization.txt",
        report::characterization_text(&r, label).as_bytes(),
    )?;
    out.table("characterization.csv", &report::figures_table(&r))?;
    if !out.quiet {
        print!("{}", report::characterization_summary(&r));
    }
    Ok(())
}

fn simulate_cmd(
    g: &Global,
    measure: bool,
    time_tags: Option<&Path>,
    duration: Option<f64>,
) -> Result<()> {
    let mut config = load_sim(g)?;
    if let Some(d) = duration {
        config.duration = d;
    }
    config.validate().map_err(sim_error)?;
    let out = Output::new(g)?;
    let run = if time_tags.is_some() {
        sim::simulate_events(&config)
    } else {
        sim::run(&config)
    }
    .map_err(sim_error)?;
    let rep = sim::SimReport::from_run(&run);
    out.table("sim_rates.csv", &report::sim_rates_table(&rep, config.seed))?;
    if let Some(s) = &rep.statistics {
        let expected = match (config.gating, config.expected_gate_statistics()) {
            (GatingMode::Heralded, Ok(e)) => Some(e),
            _ => None,
        };
        out.table(
            "sim_histogram.csv",
            &report::histogram_table(s, expected.as_ref()),
        )?;
        if let Some(g2) = s.g2_zero {
            out.say(&format!(
                "gates = {}   P(0) = {:.4}   P(1) = {:.4}   g2(0) = {:.5} +- {:.5}",
                s.gates,
                s.probability(0).value,
                s.probability(1).value,
                g2.value,
                g2.std_error
            ));
        }
    }
    if let (Some(path), Some(events)) = (time_tags, &run.events) {
        let f = fs::File::create(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(f);
        let n = timetag::write_time_tags(events, &mut w)
            .and_then(|n| w.flush().map(|_| n))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        out.say(&format!("wrote {n} time tags to {}", path.display()));
    }
    if measure {
        let m = sim::simulate_measurements(&config).map_err(sim_error)?;
        let file = MeasurementFile {
            measured: m.measured,
            params: m.params,
            integration_time: m.integration_time,
            label: Some(format!("simulated-seed-{}", config.seed)),
        };
        out.file("simulated.meas", file.to_text().as_bytes())?;
    }
    Ok(())
}

/// Simulated `g2(0)` for the CW and pulsed references at load `b0`.
///
/// The CW source heralds every pair with no generator dead time, so its
/// accidental mean is `b0` itself rather than the closed-form CW load
/// relation; it approaches `2 (1 - exp(-b0))`.
pub fn curve_sample(b0: f64, gate_period: f64, gates: u64, seed: u64) -> Result<CurveSample> {
    if !(b0 > 0.0 && b0 < 1.0) {
        return Ok(CurveSample {
            g2_cw: None,
            g2_pulsed: None,
        });
    }
    let n = 1.02 * gates as f64;
    let rate = b0 / gate_period;
    let cw = SimConfig {
        duration: n / rate,
        seed,
        ..SimConfig::ideal(rate, gate_period)
    };
    let pulsed = sim::pulsed_reference(b0, 1.0 / gate_period, n / rate, seed);
    let g2 = |c: &SimConfig| -> Result<_> {
        Ok(sim::simulate(c)
            .map_err(sim_error)?
            .statistics
            .and_then(|s| s.g2_zero))
    };
    Ok(CurveSample {
        g2_cw: g2(&cw)?,
        g2_pulsed: g2(&pulsed)?,
    })
}

fn sweep_cmd(g: &Global, mc_gates: Option<u64>, gate_ns: f64, pump: bool) -> Result<()> {
    if pump {
        return pump_sweep_cmd(g);
    }
    let grid = grid_or(g, "0.01:0.99:99")?;
    let meas = load_measurement(g)?;
    let (gate_period, model_p_cor) = match &meas {
        Some(f) => {
            let opts = CharacterizeOptions {
                integration_time: f.integration_time,
            };
            let r = characterize_with(&f.measured, &f.params, &opts)
                .map_err(|e| CliError::Compute(e.to_string()))?;
            (f.params.gate_period, Some(r.derived.p_cor()))
        }
        None => {
            if !(gate_ns > 0.0 && gate_ns.is_finite()) {
                return Err(CliError::Input(format!("--gate-ns {gate_ns} must be > 0")));
            }
            (gate_ns * 1e-9, None)
        }
    };
    if let Some(&bad) = grid.iter().find(|b| **b < 0.0) {
        return Err(CliError::Input(format!(
            "grid value b0 = {bad} must be >= 0"
        )));
    }
    let rates: Vec<f64> = grid.iter().map(|b0| b0 / gate_period).collect();
    let points = stats::g2_curves(gate_period, &rates, model_p_cor).map_err(stats_error)?;
    // b0 recomputed from the rate can drift in the last digit
    let points: Vec<_> = points
        .into_iter()
        .zip(&grid)
        .map(|(p, &b0)| stats::LoadCurvePoint { b0, ..p })
        .collect();
    let samples = match mc_gates {
        Some(n) => {
            let seed = g.seed.unwrap_or(SimConfig::reference().seed);
            let s = grid
                .iter()
                .enumerate()
                .map(|(i, &b0)| curve_sample(b0, gate_period, n, seed.wrapping_add(i as u64)))
                .collect::<Result<Vec<_>>>()?;
            Some(s)
        }
        None => None,
    };
    let out = Output::new(g)?;
    out.table(
        "g2_curves.csv",
        &report::curve_table(&points, gate_period, model_p_cor, samples.as_deref()),
    )
}

fn pump_sweep_cmd(g: &Global) -> Result<()> {
    let config = load_sim(g)?;
    let scales = grid_or(g, "0.1:2:6")?;
    let points = sim::sweep_pump_power(&config, &scales).map_err(sim_error)?;
    let model: Vec<f64> = scales
        .iter()
        .map(|&k| {
            let c = SimConfig {
                pump: config.pump.scaled(k),
                ..config
            };
            c.expected_gate_statistics()
                .and_then(|e| stats::g2_zero(&e).map_err(SimError::from))
                .unwrap_or(f64::NAN)
        })
        .collect();
    let out = Output::new(g)?;
    out.table(
        "pump_sweep.csv",
        &report::pump_sweep_table(&points, Some(&model)),
    )
}

fn crossings_cmd(g: &Global, p_cor: &[f64]) -> Result<()> {
    let mut rows = Vec::new();
    for &p in p_cor {
        match stats::find_poisson_crossing(p) {
            Ok(b0) => rows.push((p, Some(b0))),
            Err(StatsError::NoCrossing { .. }) => rows.push((p, None)),
            Err(e) => return Err(CliError::Input(e.to_string())),
        }
    }
    let out = Output::new(g)?;
    for (p, b0) in &rows {
        match b0 {
            Some(b) => out.say(&format!("p_cor = {}: b0 = {b:.6}", crate::io::fmt_sig(*p))),
            None => out.say(&format!("p_cor = {}: no crossing", crate::io::fmt_sig(*p))),
        }
    }
    out.table("crossings.csv", &report::crossings_table(&rows))
}

fn validate_cmd(g: &Global, gates: u64, round_trip_seconds: f64) -> Result<()> {
    let mut config = load_sim(g)?;
    config.duration = round_trip_seconds;
    config.validate().map_err(sim_error)?;
    let seed = g.seed.unwrap_or(config.seed);
    let summary = validate::validate(gates, seed, Some(&config))
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let out = Output::new(g)?;
    for c in &summary.checks {
        out.say(&c.to_string());
    }
    out.table("validation.csv", &report::validation_table(&summary))?;
    let failed = summary.checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(format!(
            "{failed} of {} checks outside {} standard errors",
            summary.checks.len(),
            validate::Z_LIMIT
        )));
    }
    out.say(&format!("all {} checks passed", summary.checks.len()));
    Ok(())
}

fn delay_scan_cmd(g: &Global) -> Result<()> {
    let config = load_sim(g)?;
    let delays: Vec<f64> = grid_or(g, "80:120:41")?.iter().map(|d| d * 1e-9).collect();
    let points = sim::delay_scan(&config, &delays).map_err(sim_error)?;
    let out = Output::new(g)?;
    out.table(
        "delay_scan.csv",
        &report::delay_table(&points, config.gate_period),
    )
}

pub fn execute(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Characterize => characterize_cmd(g),
        Command::Simulate {
            measure,
            time_tags,
            duration,
        } => simulate_cmd(g, *measure, time_tags.as_deref(), *duration),
        Command::Sweep {
            mc_gates,
            gate_ns,
            pump,
        } => sweep_cmd(g, *mc_gates, *gate_ns, *pump),
        Command::Crossings { p_cor } => crossings_cmd(g, p_cor),
        Command::Validate {
            gates,
            round_trip_seconds,
        } => validate_cmd(g, *gates, *round_trip_seconds),
        Command::DelayScan => delay_scan_cmd(g),
    }
}

/// Parses the process arguments, runs, and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
