//! Command-line driver.
//!
//! Every command produces a [`Report`] with the stable layout
//! `{"command", "config", "results", "checks", "version"}`. Output is a pure
//! function of the configuration.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::antisym::{antisym_dimension, antisymmetric_state, LambdaMatrix};
use crate::combinatorics::{binomial, factorial};
use crate::error::Error;
use crate::filter::{
    bell_filter_unitary, check_sufficiency, coincidence_project, GeneralizedBellIndex,
    ETA_CONSTANCY_TOL,
};
use crate::optics::apply_unitary;
use crate::prep::run_prepare_antisymmetric;
use crate::teleport::{
    bell_filter_response, efficiency_curve, run_collective, run_single_qudit, Mode, QuditInput,
    TeleportReport,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

pub const FIDELITY_TOL: f64 = 1e-9;
pub const PROBABILITY_TOL: f64 = 1e-9;
pub const ETA_TOL: f64 = 1e-12;
pub const COINCIDENCE_TOL: f64 = 1e-12;
pub const SELECTIVITY_TOL: f64 = 1e-12;
pub const PREP_PROBABILITY_TOL: f64 = 1e-12;
pub const PREP_FIDELITY_TOL: f64 = 1e-10;

const DEFAULT_EFFICIENCY_D: usize = 8;
const MAX_DIMS_D: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Teleport,
    Collective,
    FilterCheck,
    Prepare,
    Efficiency,
    Dims,
    BellSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Parser)]
#[command(
    name = "qudit-teleport",
    version,
    about = "Simulate OAM qudit teleportation with antisymmetric photon states"
)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Number of OAM labels (and photons in the antisymmetric state).
    #[arg(long)]
    pub d: Option<usize>,
    /// Photons on Alice's side for `collective`.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Report path; standard output when absent.
    #[arg(long = "out")]
    pub output_path: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Mode::PhysicalFilter)]
    pub mode: Mode,
    /// Replaces every numeric check tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            d: None,
            n: None,
            seed: 0,
            trials: 1,
            output_path: None,
            format: Format::Json,
            mode: Mode::PhysicalFilter,
            tolerance: None,
        }
    }

    /// Command-specific parameter completeness.
    pub fn validate(&self) -> Result<(), String> {
        let needs_d = !matches!(self.command, Command::Efficiency);
        if needs_d && self.d.is_none() {
            return Err(format!("--d is required for {}", self.command_name()));
        }
        match self.command {
            Command::Collective if self.n.is_none() => {
                return Err("--n is required for collective".into())
            }
            Command::Teleport | Command::Collective if self.trials == 0 => {
                return Err("--trials must be at least 1".into())
            }
            _ => {}
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(format!(
                    "--tolerance must be a finite non-negative number, got {t}"
                ));
            }
        }
        if self.n.is_some() && self.command != Command::Collective {
            return Err(format!("--n is not used by {}", self.command_name()));
        }
        Ok(())
    }

    pub fn command_name(&self) -> &'static str {
        match self.command {
            Command::Teleport => "teleport",
            Command::Collective => "collective",
            Command::FilterCheck => "filter-check",
            Command::Prepare => "prepare",
            Command::Efficiency => "efficiency",
            Command::Dims => "dims",
            Command::BellSweep => "bell-sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(value: f64, tolerance: f64) -> Self {
        Check {
            pass: value <= tolerance,
            value,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: RunConfig,
    pub results: Vec<Map<String, Value>>,
    pub checks: Map<String, Value>,
    pub version: &'static str,
}

impl Report {
    fn new(config: &RunConfig) -> Self {
        Report {
            command: config.command_name(),
            config: config.clone(),
            results: Vec::new(),
            checks: Map::new(),
            version: VERSION,
        }
    }

    fn limit(&self, default: f64) -> f64 {
        self.config.tolerance.unwrap_or(default)
    }

    fn check(&mut self, name: &str, check: Check) {
        self.checks.insert(
            name.to_string(),
            serde_json::to_value(check).expect("plain struct"),
        );
    }

    fn row(&mut self, row: Value) {
        match row {
            Value::Object(m) => self.results.push(m),
            _ => unreachable!("rows are objects"),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c["pass"] == Value::Bool(true))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Comment lines with version, config and checks, then one CSV row per result.
    pub fn to_csv(&self) -> Result<String, Error> {
        let mut out = String::new();
        out.push_str(&format!("# version: {}\n", self.version));
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!(
            "# config: {}\n",
            serde_json::to_string(&self.config).expect("serializable")
        ));
        for (name, c) in &self.checks {
            out.push_str(&format!(
                "# check {name}: pass={} value={} tolerance={}\n",
                c["pass"], c["value"], c["tolerance"]
            ));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        if let Some(first) = self.results.first() {
            w.write_record(first.keys()).map_err(csv_error)?;
        }
        for row in &self.results {
            let fields: Vec<String> = row
                .values()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            w.write_record(&fields).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("utf-8 input"));
        Ok(out)
    }

    pub fn render(&self, format: Format) -> Result<String, Error> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Invalid(e.to_string())
}

/// Builds the report for a validated configuration.
pub fn execute(config: &RunConfig) -> Result<Report, Error> {
    config.validate().map_err(Error::Invalid)?;
    let mut report = Report::new(config);
    let d = config.d.unwrap_or(DEFAULT_EFFICIENCY_D);
    match config.command {
        Command::Teleport => teleport_trials(&mut report, config, d, None)?,
        Command::Collective => teleport_trials(&mut report, config, d, config.n)?,
        Command::FilterCheck => filter_check(&mut report, d)?,
        Command::Prepare => prepare(&mut report, d)?,
        Command::Efficiency => efficiency(&mut report, d)?,
        Command::Dims => dims(&mut report, d)?,
        Command::BellSweep => bell_sweep(&mut report, d)?,
    }
    Ok(report)
}

fn teleport_trials(
    report: &mut Report,
    config: &RunConfig,
    d: usize,
    n: Option<usize>,
) -> Result<(), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = match n {
        Some(n) => {
            if n == 0 || n >= d {
                return Err(Error::InvalidPartition(format!(
                    "need 0 < n < d, got n = {n}, d = {d}"
                )));
            }
            binomial(d as u64, n as u64)
                .ok_or_else(|| Error::Invalid("dimension overflow".into()))? as usize
        }
        None => d,
    };
    let expected = 1.0 / (dim as f64 * dim as f64);
    let mut worst_fidelity: f64 = 0.0;
    let mut worst_probability: f64 = 0.0;
    for trial in 0..config.trials {
        let chi = QuditInput::random(&mut rng, dim);
        let r: TeleportReport = match n {
            Some(n) => run_collective(d, n, &chi, config.mode)?.report,
            None => run_single_qudit(d, &chi, config.mode)?.report,
        };
        worst_fidelity = worst_fidelity.max(1.0 - r.fidelity);
        worst_probability = worst_probability.max((r.success_probability - expected).abs());
        report.row(json!({
            "trial": trial,
            "d": r.d,
            "alice_photons": r.partition.0,
            "bob_photons": r.partition.1,
            "mode": r.mode.as_str(),
            "success_probability": r.success_probability,
            "fidelity": r.fidelity,
            "photons_total": r.photons_total,
            "qubits_sent": r.qubits_sent,
        }));
    }
    report.check(
        "fidelity_deficit",
        Check::at_most(worst_fidelity, report.limit(FIDELITY_TOL)),
    );
    report.check(
        "probability_vs_inverse_dimension_squared",
        Check::at_most(worst_probability, report.limit(PROBABILITY_TOL)),
    );
    Ok(())
}

fn filter_check(report: &mut Report, d: usize) -> Result<(), Error> {
    let filter = bell_filter_unitary(d)?;
    let eta = check_sufficiency(&filter.unitary)?;
    for (k, e) in eta.eta.iter().enumerate() {
        report.row(json!({
            "k": k,
            "eta_re": e.re,
            "eta_im": e.im,
            "transmissivity": filter.transmissivities.get(k).copied(),
        }));
    }
    report.check(
        "eta_constant",
        Check::at_most(eta.spread(), report.limit(ETA_CONSTANCY_TOL)),
    );
    report.check(
        "eta_equals_inverse_d",
        Check::at_most(eta.max_deviation(1.0 / d as f64), report.limit(ETA_TOL)),
    );
    if d <= crate::teleport::MAX_PHYSICAL_D {
        let psi = antisymmetric_state(&LambdaMatrix::standard(d)?)?;
        let out = apply_unitary(&filter.unitary, &psi)?;
        let paths: Vec<usize> = (0..d).collect();
        let (_, p) = coincidence_project(&out, &paths)?;
        report.check(
            "antisymmetric_coincidence",
            Check::at_most((1.0 - p).abs(), report.limit(COINCIDENCE_TOL)),
        );
    }
    Ok(())
}

fn prepare(report: &mut Report, d: usize) -> Result<(), Error> {
    let run = run_prepare_antisymmetric(d)?;
    let mut cumulative = 1.0;
    for (i, p) in run.report.stage_probabilities.iter().enumerate() {
        cumulative *= p;
        report.row(json!({
            "stage_photons": i + 2,
            "stage_probability": p,
            "cumulative_probability": cumulative,
        }));
    }
    let expected = 1.0 / factorial(d);
    report.check(
        "total_probability",
        Check::at_most(
            (run.report.total_probability - expected).abs(),
            report.limit(PREP_PROBABILITY_TOL),
        ),
    );
    report.check(
        "output_fidelity_deficit",
        Check::at_most(
            1.0 - run.report.output_fidelity,
            report.limit(PREP_FIDELITY_TOL),
        ),
    );
    Ok(())
}

fn efficiency(report: &mut Report, d_max: usize) -> Result<(), Error> {
    if d_max < 2 {
        return Err(Error::Invalid(format!(
            "efficiency needs --d >= 2, got {d_max}"
        )));
    }
    let d_list: Vec<usize> = (2..=d_max).step_by(2).collect();
    let rows = efficiency_curve(&d_list)?;
    let mut individual_off: f64 = 0.0;
    let mut collective_margin = f64::INFINITY;
    for r in &rows {
        individual_off = individual_off.max((r.individual_rate - 0.5).abs());
        if r.d >= 4 {
            collective_margin = collective_margin.min(r.collective_rate - 0.5);
        }
        report.row(serde_json::to_value(r).expect("plain struct"));
    }
    report.check(
        "individual_rate_half",
        Check::at_most(individual_off, report.limit(0.0)),
    );
    if collective_margin.is_finite() {
        // the value is the smallest collective rate minus 0.5 over d >= 4
        report.check(
            "collective_exceeds_half",
            Check {
                pass: collective_margin > 0.0,
                value: collective_margin,
                tolerance: 0.0,
            },
        );
    }
    Ok(())
}

fn dims(report: &mut Report, d: usize) -> Result<(), Error> {
    if d == 0 || d > MAX_DIMS_D {
        return Err(Error::Invalid(format!(
            "dims needs 1 <= d <= {MAX_DIMS_D}, got {d}"
        )));
    }
    for n in 0..=d {
        report.row(json!({ "d": d, "n": n, "dimension": antisym_dimension(d, n)? }));
    }
    if d >= 2 {
        let pair = antisym_dimension(d, 2)? as f64;
        let formula = (d * (d - 1) / 2) as f64;
        report.check(
            "pair_dimension",
            Check::at_most((pair - formula).abs(), report.limit(0.0)),
        );
    }
    Ok(())
}

fn bell_sweep(report: &mut Report, d: usize) -> Result<(), Error> {
    let mut leak: f64 = 0.0;
    let mut retained = 0.0;
    for idx in GeneralizedBellIndex::all(d) {
        let p = bell_filter_response(d, idx)?;
        if (idx.m1, idx.m2) == (0, 0) {
            retained = p;
        } else {
            leak = leak.max(p);
        }
        report.row(json!({ "m1": idx.m1, "m2": idx.m2, "probability": p }));
    }
    report.check(
        "off_origin_leakage",
        Check::at_most(leak, report.limit(SELECTIVITY_TOL)),
    );
    report.check(
        "origin_retained",
        Check {
            pass: retained > 0.0,
            value: retained,
            tolerance: 0.0,
        },
    );
    Ok(())
}

/// Runs one command, writes the report and returns the exit code.
pub fn run(config: &RunConfig) -> i32 {
    let report = match execute(config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let text = match report.render(config.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let written = match &config.output_path {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return EXIT_VALIDATION;
    }
    if report.all_pass() {
        EXIT_OK
    } else {
        for (name, c) in &report.checks {
            if c["pass"] != Value::Bool(true) {
                eprintln!(
                    "check failed: {name} (value {}, tolerance {})",
                    c["value"], c["tolerance"]
                );
            }
        }
        EXIT_CHECK_FAILED
    }
}
