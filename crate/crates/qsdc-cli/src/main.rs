//! Command-line experiment runner: parse a scenario, run seeded trials,
//! and emit machine-readable results.
//!
//! Exit statuses: 0 success, 2 usage error, 3 I/O failure, 4 internal
//! protocol error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use qsdc::error::{ConfigError, HarnessError};
use qsdc::harness::{run_single_trial, run_trials, MessageSource, Scenario};
use qsdc::prelude::{AdversaryKind, Controllers, ProtocolConfig, Variant};
use qsdc::report::{
    render_csv, render_csv_sweep, render_json, render_json_sweep, ScenarioEcho, SweepRow,
    SweepValue,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum SweepParam {
    Delta,
    N,
    Threshold,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::Delta => "delta",
            SweepParam::N => "n",
            SweepParam::Threshold => "threshold",
        }
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "original" => Ok(Variant::Original),
        "improved" => Ok(Variant::Improved),
        other => Err(format!("expected `original` or `improved`, got `{other}`")),
    }
}

fn parse_controllers(s: &str) -> Result<Controllers, String> {
    match s {
        "single" => Ok(Controllers::Single),
        "dual" => Ok(Controllers::Dual),
        other => Err(format!("expected `single` or `dual`, got `{other}`")),
    }
}

fn parse_adversary(s: &str) -> Result<AdversaryKind, String> {
    s.parse::<AdversaryKind>().map_err(|e| e.to_string())
}

/// Runs protocol experiments and reports detection and recovery rates.
#[derive(Debug, Parser)]
#[command(name = "qsdc", version, about)]
struct Cli {
    /// Scenario file of flat `key = value` lines; flags override it.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,

    /// Message length in bits.
    #[arg(long, value_name = "INT")]
    n: Option<usize>,

    /// Check-set size per eavesdropping check.
    #[arg(long, value_name = "INT")]
    delta: Option<usize>,

    /// Protocol variant.
    #[arg(long, value_name = "original|improved", value_parser = parse_variant)]
    variant: Option<Variant>,

    /// Number of controllers.
    #[arg(long, value_name = "single|dual", value_parser = parse_controllers)]
    controllers: Option<Controllers>,

    /// Adversary on the controller-to-sender transmission.
    #[arg(long, value_name = "honest|intercept|substitution", value_parser = parse_adversary)]
    adversary1: Option<AdversaryKind>,

    /// Adversary on the sender-to-receiver transmission.
    #[arg(long, value_name = "honest|intercept|substitution", value_parser = parse_adversary)]
    adversary2: Option<AdversaryKind>,

    /// Number of Monte Carlo trials.
    #[arg(long, value_name = "INT")]
    trials: Option<u64>,

    /// Base seed; trial i runs on split stream i.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,

    /// Maximum tolerated conclusive-check error rate.
    #[arg(long, value_name = "REAL")]
    threshold: Option<f64>,

    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,

    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Also write trial 0's transcript, human-readable, to this path.
    #[arg(long, value_name = "PATH")]
    transcript: Option<PathBuf>,

    /// Sweep one parameter over --values, one report row per value.
    #[arg(long, value_enum, value_name = "PARAM", requires = "values")]
    sweep: Option<SweepParam>,

    /// Comma-separated sweep values.
    #[arg(long, value_name = "CSV-LIST", requires = "sweep")]
    values: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Internal(m) => m,
        }
    }
}

/// Names the offending flag when a config constraint fails.
fn usage_from_config(e: ConfigError) -> CliError {
    let flag = match &e {
        ConfigError::InvalidMessageLength => "--n",
        ConfigError::InvalidDelta => "--delta",
        ConfigError::InvalidThreshold(_) => "--threshold",
        ConfigError::InvalidTrials => "--trials",
        ConfigError::SubstitutionOnFirstChannel => "--adversary1",
        ConfigError::UnknownAdversary(_) => "--adversary1/--adversary2",
        _ => "scenario",
    };
    CliError::Usage(format!("{flag}: {e}"))
}

fn from_harness(e: HarnessError) -> CliError {
    match e {
        HarnessError::Config(c) => usage_from_config(c),
        HarnessError::Protocol(p) => CliError::Internal(format!("protocol error: {p}")),
    }
}

/// Everything needed to build a [`Scenario`]; mirrors the flag set.
#[derive(Debug, Clone)]
struct Settings {
    n: usize,
    delta: usize,
    variant: Variant,
    controllers: Controllers,
    adversary1: AdversaryKind,
    adversary2: AdversaryKind,
    trials: u64,
    seed: u64,
    threshold: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            n: 64,
            delta: 16,
            variant: Variant::Original,
            controllers: Controllers::Single,
            adversary1: AdversaryKind::Honest,
            adversary2: AdversaryKind::Honest,
            trials: 100,
            seed: 0,
            threshold: 0.0,
        }
    }
}

impl Settings {
    fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read scenario file {path:?}: {e}")))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "scenario file line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |e: String| {
                CliError::Usage(format!("scenario file line {}: {key}: {e}", lineno + 1))
            };
            match key {
                "n" => self.n = value.parse().map_err(|e| bad(format!("{e}")))?,
                "delta" => self.delta = value.parse().map_err(|e| bad(format!("{e}")))?,
                "variant" => self.variant = parse_variant(value).map_err(bad)?,
                "controllers" => self.controllers = parse_controllers(value).map_err(bad)?,
                "adversary1" => self.adversary1 = parse_adversary(value).map_err(bad)?,
                "adversary2" => self.adversary2 = parse_adversary(value).map_err(bad)?,
                "trials" => self.trials = value.parse().map_err(|e| bad(format!("{e}")))?,
                "seed" => self.seed = value.parse().map_err(|e| bad(format!("{e}")))?,
                "threshold" => self.threshold = value.parse().map_err(|e| bad(format!("{e}")))?,
                other => {
                    return Err(CliError::Usage(format!(
                        "scenario file line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, cli: &Cli) {
        if let Some(n) = cli.n {
            self.n = n;
        }
        if let Some(delta) = cli.delta {
            self.delta = delta;
        }
        if let Some(variant) = cli.variant {
            self.variant = variant;
        }
        if let Some(controllers) = cli.controllers {
            self.controllers = controllers;
        }
        if let Some(a) = cli.adversary1 {
            self.adversary1 = a;
        }
        if let Some(a) = cli.adversary2 {
            self.adversary2 = a;
        }
        if let Some(trials) = cli.trials {
            self.trials = trials;
        }
        if let Some(seed) = cli.seed {
            self.seed = seed;
        }
        if let Some(threshold) = cli.threshold {
            self.threshold = threshold;
        }
    }

    fn build_scenario(&self) -> Result<Scenario, CliError> {
        let protocol = ProtocolConfig::new(
            self.n,
            self.delta,
            self.variant,
            self.controllers,
            self.threshold,
        )
        .map_err(usage_from_config)?;
        let scenario = Scenario {
            protocol,
            channel1: self.adversary1,
            channel2: self.adversary2,
            trials: self.trials,
            base_seed: self.seed,
            message_source: MessageSource::RandomPerTrial,
        };
        scenario.validate().map_err(usage_from_config)?;
        Ok(scenario)
    }
}

fn parse_sweep_values(param: SweepParam, list: &str) -> Result<Vec<SweepValue>, CliError> {
    let tokens: Vec<&str> = list
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(CliError::Usage("--values: empty value list".into()));
    }
    tokens
        .into_iter()
        .map(|token| match param {
            SweepParam::Delta | SweepParam::N => token
                .parse::<u64>()
                .map(SweepValue::Int)
                .map_err(|e| CliError::Usage(format!("--values: `{token}`: {e}"))),
            SweepParam::Threshold => token
                .parse::<f64>()
                .map(SweepValue::Real)
                .map_err(|e| CliError::Usage(format!("--values: `{token}`: {e}"))),
        })
        .collect()
}

fn with_swept(settings: &Settings, param: SweepParam, value: SweepValue) -> Settings {
    let mut out = settings.clone();
    match (param, value) {
        (SweepParam::Delta, SweepValue::Int(v)) => out.delta = v as usize,
        (SweepParam::N, SweepValue::Int(v)) => out.n = v as usize,
        (SweepParam::Threshold, SweepValue::Real(v)) => out.threshold = v,
        _ => unreachable!("values are parsed per parameter"),
    }
    out
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => {
            fs::write(path, content).map_err(|e| CliError::Io(format!("cannot write {path:?}: {e}")))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn dump_transcript(path: &Path, scenario: &Scenario) -> Result<(), CliError> {
    let record = run_single_trial(scenario, 0).map_err(from_harness)?;
    fs::write(path, record.transcript.render_text())
        .map_err(|e| CliError::Io(format!("cannot write {path:?}: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut settings = Settings::default();
    if let Some(path) = &cli.scenario {
        settings.apply_file(path)?;
    }
    settings.apply_flags(cli);

    match cli.sweep {
        None => {
            let scenario = settings.build_scenario()?;
            let (stats, summary) = run_trials(&scenario).map_err(from_harness)?;
            let content = match cli.format {
                OutputFormat::Csv => render_csv(&stats, &summary),
                OutputFormat::Json => render_json(&ScenarioEcho::from(&scenario), &stats, &summary),
            };
            write_output(cli.out.as_deref(), &content)?;
            if let Some(path) = &cli.transcript {
                dump_transcript(path, &scenario)?;
            }
            Ok(())
        }
        Some(param) => {
            let values = parse_sweep_values(param, cli.values.as_deref().unwrap_or(""))?;
            // Validate every point before running any.
            let mut points = Vec::with_capacity(values.len());
            for &value in &values {
                let swept = with_swept(&settings, param, value);
                points.push((value, swept.build_scenario()?));
            }
            let mut rows = Vec::with_capacity(points.len());
            for (value, scenario) in &points {
                let (stats, summary) = run_trials(scenario).map_err(from_harness)?;
                rows.push(SweepRow {
                    value: *value,
                    stats,
                    summary,
                });
            }
            let base = settings.build_scenario()?;
            let content = match cli.format {
                OutputFormat::Csv => render_csv_sweep(param.name(), &rows),
                OutputFormat::Json => {
                    render_json_sweep(&ScenarioEcho::from(&base), param.name(), &rows)
                }
            };
            write_output(cli.out.as_deref(), &content)?;
            if let Some(path) = &cli.transcript {
                dump_transcript(path, &points[0].1)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
