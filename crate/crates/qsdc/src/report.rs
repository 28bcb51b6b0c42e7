//! Serializable experiment summaries: CSV and JSON renderings with a
//! pinned schema, shared by the CLI and the test suites.

use serde::Serialize;

use crate::harness::{Scenario, TrialStats};
use crate::stats::{wilson_interval, RateEstimate};

/// Headline rates of an experiment, each with a Wilson 95% interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryReport {
    /// Conclusive-check error rate of the deepest check the runs reached
    /// (the decoy check once runs get that far, the first-transmission
    /// check otherwise), which is the rate the attacked channel shows.
    pub error_rate: RateEstimate,
    /// Fraction of runs that aborted at either check.
    pub abort_rate: RateEstimate,
    /// Adversary bit accuracy over guessed bits; absent when no adversary
    /// produced an inference.
    pub adversary_accuracy: Option<RateEstimate>,
}

impl SummaryReport {
    pub fn from_stats(stats: &TrialStats) -> Self {
        let (errors, conclusive) = stats.observed_error_counts();
        Self {
            error_rate: wilson_interval(errors, conclusive),
            abort_rate: wilson_interval(stats.aborted_first + stats.aborted_second, stats.runs),
            adversary_accuracy: (stats.adversary_bits_total > 0).then(|| {
                wilson_interval(stats.adversary_bits_correct, stats.adversary_bits_total)
            }),
        }
    }
}

/// The scenario fields echoed into JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEcho {
    pub n: usize,
    pub delta: usize,
    pub variant: crate::protocol::Variant,
    pub controllers: crate::protocol::Controllers,
    pub adversary1: crate::adversary::AdversaryKind,
    pub adversary2: crate::adversary::AdversaryKind,
    pub trials: u64,
    pub seed: u64,
    pub threshold: f64,
}

impl From<&Scenario> for ScenarioEcho {
    fn from(s: &Scenario) -> Self {
        Self {
            n: s.protocol.n(),
            delta: s.protocol.delta(),
            variant: s.protocol.variant(),
            controllers: s.protocol.controllers(),
            adversary1: s.channel1,
            adversary2: s.channel2,
            trials: s.trials,
            seed: s.base_seed,
            threshold: s.protocol.abort_threshold(),
        }
    }
}

/// The fixed CSV column set.
pub const CSV_HEADER: &str = "trials,delivered,aborted_first,aborted_second,error_rate,error_ci_low,error_ci_high,abort_rate,adversary_accuracy";

fn csv_row(stats: &TrialStats, summary: &SummaryReport) -> String {
    let accuracy = summary
        .adversary_accuracy
        .map(|a| a.rate.to_string())
        .unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{}",
        stats.runs,
        stats.delivered,
        stats.aborted_first,
        stats.aborted_second,
        summary.error_rate.rate,
        summary.error_rate.ci_low,
        summary.error_rate.ci_high,
        summary.abort_rate.rate,
        accuracy,
    )
}

/// One experiment as CSV: header plus a single row.
pub fn render_csv(stats: &TrialStats, summary: &SummaryReport) -> String {
    format!("{CSV_HEADER}\n{}\n", csv_row(stats, summary))
}

/// A sweep parameter value, integer or real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SweepValue {
    Int(u64),
    Real(f64),
}

impl std::fmt::Display for SweepValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepValue::Int(v) => write!(f, "{v}"),
            SweepValue::Real(v) => write!(f, "{v}"),
        }
    }
}

/// One completed sweep point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: SweepValue,
    pub stats: TrialStats,
    pub summary: SummaryReport,
}

/// A sweep as CSV: the swept parameter is the leading column, rows in the
/// order the values were given.
pub fn render_csv_sweep(param: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{param},{CSV_HEADER}\n");
    for row in rows {
        out.push_str(&format!("{},{}\n", row.value, csv_row(&row.stats, &row.summary)));
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    scenario: &'a ScenarioEcho,
    trials: u64,
    delivered: u64,
    aborted_first: u64,
    aborted_second: u64,
    error_rate: f64,
    error_ci_low: f64,
    error_ci_high: f64,
    abort_rate: f64,
    adversary_accuracy: Option<f64>,
}

impl<'a> JsonReport<'a> {
    fn new(scenario: &'a ScenarioEcho, stats: &TrialStats, summary: &SummaryReport) -> Self {
        Self {
            scenario,
            trials: stats.runs,
            delivered: stats.delivered,
            aborted_first: stats.aborted_first,
            aborted_second: stats.aborted_second,
            error_rate: summary.error_rate.rate,
            error_ci_low: summary.error_rate.ci_low,
            error_ci_high: summary.error_rate.ci_high,
            abort_rate: summary.abort_rate.rate,
            adversary_accuracy: summary.adversary_accuracy.map(|a| a.rate),
        }
    }
}

/// One experiment as a JSON object: the CSV columns as keys, plus a
/// `scenario` echo.
pub fn render_json(scenario: &ScenarioEcho, stats: &TrialStats, summary: &SummaryReport) -> String {
    let report = JsonReport::new(scenario, stats, summary);
    let mut out = serde_json::to_string_pretty(&report).expect("report serialization");
    out.push('\n');
    out
}

#[derive(Serialize)]
struct JsonSweepRow {
    value: SweepValue,
    trials: u64,
    delivered: u64,
    aborted_first: u64,
    aborted_second: u64,
    error_rate: f64,
    error_ci_low: f64,
    error_ci_high: f64,
    abort_rate: f64,
    adversary_accuracy: Option<f64>,
}

#[derive(Serialize)]
struct JsonSweepReport<'a> {
    scenario: &'a ScenarioEcho,
    sweep: &'a str,
    rows: Vec<JsonSweepRow>,
}

/// A sweep as JSON: scenario echo, the swept parameter's name, and one
/// row object per value in the given order.
pub fn render_json_sweep(scenario: &ScenarioEcho, param: &str, rows: &[SweepRow]) -> String {
    let rows = rows
        .iter()
        .map(|row| JsonSweepRow {
            value: row.value,
            trials: row.stats.runs,
            delivered: row.stats.delivered,
            aborted_first: row.stats.aborted_first,
            aborted_second: row.stats.aborted_second,
            error_rate: row.summary.error_rate.rate,
            error_ci_low: row.summary.error_rate.ci_low,
            error_ci_high: row.summary.error_rate.ci_high,
            abort_rate: row.summary.abort_rate.rate,
            adversary_accuracy: row.summary.adversary_accuracy.map(|a| a.rate),
        })
        .collect();
    let report = JsonSweepReport {
        scenario,
        sweep: param,
        rows,
    };
    let mut out = serde_json::to_string_pretty(&report).expect("report serialization");
    out.push('\n');
    out
}
