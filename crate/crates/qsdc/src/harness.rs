//! Monte Carlo experiment runner.
//!
//! A [`Scenario`] pins down everything about an experiment: protocol
//! parameters, one adversary per channel, a message source, a trial count,
//! and a base seed. Trials run independently (and in parallel) on split
//! random streams, so results are bit-identical regardless of the degree
//! of parallelism, and any single trial can be replayed in isolation.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::adversary::{Adversary, AdversaryKind, ChannelSlot};
use crate::error::{ConfigError, HarnessError};
use crate::protocol::{run_protocol, Message, ProtocolConfig, RunOutcome, RunRecord};
use crate::qubit::{prepare, PureState, ALL_BB84};
use crate::report::SummaryReport;
use crate::rng::{trial_rng, TrialRng};
use crate::shopping::{pad_to, shopping_preset};
use crate::transcript::PayloadKind;

/// Where each trial's message comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MessageSource {
    /// A fresh uniform message per trial, drawn from the trial's stream.
    RandomPerTrial,
    /// The same fixed bits every trial.
    Fixed(Vec<bool>),
    /// A framed shopping order (customer id, item number), zero-padded to
    /// the protocol's message length.
    ShoppingPreset {
        customer_id: Vec<u8>,
        item_number: Vec<u8>,
    },
}

/// A complete, reproducible experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub protocol: ProtocolConfig,
    /// Adversary on the controller(s)-to-Alice transmission.
    pub channel1: AdversaryKind,
    /// Adversary on the Alice-to-Bob transmission.
    pub channel2: AdversaryKind,
    pub trials: u64,
    pub base_seed: u64,
    pub message_source: MessageSource,
}

impl Scenario {
    /// Checks cross-field constraints; called by [`run_trials`] before any
    /// run starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::InvalidTrials);
        }
        // A substituting controller intercepts the encoded sequence; on
        // the first transmission there is nothing encoded to steal.
        if self.channel1 == AdversaryKind::Substitution {
            return Err(ConfigError::SubstitutionOnFirstChannel);
        }
        match &self.message_source {
            MessageSource::RandomPerTrial => Ok(()),
            MessageSource::Fixed(bits) => {
                if bits.len() != self.protocol.n() {
                    Err(ConfigError::FixedMessageLength {
                        expected: self.protocol.n(),
                        actual: bits.len(),
                    })
                } else {
                    Ok(())
                }
            }
            MessageSource::ShoppingPreset {
                customer_id,
                item_number,
            } => {
                let frame = shopping_preset(customer_id, item_number)?;
                pad_to(&frame, self.protocol.n()).map(|_| ())
            }
        }
    }

    fn fixed_message(&self) -> Result<Option<Message>, ConfigError> {
        match &self.message_source {
            MessageSource::RandomPerTrial => Ok(None),
            MessageSource::Fixed(bits) => Ok(Some(Message::from_bits(bits.clone()))),
            MessageSource::ShoppingPreset {
                customer_id,
                item_number,
            } => {
                let frame = shopping_preset(customer_id, item_number)?;
                Ok(Some(pad_to(&frame, self.protocol.n())?))
            }
        }
    }
}

/// Counters aggregated over an experiment's runs.
///
/// Merging is plain integer addition, so any grouping of per-trial stats
/// folds to the same totals.
#[derive(Debug, Clone, Default)]
pub struct TrialStats {
    pub runs: u64,
    pub delivered: u64,
    pub aborted_first: u64,
    pub aborted_second: u64,
    /// Conclusive checks and errors on the first transmission(s).
    pub first_conclusive: u64,
    pub first_errors: u64,
    /// Conclusive decoy checks and errors on the second transmission.
    pub second_conclusive: u64,
    pub second_errors: u64,
    /// Delivered runs whose decoded message differed from the one sent;
    /// always zero unless the protocol itself is broken.
    pub delivery_mismatches: u64,
    /// Bits the adversaries guessed (abstentions excluded) and got right.
    pub adversary_bits_correct: u64,
    pub adversary_bits_total: u64,
    /// Runs whose transcript contains a mask-key announcement.
    pub mask_announcements: u64,
    /// Wall-clock time of the whole experiment (not part of determinism
    /// guarantees or serialized reports).
    pub wall_time: Duration,
}

impl TrialStats {
    /// Conclusive checks across both transmissions.
    pub fn conclusive_checks(&self) -> u64 {
        self.first_conclusive + self.second_conclusive
    }

    /// Check errors across both transmissions.
    pub fn check_errors(&self) -> u64 {
        self.first_errors + self.second_errors
    }

    /// The (errors, conclusive) pair of the deepest check any run reached:
    /// decoy checks when the runs got that far, first-transmission checks
    /// otherwise. This is the rate an attacked channel shows.
    pub fn observed_error_counts(&self) -> (u64, u64) {
        if self.second_conclusive > 0 {
            (self.second_errors, self.second_conclusive)
        } else {
            (self.first_errors, self.first_conclusive)
        }
    }

    /// Commutative, associative counter merge.
    pub fn merge(&mut self, other: &TrialStats) {
        self.runs += other.runs;
        self.delivered += other.delivered;
        self.aborted_first += other.aborted_first;
        self.aborted_second += other.aborted_second;
        self.first_conclusive += other.first_conclusive;
        self.first_errors += other.first_errors;
        self.second_conclusive += other.second_conclusive;
        self.second_errors += other.second_errors;
        self.delivery_mismatches += other.delivery_mismatches;
        self.adversary_bits_correct += other.adversary_bits_correct;
        self.adversary_bits_total += other.adversary_bits_total;
        self.mask_announcements += other.mask_announcements;
        self.wall_time += other.wall_time;
    }
}

fn score_guesses(
    stats: &mut TrialStats,
    adversary: &mut dyn Adversary,
    truth: &Message,
    rng: &mut TrialRng,
) {
    if let Some(guesses) = adversary.inferred_message(rng) {
        for (guess, &bit) in guesses.iter().zip(truth.bits()) {
            if let Some(g) = guess {
                stats.adversary_bits_total += 1;
                if *g == bit {
                    stats.adversary_bits_correct += 1;
                }
            }
        }
    }
}

fn run_one(
    scenario: &Scenario,
    fixed: Option<&Message>,
    trial: u64,
) -> Result<TrialStats, HarnessError> {
    let mut rng = trial_rng(scenario.base_seed, trial);
    let message = match fixed {
        Some(m) => m.clone(),
        None => Message::random(scenario.protocol.n(), &mut rng),
    };
    let mut ch1 = scenario.channel1.build(ChannelSlot::First);
    let mut ch2 = scenario.channel2.build(ChannelSlot::Second);

    let record = run_protocol(
        &scenario.protocol,
        ch1.as_mut(),
        ch2.as_mut(),
        &message,
        &mut rng,
    )?;

    let mut stats = TrialStats {
        runs: 1,
        ..TrialStats::default()
    };
    match &record.outcome {
        RunOutcome::Delivered(decoded) => {
            stats.delivered += 1;
            if *decoded != message {
                stats.delivery_mismatches += 1;
            }
        }
        RunOutcome::AbortedFirstCheck => stats.aborted_first += 1,
        RunOutcome::AbortedSecondCheck => stats.aborted_second += 1,
    }
    for report in &record.first_checks {
        stats.first_conclusive += report.conclusive as u64;
        stats.first_errors += report.errors as u64;
    }
    if let Some(report) = record.second_check {
        stats.second_conclusive += report.conclusive as u64;
        stats.second_errors += report.errors as u64;
    }
    if record.transcript.contains_announce(PayloadKind::MaskKey) {
        stats.mask_announcements += 1;
    }
    score_guesses(&mut stats, ch1.as_mut(), &message, &mut rng);
    score_guesses(&mut stats, ch2.as_mut(), &message, &mut rng);
    Ok(stats)
}

/// Replays a single trial of a scenario, returning the full run record.
///
/// Trial `i` here is bit-identical to trial `i` inside [`run_trials`],
/// which makes rare events debuggable after the fact.
pub fn run_single_trial(scenario: &Scenario, trial: u64) -> Result<RunRecord, HarnessError> {
    scenario.validate()?;
    let fixed = scenario.fixed_message()?;
    let mut rng = trial_rng(scenario.base_seed, trial);
    let message = match fixed {
        Some(m) => m,
        None => Message::random(scenario.protocol.n(), &mut rng),
    };
    let mut ch1 = scenario.channel1.build(ChannelSlot::First);
    let mut ch2 = scenario.channel2.build(ChannelSlot::Second);
    Ok(run_protocol(
        &scenario.protocol,
        ch1.as_mut(),
        ch2.as_mut(),
        &message,
        &mut rng,
    )?)
}

/// Executes every trial of a scenario and aggregates the results.
///
/// Trials fan out over the current rayon thread pool; per-trial seeding
/// and the commutative merge make the outcome independent of scheduling.
pub fn run_trials(scenario: &Scenario) -> Result<(TrialStats, SummaryReport), HarnessError> {
    scenario.validate()?;
    let fixed = scenario.fixed_message()?;
    let start = Instant::now();

    let per_trial: Result<Vec<TrialStats>, HarnessError> = (0..scenario.trials)
        .into_par_iter()
        .map(|trial| run_one(scenario, fixed.as_ref(), trial))
        .collect();

    let mut total = TrialStats::default();
    for stats in per_trial? {
        total.merge(&stats);
    }
    total.wall_time = start.elapsed();
    let summary = SummaryReport::from_stats(&total);
    Ok((total, summary))
}

/// Which transmission a check guards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Controller(s) to Alice: Alice measures, the record holder scores.
    FirstCheck,
    /// Alice to Bob: Bob measures the decoys, Alice scores.
    SecondCheck,
}

/// What an adversary forwards for a given input state: a finite
/// distribution of (probability, forwarded state) branches.
fn forward_branches(adversary: AdversaryKind, input: PureState) -> Vec<(f64, PureState)> {
    match adversary {
        AdversaryKind::Honest => vec![(1.0, input)],
        AdversaryKind::Intercept => {
            let mut branches = Vec::with_capacity(4);
            for basis in [crate::qubit::Basis::Z, crate::qubit::Basis::X] {
                for outcome in basis.eigenstates() {
                    let p = input.probability_of(outcome);
                    if p > 0.0 {
                        branches.push((0.5 * p, prepare(outcome)));
                    }
                }
            }
            branches
        }
        AdversaryKind::Substitution => ALL_BB84
            .into_iter()
            .map(|fake| (0.25, prepare(fake)))
            .collect(),
    }
}

/// The analytic conclusive-check error probability for an adversary,
/// computed by exhaustive enumeration over preparation state, adversary
/// randomness, and checker basis, with Born-rule weights.
///
/// Both check kinds measure a uniformly prepared BB84 ensemble with a
/// uniformly chosen basis, so they enumerate the same lattice; the
/// parameter documents which check an empirical rate should be compared
/// against.
pub fn theoretical_rates(adversary: AdversaryKind, _check: CheckKind) -> f64 {
    let mut error_weight = 0.0;
    let mut conclusive_weight = 0.0;
    for prepared in ALL_BB84 {
        let input_weight = 0.25;
        for (branch_weight, forwarded) in forward_branches(adversary, prepare(prepared)) {
            // The checker's basis is uniform; only the matching choice is
            // conclusive, so it enters with probability 1/2.
            let weight = input_weight * branch_weight * 0.5;
            conclusive_weight += weight;
            let p_error: f64 = prepared
                .basis()
                .eigenstates()
                .into_iter()
                .filter(|&e| e != prepared)
                .map(|e| forwarded.probability_of(e))
                .sum();
            error_weight += weight * p_error;
        }
    }
    error_weight / conclusive_weight
}
