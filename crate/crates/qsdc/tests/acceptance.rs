//! Acceptance suite: one test per headline claim, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Statistical tolerances are pinned here, not tuned: every empirical rate
//! is compared against the exhaustive-enumeration oracle or an exact
//! algebraic expectation, at fixed seeds.

use std::time::Instant;

use qsdc::prelude::*;
use qsdc::qubit::{self, ALL_BB84};
use qsdc::report::{render_csv, render_json, ScenarioEcho};

fn report(num: u8, name: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("acceptance criterion {num} ({name}): {status} [{detail}]");
    assert!(pass, "criterion {num} ({name}): {detail}");
}

fn scenario(
    n: usize,
    delta: usize,
    variant: Variant,
    controllers: Controllers,
    ch1: AdversaryKind,
    ch2: AdversaryKind,
    trials: u64,
    seed: u64,
) -> Scenario {
    Scenario {
        protocol: ProtocolConfig::new(n, delta, variant, controllers, 0.0).unwrap(),
        channel1: ch1,
        channel2: ch2,
        trials,
        base_seed: seed,
        message_source: MessageSource::RandomPerTrial,
    }
}

/// Criterion 1: honest runs at N=1024, delta=256 always deliver the exact
/// message with zero check errors, across both variants and both
/// controller counts, in under 10 seconds total.
#[test]
fn criterion_1_honest_completeness() {
    let start = Instant::now();
    let mut delivered = 0u64;
    let mut mismatches = 0u64;
    let mut errors = 0u64;
    for variant in [Variant::Original, Variant::Improved] {
        for controllers in [Controllers::Single, Controllers::Dual] {
            let s = scenario(
                1024,
                256,
                variant,
                controllers,
                AdversaryKind::Honest,
                AdversaryKind::Honest,
                100,
                20_260_810,
            );
            let (stats, _) = run_trials(&s).unwrap();
            delivered += stats.delivered;
            mismatches += stats.delivery_mismatches;
            errors += stats.check_errors();
        }
    }
    let elapsed = start.elapsed();
    let pass = delivered == 400 && mismatches == 0 && errors == 0 && elapsed.as_secs_f64() < 10.0;
    report(
        1,
        "honest completeness",
        pass,
        format!("{delivered}/400 delivered, {mismatches} mismatches, {errors} check errors, {elapsed:.2?}"),
    );
}

/// Criterion 2: in the original variant the substituting controller
/// recovers the entire message, every trial: bit accuracy exactly 1.
#[test]
fn criterion_2_controller_attack_recovers_message() {
    let s = scenario(
        64,
        64,
        Variant::Original,
        Controllers::Single,
        AdversaryKind::Honest,
        AdversaryKind::Substitution,
        1000,
        41,
    );
    let (stats, summary) = run_trials(&s).unwrap();
    let accuracy = summary.adversary_accuracy.expect("attack always infers");
    let pass = stats.adversary_bits_total == 1000 * 64
        && stats.adversary_bits_correct == stats.adversary_bits_total
        && accuracy.rate == 1.0;
    report(
        2,
        "controller attack success",
        pass,
        format!(
            "{}/{} bits correct, accuracy {}",
            stats.adversary_bits_correct, stats.adversary_bits_total, accuracy.rate
        ),
    );
}

/// Criterion 3: the same attack is always caught: abort rate >= 0.999 and
/// the conclusive-decoy error rate sits within 0.02 of the enumeration
/// oracle's 1/2.
#[test]
fn criterion_3_attack_detectability() {
    let s = scenario(
        64,
        64,
        Variant::Original,
        Controllers::Single,
        AdversaryKind::Honest,
        AdversaryKind::Substitution,
        1000,
        41,
    );
    let (stats, summary) = run_trials(&s).unwrap();
    let aborted = stats.aborted_first + stats.aborted_second;
    let abort_rate = aborted as f64 / stats.runs as f64;
    let decoy_rate = stats.second_errors as f64 / stats.second_conclusive as f64;
    let oracle = theoretical_rates(AdversaryKind::Substitution, CheckKind::SecondCheck);
    let pass = abort_rate >= 0.999 && (decoy_rate - oracle).abs() <= 0.02;
    report(
        3,
        "attack detectability",
        pass,
        format!(
            "abort rate {abort_rate} ({aborted}/1000), decoy error rate {decoy_rate:.4} vs oracle {oracle}, summary abort {}",
            summary.abort_rate.rate
        ),
    );
}

/// Criterion 4: the masked variant blinds the same attacker: accuracy is
/// a coin flip and the mask is never published in an aborted run.
#[test]
fn criterion_4_fix_effectiveness() {
    let s = scenario(
        64,
        64,
        Variant::Improved,
        Controllers::Single,
        AdversaryKind::Honest,
        AdversaryKind::Substitution,
        1000,
        43,
    );
    let (stats, summary) = run_trials(&s).unwrap();
    let accuracy = summary.adversary_accuracy.expect("attack always infers");
    let pass = (0.48..=0.52).contains(&accuracy.rate) && stats.mask_announcements == 0;
    report(
        4,
        "fix effectiveness",
        pass,
        format!(
            "accuracy {} over {} bits, {} mask announcements",
            accuracy.rate, stats.adversary_bits_total, stats.mask_announcements
        ),
    );
}

/// Criterion 5: intercept-resend on either channel shows the BB84 error
/// rate 1/4 over at least 10^4 conclusive checks, matching the oracle.
#[test]
fn criterion_5_intercept_resend_rate() {
    // First transmission tapped: runs abort at the first check.
    let s1 = scenario(
        8,
        256,
        Variant::Original,
        Controllers::Single,
        AdversaryKind::Intercept,
        AdversaryKind::Honest,
        100,
        47,
    );
    let (stats1, _) = run_trials(&s1).unwrap();
    let rate1 = stats1.first_errors as f64 / stats1.first_conclusive as f64;

    // Second transmission tapped: decoy checks carry the disturbance.
    let s2 = scenario(
        8,
        256,
        Variant::Original,
        Controllers::Single,
        AdversaryKind::Honest,
        AdversaryKind::Intercept,
        100,
        53,
    );
    let (stats2, _) = run_trials(&s2).unwrap();
    let rate2 = stats2.second_errors as f64 / stats2.second_conclusive as f64;

    let oracle = theoretical_rates(AdversaryKind::Intercept, CheckKind::FirstCheck);
    let pass = stats1.first_conclusive >= 10_000
        && stats2.second_conclusive >= 10_000
        && (rate1 - 0.25).abs() <= 0.02
        && (rate2 - 0.25).abs() <= 0.02
        && (rate1 - oracle).abs() <= 0.02
        && (rate2 - oracle).abs() <= 0.02
        // At delta = 256 detection is essentially certain on both hops.
        && stats1.aborted_first == 100
        && stats2.aborted_second == 100;
    report(
        5,
        "external eavesdropper rate",
        pass,
        format!(
            "channel1 {rate1:.4} over {} checks, channel2 {rate2:.4} over {} checks, oracle {oracle}",
            stats1.first_conclusive, stats2.second_conclusive
        ),
    );
}

/// Criterion 6: the error-rate oracle comes out of exhaustive enumeration
/// at exactly 0, 1/4, and 1/2, and every adversary's empirical rate lands
/// within 4 binomial sigma of it.
#[test]
fn criterion_6_oracle_equivalence() {
    let mut enumeration_ok = true;
    for kind in [CheckKind::FirstCheck, CheckKind::SecondCheck] {
        enumeration_ok &= theoretical_rates(AdversaryKind::Honest, kind).abs() < 1e-12;
        enumeration_ok &= (theoretical_rates(AdversaryKind::Intercept, kind) - 0.25).abs() < 1e-12;
        enumeration_ok &= (theoretical_rates(AdversaryKind::Substitution, kind) - 0.5).abs() < 1e-12;
    }

    let mut agreement = Vec::new();
    // Honest: the analytic rate is exactly zero, so the empirical rate
    // must be too (sigma degenerates to 0 at p = 0).
    let honest = scenario(
        16,
        64,
        Variant::Original,
        Controllers::Single,
        AdversaryKind::Honest,
        AdversaryKind::Honest,
        200,
        59,
    );
    let (stats, summary) = run_trials(&honest).unwrap();
    agreement.push((
        "honest",
        summary.error_rate.rate,
        0.0,
        summary.error_rate.rate == 0.0 && stats.check_errors() == 0,
    ));

    // Intercept and substitution: within 4 sigma of the enumerated value.
    for (ch2, analytic_name) in [
        (AdversaryKind::Intercept, "intercept"),
        (AdversaryKind::Substitution, "substitution"),
    ] {
        let s = scenario(
            16,
            64,
            Variant::Original,
            Controllers::Single,
            AdversaryKind::Honest,
            ch2,
            300,
            61,
        );
        let (stats, summary) = run_trials(&s).unwrap();
        let analytic = theoretical_rates(ch2, CheckKind::SecondCheck);
        let (_, conclusive) = stats.observed_error_counts();
        let sigma = qsdc::stats::binomial_sigma(analytic, conclusive);
        let empirical = summary.error_rate.rate;
        agreement.push((
            analytic_name,
            empirical,
            analytic,
            (empirical - analytic).abs() < 4.0 * sigma,
        ));
    }

    let all_agree = agreement.iter().all(|(_, _, _, ok)| *ok);
    let detail: Vec<String> = agreement
        .iter()
        .map(|(name, emp, analytic, ok)| format!("{name}: {emp:.4} vs {analytic} ({ok})"))
        .collect();
    report(
        6,
        "oracle equivalence",
        enumeration_ok && all_agree,
        format!("enumeration exact: {enumeration_ok}; {}", detail.join(", ")),
    );
}

/// Criterion 7: the encoding law is exhaustive: all 8 (state, bit) cases
/// decode deterministically, and every message round-trips for N <= 8 in
/// both variants.
#[test]
fn criterion_7_exhaustive_encoding_law() {
    // All 8 single-qubit cases.
    let mut rng = trial_rng(67, 0);
    let mut cases_ok = true;
    for id in ALL_BB84 {
        for bit in [false, true] {
            let encoded = qubit::apply(PauliOp::for_bit(bit), qubit::prepare(id));
            let (outcome, _) = qubit::measure(&encoded, id.basis(), &mut rng);
            cases_ok &= (outcome == id) == !bit;
        }
    }

    // Every message of every length up to 8, both variants.
    let mut swept = 0u64;
    let mut exact = 0u64;
    for variant in [Variant::Original, Variant::Improved] {
        for n in 1..=8usize {
            for pattern in 0..(1u32 << n) {
                let bits: Vec<bool> = (0..n).map(|b| pattern >> b & 1 == 1).collect();
                let config =
                    ProtocolConfig::new(n, 32, variant, Controllers::Single, 0.0).unwrap();
                let mut rng = trial_rng(71, u64::from(pattern) << 8 | n as u64);
                let message = Message::from_bits(bits);
                let mut ch1 = qsdc::adversary::HonestChannel;
                let mut ch2 = qsdc::adversary::HonestChannel;
                let record =
                    run_protocol(&config, &mut ch1, &mut ch2, &message, &mut rng).unwrap();
                swept += 1;
                if record.outcome == RunOutcome::Delivered(message) {
                    exact += 1;
                }
            }
        }
    }

    let pass = cases_ok && swept == 2 * 510 && exact == swept;
    report(
        7,
        "exhaustive encoding law",
        pass,
        format!("8 single-qubit cases: {cases_ok}; {exact}/{swept} messages round-tripped"),
    );
}

/// Criterion 8: a scenario renders byte-identical CSV and JSON no matter
/// how often it runs or how many worker threads execute it.
#[test]
fn criterion_8_output_determinism() {
    let s = scenario(
        32,
        16,
        Variant::Improved,
        Controllers::Dual,
        AdversaryKind::Intercept,
        AdversaryKind::Substitution,
        50,
        73,
    );
    let render = |stats: &TrialStats, summary: &SummaryReport| {
        (
            render_csv(stats, summary),
            render_json(&ScenarioEcho::from(&s), stats, summary),
        )
    };

    let (stats_a, summary_a) = run_trials(&s).unwrap();
    let (stats_b, summary_b) = run_trials(&s).unwrap();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_trials(&s).unwrap());
    let wide = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| run_trials(&s).unwrap());

    let baseline = render(&stats_a, &summary_a);
    let pass = baseline == render(&stats_b, &summary_b)
        && baseline == render(&single.0, &single.1)
        && baseline == render(&wide.0, &wide.1);
    report(
        8,
        "output determinism",
        pass,
        format!(
            "csv {} bytes, json {} bytes, identical across repeats and 1/8-thread pools: {pass}",
            baseline.0.len(),
            baseline.1.len()
        ),
    );
}
