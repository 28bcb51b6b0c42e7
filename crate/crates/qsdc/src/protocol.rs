//! The controlled direct-communication protocol: roles, steps, and the
//! run orchestrator.
//!
//! Alice sends an N-bit message to Bob over a quantum channel using
//! carriers prepared by the controller Charlie (optionally re-encoded by a
//! second controller, Dave). Each transmission is guarded by an
//! eavesdropping check on randomly measured qubits, and Bob can only
//! decode once the controllers reveal their preparation data. The
//! `Improved` variant additionally masks the message with a random key
//! that Alice publishes only after the final check passes, so an attacker
//! who steals the carriers before that check learns nothing.

use rand::Rng;

use crate::adversary::Adversary;
use crate::carrier::CarrierSequence;
use crate::error::{ConfigError, ProtocolError};
use crate::qubit::{
    apply, measure, prepare, random_basis, random_bb84, Bb84StateId, PauliOp, PureState,
};
use crate::transcript::{AnnouncePayload, Party, Transcript, TranscriptEvent, Verdict};

/// Which encoding rule Alice uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Message bits encoded directly on the carriers.
    Original,
    /// Message XOR-masked with a key revealed only after the final check.
    Improved,
}

/// How many controllers prepare the carriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Controllers {
    Single,
    Dual,
}

/// Validated run parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    n: usize,
    delta: usize,
    variant: Variant,
    controllers: Controllers,
    abort_threshold: f64,
}

impl ProtocolConfig {
    /// Builds a config, rejecting out-of-range parameters.
    pub fn new(
        n: usize,
        delta: usize,
        variant: Variant,
        controllers: Controllers,
        abort_threshold: f64,
    ) -> Result<Self, ConfigError> {
        if n == 0 {
            return Err(ConfigError::InvalidMessageLength);
        }
        if delta == 0 {
            return Err(ConfigError::InvalidDelta);
        }
        if !(0.0..=1.0).contains(&abort_threshold) || abort_threshold.is_nan() {
            return Err(ConfigError::InvalidThreshold(abort_threshold));
        }
        Ok(Self {
            n,
            delta,
            variant,
            controllers,
            abort_threshold,
        })
    }

    /// Message length in bits.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Check-set size per eavesdropping check.
    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn controllers(&self) -> Controllers {
        self.controllers
    }

    /// Maximum tolerated conclusive-check error rate.
    pub fn abort_threshold(&self) -> f64 {
        self.abort_threshold
    }

    /// How many qubits the first controller prepares. With two controllers
    /// the second one runs his own check, so an extra delta is budgeted.
    pub fn prepared_len(&self) -> usize {
        match self.controllers {
            Controllers::Single => self.n + self.delta,
            Controllers::Dual => self.n + 2 * self.delta,
        }
    }
}

/// An N-bit secret message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    bits: Vec<bool>,
}

impl Message {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// A uniformly random message of `n` bits.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        Self {
            bits: (0..n).map(|_| rng.gen_bool(0.5)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn xor(&self, other: &[bool]) -> Result<Message, ProtocolError> {
        if other.len() != self.bits.len() {
            return Err(ProtocolError::MaskLengthMismatch {
                expected: self.bits.len(),
                actual: other.len(),
            });
        }
        Ok(Message {
            bits: self
                .bits
                .iter()
                .zip(other.iter())
                .map(|(&a, &b)| a ^ b)
                .collect(),
        })
    }
}

impl std::fmt::Display for Message {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Alice's random mask, drawn fresh per run in the `Improved` variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskKey {
    bits: Vec<bool>,
}

impl MaskKey {
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        Self {
            bits: (0..n).map(|_| rng.gen_bool(0.5)).collect(),
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// The controller-side log of what was actually prepared (and, with a
/// second controller, which re-encoding operations he applied).
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationRecord {
    ids: Vec<Bb84StateId>,
    dave_ops: Option<Vec<PauliOp>>,
}

impl PreparationRecord {
    pub fn new(ids: Vec<Bb84StateId>) -> Self {
        Self {
            ids,
            dave_ops: None,
        }
    }

    pub fn with_ops(ids: Vec<Bb84StateId>, ops: Vec<PauliOp>) -> Self {
        assert_eq!(ids.len(), ops.len(), "record and ops must be aligned");
        Self {
            ids,
            dave_ops: Some(ops),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[Bb84StateId] {
        &self.ids
    }

    pub fn dave_ops(&self) -> Option<&[PauliOp]> {
        self.dave_ops.as_deref()
    }

    /// The reference state at `index` after folding in the second
    /// controller's operation: `i sigma_y` toggles the prepared state
    /// within its basis.
    pub fn effective_id(&self, index: usize) -> Bb84StateId {
        let id = self.ids[index];
        match self.dave_ops.as_ref().map(|ops| ops[index]) {
            Some(PauliOp::ISigmaY) => id.toggled(),
            _ => id,
        }
    }

    pub fn effective_ids(&self) -> Vec<Bb84StateId> {
        (0..self.ids.len()).map(|i| self.effective_id(i)).collect()
    }

    /// The sub-record at the given positions (ascending), e.g. the slots
    /// that survived a check.
    pub fn subset(&self, positions: &[usize]) -> PreparationRecord {
        PreparationRecord {
            ids: positions.iter().map(|&i| self.ids[i]).collect(),
            dave_ops: self
                .dave_ops
                .as_ref()
                .map(|ops| positions.iter().map(|&i| ops[i]).collect()),
        }
    }
}

/// Where Alice hid the decoys in the outgoing sequence, and what they are.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoyRecord {
    positions: Vec<usize>,
    ids: Vec<Bb84StateId>,
}

impl DecoyRecord {
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn ids(&self) -> &[Bb84StateId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Tally of one eavesdropping check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckReport {
    /// Number of qubits measured for the check.
    pub total_checked: usize,
    /// Checks whose measurement basis matched the preparation basis.
    pub conclusive: usize,
    /// Conclusive checks whose outcome contradicted the preparation.
    pub errors: usize,
    pub verdict: Verdict,
}

impl CheckReport {
    /// Scores a check. The verdict is `Abort` when the conclusive error
    /// rate exceeds the threshold, and also when nothing was conclusive
    /// (an unverifiable channel cannot be certified).
    pub fn evaluate(
        total_checked: usize,
        conclusive: usize,
        errors: usize,
        abort_threshold: f64,
    ) -> Self {
        debug_assert!(errors <= conclusive && conclusive <= total_checked);
        let verdict = if conclusive == 0 {
            Verdict::Abort
        } else if errors as f64 / conclusive as f64 > abort_threshold {
            Verdict::Abort
        } else {
            Verdict::Pass
        };
        Self {
            total_checked,
            conclusive,
            errors,
            verdict,
        }
    }
}

/// Result of a check step: the report plus what is left of the sequence.
#[derive(Debug)]
pub struct CheckOutcome {
    pub report: CheckReport,
    /// The unmeasured slots, compacted, in original order.
    pub remaining: CarrierSequence,
    /// Indices (into the checked sequence) of the surviving slots.
    pub survivor_positions: Vec<usize>,
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    /// Bob decoded a message.
    Delivered(Message),
    /// A first-transmission check failed; nothing was ever encoded.
    AbortedFirstCheck,
    /// The decoy check on the encoded sequence failed.
    AbortedSecondCheck,
}

/// Everything a run produces: outcome, full transcript, and check tallies.
#[derive(Debug)]
pub struct RunRecord {
    pub outcome: RunOutcome,
    pub transcript: Transcript,
    /// Reports of the first-transmission checks in order (two with dual
    /// controllers, one otherwise).
    pub first_checks: Vec<CheckReport>,
    /// Report of the decoy check, if the run got that far.
    pub second_check: Option<CheckReport>,
}

/// Step (1): the controller prepares the carrier qubits.
///
/// Each qubit is uniformly one of the four BB84 states; the identities are
/// retained privately in the returned record. With dual controllers the
/// sequence is an extra `delta` long to feed the second controller's check.
pub fn charlie_prepare<R: Rng>(
    config: &ProtocolConfig,
    rng: &mut R,
) -> (CarrierSequence, PreparationRecord) {
    let len = config.prepared_len();
    let mut ids = Vec::with_capacity(len);
    let mut states = Vec::with_capacity(len);
    for _ in 0..len {
        let (id, state) = random_bb84(rng);
        ids.push(id);
        states.push(state);
    }
    (CarrierSequence::from_states(states), PreparationRecord::new(ids))
}

/// The second controller re-encodes every remaining qubit with an
/// independently uniform `I` / `i sigma_y`, keeping the choices private.
pub fn dave_reencode<R: Rng>(
    mut seq: CarrierSequence,
    rng: &mut R,
) -> (CarrierSequence, Vec<PauliOp>) {
    let indices: Vec<usize> = seq.in_flight().map(|(i, _)| i).collect();
    let mut ops = Vec::with_capacity(indices.len());
    for i in indices {
        let op = if rng.gen_bool(0.5) {
            PauliOp::I
        } else {
            PauliOp::ISigmaY
        };
        let new_state = apply(op, *seq.state(i));
        seq.replace(i, new_state);
        ops.push(op);
    }
    (seq, ops)
}

/// Common machinery of every transmission check: the receiver measures
/// `delta` random slots in random bases and announces everything; the
/// record holder scores the basis-matching subset and announces a verdict.
fn transmission_check<R: Rng>(
    mut seq: CarrierSequence,
    delta: usize,
    expected_remaining: usize,
    expected_ids: &[Bb84StateId],
    abort_threshold: f64,
    measurer: Party,
    judge: Party,
    context: &'static str,
    rng: &mut R,
    transcript: &mut Transcript,
) -> Result<CheckOutcome, ProtocolError> {
    let in_flight = seq.in_flight_len();
    if in_flight != expected_remaining + delta {
        return Err(ProtocolError::LengthMismatch {
            context,
            expected: expected_remaining + delta,
            actual: in_flight,
        });
    }
    if expected_ids.len() != in_flight {
        return Err(ProtocolError::LengthMismatch {
            context: "preparation record",
            expected: in_flight,
            actual: expected_ids.len(),
        });
    }

    let mut positions = rand::seq::index::sample(rng, in_flight, delta).into_vec();
    positions.sort_unstable();

    let mut bases = Vec::with_capacity(delta);
    let mut outcomes = Vec::with_capacity(delta);
    for &pos in &positions {
        let basis = random_basis(rng);
        let state = seq.consume(pos);
        let (outcome, _) = measure(&state, basis, rng);
        bases.push(basis);
        outcomes.push(outcome);
    }

    transcript.push(TranscriptEvent::Announce {
        actor: measurer,
        payload: AnnouncePayload::CheckMeasurements {
            positions: positions.clone(),
            bases: bases.clone(),
            outcomes: outcomes.clone(),
        },
    });

    let mut conclusive = 0usize;
    let mut errors = 0usize;
    for ((&pos, &basis), &outcome) in positions.iter().zip(&bases).zip(&outcomes) {
        let expected = expected_ids[pos];
        if basis == expected.basis() {
            conclusive += 1;
            if outcome != expected {
                errors += 1;
            }
        }
    }

    let report = CheckReport::evaluate(delta, conclusive, errors, abort_threshold);
    transcript.push(TranscriptEvent::Verdict {
        actor: judge,
        verdict: report.verdict,
    });

    let survivor_positions: Vec<usize> = seq.in_flight().map(|(i, _)| i).collect();
    let remaining = seq.compact();
    Ok(CheckOutcome {
        report,
        remaining,
        survivor_positions,
    })
}

/// Step (2): Alice checks the first transmission against the controller's
/// record. Returns the report and the N surviving message carriers.
pub fn alice_first_check<R: Rng>(
    seq: CarrierSequence,
    config: &ProtocolConfig,
    record_holder: &PreparationRecord,
    rng: &mut R,
    transcript: &mut Transcript,
) -> Result<CheckOutcome, ProtocolError> {
    transmission_check(
        seq,
        config.delta(),
        config.n(),
        &record_holder.effective_ids(),
        config.abort_threshold(),
        Party::Alice,
        Party::Charlie,
        "first check",
        rng,
        transcript,
    )
}

/// Step (3): encode message bits directly on the carriers (`Original`).
pub fn alice_encode(
    mut remaining: CarrierSequence,
    message: &Message,
) -> Result<CarrierSequence, ProtocolError> {
    if remaining.in_flight_len() != message.len() {
        return Err(ProtocolError::LengthMismatch {
            context: "encode",
            expected: message.len(),
            actual: remaining.in_flight_len(),
        });
    }
    let indices: Vec<usize> = remaining.in_flight().map(|(i, _)| i).collect();
    for (slot, &bit) in indices.into_iter().zip(message.bits()) {
        let new_state = apply(PauliOp::for_bit(bit), *remaining.state(slot));
        remaining.replace(slot, new_state);
    }
    Ok(remaining)
}

/// Step (3'): draw a fresh uniform mask and encode `mask XOR message`
/// (`Improved`). The mask stays with Alice until the final check passes.
pub fn alice_encode_improved<R: Rng>(
    remaining: CarrierSequence,
    message: &Message,
    rng: &mut R,
) -> Result<(CarrierSequence, MaskKey), ProtocolError> {
    let mask = MaskKey::random(message.len(), rng);
    let masked = message.xor(mask.bits())?;
    let encoded = alice_encode(remaining, &masked)?;
    Ok((encoded, mask))
}

/// Step (3), second half: generate `delta` fresh random decoys and splice
/// them into the encoded sequence at uniformly random positions.
pub fn insert_decoys<R: Rng>(
    mut encoded: CarrierSequence,
    delta: usize,
    rng: &mut R,
) -> Result<(CarrierSequence, DecoyRecord), ConfigError> {
    if delta == 0 {
        return Err(ConfigError::InvalidDelta);
    }
    let n = encoded.in_flight_len();
    let total = n + delta;

    let mut positions = rand::seq::index::sample(rng, total, delta).into_vec();
    positions.sort_unstable();

    let mut decoy_ids = Vec::with_capacity(delta);
    let message_states = encoded.consume_all();
    let mut message_iter = message_states.into_iter();
    let mut slots = Vec::with_capacity(total);
    let mut next_decoy = 0usize;
    for slot in 0..total {
        if next_decoy < delta && positions[next_decoy] == slot {
            let (id, state) = random_bb84(rng);
            decoy_ids.push(id);
            slots.push(state);
            next_decoy += 1;
        } else {
            slots.push(message_iter.next().expect("message slots exhausted"));
        }
    }

    Ok((
        CarrierSequence::from_states(slots),
        DecoyRecord {
            positions,
            ids: decoy_ids,
        },
    ))
}

/// Step (4): Alice reveals the decoy positions, Bob measures them in
/// random bases and announces the results, and Alice scores them against
/// what she actually inserted. Returns the N message carriers.
pub fn bob_second_check<R: Rng>(
    mut s1: CarrierSequence,
    decoys: &DecoyRecord,
    config: &ProtocolConfig,
    rng: &mut R,
    transcript: &mut Transcript,
) -> Result<CheckOutcome, ProtocolError> {
    let in_flight = s1.in_flight_len();
    if in_flight != config.n() + config.delta() {
        return Err(ProtocolError::LengthMismatch {
            context: "second check",
            expected: config.n() + config.delta(),
            actual: in_flight,
        });
    }
    if decoys.len() != config.delta() {
        return Err(ProtocolError::LengthMismatch {
            context: "decoy record",
            expected: config.delta(),
            actual: decoys.len(),
        });
    }
    for &pos in decoys.positions() {
        if pos >= in_flight {
            return Err(ProtocolError::DecoyPositionOutOfRange {
                position: pos,
                len: in_flight,
            });
        }
    }

    transcript.push(TranscriptEvent::Announce {
        actor: Party::Alice,
        payload: AnnouncePayload::DecoyPositions(decoys.positions().to_vec()),
    });

    let mut bases = Vec::with_capacity(decoys.len());
    let mut outcomes = Vec::with_capacity(decoys.len());
    for &pos in decoys.positions() {
        let basis = random_basis(rng);
        let state = s1.consume(pos);
        let (outcome, _) = measure(&state, basis, rng);
        bases.push(basis);
        outcomes.push(outcome);
    }

    transcript.push(TranscriptEvent::Announce {
        actor: Party::Bob,
        payload: AnnouncePayload::DecoyMeasurements {
            bases: bases.clone(),
            outcomes: outcomes.clone(),
        },
    });

    let mut conclusive = 0usize;
    let mut errors = 0usize;
    for ((&expected, &basis), &outcome) in decoys.ids().iter().zip(&bases).zip(&outcomes) {
        if basis == expected.basis() {
            conclusive += 1;
            if outcome != expected {
                errors += 1;
            }
        }
    }

    let report = CheckReport::evaluate(decoys.len(), conclusive, errors, config.abort_threshold());
    transcript.push(TranscriptEvent::Verdict {
        actor: Party::Alice,
        verdict: report.verdict,
    });

    let survivor_positions: Vec<usize> = s1.in_flight().map(|(i, _)| i).collect();
    let remaining = s1.compact();
    Ok(CheckOutcome {
        report,
        remaining,
        survivor_positions,
    })
}

/// Step (5): Bob measures each message carrier in the basis of its
/// announced initial state; a flipped outcome decodes as bit 1.
pub fn bob_decode<R: Rng>(
    mut remaining: CarrierSequence,
    initial: &PreparationRecord,
    rng: &mut R,
) -> Result<Message, ProtocolError> {
    if remaining.in_flight_len() != initial.len() {
        return Err(ProtocolError::LengthMismatch {
            context: "decode",
            expected: initial.len(),
            actual: remaining.in_flight_len(),
        });
    }
    let indices: Vec<usize> = remaining.in_flight().map(|(i, _)| i).collect();
    let mut bits = Vec::with_capacity(indices.len());
    for (i, slot) in indices.into_iter().enumerate() {
        let reference = initial.effective_id(i);
        let state = remaining.consume(slot);
        let (outcome, _) = measure(&state, reference.basis(), rng);
        bits.push(outcome != reference);
    }
    Ok(Message::from_bits(bits))
}

/// Step (5'): decode, then strip Alice's published mask.
pub fn bob_decode_improved<R: Rng>(
    remaining: CarrierSequence,
    initial: &PreparationRecord,
    mask: &MaskKey,
    rng: &mut R,
) -> Result<Message, ProtocolError> {
    let masked = bob_decode(remaining, initial, rng)?;
    masked.xor(mask.bits())
}

/// Runs one complete protocol execution.
///
/// Every quantum transmission is routed through the adversary tapping that
/// channel (`channel1`: controller(s) to Alice; `channel2`: Alice to Bob),
/// and every transcript event is shown to both adversaries as it happens.
/// The second-channel adversary is additionally granted the controller's
/// preparation record, modeling a dishonest controller; honest and
/// external adversaries ignore it.
pub fn run_protocol<R: Rng>(
    config: &ProtocolConfig,
    channel1: &mut dyn Adversary,
    channel2: &mut dyn Adversary,
    message: &Message,
    rng: &mut R,
) -> Result<RunRecord, ProtocolError> {
    if message.len() != config.n() {
        return Err(ProtocolError::LengthMismatch {
            context: "message",
            expected: config.n(),
            actual: message.len(),
        });
    }

    let mut transcript = Transcript::new();
    let mut seen = 0usize;
    let mut first_checks = Vec::new();

    // Keeps both adversaries' view of the classical channel current.
    macro_rules! sync_observers {
        () => {
            while seen < transcript.len() {
                let event = transcript.events()[seen].clone();
                channel1.observe(&event);
                channel2.observe(&event);
                seen += 1;
            }
        };
    }

    // Step (1): preparation. A dishonest controller on the second channel
    // legitimately knows what was prepared.
    let (seq0, record) = charlie_prepare(config, rng);
    channel2.grant_controller_record(&PreparationRecord::new(record.ids().to_vec()));

    // First transmission(s), with a check after each hop.
    let (remaining, message_record) = match config.controllers() {
        Controllers::Single => {
            transcript.push(TranscriptEvent::QuantumSend {
                from: Party::Charlie,
                to: Party::Alice,
                length: seq0.in_flight_len(),
            });
            let seq0 = channel1.tap(seq0, rng);
            sync_observers!();

            let check = alice_first_check(seq0, config, &record, rng, &mut transcript)?;
            sync_observers!();
            first_checks.push(check.report);
            if check.report.verdict == Verdict::Abort {
                return Ok(RunRecord {
                    outcome: RunOutcome::AbortedFirstCheck,
                    transcript,
                    first_checks,
                    second_check: None,
                });
            }
            let message_record = record.subset(&check.survivor_positions);
            (check.remaining, message_record)
        }
        Controllers::Dual => {
            transcript.push(TranscriptEvent::QuantumSend {
                from: Party::Charlie,
                to: Party::Dave,
                length: seq0.in_flight_len(),
            });
            let seq0 = channel1.tap(seq0, rng);
            sync_observers!();

            // Dave runs the same check Alice would, against Charlie's record.
            let dave_check = transmission_check(
                seq0,
                config.delta(),
                config.n() + config.delta(),
                &record.effective_ids(),
                config.abort_threshold(),
                Party::Dave,
                Party::Charlie,
                "controller check",
                rng,
                &mut transcript,
            )?;
            sync_observers!();
            first_checks.push(dave_check.report);
            if dave_check.report.verdict == Verdict::Abort {
                return Ok(RunRecord {
                    outcome: RunOutcome::AbortedFirstCheck,
                    transcript,
                    first_checks,
                    second_check: None,
                });
            }
            let surviving = record.subset(&dave_check.survivor_positions);

            let (reencoded, ops) = dave_reencode(dave_check.remaining, rng);
            let joint = PreparationRecord::with_ops(surviving.ids().to_vec(), ops);

            transcript.push(TranscriptEvent::QuantumSend {
                from: Party::Dave,
                to: Party::Alice,
                length: reencoded.in_flight_len(),
            });
            let reencoded = channel1.tap(reencoded, rng);
            sync_observers!();

            let check = alice_first_check(reencoded, config, &joint, rng, &mut transcript)?;
            sync_observers!();
            first_checks.push(check.report);
            if check.report.verdict == Verdict::Abort {
                return Ok(RunRecord {
                    outcome: RunOutcome::AbortedFirstCheck,
                    transcript,
                    first_checks,
                    second_check: None,
                });
            }
            let message_record = joint.subset(&check.survivor_positions);
            (check.remaining, message_record)
        }
    };

    // Step (3)/(3'): encoding, then decoy insertion.
    let (encoded, mask) = match config.variant() {
        Variant::Original => (alice_encode(remaining, message)?, None),
        Variant::Improved => {
            let (encoded, mask) = alice_encode_improved(remaining, message, rng)?;
            (encoded, Some(mask))
        }
    };
    let (s1, decoys) =
        insert_decoys(encoded, config.delta(), rng).expect("config guarantees delta >= 1");

    // Second transmission.
    transcript.push(TranscriptEvent::QuantumSend {
        from: Party::Alice,
        to: Party::Bob,
        length: s1.in_flight_len(),
    });
    let s1 = channel2.tap(s1, rng);
    sync_observers!();

    // Step (4)/(4'): decoy check; an abort permanently suppresses the mask.
    let check = bob_second_check(s1, &decoys, config, rng, &mut transcript)?;
    sync_observers!();
    let second_report = check.report;
    if second_report.verdict == Verdict::Abort {
        return Ok(RunRecord {
            outcome: RunOutcome::AbortedSecondCheck,
            transcript,
            first_checks,
            second_check: Some(second_report),
        });
    }

    if let Some(mask) = &mask {
        transcript.push(TranscriptEvent::Announce {
            actor: Party::Alice,
            payload: AnnouncePayload::MaskKey(mask.bits().to_vec()),
        });
        sync_observers!();
    }

    // Step (5)/(5'): the controllers reveal their data and Bob decodes.
    transcript.push(TranscriptEvent::Announce {
        actor: Party::Charlie,
        payload: AnnouncePayload::InitialStates(message_record.ids().to_vec()),
    });
    if let Some(ops) = message_record.dave_ops() {
        transcript.push(TranscriptEvent::Announce {
            actor: Party::Dave,
            payload: AnnouncePayload::ControllerOps(ops.to_vec()),
        });
    }
    sync_observers!();

    let decoded = match &mask {
        None => bob_decode(check.remaining, &message_record, rng)?,
        Some(mask) => bob_decode_improved(check.remaining, &message_record, mask, rng)?,
    };

    Ok(RunRecord {
        outcome: RunOutcome::Delivered(decoded),
        transcript,
        first_checks,
        second_check: Some(second_report),
    })
}

/// Convenience: the exact state an honest encoder would put on the wire
/// for a given initial state and bit.
pub fn encoded_state(initial: Bb84StateId, bit: bool) -> PureState {
    apply(PauliOp::for_bit(bit), prepare(initial))
}
