//! Pluggable quantum-channel adversaries.
//!
//! An adversary taps a quantum transmission, sees every classical
//! announcement the honest parties see, and may produce a message guess
//! once the run is over. Three behaviors are implemented: the honest
//! pass-through, an external intercept-resend eavesdropper, and the
//! dishonest-controller substitution attack, which steals the encoded
//! sequence and forwards freshly prepared fakes.

use rand::{Rng, RngCore};

use crate::carrier::CarrierSequence;
use crate::error::ConfigError;
use crate::protocol::{Message, PreparationRecord};
use crate::qubit::{measure, prepare, random_basis, random_bb84, Basis, Bb84StateId};
use crate::transcript::{AnnouncePayload, TranscriptEvent};

/// Per-bit message guesses; `None` entries abstain.
pub type MessageGuess = Vec<Option<bool>>;

/// A channel adversary, stateful within a single run.
///
/// One instance per run: storage captured during `tap` must not leak
/// across runs.
pub trait Adversary {
    /// Stable name used for configuration and reporting.
    fn name(&self) -> &'static str;

    /// Taps one quantum transmission and returns whatever travels onward.
    fn tap(&mut self, seq: CarrierSequence, rng: &mut dyn RngCore) -> CarrierSequence;

    /// Sees a classical transcript event, like every party does.
    fn observe(&mut self, _event: &TranscriptEvent) {}

    /// Receives the controller's private preparation record. Only invoked
    /// for the adversary on the encoded-message channel, modeling a
    /// dishonest controller; external adversaries ignore it.
    fn grant_controller_record(&mut self, _record: &PreparationRecord) {}

    /// The adversary's message guess after the run, if it produced one.
    fn inferred_message(&mut self, _rng: &mut dyn RngCore) -> Option<MessageGuess> {
        None
    }
}

/// Which transmission an adversary is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSlot {
    /// Controller(s) to Alice, before anything is encoded.
    First,
    /// Alice to Bob, carrying the encoded message.
    Second,
}

/// Adversary selection by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryKind {
    Honest,
    Intercept,
    Substitution,
}

impl AdversaryKind {
    pub fn name(self) -> &'static str {
        match self {
            AdversaryKind::Honest => "honest",
            AdversaryKind::Intercept => "intercept",
            AdversaryKind::Substitution => "substitution",
        }
    }

    /// Instantiates a fresh adversary for one run.
    pub fn build(self, slot: ChannelSlot) -> Box<dyn Adversary> {
        match self {
            AdversaryKind::Honest => Box::new(HonestChannel),
            AdversaryKind::Intercept => Box::new(InterceptResend::new(slot)),
            AdversaryKind::Substitution => {
                Box::new(ControllerSubstitution::new(FakePolicy::UniformBb84))
            }
        }
    }
}

impl std::str::FromStr for AdversaryKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "honest" => Ok(AdversaryKind::Honest),
            "intercept" => Ok(AdversaryKind::Intercept),
            "substitution" => Ok(AdversaryKind::Substitution),
            other => Err(ConfigError::UnknownAdversary(other.to_string())),
        }
    }
}

impl std::fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The null adversary: forwards everything untouched.
pub fn honest_pass(seq: CarrierSequence) -> CarrierSequence {
    seq
}

/// The null adversary.
#[derive(Debug, Default, Clone, Copy)]
pub struct HonestChannel;

impl Adversary for HonestChannel {
    fn name(&self) -> &'static str {
        "honest"
    }

    fn tap(&mut self, seq: CarrierSequence, _rng: &mut dyn RngCore) -> CarrierSequence {
        honest_pass(seq)
    }
}

/// Measures every slot in a random basis and forwards the collapsed
/// eigenstate, logging each (basis, outcome) pair.
pub fn intercept_resend<R: Rng>(
    mut seq: CarrierSequence,
    rng: &mut R,
) -> (CarrierSequence, Vec<(Basis, Bb84StateId)>) {
    let indices: Vec<usize> = seq.in_flight().map(|(i, _)| i).collect();
    let mut log = Vec::with_capacity(indices.len());
    for i in indices {
        let basis = random_basis(rng);
        let (outcome, collapsed) = measure(seq.state(i), basis, rng);
        seq.replace(i, collapsed);
        log.push((basis, outcome));
    }
    (seq, log)
}

/// External intercept-resend eavesdropper.
///
/// On the encoded-message channel it can turn its measurement log into
/// partial message guesses, but only for runs where the initial states
/// were eventually announced and only at positions where its basis choice
/// happened to match.
pub struct InterceptResend {
    slot: ChannelSlot,
    log: Vec<(Basis, Bb84StateId)>,
    decoy_positions: Option<Vec<usize>>,
    initial_ids: Option<Vec<Bb84StateId>>,
    mask: Option<Vec<bool>>,
}

impl InterceptResend {
    pub fn new(slot: ChannelSlot) -> Self {
        Self {
            slot,
            log: Vec::new(),
            decoy_positions: None,
            initial_ids: None,
            mask: None,
        }
    }

    /// The per-slot measurement log from the last tap.
    pub fn log(&self) -> &[(Basis, Bb84StateId)] {
        &self.log
    }
}

impl Adversary for InterceptResend {
    fn name(&self) -> &'static str {
        "intercept"
    }

    fn tap(&mut self, seq: CarrierSequence, mut rng: &mut dyn RngCore) -> CarrierSequence {
        let (forwarded, log) = intercept_resend(seq, &mut rng);
        self.log = log;
        forwarded
    }

    fn observe(&mut self, event: &TranscriptEvent) {
        if let TranscriptEvent::Announce { payload, .. } = event {
            match payload {
                AnnouncePayload::DecoyPositions(positions) => {
                    self.decoy_positions = Some(positions.clone());
                }
                AnnouncePayload::InitialStates(ids) => {
                    self.initial_ids = Some(ids.clone());
                }
                AnnouncePayload::MaskKey(bits) => {
                    self.mask = Some(bits.clone());
                }
                _ => {}
            }
        }
    }

    fn inferred_message(&mut self, _rng: &mut dyn RngCore) -> Option<MessageGuess> {
        if self.slot != ChannelSlot::Second {
            return None;
        }
        let ids = self.initial_ids.as_ref()?;
        let decoys = self.decoy_positions.as_ref()?;
        let message_positions: Vec<usize> = (0..self.log.len())
            .filter(|p| !decoys.contains(p))
            .collect();
        if message_positions.len() != ids.len() {
            return None;
        }
        let guesses = message_positions
            .iter()
            .zip(ids.iter())
            .enumerate()
            .map(|(j, (&p, &id))| {
                let (basis, outcome) = self.log[p];
                if basis != id.basis() {
                    return None;
                }
                let mut bit = outcome != id;
                if let Some(mask) = &self.mask {
                    bit ^= mask[j];
                }
                Some(bit)
            })
            .collect();
        Some(guesses)
    }
}

/// How the substituting controller prepares the fake sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FakePolicy {
    /// Fresh uniform BB84 states (0.5 conclusive-decoy error rate).
    UniformBb84,
    /// Every fake in one fixed state, for what-if experiments.
    Fixed(Bb84StateId),
}

/// Steals the travelling sequence and forwards freshly prepared fakes.
///
/// The genuine sequence is returned intact and unmeasured.
pub fn substitution_capture<R: Rng>(
    seq: CarrierSequence,
    policy: FakePolicy,
    rng: &mut R,
) -> (CarrierSequence, CarrierSequence) {
    let fakes: Vec<_> = (0..seq.in_flight_len())
        .map(|_| match policy {
            FakePolicy::UniformBb84 => random_bb84(rng).1,
            FakePolicy::Fixed(id) => prepare(id),
        })
        .collect();
    (CarrierSequence::from_states(fakes), seq)
}

/// Decodes the stored genuine sequence once the decoy positions are
/// public: each non-decoy slot is measured in the basis of its initial
/// state, exactly as the receiver would, and the stored decoys are
/// discarded unmeasured (their slots stay in flight).
pub fn substitution_infer<R: Rng>(
    stored: &mut CarrierSequence,
    decoy_positions: &[usize],
    record: &PreparationRecord,
    rng: &mut R,
) -> Message {
    let message_positions: Vec<usize> = stored
        .in_flight()
        .map(|(i, _)| i)
        .filter(|p| !decoy_positions.contains(p))
        .collect();
    assert_eq!(
        message_positions.len(),
        record.len(),
        "preparation record must cover exactly the non-decoy slots"
    );
    let mut bits = Vec::with_capacity(record.len());
    for (j, &p) in message_positions.iter().enumerate() {
        let reference = record.effective_id(j);
        let state = stored.consume(p);
        let (outcome, _) = measure(&state, reference.basis(), rng);
        bits.push(outcome != reference);
    }
    Message::from_bits(bits)
}

/// The dishonest-controller substitution attack.
pub struct ControllerSubstitution {
    policy: FakePolicy,
    record: Option<PreparationRecord>,
    stored: Option<CarrierSequence>,
    decoy_positions: Option<Vec<usize>>,
}

impl ControllerSubstitution {
    pub fn new(policy: FakePolicy) -> Self {
        Self {
            policy,
            record: None,
            stored: None,
            decoy_positions: None,
        }
    }

    /// The captured genuine sequence, if the tap has happened.
    pub fn stored(&self) -> Option<&CarrierSequence> {
        self.stored.as_ref()
    }
}

impl Adversary for ControllerSubstitution {
    fn name(&self) -> &'static str {
        "substitution"
    }

    fn tap(&mut self, seq: CarrierSequence, mut rng: &mut dyn RngCore) -> CarrierSequence {
        let (fake, stored) = substitution_capture(seq, self.policy, &mut rng);
        self.stored = Some(stored);
        fake
    }

    fn observe(&mut self, event: &TranscriptEvent) {
        if let TranscriptEvent::Announce { payload, .. } = event {
            match payload {
                // The controller tracks which of his qubits survive each
                // transmission check.
                AnnouncePayload::CheckMeasurements { positions, .. } => {
                    if let Some(record) = &self.record {
                        let survivors: Vec<usize> = (0..record.len())
                            .filter(|i| !positions.contains(i))
                            .collect();
                        self.record = Some(record.subset(&survivors));
                    }
                }
                AnnouncePayload::DecoyPositions(positions) => {
                    self.decoy_positions = Some(positions.clone());
                }
                _ => {}
            }
        }
    }

    fn grant_controller_record(&mut self, record: &PreparationRecord) {
        self.record = Some(record.clone());
    }

    fn inferred_message(&mut self, mut rng: &mut dyn RngCore) -> Option<MessageGuess> {
        let mut stored = self.stored.take()?;
        let positions = self
            .decoy_positions
            .as_ref()
            .expect("decoy positions were never announced");
        let record = self.record.as_ref()?;
        let inferred = substitution_infer(&mut stored, positions, record, &mut rng);
        Some(inferred.bits().iter().map(|&b| Some(b)).collect())
    }
}

/// A scored message guess.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub inferred: Message,
    /// Fraction of inferred bits matching the true message.
    pub bit_accuracy: f64,
}

impl AttackReport {
    /// Scores a full-length guess against the true message.
    pub fn score(inferred: Message, truth: &Message) -> Self {
        assert_eq!(inferred.len(), truth.len());
        let matching = inferred
            .bits()
            .iter()
            .zip(truth.bits())
            .filter(|(a, b)| a == b)
            .count();
        let bit_accuracy = matching as f64 / truth.len() as f64;
        Self {
            inferred,
            bit_accuracy,
        }
    }
}
