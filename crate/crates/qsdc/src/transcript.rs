//! Time-ordered record of everything observable in a protocol run.
//!
//! Every classical announcement and quantum transmission lands here,
//! verbatim, in step order. Auditing an attack (or the fix) amounts to
//! querying this log: e.g. an aborted masked run must contain no mask-key
//! announcement.

use std::fmt;

use crate::qubit::{Basis, Bb84StateId, PauliOp};

/// A protocol participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
    Charlie,
    Dave,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "Alice",
            Party::Bob => "Bob",
            Party::Charlie => "Charlie",
            Party::Dave => "Dave",
        })
    }
}

/// Verdict of an eavesdropping check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Abort,
}

/// The classical payload of an announcement, recorded verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum AnnouncePayload {
    /// Positions, bases, and outcomes of a transmission check, aligned.
    CheckMeasurements {
        positions: Vec<usize>,
        bases: Vec<Basis>,
        outcomes: Vec<Bb84StateId>,
    },
    /// The secret decoy positions, revealed for the second check.
    DecoyPositions(Vec<usize>),
    /// Bases and outcomes of the decoy measurements, aligned with the
    /// announced positions.
    DecoyMeasurements {
        bases: Vec<Basis>,
        outcomes: Vec<Bb84StateId>,
    },
    /// The controller's initial states of the message qubits, in order.
    InitialStates(Vec<Bb84StateId>),
    /// A second controller's re-encoding operations, in order.
    ControllerOps(Vec<PauliOp>),
    /// The sender's mask key, published only after a passing final check.
    MaskKey(Vec<bool>),
}

/// Discriminant of [`AnnouncePayload`], for queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    CheckMeasurements,
    DecoyPositions,
    DecoyMeasurements,
    InitialStates,
    ControllerOps,
    MaskKey,
}

impl AnnouncePayload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            AnnouncePayload::CheckMeasurements { .. } => PayloadKind::CheckMeasurements,
            AnnouncePayload::DecoyPositions(_) => PayloadKind::DecoyPositions,
            AnnouncePayload::DecoyMeasurements { .. } => PayloadKind::DecoyMeasurements,
            AnnouncePayload::InitialStates(_) => PayloadKind::InitialStates,
            AnnouncePayload::ControllerOps(_) => PayloadKind::ControllerOps,
            AnnouncePayload::MaskKey(_) => PayloadKind::MaskKey,
        }
    }
}

/// One observable event in a run.
#[derive(Debug, Clone, PartialEq)]
pub enum TranscriptEvent {
    /// A batch of qubits crossed a quantum channel.
    QuantumSend {
        from: Party,
        to: Party,
        length: usize,
    },
    /// A classical broadcast.
    Announce {
        actor: Party,
        payload: AnnouncePayload,
    },
    /// A check verdict, visible to all parties.
    Verdict { actor: Party, verdict: Verdict },
}

/// The ordered event log of one protocol run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    events: Vec<TranscriptEvent>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: TranscriptEvent) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[TranscriptEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Index of the first announcement of the given kind, if any.
    pub fn first_announce(&self, kind: PayloadKind) -> Option<usize> {
        self.events.iter().position(|e| {
            matches!(e, TranscriptEvent::Announce { payload, .. } if payload.kind() == kind)
        })
    }

    pub fn contains_announce(&self, kind: PayloadKind) -> bool {
        self.first_announce(kind).is_some()
    }

    /// Index of the n-th verdict event (0-based), if any.
    pub fn nth_verdict(&self, n: usize) -> Option<(usize, Verdict)> {
        self.events
            .iter()
            .enumerate()
            .filter_map(|(i, e)| match e {
                TranscriptEvent::Verdict { verdict, .. } => Some((i, *verdict)),
                _ => None,
            })
            .nth(n)
    }

    /// Renders the log as numbered human-readable lines.
    pub fn render_text(&self) -> String {
        use fmt::Write;
        let mut out = String::new();
        for (i, event) in self.events.iter().enumerate() {
            let _ = write!(out, "{:4}  ", i + 1);
            match event {
                TranscriptEvent::QuantumSend { from, to, length } => {
                    let _ = writeln!(out, "{from} -> {to}: quantum transmission of {length} qubits");
                }
                TranscriptEvent::Announce { actor, payload } => match payload {
                    AnnouncePayload::CheckMeasurements {
                        positions,
                        bases,
                        outcomes,
                    } => {
                        let triples: Vec<String> = positions
                            .iter()
                            .zip(bases.iter().zip(outcomes.iter()))
                            .map(|(p, (b, o))| format!("{p}:{b}={o}"))
                            .collect();
                        let _ = writeln!(
                            out,
                            "{actor} announces check measurements [{}]",
                            triples.join(" ")
                        );
                    }
                    AnnouncePayload::DecoyPositions(positions) => {
                        let list: Vec<String> = positions.iter().map(|p| p.to_string()).collect();
                        let _ =
                            writeln!(out, "{actor} announces decoy positions [{}]", list.join(" "));
                    }
                    AnnouncePayload::DecoyMeasurements { bases, outcomes } => {
                        let pairs: Vec<String> = bases
                            .iter()
                            .zip(outcomes.iter())
                            .map(|(b, o)| format!("{b}={o}"))
                            .collect();
                        let _ = writeln!(
                            out,
                            "{actor} announces decoy measurements [{}]",
                            pairs.join(" ")
                        );
                    }
                    AnnouncePayload::InitialStates(ids) => {
                        let list: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
                        let _ =
                            writeln!(out, "{actor} announces initial states [{}]", list.join(""));
                    }
                    AnnouncePayload::ControllerOps(ops) => {
                        let list: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
                        let _ = writeln!(
                            out,
                            "{actor} announces re-encoding operations [{}]",
                            list.join(" ")
                        );
                    }
                    AnnouncePayload::MaskKey(bits) => {
                        let s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                        let _ = writeln!(out, "{actor} announces mask key {s}");
                    }
                },
                TranscriptEvent::Verdict { actor, verdict } => {
                    let v = match verdict {
                        Verdict::Pass => "PASS",
                        Verdict::Abort => "ABORT",
                    };
                    let _ = writeln!(out, "{actor} declares check verdict {v}");
                }
            }
        }
        out
    }
}
