//! Simulator and cryptanalysis harness for a controlled quantum secure
//! direct communication protocol.
//!
//! The protocol sends a secret message directly over a quantum channel:
//! a controller prepares random BB84 qubits, the sender encodes bits with
//! `I` / `i sigma_y` operations and splices in decoy qubits, and the
//! receiver can only decode after the controller reveals what was
//! prepared. Each transmission is guarded by a BB84-style eavesdropping
//! check.
//!
//! The crate executes this protocol honestly and under attack:
//!
//! - [`qubit`]: exact single-qubit amplitudes, Pauli encoding, Born-rule
//!   measurement with seeded randomness;
//! - [`protocol`]: the role state machines, step functions, and the run
//!   orchestrator, with every announcement recorded in a [`transcript`];
//! - [`adversary`]: pluggable channel adversaries, including the
//!   dishonest-controller substitution attack and the masked protocol
//!   variant that defeats it;
//! - [`harness`]: seeded Monte Carlo experiments with analytic error-rate
//!   oracles computed by exhaustive enumeration;
//! - [`report`]: stable CSV/JSON renderings of experiment summaries.
//!
//! ```
//! use qsdc::prelude::*;
//!
//! let scenario = Scenario {
//!     protocol: ProtocolConfig::new(64, 64, Variant::Original, Controllers::Single, 0.0)?,
//!     channel1: AdversaryKind::Honest,
//!     channel2: AdversaryKind::Substitution,
//!     trials: 100,
//!     base_seed: 7,
//!     message_source: MessageSource::RandomPerTrial,
//! };
//! let (stats, summary) = run_trials(&scenario)?;
//! // The dishonest controller reads every message bit...
//! assert_eq!(summary.adversary_accuracy.unwrap().rate, 1.0);
//! // ...but never escapes detection.
//! assert_eq!(stats.aborted_second, 100);
//! # Ok::<(), qsdc::error::HarnessError>(())
//! ```

pub mod adversary;
pub mod carrier;
pub mod error;
pub mod harness;
pub mod protocol;
pub mod qubit;
pub mod report;
pub mod rng;
pub mod shopping;
pub mod stats;
pub mod transcript;

/// The common imports for driving experiments.
pub mod prelude {
    pub use crate::adversary::{Adversary, AdversaryKind, ChannelSlot, FakePolicy};
    pub use crate::carrier::CarrierSequence;
    pub use crate::error::{ConfigError, HarnessError, ProtocolError};
    pub use crate::harness::{
        run_single_trial, run_trials, theoretical_rates, CheckKind, MessageSource, Scenario,
        TrialStats,
    };
    pub use crate::protocol::{
        run_protocol, Controllers, MaskKey, Message, ProtocolConfig, RunOutcome, Variant,
    };
    pub use crate::qubit::{Basis, Bb84StateId, PauliOp, PureState};
    pub use crate::report::{ScenarioEcho, SummaryReport};
    pub use crate::rng::{trial_rng, TrialRng};
    pub use crate::transcript::{PayloadKind, Transcript, Verdict};
}
