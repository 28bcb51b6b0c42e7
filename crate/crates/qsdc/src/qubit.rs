//! Exact single-qubit state math: BB84 preparation, Pauli encoding, and
//! projective measurement in the Z and X bases.
//!
//! States are explicit complex amplitude pairs rather than symbolic labels,
//! so channel adversaries can apply arbitrary transformations; the BB84
//! identity of a state is recovered by eigenstate comparison up to global
//! phase. Global phases are kept as-is (the encoding operation introduces
//! them) and never affect measurement statistics.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::QubitError;

/// Absolute tolerance on `|alpha|^2 + |beta|^2 - 1` accepted at construction.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Tolerance for state equality up to a global phase.
pub const PHASE_EQ_TOLERANCE: f64 = 1e-9;

/// A normalized pure state `alpha|0> + beta|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    alpha: Complex64,
    beta: Complex64,
}

impl PureState {
    /// Builds a state from its amplitudes, rejecting non-unit vectors.
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self, QubitError> {
        let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(QubitError::NotNormalized { norm_sqr });
        }
        Ok(Self { alpha, beta })
    }

    /// Amplitude of `|0>`.
    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    /// Amplitude of `|1>`.
    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// `|alpha|^2 + |beta|^2`; 1 up to floating-point error.
    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    /// Born probability of observing `id` when measuring in its basis.
    pub fn probability_of(&self, id: Bb84StateId) -> f64 {
        let e = prepare(id);
        let overlap = e.alpha.conj() * self.alpha + e.beta.conj() * self.beta;
        overlap.norm_sqr()
    }

    /// Global multiplication by `e^{i theta}`; physically unobservable.
    pub fn phase_shifted(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        Self {
            alpha: self.alpha * phase,
            beta: self.beta * phase,
        }
    }

    /// State equality up to a global phase, within [`PHASE_EQ_TOLERANCE`].
    ///
    /// Two unit vectors are phase-equivalent iff `|<self|other>| = 1`.
    pub fn approx_eq_up_to_phase(&self, other: &Self) -> bool {
        let overlap = self.alpha.conj() * other.alpha + self.beta.conj() * other.beta;
        (overlap.norm() - 1.0).abs() <= PHASE_EQ_TOLERANCE
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})|0> + ({})|1>", self.alpha, self.beta)
    }
}

/// The four BB84 preparation states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Bb84StateId {
    Zero,
    One,
    Plus,
    Minus,
}

/// All four BB84 states, in a fixed order used for uniform draws.
pub const ALL_BB84: [Bb84StateId; 4] = [
    Bb84StateId::Zero,
    Bb84StateId::One,
    Bb84StateId::Plus,
    Bb84StateId::Minus,
];

impl Bb84StateId {
    /// The basis this state is an eigenstate of.
    pub fn basis(self) -> Basis {
        match self {
            Bb84StateId::Zero | Bb84StateId::One => Basis::Z,
            Bb84StateId::Plus | Bb84StateId::Minus => Basis::X,
        }
    }

    /// The image of this state under the bit-flip encoding, up to phase:
    /// Zero <-> One, Plus <-> Minus.
    pub fn toggled(self) -> Self {
        match self {
            Bb84StateId::Zero => Bb84StateId::One,
            Bb84StateId::One => Bb84StateId::Zero,
            Bb84StateId::Plus => Bb84StateId::Minus,
            Bb84StateId::Minus => Bb84StateId::Plus,
        }
    }
}

impl fmt::Display for Bb84StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Bb84StateId::Zero => "0",
            Bb84StateId::One => "1",
            Bb84StateId::Plus => "+",
            Bb84StateId::Minus => "-",
        };
        f.write_str(s)
    }
}

/// A measurement basis: computational (Z) or diagonal (X).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    /// The two eigenstates of this basis, bit-0 eigenstate first.
    pub fn eigenstates(self) -> [Bb84StateId; 2] {
        match self {
            Basis::Z => [Bb84StateId::Zero, Bb84StateId::One],
            Basis::X => [Bb84StateId::Plus, Bb84StateId::Minus],
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
        })
    }
}

/// The two encoding operations: identity for bit 0, `i sigma_y` for bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PauliOp {
    I,
    ISigmaY,
}

impl PauliOp {
    /// The operation encoding one message bit.
    pub fn for_bit(bit: bool) -> Self {
        if bit {
            PauliOp::ISigmaY
        } else {
            PauliOp::I
        }
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauliOp::I => "I",
            PauliOp::ISigmaY => "iY",
        })
    }
}

/// Prepares the exact amplitude pair of a named BB84 state.
pub fn prepare(id: Bb84StateId) -> PureState {
    let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let (alpha, beta) = match id {
        Bb84StateId::Zero => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        Bb84StateId::One => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        Bb84StateId::Plus => (c, c),
        Bb84StateId::Minus => (c, -c),
    };
    PureState { alpha, beta }
}

/// Applies an encoding operation to a state.
///
/// `i sigma_y` acts as `|0> -> -|1>`, `|1> -> |0>`: as a matrix on
/// `(alpha, beta)` it maps to `(beta, -alpha)`.
pub fn apply(op: PauliOp, state: PureState) -> PureState {
    match op {
        PauliOp::I => state,
        PauliOp::ISigmaY => PureState {
            alpha: state.beta,
            beta: -state.alpha,
        },
    }
}

/// Projectively measures a state, collapsing it to a basis eigenstate.
///
/// The outcome is drawn with Born-rule probability and always belongs to
/// the requested basis.
pub fn measure<R: Rng>(state: &PureState, basis: Basis, rng: &mut R) -> (Bb84StateId, PureState) {
    let [first, second] = basis.eigenstates();
    let p_first = state.probability_of(first);
    let outcome = if rng.gen::<f64>() < p_first { first } else { second };
    (outcome, prepare(outcome))
}

/// Draws one of the four BB84 states uniformly.
pub fn random_bb84<R: Rng>(rng: &mut R) -> (Bb84StateId, PureState) {
    let id = ALL_BB84[rng.gen_range(0..4)];
    (id, prepare(id))
}

/// Draws a measurement basis uniformly.
pub fn random_basis<R: Rng>(rng: &mut R) -> Basis {
    if rng.gen_bool(0.5) {
        Basis::Z
    } else {
        Basis::X
    }
}
