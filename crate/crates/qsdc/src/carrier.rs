//! Ordered sequences of qubit slots with a per-slot lifecycle.
//!
//! A slot is `InFlight` until some step measures or re-encodes it, after
//! which it is `Consumed` and must never be touched again. Violations are
//! bugs in the caller, not protocol outcomes, so they panic.

use crate::qubit::PureState;

/// Lifecycle of one slot in a [`CarrierSequence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotState {
    InFlight,
    Consumed,
}

#[derive(Debug, Clone)]
struct Slot {
    state: PureState,
    lifecycle: SlotState,
}

/// An ordered batch of qubits travelling (or having travelled) a channel.
#[derive(Debug, Clone)]
pub struct CarrierSequence {
    slots: Vec<Slot>,
}

impl CarrierSequence {
    /// Wraps freshly prepared states; every slot starts in flight.
    pub fn from_states(states: Vec<PureState>) -> Self {
        Self {
            slots: states
                .into_iter()
                .map(|state| Slot {
                    state,
                    lifecycle: SlotState::InFlight,
                })
                .collect(),
        }
    }

    /// Total number of slots, consumed or not.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Number of slots still in flight.
    pub fn in_flight_len(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| s.lifecycle == SlotState::InFlight)
            .count()
    }

    pub fn lifecycle(&self, index: usize) -> SlotState {
        self.slots[index].lifecycle
    }

    /// Read access to an in-flight slot's state.
    ///
    /// Panics if the slot was already consumed.
    pub fn state(&self, index: usize) -> &PureState {
        let slot = &self.slots[index];
        assert_eq!(
            slot.lifecycle,
            SlotState::InFlight,
            "slot {index} was already consumed"
        );
        &slot.state
    }

    /// Takes an in-flight slot out of circulation (measuring it, say).
    ///
    /// Panics if the slot was already consumed.
    pub fn consume(&mut self, index: usize) -> PureState {
        let slot = &mut self.slots[index];
        assert_eq!(
            slot.lifecycle,
            SlotState::InFlight,
            "slot {index} was already consumed"
        );
        slot.lifecycle = SlotState::Consumed;
        slot.state
    }

    /// Overwrites an in-flight slot, e.g. after an adversary re-prepares it.
    ///
    /// Panics if the slot was already consumed.
    pub fn replace(&mut self, index: usize, state: PureState) {
        let slot = &mut self.slots[index];
        assert_eq!(
            slot.lifecycle,
            SlotState::InFlight,
            "slot {index} was already consumed"
        );
        slot.state = state;
    }

    /// Indices and states of the slots still in flight, in order.
    pub fn in_flight(&self) -> impl Iterator<Item = (usize, &PureState)> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.lifecycle == SlotState::InFlight)
            .map(|(i, s)| (i, &s.state))
    }

    /// A new sequence holding only the in-flight slots, in original order.
    pub fn compact(&self) -> CarrierSequence {
        CarrierSequence::from_states(self.in_flight().map(|(_, s)| *s).collect())
    }

    /// Consumes every in-flight slot, returning the states in order.
    pub fn consume_all(&mut self) -> Vec<PureState> {
        let indices: Vec<usize> = self.in_flight().map(|(i, _)| i).collect();
        indices.into_iter().map(|i| self.consume(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{prepare, Bb84StateId};

    fn seq_of(n: usize) -> CarrierSequence {
        CarrierSequence::from_states(vec![prepare(Bb84StateId::Zero); n])
    }

    #[test]
    fn consume_removes_from_flight() {
        let mut seq = seq_of(4);
        seq.consume(1);
        assert_eq!(seq.len(), 4);
        assert_eq!(seq.in_flight_len(), 3);
        assert_eq!(seq.lifecycle(1), SlotState::Consumed);
        let indices: Vec<usize> = seq.in_flight().map(|(i, _)| i).collect();
        assert_eq!(indices, vec![0, 2, 3]);
    }

    #[test]
    fn compact_preserves_order() {
        let mut seq = CarrierSequence::from_states(vec![
            prepare(Bb84StateId::Zero),
            prepare(Bb84StateId::One),
            prepare(Bb84StateId::Plus),
        ]);
        seq.consume(1);
        let compacted = seq.compact();
        assert_eq!(compacted.len(), 2);
        assert_eq!(*compacted.state(0), prepare(Bb84StateId::Zero));
        assert_eq!(*compacted.state(1), prepare(Bb84StateId::Plus));
    }

    #[test]
    #[should_panic(expected = "already consumed")]
    fn double_consume_panics() {
        let mut seq = seq_of(2);
        seq.consume(0);
        seq.consume(0);
    }

    #[test]
    #[should_panic(expected = "already consumed")]
    fn touching_consumed_slot_panics() {
        let mut seq = seq_of(2);
        seq.consume(0);
        let _ = seq.state(0);
    }
}
