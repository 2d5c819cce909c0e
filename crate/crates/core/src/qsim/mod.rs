//! Dense small-n quantum state engine.

mod bell;
mod mixed;
mod povm;
mod snapshot;
mod state;

pub use bell::{
    apply_bell_circuit, bell_distribution, bell_outcome_of_index, bell_povm, bell_sample, bell_sample_exact, BellOutcome,
};
pub use mixed::{
    helstrom_guess_probability, partial_trace, schmidt_rank, trace_distance, MixedState, MIXED_CAP,
};
pub use povm::{sample_povm, Povm, PovmInput};
pub use snapshot::StateSnapshot;
pub use state::{
    apply_gate, apply_phase_oracle, apply_qmem_oracle, measure_qubits, prepare_example_state, prepare_phase_state,
    Basis, Gate, PureState, PURE_CAP,
};

pub(crate) use mixed::hermitian_eigenvalues;

use rand::Rng;

/// Draws an index from a probability vector (mass below the last bucket falls through to it).
pub fn sample_discrete(probs: &[f64], rng: &mut (impl Rng + ?Sized)) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = i;
        if u < p {
            return i;
        }
        u -= p;
    }
    last
}

/// Fidelity of a product of parts with a product target, part by part.
pub fn product_fidelity(parts: &[PureState], targets: &[PureState]) -> crate::Result<f64> {
    if parts.len() != targets.len() {
        return Err(crate::Error::DimensionMismatch("product lengths differ".into()));
    }
    parts.iter().zip(targets).try_fold(1.0, |acc, (p, t)| Ok(acc * p.fidelity(t)?))
}
