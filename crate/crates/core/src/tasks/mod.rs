//! Forrelation and Simon end to end.

mod forrelation;
mod simon;

pub use forrelation::{
    covert_forrelation, forrelation_decide, forrelation_oracles, forrelation_repetitions, forrelation_view_state,
    gen_forrelation_instance, robust_task_params, swap_accept_probability, walsh_sign, AdversaryClass, ForrelationCase,
    ForrelationInstance, ForrelationTask, FORRELATED_BOUND, GENERATION_ATTEMPTS, SWAP_THRESHOLD, UNCORRELATED_BOUND,
};
pub use simon::{
    covert_simon, example_from_phase, gen_simon_instance, simon_copies, simon_decide, simon_oracles, SimonCase,
    SimonInstance, SimonRun, SimonTask, SimonVerdict,
};
