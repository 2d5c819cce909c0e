//! Covert acquisition of phase states through a public quantum oracle.

mod amplify;
mod masked;
mod protocols;

pub use masked::{entangled_pairs, masked_query, unmask_by_cz, unmask_by_measurement, MaskMode, MaskedQueryContext};
pub use protocols::{
    acquire_ancilla_free, acquire_unidirectional, acquisition_target, AcquireParams, AcquisitionResult, LeakParameters,
    DEFAULT_BLOCKS, LEAK_MARGIN,
};
pub use amplify::{
    amplified_estimate_unidirectional, amplified_task_unidirectional, binom_tail, cluster_estimate, ell_rounds,
    estimation_rounds, majority, robust_parameters, task_ancilla_free, PhaseTask, TaskParams, TaskRun,
};
