//! Strategy-covert statistical queries: random sketches of polynomial queries and classical shadows.

mod shadows;
mod sketch;

pub use shadows::{
    batch_size, covert_qsq_answers, median_batches, shadow_collect, shadow_estimate, shadow_shots, PauliObservable,
    PauliTerm, ShadowSet, ShadowShot, MAX_LOCALITY,
};
pub use sketch::{
    covert_sq_estimate, monomial_basis, monomial_value, moment_vector, sample_projection, sketch_decode,
    sketch_dimension, sketch_encode, sketch_simulator, SketchParams, SketchPlan, SketchQuery, SketchRun,
    JL_CONSTANT,
};
