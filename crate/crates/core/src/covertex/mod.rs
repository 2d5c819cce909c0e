//! Target-covert learners: public examples combined with private statistical oracles.

mod parity;
mod quadratic;

pub use parity::{
    covert_parity_learn, match_query, parity_adversary_guess, parity_guess_probability, play_tournament, MatchRecord,
    ParityAbort, ParityLearnerConfig, ParityRun, BUDGET_SLACK, MATCH_THRESHOLD, MATCH_TOLERANCE,
};
pub use quadratic::{
    covert_quadratic_learn, quadratic_outcome_distribution, quadratic_public_budget, quadratic_transcript_distribution,
    random_upper_triangular, total_variation, QuadraticAbort, QuadraticRun, INFLUENCE_THRESHOLD, INFLUENCE_TOLERANCE,
};
