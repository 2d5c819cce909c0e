//! Shadow-overlap certification of phase states.

mod iid;
mod noniid;
mod round;

pub use iid::{
    acceptance_threshold, overlap_estimate_iid, overlap_estimate_stream, CertificationRecord, CopyRule, OverlapTally, C_SO,
};
pub use noniid::{certify_state_noniid, noniid_formula_blocks, CertifiedBlock, NonIidInput, NonIidRecord};
pub use round::{expected_score, overlap_observable, overlap_round, overlap_round_in_place, Block, OverlapRound, RoundSource};
