use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::MemOracle;
use crate::qsim::{MixedState, PureState};

use super::iid::{CertificationRecord, CopyRule, OverlapTally};
use super::round::{overlap_round, overlap_round_in_place, Block};

/// State over `N` blocks of `n_block` qubits each.
#[derive(Clone, Debug)]
pub enum NonIidInput {
    /// A classical mixture of product blocks is represented by sampling one list per trial.
    Product(Vec<Block>),
    /// One dense state; block `j` sits on qubits `[j·n_block, (j+1)·n_block)`.
    Joint { state: PureState, n_block: usize },
}

impl NonIidInput {
    fn blocks(&self) -> usize {
        match self {
            NonIidInput::Product(b) => b.len(),
            NonIidInput::Joint { state, n_block } => state.num_qubits() / n_block,
        }
    }
}

/// The block handed back on acceptance.
#[derive(Clone, Debug)]
pub enum CertifiedBlock {
    Product(Block),
    Mixed(MixedState),
}

impl CertifiedBlock {
    /// Fidelity with `target` on the whole block.
    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        match self {
            CertifiedBlock::Product(b) => b.to_pure()?.fidelity(target),
            CertifiedBlock::Mixed(m) => m.fidelity_pure(target),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonIidRecord {
    pub certification: CertificationRecord,
    pub blocks: usize,
    /// Block order after the random permutation; the last entry is the output block.
    pub permutation: Vec<usize>,
    /// Whether the with-replacement round draw missed a block and was redrawn uniformly.
    pub redrawn: bool,
    /// Copy count of the general non-i.i.d. bound, reported only.
    pub formula_blocks: f64,
}

/// `n^5 / (δ² ε^6)` with unit constant.
pub fn noniid_formula_blocks(n_block: usize, eps: f64, delta: f64) -> f64 {
    (n_block as f64).powi(5) / (delta * delta * eps.powi(6))
}

/// Order in which the `k` measured blocks get their rounds: a with-replacement draw if it covers
/// all of them, otherwise a uniform re-draw.
fn round_order(k: usize, rng: &mut dyn rand::RngCore) -> (Vec<usize>, bool) {
    let draw: Vec<usize> = (0..k).map(|_| rng.random_range(0..k)).collect();
    let mut seen = vec![false; k];
    for &d in &draw {
        seen[d] = true;
    }
    if seen.iter().all(|&s| s) {
        return (draw, false);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    (order, true)
}

/// Permute, certify the first `N−1` blocks one round each, and on acceptance return the last one.
pub fn certify_state_noniid(
    input: NonIidInput,
    oracle: &mut MemOracle,
    eps: f64,
    delta: f64,
    rng: &mut dyn rand::RngCore,
) -> Result<(NonIidRecord, Option<CertifiedBlock>)> {
    let n_block = oracle.function().arity();
    let blocks = input.blocks();
    if blocks < 2 {
        return Err(Error::InsufficientCopies { need: 2, have: blocks });
    }
    let mut permutation: Vec<usize> = (0..blocks).collect();
    permutation.shuffle(rng);
    let (order, redrawn) = round_order(blocks - 1, rng);
    let mut tally = OverlapTally::new(n_block);
    let last = permutation[blocks - 1];
    let output = match input {
        NonIidInput::Product(list) => {
            if list.iter().any(|b| super::round::RoundSource::num_qubits(b) != n_block) {
                return Err(Error::DimensionMismatch("block size differs from the certified function".into()));
            }
            for &k in &order {
                tally.push(&overlap_round(&list[permutation[k]], oracle, rng)?);
            }
            CertifiedBlock::Product(list[last].clone())
        }
        NonIidInput::Joint { mut state, n_block: nb } => {
            if nb != n_block || state.num_qubits() % nb != 0 {
                return Err(Error::DimensionMismatch("joint state does not split into blocks".into()));
            }
            let qubits = |j: usize| (j * nb..(j + 1) * nb).collect::<Vec<_>>();
            for &k in &order {
                tally.push(&overlap_round_in_place(&mut state, &qubits(permutation[k]), oracle, rng)?);
            }
            CertifiedBlock::Mixed(state.reduced(&qubits(last))?)
        }
    };
    let certification = tally.record(eps, delta, CopyRule::Quadratic, blocks - 1, oracle);
    let accepted = certification.accepted;
    let record = NonIidRecord { certification, blocks, permutation, redrawn, formula_blocks: noniid_formula_blocks(n_block, eps, delta) };
    Ok((record, accepted.then_some(output)))
}
