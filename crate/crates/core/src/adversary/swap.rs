use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2core::Bits;
use crate::oracles::{QuantumChannelOracle, RegisterMap};
use crate::qsim::PureState;

use super::strategy::StrategyKind;

/// Pushes the learner's queries through a swap-attack channel; returns the adversary's guess and the learner's outputs.
pub fn swap_attack_run(
    oracle: &mut QuantumChannelOracle,
    queries: Vec<(PureState, RegisterMap)>,
    rng: &mut (impl Rng + ?Sized),
) -> Result<(Bits, Vec<PureState>)> {
    if !matches!(oracle.tap().strategy().kind(), StrategyKind::SwapAttack) {
        return Err(Error::Strategy("oracle is not tapped by a swap attack".into()));
    }
    let mut outs = Vec::with_capacity(queries.len());
    for (payload, map) in queries {
        outs.push(oracle.quantum_query(payload, &map, rng)?);
    }
    let guess = oracle.tap().memory().learned().ok_or_else(|| Error::Strategy("no query was made".into()))?;
    Ok((guess, outs))
}
