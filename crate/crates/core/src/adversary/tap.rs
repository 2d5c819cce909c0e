use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2core::Bits;
use crate::qsim::{Basis, Gate, MixedState, PureState};

use super::strategy::{AdversaryStrategy, ChannelSpec, Directionality, MemoryPolicy, StrategyKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TapDirection {
    Query,
    Response,
}

/// One classical observation the adversary kept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TapRecord {
    pub round: u64,
    pub direction: TapDirection,
    pub action: String,
    pub outcome: Bits,
}

/// Per-trial adversary state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdversaryMemory {
    records: Vec<TapRecord>,
    /// Positions of the adversary's own qubits inside the in-flight state.
    held: Option<Vec<usize>>,
    learned: Option<Bits>,
    leaking: bool,
    round: u64,
}

impl AdversaryMemory {
    pub fn records(&self) -> &[TapRecord] {
        &self.records
    }

    /// What a learn-and-simulate adversary has inferred about the function.
    pub fn learned(&self) -> Option<Bits> {
        self.learned
    }

    pub fn holds_quantum(&self) -> bool {
        self.held.is_some()
    }

    fn note(&mut self, direction: TapDirection, action: &str, outcome: Bits) {
        self.records.push(TapRecord { round: self.round, direction, action: action.into(), outcome });
    }
}

fn random_paulis(state: &mut PureState, register: &[usize], rng: &mut (impl Rng + ?Sized)) -> Result<()> {
    for &q in register {
        match rng.random_range(0..4u8) {
            1 => state.apply_gate(Gate::X, &[q])?,
            2 => state.apply_gate(Gate::Y, &[q])?,
            3 => state.apply_gate(Gate::Z, &[q])?,
            _ => {}
        }
    }
    Ok(())
}

fn replace(state: &PureState, register: &[usize], psi: &PureState, rng: &mut (impl Rng + ?Sized)) -> Result<PureState> {
    if psi.num_qubits() != register.len() {
        return Err(Error::ArityMismatch { expected: register.len(), got: psi.num_qubits() });
    }
    let (_, rest) = state.measure_and_discard(register, Basis::Z, rng)?;
    rest.insert(register, psi)
}

fn channel(
    spec: &ChannelSpec,
    state: PureState,
    register: &[usize],
    memory: &mut AdversaryMemory,
    direction: TapDirection,
    rng: &mut (impl Rng + ?Sized),
) -> Result<PureState> {
    match spec {
        ChannelSpec::Identity => Ok(state),
        ChannelSpec::Depolarize { p } => {
            let mut s = state;
            if rng.random::<f64>() < *p {
                random_paulis(&mut s, register, rng)?;
            }
            Ok(s)
        }
        ChannelSpec::MeasureZ => {
            let mut s = state;
            let out = s.measure(register, Basis::Z, rng)?;
            memory.note(direction, "measure-z", out);
            Ok(s)
        }
        ChannelSpec::Replace { state: psi } => replace(&state, register, psi, rng),
    }
}

/// Applies the strategy's action on `register` for one direction of one round trip.
pub fn apply_tap(
    strategy: &AdversaryStrategy,
    direction: TapDirection,
    state: PureState,
    register: &[usize],
    memory: &mut AdversaryMemory,
    rng: &mut (impl Rng + ?Sized),
) -> Result<PureState> {
    if direction == TapDirection::Query {
        memory.round += 1;
        if strategy.directionality() == Directionality::Unidirectional {
            return Ok(state);
        }
    }
    let before = state.num_qubits();
    let out = match (strategy.kind(), direction) {
        (StrategyKind::Identity, _) => state,
        (StrategyKind::ResponseDepolarize { p }, TapDirection::Response) => {
            channel(&ChannelSpec::Depolarize { p: *p }, state, register, memory, direction, rng)?
        }
        (StrategyKind::ResponseReplace { state: psi }, TapDirection::Response) => replace(&state, register, psi, rng)?,
        (StrategyKind::ResponseMeasureZ, TapDirection::Response) => {
            channel(&ChannelSpec::MeasureZ, state, register, memory, direction, rng)?
        }
        (StrategyKind::SwapAttack, TapDirection::Query) => swap_in(state, register, strategy.memory(), memory)?,
        (StrategyKind::SwapAttack, TapDirection::Response) => swap_out(state, register, memory, rng)?,
        (StrategyKind::AncillaFreeIid { delta_leak, pre, .. }, TapDirection::Query) => {
            let mut s = state;
            memory.leaking = rng.random::<f64>() < *delta_leak;
            if memory.leaking {
                let q = *register.get(pre.qubit).ok_or(Error::IndexOutOfRange { index: pre.qubit, n: register.len() })?;
                let out = s.measure(&[q], pre.basis, rng)?;
                memory.note(direction, "pre-measure", out);
            }
            s
        }
        (StrategyKind::AncillaFreeIid { post_readout, .. }, TapDirection::Response) => {
            let mut s = state;
            if std::mem::take(&mut memory.leaking) && *post_readout {
                let out = s.measure(register, Basis::X, rng)?;
                memory.note(direction, "post-readout-x", out);
            }
            s
        }
        (StrategyKind::Custom { query, .. }, TapDirection::Query) => channel(query, state, register, memory, direction, rng)?,
        (StrategyKind::Custom { response, .. }, TapDirection::Response) => {
            channel(response, state, register, memory, direction, rng)?
        }
        (_, TapDirection::Query) => state,
    };
    if strategy.memory() == MemoryPolicy::None && out.num_qubits() != before {
        return Err(Error::Strategy("ancilla-free strategy changed the register size".into()));
    }
    Ok(out)
}

fn swap_in(state: PureState, register: &[usize], policy: MemoryPolicy, memory: &mut AdversaryMemory) -> Result<PureState> {
    let k = register.len();
    match policy {
        MemoryPolicy::Quantum { qubits } if qubits >= k => {}
        _ => return Err(Error::Strategy(format!("swap attack needs {k} qubits of quantum memory"))),
    }
    let n = state.num_qubits();
    let mut s = state.tensor(&PureState::uniform(k)?)?;
    let held: Vec<usize> = (n..n + k).collect();
    for (&a, &b) in register.iter().zip(&held) {
        s.swap(a, b);
    }
    memory.held = Some(held);
    Ok(s)
}

fn swap_out(state: PureState, register: &[usize], memory: &mut AdversaryMemory, rng: &mut (impl Rng + ?Sized)) -> Result<PureState> {
    let held = memory.held.take().ok_or_else(|| Error::Strategy("swap attack response without a query".into()))?;
    let mut s = state;
    for (&a, &b) in register.iter().zip(&held) {
        s.swap(a, b);
    }
    // the returned dummy is H|s⟩ for a parity, so an X-basis readout gives s
    let (s_hat, mut s) = s.measure_and_discard(&held, Basis::X, rng)?;
    memory.note(TapDirection::Response, "bv-readout", s_hat);
    memory.learned = Some(s_hat);
    s.z_mask(s_hat, register);
    Ok(s)
}

/// Exact channel version of one full round trip on a density matrix; `oracle` applies the oracle unitary.
/// The swap attack has no trajectory-free form here and is rejected.
pub fn round_trip_mixed(
    strategy: &AdversaryStrategy,
    rho: &MixedState,
    register: &[usize],
    oracle: impl Fn(&mut MixedState) -> Result<()>,
) -> Result<MixedState> {
    let exact = |spec: &ChannelSpec, rho: &mut MixedState| -> Result<()> {
        match spec {
            ChannelSpec::Identity => Ok(()),
            ChannelSpec::Depolarize { p } => rho.depolarize(register, *p),
            ChannelSpec::MeasureZ => register.iter().try_for_each(|&q| rho.dephase(q, Basis::Z)),
            ChannelSpec::Replace { state } => rho.replace(register, state),
        }
    };
    let (query, response) = match strategy.kind() {
        StrategyKind::Identity => (ChannelSpec::Identity, ChannelSpec::Identity),
        StrategyKind::ResponseDepolarize { p } => (ChannelSpec::Identity, ChannelSpec::Depolarize { p: *p }),
        StrategyKind::ResponseReplace { state } => (ChannelSpec::Identity, ChannelSpec::Replace { state: state.clone() }),
        StrategyKind::ResponseMeasureZ => (ChannelSpec::Identity, ChannelSpec::MeasureZ),
        StrategyKind::Custom { query, response } => (query.clone(), response.clone()),
        StrategyKind::SwapAttack => return Err(Error::Strategy("swap attack has no exact mixed-state form".into())),
        StrategyKind::AncillaFreeIid { delta_leak, pre, post_readout } => {
            let q = *register.get(pre.qubit).ok_or(Error::IndexOutOfRange { index: pre.qubit, n: register.len() })?;
            let mut quiet = rho.clone();
            oracle(&mut quiet)?;
            let mut leak = rho.clone();
            leak.dephase(q, pre.basis)?;
            oracle(&mut leak)?;
            if *post_readout {
                for &r in register {
                    leak.dephase(r, Basis::X)?;
                }
            }
            return MixedState::mixture(&[(1.0 - delta_leak, quiet), (*delta_leak, leak)]);
        }
    };
    let mut out = rho.clone();
    exact(&query, &mut out)?;
    oracle(&mut out)?;
    exact(&response, &mut out)?;
    Ok(out)
}
