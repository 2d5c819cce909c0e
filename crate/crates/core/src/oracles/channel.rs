use rand::Rng;

use crate::adversary::{apply_tap, round_trip_mixed, AdversaryMemory, AdversaryStrategy, StrategyKind, TapDirection};
use crate::error::{Error, Result};
use crate::gf2core::BooleanFunction;
use crate::qsim::{MixedState, PureState};

use super::transcript::{Counters, Direction, OracleKind, Transcript, Visibility};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ChannelKind {
    /// `|x⟩ ↦ (−1)^{f(x)}|x⟩`.
    QPh,
    /// `|x, y⟩ ↦ |x, y ⊕ f(x)⟩`.
    QMem,
}

/// Which payload qubits the oracle acts on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegisterMap {
    Phase { targets: Vec<usize> },
    Mem { inputs: Vec<usize>, outputs: Vec<usize> },
}

impl RegisterMap {
    pub fn phase(targets: impl IntoIterator<Item = usize>) -> Self {
        RegisterMap::Phase { targets: targets.into_iter().collect() }
    }

    pub fn mem(inputs: impl IntoIterator<Item = usize>, outputs: impl IntoIterator<Item = usize>) -> Self {
        RegisterMap::Mem { inputs: inputs.into_iter().collect(), outputs: outputs.into_iter().collect() }
    }

    /// Every qubit that travels to the oracle and back.
    pub fn register(&self) -> Vec<usize> {
        match self {
            RegisterMap::Phase { targets } => targets.clone(),
            RegisterMap::Mem { inputs, outputs } => inputs.iter().chain(outputs).copied().collect(),
        }
    }
}

/// The adversary's interception point on the learner–oracle link.
#[derive(Clone, Debug)]
pub struct TapChannel {
    strategy: AdversaryStrategy,
    memory: AdversaryMemory,
    log: Transcript,
}

impl TapChannel {
    pub fn new(strategy: AdversaryStrategy) -> Self {
        Self { strategy, memory: AdversaryMemory::default(), log: Transcript::new() }
    }

    pub fn strategy(&self) -> &AdversaryStrategy {
        &self.strategy
    }

    pub fn memory(&self) -> &AdversaryMemory {
        &self.memory
    }

    /// Events the adversary itself produced; always public.
    pub fn log(&self) -> &Transcript {
        &self.log
    }

    fn apply(
        &mut self,
        kind: OracleKind,
        direction: TapDirection,
        state: PureState,
        register: &[usize],
        counters: Counters,
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<PureState> {
        let seen = self.memory.records().len();
        let out = apply_tap(&self.strategy, direction, state, register, &mut self.memory, rng)?;
        let payload = format!("{}:{:?}", self.strategy.name(), &self.memory.records()[seen..]);
        let dir = match direction {
            TapDirection::Query => Direction::Query,
            TapDirection::Response => Direction::Response,
        };
        self.log.record(kind, Visibility::Public, dir, payload.as_bytes(), counters);
        Ok(out)
    }
}

/// Quantum oracle reached through an adversary tap.
#[derive(Clone, Debug)]
pub struct QuantumChannelOracle {
    f: BooleanFunction,
    kind: ChannelKind,
    tap: TapChannel,
    visibility: Visibility,
    counters: Counters,
    transcript: Transcript,
}

impl QuantumChannelOracle {
    pub fn new(f: BooleanFunction, kind: ChannelKind, strategy: AdversaryStrategy, visibility: Visibility) -> Result<Self> {
        if kind == ChannelKind::QPh && f.width() != 1 {
            return Err(Error::InvalidFunction("phase oracle needs width 1".into()));
        }
        if kind == ChannelKind::QMem && matches!(strategy.kind(), StrategyKind::SwapAttack) {
            return Err(Error::Strategy("swap attack simulates phase oracles only".into()));
        }
        Ok(Self { f, kind, tap: TapChannel::new(strategy), visibility, counters: Counters::default(), transcript: Transcript::new() })
    }

    /// Untapped oracle.
    pub fn honest(f: BooleanFunction, kind: ChannelKind) -> Result<Self> {
        Self::new(f, kind, AdversaryStrategy::identity(), Visibility::Public)
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.f
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    fn oracle_kind(&self) -> OracleKind {
        match self.kind {
            ChannelKind::QPh => OracleKind::Qph,
            ChannelKind::QMem => OracleKind::Qmem,
        }
    }

    fn check_map(&self, map: &RegisterMap) -> Result<()> {
        match (self.kind, map) {
            (ChannelKind::QPh, RegisterMap::Phase { .. }) | (ChannelKind::QMem, RegisterMap::Mem { .. }) => Ok(()),
            _ => Err(Error::UnsupportedQuery("register map does not match the oracle kind".into())),
        }
    }

    fn apply_oracle(&self, state: &mut PureState, map: &RegisterMap) -> Result<()> {
        match map {
            RegisterMap::Phase { targets } => state.apply_phase_oracle(&self.f, targets),
            RegisterMap::Mem { inputs, outputs } => state.apply_qmem_oracle(&self.f, inputs, outputs),
        }
    }

    /// Query tap, oracle, response tap. The returned state has the payload's qubit count.
    pub fn quantum_query(&mut self, payload: PureState, map: &RegisterMap, rng: &mut (impl Rng + ?Sized)) -> Result<PureState> {
        self.check_map(map)?;
        let reg = map.register();
        let kind = self.oracle_kind();
        self.counters.bump(self.f.base_query_cost());
        let mut s = self.tap.apply(kind, TapDirection::Query, payload, &reg, self.counters, rng)?;
        self.transcript.record(kind, self.visibility, Direction::Query, format!("{reg:?}").as_bytes(), self.counters);
        self.apply_oracle(&mut s, map)?;
        self.transcript.record(kind, self.visibility, Direction::Oracle, format!("{reg:?}").as_bytes(), self.counters);
        let out = self.tap.apply(kind, TapDirection::Response, s, &reg, self.counters, rng)?;
        self.transcript.record(kind, self.visibility, Direction::Response, format!("{reg:?}").as_bytes(), self.counters);
        Ok(out)
    }

    /// Channel-level version of [`Self::quantum_query`] for phase oracles; adversary memory is not updated.
    pub fn quantum_query_mixed(&mut self, payload: &MixedState, map: &RegisterMap) -> Result<MixedState> {
        self.check_map(map)?;
        let RegisterMap::Phase { targets } = map else {
            return Err(Error::UnsupportedQuery("mixed payloads need a phase oracle".into()));
        };
        self.counters.bump(self.f.base_query_cost());
        let f = &self.f;
        let out = round_trip_mixed(self.tap.strategy(), payload, targets, |r| r.apply_phase_oracle(f, targets))?;
        self.transcript.record(OracleKind::Qph, self.visibility, Direction::Oracle, format!("{targets:?}").as_bytes(), self.counters);
        Ok(out)
    }

    pub fn tap(&self) -> &TapChannel {
        &self.tap
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}

pub fn quantum_query(
    oracle: &mut QuantumChannelOracle,
    payload: PureState,
    map: &RegisterMap,
    rng: &mut (impl Rng + ?Sized),
) -> Result<PureState> {
    oracle.quantum_query(payload, map, rng)
}
