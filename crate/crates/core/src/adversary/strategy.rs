use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Basis, PureState};

/// Single-register channel used by `Custom` strategies.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    Identity,
    Depolarize { p: f64 },
    MeasureZ,
    Replace { state: PureState },
}

/// Which qubit of the query register an ancilla-free adversary measures before the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreMeasurement {
    pub qubit: usize,
    pub basis: Basis,
}

impl Default for PreMeasurement {
    fn default() -> Self {
        Self { qubit: 0, basis: Basis::X }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StrategyKind {
    Identity,
    ResponseDepolarize { p: f64 },
    ResponseReplace { state: PureState },
    ResponseMeasureZ,
    /// Swap in `|+^n⟩`, read the returned phase state in the X basis, and simulate `Z^s` from then on.
    SwapAttack,
    /// With probability `delta_leak` per query: measure `pre` before the oracle and, if `post_readout`,
    /// the whole register in the X basis afterwards.
    AncillaFreeIid { delta_leak: f64, pre: PreMeasurement, post_readout: bool },
    Custom { query: ChannelSpec, response: ChannelSpec },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directionality {
    /// Only the oracle's response passes the adversary.
    Unidirectional,
    Bidirectional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MemoryPolicy {
    /// Ancilla-free: nothing may be kept beyond classical outcomes of measurements on the register itself.
    None,
    ClassicalOnly,
    Quantum { qubits: usize },
}

/// A validated adversary.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryStrategy {
    kind: StrategyKind,
    directionality: Directionality,
    memory: MemoryPolicy,
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Strategy(format!("{what} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn check_channel(c: &ChannelSpec) -> Result<()> {
    match c {
        ChannelSpec::Depolarize { p } => check_prob(*p, "depolarizing probability"),
        _ => Ok(()),
    }
}

impl AdversaryStrategy {
    pub fn new(kind: StrategyKind, directionality: Directionality, memory: MemoryPolicy) -> Result<Self> {
        match &kind {
            StrategyKind::ResponseDepolarize { p } => check_prob(*p, "depolarizing probability")?,
            StrategyKind::SwapAttack => {
                if directionality != Directionality::Bidirectional {
                    return Err(Error::Strategy("swap attack needs both directions".into()));
                }
                if !matches!(memory, MemoryPolicy::Quantum { qubits } if qubits > 0) {
                    return Err(Error::Strategy("swap attack needs quantum memory".into()));
                }
            }
            StrategyKind::AncillaFreeIid { delta_leak, .. } => {
                check_prob(*delta_leak, "delta_leak")?;
                if memory != MemoryPolicy::None {
                    return Err(Error::Strategy("ancilla-free strategy cannot hold memory".into()));
                }
                if directionality != Directionality::Bidirectional {
                    return Err(Error::Strategy("ancilla-free strategy measures before the oracle".into()));
                }
            }
            StrategyKind::ResponseMeasureZ => {
                if memory == MemoryPolicy::None {
                    return Err(Error::Strategy("measure-and-record needs classical memory".into()));
                }
            }
            StrategyKind::Custom { query, response } => {
                check_channel(query)?;
                check_channel(response)?;
                if directionality == Directionality::Unidirectional && *query != ChannelSpec::Identity {
                    return Err(Error::Strategy("unidirectional strategy cannot touch queries".into()));
                }
            }
            StrategyKind::Identity | StrategyKind::ResponseReplace { .. } => {}
        }
        Ok(Self { kind, directionality, memory })
    }

    pub fn identity() -> Self {
        Self { kind: StrategyKind::Identity, directionality: Directionality::Unidirectional, memory: MemoryPolicy::None }
    }

    pub fn response_depolarize(p: f64) -> Result<Self> {
        Self::new(StrategyKind::ResponseDepolarize { p }, Directionality::Unidirectional, MemoryPolicy::ClassicalOnly)
    }

    pub fn response_replace(state: PureState) -> Result<Self> {
        Self::new(StrategyKind::ResponseReplace { state }, Directionality::Unidirectional, MemoryPolicy::ClassicalOnly)
    }

    pub fn response_measure_z() -> Result<Self> {
        Self::new(StrategyKind::ResponseMeasureZ, Directionality::Unidirectional, MemoryPolicy::ClassicalOnly)
    }

    pub fn swap_attack(n: usize) -> Result<Self> {
        Self::new(StrategyKind::SwapAttack, Directionality::Bidirectional, MemoryPolicy::Quantum { qubits: n })
    }

    pub fn ancilla_free(delta_leak: f64) -> Result<Self> {
        Self::new(
            StrategyKind::AncillaFreeIid { delta_leak, pre: PreMeasurement::default(), post_readout: true },
            Directionality::Bidirectional,
            MemoryPolicy::None,
        )
    }

    pub fn kind(&self) -> &StrategyKind {
        &self.kind
    }

    pub fn directionality(&self) -> Directionality {
        self.directionality
    }

    pub fn memory(&self) -> MemoryPolicy {
        self.memory
    }

    pub fn is_identity(&self) -> bool {
        match &self.kind {
            StrategyKind::Identity => true,
            StrategyKind::Custom { query, response } => *query == ChannelSpec::Identity && *response == ChannelSpec::Identity,
            StrategyKind::AncillaFreeIid { delta_leak, .. } => *delta_leak == 0.0,
            StrategyKind::ResponseDepolarize { p } => *p == 0.0,
            _ => false,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            StrategyKind::Identity => "identity",
            StrategyKind::ResponseDepolarize { .. } => "response-depolarize",
            StrategyKind::ResponseReplace { .. } => "response-replace",
            StrategyKind::ResponseMeasureZ => "response-measure-z",
            StrategyKind::SwapAttack => "swap-attack",
            StrategyKind::AncillaFreeIid { .. } => "ancilla-free-iid",
            StrategyKind::Custom { .. } => "custom",
        }
    }
}

/// Fixed states nameable from a config file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedState {
    #[default]
    Zero,
    Uniform,
}

impl NamedState {
    pub fn build(self, n: usize) -> Result<PureState> {
        match self {
            NamedState::Zero => PureState::zero(n),
            NamedState::Uniform => PureState::uniform(n),
        }
    }
}

fn default_true() -> bool {
    true
}

/// Adversary as written in an experiment config.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdversarySpec {
    #[default]
    None,
    Identity,
    ResponseDepolarize {
        p: f64,
    },
    ResponseReplace {
        #[serde(default)]
        state: NamedState,
    },
    ResponseMeasureZ,
    SwapAttack,
    AncillaFreeIid {
        delta_leak: f64,
        #[serde(default)]
        qubit: usize,
        #[serde(default = "default_x")]
        basis: Basis,
        #[serde(default = "default_true")]
        post_readout: bool,
    },
}

fn default_x() -> Basis {
    Basis::X
}

impl AdversarySpec {
    /// Builds the strategy for a query register of `n` qubits.
    pub fn build(&self, n: usize) -> Result<AdversaryStrategy> {
        match self {
            AdversarySpec::None | AdversarySpec::Identity => Ok(AdversaryStrategy::identity()),
            AdversarySpec::ResponseDepolarize { p } => AdversaryStrategy::response_depolarize(*p),
            AdversarySpec::ResponseReplace { state } => AdversaryStrategy::response_replace(state.build(n)?),
            AdversarySpec::ResponseMeasureZ => AdversaryStrategy::response_measure_z(),
            AdversarySpec::SwapAttack => AdversaryStrategy::swap_attack(n),
            AdversarySpec::AncillaFreeIid { delta_leak, qubit, basis, post_readout } => {
                if *qubit >= n {
                    return Err(Error::Strategy(format!("pre-measurement qubit {qubit} outside a {n}-qubit register")));
                }
                AdversaryStrategy::new(
                    StrategyKind::AncillaFreeIid {
                        delta_leak: *delta_leak,
                        pre: PreMeasurement { qubit: *qubit, basis: *basis },
                        post_readout: *post_readout,
                    },
                    Directionality::Bidirectional,
                    MemoryPolicy::None,
                )
            }
        }
    }

    pub fn is_bidirectional(&self) -> bool {
        matches!(self, AdversarySpec::SwapAttack | AdversarySpec::AncillaFreeIid { .. })
    }
}
