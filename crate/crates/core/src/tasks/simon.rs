use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::acquire::{amplified_task_unidirectional, task_ancilla_free, MaskMode, PhaseTask, TaskParams, TaskRun};
use crate::adversary::AdversaryStrategy;
use crate::error::{Error, Result};
use crate::gf2core::{mask, solve_simon_nullspace, Bits, BooleanFunction, SimonSolve};
use crate::oracles::{ChannelKind, MemOracle, QuantumChannelOracle, Visibility};
use crate::qsim::{Basis, PureState};

use super::forrelation::AdversaryClass;

pub const SIMON_ARITY_CAP: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimonCase {
    OneToOne,
    Periodic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimonInstance {
    pub n: usize,
    pub f: BooleanFunction,
    pub case: SimonCase,
}

impl SimonInstance {
    pub fn new(f: BooleanFunction) -> Result<Self> {
        let period = f.simon_period().ok_or_else(|| Error::InvalidFunction("not a simon function".into()))?;
        let case = if period == 0 { SimonCase::OneToOne } else { SimonCase::Periodic };
        Ok(Self { n: f.arity(), f, case })
    }

    pub fn period(&self) -> Bits {
        self.f.simon_period().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({ "n": self.n, "f": self.f.to_json(), "case": self.case })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let f = BooleanFunction::from_json(v.get("f").ok_or_else(|| Error::Parse("missing field f".into()))?)?;
        let inst = Self::new(f)?;
        if let Some(c) = v.get("case") {
            let case: SimonCase = serde_json::from_value(c.clone())?;
            if case != inst.case {
                return Err(Error::Parse(format!("label {case:?} does not match the function")));
            }
        }
        Ok(inst)
    }
}

/// Random labelling; periodic instances get a uniform nonzero period.
pub fn gen_simon_instance(n: usize, case: SimonCase, rng: &mut (impl Rng + ?Sized)) -> Result<SimonInstance> {
    if n == 0 || n > SIMON_ARITY_CAP {
        return Err(Error::Config(format!("simon arity {n} outside 1..={SIMON_ARITY_CAP}")));
    }
    let period = match case {
        SimonCase::OneToOne => 0,
        SimonCase::Periodic => rng.random_range(1..=mask(n)),
    };
    SimonInstance::new(BooleanFunction::random_simon(n, period, rng)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "period", rename_all = "kebab-case")]
pub enum SimonVerdict {
    OneToOne,
    Periodic(Bits),
    /// Copies ran out before rank `n − 1`.
    Inconclusive,
}

impl SimonVerdict {
    pub fn case(self) -> Option<SimonCase> {
        match self {
            SimonVerdict::OneToOne => Some(SimonCase::OneToOne),
            SimonVerdict::Periodic(_) => Some(SimonCase::Periodic),
            SimonVerdict::Inconclusive => None,
        }
    }

    /// Inconclusive counts as wrong.
    pub fn correct_for(self, inst: &SimonInstance) -> bool {
        match self {
            SimonVerdict::OneToOne => inst.case == SimonCase::OneToOne,
            SimonVerdict::Periodic(s) => inst.case == SimonCase::Periodic && s == inst.period(),
            SimonVerdict::Inconclusive => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimonRun {
    pub verdict: SimonVerdict,
    pub harvested: Vec<Bits>,
    pub candidate: Option<Bits>,
    pub copies_used: usize,
    pub membership_queries: u64,
}

/// Example state `2^{-n/2} Σ_x |x⟩|f(x)⟩` from the phase state of `y·f(x)`.
pub fn example_from_phase(phase: &PureState, n: usize, w: usize) -> Result<PureState> {
    if phase.num_qubits() != n + w {
        return Err(Error::DimensionMismatch(format!("phase state has {} qubits, expected {}", phase.num_qubits(), n + w)));
    }
    let mut s = phase.clone();
    s.h_all(&(n..n + w).collect::<Vec<_>>());
    Ok(s)
}

/// Harvests strings from example states until rank `n − 1`, then checks `f(s') = f(0)` with two queries.
pub fn simon_decide(copies: &[PureState], n: usize, mem: &mut MemOracle, rng: &mut (impl Rng + ?Sized)) -> Result<SimonRun> {
    let w = mem.function().width();
    if mem.function().arity() != n {
        return Err(Error::ArityMismatch { expected: n, got: mem.function().arity() });
    }
    let input: Vec<usize> = (0..n).collect();
    let mut harvested = Vec::new();
    for c in copies {
        if c.num_qubits() != n + w {
            return Err(Error::DimensionMismatch(format!("copy has {} qubits, expected {}", c.num_qubits(), n + w)));
        }
        let mut s = c.clone();
        s.h_all(&input);
        harvested.push(s.measure(&input, Basis::Z, rng)?);
        if let SimonSolve::Period(cand) = solve_simon_nullspace(n, &harvested)? {
            let before = mem.counters().queries;
            let same = mem.query(cand)? == mem.query(0)?;
            let verdict = if same { SimonVerdict::Periodic(cand) } else { SimonVerdict::OneToOne };
            return Ok(SimonRun {
                verdict,
                candidate: Some(cand),
                copies_used: harvested.len(),
                harvested,
                membership_queries: mem.counters().queries - before,
            });
        }
    }
    Ok(SimonRun { verdict: SimonVerdict::Inconclusive, candidate: None, copies_used: harvested.len(), harvested, membership_queries: 0 })
}

/// Copies so that a periodic instance reaches rank `n − 1` except with probability `delta_tilde`.
pub fn simon_copies(n: usize, delta_tilde: f64) -> Result<usize> {
    if !(delta_tilde > 0.0 && delta_tilde < 1.0) {
        return Err(Error::Config(format!("δ̃ = {delta_tilde} must lie in (0, 1)")));
    }
    // a uniform sample misses a fixed hyperplane of the (n−1)-dim space w.p. ½; union over 2^{n−1} − 1 of them
    Ok(n.saturating_sub(1) + (1.0 / delta_tilde).log2().ceil() as usize)
}

/// [`simon_decide`] on phase states of `y·f(x)`, with its own private membership oracle.
#[derive(Clone, Debug)]
pub struct SimonTask {
    pub n: usize,
    pub copies: usize,
    pub mem: MemOracle,
    pub runs: Vec<SimonRun>,
}

impl SimonTask {
    pub fn new(f: &BooleanFunction, copies: usize) -> Self {
        Self { n: f.arity(), copies, mem: MemOracle::new(f.clone(), Visibility::Private), runs: Vec::new() }
    }
}

impl PhaseTask for SimonTask {
    type Answer = SimonVerdict;

    fn copies(&self) -> usize {
        self.copies
    }

    fn run(&mut self, copies: Vec<PureState>, rng: &mut dyn RngCore) -> Result<SimonVerdict> {
        let w = self.mem.function().width();
        let examples = copies.iter().map(|c| example_from_phase(c, self.n, w)).collect::<Result<Vec<_>>>()?;
        let run = simon_decide(&examples, self.n, &mut self.mem, rng)?;
        let v = run.verdict;
        self.runs.push(run);
        Ok(v)
    }
}

/// Public membership oracle on `f` and the private one used for certification.
pub fn simon_oracles(inst: &SimonInstance, strategy: AdversaryStrategy) -> Result<(QuantumChannelOracle, MemOracle)> {
    Ok((
        QuantumChannelOracle::new(inst.f.clone(), ChannelKind::QMem, strategy, Visibility::Public)?,
        MemOracle::new(inst.f.clone(), Visibility::Private),
    ))
}

pub fn covert_simon(
    public: &mut QuantumChannelOracle,
    private: &mut MemOracle,
    task: &mut SimonTask,
    class: AdversaryClass,
    params: &TaskParams,
    rng: &mut dyn RngCore,
) -> Result<TaskRun<SimonVerdict>> {
    match class {
        AdversaryClass::Unidirectional => amplified_task_unidirectional(task, public, private, params, MaskMode::QmemRandomness, rng),
        AdversaryClass::AncillaFree { delta_leak, repeats } => {
            task_ancilla_free(task, public, private, params, delta_leak, MaskMode::QmemEntangled, repeats, rng)
        }
    }
}
