use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::acquire::{amplified_task_unidirectional, task_ancilla_free, MaskMode, PhaseTask, TaskParams, TaskRun};
use crate::adversary::{response_register_state, AdversaryStrategy, CqState, QueryProtocol};
use crate::error::{Error, Result};
use crate::gf2core::{forrelation_phi, walsh_hadamard, BooleanFunction};
use crate::oracles::{ChannelKind, MemOracle, QuantumChannelOracle, Visibility};
use crate::qsim::PureState;

/// Case (i) promise: `|Φ| ≤ 1/100`.
pub const UNCORRELATED_BOUND: f64 = 0.01;
/// Case (ii) promise: `Φ ≥ 3/5`.
pub const FORRELATED_BOUND: f64 = 0.6;
/// Accept-frequency threshold separating `(1 + 0.01²)/2` from `(1 + 0.6²)/2`.
pub const SWAP_THRESHOLD: f64 = 0.59;
pub const GENERATION_ATTEMPTS: usize = 100_000;
pub const FORRELATION_ARITY_CAP: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForrelationCase {
    Uncorrelated,
    Forrelated,
}

impl ForrelationCase {
    pub fn holds(self, phi: f64) -> bool {
        match self {
            ForrelationCase::Uncorrelated => phi.abs() <= UNCORRELATED_BOUND,
            ForrelationCase::Forrelated => phi >= FORRELATED_BOUND,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForrelationInstance {
    pub n: usize,
    pub f: BooleanFunction,
    pub g: BooleanFunction,
    pub case: ForrelationCase,
    pub phi: f64,
}

impl ForrelationInstance {
    /// Checks the label against the exact Φ.
    pub fn new(f: BooleanFunction, g: BooleanFunction, case: ForrelationCase) -> Result<Self> {
        let phi = forrelation_phi(&f, &g)?;
        if !case.holds(phi) {
            return Err(Error::Generation(format!("Φ = {phi} violates the {case:?} promise")));
        }
        Ok(Self { n: f.arity(), f, g, case, phi })
    }

    /// `h(x, y) = f(x) ⊕ g(y)`, f on the low bits.
    pub fn h(&self) -> Result<BooleanFunction> {
        BooleanFunction::padded_xor(self.f.clone(), self.g.clone())
    }

    pub fn to_json(&self) -> Value {
        json!({ "n": self.n, "f": self.f.to_json(), "g": self.g.to_json(), "case": self.case, "phi": self.phi })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| v.get(k).ok_or_else(|| Error::Parse(format!("missing field {k}")));
        let f = BooleanFunction::from_json(get("f")?)?;
        let g = BooleanFunction::from_json(get("g")?)?;
        let case: ForrelationCase = serde_json::from_value(get("case")?.clone())?;
        let inst = Self::new(f, g, case)?;
        if let Some(n) = v.get("n").and_then(Value::as_u64) {
            if n as usize != inst.n {
                return Err(Error::Parse(format!("n = {n} but functions have arity {}", inst.n)));
            }
        }
        Ok(inst)
    }
}

/// Rejection sampling for case (i); sign-of-Walsh construction plus verification for case (ii).
pub fn gen_forrelation_instance(n: usize, case: ForrelationCase, rng: &mut (impl Rng + ?Sized)) -> Result<ForrelationInstance> {
    if n == 0 || n > FORRELATION_ARITY_CAP {
        return Err(Error::Config(format!("forrelation arity {n} outside 1..={FORRELATION_ARITY_CAP}")));
    }
    let mut worst = match case {
        ForrelationCase::Uncorrelated => f64::INFINITY,
        ForrelationCase::Forrelated => f64::NEG_INFINITY,
    };
    for _ in 0..GENERATION_ATTEMPTS {
        let f = BooleanFunction::random(n, 1, rng)?;
        let g = match case {
            ForrelationCase::Uncorrelated => BooleanFunction::random(n, 1, rng)?,
            ForrelationCase::Forrelated => walsh_sign(&f)?,
        };
        let phi = forrelation_phi(&f, &g)?;
        if case.holds(phi) {
            return Ok(ForrelationInstance { n, f, g, case, phi });
        }
        worst = match case {
            ForrelationCase::Uncorrelated => worst.min(phi.abs()),
            ForrelationCase::Forrelated => worst.max(phi),
        };
    }
    Err(Error::Generation(format!(
        "no {case:?} pair at n = {n} in {GENERATION_ATTEMPTS} attempts (closest Φ seen {worst})"
    )))
}

/// `g(y) = 1` where the Walsh transform of `(−1)^f` is negative at `y`.
pub fn walsh_sign(f: &BooleanFunction) -> Result<BooleanFunction> {
    let n = f.arity();
    let mut v: Vec<f64> = (0..1u64 << n).map(|x| if f.bit(x) { -1.0 } else { 1.0 }).collect();
    walsh_hadamard(&mut v);
    BooleanFunction::from_fn(n, 1, |y| (v[y as usize] < 0.0) as u64)
}

/// `⟨ψ|SWAP|ψ⟩` between the low and high `n`-qubit halves.
fn swap_expectation(psi: &PureState, n: usize) -> f64 {
    let a = psi.amplitudes();
    let lo = (1usize << n) - 1;
    a.iter()
        .enumerate()
        .map(|(k, v)| {
            let swapped = ((k & lo) << n) | (k >> n);
            (v.conj() * a[swapped]).re
        })
        .sum()
}

/// Probability the swap test accepts after `H^{⊗n}` on the `g` half.
pub fn swap_accept_probability(copy: &PureState, n: usize) -> Result<f64> {
    if copy.num_qubits() != 2 * n {
        return Err(Error::DimensionMismatch(format!("copy has {} qubits, expected {}", copy.num_qubits(), 2 * n)));
    }
    let mut s = copy.clone();
    s.h_all(&(n..2 * n).collect::<Vec<_>>());
    Ok(((1.0 + swap_expectation(&s, n)) / 2.0).clamp(0.0, 1.0))
}

/// One swap test per copy; case (ii) iff the accept frequency reaches [`SWAP_THRESHOLD`].
pub fn forrelation_decide(copies: &[PureState], n: usize, rng: &mut (impl Rng + ?Sized)) -> Result<ForrelationCase> {
    if copies.is_empty() {
        return Err(Error::InsufficientCopies { need: 1, have: 0 });
    }
    let mut accepts = 0usize;
    for c in copies {
        accepts += rng.random_bool(swap_accept_probability(c, n)?) as usize;
    }
    Ok(if accepts as f64 >= SWAP_THRESHOLD * copies.len() as f64 {
        ForrelationCase::Forrelated
    } else {
        ForrelationCase::Uncorrelated
    })
}

/// Smallest odd copy count with Hoeffding error at most `delta_tilde` on either side of the threshold.
pub fn forrelation_repetitions(delta_tilde: f64) -> Result<usize> {
    if !(delta_tilde > 0.0 && delta_tilde < 1.0) {
        return Err(Error::Config(format!("δ̃ = {delta_tilde} must lie in (0, 1)")));
    }
    let low = (1.0 + UNCORRELATED_BOUND * UNCORRELATED_BOUND) / 2.0;
    let high = (1.0 + FORRELATED_BOUND * FORRELATED_BOUND) / 2.0;
    let gap = (SWAP_THRESHOLD - low).min(high - SWAP_THRESHOLD);
    let k = ((1.0 / delta_tilde).ln() / (2.0 * gap * gap)).ceil() as usize;
    Ok(k | 1)
}

/// [`forrelation_decide`] as a wrapped task.
#[derive(Clone, Debug)]
pub struct ForrelationTask {
    pub n: usize,
    pub repetitions: usize,
}

impl PhaseTask for ForrelationTask {
    type Answer = ForrelationCase;

    fn copies(&self) -> usize {
        self.repetitions
    }

    fn run(&mut self, copies: Vec<PureState>, rng: &mut dyn RngCore) -> Result<ForrelationCase> {
        forrelation_decide(&copies, self.n, rng)
    }
}

/// Which wrapper runs the task.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdversaryClass {
    Unidirectional,
    AncillaFree { delta_leak: f64, repeats: usize },
}

/// Wrapped-task parameters for error `delta_tilde` of the bare algorithm at overall confidence `delta`.
pub fn robust_task_params(delta_tilde: f64, delta: f64, blocks: Option<usize>, block_copies: Option<usize>) -> TaskParams {
    let (eps_a, delta_a) = crate::acquire::robust_parameters(delta_tilde);
    TaskParams { eps_a, delta_a, delta, blocks, block_copies }
}

/// Public phase oracle on `h`, whose queries cost one `f` and one `g` query, plus the private one.
pub fn forrelation_oracles(inst: &ForrelationInstance, strategy: AdversaryStrategy) -> Result<(QuantumChannelOracle, MemOracle)> {
    let h = inst.h()?;
    Ok((QuantumChannelOracle::new(h.clone(), ChannelKind::QPh, strategy, Visibility::Public)?, MemOracle::new(h, Visibility::Private)))
}

pub fn covert_forrelation(
    public: &mut QuantumChannelOracle,
    private: &mut MemOracle,
    n: usize,
    class: AdversaryClass,
    params: &TaskParams,
    repetitions: usize,
    rng: &mut dyn RngCore,
) -> Result<TaskRun<ForrelationCase>> {
    let mut task = ForrelationTask { n, repetitions };
    match class {
        AdversaryClass::Unidirectional => amplified_task_unidirectional(&mut task, public, private, params, MaskMode::Randomness, rng),
        AdversaryClass::AncillaFree { delta_leak, repeats } => {
            task_ancilla_free(&mut task, public, private, params, delta_leak, MaskMode::Entangled, repeats, rng)
        }
    }
}

/// Joint state of the instance and one masked response register, uniform over `prior`.
///
/// Every unidirectional adversary's record is a channel applied to this register.
pub fn forrelation_view_state(prior: &[ForrelationInstance]) -> Result<CqState> {
    let blocks = prior
        .iter()
        .map(|i| response_register_state(&i.h()?, QueryProtocol::Randomness))
        .collect::<Result<Vec<_>>>()?;
    CqState::new(vec![1.0 / prior.len() as f64; prior.len()], blocks)
}
