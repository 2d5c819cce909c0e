use std::fmt::Debug;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};
use crate::oracles::{MemOracle, QuantumChannelOracle};
use crate::qsim::PureState;

use super::masked::MaskMode;
use super::protocols::{acquire_ancilla_free, acquire_unidirectional, AcquireParams, RngRef};

/// A task algorithm run on `m` certified copies of a phase state.
pub trait PhaseTask {
    type Answer: Clone + PartialEq + Debug;

    /// Copies consumed per run.
    fn copies(&self) -> usize;

    fn run(&mut self, copies: Vec<PureState>, rng: &mut dyn RngCore) -> Result<Self::Answer>;
}

/// Robustness parameters of a wrapped task algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskParams {
    pub eps_a: f64,
    pub delta_a: f64,
    /// Overall confidence.
    pub delta: f64,
    pub blocks: Option<usize>,
    /// Copies per certified block; a run gathers its copies from as many blocks as needed.
    /// `None` puts all of them in one block.
    #[serde(default)]
    pub block_copies: Option<usize>,
}

impl TaskParams {
    fn chunks(&self, copies: usize) -> Result<Vec<usize>> {
        let c = self.block_copies.unwrap_or(copies).min(copies);
        if c == 0 || copies == 0 {
            return Err(Error::Config("copies per block must be positive".into()));
        }
        let mut out = vec![c; copies / c];
        if !copies.is_multiple_of(c) {
            out.push(copies % c);
        }
        Ok(out)
    }
}

/// `(ε_A, δ_A) = (δ̃², 2δ̃)` for an algorithm with error `δ̃` on exact inputs.
pub fn robust_parameters(delta_tilde: f64) -> (f64, f64) {
    (delta_tilde * delta_tilde, 2.0 * delta_tilde)
}

/// `ℓ = ⌈2 ln(1/δ)/(1 − 4δ_A)²⌉`.
pub fn ell_rounds(delta: f64, delta_a: f64) -> Result<usize> {
    if !(delta_a > 0.0 && delta_a < 0.25) {
        return Err(Error::Config(format!("δ_A = {delta_a} must lie in (0, 1/4)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("δ = {delta} must lie in (0, 1)")));
    }
    Ok((2.0 * (1.0 / delta).ln() / (1.0 - 4.0 * delta_a).powi(2)).ceil() as usize)
}

/// `Pr[Binom(l, p) ≥ k]`.
pub fn binom_tail(l: usize, k: usize, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    match Binomial::new(p, l as u64) {
        Ok(b) => b.sf(k as u64 - 1),
        Err(_) => f64::NAN,
    }
}

const ESTIMATION_ROUND_CAP: usize = 100_000;

/// Smallest `ℓ` with `Pr[Binom(ℓ, 1 − δ_A) ≥ 2ℓ/3] ≥ 1 − δ`.
pub fn estimation_rounds(delta: f64, delta_a: f64) -> Result<usize> {
    if !(delta_a > 0.0 && delta_a < 1.0 / 3.0) {
        return Err(Error::Config(format!("δ_A = {delta_a} must lie in (0, 1/3)")));
    }
    (1..=ESTIMATION_ROUND_CAP)
        .find(|&l| binom_tail(l, (2 * l).div_ceil(3), 1.0 - delta_a) >= 1.0 - delta)
        .ok_or_else(|| Error::Config("estimation round count exceeds cap".into()))
}

/// Most frequent answer; ties go to the answer that reached the top count first.
pub fn majority<A: Clone + PartialEq>(votes: &[A]) -> Option<A> {
    let mut tally: Vec<(A, usize)> = Vec::new();
    let mut best: Option<(usize, usize)> = None;
    for v in votes {
        let i = match tally.iter().position(|(a, _)| a == v) {
            Some(i) => i,
            None => {
                tally.push((v.clone(), 0));
                tally.len() - 1
            }
        };
        tally[i].1 += 1;
        if best.is_none_or(|(_, c)| tally[i].1 > c) {
            best = Some((i, tally[i].1));
        }
    }
    best.map(|(i, _)| tally[i].0.clone())
}

/// Mean over a largest set of at least `2ℓ/3` values that are pairwise within `4ε_A/5`, or `None`.
pub fn cluster_estimate(xs: &[f64], eps_a: f64) -> Option<f64> {
    let need = (2 * xs.len()).div_ceil(3).max(1);
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let width = 4.0 * eps_a / 5.0;
    let mut best: Option<(usize, usize)> = None;
    let mut hi = 0;
    for lo in 0..s.len() {
        hi = hi.max(lo);
        while hi + 1 < s.len() && s[hi + 1] - s[lo] <= width {
            hi += 1;
        }
        let len = hi + 1 - lo;
        if len >= need && best.is_none_or(|(_, l)| len > l) {
            best = Some((lo, len));
        }
    }
    best.map(|(lo, len)| s[lo..lo + len].iter().sum::<f64>() / len as f64)
}

/// Outcome of a wrapped task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRun<A> {
    /// `None` on rejection or when the aggregation rule aborts.
    pub answer: Option<A>,
    pub rejected: bool,
    pub rounds: usize,
    pub votes: Vec<A>,
    pub blocks_per_round: usize,
    pub public_queries: u64,
    pub private_queries: u64,
}

impl<A> TaskRun<A> {
    pub fn accepted(&self) -> bool {
        !self.rejected && self.answer.is_some()
    }
}

fn run_rounds<T: PhaseTask>(
    task: &mut T,
    rounds: usize,
    chunks: &[usize],
    mut acquire: impl FnMut(usize, &mut dyn RngCore) -> Result<super::AcquisitionResult>,
    rng: &mut dyn RngCore,
) -> Result<(bool, Vec<T::Answer>, usize, u64, u64)> {
    let (mut pubq, mut priq, mut blocks) = (0, 0, 0);
    let mut votes = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let mut copies = Vec::new();
        for &m in chunks {
            let res = acquire(m, rng)?;
            pubq += res.public_queries;
            priq += res.private_queries;
            blocks = res.blocks;
            match res.output {
                Some(c) => copies.extend(c),
                None => return Ok((true, votes, blocks, pubq, priq)),
            }
        }
        votes.push(task.run(copies, rng)?);
    }
    Ok((false, votes, blocks, pubq, priq))
}

/// `ℓ` certify-then-run rounds against a unidirectional adversary, halting on the first rejection,
/// then a majority vote.
pub fn amplified_task_unidirectional<T: PhaseTask>(
    task: &mut T,
    public: &mut QuantumChannelOracle,
    private: &mut MemOracle,
    params: &TaskParams,
    mode: MaskMode,
    rng: &mut dyn RngCore,
) -> Result<TaskRun<T::Answer>> {
    let rounds = ell_rounds(params.delta, params.delta_a)?;
    unidirectional_rounds(task, rounds, public, private, params, mode, rng, |v, _| majority(v))
}

/// As [`amplified_task_unidirectional`] for a scalar estimate, aggregated by the cluster rule.
pub fn amplified_estimate_unidirectional<T: PhaseTask<Answer = f64>>(
    task: &mut T,
    public: &mut QuantumChannelOracle,
    private: &mut MemOracle,
    params: &TaskParams,
    mode: MaskMode,
    rng: &mut dyn RngCore,
) -> Result<TaskRun<f64>> {
    let rounds = estimation_rounds(params.delta, params.delta_a)?;
    unidirectional_rounds(task, rounds, public, private, params, mode, rng, cluster_estimate)
}

#[allow(clippy::too_many_arguments)]
fn unidirectional_rounds<T: PhaseTask>(
    task: &mut T,
    rounds: usize,
    public: &mut QuantumChannelOracle,
    private: &mut MemOracle,
    params: &TaskParams,
    mode: MaskMode,
    rng: &mut dyn RngCore,
    aggregate: impl Fn(&[T::Answer], f64) -> Option<T::Answer>,
) -> Result<TaskRun<T::Answer>> {
    let chunks = params.chunks(task.copies())?;
    let (rejected, votes, blocks, pubq, priq) = run_rounds(
        task,
        rounds,
        &chunks,
        |m, r| {
            let acq = AcquireParams { m, eps: params.eps_a, delta: params.delta_a, blocks: params.blocks };
            acquire_unidirectional(public, private, &acq, mode, &mut RngRef(r))
        },
        rng,
    )?;
    let answer = if rejected { None } else { aggregate(&votes, params.eps_a) };
    Ok(TaskRun { answer, rejected, rounds, votes, blocks_per_round: blocks, public_queries: pubq, private_queries: priq })
}

/// One ancilla-free acquisition at `ε_A` then the task; `repeats > 1` reruns and takes a majority.
#[allow(clippy::too_many_arguments)]
pub fn task_ancilla_free<T: PhaseTask>(
    task: &mut T,
    public: &mut QuantumChannelOracle,
    private: &mut MemOracle,
    params: &TaskParams,
    delta_leak: f64,
    mode: MaskMode,
    repeats: usize,
    rng: &mut dyn RngCore,
) -> Result<TaskRun<T::Answer>> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let chunks = params.chunks(task.copies())?;
    let (rejected, votes, blocks, pubq, priq) = run_rounds(
        task,
        repeats,
        &chunks,
        |m, r| {
            let acq = AcquireParams { m, eps: params.eps_a, delta: params.delta, blocks: params.blocks };
            acquire_ancilla_free(public, private, &acq, delta_leak, mode, &mut RngRef(r))
        },
        rng,
    )?;
    let answer = if rejected { None } else { majority(&votes) };
    Ok(TaskRun { answer, rejected, rounds: repeats, votes, blocks_per_round: blocks, public_queries: pubq, private_queries: priq })
}
