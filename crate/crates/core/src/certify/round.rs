use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2core::{Bits, BooleanFunction};
use crate::oracles::MemOracle;
use crate::qsim::{sample_discrete, MixedState, PureState};

/// Outcome of one shadow-overlap round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapRound {
    pub qubit: usize,
    /// Z outcomes on every other qubit; bit `qubit` is zero.
    pub y: Bits,
    /// X outcome on `qubit`, `false` for `|+⟩`.
    pub b: bool,
    pub f0: bool,
    pub f1: bool,
    pub score: bool,
}

/// Anything a round can be played on: one copy of an `n_block`-qubit state.
pub trait RoundSource {
    fn num_qubits(&self) -> usize;

    /// Samples `(y, b)` for a round on qubit `i` without disturbing anything else the caller keeps.
    fn sample_pair(&self, i: usize, rng: &mut dyn rand::RngCore) -> Result<(Bits, bool)>;
}

/// `(ρ[y0,y0], ρ[y1,y1], Re ρ[y0,y1])` for every `y0` with bit `i` clear.
fn pair_terms(n: usize, i: usize, entry: impl Fn(usize, usize) -> C64) -> Vec<(usize, f64, f64, f64)> {
    let bit = 1usize << i;
    (0..1usize << n)
        .filter(|k| k & bit == 0)
        .map(|y0| {
            let y1 = y0 | bit;
            (y0, entry(y0, y0).re, entry(y1, y1).re, entry(y0, y1).re)
        })
        .collect()
}

fn sample_from_terms(terms: &[(usize, f64, f64, f64)], rng: &mut dyn rand::RngCore) -> (Bits, bool) {
    let weights: Vec<f64> = terms.iter().map(|t| (t.1 + t.2).max(0.0)).collect();
    let (y0, d0, d1, re) = terms[sample_discrete(&weights, rng)];
    let plus = ((d0 + d1 + 2.0 * re) / (2.0 * (d0 + d1))).clamp(0.0, 1.0);
    (y0 as Bits, rng.random::<f64>() >= plus)
}

fn check_qubit(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok(())
}

impl RoundSource for PureState {
    fn num_qubits(&self) -> usize {
        PureState::num_qubits(self)
    }

    fn sample_pair(&self, i: usize, rng: &mut dyn rand::RngCore) -> Result<(Bits, bool)> {
        let n = PureState::num_qubits(self);
        check_qubit(i, n)?;
        let a = self.amplitudes();
        Ok(sample_from_terms(&pair_terms(n, i, |j, k| a[j] * a[k].conj()), rng))
    }
}

impl RoundSource for MixedState {
    fn num_qubits(&self) -> usize {
        MixedState::num_qubits(self)
    }

    fn sample_pair(&self, i: usize, rng: &mut dyn rand::RngCore) -> Result<(Bits, bool)> {
        let n = MixedState::num_qubits(self);
        check_qubit(i, n)?;
        let m = self.matrix();
        Ok(sample_from_terms(&pair_terms(n, i, |j, k| m[(j, k)]), rng))
    }
}

/// A block held as a product of independent parts, part `k` on the next `parts[k].num_qubits()` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    parts: Vec<PureState>,
}

impl Block {
    pub fn new(parts: Vec<PureState>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidState("empty block".into()));
        }
        if parts.iter().map(|p| p.num_qubits()).sum::<usize>() > 64 {
            return Err(Error::TooManyQubits { n: parts.iter().map(|p| p.num_qubits()).sum(), cap: 64 });
        }
        Ok(Self { parts })
    }

    pub fn single(psi: PureState) -> Self {
        Self { parts: vec![psi] }
    }

    pub fn parts(&self) -> &[PureState] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<PureState> {
        self.parts
    }

    /// Fidelity with a product target given part by part.
    pub fn fidelity(&self, targets: &[PureState]) -> Result<f64> {
        crate::qsim::product_fidelity(&self.parts, targets)
    }

    pub fn to_pure(&self) -> Result<PureState> {
        PureState::tensor_all(&self.parts)
    }
}

impl RoundSource for Block {
    fn num_qubits(&self) -> usize {
        self.parts.iter().map(|p| p.num_qubits()).sum()
    }

    fn sample_pair(&self, i: usize, rng: &mut dyn rand::RngCore) -> Result<(Bits, bool)> {
        check_qubit(i, RoundSource::num_qubits(self))?;
        let (mut y, mut b, mut off) = (0, false, 0);
        for p in &self.parts {
            let k = p.num_qubits();
            if (off..off + k).contains(&i) {
                let (yp, bp) = p.sample_pair(i - off, rng)?;
                y |= yp << off;
                b = bp;
            } else {
                y |= (sample_discrete(&p.probabilities(), rng) as Bits) << off;
            }
            off += k;
        }
        Ok((y, b))
    }
}

fn score(f0: bool, f1: bool, b: bool) -> bool {
    b == (f0 != f1)
}

/// One round: uniform qubit, Z on the rest, X on it, two membership checks.
pub fn overlap_round(copy: &impl RoundSource, oracle: &mut MemOracle, rng: &mut dyn rand::RngCore) -> Result<OverlapRound> {
    let n = copy.num_qubits();
    let f = oracle.function();
    if f.arity() != n || f.width() != 1 {
        return Err(Error::ArityMismatch { expected: n, got: f.arity() });
    }
    let qubit = rng.random_range(0..n);
    let (y, b) = copy.sample_pair(qubit, rng)?;
    let f0 = oracle.query(y)? == 1;
    let f1 = oracle.query(y | 1 << qubit)? == 1;
    Ok(OverlapRound { qubit, y, b, f0, f1, score: score(f0, f1, b) })
}

/// Plays a round directly on qubits `block` of a joint state, collapsing it.
pub fn overlap_round_in_place(
    state: &mut PureState,
    block: &[usize],
    oracle: &mut MemOracle,
    rng: &mut dyn rand::RngCore,
) -> Result<OverlapRound> {
    let n = block.len();
    if oracle.function().arity() != n {
        return Err(Error::ArityMismatch { expected: n, got: oracle.function().arity() });
    }
    let qubit = rng.random_range(0..n);
    let others: Vec<usize> = (0..n).filter(|&k| k != qubit).map(|k| block[k]).collect();
    let z = state.measure(&others, crate::qsim::Basis::Z, rng)?;
    let b = state.measure(&[block[qubit]], crate::qsim::Basis::X, rng)? == 1;
    let mut y = 0;
    for (j, k) in (0..n).filter(|&k| k != qubit).enumerate() {
        y |= ((z >> j) & 1) << k;
    }
    let f0 = oracle.query(y)? == 1;
    let f1 = oracle.query(y | 1 << qubit)? == 1;
    Ok(OverlapRound { qubit, y, b, f0, f1, score: score(f0, f1, b) })
}

/// Exact `E[ω]` for a single state.
pub fn expected_score(rho: &MixedState, f: &BooleanFunction) -> Result<f64> {
    let n = rho.num_qubits();
    if f.arity() != n {
        return Err(Error::ArityMismatch { expected: n, got: f.arity() });
    }
    let m = rho.matrix();
    let mut total = 0.0;
    for i in 0..n {
        for (y0, d0, d1, re) in pair_terms(n, i, |j, k| m[(j, k)]) {
            let minus = f.bit(y0 as Bits) != f.bit((y0 | 1 << i) as Bits);
            total += 0.5 * (d0 + d1 + if minus { -2.0 * re } else { 2.0 * re });
        }
    }
    Ok(total / n as f64)
}

/// The averaged round-check projector `L = E_i Σ_y |y, s_y⟩⟨y, s_y|`; small `n` only.
pub fn overlap_observable(f: &BooleanFunction) -> Result<DMatrix<C64>> {
    let n = f.arity();
    if n > 6 {
        return Err(Error::TooManyQubits { n, cap: 6 });
    }
    let d = 1usize << n;
    let mut l = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    let w = 0.5 / n as f64;
    for i in 0..n {
        let bit = 1usize << i;
        for y0 in (0..d).filter(|k| k & bit == 0) {
            let y1 = y0 | bit;
            let s = if f.bit(y0 as Bits) != f.bit(y1 as Bits) { -1.0 } else { 1.0 };
            l[(y0, y0)] += w;
            l[(y1, y1)] += w;
            l[(y0, y1)] += s * w;
            l[(y1, y0)] += s * w;
        }
    }
    Ok(l)
}
