use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gf2core::{Bits, BooleanFunction};
use crate::qsim::{prepare_phase_state, trace_distance, MixedState, PureState, MIXED_CAP};

use super::strategy::{AdversaryStrategy, StrategyKind};

/// How the learner dresses each public phase-oracle query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryProtocol {
    /// Plain `H^{⊗n}|0⟩` queries.
    Unmasked,
    /// Fresh private `Z^r` mask per query.
    Randomness,
    /// Query register maximally entangled with a private register.
    Entangled,
}

/// Weighted pure branches of the in-flight state before the oracle, with the register the oracle acts on.
fn query_branches(n: usize, protocol: QueryProtocol) -> Result<Vec<(f64, PureState, Vec<usize>)>> {
    let reg: Vec<usize> = (0..n).collect();
    Ok(match protocol {
        QueryProtocol::Unmasked => vec![(1.0, PureState::uniform(n)?, reg)],
        QueryProtocol::Randomness => {
            let w = 1.0 / (1u64 << n) as f64;
            (0..1u64 << n)
                .map(|r| {
                    let mut s = PureState::uniform(n)?;
                    s.z_mask(r, &reg);
                    Ok((w, s, reg.clone()))
                })
                .collect::<Result<_>>()?
        }
        QueryProtocol::Entangled => {
            let mut s = PureState::zero(2 * n)?;
            for i in 0..n {
                s.h(i);
                s.h(n + i);
                s.cz(i, n + i);
            }
            vec![(1.0, s, (n..2 * n).collect())]
        }
    })
}

/// Exact state of the response register right after the oracle, averaged over the learner's private randomness.
pub fn response_register_state(f: &BooleanFunction, protocol: QueryProtocol) -> Result<MixedState> {
    let mut parts = Vec::new();
    for (w, mut s, reg) in query_branches(f.arity(), protocol)? {
        s.apply_phase_oracle(f, &reg)?;
        parts.push((w, s.reduced(&reg)?));
    }
    MixedState::mixture(&parts)
}

fn marginal(psi: &PureState, reg: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << reg.len()];
    for (k, a) in psi.amplitudes().iter().enumerate() {
        let idx = reg.iter().enumerate().fold(0usize, |acc, (j, &q)| acc | (((k >> q) & 1) << j));
        out[idx] += a.norm_sqr();
    }
    out
}

fn trivial() -> Result<MixedState> {
    MixedState::from_pure(&PureState::zero(1)?)
}

/// What the adversary keeps from one query, as a state depending on `f` only.
///
/// Strategies that hand back a fresh state are credited with the register they took away.
pub fn retained_view(strategy: &AdversaryStrategy, f: &BooleanFunction, protocol: QueryProtocol) -> Result<MixedState> {
    let n = f.arity();
    match strategy.kind() {
        StrategyKind::Identity => trivial(),
        StrategyKind::ResponseDepolarize { p } => {
            let rho = response_register_state(f, protocol)?;
            let coin0 = MixedState::from_pure(&PureState::zero(1)?)?;
            let coin1 = MixedState::from_pure(&PureState::basis(1, 1)?)?;
            let blank = MixedState::from_pure(&PureState::zero(n)?)?;
            MixedState::mixture(&[(1.0 - p, coin0.tensor(&blank)?), (*p, coin1.tensor(&rho)?)])
        }
        StrategyKind::ResponseReplace { .. } => response_register_state(f, protocol),
        StrategyKind::ResponseMeasureZ => {
            let rho = response_register_state(f, protocol)?;
            MixedState::diagonal(n, &rho.probabilities())
        }
        StrategyKind::SwapAttack => {
            // the dummy comes back as the phase state of f, read in the X basis
            let mut psi = prepare_phase_state(f)?;
            psi.h_all(&(0..n).collect::<Vec<_>>());
            MixedState::diagonal(n, &psi.probabilities())
        }
        StrategyKind::AncillaFreeIid { delta_leak, pre, post_readout } => {
            let mut probs = vec![0.0; 1 << (n + 2)];
            probs[0] = 1.0 - delta_leak;
            for (w, s, reg) in query_branches(n, protocol)? {
                let q = *reg.get(pre.qubit).ok_or(Error::IndexOutOfRange { index: pre.qubit, n })?;
                for b in [false, true] {
                    let mut t = s.clone();
                    let pb = match t.postselect(q, pre.basis, b) {
                        Ok(p) => p,
                        Err(Error::ZeroProbabilityBranch) => continue,
                        Err(e) => return Err(e),
                    };
                    t.apply_phase_oracle(f, &reg)?;
                    let head = 1 | ((b as usize) << 1);
                    if *post_readout {
                        t.h_all(&reg);
                        for (y, py) in marginal(&t, &reg).into_iter().enumerate() {
                            probs[head | (y << 2)] += delta_leak * w * pb * py;
                        }
                    } else {
                        probs[head] += delta_leak * w * pb;
                    }
                }
            }
            MixedState::diagonal(n + 2, &probs)
        }
        StrategyKind::Custom { .. } => Err(Error::UnsupportedQuery("no exact view for custom channels".into())),
    }
}

/// Classical-quantum state `Σ_f μ_f |f⟩⟨f| ⊗ ρ_A^f`.
#[derive(Clone, Debug)]
pub struct CqState {
    pub weights: Vec<f64>,
    pub blocks: Vec<MixedState>,
}

impl CqState {
    pub fn new(weights: Vec<f64>, blocks: Vec<MixedState>) -> Result<Self> {
        if weights.len() != blocks.len() || blocks.is_empty() {
            return Err(Error::DimensionMismatch("one block per prior weight".into()));
        }
        let n = blocks[0].num_qubits();
        if blocks.iter().any(|b| b.num_qubits() != n) {
            return Err(Error::DimensionMismatch("adversary blocks differ in size".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidState("prior weights must form a distribution".into()));
        }
        Ok(Self { weights, blocks })
    }

    /// `ρ_A = Σ_f μ_f ρ_A^f`.
    pub fn marginal(&self) -> Result<MixedState> {
        let parts: Vec<(f64, MixedState)> = self.weights.iter().copied().zip(self.blocks.iter().cloned()).collect();
        MixedState::mixture(&parts)
    }

    /// Trace distance between `ρ_FA` and `ρ_F ⊗ ρ_A`.
    pub fn factorization_distance(&self) -> Result<f64> {
        let avg = self.marginal()?;
        self.weights.iter().zip(&self.blocks).try_fold(0.0, |acc, (&w, b)| Ok(acc + w * trace_distance(b, &avg)?))
    }

    /// `I(F : A)` in bits.
    pub fn holevo_information(&self) -> Result<f64> {
        let avg = self.marginal()?.von_neumann_entropy();
        Ok(avg - self.weights.iter().zip(&self.blocks).map(|(w, b)| w * b.von_neumann_entropy()).sum::<f64>())
    }

    pub fn prior_entropy(&self) -> f64 {
        self.weights.iter().filter(|&&w| w > 0.0).map(|w| -w * w.log2()).sum()
    }

    /// The joint state with the adversary on the low qubits and `F` on the high ones.
    pub fn to_mixed(&self) -> Result<MixedState> {
        let na = self.blocks[0].num_qubits();
        let nf = usize::BITS as usize - (self.blocks.len() - 1).leading_zeros() as usize;
        if na + nf > MIXED_CAP {
            return Err(Error::TooManyQubits { n: na + nf, cap: MIXED_CAP });
        }
        let da = 1usize << na;
        let d = da << nf;
        let mut m = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
        for (k, (w, b)) in self.weights.iter().zip(&self.blocks).enumerate() {
            let off = k * da;
            for i in 0..da {
                for j in 0..da {
                    m[(off + i, off + j)] = b.matrix()[(i, j)] * *w;
                }
            }
        }
        MixedState::from_matrix(na + nf, m)
    }
}

/// Exact joint state of the function and the adversary's records after `queries` public queries,
/// uniform over `prior`.
pub fn adversary_view_state(
    prior: &[BooleanFunction],
    protocol: QueryProtocol,
    strategy: &AdversaryStrategy,
    queries: usize,
) -> Result<CqState> {
    if prior.is_empty() || prior.len() > 64 {
        return Err(Error::Config(format!("prior support {} outside 1..=64", prior.len())));
    }
    let mut blocks = Vec::with_capacity(prior.len());
    for f in prior {
        if f.arity() > 4 {
            return Err(Error::TooManyQubits { n: f.arity(), cap: 4 });
        }
        let one = retained_view(strategy, f, protocol)?;
        let mut acc = trivial()?;
        for q in 0..queries {
            acc = if q == 0 { one.clone() } else { acc.tensor(&one)? };
        }
        blocks.push(acc);
    }
    let w = 1.0 / prior.len() as f64;
    CqState::new(vec![w; prior.len()], blocks)
}

/// All parities on `n` bits.
pub fn parity_prior(n: usize) -> Result<Vec<BooleanFunction>> {
    (0..(1 as Bits) << n).map(|s| BooleanFunction::parity(n, s)).collect()
}
