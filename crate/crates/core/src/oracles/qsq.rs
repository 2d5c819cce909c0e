use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gf2core::{dot, walsh_hadamard, Bits, BooleanFunction};
use crate::qsim::{hermitian_eigenvalues, prepare_example_state, prepare_phase_state, MixedState, PureState};

use super::policy::{check_tau, Answerer, AnswerPolicy, AuditEntry};
use super::transcript::{Counters, Direction, OracleKind, Transcript, Visibility};

/// Largest state an explicit observable may act on.
pub const EXPLICIT_QUBIT_CAP: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub enum QsqSource {
    Phase(BooleanFunction),
    Example(BooleanFunction),
    Mixed(MixedState),
}

/// Observables the QSQ oracle can evaluate.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Explicit(DMatrix<C64>),
    /// Fourier weight `Σ_{S∈T} ĝ(S)²` of `g = (-1)^f`.
    FourierMass(Vec<Bits>),
    /// `Pr_x[f(x) ≠ f(x ⊕ e_i)]`.
    Influence(usize),
    /// Influence of `x ↦ f(x) ⊕ xᵀÂx` for the upper-triangular rows `offdiag`.
    ConjugatedInfluence { i: usize, offdiag: Vec<Bits> },
}

impl Observable {
    fn payload(&self) -> Vec<u8> {
        match self {
            Observable::Explicit(m) => m.iter().flat_map(|c| [c.re.to_le_bytes(), c.im.to_le_bytes()]).flatten().collect(),
            Observable::FourierMass(t) => format!("fourier:{t:?}").into_bytes(),
            Observable::Influence(i) => format!("influence:{i}").into_bytes(),
            Observable::ConjugatedInfluence { i, offdiag } => format!("conj-influence:{i}:{offdiag:?}").into_bytes(),
        }
    }
}

fn fourier_weights(f: &BooleanFunction) -> Result<Vec<f64>> {
    let n = f.arity();
    if f.width() != 1 || n > 20 {
        return Err(Error::UnsupportedQuery("Fourier mass needs a width-1 function of arity ≤ 20".into()));
    }
    let mut v: Vec<f64> = (0..1u64 << n).map(|x| if f.bit(x) { -1.0 } else { 1.0 }).collect();
    walsh_hadamard(&mut v);
    let scale = 1.0 / (1u64 << n) as f64;
    Ok(v.into_iter().map(|c| (c * scale).powi(2)).collect())
}

fn influence(n: usize, i: usize, g: impl Fn(Bits) -> bool) -> Result<f64> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let flips = (0..1u64 << n).filter(|&x| g(x) != g(x ^ (1 << i))).count();
    Ok(flips as f64 / (1u64 << n) as f64)
}

/// `xᵀÂx` for upper-triangular rows.
pub(crate) fn quadratic_form(rows: &[Bits], x: Bits) -> bool {
    rows.iter().enumerate().filter(|(i, _)| (x >> i) & 1 == 1).fold(false, |acc, (_, &r)| acc ^ dot(r, x))
}

#[derive(Clone, Debug)]
pub struct QsqOracle {
    source: QsqSource,
    answerer: Answerer,
    visibility: Visibility,
    counters: Counters,
    transcript: Transcript,
}

impl QsqOracle {
    pub fn new(source: QsqSource, policy: AnswerPolicy, visibility: Visibility) -> Self {
        Self { source, answerer: Answerer::new(policy), visibility, counters: Counters::default(), transcript: Transcript::new() }
    }

    fn function(&self) -> Option<&BooleanFunction> {
        match &self.source {
            QsqSource::Phase(f) | QsqSource::Example(f) => Some(f),
            QsqSource::Mixed(_) => None,
        }
    }

    fn explicit_value(&self, m: &DMatrix<C64>) -> Result<f64> {
        let pure: PureState;
        let (n, rho) = match &self.source {
            QsqSource::Phase(f) => {
                pure = prepare_phase_state(f)?;
                (pure.num_qubits(), None)
            }
            QsqSource::Example(f) => {
                pure = prepare_example_state(f)?;
                (pure.num_qubits(), None)
            }
            QsqSource::Mixed(r) => {
                pure = PureState::zero(0)?;
                (r.num_qubits(), Some(r))
            }
        };
        if n > EXPLICIT_QUBIT_CAP {
            return Err(Error::UnsupportedQuery(format!("explicit observable on {n} qubits")));
        }
        let d = 1usize << n;
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch(format!("observable is {}x{}, state has dimension {d}", m.nrows(), m.ncols())));
        }
        if (m - m.adjoint()).iter().any(|c| c.norm() > 1e-10) {
            return Err(Error::UnsupportedQuery("observable is not Hermitian".into()));
        }
        if hermitian_eigenvalues(m).iter().any(|l| l.abs() > 1.0 + 1e-9) {
            return Err(Error::UnsupportedQuery("observable norm exceeds 1".into()));
        }
        let v = match rho {
            Some(r) => (m * r.matrix()).trace().re,
            None => {
                let psi = nalgebra::DVector::from_column_slice(pure.amplitudes());
                (psi.adjoint() * m * &psi)[(0, 0)].re
            }
        };
        Ok(v)
    }

    pub fn exact(&self, obs: &Observable) -> Result<f64> {
        if let Observable::Explicit(m) = obs {
            return self.explicit_value(m);
        }
        let f = self
            .function()
            .ok_or_else(|| Error::UnsupportedQuery("symbolic observables need a function-backed source".into()))?;
        if f.width() != 1 {
            return Err(Error::UnsupportedQuery("symbolic observables need a width-1 function".into()));
        }
        let n = f.arity();
        match obs {
            Observable::Explicit(_) => unreachable!(),
            Observable::FourierMass(t) => {
                let w = fourier_weights(f)?;
                let mut set: Vec<Bits> = t.clone();
                set.sort_unstable();
                set.dedup();
                set.iter().try_fold(0.0, |acc, &s| {
                    w.get(s as usize).map(|x| acc + x).ok_or(Error::IndexOutOfRange { index: s as usize, n })
                })
            }
            Observable::Influence(i) => influence(n, *i, |x| f.bit(x)),
            Observable::ConjugatedInfluence { i, offdiag } => {
                if offdiag.len() != n || offdiag.iter().enumerate().any(|(r, &row)| row & ((2 << r) - 1) != 0) {
                    return Err(Error::UnsupportedQuery("off-diagonal rows must be strictly upper-triangular".into()));
                }
                influence(n, *i, |x| f.bit(x) ^ quadratic_form(offdiag, x))
            }
        }
    }

    pub fn query(&mut self, obs: &Observable, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let truth = self.exact(obs)?;
        let v = self.answerer.answer(truth, tau)?;
        self.counters.bump(1);
        let mut payload = obs.payload();
        payload.extend_from_slice(&tau.to_le_bytes());
        self.transcript.record(OracleKind::Qsq, self.visibility, Direction::Query, &payload, self.counters);
        self.transcript.record(OracleKind::Qsq, self.visibility, Direction::Response, &v.to_le_bytes(), self.counters);
        Ok(v)
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn audit(&self) -> &[AuditEntry] {
        self.answerer.audit()
    }

    pub fn policy(&self) -> AnswerPolicy {
        self.answerer.policy()
    }
}

pub fn qsq_query(oracle: &mut QsqOracle, obs: &Observable, tau: f64) -> Result<f64> {
    oracle.query(obs, tau)
}
