use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2core::{mask, solve_offdiagonal_quadratic, Bits, BooleanFunction, QuadraticSolve};
use crate::oracles::{MeasurementSpec, Observable, QMeasExOracle, QMeasOutcome, QsqOracle};
use crate::qsim::{bell_distribution, prepare_example_state, BellOutcome};

pub const INFLUENCE_TOLERANCE: f64 = 1.0 / 3.0;
pub const INFLUENCE_THRESHOLD: f64 = 0.5;

/// `⌈(n + log₂(1/δ_c))/log₂(8/7)⌉` Bell-sampling queries.
pub fn quadratic_public_budget(n: usize, delta_c: f64) -> usize {
    ((n as f64 + (1.0 / delta_c).log2()) / (8.0f64 / 7.0).log2()).ceil() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadraticAbort {
    /// The `b = 11` rounds never spanned `{0,1}^n`.
    Rank { rank: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRun {
    /// Upper-triangular rows of the learned matrix.
    pub learned: Option<Vec<Bits>>,
    pub abort: Option<QuadraticAbort>,
    pub outcomes: Vec<BellOutcome>,
    pub influences: Vec<f64>,
    pub public_queries: u64,
    pub public_copies: u64,
    pub private_queries: u64,
}

/// Bell sampling on the public oracle, off-diagonals from the `b = 11` rounds, then one influence
/// QSQ per diagonal entry on the private oracle.
pub fn covert_quadratic_learn(
    public: &mut QMeasExOracle,
    private: &mut QsqOracle,
    n: usize,
    delta_c: f64,
    rng: &mut (impl Rng + ?Sized),
) -> Result<QuadraticRun> {
    if public.num_qubits() != n + 1 {
        return Err(Error::ArityMismatch { expected: n + 1, got: public.num_qubits() });
    }
    let budget = quadratic_public_budget(n, delta_c);
    let before = public.counters();
    let mut outcomes = Vec::with_capacity(budget);
    for _ in 0..budget {
        match public.query(&MeasurementSpec::BellSampling, rng)? {
            QMeasOutcome::Bell(o) => outcomes.push(o),
            other => return Err(Error::UnsupportedQuery(format!("unexpected outcome {other:?}"))),
        }
    }
    let after = public.counters();
    let (public_queries, public_copies) = (after.queries - before.queries, after.weighted - before.weighted);
    let samples: Vec<(Bits, Bits)> = outcomes.iter().filter(|o| o.both_labels_one()).map(|o| (o.y, o.z)).collect();
    let offdiag = match solve_offdiagonal_quadratic(n, &samples)? {
        QuadraticSolve::Solved(rows) => rows,
        QuadraticSolve::Underdetermined { rank } => {
            return Ok(QuadraticRun {
                learned: None,
                abort: Some(QuadraticAbort::Rank { rank }),
                outcomes,
                influences: Vec::new(),
                public_queries,
                public_copies,
                private_queries: 0,
            })
        }
    };
    let pri_before = private.counters().queries;
    let mut rows = offdiag.clone();
    let mut influences = Vec::with_capacity(n);
    for (i, row) in rows.iter_mut().enumerate() {
        let v = private.query(&Observable::ConjugatedInfluence { i, offdiag: offdiag.clone() }, INFLUENCE_TOLERANCE)?;
        influences.push(v);
        if v > INFLUENCE_THRESHOLD {
            *row |= 1 << i;
        }
    }
    Ok(QuadraticRun {
        learned: Some(rows),
        abort: None,
        outcomes,
        influences,
        public_queries,
        public_copies,
        private_queries: private.counters().queries - pri_before,
    })
}

/// Exact law of one Bell-sampling outcome on two copies of `|ψ_A⟩`.
pub fn quadratic_outcome_distribution(rows: &[Bits]) -> Result<BTreeMap<BellOutcome, f64>> {
    let f = BooleanFunction::quadratic(rows.len(), rows.to_vec())?;
    let psi = prepare_example_state(&f)?;
    let mut out = BTreeMap::new();
    for (o, p) in bell_distribution(&psi, &psi)? {
        *out.entry(o).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Exact law of `rounds` i.i.d. outcomes.
pub fn quadratic_transcript_distribution(rows: &[Bits], rounds: usize) -> Result<BTreeMap<Vec<BellOutcome>, f64>> {
    let single = quadratic_outcome_distribution(rows)?;
    if (single.len() as f64).powi(rounds as i32) > 4e6 {
        return Err(Error::UnsupportedQuery("transcript space too large to enumerate".into()));
    }
    let mut dist: BTreeMap<Vec<BellOutcome>, f64> = BTreeMap::from([(Vec::new(), 1.0)]);
    for _ in 0..rounds {
        let mut next = BTreeMap::new();
        for (prefix, p) in &dist {
            for (o, q) in &single {
                let mut t = prefix.clone();
                t.push(*o);
                next.insert(t, p * q);
            }
        }
        dist = next;
    }
    Ok(dist)
}

pub fn total_variation<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut tv = 0.0;
    for (k, p) in a {
        tv += (p - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, q) in b {
        if !a.contains_key(k) {
            tv += q;
        }
    }
    tv / 2.0
}

/// Uniform upper-triangular matrix.
pub fn random_upper_triangular(n: usize, rng: &mut (impl Rng + ?Sized)) -> Vec<Bits> {
    (0..n).map(|i| rng.random::<u64>() & mask(n) & !mask(i)).collect()
}
