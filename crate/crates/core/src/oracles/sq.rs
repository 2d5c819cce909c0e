use crate::error::{Error, Result};
use crate::gf2core::{Bits, BooleanFunction};

use super::policy::{Answerer, AnswerPolicy, AuditEntry};
use super::transcript::{Counters, Direction, OracleKind, Transcript, Visibility};

/// A bounded query over labelled examples `(x, label)`, index `x | label << n`.
#[derive(Clone, Debug, PartialEq)]
pub enum SqQuery {
    /// `{0,1}`-valued, arity `n + w`.
    Boolean(BooleanFunction),
    /// Real-valued table in `[0, 1]` of length `2^(n+w)`.
    Table { arity: usize, values: Vec<f64> },
}

impl SqQuery {
    pub fn table(arity: usize, values: Vec<f64>) -> Result<Self> {
        if arity > 24 || values.len() != 1usize << arity {
            return Err(Error::UnsupportedQuery(format!("table of length {} for arity {arity}", values.len())));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::UnsupportedQuery("query values must lie in [0, 1]".into()));
        }
        Ok(SqQuery::Table { arity, values })
    }

    pub fn arity(&self) -> usize {
        match self {
            SqQuery::Boolean(q) => q.arity(),
            SqQuery::Table { arity, .. } => *arity,
        }
    }

    pub fn value(&self, z: Bits) -> f64 {
        match self {
            SqQuery::Boolean(q) => q.value(z) as f64,
            SqQuery::Table { values, .. } => values[z as usize],
        }
    }

    fn payload(&self) -> Vec<u8> {
        match self {
            SqQuery::Boolean(q) => q.to_json().to_string().into_bytes(),
            SqQuery::Table { values, .. } => values.iter().flat_map(|v| v.to_le_bytes()).collect(),
        }
    }
}

/// Statistical-query oracle for the uniform distribution over `x` labelled by `f`.
#[derive(Clone, Debug)]
pub struct SqOracle {
    f: BooleanFunction,
    answerer: Answerer,
    visibility: Visibility,
    counters: Counters,
    transcript: Transcript,
}

impl SqOracle {
    pub fn new(f: BooleanFunction, policy: AnswerPolicy, visibility: Visibility) -> Result<Self> {
        if f.arity() > 24 {
            return Err(Error::TooManyQubits { n: f.arity(), cap: 24 });
        }
        Ok(Self { f, answerer: Answerer::new(policy), visibility, counters: Counters::default(), transcript: Transcript::new() })
    }

    pub fn exact(&self, q: &SqQuery) -> Result<f64> {
        let n = self.f.arity();
        if q.arity() != n + self.f.width() {
            return Err(Error::ArityMismatch { expected: n + self.f.width(), got: q.arity() });
        }
        let total: f64 = (0..1u64 << n).map(|x| q.value(x | (self.f.value(x) << n))).sum();
        Ok(total / (1u64 << n) as f64)
    }

    pub fn query(&mut self, q: &SqQuery, tau: f64) -> Result<f64> {
        super::policy::check_tau(tau)?;
        let truth = self.exact(q)?;
        let v = self.answerer.answer(truth, tau)?;
        self.counters.bump(1);
        let mut payload = q.payload();
        payload.extend_from_slice(&tau.to_le_bytes());
        self.transcript.record(OracleKind::Sq, self.visibility, Direction::Query, &payload, self.counters);
        self.transcript.record(OracleKind::Sq, self.visibility, Direction::Response, &v.to_le_bytes(), self.counters);
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

    pub fn visibility(&self) -> Visibility {
        self.visibility
    }
}

pub fn sq_query(oracle: &mut SqOracle, q: &SqQuery, tau: f64) -> Result<f64> {
    oracle.query(q, tau)
}
