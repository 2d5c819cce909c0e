use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::MemOracle;

use super::round::{overlap_round, OverlapRound, RoundSource};

/// Declared constant in both copy-count formulas.
pub const C_SO: f64 = 2.0;

/// Copy-count formula attached to the estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopyRule {
    /// `C_so · n² · ln(2/δ) / ε²`.
    Quadratic,
    /// `C_so · n · ln(1/δ) / ε`, the adaptive variant's count.
    Linear,
}

impl CopyRule {
    pub fn copies(self, n: usize, eps: f64, delta: f64) -> Result<usize> {
        check_params(eps, delta)?;
        let n = n as f64;
        let k = match self {
            CopyRule::Quadratic => C_SO * n * n * (2.0 / delta).ln() / (eps * eps),
            CopyRule::Linear => C_SO * n * (1.0 / delta).ln() / eps,
        };
        Ok(k.ceil() as usize)
    }
}

fn check_params(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("ε = {eps} and δ = {delta} must lie in (0, 1)")));
    }
    Ok(())
}

/// `1 − 3ε/(4·n_block)`.
pub fn acceptance_threshold(n_block: usize, eps: f64) -> f64 {
    1.0 - 3.0 * eps / (4.0 * n_block as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationRecord {
    pub n_block: usize,
    pub eps: f64,
    pub delta: f64,
    pub rule: CopyRule,
    /// Copies the attached formula asks for.
    pub required: usize,
    pub rounds: usize,
    pub omega_hat: f64,
    pub threshold: f64,
    pub accepted: bool,
    pub membership_calls: u64,
    /// Membership queries to the base function.
    pub membership_weighted: u64,
}

/// Running tally of rounds.
#[derive(Clone, Debug)]
pub struct OverlapTally {
    n_block: usize,
    hits: usize,
    rounds: usize,
}

impl OverlapTally {
    pub fn new(n_block: usize) -> Self {
        Self { n_block, hits: 0, rounds: 0 }
    }

    pub fn push(&mut self, r: &OverlapRound) {
        self.rounds += 1;
        self.hits += r.score as usize;
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn omega_hat(&self) -> f64 {
        if self.rounds == 0 {
            0.0
        } else {
            self.hits as f64 / self.rounds as f64
        }
    }

    /// Closes the tally against `threshold`; `oracle` supplies the membership counts.
    pub fn record(&self, eps: f64, delta: f64, rule: CopyRule, required: usize, oracle: &MemOracle) -> CertificationRecord {
        let threshold = acceptance_threshold(self.n_block, eps);
        let omega_hat = self.omega_hat();
        let c = oracle.counters();
        CertificationRecord {
            n_block: self.n_block,
            eps,
            delta,
            rule,
            required,
            rounds: self.rounds,
            omega_hat,
            threshold,
            accepted: self.rounds > 0 && omega_hat >= threshold,
            membership_calls: c.queries,
            membership_weighted: c.weighted,
        }
    }
}

/// One round per copy; fails if fewer copies than the formula asks for are supplied.
pub fn overlap_estimate_iid<S: RoundSource>(
    copies: &[S],
    oracle: &mut MemOracle,
    eps: f64,
    delta: f64,
    rule: CopyRule,
    rng: &mut dyn rand::RngCore,
) -> Result<CertificationRecord> {
    let n_block = oracle.function().arity();
    let required = rule.copies(n_block, eps, delta)?;
    if copies.len() < required {
        return Err(Error::InsufficientCopies { need: required, have: copies.len() });
    }
    let mut tally = OverlapTally::new(n_block);
    for c in copies {
        tally.push(&overlap_round(c, oracle, rng)?);
    }
    Ok(tally.record(eps, delta, rule, required, oracle))
}

/// Same estimator over copies produced on demand.
pub fn overlap_estimate_stream<S: RoundSource>(
    mut next_copy: impl FnMut(&mut dyn rand::RngCore) -> Result<S>,
    count: usize,
    oracle: &mut MemOracle,
    eps: f64,
    delta: f64,
    rule: CopyRule,
    rng: &mut dyn rand::RngCore,
) -> Result<CertificationRecord> {
    let n_block = oracle.function().arity();
    let required = rule.copies(n_block, eps, delta)?;
    if count < required {
        return Err(Error::InsufficientCopies { need: required, have: count });
    }
    let mut tally = OverlapTally::new(n_block);
    for _ in 0..count {
        let c = next_copy(rng)?;
        tally.push(&overlap_round(&c, oracle, rng)?);
    }
    Ok(tally.record(eps, delta, rule, required, oracle))
}
