use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// How a statistical oracle turns the exact value into an answer within `τ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnswerPolicy {
    Exact,
    /// Round to the nearest multiple of the queried `τ`.
    #[default]
    Grid,
    /// `truth + τ·u` with `u` uniform in `[-1, 1]` from a seeded stream.
    Adversarial { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub truth: f64,
    pub answer: f64,
    pub tau: f64,
}

impl AuditEntry {
    pub fn within(&self) -> bool {
        (self.answer - self.truth).abs() <= self.tau
    }
}

/// Policy plus its perturbation stream and the audit of every answer given.
#[derive(Clone, Debug)]
pub(crate) struct Answerer {
    policy: AnswerPolicy,
    rng: Option<SimRng>,
    audit: Vec<AuditEntry>,
}

impl Answerer {
    pub fn new(policy: AnswerPolicy) -> Self {
        let rng = match policy {
            AnswerPolicy::Adversarial { seed } => Some(SimRng::seed_from_u64(seed)),
            _ => None,
        };
        Self { policy, rng, audit: Vec::new() }
    }

    pub fn policy(&self) -> AnswerPolicy {
        self.policy
    }

    pub fn answer(&mut self, truth: f64, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let answer = match self.policy {
            AnswerPolicy::Exact => truth,
            AnswerPolicy::Grid => {
                let v = (truth / tau).round() * tau;
                // float rounding can push the grid point a hair past τ
                if (v - truth).abs() <= tau {
                    v
                } else {
                    truth
                }
            }
            AnswerPolicy::Adversarial { .. } => {
                let u: f64 = self.rng.as_mut().expect("seeded").random_range(-1.0..=1.0);
                truth + tau * u
            }
        };
        self.audit.push(AuditEntry { truth, answer, tau });
        Ok(answer)
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::BadTolerance(tau));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_policy_stays_within_tau() {
        for policy in [AnswerPolicy::Exact, AnswerPolicy::Grid, AnswerPolicy::Adversarial { seed: 3 }] {
            let mut a = Answerer::new(policy);
            for k in 0..200 {
                let truth = (k as f64 * 0.0137).sin() * 0.5 + 0.5;
                a.answer(truth, 0.07).unwrap();
            }
            assert!(a.audit().iter().all(AuditEntry::within), "{policy:?}");
        }
    }

    #[test]
    fn grid_rounds() {
        let mut a = Answerer::new(AnswerPolicy::Grid);
        assert!((a.answer(0.26, 0.1).unwrap() - 0.3).abs() < 1e-12);
        assert!((a.answer(0.5, 1.0 / 6.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bad_tau() {
        let mut a = Answerer::new(AnswerPolicy::Exact);
        assert_eq!(a.answer(0.5, 0.0), Err(Error::BadTolerance(0.0)));
        assert!(a.answer(0.5, -1.0).is_err());
    }
}
