use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2core::{dot, lex_key, AffineSubspaceGF2, Bits, BooleanFunction, Gf2System};
use crate::oracles::{ExOracle, SqOracle, SqQuery};

/// Private SQ tolerance of every tournament match.
pub const MATCH_TOLERANCE: f64 = 1.0 / 6.0;
/// A match is won by `t₁` when `α ≥ 1/3`.
pub const MATCH_THRESHOLD: f64 = 1.0 / 3.0;
/// Slack added to the example budget on top of `n − k + ⌈log₂(1/δ_c)⌉`.
pub const BUDGET_SLACK: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityLearnerConfig {
    pub n: usize,
    pub delta_c: f64,
    pub delta_p: f64,
}

impl ParityLearnerConfig {
    pub fn new(n: usize, delta_c: f64, delta_p: f64) -> Result<Self> {
        let c = Self { n, delta_c, delta_p };
        if !(delta_c > 0.0 && delta_c < 1.0 && delta_p > 0.0 && delta_p < 1.0) {
            return Err(Error::Config("δ_c and δ_p must lie in (0, 1)".into()));
        }
        if c.k() >= n || n > 24 {
            return Err(Error::Config(format!("need k = {} < n = {n} ≤ 24", c.k())));
        }
        Ok(c)
    }

    /// `k = ⌈log₂(1/δ_p)⌉`.
    pub fn k(&self) -> usize {
        (1.0 / self.delta_p).log2().ceil() as usize
    }

    pub fn public_budget(&self) -> usize {
        self.n - self.k() + (1.0 / self.delta_c).log2().ceil() as usize + BUDGET_SLACK
    }

    /// `2/δ_p`.
    pub fn private_ceiling(&self) -> f64 {
        2.0 / self.delta_p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub t1: Bits,
    pub t2: Bits,
    pub alpha: f64,
    pub winner: Bits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityAbort {
    ExampleBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityRun {
    pub learned: Option<Bits>,
    pub abort: Option<ParityAbort>,
    pub candidates: Option<AffineSubspaceGF2>,
    pub matches: Vec<MatchRecord>,
    pub public_examples: u64,
    pub private_queries: u64,
}

/// `q(x, y) = [t₁·x ≠ t₂·x]·[t₁·x = y]` as an SQ over `(x, label)`.
pub fn match_query(n: usize, t1: Bits, t2: Bits) -> Result<SqQuery> {
    let q = BooleanFunction::from_fn(n + 1, 1, |z| {
        let x = z & crate::gf2core::mask(n);
        let y = (z >> n) & 1 == 1;
        (dot(t1, x) != dot(t2, x) && dot(t1, x) == y) as Bits
    })?;
    Ok(SqQuery::Boolean(q))
}

/// Balanced bracket over `S` in lexicographic order; an odd player out gets a bye, smallest first.
pub fn play_tournament(
    n: usize,
    candidates: &[Bits],
    mut play: impl FnMut(Bits, Bits) -> Result<f64>,
) -> Result<(Bits, Vec<MatchRecord>)> {
    let mut round: Vec<Bits> = candidates.to_vec();
    round.sort_by_key(|&t| lex_key(t, n));
    let mut log = Vec::new();
    if round.is_empty() {
        return Err(Error::Config("empty candidate set".into()));
    }
    while round.len() > 1 {
        let mut next = Vec::with_capacity(round.len().div_ceil(2));
        let start = if round.len() % 2 == 1 {
            next.push(round[0]);
            1
        } else {
            0
        };
        for pair in round[start..].chunks(2) {
            let (t1, t2) = (pair[0], pair[1]);
            let alpha = play(t1, t2)?;
            let winner = if alpha >= MATCH_THRESHOLD { t1 } else { t2 };
            log.push(MatchRecord { t1, t2, alpha, winner });
            next.push(winner);
        }
        round = next;
    }
    Ok((round[0], log))
}

/// Public examples until rank `n − k`, then a private SQ tournament over the consistent parities.
pub fn covert_parity_learn(
    public: &mut ExOracle,
    private: &mut SqOracle,
    config: &ParityLearnerConfig,
    rng: &mut (impl Rng + ?Sized),
) -> Result<ParityRun> {
    let n = config.n;
    let target = n - config.k();
    let ex_before = public.counters().queries;
    let sq_before = private.counters().queries;
    let mut sys = Gf2System::new(n);
    let mut count = 0;
    while sys.rank() < target {
        let (x, y) = public.sample(rng);
        sys.insert(x, y & 1 == 1);
        count += 1;
        if sys.rank() < target && count >= config.public_budget() {
            return Ok(ParityRun {
                learned: None,
                abort: Some(ParityAbort::ExampleBudget),
                candidates: None,
                matches: Vec::new(),
                public_examples: public.counters().queries - ex_before,
                private_queries: 0,
            });
        }
    }
    let space = sys.solution_set().ok_or_else(|| Error::Inconsistent("examples are not a parity".into()))?;
    let members = space.members();
    let (winner, matches) =
        play_tournament(n, &members, |t1, t2| private.query(&match_query(n, t1, t2)?, MATCH_TOLERANCE))?;
    Ok(ParityRun {
        learned: Some(winner),
        abort: None,
        candidates: Some(space),
        matches,
        public_examples: public.counters().queries - ex_before,
        private_queries: private.counters().queries - sq_before,
    })
}

/// Uniform member of the parities consistent with the public examples.
pub fn parity_adversary_guess(n: usize, examples: &[(Bits, Bits)], rng: &mut (impl Rng + ?Sized)) -> Result<Bits> {
    let mut sys = Gf2System::new(n);
    for &(x, y) in examples {
        sys.insert(x, y & 1 == 1);
    }
    let space = sys.solution_set().ok_or_else(|| Error::Inconsistent("examples are not a parity".into()))?;
    Ok(space.basis.iter().fold(space.offset, |acc, &b| if rng.random::<bool>() { acc ^ b } else { acc }))
}

/// Exact success probability of [`parity_adversary_guess`] for the planted `s`.
pub fn parity_guess_probability(n: usize, examples: &[(Bits, Bits)], s: Bits) -> Result<f64> {
    let mut sys = Gf2System::new(n);
    for &(x, y) in examples {
        sys.insert(x, y & 1 == 1);
    }
    let space = sys.solution_set().ok_or_else(|| Error::Inconsistent("examples are not a parity".into()))?;
    Ok(if space.contains(s) { 1.0 / space.size() as f64 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{AnswerPolicy, Visibility};
    use crate::rng::rng_from_seed;

    fn oracles(n: usize, s: Bits, policy: AnswerPolicy) -> (ExOracle, SqOracle) {
        let f = BooleanFunction::parity(n, s).unwrap();
        (ExOracle::new(f.clone(), Visibility::Public), SqOracle::new(f, policy, Visibility::Private).unwrap())
    }

    #[test]
    fn config_derivations() {
        let c = ParityLearnerConfig::new(8, 0.1, 0.125).unwrap();
        assert_eq!(c.k(), 3);
        assert_eq!(c.public_budget(), 8 - 3 + 4 + 4);
        assert_eq!(c.private_ceiling(), 16.0);
        assert!(ParityLearnerConfig::new(3, 0.1, 0.1).is_err());
    }

    #[test]
    fn planted_n4_k2() {
        let mut rng = rng_from_seed(5);
        let s = 0b1011;
        let (mut ex, mut sq) = oracles(4, s, AnswerPolicy::Grid);
        let c = ParityLearnerConfig::new(4, 0.01, 0.25).unwrap();
        let run = covert_parity_learn(&mut ex, &mut sq, &c, &mut rng).unwrap();
        assert_eq!(run.learned, Some(s));
        assert_eq!(run.private_queries, 3);
        assert!(run.matches.iter().all(|m| run.candidates.as_ref().unwrap().contains(m.winner)));
    }

    #[test]
    fn true_parity_wins_every_match() {
        let n = 5;
        let s = 0b10110;
        let f = BooleanFunction::parity(n, s).unwrap();
        let o = SqOracle::new(f, AnswerPolicy::Exact, Visibility::Private).unwrap();
        for t in 0..1u64 << n {
            if t == s {
                continue;
            }
            assert_eq!(o.exact(&match_query(n, s, t).unwrap()).unwrap(), 0.5);
            assert_eq!(o.exact(&match_query(n, t, s).unwrap()).unwrap(), 0.0);
        }
    }

    #[test]
    fn adversarial_answers_cannot_flip_the_winner() {
        let mut rng = rng_from_seed(6);
        for seed in 0..20 {
            let s = rng.random::<u64>() & 0xff;
            let (mut ex, mut sq) = oracles(8, s, AnswerPolicy::Adversarial { seed });
            let c = ParityLearnerConfig::new(8, 0.1, 0.125).unwrap();
            let run = covert_parity_learn(&mut ex, &mut sq, &c, &mut rng).unwrap();
            if run.abort.is_none() {
                assert_eq!(run.learned, Some(s));
                assert!(run.private_queries as f64 <= c.private_ceiling());
            }
        }
    }

    #[test]
    fn adversary_guess_cases() {
        let mut rng = rng_from_seed(7);
        let s = 0b0110;
        let full: Vec<(Bits, Bits)> = (0..4).map(|i| (1 << i, dot(s, 1 << i) as Bits)).collect();
        assert_eq!(parity_adversary_guess(4, &full, &mut rng).unwrap(), s);
        assert_eq!(parity_guess_probability(4, &[], s).unwrap(), 1.0 / 16.0);
        assert_eq!(parity_guess_probability(4, &full[..2], s).unwrap(), 0.25);
    }

    #[test]
    fn odd_bracket_gives_bye_to_smallest() {
        let (w, log) = play_tournament(3, &[0b001, 0b000, 0b100], |_, _| Ok(1.0)).unwrap();
        // reading order "000", "001", "100": the first sits out
        assert_eq!(log.len(), 2);
        assert_eq!((log[0].t1, log[0].t2), (0b100, 0b001));
        assert_eq!(w, 0b000);
    }
}
