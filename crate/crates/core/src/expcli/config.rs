use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adversary::AdversarySpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    CovertSq,
    ShadowsQsq,
    Parity,
    Quadratic,
    Certify,
    AcquireUni,
    AcquireAf,
    Forrelation,
    Simon,
    NogoSwap,
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::CovertSq,
        Scenario::ShadowsQsq,
        Scenario::Parity,
        Scenario::Quadratic,
        Scenario::Certify,
        Scenario::AcquireUni,
        Scenario::AcquireAf,
        Scenario::Forrelation,
        Scenario::Simon,
        Scenario::NogoSwap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::CovertSq => "covert-sq",
            Scenario::ShadowsQsq => "shadows-qsq",
            Scenario::Parity => "parity",
            Scenario::Quadratic => "quadratic",
            Scenario::Certify => "certify",
            Scenario::AcquireUni => "acquire-uni",
            Scenario::AcquireAf => "acquire-af",
            Scenario::Forrelation => "forrelation",
            Scenario::Simon => "simon",
            Scenario::NogoSwap => "nogo-swap",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }

    pub fn describe(self) -> &'static str {
        match self {
            Scenario::CovertSq => "polynomial SQ through a random JL sketch; success = estimate within δ",
            Scenario::ShadowsQsq => "local Pauli QSQs answered from classical shadows; success = all within τ",
            Scenario::Parity => "parity learning from public examples and private SQ matches",
            Scenario::Quadratic => "quadratic form from Bell sampling plus private influence QSQs",
            Scenario::Certify => "i.i.d. shadow-overlap certification of channel-delivered phase states",
            Scenario::AcquireUni => "masked acquisition against a unidirectional adversary",
            Scenario::AcquireAf => "entangled acquisition against an ancilla-free adversary",
            Scenario::Forrelation => "covert Forrelation decision, half the trials per promise case",
            Scenario::Simon => "covert Simon decision, half the trials per promise case",
            Scenario::NogoSwap => "swap attack on masked parity acquisition",
        }
    }

    /// Scenarios whose oracles are classical or measurement-only and take no channel adversary.
    fn channel_free(self) -> bool {
        matches!(self, Scenario::CovertSq | Scenario::ShadowsQsq | Scenario::Parity | Scenario::Quadratic)
    }
}

/// A pass condition on an aggregate flag rate, judged against the Wilson interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    pub flag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

fn d_n() -> usize {
    3
}
fn d_one() -> usize {
    1
}
fn d_tenth() -> f64 {
    0.1
}
fn d_delta_p() -> f64 {
    0.125
}
fn d_trials() -> usize {
    100
}
fn d_degree() -> usize {
    2
}
fn d_observables() -> usize {
    20
}
fn d_locality() -> usize {
    2
}
fn d_unit() -> f64 {
    1.0
}
fn d_delta_tilde() -> f64 {
    0.05
}
fn d_policy() -> crate::oracles::AnswerPolicy {
    crate::oracles::AnswerPolicy::Grid
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default = "d_n")]
    pub n: usize,
    /// Copies per certified block.
    #[serde(default = "d_one")]
    pub m: usize,
    #[serde(default = "d_tenth")]
    pub eps: f64,
    #[serde(default = "d_tenth")]
    pub delta: f64,
    #[serde(default = "d_tenth")]
    pub delta_c: f64,
    #[serde(default = "d_delta_p")]
    pub delta_p: f64,
    /// Leak bound the ancilla-free protocol is tuned for; defaults to the adversary's own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_leak: Option<f64>,
    /// Override for the number of certification blocks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(default = "d_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub adversary: AdversarySpec,
    /// Monomial degree for covert-sq.
    #[serde(default = "d_degree")]
    pub degree: usize,
    /// Shadow accuracy for shadows-qsq.
    #[serde(default = "d_tenth")]
    pub tau: f64,
    #[serde(default = "d_observables")]
    pub observables: usize,
    #[serde(default = "d_locality")]
    pub locality: usize,
    #[serde(default = "d_unit")]
    pub b_c: f64,
    #[serde(default = "d_unit")]
    pub b_m: f64,
    /// Error of the bare task algorithm; sets `(ε_A, δ_A) = (δ̃², 2δ̃)`.
    #[serde(default = "d_delta_tilde")]
    pub delta_tilde: f64,
    /// Acquisitions per ancilla-free task run.
    #[serde(default = "d_one")]
    pub repeats: usize,
    #[serde(default = "d_policy")]
    pub policy: crate::oracles::AnswerPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assertions: Vec<Assertion>,
}

fn open_unit(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} = {v} must lie in (0, 1)")))
    }
}

impl ExperimentConfig {
    /// Field defaults, adjusted so each scenario runs as is: parity at n = 6,
    /// acquire-af tuned for δ_leak = 1/2, nogo-swap with its attack.
    pub fn new(scenario: Scenario) -> Self {
        let mut c: Self = serde_json::from_value(serde_json::json!({ "scenario": scenario })).expect("defaults deserialize");
        match scenario {
            Scenario::Parity => c.n = 6,
            Scenario::AcquireAf => c.delta_leak = Some(0.5),
            Scenario::NogoSwap => c.adversary = AdversarySpec::SwapAttack,
            _ => {}
        }
        c
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// The leak bound the ancilla-free protocols are tuned for.
    pub fn leak_bound(&self) -> Option<f64> {
        self.delta_leak.or(match self.adversary {
            AdversarySpec::AncillaFreeIid { delta_leak, .. } => Some(delta_leak),
            _ => None,
        })
    }

    /// Whether the Forrelation and Simon scenarios run the ancilla-free wrapper.
    pub fn ancilla_free_class(&self) -> bool {
        self.delta_leak.is_some() || matches!(self.adversary, AdversarySpec::AncillaFreeIid { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.m == 0 || self.repeats == 0 || self.workers == Some(0) {
            return Err(Error::Config("m, repeats and workers must be positive".into()));
        }
        if self.blocks == Some(0) {
            return Err(Error::Config("blocks override must be positive".into()));
        }
        for (v, what) in [(self.eps, "eps"), (self.delta, "delta"), (self.delta_c, "delta_c"), (self.delta_p, "delta_p"), (self.tau, "tau")] {
            open_unit(v, what)?;
        }
        if !(self.delta_tilde > 0.0 && self.delta_tilde < 0.125) {
            return Err(Error::Config(format!("delta_tilde = {} must lie in (0, 1/8)", self.delta_tilde)));
        }
        if let Some(l) = self.delta_leak {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::Config(format!("delta_leak = {l} must lie in [0, 1]")));
            }
        }
        for a in &self.assertions {
            if a.min.is_none() && a.max.is_none() {
                return Err(Error::Config(format!("assertion on {} sets neither min nor max", a.flag)));
            }
        }
        let (lo, hi) = match self.scenario {
            Scenario::CovertSq => (2, 8),
            Scenario::ShadowsQsq => (1, 8),
            Scenario::Parity => (2, 20),
            Scenario::Quadratic => (2, 6),
            Scenario::Certify | Scenario::AcquireUni | Scenario::NogoSwap => (1, 8),
            Scenario::AcquireAf => (1, 4),
            Scenario::Forrelation | Scenario::Simon => (2, if self.ancilla_free_class() { 3 } else { 5 }),
        };
        if self.n < lo || self.n > hi {
            return Err(Error::Config(format!("{} needs n in {lo}..={hi}, got {}", self.scenario.name(), self.n)));
        }
        if self.scenario == Scenario::Parity {
            crate::covertex::ParityLearnerConfig::new(self.n, self.delta_c, self.delta_p)?;
        }
        self.check_adversary()
    }

    fn check_adversary(&self) -> Result<()> {
        let adv = &self.adversary;
        let name = self.scenario.name();
        let trivial = matches!(adv, AdversarySpec::None | AdversarySpec::Identity);
        if self.scenario.channel_free() && !trivial {
            return Err(Error::Config(format!("{name} has no quantum channel for an adversary to tap")));
        }
        match self.scenario {
            Scenario::NogoSwap => {
                if *adv != AdversarySpec::SwapAttack {
                    return Err(Error::Config("nogo-swap runs the swap attack only".into()));
                }
            }
            Scenario::AcquireAf => {
                if matches!(adv, AdversarySpec::SwapAttack) {
                    return Err(Error::Config("acquire-af admits ancilla-free adversaries only".into()));
                }
                if !trivial && !matches!(adv, AdversarySpec::AncillaFreeIid { .. }) {
                    return Err(Error::Config("acquire-af admits ancilla-free adversaries only".into()));
                }
                if self.leak_bound().is_none() {
                    return Err(Error::Config("acquire-af needs delta_leak".into()));
                }
            }
            Scenario::Forrelation | Scenario::Simon if self.ancilla_free_class() => {
                if !trivial && !matches!(adv, AdversarySpec::AncillaFreeIid { .. }) {
                    return Err(Error::Config(format!("ancilla-free {name} admits ancilla-free adversaries only")));
                }
            }
            _ => {
                if adv.is_bidirectional() {
                    return Err(Error::Config(format!("{name} is a unidirectional scenario; {adv:?} touches queries")));
                }
            }
        }
        if let AdversarySpec::ResponseDepolarize { p } = adv {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::Config(format!("depolarizing probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let c = ExperimentConfig::from_json_str(r#"{"scenario":"parity","n":8}"#).unwrap();
        assert_eq!(c.trials, 100);
        assert_eq!(c.delta_p, 0.125);
        let back = ExperimentConfig::from_json_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(ExperimentConfig::new(Scenario::Parity).n, 6);
        for s in Scenario::ALL {
            ExperimentConfig::new(s).validate().unwrap();
        }
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            r#"{"scenario":"parity","n":8,"bogus":1}"#,
            r#"{"scenario":"teleport"}"#,
            r#"{"scenario":"parity","trials":0}"#,
            r#"{"scenario":"acquire-uni","adversary":{"kind":"swap-attack"}}"#,
            r#"{"scenario":"parity","adversary":{"kind":"response-measure-z"}}"#,
            r#"{"scenario":"nogo-swap"}"#,
            r#"{"scenario":"acquire-af"}"#,
            r#"{"scenario":"certify","eps":1.5}"#,
            r#"{"scenario":"parity","n":3}"#,
            r#"{"scenario":"certify","assertions":[{"flag":"accepted"}]}"#,
        ] {
            assert!(ExperimentConfig::from_json_str(bad).is_err(), "{bad}");
        }
        assert!(ExperimentConfig::from_json_str(r#"{"scenario":"nogo-swap","n":4,"adversary":{"kind":"swap-attack"}}"#).is_ok());
        let af = ExperimentConfig::from_json_str(r#"{"scenario":"acquire-af","adversary":{"kind":"ancilla-free-iid","delta_leak":0.5}}"#).unwrap();
        assert_eq!(af.leak_bound(), Some(0.5));
    }

    #[test]
    fn scenario_names() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::parse(s.name()).unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), serde_json::json!(s.name()));
        }
    }
}
