use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2core::Bits;
use crate::oracles::{MeasurementSpec, QMeasExOracle, QMeasOutcome};
use crate::qsim::Basis;

/// Largest locality `shadow_estimate` accepts.
pub const MAX_LOCALITY: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShadowShot {
    pub bases: Vec<Basis>,
    pub bits: Bits,
}

/// Random-Pauli measurement records of one source.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShadowSet {
    pub n: usize,
    pub shots: Vec<ShadowShot>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShotLine {
    shot: usize,
    bases: String,
    bits: String,
}

fn basis_char(b: Basis) -> char {
    match b {
        Basis::X => 'X',
        Basis::Y => 'Y',
        Basis::Z => 'Z',
    }
}

impl ShadowSet {
    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    /// One JSON object per line: `{"shot", "bases", "bits"}` with bits packed little-endian in hex.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.shots.iter().enumerate() {
            let line = ShotLine {
                shot: i,
                bases: s.bases.iter().map(|&b| basis_char(b)).collect(),
                bits: crate::gf2core::pack_hex((0..self.n).map(|q| (s.bits >> q) & 1 == 1), self.n),
            };
            out.push_str(&serde_json::to_string(&line).expect("plain struct"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut set = ShadowSet::default();
        for (i, raw) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let line: ShotLine = serde_json::from_str(raw)?;
            if line.shot != i {
                return Err(Error::Parse(format!("shot {} out of order at line {i}", line.shot)));
            }
            let bases = line
                .bases
                .chars()
                .map(|c| match c {
                    'X' => Ok(Basis::X),
                    'Y' => Ok(Basis::Y),
                    'Z' => Ok(Basis::Z),
                    _ => Err(Error::Parse(format!("bad basis label {c:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            if i == 0 {
                if bases.len() > 64 {
                    return Err(Error::Parse("more than 64 qubits".into()));
                }
                set.n = bases.len();
            } else if bases.len() != set.n {
                return Err(Error::Parse(format!("shot {i} has {} bases, expected {}", bases.len(), set.n)));
            }
            let bits = crate::gf2core::unpack_hex(&line.bits, set.n)?
                .into_iter()
                .enumerate()
                .fold(0, |acc, (q, b)| acc | ((b as Bits) << q));
            set.shots.push(ShadowShot { bases, bits });
        }
        Ok(set)
    }
}

/// Each shot measures every qubit in an independent uniform Pauli basis through the public oracle.
pub fn shadow_collect(oracle: &mut QMeasExOracle, shots: usize, rng: &mut (impl Rng + ?Sized)) -> Result<ShadowSet> {
    let n = oracle.num_qubits();
    let mut set = ShadowSet { n, shots: Vec::with_capacity(shots) };
    for _ in 0..shots {
        let bases: Vec<Basis> = (0..n).map(|_| [Basis::X, Basis::Y, Basis::Z][rng.random_range(0..3)]).collect();
        match oracle.query(&MeasurementSpec::PauliBases(bases.clone()), rng)? {
            QMeasOutcome::Pauli(bits) => set.shots.push(ShadowShot { bases, bits }),
            other => return Err(Error::UnsupportedQuery(format!("unexpected outcome {other:?}"))),
        }
    }
    Ok(set)
}

/// `coeff · ⊗_{(q, P)} P_q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: Vec<(usize, Basis)>,
}

/// Sum of Pauli terms with `Σ|coeff| ≤ 1`, so `‖M‖ ≤ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliObservable {
    pub terms: Vec<PauliTerm>,
}

impl PauliObservable {
    pub fn single(ops: Vec<(usize, Basis)>) -> Self {
        Self { terms: vec![PauliTerm { coeff: 1.0, ops }] }
    }

    pub fn identity() -> Self {
        Self::single(Vec::new())
    }

    pub fn locality(&self) -> usize {
        let mut qs: Vec<usize> = self.terms.iter().flat_map(|t| t.ops.iter().map(|o| o.0)).collect();
        qs.sort_unstable();
        qs.dedup();
        qs.len()
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.locality() > MAX_LOCALITY {
            return Err(Error::UnsupportedQuery(format!("locality {} above {MAX_LOCALITY}", self.locality())));
        }
        if self.terms.iter().map(|t| t.coeff.abs()).sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::UnsupportedQuery("coefficient 1-norm above 1".into()));
        }
        for t in &self.terms {
            let mut qs: Vec<usize> = t.ops.iter().map(|o| o.0).collect();
            qs.sort_unstable();
            qs.dedup();
            if qs.len() != t.ops.len() || qs.last().is_some_and(|&q| q >= n) {
                return Err(Error::UnsupportedQuery("Pauli term repeats or exceeds qubits".into()));
            }
        }
        Ok(())
    }

    /// Inverse-channel estimate from one shot: `3^|P|·(−1)^{bits on P}` when every basis matches, else 0.
    pub fn single_shot(&self, shot: &ShadowShot) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mut v = t.coeff;
                for &(q, p) in &t.ops {
                    if shot.bases[q] != p {
                        return 0.0;
                    }
                    v *= if (shot.bits >> q) & 1 == 1 { -3.0 } else { 3.0 };
                }
                v
            })
            .sum()
    }
}

/// Median of `batches` batch means of the single-shot estimates.
pub fn shadow_estimate(shadows: &ShadowSet, obs: &PauliObservable, batches: usize) -> Result<f64> {
    obs.check(shadows.n)?;
    if batches == 0 || shadows.len() < batches {
        return Err(Error::InsufficientCopies { need: batches.max(1), have: shadows.len() });
    }
    let size = shadows.len() / batches;
    let mut means: Vec<f64> = (0..batches)
        .map(|b| shadows.shots[b * size..(b + 1) * size].iter().map(|s| obs.single_shot(s)).sum::<f64>() / size as f64)
        .collect();
    means.sort_by(|a, b| a.total_cmp(b));
    Ok(if batches % 2 == 1 { means[batches / 2] } else { 0.5 * (means[batches / 2 - 1] + means[batches / 2]) })
}

/// `K = ⌈8 ln(2·targets/δ_p)⌉`.
pub fn median_batches(targets: usize, delta_p: f64) -> usize {
    (8.0 * (2.0 * targets as f64 / delta_p).ln()).ceil().max(1.0) as usize
}

/// Shots per batch, `⌈4·4^k/τ²⌉`.
pub fn batch_size(k: usize, tau: f64) -> usize {
    (4.0 * 4f64.powi(k as i32) / (tau * tau)).ceil() as usize
}

/// Total shots for `targets` observables of locality `k` at tolerance `τ` and confidence `δ_p`.
pub fn shadow_shots(targets: usize, k: usize, tau: f64, delta_p: f64) -> usize {
    median_batches(targets, delta_p) * batch_size(k, tau)
}

/// Collect once, then answer every observable from the same records.
pub fn covert_qsq_answers(
    oracle: &mut QMeasExOracle,
    observables: &[PauliObservable],
    tau: f64,
    delta_p: f64,
    rng: &mut (impl Rng + ?Sized),
) -> Result<(ShadowSet, Vec<f64>)> {
    let k = observables.iter().map(|o| o.locality()).max().unwrap_or(0);
    let batches = median_batches(observables.len().max(1), delta_p);
    let set = shadow_collect(oracle, batches * batch_size(k, tau), rng)?;
    let est = observables.iter().map(|o| shadow_estimate(&set, o, batches)).collect::<Result<Vec<_>>>()?;
    Ok((set, est))
}
