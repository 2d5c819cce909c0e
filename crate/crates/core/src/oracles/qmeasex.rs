use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2core::Bits;
use crate::qsim::{bell_sample, sample_discrete, sample_povm, Basis, BellOutcome, Gate, MixedState, Povm, PovmInput, PureState};

use super::transcript::{Counters, Direction, OracleKind, Transcript, Visibility};

#[derive(Clone, Debug, PartialEq)]
pub enum QState {
    Pure(PureState),
    Mixed(MixedState),
}

impl QState {
    pub fn num_qubits(&self) -> usize {
        match self {
            QState::Pure(p) => p.num_qubits(),
            QState::Mixed(m) => m.num_qubits(),
        }
    }
}

/// Measurements a QMeasEx query may request.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasurementSpec {
    Povm(Povm),
    /// Two-copy Bell sampling on example states.
    BellSampling,
    /// Single copy, qubit `k` measured in `bases[k]`.
    PauliBases(Vec<Basis>),
}

impl MeasurementSpec {
    pub fn copies(&self) -> usize {
        match self {
            MeasurementSpec::Povm(p) => p.copies(),
            MeasurementSpec::BellSampling => 2,
            MeasurementSpec::PauliBases(_) => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QMeasOutcome {
    Label { index: usize, label: String },
    Bell(BellOutcome),
    Pauli(Bits),
}

/// Raw measurement samples from copies of a fixed state; `weighted` counts copies consumed.
#[derive(Clone, Debug)]
pub struct QMeasExOracle {
    source: QState,
    visibility: Visibility,
    counters: Counters,
    transcript: Transcript,
    pauli_cache: HashMap<Vec<Basis>, Vec<f64>>,
}

impl QMeasExOracle {
    pub fn new(source: QState, visibility: Visibility) -> Self {
        Self { source, visibility, counters: Counters::default(), transcript: Transcript::new(), pauli_cache: HashMap::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.source.num_qubits()
    }

    /// Born distribution over outcomes of a product Pauli measurement.
    pub fn pauli_distribution(&self, bases: &[Basis]) -> Result<Vec<f64>> {
        let n = self.source.num_qubits();
        if bases.len() != n {
            return Err(Error::ArityMismatch { expected: n, got: bases.len() });
        }
        match &self.source {
            QState::Pure(p) => {
                let mut s = p.clone();
                for (q, &b) in bases.iter().enumerate() {
                    for &g in rotations(b) {
                        s.apply_gate(g, &[q])?;
                    }
                }
                Ok(s.probabilities())
            }
            QState::Mixed(m) => {
                let mut s = m.clone();
                for (q, &b) in bases.iter().enumerate() {
                    for &g in rotations(b) {
                        s.apply_gate(g, &[q])?;
                    }
                }
                Ok(s.probabilities())
            }
        }
    }

    pub fn query(&mut self, spec: &MeasurementSpec, rng: &mut (impl Rng + ?Sized)) -> Result<QMeasOutcome> {
        let outcome = match spec {
            MeasurementSpec::Povm(povm) => {
                let (index, label) = match &self.source {
                    QState::Pure(p) => {
                        let copies = vec![p.clone(); povm.copies()];
                        sample_povm(&PovmInput::Copies(&copies), povm, rng)?
                    }
                    QState::Mixed(m) => {
                        if povm.copies() != 1 {
                            return Err(Error::UnsupportedQuery("multi-copy POVM on a mixed source".into()));
                        }
                        sample_povm(&PovmInput::Mixed(m), povm, rng)?
                    }
                };
                QMeasOutcome::Label { index, label }
            }
            MeasurementSpec::BellSampling => match &self.source {
                QState::Pure(p) => QMeasOutcome::Bell(bell_sample(p, p, rng)?),
                QState::Mixed(_) => return Err(Error::UnsupportedQuery("Bell sampling needs a pure source".into())),
            },
            MeasurementSpec::PauliBases(bases) => {
                if !self.pauli_cache.contains_key(bases) {
                    let d = self.pauli_distribution(bases)?;
                    self.pauli_cache.insert(bases.clone(), d);
                }
                QMeasOutcome::Pauli(sample_discrete(&self.pauli_cache[bases], rng) as Bits)
            }
        };
        self.counters.bump(spec.copies() as u64);
        let payload = format!("{spec_tag}:{outcome:?}", spec_tag = spec_tag(spec));
        self.transcript.record(OracleKind::Qmeasex, self.visibility, Direction::Response, payload.as_bytes(), self.counters);
        Ok(outcome)
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}

fn rotations(b: Basis) -> &'static [Gate] {
    match b {
        Basis::Z => &[],
        Basis::X => &[Gate::H],
        Basis::Y => &[Gate::Sdg, Gate::H],
    }
}

fn spec_tag(spec: &MeasurementSpec) -> String {
    match spec {
        MeasurementSpec::Povm(p) => format!("povm:{}", p.labels().collect::<Vec<_>>().join(",")),
        MeasurementSpec::BellSampling => "bell".into(),
        MeasurementSpec::PauliBases(b) => format!("pauli:{b:?}"),
    }
}

pub fn qmeasex_query(
    oracle: &mut QMeasExOracle,
    spec: &MeasurementSpec,
    rng: &mut (impl Rng + ?Sized),
) -> Result<QMeasOutcome> {
    oracle.query(spec, rng)
}
