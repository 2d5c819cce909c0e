use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

use super::{hermitian_eigenvalues, sample_discrete, MixedState, PureState, MIXED_CAP};
use crate::error::{Error, Result};

const COMPLETENESS_TOL: f64 = 1e-8;

/// An m-copy POVM with labelled elements.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    copies: usize,
    qubits_per_copy: usize,
    elements: Vec<(String, DMatrix<C64>)>,
}

pub enum PovmInput<'a> {
    Copies(&'a [PureState]),
    Mixed(&'a MixedState),
}

impl Povm {
    pub fn new(copies: usize, qubits_per_copy: usize, elements: Vec<(String, DMatrix<C64>)>) -> Result<Self> {
        let n = copies * qubits_per_copy;
        if n > MIXED_CAP {
            return Err(Error::TooManyQubits { n, cap: MIXED_CAP });
        }
        let d = 1usize << n;
        let mut sum = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
        for (label, e) in &elements {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::DimensionMismatch(format!("element {label} has wrong size")));
            }
            if hermitian_eigenvalues(e).into_iter().any(|l| l < -1e-8) {
                return Err(Error::InvalidState(format!("element {label} is not positive")));
            }
            sum += e;
        }
        let dev = (sum - DMatrix::<C64>::identity(d, d)).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidState(format!("elements sum to identity only within {dev}")));
        }
        Ok(Self { copies, qubits_per_copy, elements })
    }

    /// Projective measurement in the computational basis.
    pub fn computational(n: usize) -> Result<Self> {
        let d = 1usize << n;
        let elements = (0..d)
            .map(|k| {
                let mut e = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
                e[(k, k)] = C64::new(1.0, 0.0);
                (format!("{k}"), e)
            })
            .collect();
        Self::new(1, n, elements)
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn qubits_per_copy(&self) -> usize {
        self.qubits_per_copy
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.elements.iter().map(|(l, _)| l.as_str())
    }

    pub fn elements(&self) -> &[(String, DMatrix<C64>)] {
        &self.elements
    }

    fn joint(&self, input: &PovmInput) -> Result<MixedState> {
        let n = self.copies * self.qubits_per_copy;
        let rho = match input {
            PovmInput::Copies(parts) => {
                if parts.len() != self.copies || parts.iter().any(|p| p.num_qubits() != self.qubits_per_copy) {
                    return Err(Error::DimensionMismatch(format!(
                        "povm expects {} copies of {} qubits",
                        self.copies, self.qubits_per_copy
                    )));
                }
                PureState::tensor_all(parts)?.to_mixed()?
            }
            PovmInput::Mixed(m) => (*m).clone(),
        };
        if rho.num_qubits() != n {
            return Err(Error::DimensionMismatch(format!("povm acts on {n} qubits")));
        }
        Ok(rho)
    }

    /// `tr[E_i ρ]` for every element.
    pub fn probabilities(&self, input: &PovmInput) -> Result<Vec<f64>> {
        let rho = self.joint(input)?;
        Ok(self
            .elements
            .iter()
            .map(|(_, e)| (e * rho.matrix()).trace().re.max(0.0))
            .collect())
    }
}

/// Samples one outcome; returns its index and label.
pub fn sample_povm(input: &PovmInput, povm: &Povm, rng: &mut (impl Rng + ?Sized)) -> Result<(usize, String)> {
    let probs = povm.probabilities(input)?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > COMPLETENESS_TOL {
        return Err(Error::InvalidState(format!("outcome probabilities sum to {total}")));
    }
    let k = sample_discrete(&probs, rng);
    Ok((k, povm.elements[k].0.clone()))
}
