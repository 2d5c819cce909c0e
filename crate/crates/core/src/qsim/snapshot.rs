use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{PureState, PURE_CAP};
use crate::error::{Error, Result};

/// Debug dump: `n` plus interleaved re/im amplitudes in basis-index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub n: usize,
    pub amplitudes: Vec<f64>,
}

impl StateSnapshot {
    pub fn from_state(s: &PureState) -> Self {
        let amplitudes = s.amplitudes().iter().flat_map(|a| [a.re, a.im]).collect();
        Self { n: s.num_qubits(), amplitudes }
    }

    pub fn to_state(&self) -> Result<PureState> {
        if self.n > PURE_CAP {
            return Err(Error::TooManyQubits { n: self.n, cap: PURE_CAP });
        }
        if self.amplitudes.len() != 2 << self.n {
            return Err(Error::Parse(format!("{} reals for {} qubits", self.amplitudes.len(), self.n)));
        }
        let amps = self.amplitudes.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        PureState::from_amplitudes(self.n, amps)
    }

    pub fn parse(text: &str) -> Result<PureState> {
        serde_json::from_str::<StateSnapshot>(text)?.to_state()
    }
}
