use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2core::{Bits, BooleanFunction};

use super::transcript::{Counters, Direction, OracleKind, Transcript, Visibility};

/// Uniform labelled examples `(x, f(x))`.
#[derive(Clone, Debug)]
pub struct ExOracle {
    f: BooleanFunction,
    visibility: Visibility,
    counters: Counters,
    transcript: Transcript,
    samples: Vec<(Bits, Bits)>,
}

impl ExOracle {
    pub fn new(f: BooleanFunction, visibility: Visibility) -> Self {
        Self { f, visibility, counters: Counters::default(), transcript: Transcript::new(), samples: Vec::new() }
    }

    pub fn sample(&mut self, rng: &mut (impl Rng + ?Sized)) -> (Bits, Bits) {
        let n = self.f.arity();
        let x = if n == 0 { 0 } else { rng.random::<u64>() >> (64 - n) };
        let y = self.f.value(x);
        self.counters.bump(1);
        let payload = format!("{x}:{y}");
        self.transcript.record(OracleKind::Ex, self.visibility, Direction::Sample, payload.as_bytes(), self.counters);
        self.samples.push((x, y));
        (x, y)
    }

    /// Every pair drawn so far; this is what an eavesdropper sees on a public oracle.
    pub fn samples(&self) -> &[(Bits, Bits)] {
        &self.samples
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}

pub fn ex_sample(oracle: &mut ExOracle, rng: &mut (impl Rng + ?Sized)) -> (Bits, Bits) {
    oracle.sample(rng)
}

/// Membership oracle; `weighted` counts base-function queries.
#[derive(Clone, Debug)]
pub struct MemOracle {
    f: BooleanFunction,
    visibility: Visibility,
    counters: Counters,
    transcript: Transcript,
}

impl MemOracle {
    pub fn new(f: BooleanFunction, visibility: Visibility) -> Self {
        Self { f, visibility, counters: Counters::default(), transcript: Transcript::new() }
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.f
    }

    pub fn query(&mut self, x: Bits) -> Result<Bits> {
        let y = self.f.eval(x)?;
        self.counters.bump(self.f.base_query_cost());
        self.log(format!("{x}:{y}"));
        Ok(y)
    }

    /// One query to `f^{⊗m}` at the concatenation of `xs`, charged as `m` queries to `f`.
    pub fn query_tensor(&mut self, xs: &[Bits]) -> Result<bool> {
        if self.f.width() != 1 {
            return Err(Error::InvalidFunction("tensor-power membership needs a width-1 function".into()));
        }
        let mut out = false;
        for &x in xs {
            out ^= self.f.eval(x)? & 1 == 1;
        }
        self.counters.bump(self.f.base_query_cost() * xs.len() as u64);
        self.log(format!("{xs:?}:{}", out as u8));
        Ok(out)
    }

    /// Folds in queries made through a derived oracle on the same private function.
    pub(crate) fn absorb(&mut self, c: Counters) {
        self.counters.queries += c.queries;
        self.counters.weighted += c.weighted;
    }

    fn log(&mut self, payload: String) {
        self.transcript.record(OracleKind::Mem, self.visibility, Direction::Query, payload.as_bytes(), self.counters);
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}

pub fn mem_query(oracle: &mut MemOracle, x: Bits) -> Result<Bits> {
    oracle.query(x)
}
