use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{bits_to_string, dot, mask, pack_hex, parse_bits_n, unpack_hex, Bits};
use crate::error::{Error, Result};

/// Largest arity a tabulated body may have.
pub const TABLE_ARITY_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Body {
    /// One output word per input, indexed by `x`.
    TruthTable(Vec<Bits>),
    Parity(Bits),
    /// Row `i` holds bits `A[i][j]`; upper-triangular.
    Quadratic(Vec<Bits>),
    /// `h(x, y) = f(x) ⊕ g(y)` with `x` in the low bits.
    PaddedXor(Box<BooleanFunction>, Box<BooleanFunction>),
    /// `f(x_1) ⊕ … ⊕ f(x_m)`, block `i` at bits `[i·n, (i+1)·n)`.
    TensorPower(Box<BooleanFunction>, usize),
    /// Labels indexed by compressed coset representative.
    Simon { period: Bits, labels: Vec<Bits> },
    /// `F(r, x) = r·x ⊕ f(x)` with `r` in the low half.
    MaskedPhase(Box<BooleanFunction>),
    /// `f̃(x, y) = y·f(x)` with `x` in the low bits.
    ExamplePhase(Box<BooleanFunction>),
}

/// A map from n-bit strings to w-bit strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "Value")]
pub struct BooleanFunction {
    n: usize,
    w: usize,
    body: Body,
}

impl BooleanFunction {
    pub fn truth_table(n: usize, w: usize, values: Vec<Bits>) -> Result<Self> {
        if n > TABLE_ARITY_CAP {
            return Err(Error::InvalidFunction(format!("truth table arity {n} over cap")));
        }
        if w == 0 || w > 64 {
            return Err(Error::InvalidFunction(format!("bad width {w}")));
        }
        if values.len() != 1usize << n {
            return Err(Error::InvalidFunction(format!(
                "truth table has {} rows, expected {}",
                values.len(),
                1usize << n
            )));
        }
        if values.iter().any(|&v| v & !mask(w) != 0) {
            return Err(Error::InvalidFunction("truth table value wider than w".into()));
        }
        Ok(Self { n, w, body: Body::TruthTable(values) })
    }

    pub fn from_fn(n: usize, w: usize, mut f: impl FnMut(Bits) -> Bits) -> Result<Self> {
        if n > TABLE_ARITY_CAP {
            return Err(Error::InvalidFunction(format!("truth table arity {n} over cap")));
        }
        let values = (0..1u64 << n).map(|x| f(x) & mask(w)).collect();
        Self::truth_table(n, w, values)
    }

    pub fn constant(n: usize, bit: bool) -> Result<Self> {
        Self::from_fn(n, 1, |_| bit as Bits)
    }

    pub fn parity(n: usize, s: Bits) -> Result<Self> {
        check_arity(n)?;
        if s & !mask(n) != 0 {
            return Err(Error::InvalidFunction("parity vector wider than n".into()));
        }
        Ok(Self { n, w: 1, body: Body::Parity(s) })
    }

    /// Upper-triangular quadratic form `x ↦ xᵀAx`.
    pub fn quadratic(n: usize, rows: Vec<Bits>) -> Result<Self> {
        check_arity(n)?;
        if rows.len() != n {
            return Err(Error::InvalidFunction("quadratic needs n rows".into()));
        }
        for (i, &r) in rows.iter().enumerate() {
            if r & !mask(n) != 0 || r & mask(i) != 0 {
                return Err(Error::InvalidFunction(format!("row {i} is not upper-triangular")));
            }
        }
        Ok(Self { n, w: 1, body: Body::Quadratic(rows) })
    }

    /// Folds an arbitrary matrix into the equivalent upper-triangular form.
    pub fn quadratic_from_any(n: usize, rows: &[Bits]) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::InvalidFunction("quadratic needs n rows".into()));
        }
        let mut up = vec![0; n];
        for i in 0..n {
            for j in 0..n {
                if (rows[i] >> j) & 1 == 1 {
                    let (a, b) = if i <= j { (i, j) } else { (j, i) };
                    up[a] ^= 1 << b;
                }
            }
        }
        Self::quadratic(n, up)
    }

    pub fn padded_xor(f: BooleanFunction, g: BooleanFunction) -> Result<Self> {
        if f.w != 1 || g.w != 1 {
            return Err(Error::InvalidFunction("padded xor needs width-1 parts".into()));
        }
        let n = f.n + g.n;
        check_arity(n)?;
        Ok(Self { n, w: 1, body: Body::PaddedXor(Box::new(f), Box::new(g)) })
    }

    pub fn tensor_power(f: BooleanFunction, m: usize) -> Result<Self> {
        if f.w != 1 || m == 0 {
            return Err(Error::InvalidFunction("tensor power needs width 1 and m ≥ 1".into()));
        }
        let n = f.n * m;
        check_arity(n)?;
        Ok(Self { n, w: 1, body: Body::TensorPower(Box::new(f), m) })
    }

    /// Simon function with explicit injective labelling of the cosets of `{0, s}`.
    pub fn simon(n: usize, period: Bits, labels: Vec<Bits>) -> Result<Self> {
        check_arity(n)?;
        if n > TABLE_ARITY_CAP {
            return Err(Error::InvalidFunction("simon arity over cap".into()));
        }
        if period & !mask(n) != 0 {
            return Err(Error::InvalidFunction("period wider than n".into()));
        }
        let want = if period == 0 { 1usize << n } else { 1usize << (n - 1) };
        if labels.len() != want {
            return Err(Error::InvalidFunction(format!("simon needs {want} labels, got {}", labels.len())));
        }
        let mut seen = labels.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidFunction("simon labels are not injective".into()));
        }
        if labels.iter().any(|&l| l & !mask(n) != 0) {
            return Err(Error::InvalidFunction("simon label wider than n".into()));
        }
        Ok(Self { n, w: n, body: Body::Simon { period, labels } })
    }

    /// Simon function with a uniformly random injective labelling.
    pub fn random_simon<R: Rng + ?Sized>(n: usize, period: Bits, rng: &mut R) -> Result<Self> {
        check_arity(n)?;
        if n > TABLE_ARITY_CAP {
            return Err(Error::InvalidFunction("simon arity over cap".into()));
        }
        let mut pool: Vec<Bits> = (0..1u64 << n).collect();
        pool.shuffle(rng);
        let want = if period == 0 { 1usize << n } else { 1usize << (n - 1) };
        pool.truncate(want);
        Self::simon(n, period, pool)
    }

    pub fn masked_phase(f: BooleanFunction) -> Result<Self> {
        if f.w != 1 {
            return Err(Error::InvalidFunction("masked phase needs width 1".into()));
        }
        check_arity(2 * f.n)?;
        Ok(Self { n: 2 * f.n, w: 1, body: Body::MaskedPhase(Box::new(f)) })
    }

    pub fn example_phase(f: BooleanFunction) -> Result<Self> {
        check_arity(f.n + f.w)?;
        Ok(Self { n: f.n + f.w, w: 1, body: Body::ExamplePhase(Box::new(f)) })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, w: usize, rng: &mut R) -> Result<Self> {
        Self::from_fn(n, w, |_| rng.random::<u64>())
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    /// Evaluates without an arity check; high bits beyond `n` are ignored.
    pub fn value(&self, x: Bits) -> Bits {
        let x = x & mask(self.n);
        match &self.body {
            Body::TruthTable(t) => t[x as usize],
            Body::Parity(s) => dot(*s, x) as Bits,
            Body::Quadratic(rows) => {
                let mut acc = false;
                let mut rest = x;
                while rest != 0 {
                    let i = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    acc ^= dot(rows[i], x);
                }
                acc as Bits
            }
            Body::PaddedXor(f, g) => f.value(x) ^ g.value(x >> f.n),
            Body::TensorPower(f, m) => {
                let mut acc = 0;
                for i in 0..*m {
                    acc ^= f.value(x >> (i * f.n));
                }
                acc
            }
            Body::Simon { period, labels } => labels[simon_index(x, *period, self.n)],
            Body::MaskedPhase(f) => {
                let h = f.n;
                (dot(x & mask(h), x >> h) as Bits) ^ f.value(x >> h)
            }
            Body::ExamplePhase(f) => dot(x >> f.n, f.value(x)) as Bits,
        }
    }

    /// Bit `j` of `value(x)` as a bool; the phase bit for width-1 functions.
    #[inline]
    pub fn bit(&self, x: Bits) -> bool {
        self.value(x) & 1 == 1
    }

    pub fn eval(&self, x: Bits) -> Result<Bits> {
        if x & !mask(self.n) != 0 {
            return Err(Error::ArityMismatch { expected: self.n, got: 64 - x.leading_zeros() as usize });
        }
        Ok(self.value(x))
    }

    pub fn eval_str(&self, x: &str) -> Result<String> {
        let v = self.eval(parse_bits_n(x, self.n)?)?;
        Ok(bits_to_string(v, self.w))
    }

    /// Base oracle calls needed to answer one membership query.
    pub fn base_query_cost(&self) -> u64 {
        match &self.body {
            Body::TensorPower(f, m) => f.base_query_cost() * *m as u64,
            Body::PaddedXor(f, g) => f.base_query_cost() + g.base_query_cost(),
            Body::MaskedPhase(f) | Body::ExamplePhase(f) => f.base_query_cost(),
            _ => 1,
        }
    }

    /// Full value table; only for small arity.
    pub fn table(&self) -> Result<Vec<Bits>> {
        if self.n > TABLE_ARITY_CAP {
            return Err(Error::TooManyQubits { n: self.n, cap: TABLE_ARITY_CAP });
        }
        Ok((0..1u64 << self.n).map(|x| self.value(x)).collect())
    }

    /// Upper-triangular rows for quadratic bodies.
    pub fn quadratic_rows(&self) -> Option<&[Bits]> {
        match &self.body {
            Body::Quadratic(r) => Some(r),
            _ => None,
        }
    }

    pub fn simon_period(&self) -> Option<Bits> {
        match &self.body {
            Body::Simon { period, .. } => Some(*period),
            _ => None,
        }
    }

    fn kind(&self) -> &'static str {
        match &self.body {
            Body::TruthTable(_) => "truth_table",
            Body::Parity(_) => "parity",
            Body::Quadratic(_) => "quadratic",
            Body::PaddedXor(..) => "padded_xor",
            Body::TensorPower(..) => "tensor_power",
            Body::Simon { .. } => "simon",
            Body::MaskedPhase(_) => "masked_phase",
            Body::ExamplePhase(_) => "example_phase",
        }
    }

    pub fn to_json(&self) -> Value {
        let payload = match &self.body {
            Body::TruthTable(t) => {
                let w = self.w;
                let bits = t.iter().flat_map(|&v| (0..w).map(move |j| (v >> j) & 1 == 1));
                Value::String(pack_hex(bits, t.len() * w))
            }
            Body::Parity(s) => Value::String(bits_to_string(*s, self.n)),
            Body::Quadratic(rows) => {
                let n = self.n;
                let bits = rows.iter().flat_map(|&r| (0..n).map(move |j| (r >> j) & 1 == 1));
                Value::String(pack_hex(bits, n * n))
            }
            Body::PaddedXor(f, g) => json!({ "f": f.to_json(), "g": g.to_json() }),
            Body::TensorPower(f, m) => json!({ "f": f.to_json(), "m": m }),
            Body::Simon { period, labels } => json!({
                "period": bits_to_string(*period, self.n),
                "labels": labels.iter().map(|&l| bits_to_string(l, self.n)).collect::<Vec<_>>(),
            }),
            Body::MaskedPhase(f) | Body::ExamplePhase(f) => json!({ "f": f.to_json() }),
        };
        json!({ "kind": self.kind(), "n": self.n, "w": self.w, "payload": payload })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("function must be an object".into()))?;
        let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| Error::Parse("missing kind".into()))?;
        let n = obj.get("n").and_then(Value::as_u64).ok_or_else(|| Error::Parse("missing n".into()))? as usize;
        let w = obj.get("w").and_then(Value::as_u64).ok_or_else(|| Error::Parse("missing w".into()))? as usize;
        let payload = obj.get("payload").ok_or_else(|| Error::Parse("missing payload".into()))?;
        check_arity(n)?;
        if w == 0 || w > 64 {
            return Err(Error::Parse(format!("bad width {w}")));
        }
        let str_payload = || payload.as_str().ok_or_else(|| Error::Parse("payload must be a string".into()));
        let sub = |key: &str| -> Result<BooleanFunction> {
            let inner = payload.get(key).ok_or_else(|| Error::Parse(format!("payload missing {key}")))?;
            Self::from_json(inner)
        };
        let f = match kind {
            "truth_table" => {
                if n > TABLE_ARITY_CAP || (1usize << n).saturating_mul(w) > 1 << 26 {
                    return Err(Error::Parse("truth table too large".into()));
                }
                let bits = unpack_hex(str_payload()?, (1usize << n) * w)?;
                let values = bits
                    .chunks(w)
                    .map(|c| c.iter().enumerate().fold(0, |acc, (j, &b)| acc | ((b as Bits) << j)))
                    .collect();
                Self::truth_table(n, w, values)?
            }
            "parity" => Self::parity(n, parse_bits_n(str_payload()?, n)?)?,
            "quadratic" => {
                let bits = unpack_hex(str_payload()?, n * n)?;
                let rows = bits
                    .chunks(n.max(1))
                    .take(n)
                    .map(|c| c.iter().enumerate().fold(0, |acc, (j, &b)| acc | ((b as Bits) << j)))
                    .collect();
                Self::quadratic(n, rows)?
            }
            "padded_xor" => Self::padded_xor(sub("f")?, sub("g")?)?,
            "tensor_power" => {
                let m = payload.get("m").and_then(Value::as_u64).ok_or_else(|| Error::Parse("missing m".into()))?;
                Self::tensor_power(sub("f")?, m as usize)?
            }
            "simon" => {
                if n > TABLE_ARITY_CAP {
                    return Err(Error::Parse("simon arity over cap".into()));
                }
                let period = payload
                    .get("period")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::Parse("missing period".into()))?;
                let labels = payload
                    .get("labels")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse("missing labels".into()))?;
                if labels.len() > 1 << n {
                    return Err(Error::Parse("too many labels".into()));
                }
                let labels = labels
                    .iter()
                    .map(|l| parse_bits_n(l.as_str().ok_or_else(|| Error::Parse("label must be a string".into()))?, n))
                    .collect::<Result<Vec<_>>>()?;
                Self::simon(n, parse_bits_n(period, n)?, labels)?
            }
            "masked_phase" => Self::masked_phase(sub("f")?)?,
            "example_phase" => Self::example_phase(sub("f")?)?,
            other => return Err(Error::Parse(format!("unknown kind {other:?}"))),
        };
        if f.n != n || f.w != w {
            return Err(Error::Parse(format!("declared shape ({n}, {w}) does not match body ({}, {})", f.n, f.w)));
        }
        Ok(f)
    }
}

fn check_arity(n: usize) -> Result<()> {
    if n > 64 {
        return Err(Error::InvalidFunction(format!("arity {n} exceeds 64")));
    }
    Ok(())
}

fn simon_index(x: Bits, period: Bits, _n: usize) -> usize {
    if period == 0 {
        return x as usize;
    }
    let rep = x.min(x ^ period);
    let h = 63 - period.leading_zeros() as usize;
    ((rep & mask(h)) | ((rep >> (h + 1)) << h)) as usize
}

impl TryFrom<Value> for BooleanFunction {
    type Error = Error;
    fn try_from(v: Value) -> Result<Self> {
        Self::from_json(&v)
    }
}

impl From<BooleanFunction> for Value {
    fn from(f: BooleanFunction) -> Value {
        f.to_json()
    }
}
