use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gf2core::{mask, Bits, BooleanFunction};

use super::MixedState;

pub const PURE_CAP: usize = 24;
const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    Cz,
    Cnot,
    Swap,
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::Cz | Gate::Cnot | Gate::Swap => 2,
            _ => 1,
        }
    }
}

/// Dense state vector; qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

fn check_cap(n: usize) -> Result<()> {
    if n > PURE_CAP {
        return Err(Error::TooManyQubits { n, cap: PURE_CAP });
    }
    Ok(())
}

impl PureState {
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, x: Bits) -> Result<Self> {
        check_cap(n)?;
        if x & !mask(n) != 0 {
            return Err(Error::ArityMismatch { expected: n, got: 64 - x.leading_zeros() as usize });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[x as usize] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        check_cap(n)?;
        let a = (0.5f64).powf(n as f64 / 2.0);
        Ok(Self { n, amps: vec![C64::new(a, 0.0); 1 << n] })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        check_cap(n)?;
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!("{} amplitudes for {n} qubits", amps.len())));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm}")));
        }
        Ok(Self { n, amps })
    }

    pub fn from_unnormalized(n: usize, mut amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 1e-300 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(n, amps)
    }

    /// Gaussian amplitudes, normalized: a unitarily invariant random state.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_cap(n)?;
        let amps = (0..1usize << n)
            .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        Self::from_unnormalized(n, amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amp(&self, x: Bits) -> C64 {
        self.amps[x as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("{} vs {} qubits", self.n, other.n)));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// |⟨self|target⟩|².
    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        Ok(self.inner(target)?.norm_sqr())
    }

    /// `self ⊗ other`, with `self` on the low qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let n = self.n + other.n;
        check_cap(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(Self { n, amps })
    }

    pub fn tensor_all(parts: &[PureState]) -> Result<PureState> {
        let mut it = parts.iter();
        let first = it.next().ok_or_else(|| Error::DimensionMismatch("empty product".into()))?.clone();
        it.try_fold(first, |acc, p| acc.tensor(p))
    }

    pub fn to_mixed(&self) -> Result<MixedState> {
        MixedState::from_pure(self)
    }

    pub fn approx_eq(&self, other: &PureState, tol: f64) -> bool {
        self.n == other.n && self.amps.iter().zip(&other.amps).all(|(a, b)| (a - b).norm() <= tol)
    }

    fn check_index(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::IndexOutOfRange { index: q, n: self.n });
        }
        Ok(())
    }

    fn check_distinct(&self, idx: &[usize]) -> Result<()> {
        for (k, &q) in idx.iter().enumerate() {
            self.check_index(q)?;
            if idx[..k].contains(&q) {
                return Err(Error::OverlappingIndices);
            }
        }
        Ok(())
    }

    fn single(&mut self, q: usize, m: [[C64; 2]; 2]) {
        let bit = 1usize << q;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for i in base..base + bit {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
            base += 2 * bit;
        }
    }

    pub fn h(&mut self, q: usize) {
        let bit = 1usize << q;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for i in base..base + bit {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (a + b) * s;
                self.amps[i | bit] = (a - b) * s;
            }
            base += 2 * bit;
        }
    }

    pub fn x(&mut self, q: usize) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                self.amps.swap(i, i | bit);
            }
        }
    }

    pub fn z(&mut self, q: usize) {
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a = -*a;
            }
        }
    }

    pub fn y(&mut self, q: usize) {
        let i = C64::i();
        let z = C64::new(0.0, 0.0);
        self.single(q, [[z, -i], [i, z]]);
    }

    pub fn s(&mut self, q: usize) {
        let bit = 1usize << q;
        for (k, a) in self.amps.iter_mut().enumerate() {
            if k & bit != 0 {
                *a *= C64::i();
            }
        }
    }

    pub fn sdg(&mut self, q: usize) {
        let bit = 1usize << q;
        for (k, a) in self.amps.iter_mut().enumerate() {
            if k & bit != 0 {
                *a *= -C64::i();
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        let m = (1usize << a) | (1usize << b);
        for (k, v) in self.amps.iter_mut().enumerate() {
            if k & m == m {
                *v = -*v;
            }
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        let (cb, tb) = (1usize << c, 1usize << t);
        for k in 0..self.amps.len() {
            if k & cb != 0 && k & tb == 0 {
                self.amps.swap(k, k | tb);
            }
        }
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (ab, bb) = (1usize << a, 1usize << b);
        for k in 0..self.amps.len() {
            if k & ab != 0 && k & bb == 0 {
                self.amps.swap(k, (k & !ab) | bb);
            }
        }
    }

    pub fn apply_gate(&mut self, gate: Gate, idx: &[usize]) -> Result<()> {
        if idx.len() != gate.arity() {
            return Err(Error::ArityMismatch { expected: gate.arity(), got: idx.len() });
        }
        self.check_distinct(idx)?;
        match gate {
            Gate::H => self.h(idx[0]),
            Gate::X => self.x(idx[0]),
            Gate::Y => self.y(idx[0]),
            Gate::Z => self.z(idx[0]),
            Gate::S => self.s(idx[0]),
            Gate::Sdg => self.sdg(idx[0]),
            Gate::Cz => self.cz(idx[0], idx[1]),
            Gate::Cnot => self.cnot(idx[0], idx[1]),
            Gate::Swap => self.swap(idx[0], idx[1]),
        }
        Ok(())
    }

    pub fn h_all(&mut self, qubits: &[usize]) {
        for &q in qubits {
            self.h(q);
        }
    }

    /// `Z^r` on the listed qubits: bit `k` of `r` targets `qubits[k]`.
    pub fn z_mask(&mut self, r: Bits, qubits: &[usize]) {
        for (k, &q) in qubits.iter().enumerate() {
            if (r >> k) & 1 == 1 {
                self.z(q);
            }
        }
    }

    pub fn x_mask(&mut self, r: Bits, qubits: &[usize]) {
        for (k, &q) in qubits.iter().enumerate() {
            if (r >> k) & 1 == 1 {
                self.x(q);
            }
        }
    }

    /// `(−1)^{f(x)}` where `x` is read from `targets` (bit `k` from `targets[k]`).
    pub fn apply_phase_oracle(&mut self, f: &BooleanFunction, targets: &[usize]) -> Result<()> {
        if f.width() != 1 {
            return Err(Error::InvalidFunction("phase oracle needs width 1".into()));
        }
        if targets.len() != f.arity() {
            return Err(Error::ArityMismatch { expected: f.arity(), got: targets.len() });
        }
        self.check_distinct(targets)?;
        let signs = sign_table(f, targets.len())?;
        let gather = Gather::new(targets);
        for (k, a) in self.amps.iter_mut().enumerate() {
            if signs[gather.apply(k)] {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// `|x, y⟩ ↦ |x, y ⊕ f(x)⟩`.
    pub fn apply_qmem_oracle(&mut self, f: &BooleanFunction, inputs: &[usize], outputs: &[usize]) -> Result<()> {
        if inputs.len() != f.arity() {
            return Err(Error::ArityMismatch { expected: f.arity(), got: inputs.len() });
        }
        if outputs.len() != f.width() {
            return Err(Error::ArityMismatch { expected: f.width(), got: outputs.len() });
        }
        let all: Vec<usize> = inputs.iter().chain(outputs).copied().collect();
        self.check_distinct(&all)?;
        let table = f.table()?;
        let gin = Gather::new(inputs);
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (k, a) in self.amps.iter().enumerate() {
            let fx = table[gin.apply(k)];
            let mut dst = k;
            for (j, &q) in outputs.iter().enumerate() {
                if (fx >> j) & 1 == 1 {
                    dst ^= 1 << q;
                }
            }
            out[dst] = *a;
        }
        self.amps = out;
        Ok(())
    }

    pub fn probability_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps.iter().enumerate().filter(|(k, _)| k & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    fn rotate_into_z(&mut self, q: usize, basis: Basis) {
        match basis {
            Basis::Z => {}
            Basis::X => self.h(q),
            Basis::Y => {
                self.sdg(q);
                self.h(q);
            }
        }
    }

    fn rotate_out_of_z(&mut self, q: usize, basis: Basis) {
        match basis {
            Basis::Z => {}
            Basis::X => self.h(q),
            Basis::Y => {
                self.h(q);
                self.s(q);
            }
        }
    }

    fn collapse_z(&mut self, q: usize, outcome: bool, p: f64) -> Result<()> {
        if p < 1e-14 {
            return Err(Error::ZeroProbabilityBranch);
        }
        let bit = 1usize << q;
        let scale = 1.0 / p.sqrt();
        for (k, a) in self.amps.iter_mut().enumerate() {
            if ((k & bit) != 0) == outcome {
                *a *= scale;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        Ok(())
    }

    /// Sequential single-qubit measurements; outcome bit `k` belongs to `qubits[k]`.
    /// For X and Y, outcome 0 is the +1 eigenvalue.
    pub fn measure(&mut self, qubits: &[usize], basis: Basis, rng: &mut (impl Rng + ?Sized)) -> Result<Bits> {
        self.check_distinct(qubits)?;
        let mut out = 0;
        for (k, &q) in qubits.iter().enumerate() {
            self.rotate_into_z(q, basis);
            let p1 = self.probability_one(q);
            let one = rng.random::<f64>() < p1;
            self.collapse_z(q, one, if one { p1 } else { 1.0 - p1 })?;
            self.rotate_out_of_z(q, basis);
            if one {
                out |= 1 << k;
            }
        }
        Ok(out)
    }

    /// Forces the given outcome; fails on a zero-probability branch. Returns its probability.
    pub fn postselect(&mut self, q: usize, basis: Basis, outcome: bool) -> Result<f64> {
        self.check_index(q)?;
        self.rotate_into_z(q, basis);
        let p1 = self.probability_one(q);
        let p = if outcome { p1 } else { 1.0 - p1 };
        let res = self.collapse_z(q, outcome, p);
        self.rotate_out_of_z(q, basis);
        res.map(|_| p)
    }

    /// Removes qubits known to sit in the Z-basis state `values`.
    pub fn extract(&self, qubits: &[usize], values: Bits) -> Result<PureState> {
        self.check_distinct(qubits)?;
        let rest: Vec<usize> = (0..self.n).filter(|q| !qubits.contains(q)).collect();
        let fixed = qubits.iter().enumerate().fold(0usize, |acc, (k, &q)| acc | ((((values >> k) & 1) as usize) << q));
        let scatter = Scatter::new(&rest);
        let amps: Vec<C64> = (0..1usize << rest.len()).map(|j| self.amps[scatter.apply(j) | fixed]).collect();
        PureState::from_unnormalized(rest.len(), amps)
    }

    /// Measures the qubits and removes them from the state.
    pub fn measure_and_discard(
        &self,
        qubits: &[usize],
        basis: Basis,
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<(Bits, PureState)> {
        let mut s = self.clone();
        let out = s.measure(qubits, basis, rng)?;
        for &q in qubits {
            s.rotate_into_z(q, basis);
        }
        Ok((out, s.extract(qubits, out)?))
    }

    /// Inserts `psi` so that its qubit `k` lands at position `positions[k]` of the result.
    pub fn insert(&self, positions: &[usize], psi: &PureState) -> Result<PureState> {
        if positions.len() != psi.n {
            return Err(Error::ArityMismatch { expected: psi.n, got: positions.len() });
        }
        let n = self.n + psi.n;
        check_cap(n)?;
        for (k, &p) in positions.iter().enumerate() {
            if p >= n {
                return Err(Error::IndexOutOfRange { index: p, n });
            }
            if positions[..k].contains(&p) {
                return Err(Error::OverlappingIndices);
            }
        }
        let rest: Vec<usize> = (0..n).filter(|q| !positions.contains(q)).collect();
        let gr = Gather::new(&rest);
        let gp = Gather::new(positions);
        let amps = (0..1usize << n).map(|k| self.amps[gr.apply(k)] * psi.amps[gp.apply(k)]).collect();
        Ok(PureState { n, amps })
    }

    /// Reorders qubits: new qubit `k` is old qubit `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<PureState> {
        if order.len() != self.n {
            return Err(Error::ArityMismatch { expected: self.n, got: order.len() });
        }
        self.check_distinct(order)?;
        let g = Scatter::new(order);
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (j, a) in amps.iter_mut().enumerate() {
            *a = self.amps[g.apply(j)];
        }
        Ok(PureState { n: self.n, amps })
    }

    /// Born probabilities over the full computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<MixedState> {
        super::mixed::partial_trace_pure(self, keep)
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }
}

fn sign_table(f: &BooleanFunction, k: usize) -> Result<Vec<bool>> {
    if k > PURE_CAP {
        return Err(Error::TooManyQubits { n: k, cap: PURE_CAP });
    }
    Ok((0..1u64 << k).map(|x| f.bit(x)).collect())
}

/// Packs bits at the listed positions of an index into a compact integer.
pub(crate) struct Gather {
    positions: Vec<usize>,
    contiguous: Option<(usize, usize)>,
}

impl Gather {
    pub(crate) fn new(positions: &[usize]) -> Self {
        let contiguous = match positions.first() {
            Some(&s) if positions.iter().enumerate().all(|(k, &p)| p == s + k) => Some((s, positions.len())),
            None => Some((0, 0)),
            _ => None,
        };
        Self { positions: positions.to_vec(), contiguous }
    }

    #[inline]
    pub(crate) fn apply(&self, k: usize) -> usize {
        match self.contiguous {
            Some((s, len)) => (k >> s) & ((1usize << len) - 1),
            None => self.positions.iter().enumerate().fold(0, |acc, (j, &p)| acc | (((k >> p) & 1) << j)),
        }
    }
}

/// Inverse of [`Gather`]: spreads compact bits to the listed positions.
pub(crate) struct Scatter {
    positions: Vec<usize>,
}

impl Scatter {
    pub(crate) fn new(positions: &[usize]) -> Self {
        Self { positions: positions.to_vec() }
    }

    #[inline]
    pub(crate) fn apply(&self, j: usize) -> usize {
        self.positions.iter().enumerate().fold(0, |acc, (k, &p)| acc | (((j >> k) & 1) << p))
    }
}

/// `2^{-n/2} Σ_x (−1)^{f(x)} |x⟩`.
pub fn prepare_phase_state(f: &BooleanFunction) -> Result<PureState> {
    let n = f.arity();
    check_cap(n)?;
    if f.width() != 1 {
        return Err(Error::InvalidFunction("phase state needs width 1".into()));
    }
    let a = (0.5f64).powf(n as f64 / 2.0);
    let amps = (0..1u64 << n).map(|x| C64::new(if f.bit(x) { -a } else { a }, 0.0)).collect();
    Ok(PureState { n, amps })
}

/// `2^{-n/2} Σ_x |x, f(x)⟩` with `x` on qubits `0..n` and the label above.
pub fn prepare_example_state(f: &BooleanFunction) -> Result<PureState> {
    let (n, w) = (f.arity(), f.width());
    check_cap(n + w)?;
    let a = (0.5f64).powf(n as f64 / 2.0);
    let mut amps = vec![C64::new(0.0, 0.0); 1 << (n + w)];
    for x in 0..1u64 << n {
        amps[(x | (f.value(x) << n)) as usize] = C64::new(a, 0.0);
    }
    Ok(PureState { n: n + w, amps })
}

pub fn apply_phase_oracle(mut state: PureState, f: &BooleanFunction, targets: &[usize]) -> Result<PureState> {
    state.apply_phase_oracle(f, targets)?;
    Ok(state)
}

pub fn apply_qmem_oracle(
    mut state: PureState,
    f: &BooleanFunction,
    inputs: &[usize],
    outputs: &[usize],
) -> Result<PureState> {
    state.apply_qmem_oracle(f, inputs, outputs)?;
    Ok(state)
}

pub fn apply_gate(mut state: PureState, gate: Gate, idx: &[usize]) -> Result<PureState> {
    state.apply_gate(gate, idx)?;
    Ok(state)
}

pub fn measure_qubits(
    mut state: PureState,
    idx: &[usize],
    basis: Basis,
    rng: &mut (impl Rng + ?Sized),
) -> Result<(Bits, PureState)> {
    let out = state.measure(idx, basis, rng)?;
    Ok((out, state))
}
