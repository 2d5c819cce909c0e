use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::state::{Gather, Scatter};
use super::{Basis, Gate, PureState};
use crate::error::{Error, Result};
use crate::gf2core::{Bits, BooleanFunction};

pub const MIXED_CAP: usize = 12;
const HERM_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_FLOOR: f64 = -1e-8;

/// Dense density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    n: usize,
    rho: DMatrix<C64>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn check_cap(n: usize) -> Result<()> {
    if n > MIXED_CAP {
        return Err(Error::TooManyQubits { n, cap: MIXED_CAP });
    }
    Ok(())
}

impl MixedState {
    pub fn from_matrix(n: usize, rho: DMatrix<C64>) -> Result<Self> {
        let s = Self::from_matrix_unchecked(n, rho)?;
        s.validate()?;
        Ok(s)
    }

    fn from_matrix_unchecked(n: usize, rho: DMatrix<C64>) -> Result<Self> {
        check_cap(n)?;
        if rho.nrows() != 1 << n || rho.ncols() != 1 << n {
            return Err(Error::DimensionMismatch(format!("{}x{} matrix for {n} qubits", rho.nrows(), rho.ncols())));
        }
        Ok(Self { n, rho })
    }

    pub fn from_pure(psi: &PureState) -> Result<Self> {
        let n = psi.num_qubits();
        check_cap(n)?;
        let a = psi.amplitudes();
        let d = a.len();
        Ok(Self { n, rho: DMatrix::from_fn(d, d, |i, j| a[i] * a[j].conj()) })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_cap(n)?;
        let d = 1usize << n;
        Ok(Self { n, rho: DMatrix::from_diagonal_element(d, d, C64::new(1.0 / d as f64, 0.0)) })
    }

    pub fn diagonal(n: usize, probs: &[f64]) -> Result<Self> {
        check_cap(n)?;
        if probs.len() != 1 << n {
            return Err(Error::DimensionMismatch("diagonal length".into()));
        }
        let d = probs.len();
        Self::from_matrix(n, DMatrix::from_fn(d, d, |i, j| if i == j { C64::new(probs[i], 0.0) } else { zero() }))
    }

    /// Convex combination; weights must sum to one.
    pub fn mixture(parts: &[(f64, MixedState)]) -> Result<Self> {
        let n = parts.first().ok_or_else(|| Error::DimensionMismatch("empty mixture".into()))?.1.n;
        let d = 1usize << n;
        let mut rho = DMatrix::from_element(d, d, zero());
        for (p, s) in parts {
            if s.n != n {
                return Err(Error::DimensionMismatch("mixture parts differ in size".into()));
            }
            rho += &s.rho * C64::new(*p, 0.0);
        }
        Self::from_matrix(n, rho)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.rho.nrows();
        for i in 0..d {
            for j in i..d {
                if (self.rho[(i, j)] - self.rho[(j, i)].conj()).norm() > HERM_TOL {
                    return Err(Error::InvalidState(format!("not Hermitian at ({i},{j})")));
                }
            }
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < PSD_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).diagonal().iter().map(|c| c.re).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.rho)
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        self.eigenvalues().into_iter().filter(|&l| l > 1e-14).map(|l| -l * l.log2()).sum()
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn fidelity_pure(&self, target: &PureState) -> Result<f64> {
        if target.num_qubits() != self.n {
            return Err(Error::DimensionMismatch("fidelity target size".into()));
        }
        let a = target.amplitudes();
        let d = a.len();
        let mut acc = zero();
        for i in 0..d {
            if a[i].norm_sqr() == 0.0 {
                continue;
            }
            let mut row = zero();
            for j in 0..d {
                row += self.rho[(i, j)] * a[j];
            }
            acc += a[i].conj() * row;
        }
        Ok(acc.re)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|c| c.re.max(0.0)).collect()
    }

    pub fn tensor(&self, other: &MixedState) -> Result<MixedState> {
        let n = self.n + other.n;
        check_cap(n)?;
        let da = self.rho.nrows();
        let d = 1usize << n;
        let rho = DMatrix::from_fn(d, d, |i, j| {
            self.rho[(i % da, j % da)] * other.rho[(i / da, j / da)]
        });
        Ok(Self { n, rho })
    }

    /// Keeps `keep` (in that order) and traces out the rest.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<MixedState> {
        check_distinct(keep, self.n)?;
        let rest: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let (sk, sr) = (Scatter::new(keep), Scatter::new(&rest));
        let kidx: Vec<usize> = (0..1usize << keep.len()).map(|a| sk.apply(a)).collect();
        let ridx: Vec<usize> = (0..1usize << rest.len()).map(|t| sr.apply(t)).collect();
        let dk = kidx.len();
        let rho = DMatrix::from_fn(dk, dk, |a, b| {
            ridx.iter().fold(zero(), |acc, &t| acc + self.rho[(kidx[a] | t, kidx[b] | t)])
        });
        Ok(Self { n: keep.len(), rho })
    }

    fn left_right(&mut self, q: usize, m: [[C64; 2]; 2]) {
        let bit = 1usize << q;
        let d = self.rho.nrows();
        for j in 0..d {
            for i in 0..d {
                if i & bit == 0 {
                    let (a, b) = (self.rho[(i, j)], self.rho[(i | bit, j)]);
                    self.rho[(i, j)] = m[0][0] * a + m[0][1] * b;
                    self.rho[(i | bit, j)] = m[1][0] * a + m[1][1] * b;
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                if j & bit == 0 {
                    let (a, b) = (self.rho[(i, j)], self.rho[(i, j | bit)]);
                    self.rho[(i, j)] = a * m[0][0].conj() + b * m[0][1].conj();
                    self.rho[(i, j | bit)] = a * m[1][0].conj() + b * m[1][1].conj();
                }
            }
        }
    }

    fn permute_basis(&mut self, p: impl Fn(usize) -> usize) {
        let d = self.rho.nrows();
        let old = self.rho.clone();
        for i in 0..d {
            for j in 0..d {
                self.rho[(p(i), p(j))] = old[(i, j)];
            }
        }
    }

    fn diag_signs(&mut self, s: impl Fn(usize) -> bool) {
        let d = self.rho.nrows();
        for i in 0..d {
            for j in 0..d {
                if s(i) != s(j) {
                    self.rho[(i, j)] = -self.rho[(i, j)];
                }
            }
        }
    }

    /// `ρ ↦ UρU†`.
    pub fn apply_gate(&mut self, gate: Gate, idx: &[usize]) -> Result<()> {
        if idx.len() != gate.arity() {
            return Err(Error::ArityMismatch { expected: gate.arity(), got: idx.len() });
        }
        check_distinct(idx, self.n)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (o, z, i) = (C64::new(1.0, 0.0), zero(), C64::i());
        match gate {
            Gate::H => self.left_right(idx[0], [[o * s, o * s], [o * s, -o * s]]),
            Gate::X => self.left_right(idx[0], [[z, o], [o, z]]),
            Gate::Y => self.left_right(idx[0], [[z, -i], [i, z]]),
            Gate::Z => self.left_right(idx[0], [[o, z], [z, -o]]),
            Gate::S => self.left_right(idx[0], [[o, z], [z, i]]),
            Gate::Sdg => self.left_right(idx[0], [[o, z], [z, -i]]),
            Gate::Cz => {
                let m = (1usize << idx[0]) | (1usize << idx[1]);
                self.diag_signs(|k| k & m == m)
            }
            Gate::Cnot => {
                let (c, t) = (1usize << idx[0], 1usize << idx[1]);
                self.permute_basis(|k| if k & c != 0 { k ^ t } else { k })
            }
            Gate::Swap => {
                let (a, b) = (idx[0], idx[1]);
                self.permute_basis(|k| {
                    let (ba, bb) = ((k >> a) & 1, (k >> b) & 1);
                    (k & !(1 << a) & !(1 << b)) | (ba << b) | (bb << a)
                })
            }
        }
        Ok(())
    }

    pub fn apply_phase_oracle(&mut self, f: &BooleanFunction, targets: &[usize]) -> Result<()> {
        if targets.len() != f.arity() || f.width() != 1 {
            return Err(Error::ArityMismatch { expected: f.arity(), got: targets.len() });
        }
        check_distinct(targets, self.n)?;
        let g = Gather::new(targets);
        let signs: Vec<bool> = (0..self.rho.nrows()).map(|k| f.bit(g.apply(k) as Bits)).collect();
        self.diag_signs(|k| signs[k]);
        Ok(())
    }

    pub fn z_mask(&mut self, r: Bits, qubits: &[usize]) -> Result<()> {
        for (k, &q) in qubits.iter().enumerate() {
            if (r >> k) & 1 == 1 {
                self.apply_gate(Gate::Z, &[q])?;
            }
        }
        Ok(())
    }

    /// Non-selective measurement of one qubit in `basis`.
    pub fn dephase(&mut self, q: usize, basis: Basis) -> Result<()> {
        check_distinct(&[q], self.n)?;
        let pre: &[Gate] = match basis {
            Basis::Z => &[],
            Basis::X => &[Gate::H],
            Basis::Y => &[Gate::Sdg, Gate::H],
        };
        for &g in pre {
            self.apply_gate(g, &[q])?;
        }
        let bit = 1usize << q;
        let d = self.rho.nrows();
        for i in 0..d {
            for j in 0..d {
                if (i ^ j) & bit != 0 {
                    self.rho[(i, j)] = zero();
                }
            }
        }
        for &g in pre.iter().rev() {
            let inv = match g {
                Gate::Sdg => Gate::S,
                other => other,
            };
            self.apply_gate(inv, &[q])?;
        }
        Ok(())
    }

    /// Uniformly random Pauli on each listed qubit with probability `p`.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64) -> Result<()> {
        check_distinct(qubits, self.n)?;
        let mut tw = self.clone();
        for &q in qubits {
            let bit = 1usize << q;
            let d = tw.rho.nrows();
            let old = tw.rho.clone();
            for i in 0..d {
                for j in 0..d {
                    tw.rho[(i, j)] = if (i ^ j) & bit != 0 {
                        zero()
                    } else {
                        (old[(i & !bit, j & !bit)] + old[(i | bit, j | bit)]) * 0.5
                    };
                }
            }
        }
        self.rho = &self.rho * C64::new(1.0 - p, 0.0) + tw.rho * C64::new(p, 0.0);
        Ok(())
    }

    /// Traces out `qubits` and puts `psi` in their place.
    pub fn replace(&mut self, qubits: &[usize], psi: &PureState) -> Result<()> {
        if psi.num_qubits() != qubits.len() {
            return Err(Error::ArityMismatch { expected: qubits.len(), got: psi.num_qubits() });
        }
        let rest: Vec<usize> = (0..self.n).filter(|q| !qubits.contains(q)).collect();
        let reduced = self.partial_trace(&rest)?;
        let (gr, gq) = (Gather::new(&rest), Gather::new(qubits));
        let a = psi.amplitudes();
        let d = self.rho.nrows();
        self.rho = DMatrix::from_fn(d, d, |i, j| {
            reduced.rho[(gr.apply(i), gr.apply(j))] * a[gq.apply(i)] * a[gq.apply(j)].conj()
        });
        Ok(())
    }

    pub(crate) fn scaled(&self, c: f64) -> DMatrix<C64> {
        &self.rho * C64::new(c, 0.0)
    }
}

fn check_distinct(idx: &[usize], n: usize) -> Result<()> {
    for (k, &q) in idx.iter().enumerate() {
        if q >= n {
            return Err(Error::IndexOutOfRange { index: q, n });
        }
        if idx[..k].contains(&q) {
            return Err(Error::OverlappingIndices);
        }
    }
    Ok(())
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    nalgebra::SymmetricEigen::new(sym).eigenvalues.iter().copied().collect()
}

pub(super) fn partial_trace_pure(psi: &PureState, keep: &[usize]) -> Result<MixedState> {
    let n = psi.num_qubits();
    check_distinct(keep, n)?;
    check_cap(keep.len())?;
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let (sk, sr) = (Scatter::new(keep), Scatter::new(&rest));
    let a = psi.amplitudes();
    let (dk, dr) = (1usize << keep.len(), 1usize << rest.len());
    let m = DMatrix::from_fn(dk, dr, |i, t| a[sk.apply(i) | sr.apply(t)]);
    let rho = &m * m.adjoint();
    Ok(MixedState { n: keep.len(), rho })
}

/// ½‖a − b‖₁.
pub fn trace_distance(a: &MixedState, b: &MixedState) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch("trace distance sizes".into()));
    }
    Ok(0.5 * hermitian_eigenvalues(&(&a.rho - &b.rho)).iter().map(|l| l.abs()).sum::<f64>())
}

/// Optimal probability of naming which of `a` (prior `p`) or `b` was prepared.
pub fn helstrom_guess_probability(p: f64, a: &MixedState, b: &MixedState) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch("helstrom sizes".into()));
    }
    let diff = a.scaled(p) - b.scaled(1.0 - p);
    Ok(0.5 + 0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
}

pub fn partial_trace(psi: &PureState, keep: &[usize]) -> Result<MixedState> {
    partial_trace_pure(psi, keep)
}

/// Number of Schmidt coefficients above `tol` across the cut `part | rest`.
pub fn schmidt_rank(psi: &PureState, part: &[usize], tol: f64) -> Result<usize> {
    let n = psi.num_qubits();
    check_distinct(part, n)?;
    let rest: Vec<usize> = (0..n).filter(|q| !part.contains(q)).collect();
    let (sp, sr) = (Scatter::new(part), Scatter::new(&rest));
    let a = psi.amplitudes();
    let m = DMatrix::from_fn(1usize << part.len(), 1usize << rest.len(), |i, t| a[sp.apply(i) | sr.apply(t)]);
    let sv = m.singular_values();
    Ok(sv.iter().filter(|&&s| s > tol).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn omega(n: usize) -> PureState {
        let mut s = PureState::zero(2 * n).unwrap();
        for i in 0..n {
            s.h(i);
            s.cnot(i, n + i);
        }
        s
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let d = DMatrix::from_fn(2, 2, |i, j| if i == j { C64::new(0.6, 0.0) } else { zero() });
        assert!(MixedState::from_matrix(1, d).is_err());
        let neg = DMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(1.5, 0.0),
            (1, 1) => C64::new(-0.5, 0.0),
            _ => zero(),
        });
        assert!(MixedState::from_matrix(1, neg).is_err());
        let nonherm = DMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => C64::new(0.5, 0.0),
            (0, 1) => C64::new(0.1, 0.0),
            _ => zero(),
        });
        assert!(MixedState::from_matrix(1, nonherm).is_err());
        assert!(MixedState::maximally_mixed(13).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = rng_from_seed(1);
        let a = PureState::random(2, &mut rng).unwrap();
        let b = PureState::random(1, &mut rng).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ra = partial_trace(&ab, &[0, 1]).unwrap();
        assert!(trace_distance(&ra, &a.to_mixed().unwrap()).unwrap() < 1e-12);
        let mixed_route = ab.to_mixed().unwrap().partial_trace(&[2]).unwrap();
        assert!(trace_distance(&mixed_route, &b.to_mixed().unwrap()).unwrap() < 1e-12);
        let o = omega(3);
        let q = partial_trace(&o, &[3, 4, 5]).unwrap();
        assert!(trace_distance(&q, &MixedState::maximally_mixed(3).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn schmidt_examples() {
        let mut rng = rng_from_seed(2);
        let a = PureState::random(2, &mut rng).unwrap();
        let b = PureState::random(2, &mut rng).unwrap();
        assert_eq!(schmidt_rank(&a.tensor(&b).unwrap(), &[0, 1], 1e-9).unwrap(), 1);
        assert_eq!(schmidt_rank(&omega(3), &[0, 1, 2], 1e-9).unwrap(), 8);
        // Measuring one half-qubit of |Ω⟩ cuts the rank in half.
        let mut o = omega(3);
        o.postselect(3, Basis::X, false).unwrap();
        assert_eq!(schmidt_rank(&o, &[0, 1, 2], 1e-9).unwrap(), 4);
    }

    #[test]
    fn trace_distance_and_helstrom_examples() {
        let z0 = PureState::basis(1, 0).unwrap().to_mixed().unwrap();
        let z1 = PureState::basis(1, 1).unwrap().to_mixed().unwrap();
        assert!(trace_distance(&z0, &z0).unwrap() < 1e-15);
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-12);
        assert!((helstrom_guess_probability(0.3, &z0, &z0).unwrap() - 0.7).abs() < 1e-12);
        assert!((helstrom_guess_probability(0.5, &z0, &z1).unwrap() - 1.0).abs() < 1e-12);
        let mm = MixedState::maximally_mixed(2).unwrap();
        assert!((helstrom_guess_probability(0.5, &mm, &mm).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fuchs_van_de_graaf_on_random_pairs() {
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let a = PureState::random(2, &mut rng).unwrap();
            let b = PureState::random(2, &mut rng).unwrap();
            let mut ma = a.to_mixed().unwrap();
            ma.depolarize(&[0], 0.3).unwrap();
            let f = ma.fidelity_pure(&b).unwrap();
            let td = trace_distance(&ma, &b.to_mixed().unwrap()).unwrap();
            assert!(td <= (1.0 - f).sqrt() + 1e-10);
        }
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = rng_from_seed(4);
        let a = PureState::random(3, &mut rng).unwrap();
        assert!((a.to_mixed().unwrap().fidelity_pure(&a).unwrap() - 1.0).abs() < 1e-12);
        let z0 = PureState::basis(2, 0).unwrap();
        let z1 = PureState::basis(2, 1).unwrap();
        assert_eq!(z0.fidelity(&z1).unwrap(), 0.0);
        let f = BooleanFunction::random(3, 1, &mut rng).unwrap();
        let phase = super::super::prepare_phase_state(&f).unwrap();
        for r in 0..8u64 {
            let mut masked = PureState::uniform(3).unwrap();
            masked.z_mask(r, &[0, 1, 2]);
            let direct: f64 = (0..8u64)
                .map(|x| if crate::gf2core::dot(r, x) ^ f.bit(x) { -1.0 } else { 1.0 })
                .sum::<f64>()
                / 8.0;
            assert!((masked.fidelity(&phase).unwrap() - direct * direct).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_gates_match_pure_gates() {
        let mut rng = rng_from_seed(5);
        let psi = PureState::random(3, &mut rng).unwrap();
        let f = BooleanFunction::random(2, 1, &mut rng).unwrap();
        let mut p = psi.clone();
        let mut m = psi.to_mixed().unwrap();
        let ops: [(Gate, &[usize]); 9] = [
            (Gate::H, &[0]),
            (Gate::Y, &[1]),
            (Gate::S, &[2]),
            (Gate::Cnot, &[2, 0]),
            (Gate::Sdg, &[0]),
            (Gate::Cz, &[1, 2]),
            (Gate::Swap, &[0, 2]),
            (Gate::X, &[1]),
            (Gate::Z, &[0]),
        ];
        for (g, idx) in ops {
            p.apply_gate(g, idx).unwrap();
            m.apply_gate(g, idx).unwrap();
        }
        p.apply_phase_oracle(&f, &[2, 0]).unwrap();
        m.apply_phase_oracle(&f, &[2, 0]).unwrap();
        assert!(trace_distance(&m, &p.to_mixed().unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn channels() {
        let mut rng = rng_from_seed(6);
        let psi = PureState::random(2, &mut rng).unwrap();
        let mut full = psi.to_mixed().unwrap();
        full.depolarize(&[0, 1], 1.0).unwrap();
        assert!(trace_distance(&full, &MixedState::maximally_mixed(2).unwrap()).unwrap() < 1e-12);
        let mut d = psi.to_mixed().unwrap();
        d.dephase(1, Basis::X).unwrap();
        d.validate().unwrap();
        let mut r = psi.to_mixed().unwrap();
        let zero_state = PureState::zero(1).unwrap();
        r.replace(&[1], &zero_state).unwrap();
        let expect = psi.reduced(&[0]).unwrap().tensor(&zero_state.to_mixed().unwrap()).unwrap();
        assert!(trace_distance(&r, &expect).unwrap() < 1e-12);
        // Dephasing twice is idempotent.
        let mut d2 = d.clone();
        d2.dephase(1, Basis::X).unwrap();
        assert!(trace_distance(&d, &d2).unwrap() < 1e-12);
    }

    proptest! {
        #[test]
        fn partial_trace_composes(seed in any::<u64>(), a in 0usize..4, b in 0usize..4) {
            prop_assume!(a != b);
            let psi = PureState::random(4, &mut rng_from_seed(seed)).unwrap();
            let keep_after_a: Vec<usize> = (0..4).filter(|&q| q != a).collect();
            let step1 = partial_trace(&psi, &keep_after_a).unwrap();
            let pos_b = keep_after_a.iter().position(|&q| q == b).unwrap();
            let keep2: Vec<usize> = (0..3).filter(|&q| q != pos_b).collect();
            let step2 = step1.partial_trace(&keep2).unwrap();
            let both: Vec<usize> = (0..4).filter(|&q| q != a && q != b).collect();
            let direct = partial_trace(&psi, &both).unwrap();
            prop_assert!(trace_distance(&step2, &direct).unwrap() < 1e-10);
        }

        #[test]
        fn schmidt_rank_invariant_under_local_unitaries(seed in any::<u64>(), gates in proptest::collection::vec((0usize..6, 0usize..3), 0..10)) {
            let mut rng = rng_from_seed(seed);
            // Rank-2 state across {0,1,2} | {3,4,5}.
            let a = PureState::random(3, &mut rng).unwrap();
            let b = PureState::random(3, &mut rng).unwrap();
            let c = PureState::random(3, &mut rng).unwrap();
            let d = PureState::random(3, &mut rng).unwrap();
            let amps: Vec<C64> = a.tensor(&b).unwrap().amplitudes().iter()
                .zip(c.tensor(&d).unwrap().amplitudes())
                .map(|(x, y)| x + y)
                .collect();
            let mut psi = PureState::from_unnormalized(6, amps).unwrap();
            let before = schmidt_rank(&psi, &[0, 1, 2], 1e-9).unwrap();
            let gs = [Gate::H, Gate::S, Gate::X, Gate::Y, Gate::Z, Gate::Sdg];
            for (g, q) in gates {
                psi.apply_gate(gs[g], &[q]).unwrap();
                psi.apply_gate(gs[(g + 1) % 6], &[q + 3]).unwrap();
            }
            psi.cnot(0, 1);
            psi.cnot(5, 3);
            prop_assert_eq!(schmidt_rank(&psi, &[0, 1, 2], 1e-9).unwrap(), before);
        }
    }
}
