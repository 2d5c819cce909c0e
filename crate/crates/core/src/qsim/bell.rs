//! Two-copy Bell sampling on example states of width-1 functions.
//!
//! Layout on `2n + 2` qubits: copy 1 holds `x` on `0..n` and its label on `n`;
//! copy 2 holds `x` on `n+1..2n+1` and its label on `2n+1`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sample_discrete, Basis, Povm, PureState};
use crate::error::{Error, Result};
use crate::gf2core::{mask, Bits};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BellOutcome {
    pub y: Bits,
    pub z: Bits,
    /// Bit 0 is the label outcome of copy 1, bit 1 that of copy 2.
    pub b: u8,
}

impl BellOutcome {
    pub fn both_labels_one(&self) -> bool {
        self.b == 0b11
    }
}

fn copy_size(a: &PureState, b: &PureState) -> Result<usize> {
    if a.num_qubits() != b.num_qubits() || a.num_qubits() < 1 {
        return Err(Error::DimensionMismatch("bell sampling needs two equal copies".into()));
    }
    Ok(a.num_qubits() - 1)
}

pub fn bell_outcome_of_index(idx: usize, n: usize) -> BellOutcome {
    let idx = idx as Bits;
    let z = idx & mask(n);
    let l1 = (idx >> n) & 1;
    let y = (idx >> (n + 1)) & mask(n);
    let l2 = (idx >> (2 * n + 1)) & 1;
    BellOutcome { y, z, b: (l1 | (l2 << 1)) as u8 }
}

/// Applies the measurement circuit's unitary part; the labels-equal-11 branch
/// gets the transversal CNOTs followed by Hadamards on copy 1.
pub fn apply_bell_circuit(state: &mut PureState, n: usize) -> Result<()> {
    if state.num_qubits() != 2 * n + 2 {
        return Err(Error::DimensionMismatch("bell circuit size".into()));
    }
    state.h(n);
    state.h(2 * n + 1);
    let mut branch = state.clone();
    for i in 0..n {
        branch.cnot(i, n + 1 + i);
    }
    for i in 0..n {
        branch.h(i);
    }
    let both = (1usize << n) | (1usize << (2 * n + 1));
    let src = branch.amplitudes().to_vec();
    for (k, a) in state.amps_mut().iter_mut().enumerate() {
        if k & both == both {
            *a = src[k];
        }
    }
    Ok(())
}

/// Runs the measurement circuit literally: label measurements first, then the
/// conditional gates, then the data registers.
pub fn bell_sample(a: &PureState, b: &PureState, rng: &mut (impl Rng + ?Sized)) -> Result<BellOutcome> {
    let n = copy_size(a, b)?;
    let mut s = a.tensor(b)?;
    s.h(n);
    s.h(2 * n + 1);
    let labels = s.measure(&[n, 2 * n + 1], Basis::Z, rng)?;
    if labels == 0b11 {
        for i in 0..n {
            s.cnot(i, n + 1 + i);
        }
        for i in 0..n {
            s.h(i);
        }
    }
    let z = s.measure(&(0..n).collect::<Vec<_>>(), Basis::Z, rng)?;
    let y = s.measure(&(n + 1..2 * n + 1).collect::<Vec<_>>(), Basis::Z, rng)?;
    Ok(BellOutcome { y, z, b: labels as u8 })
}

/// Exact outcome distribution (nonzero entries, index order).
pub fn bell_distribution(a: &PureState, b: &PureState) -> Result<Vec<(BellOutcome, f64)>> {
    let n = copy_size(a, b)?;
    let mut s = a.tensor(b)?;
    apply_bell_circuit(&mut s, n)?;
    Ok(s.probabilities()
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p > 1e-15)
        .map(|(k, p)| (bell_outcome_of_index(k, n), p))
        .collect())
}

/// Samples from the exact distribution; same law as [`bell_sample`].
pub fn bell_sample_exact(a: &PureState, b: &PureState, rng: &mut (impl Rng + ?Sized)) -> Result<BellOutcome> {
    let dist = bell_distribution(a, b)?;
    let probs: Vec<f64> = dist.iter().map(|d| d.1).collect();
    Ok(dist[sample_discrete(&probs, rng)].0)
}

/// Materialized POVM elements `W†|o⟩⟨o|W`; only for small `n`.
pub fn bell_povm(n: usize) -> Result<Povm> {
    let q = 2 * n + 2;
    if q > 6 {
        return Err(Error::TooManyQubits { n: q, cap: 6 });
    }
    let d = 1usize << q;
    let mut w = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for k in 0..d {
        let mut col = PureState::basis(q, k as Bits)?;
        apply_bell_circuit(&mut col, n)?;
        for (i, a) in col.amplitudes().iter().enumerate() {
            w[(i, k)] = *a;
        }
    }
    let elements = (0..d)
        .map(|o| {
            let e = DMatrix::from_fn(d, d, |i, j| w[(o, i)].conj() * w[(o, j)]);
            let out = bell_outcome_of_index(o, n);
            (format!("{}:{}:{}", out.y, out.z, out.b), e)
        })
        .collect();
    Povm::new(2, n + 1, elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2core::{dot, BooleanFunction};
    use crate::qsim::{prepare_example_state, PovmInput};
    use crate::rng::rng_from_seed;
    use nalgebra::DVector;
    use rand::Rng;
    use std::collections::HashMap;

    // Dense operators assembled from Kronecker products, independent of the
    // in-place gate kernels.
    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn op1(q: usize, nq: usize, g: &DMatrix<C64>) -> DMatrix<C64> {
        let hi = DMatrix::<C64>::identity(1 << (nq - q - 1), 1 << (nq - q - 1));
        let lo = DMatrix::<C64>::identity(1 << q, 1 << q);
        hi.kronecker(g).kronecker(&lo)
    }

    fn hmat() -> DMatrix<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)])
    }

    fn proj(bit: u64) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(2, 2, c(0.0));
        m[(bit as usize, bit as usize)] = c(1.0);
        m
    }

    fn xmat() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    fn cnot(ctl: usize, tgt: usize, nq: usize) -> DMatrix<C64> {
        op1(ctl, nq, &proj(0)) + op1(ctl, nq, &proj(1)) * op1(tgt, nq, &xmat())
    }

    fn register_projector(qubits: &[usize], value: Bits, v: DVector<C64>) -> DVector<C64> {
        let mut v = v;
        for (i, a) in v.iter_mut().enumerate() {
            if qubits.iter().enumerate().any(|(k, &q)| ((i >> q) & 1) as u64 != (value >> k) & 1) {
                *a = c(0.0);
            }
        }
        v
    }

    /// `F_{y,z,b}` following the explicit construction.
    struct FBuilder {
        n: usize,
        nq: usize,
        hl: DMatrix<C64>,
        cnots: DMatrix<C64>,
        hx: DMatrix<C64>,
    }

    impl FBuilder {
        fn new(n: usize) -> Self {
            let nq = 2 * n + 2;
            let hl = op1(n, nq, &hmat()) * op1(2 * n + 1, nq, &hmat());
            let cnots = (0..n).fold(DMatrix::identity(1 << nq, 1 << nq), |acc, i| cnot(i, n + 1 + i, nq) * acc);
            let hx = (0..n).fold(DMatrix::identity(1 << nq, 1 << nq), |acc, i| op1(i, nq, &hmat()) * acc);
            Self { n, nq, hl, cnots, hx }
        }

        fn apply(&self, o: BellOutcome, psi: &[C64]) -> Vec<C64> {
            let n = self.n;
            let v = DVector::from_column_slice(psi);
            let xs: Vec<usize> = (0..n).collect();
            let ys: Vec<usize> = (n + 1..2 * n + 1).collect();
            let mut v = register_projector(&[n, 2 * n + 1], o.b as Bits, &self.hl * v);
            if o.b == 0b11 {
                v = register_projector(&ys, o.y, &self.cnots * v);
                v = register_projector(&xs, o.z, &self.hx * v);
            } else {
                v = register_projector(&ys, o.y, register_projector(&xs, o.z, v));
            }
            v.iter().copied().collect()
        }
    }

    fn all_outcomes(n: usize) -> Vec<BellOutcome> {
        let mut v = Vec::new();
        for b in 0..4u8 {
            for y in 0..1u64 << n {
                for z in 0..1u64 << n {
                    v.push(BellOutcome { y, z, b });
                }
            }
        }
        v
    }

    #[test]
    fn materialized_povm_matches_explicit_construction_n2() {
        let n = 2;
        let fb = FBuilder::new(n);
        let povm = bell_povm(n).unwrap();
        let d = 1usize << fb.nq;
        // Compare every element against F†F built column by column.
        for (label, e) in povm.elements() {
            let parts: Vec<u64> = label.split(':').map(|t| t.parse().unwrap()).collect();
            let o = BellOutcome { y: parts[0], z: parts[1], b: parts[2] as u8 };
            let mut fmat = DMatrix::from_element(d, d, c(0.0));
            for k in 0..d {
                let mut basis = vec![c(0.0); d];
                basis[k] = c(1.0);
                for (i, a) in fb.apply(o, &basis).into_iter().enumerate() {
                    fmat[(i, k)] = a;
                }
            }
            let expect = fmat.adjoint() * &fmat;
            let dev = (expect - e).iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-12, "{label}: {dev}");
        }
    }

    #[test]
    fn distribution_matches_explicit_construction_n3() {
        let n = 3;
        let fb = FBuilder::new(n);
        let mut rng = rng_from_seed(21);
        let f = BooleanFunction::quadratic(3, vec![0b110, 0b100, 0b000]).unwrap();
        let psi = prepare_example_state(&f).unwrap();
        let joint = psi.tensor(&psi).unwrap();
        let dist: HashMap<BellOutcome, f64> = bell_distribution(&psi, &psi).unwrap().into_iter().collect();
        let mut total = 0.0;
        for o in all_outcomes(n) {
            let p: f64 = fb.apply(o, joint.amplitudes()).iter().map(|a| a.norm_sqr()).sum();
            total += p;
            assert!((p - dist.get(&o).copied().unwrap_or(0.0)).abs() < 1e-12);
        }
        assert!((total - 1.0).abs() < 1e-12);
        // Completeness of Σ F†F on random vectors.
        for _ in 0..3 {
            let v = PureState::random(2 * n + 2, &mut rng).unwrap();
            let s: f64 = all_outcomes(n)
                .into_iter()
                .map(|o| fb.apply(o, v.amplitudes()).iter().map(|a| a.norm_sqr()).sum::<f64>())
                .sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn b11_branch_gives_symmetrized_product() {
        let mut rng = rng_from_seed(22);
        for _ in 0..5 {
            let rows: Vec<Bits> = (0..3).map(|_| rng.random::<u64>() & 7).collect();
            let f = BooleanFunction::quadratic_from_any(3, &rows).unwrap();
            let up = f.quadratic_rows().unwrap().to_vec();
            let b_row = |i: usize| (0..3).fold(0u64, |acc, j| acc | ((((up[i] >> j) ^ (up[j] >> i)) & 1) << j)) & !(1 << i);
            let psi = prepare_example_state(&f).unwrap();
            for (o, p) in bell_distribution(&psi, &psi).unwrap() {
                assert!(p > 0.0);
                if o.both_labels_one() {
                    let z = (0..3).fold(0, |acc, i| acc | ((dot(b_row(i), o.y) as Bits) << i));
                    assert_eq!(o.z, z);
                }
            }
        }
    }

    #[test]
    fn label_marginal_uniform() {
        let f = BooleanFunction::random(3, 1, &mut rng_from_seed(23)).unwrap();
        let psi = prepare_example_state(&f).unwrap();
        let mut m = [0.0; 4];
        for (o, p) in bell_distribution(&psi, &psi).unwrap() {
            m[o.b as usize] += p;
        }
        for v in m {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn circuit_sampler_matches_exact_law() {
        let mut rng = rng_from_seed(24);
        let f = BooleanFunction::quadratic(2, vec![0b11, 0b10]).unwrap();
        let psi = prepare_example_state(&f).unwrap();
        let dist: HashMap<BellOutcome, f64> = bell_distribution(&psi, &psi).unwrap().into_iter().collect();
        let draws = 40_000;
        let mut counts: HashMap<BellOutcome, usize> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(bell_sample(&psi, &psi, &mut rng).unwrap()).or_default() += 1;
        }
        for (o, c) in &counts {
            assert!(dist.contains_key(o), "impossible outcome {o:?}");
            let p = dist[o];
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((*c as f64 / draws as f64 - p).abs() < 5.0 * sigma);
        }
        let povm = bell_povm(2).unwrap();
        let probs = povm.probabilities(&PovmInput::Copies(&[psi.clone(), psi.clone()])).unwrap();
        for (k, p) in probs.iter().enumerate() {
            let o = bell_outcome_of_index(k, 2);
            assert!((p - dist.get(&o).copied().unwrap_or(0.0)).abs() < 1e-12);
        }
    }
}
