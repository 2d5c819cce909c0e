use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2core::{mask, Bits, BooleanFunction};
use crate::oracles::{ChannelKind, QuantumChannelOracle, RegisterMap};
use crate::qsim::{Basis, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskMode {
    /// Private `Z^r` mask, removed right after the response.
    Randomness,
    /// Private register entangled with the query; unmasking is deferred.
    Entangled,
    /// Membership oracle with phase kickback and private masks on input and output.
    QmemRandomness,
    /// Membership oracle with both registers entangled with private ones.
    QmemEntangled,
}

impl MaskMode {
    pub fn channel(self) -> ChannelKind {
        match self {
            MaskMode::Randomness | MaskMode::Entangled => ChannelKind::QPh,
            MaskMode::QmemRandomness | MaskMode::QmemEntangled => ChannelKind::QMem,
        }
    }

    pub fn entangled(self) -> bool {
        matches!(self, MaskMode::Entangled | MaskMode::QmemEntangled)
    }

    /// Function whose phase state a successful, unmasked query yields.
    pub fn phase_function(self, f: &BooleanFunction) -> Result<BooleanFunction> {
        match self {
            MaskMode::Randomness | MaskMode::Entangled => Ok(f.clone()),
            MaskMode::QmemRandomness | MaskMode::QmemEntangled => BooleanFunction::example_phase(f.clone()),
        }
    }

    /// Function whose phase state the raw output is: the masked joint state for entangled modes.
    pub fn block_function(self, f: &BooleanFunction) -> Result<BooleanFunction> {
        let g = self.phase_function(f)?;
        if self.entangled() {
            BooleanFunction::masked_phase(g)
        } else {
            Ok(g)
        }
    }
}

/// Private randomness for exactly one masked query.
#[derive(Debug)]
pub struct MaskedQueryContext {
    mode: MaskMode,
    r: Bits,
    r_tilde: Bits,
    used: bool,
}

impl MaskedQueryContext {
    /// Draws fresh masks for an `n`-input, `w`-output oracle.
    pub fn fresh(mode: MaskMode, n: usize, w: usize, rng: &mut (impl Rng + ?Sized)) -> Self {
        let (r, r_tilde) = if mode.entangled() { (0, 0) } else { (rng.random::<u64>() & mask(n), rng.random::<u64>() & mask(w)) };
        Self { mode, r, r_tilde, used: false }
    }

    pub fn mode(&self) -> MaskMode {
        self.mode
    }

    /// Runs the query. Randomness modes return the unmasked phase state; entangled modes return
    /// the private register (low half) together with the query register (high half).
    pub fn query(&mut self, oracle: &mut QuantumChannelOracle, rng: &mut (impl Rng + ?Sized)) -> Result<PureState> {
        if self.used {
            return Err(Error::MaskReuse);
        }
        self.used = true;
        if oracle.kind() != self.mode.channel() {
            return Err(Error::Config(format!("{:?} masking needs a {:?} oracle", self.mode, self.mode.channel())));
        }
        let n = oracle.function().arity();
        let w = oracle.function().width();
        match self.mode {
            MaskMode::Randomness => {
                let reg: Vec<usize> = (0..n).collect();
                let mut s = PureState::basis(n, self.r)?;
                s.h_all(&reg);
                let mut out = oracle.quantum_query(s, &RegisterMap::Phase { targets: reg.clone() }, rng)?;
                out.z_mask(self.r, &reg);
                Ok(out)
            }
            MaskMode::Entangled => {
                oracle.quantum_query(entangled_pairs(n)?, &RegisterMap::phase(n..2 * n), rng)
            }
            MaskMode::QmemRandomness => {
                let k = n + w;
                let phase: Vec<usize> = (0..k).collect();
                let mut s = PureState::basis(k + w, self.r | (self.r_tilde << n))?;
                s.h_all(&phase);
                let mut out = kickback(s, oracle, (0..n).collect(), (n..k).collect(), (k..k + w).collect(), rng)?;
                out.z_mask(self.r | (self.r_tilde << n), &phase);
                Ok(out)
            }
            MaskMode::QmemEntangled => {
                let k = n + w;
                let s = entangled_pairs(k)?.tensor(&PureState::zero(w)?)?;
                kickback(s, oracle, (k..k + n).collect(), (k + n..2 * k).collect(), (2 * k..2 * k + w).collect(), rng)
            }
        }
    }
}

/// `2^{-n} Σ_{r,x} (−1)^{r·x} |r⟩|x⟩` with `r` on the low `n` qubits.
pub fn entangled_pairs(n: usize) -> Result<PureState> {
    let mut s = PureState::zero(2 * n)?;
    for i in 0..n {
        s.h(i);
        s.h(n + i);
        s.cz(i, n + i);
    }
    Ok(s)
}

/// Membership query on `(input, aux)` with `aux` prepared as `H·copy(output)`, giving the phase `y·f(x)`
/// on the output register. `aux` is uncomputed, read out, and dropped (the last qubits of `s`).
fn kickback(
    mut s: PureState,
    oracle: &mut QuantumChannelOracle,
    input: Vec<usize>,
    output: Vec<usize>,
    aux: Vec<usize>,
    rng: &mut (impl Rng + ?Sized),
) -> Result<PureState> {
    for (&o, &a) in output.iter().zip(&aux) {
        s.cnot(o, a);
        s.h(a);
    }
    let mut s = oracle.quantum_query(s, &RegisterMap::Mem { inputs: input, outputs: aux.clone() }, rng)?;
    for (&o, &a) in output.iter().zip(&aux) {
        s.h(a);
        s.cnot(o, a);
    }
    // honest runs leave aux in |0⟩; a tampered channel may not
    Ok(s.measure_and_discard(&aux, Basis::Z, rng)?.1)
}

pub fn masked_query(
    ctx: &mut MaskedQueryContext,
    oracle: &mut QuantumChannelOracle,
    rng: &mut (impl Rng + ?Sized),
) -> Result<PureState> {
    ctx.query(oracle, rng)
}

/// Measures the private half of a `2k`-qubit masked state and undoes the mask on the rest.
pub fn unmask_by_measurement(state: &PureState, rng: &mut (impl Rng + ?Sized)) -> Result<PureState> {
    let k = half(state)?;
    let reg: Vec<usize> = (0..k).collect();
    let (r, mut rest) = state.measure_and_discard(&reg, Basis::Z, rng)?;
    rest.z_mask(r, &reg);
    Ok(rest)
}

/// Undoes the entangling gates, leaving `|+^k⟩ ⊗ |ψ⟩`.
pub fn unmask_by_cz(state: &PureState) -> Result<PureState> {
    let k = half(state)?;
    let mut s = state.clone();
    for i in 0..k {
        s.cz(i, k + i);
    }
    Ok(s)
}

fn half(state: &PureState) -> Result<usize> {
    let n = state.num_qubits();
    if !n.is_multiple_of(2) {
        return Err(Error::DimensionMismatch("masked state must have an even qubit count".into()));
    }
    Ok(n / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AdversaryStrategy;
    use crate::oracles::Visibility;
    use crate::qsim::{prepare_example_state, prepare_phase_state};
    use crate::rng::rng_from_seed;

    #[test]
    fn randomness_mode_returns_phase_state() {
        let mut rng = rng_from_seed(1);
        for n in 1..=4 {
            let f = BooleanFunction::random(n, 1, &mut rng).unwrap();
            let mut o = QuantumChannelOracle::honest(f.clone(), ChannelKind::QPh).unwrap();
            let mut ctx = MaskedQueryContext::fresh(MaskMode::Randomness, n, 1, &mut rng);
            let out = ctx.query(&mut o, &mut rng).unwrap();
            assert!((out.fidelity(&prepare_phase_state(&f).unwrap()).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(ctx.query(&mut o, &mut rng), Err(Error::MaskReuse));
        }
    }

    #[test]
    fn entangled_mode_unmasks_both_ways() {
        let mut rng = rng_from_seed(2);
        for n in 1..=4 {
            let f = BooleanFunction::random(n, 1, &mut rng).unwrap();
            let psi = prepare_phase_state(&f).unwrap();
            let mut o = QuantumChannelOracle::honest(f.clone(), ChannelKind::QPh).unwrap();
            let joint = MaskedQueryContext::fresh(MaskMode::Entangled, n, 1, &mut rng).query(&mut o, &mut rng).unwrap();
            let big = prepare_phase_state(&MaskMode::Entangled.block_function(&f).unwrap()).unwrap();
            assert!(joint.approx_eq(&big, 1e-12));
            let cz = unmask_by_cz(&joint).unwrap();
            assert!(cz.approx_eq(&PureState::uniform(n).unwrap().tensor(&psi).unwrap(), 1e-12));
            let m = unmask_by_measurement(&joint, &mut rng).unwrap();
            assert!((m.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qmem_modes_give_example_phase_states() {
        let mut rng = rng_from_seed(3);
        for (n, w) in [(2, 1), (3, 2), (2, 2)] {
            let f = BooleanFunction::random(n, w, &mut rng).unwrap();
            let g = MaskMode::QmemRandomness.phase_function(&f).unwrap();
            let target = prepare_phase_state(&g).unwrap();
            let mut o = QuantumChannelOracle::honest(f.clone(), ChannelKind::QMem).unwrap();
            let out = MaskedQueryContext::fresh(MaskMode::QmemRandomness, n, w, &mut rng).query(&mut o, &mut rng).unwrap();
            assert!((out.fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
            // Hadamards on the label register turn it into the example state
            let mut ex = out.clone();
            ex.h_all(&(n..n + w).collect::<Vec<_>>());
            assert!((ex.fidelity(&prepare_example_state(&f).unwrap()).unwrap() - 1.0).abs() < 1e-12);

            let joint = MaskedQueryContext::fresh(MaskMode::QmemEntangled, n, w, &mut rng).query(&mut o, &mut rng).unwrap();
            let big = prepare_phase_state(&MaskMode::QmemEntangled.block_function(&f).unwrap()).unwrap();
            assert!((joint.fidelity(&big).unwrap() - 1.0).abs() < 1e-12);
            let m = unmask_by_measurement(&joint, &mut rng).unwrap();
            assert!((m.fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_oracle_kind_is_rejected() {
        let mut rng = rng_from_seed(4);
        let f = BooleanFunction::parity(2, 1).unwrap();
        let mut o = QuantumChannelOracle::honest(f, ChannelKind::QPh).unwrap();
        assert!(MaskedQueryContext::fresh(MaskMode::QmemRandomness, 2, 1, &mut rng).query(&mut o, &mut rng).is_err());
    }

    #[test]
    fn replace_adversary_corrupts_the_output() {
        let mut rng = rng_from_seed(5);
        let f = BooleanFunction::parity(3, 0b111).unwrap();
        let strat = AdversaryStrategy::response_replace(PureState::zero(3).unwrap()).unwrap();
        let mut o = QuantumChannelOracle::new(f.clone(), ChannelKind::QPh, strat, Visibility::Public).unwrap();
        let out = MaskedQueryContext::fresh(MaskMode::Randomness, 3, 1, &mut rng).query(&mut o, &mut rng).unwrap();
        assert!((out.fidelity(&prepare_phase_state(&f).unwrap()).unwrap() - 0.125).abs() < 1e-12);
    }
}
