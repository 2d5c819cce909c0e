use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{
    acceptance_threshold, certify_state_noniid, noniid_formula_blocks, overlap_round, Block, CertificationRecord,
    CertifiedBlock, CopyRule, NonIidInput, NonIidRecord, OverlapTally,
};
use crate::error::{Error, Result};
use crate::gf2core::BooleanFunction;
use crate::oracles::{MemOracle, QuantumChannelOracle, Visibility};
use crate::qsim::{product_fidelity, prepare_phase_state, PureState};

use super::masked::{unmask_by_measurement, MaskMode, MaskedQueryContext};

/// Blocks used when no override is given.
pub const DEFAULT_BLOCKS: usize = 20;

/// The `c` in `(1 − c)·ε_leak`.
pub const LEAK_MARGIN: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcquireParams {
    pub m: usize,
    pub eps: f64,
    pub delta: f64,
    /// Block count override; `None` uses the protocol default.
    pub blocks: Option<usize>,
}

impl AcquireParams {
    pub fn new(m: usize, eps: f64, delta: f64) -> Self {
        Self { m, eps, delta, blocks: None }
    }

    pub fn with_blocks(mut self, blocks: usize) -> Self {
        self.blocks = Some(blocks);
        self
    }

    fn check(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("m must be positive".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0 && self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("ε and δ must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Leak-detection parameters of the ancilla-free protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakParameters {
    pub delta_leak: f64,
    /// `1 − (1 − δ_leak/2)^m`.
    pub eps_leak: f64,
    /// `min(ε, (1 − c)·ε_leak)`.
    pub eps_cert: f64,
    pub formula_blocks: usize,
}

impl LeakParameters {
    pub fn new(n_phase: usize, params: &AcquireParams, delta_leak: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta_leak) {
            return Err(Error::Config(format!("δ_leak = {delta_leak} outside [0, 1]")));
        }
        let eps_leak = 1.0 - (1.0 - delta_leak / 2.0).powi(params.m as i32);
        let eps_cert = if eps_leak > 0.0 { params.eps.min((1.0 - LEAK_MARGIN) * eps_leak) } else { params.eps };
        let formula_blocks = CopyRule::Linear.copies(n_phase * params.m, eps_cert, params.delta)?;
        Ok(Self { delta_leak, eps_leak, eps_cert, formula_blocks })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AcquisitionResult {
    pub accepted: bool,
    /// `m` copies on acceptance.
    #[serde(skip)]
    pub output: Option<Vec<PureState>>,
    pub blocks: usize,
    /// Block count of the general bound (unidirectional) or of the linear formula (ancilla-free).
    pub formula_blocks: f64,
    pub public_queries: u64,
    pub private_queries: u64,
    pub certification: CertificationRecord,
    pub noniid: Option<NonIidRecord>,
    pub leak: Option<LeakParameters>,
}

impl AcquisitionResult {
    /// Fidelity of the output with `target^{⊗m}`, or `None` on rejection.
    pub fn output_fidelity(&self, target: &PureState) -> Result<Option<f64>> {
        match &self.output {
            None => Ok(None),
            Some(parts) => Ok(Some(product_fidelity(parts, &vec![target.clone(); parts.len()])?)),
        }
    }
}

// derived oracle on the block function of the private f; its counts are folded back into the private oracle
fn cert_oracle(block_fn: BooleanFunction, m: usize) -> Result<MemOracle> {
    Ok(MemOracle::new(BooleanFunction::tensor_power(block_fn, m)?, Visibility::Private))
}

/// Masked public queries for `N` blocks of `m` copies, then non-i.i.d. certification of the blocks.
pub fn acquire_unidirectional(
    public: &mut QuantumChannelOracle,
    private: &mut MemOracle,
    params: &AcquireParams,
    mode: MaskMode,
    rng: &mut (impl Rng + ?Sized),
) -> Result<AcquisitionResult> {
    params.check()?;
    if mode.entangled() {
        return Err(Error::Config("this protocol unmasks per query; use a randomness mode".into()));
    }
    let blocks = params.blocks.unwrap_or(DEFAULT_BLOCKS);
    let (n, w) = (public.function().arity(), public.function().width());
    let pub_before = public.counters().weighted;
    let mut list = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        let mut parts = Vec::with_capacity(params.m);
        for _ in 0..params.m {
            parts.push(MaskedQueryContext::fresh(mode, n, w, rng).query(public, rng)?);
        }
        list.push(Block::new(parts)?);
    }
    let g = mode.phase_function(private.function())?;
    let n_phase = g.arity();
    let mut cert = cert_oracle(g, params.m)?;
    let mut dyn_rng = RngRef(rng);
    let (record, out) = certify_state_noniid(NonIidInput::Product(list), &mut cert, params.eps, params.delta, &mut dyn_rng)?;
    private.absorb(cert.counters());
    let output = match out {
        Some(CertifiedBlock::Product(b)) => Some(b.into_parts()),
        Some(CertifiedBlock::Mixed(_)) => unreachable!("product input yields a product block"),
        None => None,
    };
    Ok(AcquisitionResult {
        accepted: output.is_some(),
        output,
        blocks,
        formula_blocks: noniid_formula_blocks(n_phase * params.m, params.eps, params.delta),
        public_queries: public.counters().weighted - pub_before,
        private_queries: cert.counters().weighted,
        certification: record.certification.clone(),
        noniid: Some(record),
        leak: None,
    })
}

/// Entangled public queries for `N + 1` blocks, one overlap round per certification block against
/// the joint phase state, and measurement unmasking of the output block.
pub fn acquire_ancilla_free(
    public: &mut QuantumChannelOracle,
    private: &mut MemOracle,
    params: &AcquireParams,
    delta_leak: f64,
    mode: MaskMode,
    rng: &mut (impl Rng + ?Sized),
) -> Result<AcquisitionResult> {
    params.check()?;
    if !mode.entangled() {
        return Err(Error::Config("this protocol needs an entangled mode".into()));
    }
    let (n, w) = (public.function().arity(), public.function().width());
    let g = mode.phase_function(private.function())?;
    let leak = LeakParameters::new(g.arity(), params, delta_leak)?;
    let blocks = params.blocks.unwrap_or(leak.formula_blocks);
    let pub_before = public.counters().weighted;
    let mut cert = cert_oracle(mode.block_function(private.function())?, params.m)?;
    let n_block = cert.function().arity();
    let mut tally = OverlapTally::new(n_block);
    let mut dyn_rng = RngRef(rng);
    // certification blocks are measured as they arrive; nothing couples them in an i.i.d. run
    for _ in 0..blocks {
        let parts = (0..params.m)
            .map(|_| MaskedQueryContext::fresh(mode, n, w, &mut dyn_rng).query(public, &mut dyn_rng))
            .collect::<Result<Vec<_>>>()?;
        tally.push(&overlap_round(&Block::new(parts)?, &mut cert, &mut dyn_rng)?);
    }
    let out_parts = (0..params.m)
        .map(|_| MaskedQueryContext::fresh(mode, n, w, &mut dyn_rng).query(public, &mut dyn_rng))
        .collect::<Result<Vec<_>>>()?;
    let certification = tally.record(leak.eps_cert, params.delta, CopyRule::Linear, leak.formula_blocks, &cert);
    debug_assert_eq!(certification.threshold, acceptance_threshold(n_block, leak.eps_cert));
    private.absorb(cert.counters());
    let output = if certification.accepted {
        Some(out_parts.iter().map(|p| unmask_by_measurement(p, &mut dyn_rng)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    Ok(AcquisitionResult {
        accepted: output.is_some(),
        output,
        blocks,
        formula_blocks: leak.formula_blocks as f64,
        public_queries: public.counters().weighted - pub_before,
        private_queries: cert.counters().weighted,
        certification,
        noniid: None,
        leak: Some(leak),
    })
}

/// Target state for the outputs of either protocol.
pub fn acquisition_target(mode: MaskMode, f: &BooleanFunction) -> Result<PureState> {
    prepare_phase_state(&mode.phase_function(f)?)
}

/// Adapts `impl Rng + ?Sized` to the `dyn RngCore` the certifier takes.
pub(crate) struct RngRef<'a, R: Rng + ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> rand::RngCore for RngRef<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AdversaryStrategy;
    use crate::oracles::ChannelKind;
    use crate::rng::rng_from_seed;

    fn oracles(f: &BooleanFunction, strat: AdversaryStrategy, kind: ChannelKind) -> (QuantumChannelOracle, MemOracle) {
        (
            QuantumChannelOracle::new(f.clone(), kind, strat, Visibility::Public).unwrap(),
            MemOracle::new(f.clone(), Visibility::Private),
        )
    }

    #[test]
    fn honest_unidirectional_run_is_exact() {
        let mut rng = rng_from_seed(1);
        let f = BooleanFunction::random(3, 1, &mut rng).unwrap();
        let target = prepare_phase_state(&f).unwrap();
        for m in [1, 2] {
            let (mut public, mut private) = oracles(&f, AdversaryStrategy::identity(), ChannelKind::QPh);
            let res = acquire_unidirectional(&mut public, &mut private, &AcquireParams::new(m, 0.1, 0.05), MaskMode::Randomness, &mut rng).unwrap();
            assert!(res.accepted);
            assert!((res.output_fidelity(&target).unwrap().unwrap() - 1.0).abs() < 1e-9);
            assert_eq!(res.public_queries, (DEFAULT_BLOCKS * m) as u64);
            assert_eq!(res.private_queries, 2 * (DEFAULT_BLOCKS as u64 - 1) * m as u64);
            assert_eq!(private.counters().weighted, res.private_queries);
        }
    }

    #[test]
    fn replaced_responses_are_rejected() {
        let mut rng = rng_from_seed(2);
        let f = BooleanFunction::random(3, 1, &mut rng).unwrap();
        let strat = AdversaryStrategy::response_replace(PureState::zero(3).unwrap()).unwrap();
        let (mut public, mut private) = oracles(&f, strat, ChannelKind::QPh);
        let res = acquire_unidirectional(&mut public, &mut private, &AcquireParams::new(1, 0.1, 0.05), MaskMode::Randomness, &mut rng).unwrap();
        assert!(!res.accepted);
    }

    #[test]
    fn qmem_unidirectional_gives_example_phase_states() {
        let mut rng = rng_from_seed(3);
        let f = BooleanFunction::random_simon(3, 0b101, &mut rng).unwrap();
        let (mut public, mut private) = oracles(&f, AdversaryStrategy::identity(), ChannelKind::QMem);
        let res = acquire_unidirectional(&mut public, &mut private, &AcquireParams::new(1, 0.1, 0.05), MaskMode::QmemRandomness, &mut rng).unwrap();
        let target = acquisition_target(MaskMode::QmemRandomness, &f).unwrap();
        assert!((res.output_fidelity(&target).unwrap().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn leak_parameters() {
        let p = AcquireParams::new(1, 0.1, 0.1);
        let l = LeakParameters::new(3, &p, 0.5).unwrap();
        assert!((l.eps_leak - 0.25).abs() < 1e-15);
        assert!((l.eps_cert - 0.1).abs() < 1e-15);
        assert_eq!(l.formula_blocks, 139);
        let none = LeakParameters::new(3, &p, 0.0).unwrap();
        assert_eq!(none.eps_cert, 0.1);
    }

    #[test]
    fn honest_ancilla_free_run_is_exact() {
        let mut rng = rng_from_seed(4);
        let f = BooleanFunction::random(2, 1, &mut rng).unwrap();
        let target = prepare_phase_state(&f).unwrap();
        let (mut public, mut private) = oracles(&f, AdversaryStrategy::identity(), ChannelKind::QPh);
        let res = acquire_ancilla_free(&mut public, &mut private, &AcquireParams::new(2, 0.1, 0.1), 0.5, MaskMode::Entangled, &mut rng).unwrap();
        assert!(res.accepted);
        assert_eq!(res.certification.omega_hat, 1.0);
        assert!((res.output_fidelity(&target).unwrap().unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(res.public_queries, 2 * (res.blocks as u64 + 1));
    }

    #[test]
    fn full_leak_is_caught() {
        let mut rng = rng_from_seed(5);
        let f = BooleanFunction::random(2, 1, &mut rng).unwrap();
        let (mut public, mut private) = oracles(&f, AdversaryStrategy::ancilla_free(1.0).unwrap(), ChannelKind::QPh);
        let res = acquire_ancilla_free(&mut public, &mut private, &AcquireParams::new(1, 0.1, 0.1), 1.0, MaskMode::Entangled, &mut rng).unwrap();
        assert!(!res.accepted);
    }
}
