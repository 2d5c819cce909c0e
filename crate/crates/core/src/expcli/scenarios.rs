use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;

use crate::acquire::{acquire_ancilla_free, acquire_unidirectional, acquisition_target, AcquireParams, MaskMode};
use crate::adversary::AdversaryStrategy;
use crate::certify::{overlap_estimate_stream, CopyRule};
use crate::covertex::{
    covert_parity_learn, covert_quadratic_learn, parity_adversary_guess, parity_guess_probability,
    random_upper_triangular, ParityLearnerConfig,
};
use crate::covertsq::{
    covert_qsq_answers, covert_sq_estimate, monomial_basis, moment_vector, sketch_encode, sketch_simulator,
    PauliObservable, SketchParams,
};
use crate::error::{Error, Result};
use crate::gf2core::{dot, mask, BooleanFunction};
use crate::oracles::{
    ChannelKind, ExOracle, MemOracle, QMeasExOracle, QState, QsqOracle, QsqSource, QuantumChannelOracle, RegisterMap,
    SqOracle, Visibility,
};
use crate::qsim::{prepare_example_state, prepare_phase_state, Basis, PureState};
use crate::rng::SimRng;
use crate::tasks::{
    covert_forrelation, covert_simon, forrelation_oracles, forrelation_repetitions, gen_forrelation_instance,
    gen_simon_instance, robust_task_params, simon_copies, simon_oracles, AdversaryClass, ForrelationCase, SimonCase,
    SimonTask, SimonVerdict,
};

use super::config::{ExperimentConfig, Scenario};

/// Accepted outputs below this fidelity count as a soundness failure.
pub const BAD_FIDELITY: f64 = 0.8;

/// What one trial produced, before it is stamped with its index and seed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialOutcome {
    pub flags: BTreeMap<String, bool>,
    pub metrics: BTreeMap<String, f64>,
    pub public_queries: u64,
    pub private_queries: u64,
}

impl TrialOutcome {
    fn flag(&mut self, k: &str, v: bool) -> &mut Self {
        self.flags.insert(k.into(), v);
        self
    }

    fn metric(&mut self, k: &str, v: f64) -> &mut Self {
        self.metrics.insert(k.into(), v);
        self
    }
}

pub fn run_trial(cfg: &ExperimentConfig, index: u64, rng: &mut SimRng) -> Result<TrialOutcome> {
    match cfg.scenario {
        Scenario::CovertSq => covert_sq(cfg, rng),
        Scenario::ShadowsQsq => shadows_qsq(cfg, rng),
        Scenario::Parity => parity(cfg, rng),
        Scenario::Quadratic => quadratic(cfg, rng),
        Scenario::Certify => certify(cfg, rng),
        Scenario::AcquireUni => acquire(cfg, false, rng),
        Scenario::AcquireAf => acquire(cfg, true, rng),
        Scenario::Forrelation => forrelation(cfg, index, rng),
        Scenario::Simon => simon(cfg, index, rng),
        Scenario::NogoSwap => nogo_swap(cfg, rng),
    }
}

fn strategy(cfg: &ExperimentConfig, register: usize) -> Result<AdversaryStrategy> {
    cfg.adversary.build(register).map_err(|e| Error::Config(e.to_string()))
}

fn covert_sq(cfg: &ExperimentConfig, rng: &mut SimRng) -> Result<TrialOutcome> {
    let params = SketchParams { n: cfg.n, degree: cfg.degree, delta: cfg.delta, delta_c: cfg.delta_c, b_c: cfg.b_c, b_m: cfg.b_m };
    let f = BooleanFunction::random(cfg.n - 1, 1, rng)?;
    let basis = monomial_basis(cfg.n, cfg.degree);
    let raw: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c: Vec<f64> = raw.iter().map(|v| v / norm * cfg.b_c * rng.random::<f64>().sqrt()).collect();
    let mut oracle = SqOracle::new(f, cfg.policy, Visibility::Public)?;
    let truth: f64 = moment_vector(&oracle, &basis)?.iter().zip(&c).map(|(a, b)| a * b).sum();
    // the adversary's view is the query stream; it must not depend on c
    let (mut r_enc, mut r_sim) = (rng.clone(), rng.clone());
    let (_, enc) = sketch_encode(&c, &params, &mut r_enc)?;
    let sim = sketch_simulator(&params, &mut r_sim)?;
    let run = covert_sq_estimate(&mut oracle, &c, &params, rng)?;
    let err = (run.estimate - truth).abs();
    let mut o = TrialOutcome { public_queries: run.queries, ..Default::default() };
    o.flag("success", err <= cfg.delta).flag("simulator_identical", enc == sim);
    o.metric("error", err).metric("dimension", run.dimension as f64);
    Ok(o)
}

/// Random `k`-local Pauli string with coefficient 1.
pub fn random_pauli(n: usize, k: usize, rng: &mut (impl Rng + ?Sized)) -> PauliObservable {
    let mut qs = sample(rng, n, k.min(n)).into_vec();
    qs.sort_unstable();
    PauliObservable::single(qs.into_iter().map(|q| (q, [Basis::X, Basis::Y, Basis::Z][rng.random_range(0..3)])).collect())
}

/// `⟨ψ|P|ψ⟩` by applying the Pauli string to a copy.
pub fn pauli_expectation(psi: &PureState, obs: &PauliObservable) -> Result<f64> {
    let mut total = 0.0;
    for t in &obs.terms {
        let mut s = psi.clone();
        for &(q, b) in &t.ops {
            match b {
                Basis::X => s.x(q),
                Basis::Y => s.y(q),
                Basis::Z => s.z(q),
            }
        }
        total += t.coeff * psi.inner(&s)?.re;
    }
    Ok(total)
}

fn shadows_qsq(cfg: &ExperimentConfig, rng: &mut SimRng) -> Result<TrialOutcome> {
    let psi = PureState::random(cfg.n, rng)?;
    let obs: Vec<PauliObservable> = (0..cfg.observables).map(|_| random_pauli(cfg.n, cfg.locality, rng)).collect();
    let mut oracle = QMeasExOracle::new(QState::Pure(psi.clone()), Visibility::Public);
    let (set, est) = covert_qsq_answers(&mut oracle, &obs, cfg.tau, cfg.delta_p, rng)?;
    let mut within = 0usize;
    for (o, e) in obs.iter().zip(&est) {
        within += ((e - pauli_expectation(&psi, o)?).abs() <= cfg.tau) as usize;
    }
    let mut out = TrialOutcome { public_queries: oracle.counters().weighted, ..Default::default() };
    out.flag("success", within == obs.len());
    out.metric("within", within as f64).metric("pairs", obs.len() as f64).metric("shots", set.len() as f64);
    Ok(out)
}

fn parity(cfg: &ExperimentConfig, rng: &mut SimRng) -> Result<TrialOutcome> {
    let n = cfg.n;
    let s = rng.random::<u64>() & mask(n);
    let f = BooleanFunction::parity(n, s)?;
    let config = ParityLearnerConfig::new(n, cfg.delta_c, cfg.delta_p)?;
    let mut public = ExOracle::new(f.clone(), Visibility::Public);
    let mut private = SqOracle::new(f, cfg.policy, Visibility::Private)?;
    let run = covert_parity_learn(&mut public, &mut private, &config, rng)?;
    let guess = parity_adversary_guess(n, public.samples(), rng)?;
    let mut o = TrialOutcome { public_queries: run.public_examples, private_queries: run.private_queries, ..Default::default() };
    o.flag("success", run.learned == Some(s))
        .flag("aborted", run.abort.is_some())
        .flag("adversary_success", guess == s)
        .flag("private_within_budget", run.private_queries as f64 <= config.private_ceiling());
    o.metric("adversary_guess_probability", parity_guess_probability(n, public.samples(), s)?);
    Ok(o)
}

fn quadratic(cfg: &ExperimentConfig, rng: &mut SimRng) -> Result<TrialOutcome> {
    let n = cfg.n;
    let rows = random_upper_triangular(n, rng);
    let f = BooleanFunction::quadratic(n, rows.clone())?;
    let mut public = QMeasExOracle::new(QState::Pure(prepare_example_state(&f)?), Visibility::Public);
    let mut private = QsqOracle::new(QsqSource::Example(f), cfg.policy, Visibility::Private);
    let run = covert_quadratic_learn(&mut public, &mut private, n, cfg.delta_c, rng)?;
    let mut o = TrialOutcome { public_queries: run.public_copies, private_queries: run.private_queries, ..Default::default() };
    o.flag("success", run.learned.as_deref() == Some(&rows[..])).flag("aborted", run.abort.is_some());
    o.metric("bell_queries", run.public_queries as f64);
    Ok(o)
}

fn certify(cfg: &ExperimentConfig, rng: &mut SimRng) -> Result<TrialOutcome> {
    let n = cfg.n;
    let f = BooleanFunction::random(n, 1, rng)?;
    let target = prepare_phase_state(&f)?;
    let mut public = QuantumChannelOracle::new(f.clone(), ChannelKind::QPh, strategy(cfg, n)?, Visibility::Public)?;
    let mut private = MemOracle::new(f, Visibility::Private);
    let required = CopyRule::Linear.copies(n, cfg.eps, cfg.delta)?;
    let count = cfg.blocks.unwrap_or(required);
    let reg: Vec<usize> = (0..n).collect();
    let mut fid = 0.0;
    let rec = overlap_estimate_stream(
        |r| {
            let copy = public.quantum_query(PureState::uniform(n)?, &RegisterMap::Phase { targets: reg.clone() }, r)?;
            fid += copy.fidelity(&target)?;
            Ok(copy)
        },
        count,
        &mut private,
        cfg.eps,
        cfg.delta,
        CopyRule::Linear,
        rng,
    )?;
    let mut o = TrialOutcome { public_queries: public.counters().weighted, private_queries: rec.membership_weighted, ..Default::default() };
    o.flag("accepted", rec.accepted);
    o.metric("omega_hat", rec.omega_hat).metric("mean_copy_fidelity", fid / count as f64).metric("copies", count as f64);
    Ok(o)
}

fn acquire(cfg: &ExperimentConfig, ancilla_free: bool, rng: &mut SimRng) -> Result<TrialOutcome> {
    let n = cfg.n;
    let f = BooleanFunction::random(n, 1, rng)?;
    let mode = if ancilla_free { MaskMode::Entangled } else { MaskMode::Randomness };
    let mut public = QuantumChannelOracle::new(f.clone(), ChannelKind::QPh, strategy(cfg, n)?, Visibility::Public)?;
    let mut private = MemOracle::new(f.clone(), Visibility::Private);
    let params = AcquireParams { m: cfg.m, eps: cfg.eps, delta: cfg.delta, blocks: cfg.blocks };
    let res = if ancilla_free {
        let leak = cfg.leak_bound().ok_or_else(|| Error::Config("acquire-af needs delta_leak".into()))?;
        acquire_ancilla_free(&mut public, &mut private, &params, leak, mode, rng)?
    } else {
        acquire_unidirectional(&mut public, &mut private, &params, mode, rng)?
    };
    let fid = res.output_fidelity(&acquisition_target(mode, &f)?)?;
    let mut o = TrialOutcome { public_queries: res.public_queries, private_queries: res.private_queries, ..Default::default() };
    o.flag("accepted", res.accepted)
        .flag("success", fid.is_some_and(|v| v >= 1.0 - cfg.eps))
        .flag("bad_accept", fid.is_some_and(|v| v < BAD_FIDELITY));
    o.metric("omega_hat", res.certification.omega_hat).metric("blocks", res.blocks as f64);
    if let Some(v) = fid {
        o.metric("fidelity", v);
    }
    if let Some(l) = &res.leak {
        o.metric("eps_leak", l.eps_leak).metric("eps_cert", l.eps_cert);
    }
    Ok(o)
}

fn task_class(cfg: &ExperimentConfig) -> Result<AdversaryClass> {
    Ok(if cfg.ancilla_free_class() {
        let delta_leak = cfg.leak_bound().ok_or_else(|| Error::Config("ancilla-free class needs delta_leak".into()))?;
        AdversaryClass::AncillaFree { delta_leak, repeats: cfg.repeats }
    } else {
        AdversaryClass::Unidirectional
    })
}

fn forrelation(cfg: &ExperimentConfig, index: u64, rng: &mut SimRng) -> Result<TrialOutcome> {
    let case = if index.is_multiple_of(2) { ForrelationCase::Uncorrelated } else { ForrelationCase::Forrelated };
    let inst = gen_forrelation_instance(cfg.n, case, rng)?;
    let (mut public, mut private) = forrelation_oracles(&inst, strategy(cfg, 2 * cfg.n)?)?;
    let params = robust_task_params(cfg.delta_tilde, cfg.delta, cfg.blocks, Some(cfg.m));
    let reps = forrelation_repetitions(cfg.delta_tilde)?;
    let run = covert_forrelation(&mut public, &mut private, cfg.n, task_class(cfg)?, &params, reps, rng)?;
    let mut o = TrialOutcome { public_queries: run.public_queries, private_queries: run.private_queries, ..Default::default() };
    o.flag("accepted", run.accepted()).flag("success", run.answer == Some(case)).flag("forrelated", case == ForrelationCase::Forrelated);
    o.metric("phi", inst.phi).metric("rounds", run.votes.len() as f64);
    Ok(o)
}

fn simon(cfg: &ExperimentConfig, index: u64, rng: &mut SimRng) -> Result<TrialOutcome> {
    let case = if index.is_multiple_of(2) { SimonCase::OneToOne } else { SimonCase::Periodic };
    let inst = gen_simon_instance(cfg.n, case, rng)?;
    let (mut public, mut private) = simon_oracles(&inst, strategy(cfg, cfg.n)?)?;
    let params = robust_task_params(cfg.delta_tilde, cfg.delta, cfg.blocks, Some(cfg.m));
    let mut task = SimonTask::new(&inst.f, simon_copies(cfg.n, cfg.delta_tilde)?);
    let run = covert_simon(&mut public, &mut private, &mut task, task_class(cfg)?, &params, rng)?;
    let s = inst.period();
    let orthogonal = task.runs.iter().all(|r| r.harvested.iter().all(|&y| !dot(y, s)));
    let decided: Vec<_> = task.runs.iter().filter(|r| r.verdict != SimonVerdict::Inconclusive).collect();
    let mut o = TrialOutcome {
        public_queries: run.public_queries,
        private_queries: run.private_queries + task.mem.counters().weighted,
        ..Default::default()
    };
    o.flag("accepted", run.accepted())
        .flag("success", run.answer.is_some_and(|v| v.correct_for(&inst)))
        .flag("periodic", case == SimonCase::Periodic)
        .flag("orthogonal", orthogonal)
        .flag("two_membership_queries", decided.iter().all(|r| r.membership_queries == 2));
    o.metric("inconclusive_runs", (task.runs.len() - decided.len()) as f64).metric("decision_runs", task.runs.len() as f64);
    Ok(o)
}

fn nogo_swap(cfg: &ExperimentConfig, rng: &mut SimRng) -> Result<TrialOutcome> {
    let n = cfg.n;
    let s = rng.random::<u64>() & mask(n);
    let f = BooleanFunction::parity(n, s)?;
    let mut public = QuantumChannelOracle::new(f.clone(), ChannelKind::QPh, strategy(cfg, n)?, Visibility::Public)?;
    let mut private = MemOracle::new(f.clone(), Visibility::Private);
    let params = AcquireParams { m: cfg.m, eps: cfg.eps, delta: cfg.delta, blocks: cfg.blocks };
    let res = acquire_unidirectional(&mut public, &mut private, &params, MaskMode::Randomness, rng)?;
    let learned = public.tap().memory().learned() == Some(s);
    let mut o = TrialOutcome { public_queries: res.public_queries, private_queries: res.private_queries, ..Default::default() };
    o.flag("accepted", res.accepted).flag("adversary_learned", learned).flag("accepted_and_learned", res.accepted && learned);
    Ok(o)
}
