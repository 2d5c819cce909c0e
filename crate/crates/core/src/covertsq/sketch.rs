use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2core::Bits;
use crate::oracles::{SqOracle, SqQuery};

/// Constant `C` in `m^(e) = ⌈C·ln(1/δ_c)/ε₀²⌉`.
pub const JL_CONSTANT: f64 = 8.0;

/// Exponent vectors of every monomial of total degree ≤ `d` in `n` variables, graded-lexicographic.
pub fn monomial_basis(n: usize, d: usize) -> Vec<Vec<u8>> {
    fn fill(n: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == n {
            if left == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            fill(n, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=d {
        fill(n, deg, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// Value of a monomial at a point of `{0,1}^n`; powers collapse since `x² = x`.
pub fn monomial_value(exp: &[u8], z: Bits) -> f64 {
    if exp.iter().enumerate().all(|(i, &e)| e == 0 || (z >> i) & 1 == 1) {
        1.0
    } else {
        0.0
    }
}

pub fn sketch_dimension(delta: f64, delta_c: f64, b_c: f64, b_m: f64) -> Result<usize> {
    if !(delta > 0.0 && delta_c > 0.0 && delta_c < 1.0 && b_c > 0.0 && b_m > 0.0) {
        return Err(Error::Config("sketch parameters must be positive with δ_c < 1".into()));
    }
    let eps0 = delta / (2.0 * b_c * b_m);
    Ok((JL_CONSTANT * (1.0 / delta_c).ln() / (eps0 * eps0)).ceil() as usize)
}

/// A public query: row polynomial `p_j` shifted into `[0,1]` as `(p_j + L_j)/(2L_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchQuery {
    pub query: SqQuery,
    pub tolerance: f64,
    /// `L_j = Σ_i |R_ji|`.
    pub shift: f64,
}

impl SketchQuery {
    /// Row-polynomial value recovered from an oracle answer.
    pub fn unshift(&self, answer: f64) -> f64 {
        2.0 * self.shift * answer - self.shift
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SketchParams {
    /// Variables of the polynomial: the bits of a labelled example.
    pub n: usize,
    pub degree: usize,
    pub delta: f64,
    pub delta_c: f64,
    pub b_c: f64,
    pub b_m: f64,
}

/// Encoder state. `c_proj = R·c` is private.
#[derive(Clone, Debug)]
pub struct SketchPlan {
    pub params: SketchParams,
    pub basis: Vec<Vec<u8>>,
    pub dimension: usize,
    pub projection: DMatrix<f64>,
    pub tau_e: f64,
    c_proj: DVector<f64>,
}

impl SketchPlan {
    pub fn basis_size(&self) -> usize {
        self.basis.len()
    }

    pub fn projected_coefficients(&self) -> &DVector<f64> {
        &self.c_proj
    }

    /// Builds a plan around a given projection; used for hand-made `R` in tests.
    pub fn with_projection(params: SketchParams, projection: DMatrix<f64>, c: &[f64]) -> Result<Self> {
        let basis = monomial_basis(params.n, params.degree);
        if projection.ncols() != basis.len() || c.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "projection is {}×{}, basis has {} monomials, c has {}",
                projection.nrows(),
                projection.ncols(),
                basis.len(),
                c.len()
            )));
        }
        let dimension = projection.nrows();
        let c_proj = &projection * DVector::from_column_slice(c);
        let tau_e = params.delta / (4.0 * params.b_c * (dimension as f64).sqrt());
        Ok(Self { params, basis, dimension, projection, tau_e, c_proj })
    }
}

/// `m^(e) × N` matrix with i.i.d. `N(0, 1/m^(e))` entries, drawn row-major.
pub fn sample_projection(rows: usize, cols: usize, rng: &mut (impl Rng + ?Sized)) -> DMatrix<f64> {
    let scale = 1.0 / (rows as f64).sqrt();
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

fn row_queries(projection: &DMatrix<f64>, basis: &[Vec<u8>], n: usize, tau_e: f64) -> Result<Vec<SketchQuery>> {
    let points = 1usize << n;
    // monomial table, one row per point
    let table: Vec<Vec<f64>> = (0..points as Bits).map(|z| basis.iter().map(|e| monomial_value(e, z)).collect()).collect();
    projection
        .row_iter()
        .map(|row| {
            let shift: f64 = row.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
            let values = table
                .iter()
                .map(|m| {
                    let p: f64 = row.iter().zip(m).map(|(r, v)| r * v).sum();
                    ((p + shift) / (2.0 * shift)).clamp(0.0, 1.0)
                })
                .collect();
            Ok(SketchQuery { query: SqQuery::table(n, values)?, tolerance: tau_e / (2.0 * shift), shift })
        })
        .collect()
}

fn public_part(params: &SketchParams, rng: &mut (impl Rng + ?Sized)) -> Result<(Vec<Vec<u8>>, usize, DMatrix<f64>, f64)> {
    let basis = monomial_basis(params.n, params.degree);
    let dim = sketch_dimension(params.delta, params.delta_c, params.b_c, params.b_m)?;
    let r = sample_projection(dim, basis.len(), rng);
    let tau_e = params.delta / (4.0 * params.b_c * (dim as f64).sqrt());
    Ok((basis, dim, r, tau_e))
}

/// Draws `R`, keeps `R·c` and returns the public queries.
pub fn sketch_encode(
    c: &[f64],
    params: &SketchParams,
    rng: &mut (impl Rng + ?Sized),
) -> Result<(SketchPlan, Vec<SketchQuery>)> {
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > params.b_c * (1.0 + 1e-12) {
        return Err(Error::Config(format!("‖c‖₂ = {norm} exceeds B_c = {}", params.b_c)));
    }
    let (basis, _, r, tau_e) = public_part(params, rng)?;
    if c.len() != basis.len() {
        return Err(Error::DimensionMismatch(format!("c has {} entries, basis has {}", c.len(), basis.len())));
    }
    let queries = row_queries(&r, &basis, params.n, tau_e)?;
    let plan = SketchPlan::with_projection(params.clone(), r, c)?;
    Ok((plan, queries))
}

/// Public queries drawn exactly as the encoder draws them, without a target.
pub fn sketch_simulator(params: &SketchParams, rng: &mut (impl Rng + ?Sized)) -> Result<Vec<SketchQuery>> {
    let (basis, _, r, tau_e) = public_part(params, rng)?;
    row_queries(&r, &basis, params.n, tau_e)
}

/// `v_est = (R·c)·y`.
pub fn sketch_decode(plan: &SketchPlan, y: &[f64]) -> Result<f64> {
    if y.len() != plan.dimension {
        return Err(Error::ArityMismatch { expected: plan.dimension, got: y.len() });
    }
    Ok(plan.c_proj.iter().zip(y).map(|(a, b)| a * b).sum())
}

/// Exact moment vector `m_i = E_x[M_i(x, f(x))]` read off the oracle's function.
pub fn moment_vector(oracle: &SqOracle, basis: &[Vec<u8>]) -> Result<Vec<f64>> {
    let n = basis.first().map_or(0, |e| e.len());
    basis
        .iter()
        .map(|e| oracle.exact(&SqQuery::table(n, (0..1u64 << n).map(|z| monomial_value(e, z)).collect())?))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SketchRun {
    pub estimate: f64,
    pub dimension: usize,
    pub tau_e: f64,
    pub queries: u64,
}

/// Encode, query the public SQ oracle, decode.
pub fn covert_sq_estimate(
    oracle: &mut SqOracle,
    c: &[f64],
    params: &SketchParams,
    rng: &mut (impl Rng + ?Sized),
) -> Result<SketchRun> {
    let (plan, queries) = sketch_encode(c, params, rng)?;
    let before = oracle.counters().queries;
    let y = queries.iter().map(|q| Ok(q.unshift(oracle.query(&q.query, q.tolerance)?))).collect::<Result<Vec<_>>>()?;
    Ok(SketchRun {
        estimate: sketch_decode(&plan, &y)?,
        dimension: plan.dimension,
        tau_e: plan.tau_e,
        queries: oracle.counters().queries - before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2core::BooleanFunction;
    use crate::oracles::{AnswerPolicy, Visibility};
    use crate::rng::rng_from_seed;

    fn params() -> SketchParams {
        SketchParams { n: 4, degree: 2, delta: 0.1, delta_c: 0.05, b_c: 1.0, b_m: 1.0 }
    }

    #[test]
    fn basis_counts_and_order() {
        let b = monomial_basis(4, 2);
        assert_eq!(b.len(), 15);
        assert_eq!(b[0], vec![0, 0, 0, 0]);
        assert_eq!(b[1], vec![1, 0, 0, 0]);
        assert_eq!(b[5], vec![2, 0, 0, 0]);
        assert_eq!(monomial_basis(3, 3).len(), 20);
    }

    #[test]
    fn dimension_formula() {
        assert_eq!(sketch_dimension(0.1, 0.05, 1.0, 1.0).unwrap(), (8.0 * 20f64.ln() / 0.0025).ceil() as usize);
    }

    #[test]
    fn zero_target_decodes_to_zero() {
        let mut rng = rng_from_seed(1);
        let p = SketchParams { delta: 0.5, ..params() };
        let (plan, q) = sketch_encode(&[0.0; 15], &p, &mut rng).unwrap();
        let y: Vec<f64> = q.iter().map(|_| rng.random()).collect();
        assert_eq!(sketch_decode(&plan, &y).unwrap(), 0.0);
    }

    #[test]
    fn identity_projection_is_exact() {
        let c: Vec<f64> = (0..15).map(|i| if i % 4 == 0 { 0.3 } else { 0.0 }).collect();
        let plan = SketchPlan::with_projection(params(), DMatrix::identity(15, 15), &c).unwrap();
        let m: Vec<f64> = (0..15).map(|i| i as f64 / 15.0).collect();
        let want: f64 = c.iter().zip(&m).map(|(a, b)| a * b).sum();
        assert!((sketch_decode(&plan, &m).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn simulator_matches_encoder_stream() {
        let p = SketchParams { delta: 0.5, ..params() };
        let mut c = vec![0.0; 15];
        c[3] = 0.8;
        let (_, enc) = sketch_encode(&c, &p, &mut rng_from_seed(9)).unwrap();
        let sim = sketch_simulator(&p, &mut rng_from_seed(9)).unwrap();
        assert_eq!(enc, sim);
    }

    #[test]
    fn shifted_queries_stay_in_range_and_unshift() {
        let mut rng = rng_from_seed(2);
        let p = SketchParams { delta: 0.5, ..params() };
        let (plan, q) = sketch_encode(&[0.0; 15], &p, &mut rng).unwrap();
        let f = BooleanFunction::random(3, 1, &mut rng).unwrap();
        let o = SqOracle::new(f, AnswerPolicy::Exact, Visibility::Public).unwrap();
        let m = moment_vector(&o, &plan.basis).unwrap();
        for (j, sq) in q.iter().enumerate().take(20) {
            let direct: f64 = plan.projection.row(j).iter().zip(&m).map(|(a, b)| a * b).sum();
            assert!((sq.unshift(o.exact(&sq.query).unwrap()) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn end_to_end_estimate() {
        let mut rng = rng_from_seed(3);
        let f = BooleanFunction::random(3, 1, &mut rng).unwrap();
        let mut o = SqOracle::new(f, AnswerPolicy::Grid, Visibility::Public).unwrap();
        let mut c = vec![0.0; 15];
        c[0] = 0.6;
        c[7] = -0.8;
        let m = moment_vector(&o, &monomial_basis(4, 2)).unwrap();
        let truth: f64 = c.iter().zip(&m).map(|(a, b)| a * b).sum();
        let run = covert_sq_estimate(&mut o, &c, &params(), &mut rng).unwrap();
        assert!((run.estimate - truth).abs() <= 0.1, "{} vs {truth}", run.estimate);
        assert_eq!(run.queries as usize, run.dimension);
        assert!(o.audit().iter().all(|a| a.within()));
    }

    #[test]
    fn norm_bound_enforced() {
        let mut c = vec![0.0; 15];
        c[0] = 1.5;
        assert!(sketch_encode(&c, &params(), &mut rng_from_seed(4)).is_err());
    }
}
