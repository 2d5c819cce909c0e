use super::{dot, BooleanFunction};
use crate::error::{Error, Result};

/// Largest arity accepted by the Forrelation routines.
pub const PHI_ARITY_CAP: usize = 14;

/// In-place unnormalized Walsh–Hadamard transform; length must be a power of two.
pub fn walsh_hadamard(v: &mut [f64]) {
    let len = v.len();
    assert!(len.is_power_of_two(), "length {len} is not a power of two");
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn check_pair(f: &BooleanFunction, g: &BooleanFunction) -> Result<usize> {
    if f.width() != 1 || g.width() != 1 {
        return Err(Error::InvalidFunction("forrelation needs width-1 functions".into()));
    }
    if f.arity() != g.arity() {
        return Err(Error::ArityMismatch { expected: f.arity(), got: g.arity() });
    }
    if f.arity() > PHI_ARITY_CAP {
        return Err(Error::TooManyQubits { n: f.arity(), cap: PHI_ARITY_CAP });
    }
    Ok(f.arity())
}

fn sign(b: bool) -> f64 {
    if b {
        -1.0
    } else {
        1.0
    }
}

/// The literal `O(4^n)` double sum.
pub fn forrelation_phi_literal(f: &BooleanFunction, g: &BooleanFunction) -> Result<f64> {
    let n = check_pair(f, g)?;
    let size = 1u64 << n;
    let gs: Vec<f64> = (0..size).map(|y| sign(g.bit(y))).collect();
    let mut total = 0.0;
    for x in 0..size {
        let fx = sign(f.bit(x));
        let mut inner = 0.0;
        for y in 0..size {
            inner += if dot(x, y) { -gs[y as usize] } else { gs[y as usize] };
        }
        total += fx * inner;
    }
    Ok(total * 2f64.powf(-1.5 * n as f64))
}

/// Φ(f, g); literal sum up to n = 8, fast transform above.
pub fn forrelation_phi(f: &BooleanFunction, g: &BooleanFunction) -> Result<f64> {
    let n = check_pair(f, g)?;
    if n <= 8 {
        forrelation_phi_literal(f, g)
    } else {
        forrelation_phi_fast(f, g)
    }
}

/// Fast-transform path regardless of n, for cross-checks.
pub(crate) fn forrelation_phi_fast(f: &BooleanFunction, g: &BooleanFunction) -> Result<f64> {
    let n = check_pair(f, g)?;
    let size = 1u64 << n;
    let mut gs: Vec<f64> = (0..size).map(|y| sign(g.bit(y))).collect();
    walsh_hadamard(&mut gs);
    let total: f64 = (0..size).map(|x| sign(f.bit(x)) * gs[x as usize]).sum();
    Ok(total * 2f64.powf(-1.5 * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    #[test]
    fn constant_pair_closed_form() {
        for n in 1..=12 {
            let c = BooleanFunction::constant(n, false).unwrap();
            let phi = forrelation_phi(&c, &c).unwrap();
            assert!((phi - 2f64.powf(-(n as f64) / 2.0)).abs() < 1e-12, "n={n}");
        }
        let c = BooleanFunction::constant(1, false).unwrap();
        assert!((forrelation_phi(&c, &c).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn fast_matches_literal_at_six() {
        let mut rng = rng_from_seed(11);
        for _ in 0..10 {
            let f = BooleanFunction::random(6, 1, &mut rng).unwrap();
            let g = BooleanFunction::random(6, 1, &mut rng).unwrap();
            let a = forrelation_phi_literal(&f, &g).unwrap();
            let b = forrelation_phi_fast(&f, &g).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn arity_mismatch() {
        let f = BooleanFunction::constant(2, false).unwrap();
        let g = BooleanFunction::constant(3, false).unwrap();
        assert!(forrelation_phi(&f, &g).is_err());
    }

    #[test]
    fn transform_is_involution_up_to_scale() {
        let mut v = vec![1.0, -2.0, 0.5, 3.0];
        let orig = v.clone();
        walsh_hadamard(&mut v);
        walsh_hadamard(&mut v);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a / 4.0 - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn phi_is_bounded(n in 1usize..=9, seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let f = BooleanFunction::random(n, 1, &mut rng).unwrap();
            let g = BooleanFunction::random(n, 1, &mut rng).unwrap();
            let phi = forrelation_phi(&f, &g).unwrap();
            prop_assert!(phi.abs() <= 1.0 + 1e-9);
        }
    }
}
