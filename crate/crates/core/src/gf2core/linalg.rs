use serde::{Deserialize, Serialize};

use super::{dot, mask, Bits};
use crate::error::{Error, Result};

/// Incremental row echelon form over GF(2), kept fully reduced.
#[derive(Clone, Debug)]
pub struct Gf2System {
    n: usize,
    rows: Vec<(Bits, bool)>,
    pivots: Vec<usize>,
    inconsistent: bool,
}

impl Gf2System {
    pub fn new(n: usize) -> Self {
        Self { n, rows: Vec::new(), pivots: Vec::new(), inconsistent: false }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    /// Adds the equation `a·t = b`. Returns true when it raised the rank.
    pub fn insert(&mut self, a: Bits, b: bool) -> bool {
        let (mut a, mut b) = (a & mask(self.n), b);
        for (k, &p) in self.pivots.iter().enumerate() {
            if (a >> p) & 1 == 1 {
                a ^= self.rows[k].0;
                b ^= self.rows[k].1;
            }
        }
        if a == 0 {
            if b {
                self.inconsistent = true;
            }
            return false;
        }
        let p = a.trailing_zeros() as usize;
        for row in self.rows.iter_mut() {
            if (row.0 >> p) & 1 == 1 {
                row.0 ^= a;
                row.1 ^= b;
            }
        }
        self.rows.push((a, b));
        self.pivots.push(p);
        true
    }

    /// True when `a` lies in the row space.
    pub fn spans(&self, a: Bits) -> bool {
        let mut a = a & mask(self.n);
        for (k, &p) in self.pivots.iter().enumerate() {
            if (a >> p) & 1 == 1 {
                a ^= self.rows[k].0;
            }
        }
        a == 0
    }

    pub fn particular(&self) -> Option<Bits> {
        if self.inconsistent {
            return None;
        }
        Some(self.rows.iter().zip(&self.pivots).fold(0, |x, (r, &p)| x | ((r.1 as Bits) << p)))
    }

    pub fn nullspace(&self) -> Vec<Bits> {
        let pivot_mask = self.pivots.iter().fold(0, |m, &p| m | (1 << p));
        (0..self.n)
            .filter(|j| (pivot_mask >> j) & 1 == 0)
            .map(|j| {
                let mut v = 1 << j;
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    if (row.0 >> j) & 1 == 1 {
                        v |= 1 << p;
                    }
                }
                v
            })
            .collect()
    }

    pub fn solution_set(&self) -> Option<AffineSubspaceGF2> {
        let offset = self.particular()?;
        Some(AffineSubspaceGF2 { n: self.n, offset, basis: self.nullspace() })
    }
}

/// `offset + span(basis)` inside GF(2)^n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineSubspaceGF2 {
    pub n: usize,
    pub offset: Bits,
    pub basis: Vec<Bits>,
}

impl AffineSubspaceGF2 {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn size(&self) -> u64 {
        1u64 << self.basis.len()
    }

    pub fn contains(&self, t: Bits) -> bool {
        let mut sys = Gf2System::new(self.n);
        for &b in &self.basis {
            sys.insert(b, false);
        }
        sys.spans(t ^ self.offset)
    }

    /// All members; caller keeps the dimension small.
    pub fn members(&self) -> Vec<Bits> {
        let k = self.basis.len();
        assert!(k <= 24, "refusing to enumerate 2^{k} members");
        (0..1u64 << k)
            .map(|c| {
                self.basis
                    .iter()
                    .enumerate()
                    .fold(self.offset, |acc, (i, &b)| if (c >> i) & 1 == 1 { acc ^ b } else { acc })
            })
            .collect()
    }
}

/// All `t` with `t·x = b` for every sample; `None` when no such `t` exists.
pub fn solve_consistent_parities(n: usize, samples: &[(Bits, bool)]) -> Option<AffineSubspaceGF2> {
    let mut sys = Gf2System::new(n);
    for &(x, b) in samples {
        sys.insert(x, b);
    }
    sys.solution_set()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuadraticSolve {
    /// Upper-triangular rows holding the recovered off-diagonal entries.
    Solved(Vec<Bits>),
    Underdetermined { rank: usize },
}

/// Recovers `B = A + Aᵀ` row by row from pairs `z = B·y`.
pub fn solve_offdiagonal_quadratic(n: usize, samples: &[(Bits, Bits)]) -> Result<QuadraticSolve> {
    let mut span = Gf2System::new(n);
    for &(y, _) in samples {
        span.insert(y, false);
    }
    if span.rank() < n {
        return Ok(QuadraticSolve::Underdetermined { rank: span.rank() });
    }
    let mut b_rows = vec![0; n];
    for (i, row) in b_rows.iter_mut().enumerate() {
        let mut sys = Gf2System::new(n);
        for &(y, z) in samples {
            sys.insert(y, (z >> i) & 1 == 1);
        }
        *row = sys
            .particular()
            .ok_or_else(|| Error::Inconsistent(format!("row {i} of A+Aᵀ has no solution")))?;
    }
    for i in 0..n {
        if (b_rows[i] >> i) & 1 == 1 {
            return Err(Error::Inconsistent(format!("nonzero diagonal at {i}")));
        }
        for j in 0..n {
            if (b_rows[i] >> j) & 1 != (b_rows[j] >> i) & 1 {
                return Err(Error::Inconsistent("recovered matrix is not symmetric".into()));
            }
        }
    }
    Ok(QuadraticSolve::Solved(b_rows.iter().enumerate().map(|(i, &r)| r & !mask(i + 1)).collect()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimonSolve {
    Period(Bits),
    Underdetermined { rank: usize },
}

/// The unique nonzero string orthogonal to samples spanning an (n−1)-dim space.
pub fn solve_simon_nullspace(n: usize, samples: &[Bits]) -> Result<SimonSolve> {
    let mut sys = Gf2System::new(n);
    for &y in samples {
        sys.insert(y, false);
    }
    match sys.rank() {
        r if r == n => Err(Error::Inconsistent("samples span the full space".into())),
        r if r + 1 == n => {
            let s = sys.nullspace()[0];
            debug_assert!(samples.iter().all(|&y| !dot(y, s)));
            Ok(SimonSolve::Period(s))
        }
        r => Ok(SimonSolve::Underdetermined { rank: r }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2core::parse_bits;
    use proptest::prelude::*;

    fn b(s: &str) -> Bits {
        parse_bits(s).unwrap().0
    }

    #[test]
    fn empty_samples_give_full_space() {
        let s = solve_consistent_parities(3, &[]).unwrap();
        assert_eq!(s.dimension(), 3);
        assert_eq!(s.size(), 8);
    }

    #[test]
    fn full_rank_gives_point() {
        let s = solve_consistent_parities(2, &[(b("10"), true), (b("01"), false)]).unwrap();
        assert_eq!(s.members(), vec![b("10")]);
    }

    #[test]
    fn two_constraints_give_four_members() {
        let samples = [(b("1100"), true), (b("0110"), false)];
        let s = solve_consistent_parities(4, &samples).unwrap();
        let mut got = s.members();
        got.sort_unstable();
        let mut brute: Vec<Bits> =
            (0..16).filter(|&t| samples.iter().all(|&(x, y)| dot(t, x) == y)).collect();
        brute.sort_unstable();
        assert_eq!(got, brute);
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn inconsistent_is_none() {
        assert!(solve_consistent_parities(2, &[(b("11"), true), (b("11"), false)]).is_none());
    }

    #[test]
    fn offdiagonal_from_standard_basis() {
        // A12 = 1 only.
        let brows = [b("010"), b("100"), b("000")];
        let samples: Vec<(Bits, Bits)> = (0..3)
            .map(|k| {
                let y = 1u64 << k;
                let z = (0..3).fold(0, |z, i| z | ((dot(brows[i], y) as Bits) << i));
                (y, z)
            })
            .collect();
        assert_eq!(samples[0].1, b("010"));
        assert_eq!(
            solve_offdiagonal_quadratic(3, &samples).unwrap(),
            QuadraticSolve::Solved(vec![b("010"), 0, 0])
        );
    }

    #[test]
    fn offdiagonal_example_product() {
        // (A+Aᵀ) y for A12=1 and y=110 gives 110.
        let brows = [b("010"), b("100"), b("000")];
        let y = b("110");
        let z = (0..3).fold(0, |z, i| z | ((dot(brows[i], y) as Bits) << i));
        assert_eq!(z, b("110"));
    }

    #[test]
    fn offdiagonal_underdetermined_and_faults() {
        assert_eq!(
            solve_offdiagonal_quadratic(3, &[(1, 0), (2, 0)]).unwrap(),
            QuadraticSolve::Underdetermined { rank: 2 }
        );
        // Diagonal bit set in the recovered matrix.
        assert!(solve_offdiagonal_quadratic(2, &[(1, 1), (2, 0)]).is_err());
        // Asymmetric.
        assert!(solve_offdiagonal_quadratic(2, &[(1, 2), (2, 0)]).is_err());
        // Contradictory duplicates.
        assert!(solve_offdiagonal_quadratic(2, &[(1, 2), (2, 1), (1, 0)]).is_err());
    }

    #[test]
    fn simon_examples() {
        assert_eq!(solve_simon_nullspace(2, &[b("10")]).unwrap(), SimonSolve::Period(b("01")));
        let got = solve_simon_nullspace(3, &[b("110"), b("011")]).unwrap();
        let brute: Vec<Bits> = (1..8).filter(|&s| !dot(s, b("110")) && !dot(s, b("011"))).collect();
        assert_eq!(brute, vec![b("111")]);
        assert_eq!(got, SimonSolve::Period(b("111")));
        assert_eq!(solve_simon_nullspace(3, &[b("110")]).unwrap(), SimonSolve::Underdetermined { rank: 1 });
        assert!(solve_simon_nullspace(2, &[b("10"), b("01")]).is_err());
    }

    proptest! {
        #[test]
        fn consistent_parities_match_brute_force(
            n in 1usize..=10,
            raw in proptest::collection::vec((any::<u64>(), any::<bool>()), 0..12),
        ) {
            let samples: Vec<(Bits, bool)> = raw.iter().map(|&(x, y)| (x & mask(n), y)).collect();
            let brute: Vec<Bits> = (0..1u64 << n)
                .filter(|&t| samples.iter().all(|&(x, y)| dot(t, x) == y))
                .collect();
            match solve_consistent_parities(n, &samples) {
                None => prop_assert!(brute.is_empty()),
                Some(s) => {
                    let mut got = s.members();
                    got.sort_unstable();
                    prop_assert_eq!(got, brute);
                }
            }
        }

        #[test]
        fn nullspace_is_orthogonal(n in 1usize..=12, raw in proptest::collection::vec(any::<u64>(), 0..14)) {
            let mut sys = Gf2System::new(n);
            for &r in &raw { sys.insert(r, false); }
            let ns = sys.nullspace();
            prop_assert_eq!(ns.len() + sys.rank(), n);
            for v in ns {
                for &r in &raw { prop_assert!(!dot(v, r & mask(n))); }
            }
        }
    }
}
