//! Boolean-function families and GF(2) linear algebra.
//!
//! Bit-strings are stored in a `u64`: bit `i` holds `x_{i+1}`. The textual form
//! `"101"` lists `x_1 x_2 x_3` left to right.

mod function;
mod linalg;
mod walsh;

pub use function::{Body, BooleanFunction};
pub use linalg::{
    solve_consistent_parities, solve_offdiagonal_quadratic, solve_simon_nullspace, AffineSubspaceGF2,
    Gf2System, QuadraticSolve, SimonSolve,
};
pub use walsh::{forrelation_phi, forrelation_phi_literal, walsh_hadamard};

use crate::error::{Error, Result};

pub type Bits = u64;

#[inline]
pub fn dot(a: Bits, b: Bits) -> bool {
    (a & b).count_ones() & 1 == 1
}

#[inline]
pub fn mask(n: usize) -> Bits {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Key that orders n-bit strings lexicographically in `x_1 … x_n` reading order.
pub fn lex_key(x: Bits, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        x.reverse_bits() >> (64 - n)
    }
}

pub fn bits_to_string(x: Bits, n: usize) -> String {
    (0..n).map(|i| if (x >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Parses `"0110"` into bits and length.
pub fn parse_bits(s: &str) -> Result<(Bits, usize)> {
    if s.len() > 64 {
        return Err(Error::Parse(format!("bit-string longer than 64: {}", s.len())));
    }
    let mut x = 0;
    for (i, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => x |= 1 << i,
            _ => return Err(Error::Parse(format!("bad bit character {c:?}"))),
        }
    }
    Ok((x, s.len()))
}

/// Parses a bit-string and insists on length `n`.
pub fn parse_bits_n(s: &str, n: usize) -> Result<Bits> {
    let (x, len) = parse_bits(s)?;
    if len != n {
        return Err(Error::ArityMismatch { expected: n, got: len });
    }
    Ok(x)
}

pub(crate) fn pack_hex(bits: impl Iterator<Item = bool>, count: usize) -> String {
    let mut bytes = vec![0u8; count.div_ceil(8)];
    for (k, b) in bits.enumerate().take(count) {
        if b {
            bytes[k / 8] |= 1 << (k % 8);
        }
    }
    hex::encode(bytes)
}

pub(crate) fn unpack_hex(s: &str, count: usize) -> Result<Vec<bool>> {
    if s.len() != count.div_ceil(8) * 2 {
        return Err(Error::Parse(format!(
            "hex payload has {} chars, expected {}",
            s.len(),
            count.div_ceil(8) * 2
        )));
    }
    let bytes = hex::decode(s).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((0..count).map(|k| (bytes[k / 8] >> (k % 8)) & 1 == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_string_round_trip() {
        let (x, n) = parse_bits("1011").unwrap();
        assert_eq!(n, 4);
        assert_eq!(x, 0b1101);
        assert_eq!(bits_to_string(x, n), "1011");
        assert!(parse_bits("10a").is_err());
    }

    #[test]
    fn lex_order_reads_left_to_right() {
        let a = parse_bits("011").unwrap().0;
        let b = parse_bits("100").unwrap().0;
        assert!(lex_key(a, 3) < lex_key(b, 3));
    }

    #[test]
    fn hex_packing() {
        let bits = [true, false, false, false, false, false, false, false, true];
        let h = pack_hex(bits.iter().copied(), 9);
        assert_eq!(h, "0101");
        assert_eq!(unpack_hex(&h, 9).unwrap(), bits.to_vec());
        assert!(unpack_hex("01", 9).is_err());
    }
}
