//! Integer combinatorics behind the exponent tables.
//!
//! `P_k(t) = sum_{i=0}^{k} 2^{k-i} (2-t)^i` satisfies
//! `t * P_k(t) = 2^{k+1} - (2-t)^{k+1}`; substituting `2 - t = 1 - u` into
//! `P_{2d}` and reading off the `u^j` coefficients yields the exponent
//! vector `c_j(d) = (-1)^j sum_{i=j}^{2d} 2^{2d-i} C(i, j)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Dense integer polynomial in one variable `t`; index = degree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::new(vec![c.into()])
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(1), |acc, _| acc.mul(self))
    }

    /// `self(inner(t))` by Horner's rule.
    pub fn compose(&self, inner: &Self) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| acc.mul(inner).add(&Self::constant(c.clone())))
    }

    pub fn eval(&self, t: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * t + c)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                _ if a.is_one() => write!(f, "t")?,
                _ => write!(f, "{a}*t")?,
            }
            if i > 1 {
                write!(f, "^{i}")?;
            }
        }
        Ok(())
    }
}

/// Binomial coefficient `C(n, k)` (zero when `k > n`).
pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn pow2(e: u32) -> BigInt {
    BigInt::one() << e
}

/// `P_k(t) = sum_{i=0}^{k} 2^{k-i} (2-t)^i`, expanded in powers of `t`.
pub fn pk_poly(k: u32) -> IntPoly {
    let two_minus_t = IntPoly::from_i64(&[2, -1]);
    // Horner in (2 - t): P_k = 2^k + (2-t) (2^{k-1} + (2-t)(...))
    (0..=k).fold(IntPoly::zero(), |acc, i| {
        acc.mul(&two_minus_t).add(&IntPoly::constant(pow2(i)))
    })
}

/// Whether `t * P_k(t) == 2^{k+1} - (2-t)^{k+1}` as integer polynomials.
pub fn pk_identity_check(k: u32) -> bool {
    let lhs = IntPoly::t().mul(&pk_poly(k));
    let rhs = IntPoly::constant(pow2(k + 1)).sub(&IntPoly::from_i64(&[2, -1]).pow(k + 1));
    lhs == rhs
}

/// Exponent vector `c_0 .. c_{2d}` indexed by symmetric-power degree `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoeffTable {
    pub dim: u32,
    #[serde(serialize_with = "decimal_strings")]
    pub entries: Vec<BigInt>,
}

fn decimal_strings<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}

impl CoeffTable {
    pub fn entry(&self, j: usize) -> &BigInt {
        &self.entries[j]
    }

    /// Entries as decimal strings, for JSON output.
    pub fn entry_strings(&self) -> Vec<String> {
        self.entries.iter().map(ToString::to_string).collect()
    }
}

/// Unfolded `(i, j)` matrix with entries `2^{2d-i} (-1)^j C(i, j)` for
/// `0 <= j <= i <= 2d` (zero above the diagonal).
pub fn coeff_matrix(d: u32) -> Vec<Vec<BigInt>> {
    let n = 2 * d;
    (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| {
                    if j > i {
                        BigInt::zero()
                    } else {
                        let sign = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                        pow2(n - i) * sign * binomial(i, j)
                    }
                })
                .collect()
        })
        .collect()
}

/// Column sums of [`coeff_matrix`], with no check on `d`.
///
/// `d = 0` is accepted here so the degenerate case can be examined
/// deliberately; [`coeff_table`] refuses it.
pub fn exponent_entries(d: u32) -> Vec<BigInt> {
    let m = coeff_matrix(d);
    (0..=2 * d as usize)
        .map(|j| m.iter().map(|row| &row[j]).sum())
        .collect()
}

/// The exponent table for relative dimension `d >= 1`.
pub fn coeff_table(d: u32) -> Result<CoeffTable> {
    if d == 0 {
        return Err(Error::Domain(
            "relative dimension 0 is rejected: the degenerate table [1] does not give an identity".into(),
        ));
    }
    Ok(CoeffTable {
        dim: d,
        entries: exponent_entries(d),
    })
}

/// Whether expanding `P_{2d}` at `2 - t = 1 - u` reproduces the table.
///
/// This is the route through the virtual class `O - N{-1}`: each
/// `(O - N{-1})^i` expands binomially, and the `u^j` coefficient collects
/// the `N{-1}^j` multiplicity.
pub fn binomial_expansion_check(d: u32) -> Result<bool> {
    let table = coeff_table(d)?;
    let substituted = pk_poly(2 * d).compose(&IntPoly::from_i64(&[1, 1]));
    Ok((0..=2 * d as usize).all(|j| substituted.coeff(j) == table.entries[j])
        && substituted.degree() == Some(2 * d as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Oracle: expand each 2^{k-i}(2-t)^i term by the binomial theorem directly.
    fn pk_oracle(k: u32) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); k as usize + 1];
        for i in 0..=k {
            for m in 0..=i {
                let sign = if m % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                out[m as usize] += pow2(k - i) * binomial(i, m) * pow2(i - m) * sign;
            }
        }
        out
    }

    // Oracle: the raw double sum, by brute force.
    fn table_oracle(d: u32) -> Vec<i64> {
        let n = 2 * d;
        (0..=n)
            .map(|j| {
                let s: i64 = (j..=n)
                    .map(|i| (1i64 << (n - i)) * binom_i64(i, j))
                    .sum();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect()
    }

    fn binom_i64(n: u32, k: u32) -> i64 {
        (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
    }

    #[test]
    fn pk_small_cases() {
        assert_eq!(pk_poly(0), IntPoly::from_i64(&[1]));
        assert_eq!(pk_poly(1), IntPoly::from_i64(&[4, -1]));
    }

    #[test]
    fn pk_five_matches_direct_expansion() {
        let frozen = IntPoly::from_i64(&[192, -240, 160, -60, 12, -1]);
        assert_eq!(IntPoly::new(pk_oracle(5)), frozen);
        assert_eq!(pk_poly(5), frozen);
    }

    #[test]
    fn pk_matches_oracle_up_to_twenty() {
        for k in 0..=20 {
            assert_eq!(pk_poly(k), IntPoly::new(pk_oracle(k)), "k = {k}");
        }
    }

    #[test]
    fn pk_identity_holds() {
        for k in [0, 1, 2, 17, 64] {
            assert!(pk_identity_check(k), "k = {k}");
        }
    }

    #[test]
    fn coeff_table_examples() {
        let to_i64 = |t: CoeffTable| -> Vec<i64> {
            t.entries.iter().map(|c| c.try_into().unwrap()).collect()
        };
        assert_eq!(to_i64(coeff_table(1).unwrap()), vec![7, -4, 1]);
        assert_eq!(to_i64(coeff_table(2).unwrap()), vec![31, -26, 16, -6, 1]);
        let frozen = vec![127, -120, 99, -64, 29, -8, 1];
        assert_eq!(table_oracle(3), frozen);
        assert_eq!(to_i64(coeff_table(3).unwrap()), frozen);
        assert!(matches!(coeff_table(0), Err(Error::Domain(_))));
    }

    #[test]
    fn coeff_table_invariants() {
        for d in 1..=16u32 {
            let t = coeff_table(d).unwrap();
            let sum: BigInt = t.entries.iter().sum();
            assert_eq!(sum, pow2(2 * d), "sum, d = {d}");
            assert_eq!(t.entries[0], pow2(2 * d + 1) - 1, "c_0, d = {d}");
            assert!(t.entries[2 * d as usize].is_one(), "c_2d, d = {d}");
            for (j, c) in t.entries.iter().enumerate() {
                assert_eq!(c.is_negative(), j % 2 == 1, "sign of c_{j}, d = {d}");
            }
        }
    }

    #[test]
    fn matrix_folds_to_table() {
        let m = coeff_matrix(1);
        assert_eq!(m[0][0], BigInt::from(4));
        assert_eq!(m[2][1], BigInt::from(-2));
        assert_eq!(m[1][2], BigInt::zero());
    }

    #[test]
    fn binomial_expansion_agrees() {
        for d in 1..=8 {
            assert!(binomial_expansion_check(d).unwrap(), "d = {d}");
        }
        assert!(binomial_expansion_check(0).is_err());
    }

    #[test]
    fn compose_and_eval() {
        let p = IntPoly::from_i64(&[1, 2, 3]);
        let q = IntPoly::from_i64(&[0, 1, 1]);
        let r = p.compose(&q);
        for x in -3..=3 {
            let x = BigInt::from(x);
            assert_eq!(r.eval(&x), p.eval(&q.eval(&x)));
        }
        assert_eq!(format!("{}", IntPoly::from_i64(&[4, -1, 0, 2])), "4 - t + 2*t^3");
    }
}
