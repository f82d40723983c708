//! Exact rational scalars and truncated multivariate polynomial arithmetic.
//!
//! Every characteristic-class computation in the crate runs on
//! [`TruncatedSeries`]: a sparse polynomial over `Q` in weighted variables,
//! with every monomial of weighted degree above a fixed bound discarded.
//! Monomials are keyed by their exponent vectors in a `BTreeMap`, so iteration
//! (and therefore every serialized report) is deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Builds a rational from a machine integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Builds the rational `num / den`. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `n!` as an exact integer.
pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub weight: u32,
}

/// Ordered list of named generators with positive weights.
///
/// The weight of a generator is its cohomological degree; a Chern class
/// `c_k` used as a generator has weight `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarTable {
    vars: Vec<Var>,
}

impl VarTable {
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = (S, u32)>) -> Result<Self> {
        let vars: Vec<Var> = vars
            .into_iter()
            .map(|(name, weight)| Var {
                name: name.into(),
                weight,
            })
            .collect();
        for (i, v) in vars.iter().enumerate() {
            if v.weight == 0 {
                return Err(Error::Domain(format!("variable `{}` has weight 0", v.name)));
            }
            if v.name.is_empty() {
                return Err(Error::Domain("empty variable name".into()));
            }
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::Domain(format!("duplicate variable `{}`", v.name)));
            }
        }
        Ok(Self { vars })
    }

    /// All variables of weight one.
    pub fn uniform<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(names.into_iter().map(|n| (n, 1)))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.vars[i].weight
    }

    pub fn name(&self, i: usize) -> &str {
        &self.vars[i].name
    }

    pub fn max_weight(&self) -> u32 {
        self.vars.iter().map(|v| v.weight).max().unwrap_or(1)
    }

    /// Weighted total degree of an exponent vector.
    pub fn degree(&self, exps: &[u32]) -> u32 {
        exps.iter()
            .zip(&self.vars)
            .map(|(e, v)| e * v.weight)
            .sum()
    }
}

/// One serialized term of a series: `{exponents, num, den}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub exponents: Vec<u32>,
    pub num: String,
    pub den: String,
}

/// Sparse polynomial over `Q`, truncated above a weighted total degree.
///
/// Invariants: every stored monomial has weighted degree `<= bound`, and no
/// stored coefficient is zero.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    vars: Arc<VarTable>,
    bound: u32,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl TruncatedSeries {
    pub fn zero(vars: Arc<VarTable>, bound: u32) -> Self {
        Self {
            vars,
            bound,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Arc<VarTable>, bound: u32, c: Rational) -> Self {
        let mut s = Self::zero(vars, bound);
        let n = s.vars.len();
        s.add_term(vec![0; n], c);
        s
    }

    pub fn one(vars: Arc<VarTable>, bound: u32) -> Self {
        Self::constant(vars, bound, Rational::one())
    }

    /// The generator `name`, or an error if it is not in the table.
    pub fn var(vars: Arc<VarTable>, bound: u32, name: &str) -> Result<Self> {
        let i = vars
            .index_of(name)
            .ok_or_else(|| Error::Domain(format!("unknown variable `{name}`")))?;
        let mut exps = vec![0; vars.len()];
        exps[i] = 1;
        let mut s = Self::zero(vars, bound);
        s.add_term(exps, Rational::one());
        Ok(s)
    }

    /// Single monomial `c * x^exps`; dropped if above the bound.
    pub fn monomial(vars: Arc<VarTable>, bound: u32, exps: Vec<u32>, c: Rational) -> Result<Self> {
        if exps.len() != vars.len() {
            return Err(Error::Structural(format!(
                "exponent vector of length {} for {} variables",
                exps.len(),
                vars.len()
            )));
        }
        let mut s = Self::zero(vars, bound);
        s.add_term(exps, c);
        Ok(s)
    }

    /// Builds a series from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms(
        vars: Arc<VarTable>,
        bound: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<Self> {
        let mut s = Self::zero(vars, bound);
        for (exps, c) in terms {
            if exps.len() != s.vars.len() {
                return Err(Error::Structural(format!(
                    "exponent vector of length {} for {} variables",
                    exps.len(),
                    s.vars.len()
                )));
            }
            s.add_term(exps, c);
        }
        Ok(s)
    }

    /// Adds `c * x^exps` in place, honouring truncation and zero-pruning.
    pub fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        if c.is_zero() || self.vars.degree(&exps) > self.bound {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.vars.len()])
    }

    pub fn degree_of(&self, exps: &[u32]) -> u32 {
        self.vars.degree(exps)
    }

    /// Largest weighted degree carrying a nonzero coefficient.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| self.vars.degree(e)).max()
    }

    /// Smallest weighted degree carrying a nonzero coefficient.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| self.vars.degree(e)).min()
    }

    /// Homogeneous part of weighted degree `k`.
    pub fn component(&self, k: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| self.vars.degree(e) == k)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self {
            vars: self.vars.clone(),
            bound: self.bound,
            terms,
        }
    }

    /// Re-truncates at a new bound (may be larger; no terms are invented).
    pub fn truncate(&self, bound: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| self.vars.degree(e) <= bound)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self {
            vars: self.vars.clone(),
            bound,
            terms,
        }
    }

    /// Multiplies the degree-`k` component by `f(k)`.
    pub fn map_components(&self, mut f: impl FnMut(u32) -> Rational) -> Self {
        let mut out = Self::zero(self.vars.clone(), self.bound);
        for (e, c) in &self.terms {
            let k = self.vars.degree(e);
            out.add_term(e.clone(), c * f(k));
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars.clone(), self.bound);
        }
        Self {
            vars: self.vars.clone(),
            bound: self.bound,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.vars, &other.vars) && *self.vars != *other.vars {
            return Err(Error::Structural("operands use different variable tables".into()));
        }
        if self.bound != other.bound {
            return Err(Error::Structural(format!(
                "operands truncated at different bounds ({} vs {})",
                self.bound, other.bound
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    /// Truncated product. Terms are bucketed by degree so pairs whose degrees
    /// already exceed the bound are never formed.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let bound = self.bound as usize;
        let mut lhs: Vec<Vec<(&Vec<u32>, &Rational)>> = vec![Vec::new(); bound + 1];
        for (e, c) in &self.terms {
            lhs[self.vars.degree(e) as usize].push((e, c));
        }
        let mut rhs: Vec<Vec<(&Vec<u32>, &Rational)>> = vec![Vec::new(); bound + 1];
        for (e, c) in &other.terms {
            rhs[self.vars.degree(e) as usize].push((e, c));
        }
        let mut acc: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (da, bucket_a) in lhs.iter().enumerate() {
            for bucket_b in rhs.iter().take(bound - da + 1) {
                for (ea, ca) in bucket_a {
                    for (eb, cb) in bucket_b {
                        let e: Vec<u32> = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                        let p = *ca * *cb;
                        *acc.entry(e).or_insert_with(Rational::zero) += p;
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Self {
            vars: self.vars.clone(),
            bound: self.bound,
            terms: acc,
        })
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(self.vars.clone(), self.bound);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// `exp(a) = sum a^k / k!`; requires zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::Domain("exp of a series with nonzero constant term".into()));
        }
        let mut sum = Self::one(self.vars.clone(), self.bound);
        let mut term = sum.clone();
        for k in 1..=self.bound {
            term = (&term * self).scale(&Rational::new(BigInt::one(), BigInt::from(k)));
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
        }
        Ok(sum)
    }

    /// Multiplicative inverse up to the bound; requires nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::Domain("inverse of a series with zero constant term".into()));
        }
        let inv_c0 = c0.recip();
        // a = c0 (1 - u)  =>  1/a = (1/c0) * sum u^k
        let one = Self::one(self.vars.clone(), self.bound);
        let u = &one - &self.scale(&inv_c0);
        let mut sum = one.clone();
        let mut power = one;
        for _ in 1..=self.bound {
            power = &power * &u;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.scale(&inv_c0))
    }

    /// `log(a)` for `a` with constant term 1.
    pub fn log(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(Error::Domain("log of a series whose constant term is not 1".into()));
        }
        let one = Self::one(self.vars.clone(), self.bound);
        let u = self - &one;
        let mut sum = Self::zero(self.vars.clone(), self.bound);
        let mut power = one;
        for k in 1..=self.bound {
            power = &power * &u;
            if power.is_zero() {
                break;
            }
            let c = Rational::new(if k % 2 == 1 { BigInt::one() } else { -BigInt::one() }, BigInt::from(k));
            sum = &sum + &power.scale(&c);
        }
        Ok(sum)
    }

    /// Terms in the deterministic report order: by weighted degree, then
    /// lexicographically by exponent vector.
    pub fn sorted_terms(&self) -> Vec<(&Vec<u32>, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            self.vars
                .degree(a)
                .cmp(&self.vars.degree(b))
                .then_with(|| a.cmp(b))
        });
        v
    }

    pub fn to_terms(&self) -> Vec<SeriesTerm> {
        self.sorted_terms()
            .into_iter()
            .map(|(e, c)| SeriesTerm {
                exponents: e.clone(),
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect()
    }

    pub fn from_serialized(vars: Arc<VarTable>, bound: u32, terms: &[SeriesTerm]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|t| {
                let num: BigInt = t
                    .num
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad numerator `{}`", t.num)))?;
                let den: BigInt = t
                    .den
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad denominator `{}`", t.den)))?;
                if den.is_zero() {
                    return Err(Error::Parse("zero denominator".into()));
                }
                Ok((t.exponents.clone(), Rational::new(num, den)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(vars, bound, parsed)
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedSeries[≤{}]({})", self.bound, self)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sorted_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(j, &p)| {
                    if p == 1 {
                        self.vars.name(j).to_string()
                    } else {
                        format!("{}^{}", self.vars.name(j), p)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", abs, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

// Operator sugar for internal use: operands from the same computation always
// share a table and bound, so a mismatch here is a programming error.
impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.checked_add(rhs).expect("series addition")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.checked_sub(rhs).expect("series subtraction")
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.checked_mul(rhs).expect("series multiplication")
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(&-Rational::one())
    }
}

/// Truncated product; errors on mismatched variable tables or bounds.
pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    a.checked_mul(b)
}

/// Truncated exponential; errors on a nonzero constant term.
pub fn series_exp(a: &TruncatedSeries) -> Result<TruncatedSeries> {
    a.exp()
}

/// Truncated multiplicative inverse; errors on a zero constant term.
pub fn series_inverse(a: &TruncatedSeries) -> Result<TruncatedSeries> {
    a.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x_table() -> Arc<VarTable> {
        Arc::new(VarTable::uniform(["x"]).unwrap())
    }

    fn xy_table() -> Arc<VarTable> {
        Arc::new(VarTable::uniform(["x", "y"]).unwrap())
    }

    fn uni(coeffs: &[Rational], bound: u32) -> TruncatedSeries {
        TruncatedSeries::from_terms(
            x_table(),
            bound,
            coeffs.iter().enumerate().map(|(i, c)| (vec![i as u32], c.clone())),
        )
        .unwrap()
    }

    #[test]
    fn var_table_rejects_bad_input() {
        assert!(VarTable::new([("x", 0)]).is_err());
        assert!(VarTable::new([("x", 1), ("x", 2)]).is_err());
        let t = VarTable::new([("c1", 1), ("c2", 2)]).unwrap();
        assert_eq!(t.degree(&[2, 1]), 4);
    }

    #[test]
    fn difference_of_squares() {
        let p = uni(&[rat(1), rat(1)], 2);
        let m = uni(&[rat(1), rat(-1)], 2);
        assert_eq!(series_mul(&p, &m).unwrap(), uni(&[rat(1), rat(0), rat(-1)], 2));
    }

    #[test]
    fn truncation_discards_overflow() {
        let p = uni(&[rat(1), rat(1)], 1);
        assert_eq!(series_mul(&p, &p).unwrap(), uni(&[rat(1), rat(2)], 1));
    }

    #[test]
    fn exp_factors_cancel_to_bound() {
        // e_{<=3}(x) e_{<=3}(-x): the residue sits in degrees >= 4, all truncated.
        let e = uni(&[rat(1), rat(1), ratio(1, 2), ratio(1, 6)], 3);
        let f = uni(&[rat(1), rat(-1), ratio(1, 2), ratio(-1, 6)], 3);
        assert_eq!(series_mul(&e, &f).unwrap(), TruncatedSeries::one(x_table(), 3));
    }

    #[test]
    fn mismatched_operands_are_structural_errors() {
        let a = TruncatedSeries::one(x_table(), 2);
        let b = TruncatedSeries::one(x_table(), 3);
        assert!(matches!(series_mul(&a, &b), Err(Error::Structural(_))));
        let c = TruncatedSeries::one(xy_table(), 2);
        assert!(matches!(series_mul(&a, &c), Err(Error::Structural(_))));
    }

    #[test]
    fn exp_examples() {
        let zero = TruncatedSeries::zero(x_table(), 4);
        assert_eq!(series_exp(&zero).unwrap(), TruncatedSeries::one(x_table(), 4));
        let x = TruncatedSeries::var(x_table(), 2, "x").unwrap();
        assert_eq!(series_exp(&x).unwrap(), uni(&[rat(1), rat(1), ratio(1, 2)], 2));

        let t = xy_table();
        let x = TruncatedSeries::var(t.clone(), 2, "x").unwrap();
        let y = TruncatedSeries::var(t, 2, "y").unwrap();
        let lhs = series_exp(&(&x + &y)).unwrap();
        let rhs = &series_exp(&x).unwrap() * &series_exp(&y).unwrap();
        assert_eq!(lhs, rhs);

        let one = TruncatedSeries::one(x_table(), 2);
        assert!(matches!(series_exp(&one), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_examples() {
        let one = TruncatedSeries::one(x_table(), 3);
        assert_eq!(series_inverse(&one).unwrap(), one);
        let geo = uni(&[rat(1), rat(-1)], 3);
        assert_eq!(series_inverse(&geo).unwrap(), uni(&vec![rat(1); 4], 3));
        // b0 = 1, b1 = -1, b2 = -(b1 + b0/2) = 1/2
        let e = uni(&[rat(1), rat(1), ratio(1, 2)], 2);
        assert_eq!(series_inverse(&e).unwrap(), uni(&[rat(1), rat(-1), ratio(1, 2)], 2));
        let x = TruncatedSeries::var(x_table(), 3, "x").unwrap();
        assert!(matches!(series_inverse(&x), Err(Error::Domain(_))));
    }

    #[test]
    fn log_inverts_exp() {
        let t = xy_table();
        let a = TruncatedSeries::from_terms(
            t,
            4,
            [(vec![1, 0], rat(2)), (vec![1, 1], ratio(-1, 3)), (vec![0, 3], rat(5))],
        )
        .unwrap();
        assert_eq!(a.exp().unwrap().log().unwrap(), a);
    }

    #[test]
    fn weighted_truncation() {
        let t = Arc::new(VarTable::new([("c1", 1), ("c2", 2)]).unwrap());
        let c1 = TruncatedSeries::var(t.clone(), 3, "c1").unwrap();
        let c2 = TruncatedSeries::var(t, 3, "c2").unwrap();
        assert_eq!((&c1 * &c2).max_degree(), Some(3));
        assert!((&c2 * &c2).is_zero());
    }

    #[test]
    fn serialization_order_is_by_degree() {
        let t = xy_table();
        let s = TruncatedSeries::from_terms(
            t.clone(),
            3,
            [(vec![0, 2], rat(1)), (vec![1, 0], ratio(-3, 4)), (vec![0, 0], rat(7))],
        )
        .unwrap();
        let terms = s.to_terms();
        assert_eq!(terms[0].exponents, vec![0, 0]);
        assert_eq!(terms[1].exponents, vec![1, 0]);
        assert_eq!((terms[1].num.as_str(), terms[1].den.as_str()), ("-3", "4"));
        assert_eq!(terms[2].exponents, vec![0, 2]);
        assert_eq!(TruncatedSeries::from_serialized(t, 3, &terms).unwrap(), s);
    }

    fn arb_series(bound: u32) -> impl Strategy<Value = TruncatedSeries> {
        prop::collection::vec(((0u32..4, 0u32..4, 0u32..3), -6i64..7, 1i64..4), 0..7).prop_map(
            move |raw| {
                let t = Arc::new(VarTable::new([("x", 1), ("y", 1), ("z", 2)]).unwrap());
                TruncatedSeries::from_terms(
                    t,
                    bound,
                    raw.into_iter()
                        .map(|((a, b, c), n, d)| (vec![a, b, c], ratio(n, d))),
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_series(4), b in arb_series(4), c in arb_series(4)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn truncation_coherence(a in arb_series(6), b in arb_series(6), n in 0u32..6) {
            let full = (&a * &b).truncate(n);
            let pre = &a.truncate(n) * &b.truncate(n);
            prop_assert_eq!(full, pre);
        }

        #[test]
        fn inverse_is_two_sided(a in arb_series(4), c0 in 1i64..5) {
            let one = TruncatedSeries::one(a.vars().clone(), 4);
            let shifted = &(&a - &TruncatedSeries::constant(a.vars().clone(), 4, a.constant_term())) + &one.scale(&rat(c0));
            let inv = series_inverse(&shifted).unwrap();
            prop_assert_eq!(&shifted * &inv, one.clone());
            prop_assert_eq!(&inv * &shifted, one);
        }

        #[test]
        fn exp_is_a_homomorphism(a in arb_series(4), b in arb_series(4)) {
            let strip = |s: &TruncatedSeries| s - &TruncatedSeries::constant(s.vars().clone(), 4, s.constant_term());
            let (a, b) = (strip(&a), strip(&b));
            prop_assert_eq!(series_exp(&(&a + &b)).unwrap(), &series_exp(&a).unwrap() * &series_exp(&b).unwrap());
        }
    }
}
