//! Chern character, Todd class, Adams operations and symmetric powers.
//!
//! Everything is driven by power sums: Newton's recurrence turns a total
//! Chern class into power sums `p_k`, from which `ch = rank + sum p_k / k!`
//! and `Td = exp(sum l_k p_k)` with `l_k` the Taylor coefficients of
//! `log(x / (1 - e^{-x}))`. No Chern roots are ever needed.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactalg::{factorial, rat, Rational, TruncatedSeries, VarTable};

/// A characteristic class: a truncated series plus its degree bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharClass {
    pub carrier: TruncatedSeries,
}

impl CharClass {
    pub fn new(carrier: TruncatedSeries) -> Self {
        Self { carrier }
    }

    pub fn degree_bound(&self) -> u32 {
        self.carrier.bound()
    }

    pub fn component(&self, k: u32) -> TruncatedSeries {
        self.carrier.component(k)
    }

    /// Components `0..=degree_bound`, in order.
    pub fn components(&self) -> Vec<TruncatedSeries> {
        (0..=self.degree_bound()).map(|k| self.component(k)).collect()
    }

    pub fn rank(&self) -> Rational {
        self.carrier.constant_term()
    }
}

impl From<TruncatedSeries> for CharClass {
    fn from(carrier: TruncatedSeries) -> Self {
        Self { carrier }
    }
}

fn require_unit(c: &TruncatedSeries) -> Result<()> {
    if !c.constant_term().is_one() {
        return Err(Error::Domain("total Chern class must have constant term 1".into()));
    }
    Ok(())
}

/// Power sums `p_1 ..= p_bound` of the Chern roots, by Newton's recurrence
/// `p_k = sum_{i<k} (-1)^{i-1} e_i p_{k-i} + (-1)^{k-1} k e_k`.
pub fn power_sums(c: &TruncatedSeries) -> Vec<TruncatedSeries> {
    let n = c.bound();
    let e: Vec<TruncatedSeries> = (0..=n).map(|k| c.component(k)).collect();
    let mut p: Vec<TruncatedSeries> = vec![TruncatedSeries::zero(c.vars().clone(), n)];
    for k in 1..=n as usize {
        let mut pk = e[k].scale(&rat(if k % 2 == 1 { k as i64 } else { -(k as i64) }));
        for i in 1..k {
            let t = &e[i] * &p[k - i];
            pk = if i % 2 == 1 { &pk + &t } else { &pk - &t };
        }
        p.push(pk);
    }
    p.remove(0);
    p
}

/// `ch = rank + sum_k p_k / k!` for a bundle with total Chern class `c`.
pub fn ch_from_chern(rank: i64, c: &TruncatedSeries) -> Result<CharClass> {
    require_unit(c)?;
    let mut ch = TruncatedSeries::constant(c.vars().clone(), c.bound(), rat(rank));
    for (k, pk) in power_sums(c).iter().enumerate() {
        let f = Rational::from_integer(factorial(k as u32 + 1)).recip();
        ch = &ch + &pk.scale(&f);
    }
    Ok(CharClass::new(ch))
}

/// Coefficients `l_1 ..= l_n` of `log(x / (1 - e^{-x})) = sum l_k x^k`.
pub fn todd_log_coefficients(n: u32) -> Vec<Rational> {
    let table = Arc::new(VarTable::uniform(["x"]).expect("single variable"));
    // (1 - e^{-x}) / x = sum_{m>=0} (-1)^m x^m / (m+1)!
    let denom = TruncatedSeries::from_terms(
        table,
        n,
        (0..=n).map(|m| {
            let sign = if m % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            (vec![m], Rational::new(sign, factorial(m + 1)))
        }),
    )
    .expect("well-formed univariate series");
    let todd = denom.inverse().expect("unit constant term");
    let log = todd.log().expect("constant term 1");
    (1..=n).map(|k| log.coeff(&[k])).collect()
}

/// Todd class of a bundle with total Chern class `c`.
pub fn todd_from_chern(c: &TruncatedSeries) -> Result<CharClass> {
    require_unit(c)?;
    let l = todd_log_coefficients(c.bound());
    let mut sum = TruncatedSeries::zero(c.vars().clone(), c.bound());
    for (pk, lk) in power_sums(c).iter().zip(&l) {
        if !lk.is_zero() {
            sum = &sum + &pk.scale(lk);
        }
    }
    Ok(CharClass::new(sum.exp()?))
}

/// `psi^m`: multiplies the degree-`k` component by `m^k`. Negative `m` is
/// allowed; `psi^{-1}` is the dual.
pub fn adams_rescale(c: &CharClass, m: i64) -> CharClass {
    let m = rat(m);
    CharClass::new(c.carrier.map_components(|k| num_traits::pow(m.clone(), k as usize)))
}

/// `ch` of the dual bundle.
pub fn dual_ch(c: &CharClass) -> CharClass {
    adams_rescale(c, -1)
}

/// `ch(Sym^j E)` from `ch E` alone, via `j h_j = sum_{m=1}^{j} psi^m(ch E) h_{j-m}`,
/// the coefficient recurrence of `exp(sum_m t^m psi^m / m)`.
pub fn sym_ch(e: &CharClass, j: u32) -> CharClass {
    sym_ch_all(e, j).pop().expect("at least h_0")
}

/// `ch(Sym^0 E) ..= ch(Sym^j E)` in one pass.
pub fn sym_ch_all(e: &CharClass, j: u32) -> Vec<CharClass> {
    let vars = e.carrier.vars().clone();
    let bound = e.carrier.bound();
    let psi: Vec<TruncatedSeries> = (1..=j as i64).map(|m| adams_rescale(e, m).carrier).collect();
    let mut h = vec![TruncatedSeries::one(vars.clone(), bound)];
    for n in 1..=j as usize {
        let mut acc = TruncatedSeries::zero(vars.clone(), bound);
        for m in 1..=n {
            acc = &acc + &(&psi[m - 1] * &h[n - m]);
        }
        h.push(acc.scale(&rat(n as i64).recip()));
    }
    h.into_iter().map(CharClass::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::ratio;
    use proptest::prelude::*;

    fn table(names: &[(&str, u32)]) -> Arc<VarTable> {
        Arc::new(VarTable::new(names.iter().cloned()).unwrap())
    }

    fn var(t: &Arc<VarTable>, b: u32, n: &str) -> TruncatedSeries {
        TruncatedSeries::var(t.clone(), b, n).unwrap()
    }

    fn one(t: &Arc<VarTable>, b: u32) -> TruncatedSeries {
        TruncatedSeries::one(t.clone(), b)
    }

    // Oracle: the exponential of a single root, by Taylor coefficients.
    fn exp_oracle(x: &TruncatedSeries) -> TruncatedSeries {
        let mut acc = TruncatedSeries::zero(x.vars().clone(), x.bound());
        for k in 0..=x.bound() {
            acc = &acc + &x.pow(k).scale(&Rational::from_integer(factorial(k)).recip());
        }
        acc
    }

    // Oracle: single-root Todd factor x / (1 - e^{-x}) by Bernoulli numbers
    // B_0..B_4 = 1, 1/2 (sign for e^{-x}), 1/6, 0, -1/30.
    fn todd_root_oracle(x: &TruncatedSeries) -> TruncatedSeries {
        let coeffs = [rat(1), ratio(1, 2), ratio(1, 12), rat(0), ratio(-1, 720)];
        let mut acc = TruncatedSeries::zero(x.vars().clone(), x.bound());
        for (k, c) in coeffs.iter().enumerate().take(x.bound() as usize + 1) {
            acc = &acc + &x.pow(k as u32).scale(c);
        }
        acc
    }

    #[test]
    fn log_coefficients() {
        let l = todd_log_coefficients(4);
        assert_eq!(l[0], ratio(1, 2));
        assert_eq!(l[1], ratio(-1, 24));
        assert_eq!(l[2], rat(0));
        assert_eq!(l[3], ratio(1, 2880));
    }

    #[test]
    fn ch_of_line() {
        let t = table(&[("l", 1)]);
        let l = var(&t, 4, "l");
        let c = &one(&t, 4) + &l;
        assert_eq!(ch_from_chern(1, &c).unwrap().carrier, exp_oracle(&l));
    }

    #[test]
    fn ch_rank_two() {
        let t = table(&[("c1", 1), ("c2", 2)]);
        let (c1, c2) = (var(&t, 2, "c1"), var(&t, 2, "c2"));
        let c = &(&one(&t, 2) + &c1) + &c2;
        let expect = &(&TruncatedSeries::constant(t.clone(), 2, rat(2)) + &c1)
            + &(&(&c1 * &c1) - &c2.scale(&rat(2))).scale(&ratio(1, 2));
        assert_eq!(ch_from_chern(2, &c).unwrap().carrier, expect);
    }

    #[test]
    fn ch_trivial_bundle() {
        let t = table(&[("x", 1)]);
        let ch = ch_from_chern(5, &one(&t, 3)).unwrap();
        assert_eq!(ch.carrier, TruncatedSeries::constant(t, 3, rat(5)));
        let bad = TruncatedSeries::constant(table(&[("x", 1)]), 3, rat(2));
        assert!(ch_from_chern(1, &bad).is_err());
    }

    #[test]
    fn todd_examples() {
        let t = table(&[("x", 1)]);
        assert_eq!(todd_from_chern(&one(&t, 3)).unwrap().carrier, one(&t, 3));
        let x = var(&t, 2, "x");
        let td = todd_from_chern(&(&one(&t, 2) + &x)).unwrap();
        let expect = &(&one(&t, 2) + &x.scale(&ratio(1, 2))) + &(&x * &x).scale(&ratio(1, 12));
        assert_eq!(td.carrier, expect);

        let t2 = table(&[("c1", 1), ("c2", 2)]);
        let (c1, c2) = (var(&t2, 2, "c1"), var(&t2, 2, "c2"));
        let td = todd_from_chern(&(&(&one(&t2, 2) + &c1) + &c2)).unwrap();
        let expect = &(&one(&t2, 2) + &c1.scale(&ratio(1, 2)))
            + &(&(&c1 * &c1) + &c2).scale(&ratio(1, 12));
        assert_eq!(td.carrier, expect);
    }

    #[test]
    fn sym_examples() {
        let t = table(&[("a", 1), ("b", 1)]);
        let a = var(&t, 3, "a");
        let ch = CharClass::new(exp_oracle(&a));
        assert_eq!(sym_ch(&ch, 0).carrier, one(&t, 3));
        assert_eq!(sym_ch(&ch, 1), ch);
        assert_eq!(sym_ch(&ch, 3).carrier, exp_oracle(&a.scale(&rat(3))));
    }

    #[test]
    fn sym_of_split_rank_two() {
        let t = table(&[("a", 1), ("b", 1)]);
        let (a, b) = (var(&t, 4, "a"), var(&t, 4, "b"));
        let ch = CharClass::new(&exp_oracle(&a) + &exp_oracle(&b));
        for j in 0..=4u32 {
            let mut expect = TruncatedSeries::zero(t.clone(), 4);
            for p in 0..=j {
                let root = &a.scale(&rat(p as i64)) + &b.scale(&rat((j - p) as i64));
                expect = &expect + &exp_oracle(&root);
            }
            assert_eq!(sym_ch(&ch, j).carrier, expect, "j = {j}");
        }
    }

    #[test]
    fn adams_examples() {
        let t = table(&[("l", 1), ("c1", 1), ("c2", 2)]);
        let l = var(&t, 3, "l");
        let e = CharClass::new(exp_oracle(&l));
        assert_eq!(adams_rescale(&e, 2).carrier, exp_oracle(&l.scale(&rat(2))));
        let unit = CharClass::new(one(&t, 3));
        assert_eq!(adams_rescale(&unit, 7), unit);
        let c = &(&one(&t, 3) + &var(&t, 3, "c1")) + &var(&t, 3, "c2");
        let ch = ch_from_chern(2, &c).unwrap();
        assert_eq!(adams_rescale(&ch, 2).component(1), ch.component(1).scale(&rat(2)));
        assert_eq!(dual_ch(&e).carrier, exp_oracle(&-&l));
    }

    fn roots(n: usize, bound: u32) -> (Arc<VarTable>, Vec<TruncatedSeries>) {
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let t = Arc::new(VarTable::uniform(names.clone()).unwrap());
        let xs = names.iter().map(|nm| var(&t, bound, nm)).collect();
        (t, xs)
    }

    proptest! {
        #[test]
        fn ch_is_multiplicative_on_lines(u in -3i64..4, v in -3i64..4, w in -3i64..4, z in -3i64..4) {
            let (t, xs) = roots(2, 4);
            let l = &xs[0].scale(&rat(u)) + &xs[1].scale(&rat(v));
            let m = &xs[0].scale(&rat(w)) + &xs[1].scale(&rat(z));
            let ch = |x: &TruncatedSeries| ch_from_chern(1, &(&one(&t, 4) + x)).unwrap().carrier;
            prop_assert_eq!(ch(&(&l + &m)), &ch(&l) * &ch(&m));
        }

        #[test]
        fn todd_is_multiplicative(n in 1usize..4, coeffs in prop::collection::vec(-2i64..3, 9)) {
            let (t, xs) = roots(3, 4);
            let lines: Vec<TruncatedSeries> = (0..n)
                .map(|i| (0..3).fold(TruncatedSeries::zero(t.clone(), 4), |acc, k| &acc + &xs[k].scale(&rat(coeffs[3 * i + k]))))
                .collect();
            let total = lines.iter().fold(one(&t, 4), |acc, x| &acc * &(&one(&t, 4) + x));
            let product = lines.iter().fold(one(&t, 4), |acc, x| &acc * &todd_root_oracle(x));
            prop_assert_eq!(todd_from_chern(&total).unwrap().carrier, product);
        }

        #[test]
        fn adams_identity_and_homomorphism(u in -3i64..4, v in -3i64..4, m in -3i64..4) {
            let (t, xs) = roots(2, 3);
            let l = CharClass::new(exp_oracle(&xs[0].scale(&rat(u))));
            let k = CharClass::new(exp_oracle(&(&xs[1].scale(&rat(v)) + &xs[0])));
            prop_assert_eq!(adams_rescale(&l, 1), l.clone());
            let prod = CharClass::new(&l.carrier * &k.carrier);
            prop_assert_eq!(
                adams_rescale(&prod, m).carrier,
                &adams_rescale(&l, m).carrier * &adams_rescale(&k, m).carrier
            );
            let _ = t;
        }
    }
}
