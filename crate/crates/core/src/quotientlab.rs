//! Sign involutions on polynomial algebras.
//!
//! `Z/2` acts on `k[x_1..x_n]` by `x_i -> (-1)^{p_i} x_i`. The invariant
//! ring `R_0` is spanned by even-parity monomials and the fixed ideal is
//! generated by the odd variables. Freeness of `R` over `R_0` is tested
//! through Hilbert series: `Q = HS_R / HS_{R_0}` must be a polynomial with
//! non-negative coefficients, witnessed by an explicit monomial basis.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_BOUND: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradedVar {
    pub name: String,
    pub degree: u32,
    pub odd: bool,
}

/// Free commutative algebra with an internal grading and a parity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradedAlgebra {
    pub vars: Vec<GradedVar>,
}

impl GradedAlgebra {
    pub fn new(vars: Vec<GradedVar>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::Domain("algebra needs at least one variable".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            if v.degree == 0 {
                return Err(Error::Domain(format!("variable `{}` has degree 0", v.name)));
            }
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::Domain(format!("duplicate variable `{}`", v.name)));
            }
        }
        Ok(Self { vars })
    }

    fn odd_vars(&self) -> Vec<&GradedVar> {
        self.vars.iter().filter(|v| v.odd).collect()
    }
}

impl FromStr for GradedAlgebra {
    type Err = Error;

    /// `"x:1:odd,y:2:even"`; parity may also be written `1`/`0`.
    fn from_str(s: &str) -> Result<Self> {
        let mut vars = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let parts: Vec<&str> = item.split(':').map(str::trim).collect();
            let [name, deg, parity] = parts[..] else {
                return Err(Error::Parse(format!("expected name:degree:parity, got `{item}`")));
            };
            let degree = deg
                .parse()
                .map_err(|_| Error::Parse(format!("bad degree `{deg}`")))?;
            let odd = match parity {
                "odd" | "1" => true,
                "even" | "0" => false,
                _ => return Err(Error::Parse(format!("bad parity `{parity}`"))),
            };
            vars.push(GradedVar {
                name: name.to_string(),
                degree,
                odd,
            });
        }
        GradedAlgebra::new(vars)
    }
}

/// Integer power series in `t`, truncated: coefficients `0..=bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HilbertSeries {
    pub coeffs: Vec<i64>,
}

impl HilbertSeries {
    pub fn bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn one(bound: usize) -> Self {
        let mut coeffs = vec![0; bound + 1];
        coeffs[0] = 1;
        Self { coeffs }
    }

    /// Multiplies by `1 / (1 - s t^d)`.
    fn div_geometric(&mut self, d: usize, s: i64) {
        for n in d..self.coeffs.len() {
            self.coeffs[n] += s * self.coeffs[n - d];
        }
    }

    /// `self / other`, requiring `other` to have constant term 1.
    pub fn divide(&self, other: &Self) -> Result<Self> {
        if other.coeffs[0] != 1 {
            return Err(Error::Domain("divisor must have constant term 1".into()));
        }
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut q = vec![0i64; n];
        for k in 0..n {
            let mut v = self.coeffs[k];
            for i in 1..=k {
                v -= other.coeffs[i] * q[k - i];
            }
            q[k] = v;
        }
        Ok(Self { coeffs: q })
    }
}

impl fmt::Display for HilbertSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(k, c)| match k {
                0 => c.to_string(),
                1 => format!("{c}t"),
                _ => format!("{c}t^{k}"),
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{} + O(t^{})", parts.join(" + "), self.bound() + 1)
        }
    }
}

/// `prod 1 / (1 - s_i t^{deg_i})` with `s_i = -1` on odd variables when
/// `signed`.
fn product_series(a: &GradedAlgebra, bound: usize, signed: bool) -> HilbertSeries {
    let mut hs = HilbertSeries::one(bound);
    for v in &a.vars {
        let s = if signed && v.odd { -1 } else { 1 };
        hs.div_geometric(v.degree as usize, s);
    }
    hs
}

pub fn algebra_hs(a: &GradedAlgebra, bound: usize) -> HilbertSeries {
    product_series(a, bound, false)
}

/// Hilbert series of `R_0`: `(HS_R + HS_R^signed) / 2`.
pub fn invariants_hs(a: &GradedAlgebra, bound: usize) -> HilbertSeries {
    let plain = product_series(a, bound, false);
    let signed = product_series(a, bound, true);
    HilbertSeries {
        coeffs: plain
            .coeffs
            .iter()
            .zip(&signed.coeffs)
            .map(|(x, y)| (x + y) / 2)
            .collect(),
    }
}

/// Hilbert series of the odd part `R_1`: `(HS_R - HS_R^signed) / 2`.
pub fn odd_part_hs(a: &GradedAlgebra, bound: usize) -> HilbertSeries {
    let plain = product_series(a, bound, false);
    let signed = product_series(a, bound, true);
    HilbertSeries {
        coeffs: plain
            .coeffs
            .iter()
            .zip(&signed.coeffs)
            .map(|(x, y)| (x - y) / 2)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedIdeal {
    /// Odd variables, which generate `R * R_{!=0}`.
    pub generators: Vec<String>,
    /// Exactly one odd variable: the fixed locus is a Cartier divisor.
    pub cartier: bool,
    /// No odd variable: the action is trivial and the fixed locus is everything.
    pub unit_locus: bool,
}

pub fn fixed_ideal(a: &GradedAlgebra) -> FixedIdeal {
    let generators: Vec<String> = a.odd_vars().iter().map(|v| v.name.clone()).collect();
    FixedIdeal {
        cartier: generators.len() == 1,
        unit_locus: generators.is_empty(),
        generators,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Free,
    NotFree,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Free => "FREE",
            Verdict::NotFree => "NOT-FREE",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlatnessReport {
    pub hs_r: HilbertSeries,
    pub hs_r0: HilbertSeries,
    pub ratio: HilbertSeries,
    pub verdict: Verdict,
    /// Candidate basis monomials (square-free in the odd variables), as
    /// exponent maps; empty unless the verdict is FREE.
    pub basis: Vec<String>,
    pub basis_verified: bool,
    /// Index of the first negative coefficient of the ratio, if any.
    pub negative_at: Option<usize>,
}

/// Square-free monomials in the odd variables, as exponent vectors over all
/// variables.
fn candidate_basis(a: &GradedAlgebra) -> Vec<Vec<u32>> {
    let odd: Vec<usize> = (0..a.vars.len()).filter(|&i| a.vars[i].odd).collect();
    (0..1u64 << odd.len())
        .map(|mask| {
            let mut e = vec![0u32; a.vars.len()];
            for (b, &i) in odd.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    e[i] = 1;
                }
            }
            e
        })
        .collect()
}

fn degree_of(a: &GradedAlgebra, e: &[u32]) -> usize {
    e.iter().zip(&a.vars).map(|(x, v)| (*x * v.degree) as usize).sum()
}

fn parity_of(a: &GradedAlgebra, e: &[u32]) -> bool {
    e.iter().zip(&a.vars).filter(|(_, v)| v.odd).map(|(x, _)| *x).sum::<u32>() % 2 == 1
}

/// All monomials of degree `<= bound`.
fn monomials_up_to(a: &GradedAlgebra, bound: usize) -> Vec<Vec<u32>> {
    fn go(a: &GradedAlgebra, i: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == a.vars.len() {
            out.push(cur.clone());
            return;
        }
        let d = a.vars[i].degree as usize;
        for e in 0..=left / d {
            cur.push(e as u32);
            go(a, i + 1, left - e * d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(a, 0, bound, &mut Vec::new(), &mut out);
    out
}

/// Every monomial up to `bound` factors uniquely as `b * r` with `b` in the
/// basis and `r` an even monomial; that is, `R = (+)_b b R_0` degree-wise.
fn basis_factorizes(a: &GradedAlgebra, basis: &[Vec<u32>], bound: usize) -> bool {
    monomials_up_to(a, bound).iter().all(|m| {
        let hits = basis
            .iter()
            .filter(|b| {
                b.iter().zip(m).all(|(x, y)| x <= y) && {
                    let r: Vec<u32> = m.iter().zip(b.iter()).map(|(y, x)| y - x).collect();
                    !parity_of(a, &r)
                }
            })
            .count();
        hits == 1
    })
}

fn format_monomial(a: &GradedAlgebra, e: &[u32]) -> String {
    let parts: Vec<String> = e
        .iter()
        .zip(&a.vars)
        .filter(|(x, _)| **x > 0)
        .map(|(x, v)| if *x == 1 { v.name.clone() } else { format!("{}^{x}", v.name) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Freeness verdict from the series ratio and a candidate basis.
pub fn flatness_verdict(a: &GradedAlgebra, bound: usize) -> FlatnessReport {
    let hs_r = algebra_hs(a, bound);
    let hs_r0 = invariants_hs(a, bound);
    let ratio = hs_r.divide(&hs_r0).expect("R_0 contains 1");
    let negative_at = ratio.coeffs.iter().position(|&c| c < 0);
    // A polynomial answer can only have degree up to the sum of odd degrees.
    let top: usize = a.odd_vars().iter().map(|v| v.degree as usize).sum();
    let polynomial = top < bound && ratio.coeffs[top + 1..].iter().all(|&c| c == 0);
    let mut report = FlatnessReport {
        hs_r,
        hs_r0,
        ratio,
        verdict: Verdict::Inconclusive,
        basis: Vec::new(),
        basis_verified: false,
        negative_at,
    };
    if negative_at.is_some() {
        report.verdict = Verdict::NotFree;
        return report;
    }
    if polynomial {
        let basis = candidate_basis(a);
        // The basis must account for Q exactly, degree by degree.
        let mut counts = vec![0i64; bound + 1];
        for b in &basis {
            let d = degree_of(a, b);
            if d <= bound {
                counts[d] += 1;
            }
        }
        let matches_ratio = counts == report.ratio.coeffs;
        if matches_ratio && basis_factorizes(a, &basis, bound.min(12)) {
            report.verdict = Verdict::Free;
            report.basis_verified = true;
            report.basis = basis.iter().map(|b| format_monomial(a, b)).collect();
        }
    }
    report
}

/// Whether the parity-0 part of the conormal module `(x)/(x^2)` vanishes,
/// counted directly on monomials `x * m` up to `bound`.
pub fn conormal_degree_zero(a: &GradedAlgebra, bound: usize) -> Result<bool> {
    let fixed = fixed_ideal(a);
    if !fixed.cartier {
        return Err(Error::Precondition(format!(
            "fixed ideal ({}) is not a Cartier divisor",
            fixed.generators.join(", ")
        )));
    }
    let x = a.vars.iter().position(|v| v.odd).expect("one odd variable");
    // (x)/(x^2) is free over R/(x) on x; its monomial basis is x * m with m
    // free of x.
    let mut by_degree: BTreeMap<usize, usize> = BTreeMap::new();
    for m in monomials_up_to(a, bound) {
        if m[x] != 1 {
            continue;
        }
        if !parity_of(a, &m) {
            *by_degree.entry(degree_of(a, &m)).or_default() += 1;
        }
    }
    Ok(by_degree.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alg(s: &str) -> GradedAlgebra {
        s.parse().unwrap()
    }

    // Oracle: count monomials of each degree by parity, by enumeration.
    fn count_oracle(a: &GradedAlgebra, bound: usize, parity: Option<bool>) -> Vec<i64> {
        let mut out = vec![0i64; bound + 1];
        for m in monomials_up_to(a, bound) {
            if parity.is_none_or(|p| parity_of(a, &m) == p) {
                out[degree_of(a, &m)] += 1;
            }
        }
        out
    }

    #[test]
    fn invariant_series_examples() {
        let b = 12;
        let x = alg("x:1:odd");
        let expect: Vec<i64> = (0..=b).map(|n| (n % 2 == 0) as i64).collect();
        assert_eq!(invariants_hs(&x, b).coeffs, expect);
        // 1/((1-t^2)(1-t)) = sum (floor(n/2) + 1) t^n
        let xy = alg("x:1:odd,y:1:even");
        let expect: Vec<i64> = (0..=b as i64).map(|n| n / 2 + 1).collect();
        assert_eq!(invariants_hs(&xy, b).coeffs, expect);
        // (1+t^2)/(1-t^2)^2: even n -> n+1, odd n -> 0
        let both = alg("x:1:odd,y:1:odd");
        let expect: Vec<i64> = (0..=b as i64).map(|n| if n % 2 == 0 { n + 1 } else { 0 }).collect();
        assert_eq!(invariants_hs(&both, b).coeffs, expect);
    }

    #[test]
    fn fixed_ideal_examples() {
        let f = fixed_ideal(&alg("x:1:odd,y:1:even"));
        assert_eq!(f.generators, vec!["x"]);
        assert!(f.cartier && !f.unit_locus);
        let f = fixed_ideal(&alg("x:1:odd,y:1:odd"));
        assert!(!f.cartier && !f.unit_locus);
        let f = fixed_ideal(&alg("x:1:even,y:1:even"));
        assert!(!f.cartier && f.unit_locus);
    }

    #[test]
    fn flatness_examples() {
        let r = flatness_verdict(&alg("x:1:odd"), DEFAULT_BOUND);
        assert_eq!(r.verdict, Verdict::Free);
        assert_eq!(r.basis, vec!["1", "x"]);
        assert_eq!(&r.ratio.coeffs[..3], &[1, 1, 0]);

        let r = flatness_verdict(&alg("x:1:odd,y:1:odd"), DEFAULT_BOUND);
        assert_eq!(r.verdict, Verdict::NotFree);
        // (1+t)^2 / (1+t^2) = 1 + 2t - 2t^3 + ...
        assert_eq!(&r.ratio.coeffs[..4], &[1, 2, 0, -2]);
        assert_eq!(r.negative_at, Some(3));

        let r = flatness_verdict(&alg("x:1:odd,y:1:even"), DEFAULT_BOUND);
        assert_eq!(r.verdict, Verdict::Free);
        assert_eq!(r.basis, vec!["1", "x"]);
    }

    #[test]
    fn trivial_action_is_free_of_rank_one() {
        let r = flatness_verdict(&alg("y:2:even"), 20);
        assert_eq!(r.verdict, Verdict::Free);
        assert_eq!(r.basis, vec!["1"]);
    }

    #[test]
    fn tight_bound_is_inconclusive() {
        // Q = 1 + t^3 needs terms beyond bound 3 to be seen as a polynomial.
        let r = flatness_verdict(&alg("x:3:odd"), 3);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn conormal_examples() {
        assert!(conormal_degree_zero(&alg("x:1:odd"), 20).unwrap());
        assert!(conormal_degree_zero(&alg("x:1:odd,y:1:even"), 20).unwrap());
        assert!(matches!(
            conormal_degree_zero(&alg("x:1:odd,y:1:odd"), 20),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn parse_errors() {
        assert!("x:1".parse::<GradedAlgebra>().is_err());
        assert!("x:0:odd".parse::<GradedAlgebra>().is_err());
        assert!("x:1:weird".parse::<GradedAlgebra>().is_err());
        assert!("".parse::<GradedAlgebra>().is_err());
        assert!("x:1:odd,x:2:even".parse::<GradedAlgebra>().is_err());
    }

    fn arb_algebra() -> impl Strategy<Value = GradedAlgebra> {
        prop::collection::vec((1u32..4, any::<bool>()), 1..=5).prop_map(|vs| {
            GradedAlgebra::new(
                vs.into_iter()
                    .enumerate()
                    .map(|(i, (degree, odd))| GradedVar {
                        name: format!("v{i}"),
                        degree,
                        odd,
                    })
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn parity_decomposition(a in arb_algebra()) {
            let b = 14;
            let total = algebra_hs(&a, b);
            let even = invariants_hs(&a, b);
            let odd = odd_part_hs(&a, b);
            let sum: Vec<i64> = even.coeffs.iter().zip(&odd.coeffs).map(|(x, y)| x + y).collect();
            prop_assert_eq!(&total.coeffs, &sum);
            prop_assert_eq!(total.coeffs, count_oracle(&a, b, None));
            prop_assert_eq!(even.coeffs, count_oracle(&a, b, Some(false)));
        }

        #[test]
        fn cartier_flag_and_verdicts(a in arb_algebra()) {
            let f = fixed_ideal(&a);
            let odd = a.vars.iter().filter(|v| v.odd).count();
            prop_assert_eq!(f.cartier, odd == 1);
            let r = flatness_verdict(&a, 30);
            match r.verdict {
                Verdict::Free => prop_assert!(r.basis_verified),
                Verdict::NotFree => prop_assert!(r.negative_at.is_some()),
                Verdict::Inconclusive => {}
            }
            if f.cartier {
                prop_assert_eq!(r.verdict, Verdict::Free);
                prop_assert!(conormal_degree_zero(&a, 12).unwrap());
            }
        }
    }
}
