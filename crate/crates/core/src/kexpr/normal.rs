//! Canonical forms.
//!
//! Inside `lambda` an expression normalizes to a [`KPoly`]: an integer
//! combination of tensor monomials. A monomial is a multiset of factors and
//! a twist parity. Pullbacks are ring maps and are pushed onto the factors;
//! the other functors are additive and wrap a single monomial. `Sym^j` for
//! `j >= 2` stays opaque.
//!
//! Outside `lambda` a line normalizes to a [`PicNF`]: `lambda` is additive
//! and `lambda(F{-1}) = lambda(F)^-1`, so a line is an integer combination
//! of untwisted monomials.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ast::{bx, Functor, IntExpr, KExpr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    Atom(String),
    /// Additive functor applied to one monomial.
    Push(Functor, Box<KMono>),
    /// `Sym^j` with `j >= 2`.
    Sym(u32, Box<KPoly>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    /// Pullbacks, outermost first.
    pub pulls: Vec<Functor>,
    pub base: Base,
    pub dual: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KMono {
    pub factors: BTreeMap<Factor, u32>,
    pub twist: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KPoly {
    pub terms: BTreeMap<KMono, BigInt>,
}

/// A line: `prod lambda(m)^{n_m}` over untwisted monomials.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PicNF {
    pub exps: BTreeMap<KMono, BigInt>,
}

/// Normal form of either kind of expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NormalForm {
    Sheaf(KPoly),
    Line(PicNF),
}

impl KMono {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty() && !self.twist
    }

    fn single(f: Factor) -> Self {
        let mut m = Self::unit();
        m.factors.insert(f, 1);
        m
    }

    pub fn mul(&self, other: &KMono) -> KMono {
        let mut out = self.clone();
        for (f, e) in &other.factors {
            *out.factors.entry(f.clone()).or_insert(0) += e;
        }
        out.twist ^= other.twist;
        out
    }

    pub fn dual(&self) -> KMono {
        KMono {
            factors: self
                .factors
                .iter()
                .map(|(f, &e)| {
                    let mut g = f.clone();
                    g.dual = !g.dual;
                    (g, e)
                })
                .collect(),
            twist: self.twist,
        }
    }

    fn pull(&self, fun: Functor) -> KMono {
        KMono {
            factors: self
                .factors
                .iter()
                .map(|(f, &e)| {
                    let mut g = f.clone();
                    g.pulls.insert(0, fun);
                    (g, e)
                })
                .collect(),
            twist: self.twist,
        }
    }

    pub fn to_expr(&self) -> KExpr {
        let mut parts: Vec<KExpr> = self
            .factors
            .iter()
            .map(|(f, &e)| {
                let x = f.to_expr();
                if e == 1 {
                    x
                } else {
                    KExpr::pow(x, e)
                }
            })
            .collect();
        if parts.is_empty() {
            parts.push(KExpr::Unit);
        }
        let p = KExpr::product(parts);
        if self.twist {
            KExpr::twist(p)
        } else {
            p
        }
    }
}

impl Factor {
    pub fn to_expr(&self) -> KExpr {
        let mut e = match &self.base {
            Base::Atom(a) => KExpr::Atom(a.clone()),
            Base::Push(f, m) => KExpr::Apply(*f, bx(m.to_expr())),
            Base::Sym(j, p) => KExpr::Sym(IntExpr::lit(*j), bx(p.to_expr())),
        };
        if self.dual {
            e = KExpr::Dual(bx(e));
        }
        for f in self.pulls.iter().rev() {
            e = KExpr::Apply(*f, bx(e));
        }
        e
    }
}

impl KPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(n: BigInt) -> Self {
        let mut p = Self::zero();
        p.add_term(KMono::unit(), n);
        p
    }

    pub fn mono(m: KMono) -> Self {
        let mut p = Self::zero();
        p.add_term(m, BigInt::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: KMono, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &KPoly) -> KPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> KPoly {
        let mut out = KPoly::zero();
        if !k.is_zero() {
            for (m, c) in &self.terms {
                out.terms.insert(m.clone(), c * k);
            }
        }
        out
    }

    pub fn neg(&self) -> KPoly {
        self.scale(&-BigInt::one())
    }

    pub fn sub(&self, other: &KPoly) -> KPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &KPoly) -> KPoly {
        let mut out = KPoly::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(a.mul(b), x * y);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> KPoly {
        let mut acc = KPoly::scalar(BigInt::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    fn map_monos(&self, f: impl Fn(&KMono) -> KMono) -> KPoly {
        let mut out = KPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(f(m), c.clone());
        }
        out
    }

    pub fn dual(&self) -> KPoly {
        self.map_monos(KMono::dual)
    }

    pub fn twist(&self) -> KPoly {
        self.map_monos(|m| {
            let mut m = m.clone();
            m.twist = !m.twist;
            m
        })
    }

    fn apply(&self, fun: Functor) -> KPoly {
        if fun.is_pullback() {
            return self.map_monos(|m| m.pull(fun));
        }
        self.map_monos(|m| KMono::single(Factor {
            pulls: vec![],
            base: Base::Push(fun, Box::new(m.clone())),
            dual: false,
        }))
    }

    fn sym(&self, j: u32) -> KPoly {
        match j {
            0 => KPoly::scalar(BigInt::one()),
            1 => self.clone(),
            _ if self.is_zero() => KPoly::zero(),
            _ => KPoly::mono(KMono::single(Factor {
                pulls: vec![],
                base: Base::Sym(j, Box::new(self.clone())),
                dual: false,
            })),
        }
    }

    pub fn to_expr(&self) -> KExpr {
        let mut out: Option<KExpr> = None;
        for (m, c) in &self.terms {
            let body = m.to_expr();
            let (neg, mag) = (c.is_negative(), c.abs());
            let term = if mag.is_one() {
                body
            } else if m.is_unit() {
                KExpr::int(mag)
            } else {
                KExpr::tensor(KExpr::int(mag), body)
            };
            out = Some(match (out, neg) {
                (None, false) => term,
                (None, true) => KExpr::Neg(bx(term)),
                (Some(acc), false) => KExpr::add(acc, term),
                (Some(acc), true) => KExpr::sub(acc, term),
            });
        }
        out.unwrap_or_else(|| KExpr::int(0))
    }
}

impl PicNF {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn from_poly(p: &KPoly) -> Self {
        let mut out = Self::trivial();
        for (m, c) in &p.terms {
            let mut key = m.clone();
            let c = if key.twist { -c } else { c.clone() };
            key.twist = false;
            out.add(key, c);
        }
        out
    }

    fn add(&mut self, m: KMono, c: BigInt) {
        let slot = self.exps.entry(m.clone()).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.exps.remove(&m);
        }
    }

    pub fn mul(&self, other: &PicNF) -> PicNF {
        let mut out = self.clone();
        for (m, c) in &other.exps {
            out.add(m.clone(), c.clone());
        }
        out
    }

    pub fn pow(&self, n: &BigInt) -> PicNF {
        let mut out = PicNF::trivial();
        if !n.is_zero() {
            for (m, c) in &self.exps {
                out.exps.insert(m.clone(), c * n);
            }
        }
        out
    }

    /// Exponent of `lambda(m)`.
    pub fn exponent(&self, m: &KMono) -> BigInt {
        self.exps.get(m).cloned().unwrap_or_default()
    }

    pub fn to_expr(&self) -> KExpr {
        let parts: Vec<KExpr> = self
            .exps
            .iter()
            .map(|(m, c)| {
                let l = KExpr::lambda(m.to_expr());
                if c.is_one() {
                    l
                } else {
                    KExpr::Pow(bx(l), IntExpr::Lit(c.clone()))
                }
            })
            .collect();
        if parts.is_empty() {
            KExpr::lambda(KExpr::int(0))
        } else {
            KExpr::product(parts)
        }
    }
}

impl NormalForm {
    pub fn to_expr(&self) -> KExpr {
        match self {
            NormalForm::Sheaf(p) => p.to_expr(),
            NormalForm::Line(l) => l.to_expr(),
        }
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Whether the expression denotes a line (it contains `lambda` or `I` at
/// the top, possibly under tensor, power or dual).
pub fn is_line(e: &KExpr) -> bool {
    match e {
        KExpr::Lambda(_) | KExpr::Ducrot(_) => true,
        KExpr::Tensor(a, b) => is_line(a) || is_line(b),
        KExpr::Pow(a, _) | KExpr::Dual(a) => is_line(a),
        _ => false,
    }
}

fn int_val(n: &IntExpr) -> Result<BigInt> {
    n.value()
}

fn small(n: &IntExpr, what: &str) -> Result<u32> {
    let v = int_val(n)?;
    v.to_u32()
        .ok_or_else(|| Error::Domain(format!("{what} must be a small non-negative integer, got {v}")))
}

/// Normal form of a sheaf expression.
pub fn sheaf_nf(e: &KExpr) -> Result<KPoly> {
    use KExpr::*;
    Ok(match e {
        Unit => KPoly::scalar(BigInt::one()),
        Int(n) => KPoly::scalar(int_val(n)?),
        Atom(a) => KPoly::mono(KMono::single(Factor {
            pulls: vec![],
            base: Base::Atom(a.clone()),
            dual: false,
        })),
        Var(v) => return Err(Error::Domain(format!("pattern variable ?{v} has no normal form"))),
        Add(a, b) => sheaf_nf(a)?.add(&sheaf_nf(b)?),
        Sub(a, b) => sheaf_nf(a)?.sub(&sheaf_nf(b)?),
        Neg(a) => sheaf_nf(a)?.neg(),
        Tensor(a, b) => sheaf_nf(a)?.mul(&sheaf_nf(b)?),
        Pow(a, n) => {
            let v = int_val(n)?;
            let p = sheaf_nf(a)?;
            let k = v
                .abs()
                .to_u32()
                .ok_or_else(|| Error::Domain(format!("tensor power {v} too large")))?;
            let p = if v.is_negative() { p.dual() } else { p };
            p.pow(k)
        }
        Dual(a) => sheaf_nf(a)?.dual(),
        Twist(a, n) => {
            let p = sheaf_nf(a)?;
            if int_val(n)?.is_odd_int() {
                p.twist()
            } else {
                p
            }
        }
        Sym(j, a) => sheaf_nf(a)?.sym(small(j, "symmetric power")?),
        Pk(k, a) => {
            let k = small(k, "P_k index")?;
            let t = sheaf_nf(a)?;
            let two_minus = KPoly::scalar(BigInt::from(2)).sub(&t);
            let mut acc = KPoly::zero();
            for i in 0..=k {
                acc = acc.add(&two_minus.pow(i).scale(&crate::combinat::pow2(k - i)));
            }
            acc
        }
        Apply(f, a) => sheaf_nf(a)?.apply(*f),
        Lambda(_) | Ducrot(_) => {
            return Err(Error::Domain(format!("line `{e}` used as a sheaf")))
        }
    })
}

trait Odd {
    fn is_odd_int(&self) -> bool;
}

impl Odd for BigInt {
    fn is_odd_int(&self) -> bool {
        num_integer::Integer::is_odd(self)
    }
}

/// Normal form of a line expression.
pub fn line_nf(e: &KExpr) -> Result<PicNF> {
    use KExpr::*;
    Ok(match e {
        Unit => PicNF::trivial(),
        Lambda(a) => PicNF::from_poly(&sheaf_nf(a)?),
        Ducrot(v) => {
            let mut p = KPoly::scalar(BigInt::one());
            for a in v {
                p = p.mul(&KPoly::scalar(BigInt::one()).sub(&sheaf_nf(a)?));
            }
            PicNF::from_poly(&p)
        }
        Tensor(a, b) => line_nf(a)?.mul(&line_nf(b)?),
        Pow(a, n) => line_nf(a)?.pow(&int_val(n)?),
        Dual(a) => line_nf(a)?.pow(&-BigInt::one()),
        _ => return Err(Error::Domain(format!("`{e}` is not a line"))),
    })
}

pub fn normal_form(e: &KExpr) -> Result<NormalForm> {
    if is_line(e) {
        line_nf(e).map(NormalForm::Line)
    } else {
        sheaf_nf(e).map(NormalForm::Sheaf)
    }
}

/// Canonical expression: sorted signed monomials, involutions cancelled,
/// distributivity applied.
pub fn normalize(e: &KExpr) -> Result<KExpr> {
    normal_form(e).map(|n| n.to_expr())
}
