//! First-Chern-class shadows of determinant-line identities.
//!
//! Universal checks work in `Q[l, a_1..a_d]` truncated at degree `d+1`:
//! `l` is `c_1` of the line bundle and the `a_i` are Chern roots of the
//! relative cotangent bundle. An identity `sum n_k lambda(F_k) = 0` holds at
//! the level of `c_1` on every family when the degree-`(d+1)` part of
//! `sum n_k ch(F_k) Td(T_f)` vanishes identically.
//!
//! Model checks push `ch(F) Td(T_f)` down a concrete family and read off
//! the degree of `c_1(lambda(F))` on a one-dimensional base.

pub mod picard;

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::charclass::{adams_rescale, sym_ch_all, todd_from_chern, CharClass};
use crate::chowmodel::{BundleClass, ChowModel};
use crate::combinat::{exponent_entries, pow2};
use crate::error::{Error, Result};
use crate::exactalg::{rat, Rational, TruncatedSeries, VarTable};

pub use picard::{picard_deduce, PicardLattice};

/// One summand `coeff * L^twist (x) Sym^j(Omega or its dual)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ComboTerm {
    pub coeff: i64,
    pub twist: i64,
    pub sym: u32,
    #[serde(default)]
    pub dual: bool,
}

/// Formal integer combination of `L^t (x) Sym^j Omega` classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct VirtualCombo {
    pub terms: Vec<ComboTerm>,
}

impl VirtualCombo {
    pub fn new(terms: Vec<ComboTerm>) -> Result<Self> {
        if terms.iter().any(|t| t.coeff == 0) {
            return Err(Error::Domain("combination terms must have nonzero coefficients".into()));
        }
        Ok(Self { terms })
    }

    fn max_sym(&self) -> u32 {
        self.terms.iter().map(|t| t.sym).max().unwrap_or(0)
    }
}

fn term(coeff: i64, twist: i64, sym: u32, dual: bool) -> ComboTerm {
    ComboTerm {
        coeff,
        twist,
        sym,
        dual,
    }
}

/// `2^{2d+2} L - sum_j c_j(d) L^2 (x) Sym^j Omega`.
///
/// Accepts `d = 0` so the degenerate case can be examined on purpose.
pub fn main_combo(d: u32) -> VirtualCombo {
    let mut terms = vec![term(
        pow2(2 * d + 2).to_i64().expect("small d"),
        1,
        0,
        false,
    )];
    for (j, c) in exponent_entries(d).iter().enumerate() {
        terms.push(term(-c.to_i64().expect("small d"), 2, j as u32, false));
    }
    VirtualCombo { terms }
}

/// Relative dimension one: `18 L - 18 O - 6 L^2 (x) T + 6 L (x) T`, with
/// `T` the dual of `Omega`.
pub fn deligne_combo_d1() -> VirtualCombo {
    VirtualCombo {
        terms: vec![
            term(18, 1, 0, false),
            term(-18, 0, 0, false),
            term(-6, 2, 1, true),
            term(6, 1, 1, true),
        ],
    }
}

/// The universal ring `Q[l, a_1..a_d]` truncated at `d+1`.
pub struct UniversalRing {
    pub d: u32,
    pub vars: Arc<VarTable>,
}

impl UniversalRing {
    pub fn new(d: u32) -> Self {
        let mut names = vec!["l".to_string()];
        names.extend((1..=d).map(|i| format!("a{i}")));
        Self {
            d,
            vars: Arc::new(VarTable::uniform(names).expect("distinct names")),
        }
    }

    pub fn bound(&self) -> u32 {
        self.d + 1
    }

    pub fn var(&self, name: &str) -> TruncatedSeries {
        TruncatedSeries::var(self.vars.clone(), self.bound(), name).expect("known variable")
    }

    pub fn one(&self) -> TruncatedSeries {
        TruncatedSeries::one(self.vars.clone(), self.bound())
    }

    fn roots(&self) -> Vec<TruncatedSeries> {
        (1..=self.d).map(|i| self.var(&format!("a{i}"))).collect()
    }

    /// `ch Omega = sum e^{a_i}`.
    pub fn ch_omega(&self) -> CharClass {
        let zero = TruncatedSeries::zero(self.vars.clone(), self.bound());
        let sum = self
            .roots()
            .iter()
            .fold(zero, |acc, a| &acc + &a.exp().expect("no constant term"));
        CharClass::new(sum)
    }

    /// `Td(T_f)` from `c(T_f) = prod (1 - a_i)`.
    pub fn todd_tf(&self) -> CharClass {
        let c = self
            .roots()
            .iter()
            .fold(self.one(), |acc, a| &acc * &(&self.one() - a));
        todd_from_chern(&c).expect("unit constant term")
    }

    /// `sum coeff e^{twist l} ch(Sym^j Omega^{(dual)})`.
    pub fn combo_ch(&self, combo: &VirtualCombo) -> CharClass {
        let omega = self.ch_omega();
        let top = combo.max_sym();
        let sym = sym_ch_all(&omega, top);
        let sym_dual: Vec<CharClass> = if combo.terms.iter().any(|t| t.dual) {
            sym.iter().map(|s| adams_rescale(s, -1)).collect()
        } else {
            Vec::new()
        };
        let l = self.var("l");
        let mut acc = TruncatedSeries::zero(self.vars.clone(), self.bound());
        for t in &combo.terms {
            let line = l.scale(&rat(t.twist)).exp().expect("no constant term");
            let s = if t.dual { &sym_dual[t.sym as usize] } else { &sym[t.sym as usize] };
            acc = &acc + &(&line * &s.carrier).scale(&rat(t.coeff));
        }
        CharClass::new(acc)
    }
}

/// `D * Td(T_f)` for the combination `D`, in `Q[l, a_1..a_d]` at bound `d+1`.
pub fn universal_defect(d: u32, combo: &VirtualCombo) -> Result<CharClass> {
    if d == 0 {
        return Err(Error::Domain("relative dimension must be positive".into()));
    }
    Ok(universal_defect_unchecked(d, combo))
}

/// As [`universal_defect`] but also accepting `d = 0`.
pub fn universal_defect_unchecked(d: u32, combo: &VirtualCombo) -> CharClass {
    let ring = UniversalRing::new(d);
    let dch = ring.combo_ch(combo);
    CharClass::new(&dch.carrier * &ring.todd_tf().carrier)
}

/// Whether the degree-`(d+1)` part of the main-combination defect vanishes.
pub fn main_theorem_defect_vanishes(d: u32) -> Result<bool> {
    let defect = universal_defect(d, &main_combo(d))?;
    Ok(defect.component(d + 1).is_zero())
}

/// `prod (1 - e^{l_i})` over `d + 2` formal line classes, truncated at `d+1`.
pub fn ducrot_defect(d: u32, lines: &[&str]) -> Result<CharClass> {
    if lines.len() != d as usize + 2 {
        return Err(Error::Domain(format!(
            "relative dimension {d} needs {} line factors, got {}",
            d + 2,
            lines.len()
        )));
    }
    ducrot_product(d, lines)
}

/// `prod (1 - e^{l_i})` for any number of factors (for negative controls).
pub fn ducrot_product(d: u32, lines: &[&str]) -> Result<CharClass> {
    if lines.is_empty() {
        return Err(Error::Domain("at least one line factor".into()));
    }
    let vars = Arc::new(VarTable::uniform(lines.iter().copied())?);
    let bound = d + 1;
    let one = TruncatedSeries::one(vars.clone(), bound);
    let mut acc = one.clone();
    for name in lines {
        let l = TruncatedSeries::var(vars.clone(), bound, name)?;
        acc = &acc * &(&one - &l.exp()?);
    }
    Ok(CharClass::new(acc))
}

/// `c_1(lambda(F))` pushed to the base as a class: the fiber pushforward of
/// the degree-`(rel_dim+1)` part of `ch(F) Td(T_f)`.
pub fn c1_lambda_class(model: &ChowModel, f: &BundleClass) -> Result<TruncatedSeries> {
    let ch = f.ch()?;
    if **ch.carrier.vars() != **model.vars() {
        return Err(Error::Domain(format!(
            "bundle is not expressed in the generators of `{}`",
            model.name
        )));
    }
    let integrand = &ch.carrier * &model.todd().carrier;
    let nf = model.normal_form(&integrand)?;
    model.fiber_pushforward(&nf.component(model.rel_dim() + 1))
}

/// Degree of `c_1(lambda(F))` on a one-dimensional base.
pub fn c1_lambda(model: &ChowModel, f: &BundleClass) -> Result<Rational> {
    if model.base_dim() != 1 {
        return Err(Error::UnsupportedModel(format!(
            "`{}` has a base of dimension {}, need 1",
            model.name,
            model.base_dim()
        )));
    }
    let beta = c1_lambda_class(model, f)?;
    model.integrate_base(&beta)
}

/// `chi(F) = integral of ch(F) Td(T)` on a model over a point.
pub fn euler_char(model: &ChowModel, f: &BundleClass) -> Result<Rational> {
    if model.base_dim() != 0 {
        return Err(Error::UnsupportedModel(format!(
            "`{}` is a family over a positive-dimensional base",
            model.name
        )));
    }
    let ch = f.ch()?;
    model.integrate(&(&ch.carrier * &model.todd().carrier))
}

/// Outcome of checking the main identity on a family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MainReport {
    pub model: String,
    pub dim: u32,
    pub lhs: String,
    pub rhs: String,
    /// `deg lambda(L^2 (x) Sym^j Omega_f)` for each `j`.
    pub terms: Vec<String>,
    pub exponents: Vec<String>,
    pub pass: bool,
}

/// `2^{2d+2} deg lambda(L)` against `sum_j c_j deg lambda(L^2 (x) Sym^j Omega_f)`.
pub fn verify_main_on_model(model: &ChowModel, line: &BundleClass) -> Result<MainReport> {
    let d = model.rel_dim();
    if d == 0 {
        return Err(Error::UnsupportedModel("relative dimension 0".into()));
    }
    let ch_l = line.ch()?;
    if ch_l.rank() != rat(1) {
        return Err(Error::Domain("the twisting class must have rank 1".into()));
    }
    let table = exponent_entries(d);
    let lhs = c1_lambda(model, line)? * Rational::from_integer(pow2(2 * d + 2));
    let l2 = &ch_l.carrier * &ch_l.carrier;
    let syms = sym_ch_all(&model.cotangent_ch(), 2 * d);
    let mut rhs = Rational::zero();
    let mut terms = Vec::new();
    for (c, s) in table.iter().zip(&syms) {
        let f = BundleClass::Character(CharClass::new(&l2 * &s.carrier));
        let deg = c1_lambda(model, &f)?;
        rhs += Rational::from_integer(c.clone()) * &deg;
        terms.push(deg.to_string());
    }
    Ok(MainReport {
        model: model.name.clone(),
        dim: d,
        pass: lhs == rhs,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        terms,
        exponents: table.iter().map(BigInt::to_string).collect(),
    })
}

/// Degree-2 coefficient of `a^2` in `e^{k a} Td(T_f)` for relative dimension
/// one: the universal `deg lambda(Omega^k)` in units of `K_f^2`.
pub fn universal_lambda_k_d1(k: i64) -> Rational {
    let ring = UniversalRing::new(1);
    let a = ring.var("a1");
    let ch = a.scale(&rat(k)).exp().expect("no constant term");
    let top = (&ch * &ring.todd_tf().carrier).component(2);
    top.coeff(&[0, 2])
}
