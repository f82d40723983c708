//! Named axioms and step-by-step validation of proof scripts.
//!
//! Every step names an axiom and a position (a child-index path; omitted
//! means the first match in pre-order). Axioms come in two kinds:
//!
//! * identities, which must preserve the normal form of the whole line
//!   (and, for `cancel`, of the rewritten subterm);
//! * instances, which encode facts the formal calculus cannot see
//!   (adjunction, exact sequences, projection formulas, pushforwards).
//!   They are trusted but must match their declared left-hand side.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::ast::{bx, Functor, IntExpr, KExpr};
use super::normal::normal_form;
use super::parse::{parse_with, Params};
use crate::combinat::{binomial, pow2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxiomKind {
    Identity,
    Instance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `P(k, X) -> sum_i [2^(k-i)] * (2 - X)^i`.
    PkExpand,
    /// `(O - X)^n -> sum_j [(-1)^j C(n,j)] * X^j`.
    Binomial,
    /// Additive functor distributed over sums and integer multiples.
    Linear,
    /// `lambda(prod (O - A_i)) -> I(A_1, ...)`.
    DucrotFold,
    /// `I(A * B, ...) -> I(A, ...) * I(B, ...)`.
    Multadd,
    /// One level of additivity: `lambda(X * (A - B)) -> lambda(X * A) *
    /// lambda(X * B)^-1`, with `lambda(X * [n])` written `lambda(X)^n`.
    Split,
    /// `[c] * tw(n, X) -> [(-1)^n c] * X` inside a line.
    VeeqSign,
    /// A line with trivial normal form becomes `lambda(0)`.
    Trivialize,
    /// Flattens a sum of integer multiples and adds up the coefficients of
    /// equal terms, in order of first appearance.
    Collect,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Pattern { left: KExpr, right: KExpr },
    Builtin(Builtin),
    /// The step supplies the replacement; only the normal-form check applies.
    Replace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewriteAxiom {
    pub name: String,
    pub rule: Rule,
    pub kind: AxiomKind,
    pub anchor: String,
}

impl RewriteAxiom {
    pub fn pattern(name: &str, left: &str, right: &str, kind: AxiomKind, anchor: &str) -> Result<Self> {
        Self::pattern_with(name, left, right, kind, anchor, &Params::new())
    }

    pub fn pattern_with(
        name: &str,
        left: &str,
        right: &str,
        kind: AxiomKind,
        anchor: &str,
        params: &Params,
    ) -> Result<Self> {
        let left = parse_with(left, params)?;
        let right = parse_with(right, params)?;
        let lv = pattern_vars(&left);
        for v in pattern_vars(&right) {
            if !lv.contains(&v) {
                return Err(Error::Structural(format!(
                    "axiom `{name}`: right side uses ?{v} not bound on the left"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            rule: Rule::Pattern { left, right },
            kind,
            anchor: anchor.into(),
        })
    }

    fn builtin(name: &str, b: Builtin, kind: AxiomKind, anchor: &str) -> Self {
        Self {
            name: name.into(),
            rule: Rule::Builtin(b),
            kind,
            anchor: anchor.into(),
        }
    }

    fn replace(name: &str, anchor: &str) -> Self {
        Self {
            name: name.into(),
            rule: Rule::Replace,
            kind: AxiomKind::Identity,
            anchor: anchor.into(),
        }
    }

    /// Rewrites `e` at its root, if the axiom applies there.
    pub fn apply_root(&self, e: &KExpr) -> Result<Option<KExpr>> {
        match &self.rule {
            Rule::Pattern { left, right } => {
                let mut b = Bindings::default();
                if match_expr(left, e, &mut b)? {
                    Ok(Some(instantiate(right, &b)?))
                } else {
                    Ok(None)
                }
            }
            Rule::Builtin(k) => apply_builtin(*k, e),
            Rule::Replace => Ok(None),
        }
    }
}

/// Names of the pattern variables (sheaf and integer) in an expression.
fn pattern_vars(e: &KExpr) -> Vec<String> {
    fn ints(n: &IntExpr, out: &mut Vec<String>) {
        use IntExpr::*;
        match n {
            Lit(_) => {}
            Var(v) => out.push(v.clone()),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Pow(a, b) | C(a, b) | W(a, b) => {
                ints(a, out);
                ints(b, out);
            }
            Neg(a) => ints(a, out),
        }
    }
    fn walk(e: &KExpr, out: &mut Vec<String>) {
        match e {
            KExpr::Var(v) => out.push(v.clone()),
            KExpr::Int(n) | KExpr::Pow(_, n) | KExpr::Twist(_, n) | KExpr::Sym(n, _) | KExpr::Pk(n, _) => {
                ints(n, out)
            }
            _ => {}
        }
        for c in e.children() {
            walk(c, out);
        }
    }
    let mut out = Vec::new();
    walk(e, &mut out);
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, Default)]
pub struct Bindings {
    pub exprs: BTreeMap<String, KExpr>,
    pub ints: BTreeMap<String, BigInt>,
}

fn match_int(p: &IntExpr, n: &IntExpr, b: &mut Bindings) -> Result<bool> {
    let value = n.value()?;
    if let IntExpr::Var(v) = p {
        if let Some(old) = b.ints.get(v) {
            return Ok(*old == value);
        }
        b.ints.insert(v.clone(), value);
        return Ok(true);
    }
    Ok(p.eval(&b.ints)? == value)
}

/// Structural matching; integer subterms are compared by value.
pub fn match_expr(p: &KExpr, e: &KExpr, b: &mut Bindings) -> Result<bool> {
    use KExpr::*;
    Ok(match (p, e) {
        (Var(v), _) => {
            let e = e.canon()?;
            if let Some(old) = b.exprs.get(v) {
                *old == e
            } else {
                b.exprs.insert(v.clone(), e);
                true
            }
        }
        (Unit, Unit) => true,
        (Int(x), Int(y)) => match_int(x, y, b)?,
        (Atom(x), Atom(y)) => x == y,
        (Add(a, c), Add(x, y)) | (Sub(a, c), Sub(x, y)) | (Tensor(a, c), Tensor(x, y)) => {
            match_expr(a, x, b)? && match_expr(c, y, b)?
        }
        (Neg(a), Neg(x)) | (Dual(a), Dual(x)) | (Lambda(a), Lambda(x)) => match_expr(a, x, b)?,
        (Pow(a, n), Pow(x, m)) | (Twist(a, n), Twist(x, m)) => match_expr(a, x, b)? && match_int(n, m, b)?,
        (Sym(n, a), Sym(m, x)) | (Pk(n, a), Pk(m, x)) => match_int(n, m, b)? && match_expr(a, x, b)?,
        (Apply(f, a), Apply(g, x)) => f == g && match_expr(a, x, b)?,
        (Ducrot(v), Ducrot(w)) => {
            if v.len() != w.len() {
                return Ok(false);
            }
            for (a, x) in v.iter().zip(w) {
                if !match_expr(a, x, b)? {
                    return Ok(false);
                }
            }
            true
        }
        _ => false,
    })
}

fn instantiate(p: &KExpr, b: &Bindings) -> Result<KExpr> {
    fn subst(p: &KExpr, b: &Bindings) -> Result<KExpr> {
        if let KExpr::Var(v) = p {
            return b
                .exprs
                .get(v)
                .cloned()
                .ok_or_else(|| Error::Structural(format!("unbound pattern variable ?{v}")));
        }
        let mut out = p.clone();
        for (c, o) in p.children().into_iter().zip(out.children_mut()) {
            *o = subst(c, b)?;
        }
        Ok(out)
    }
    subst(&p.substitute_ints(&b.ints), b)?.canon()
}

fn lit(n: impl Into<BigInt>) -> IntExpr {
    IntExpr::lit(n)
}

fn apply_builtin(k: Builtin, e: &KExpr) -> Result<Option<KExpr>> {
    use KExpr::*;
    Ok(match (k, e) {
        (Builtin::PkExpand, Pk(n, x)) => {
            let n = n.value()?.to_u32().ok_or_else(|| Error::Domain("P_k index".into()))?;
            Some(KExpr::sum((0..=n).map(|i| {
                KExpr::tensor(
                    Int(IntExpr::Lit(pow2(n - i))),
                    KExpr::Pow(bx(KExpr::sub(KExpr::int(2), (**x).clone())), lit(i)),
                )
            })))
        }
        (Builtin::Binomial, Pow(base, n)) => match &**base {
            Sub(o, x) if **o == Unit => {
                let n = n.value()?;
                if n.is_negative() {
                    return Ok(None);
                }
                let n = n.to_u32().ok_or_else(|| Error::Domain("binomial exponent".into()))?;
                Some(KExpr::sum((0..=n).map(|j| {
                    let sign = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                    KExpr::tensor(Int(IntExpr::Lit(sign * binomial(n, j))), KExpr::Pow(x.clone(), lit(j)))
                })))
            }
            _ => None,
        },
        (Builtin::Linear, Apply(f, x)) if !f.is_pullback() => Some(distribute(*f, x)?),
        (Builtin::DucrotFold, Lambda(x)) => {
            let mut factors = Vec::new();
            if collect_ducrot(x, &mut factors)? {
                Some(Ducrot(factors))
            } else {
                None
            }
        }
        (Builtin::Split, Lambda(x)) => split_lambda(x),
        (Builtin::VeeqSign, Tensor(c, t)) => match (&**c, &**t) {
            (Int(c), Twist(x, n)) => {
                let sign = if num_integer::Integer::is_odd(&n.value()?) { -BigInt::one() } else { BigInt::one() };
                Some(KExpr::tensor(Int(IntExpr::Lit(sign * c.value()?)), (**x).clone()))
            }
            _ => None,
        },
        (Builtin::Trivialize, _) if super::normal::is_line(e) => {
            let t = KExpr::lambda(KExpr::int(0));
            if *e != t && super::normal::line_nf(e)?.is_trivial() {
                Some(t)
            } else {
                None
            }
        }
        (Builtin::Collect, Add(..) | Sub(..)) => {
            let mut terms: Vec<(KExpr, BigInt)> = Vec::new();
            flatten_sum(e, &BigInt::one(), &mut terms)?;
            let mut grouped: Vec<(KExpr, BigInt)> = Vec::new();
            for (t, c) in terms {
                match grouped.iter_mut().find(|(u, _)| *u == t) {
                    Some((_, d)) => *d += c,
                    None => grouped.push((t, c)),
                }
            }
            Some(KExpr::sum(
                grouped
                    .into_iter()
                    .filter(|(_, c)| !num_traits::Zero::is_zero(c))
                    .map(|(t, c)| KExpr::tensor(Int(IntExpr::Lit(c)), t)),
            ))
        }
        (Builtin::Multadd, Ducrot(v)) => match v.first() {
            Some(Tensor(a, c)) => {
                let mut left = v.clone();
                left[0] = (**a).clone();
                let mut right = v.clone();
                right[0] = (**c).clone();
                Some(KExpr::tensor(Ducrot(left), Ducrot(right)))
            }
            _ => None,
        },
        _ => None,
    })
}

fn lambda_term(x: KExpr, exp: i64) -> KExpr {
    let (body, n) = match x {
        KExpr::Tensor(a, b) => match (*a, *b) {
            (KExpr::Int(n), y) | (y, KExpr::Int(n)) => (y, IntExpr::Mul(Box::new(n), Box::new(lit(exp)))),
            (a, b) => (KExpr::tensor(a, b), lit(exp)),
        },
        other => (other, lit(exp)),
    };
    let n = n.value().map(IntExpr::Lit).unwrap_or(n);
    if n == lit(1) {
        KExpr::lambda(body)
    } else {
        KExpr::Pow(bx(KExpr::lambda(body)), n)
    }
}

fn flatten_sum(e: &KExpr, k: &BigInt, out: &mut Vec<(KExpr, BigInt)>) -> Result<()> {
    use KExpr::*;
    match e {
        Add(a, b) => {
            flatten_sum(a, k, out)?;
            flatten_sum(b, k, out)
        }
        Sub(a, b) => {
            flatten_sum(a, k, out)?;
            flatten_sum(b, &-k, out)
        }
        Neg(a) => flatten_sum(a, &-k, out),
        Tensor(c, x) if matches!(**c, Int(_)) => {
            let Int(c) = &**c else { unreachable!() };
            flatten_sum(x, &(k * c.value()?), out)
        }
        Int(c) => {
            out.push((Unit, k * c.value()?));
            Ok(())
        }
        _ => {
            out.push((e.canon()?, k.clone()));
            Ok(())
        }
    }
}

/// Splits the leftmost sum in a tensor product: `x = a + s b`.
fn split_sheaf(x: &KExpr) -> Option<(KExpr, KExpr, i64)> {
    use KExpr::*;
    match x {
        Add(a, b) => Some(((**a).clone(), (**b).clone(), 1)),
        Sub(a, b) => Some(((**a).clone(), (**b).clone(), -1)),
        Tensor(l, r) => {
            if let Some((a, b, s)) = split_sheaf(l) {
                Some((KExpr::tensor(a, (**r).clone()), KExpr::tensor(b, (**r).clone()), s))
            } else {
                let (a, b, s) = split_sheaf(r)?;
                Some((KExpr::tensor((**l).clone(), a), KExpr::tensor((**l).clone(), b), s))
            }
        }
        _ => None,
    }
}

fn split_lambda(x: &KExpr) -> Option<KExpr> {
    let (a, b, s) = split_sheaf(x)?;
    Some(KExpr::tensor(lambda_term(a, 1), lambda_term(b, s)))
}

fn distribute(f: Functor, x: &KExpr) -> Result<KExpr> {
    use KExpr::*;
    Ok(match x {
        Add(a, b) => KExpr::add(distribute(f, a)?, distribute(f, b)?),
        Sub(a, b) => KExpr::sub(distribute(f, a)?, distribute(f, b)?),
        Neg(a) => Neg(bx(distribute(f, a)?)),
        Tensor(a, b) if matches!(**a, Int(_)) => KExpr::tensor((**a).clone(), distribute(f, b)?),
        _ => Apply(f, bx(x.clone())),
    })
}

/// Flattens a product of `(O - A)` factors, expanding literal powers.
fn collect_ducrot(e: &KExpr, out: &mut Vec<KExpr>) -> Result<bool> {
    use KExpr::*;
    match e {
        Tensor(a, b) => Ok(collect_ducrot(a, out)? && collect_ducrot(b, out)?),
        Sub(o, a) if **o == Unit => {
            out.push((**a).clone());
            Ok(true)
        }
        Pow(base, n) => {
            let n = n.value()?;
            let Some(n) = n.to_u32().filter(|&n| n > 0) else {
                return Ok(false);
            };
            match &**base {
                Sub(o, a) if **o == Unit => {
                    out.extend(std::iter::repeat_n((**a).clone(), n as usize));
                    Ok(true)
                }
                _ => Ok(false),
            }
        }
        _ => Ok(false),
    }
}

/// The registry of axioms a script may cite.
#[derive(Debug, Clone, Default)]
pub struct AxiomRegistry {
    axioms: BTreeMap<String, RewriteAxiom>,
}

impl AxiomRegistry {
    /// The general-purpose axioms.
    pub fn standard() -> Self {
        let mut r = Self::default();
        let id = AxiomKind::Identity;
        let pats = [
            ("veeq", "O - ?X", "O + ?X{-1}", "inside lambda, F{-1} contributes the inverse line of F"),
            ("cancel-2", "2 - (O + ?X)", "O - ?X", "two copies of O minus (O + X)"),
            (
                "pk-identity",
                "?X * P(?k, ?X)",
                "[2^(?k + 1)] - (2 - ?X)^(?k + 1)",
                "t P_k(t) = 2^(k+1) - (2-t)^(k+1)",
            ),
        ];
        for (n, l, rt, a) in pats {
            r.register(RewriteAxiom::pattern(n, l, rt, id, a).expect("built-in axiom"));
        }
        r.register(RewriteAxiom::builtin("pk-expand", Builtin::PkExpand, id, "definition of P_k"));
        r.register(RewriteAxiom::builtin("binomial", Builtin::Binomial, id, "binomial expansion"));
        r.register(RewriteAxiom::builtin(
            "rp-linear",
            Builtin::Linear,
            id,
            "pushforward is additive on K-groups",
        ));
        r.register(RewriteAxiom::builtin(
            "ducrot-fold",
            Builtin::DucrotFold,
            id,
            "I(L_1, ..., L_n) is lambda of the product of the O - L_i",
        ));
        r.register(RewriteAxiom::builtin(
            "multadd",
            Builtin::Multadd,
            AxiomKind::Instance,
            "the intersection line is multiadditive in each argument",
        ));
        r.register(RewriteAxiom::builtin(
            "split",
            Builtin::Split,
            id,
            "lambda is additive in exact sequences",
        ));
        r.register(RewriteAxiom::builtin(
            "veeq-sign",
            Builtin::VeeqSign,
            id,
            "a block twisted by {-1} contributes the inverse line",
        ));
        r.register(RewriteAxiom::builtin(
            "line-cancel",
            Builtin::Trivialize,
            id,
            "a line tensored with its inverse is trivial",
        ));
        r.register(RewriteAxiom::builtin("collect", Builtin::Collect, id, "collect like terms"));
        r.register(RewriteAxiom::replace("cancel", "cancellation in the Grothendieck group"));
        r
    }

    pub fn register(&mut self, a: RewriteAxiom) {
        self.axioms.insert(a.name.clone(), a);
    }

    pub fn get(&self, name: &str) -> Option<&RewriteAxiom> {
        self.axioms.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.axioms.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomDecl {
    pub name: String,
    pub left: String,
    pub right: String,
    #[serde(default = "instance_kind")]
    pub kind: AxiomKind,
    #[serde(default)]
    pub anchor: String,
}

fn instance_kind() -> AxiomKind {
    AxiomKind::Instance
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub axiom: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Vec<usize>>,
    #[serde(default)]
    pub note: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub everywhere: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub params: BTreeMap<String, i64>,
    #[serde(default)]
    pub axioms: Vec<AxiomDecl>,
    pub start: String,
    pub end: String,
    pub steps: Vec<Step>,
}

impl Script {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("script: {e}")))
    }

    pub fn with_param(mut self, name: &str, value: i64) -> Result<Self> {
        match self.params.get_mut(name) {
            Some(v) => {
                *v = value;
                Ok(self)
            }
            None => Err(Error::Domain(format!("script `{}` has no parameter `{name}`", self.name))),
        }
    }

    /// Swaps steps `n` and `n + 1` (1-based).
    pub fn corrupt(mut self, n: usize) -> Result<Self> {
        if n == 0 || n >= self.steps.len() {
            return Err(Error::Domain(format!(
                "corruption index {n} out of range 1..{}",
                self.steps.len().saturating_sub(1)
            )));
        }
        self.steps.swap(n - 1, n);
        Ok(self)
    }

    fn param_map(&self) -> Params {
        self.params.iter().map(|(k, v)| (k.clone(), BigInt::from(*v))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepReport {
    /// 1-based.
    pub index: usize,
    pub axiom: String,
    pub anchor: String,
    pub note: String,
    pub ok: bool,
    pub line: String,
    pub normal_form: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub script: String,
    pub params: BTreeMap<String, i64>,
    pub start: String,
    pub end: String,
    pub steps: Vec<StepReport>,
    pub final_normal_form: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_step: Option<usize>,
}

fn rewrite_everywhere(ax: &RewriteAxiom, e: &KExpr, count: &mut usize) -> Result<KExpr> {
    if let Some(r) = ax.apply_root(e)? {
        *count += 1;
        return Ok(r);
    }
    let mut out = e.clone();
    for (c, o) in e.children().into_iter().zip(out.children_mut()) {
        *o = rewrite_everywhere(ax, c, count)?;
    }
    Ok(out)
}

fn first_match(ax: &RewriteAxiom, e: &KExpr, path: &mut Vec<usize>) -> Result<bool> {
    if ax.apply_root(e)?.is_some() {
        return Ok(true);
    }
    for (i, c) in e.children().into_iter().enumerate() {
        path.push(i);
        if first_match(ax, c, path)? {
            return Ok(true);
        }
        path.pop();
    }
    Ok(false)
}

fn fmt_path(p: &[usize]) -> String {
    format!("{p:?}")
}

/// Applies one step to `line`. Errors describe why the step is rejected.
fn apply_step(reg: &AxiomRegistry, step: &Step, line: &KExpr, params: &Params) -> Result<KExpr> {
    let ax = reg
        .get(&step.axiom)
        .ok_or_else(|| Error::Structural(format!("unknown axiom `{}`", step.axiom)))?;
    let next = if let Rule::Replace = ax.rule {
        let text = step
            .replace
            .as_ref()
            .ok_or_else(|| Error::Structural(format!("`{}` step needs a replacement", ax.name)))?;
        let new = parse_with(text, params)?.canon()?;
        let path = step.position.clone().unwrap_or_default();
        let old = line
            .at(&path)
            .ok_or_else(|| Error::Structural(format!("no subterm at {}", fmt_path(&path))))?;
        if ax.name == "cancel" {
            let (a, b) = (normal_form(old)?, normal_form(&new)?);
            if a != b {
                return Err(Error::Structural(format!(
                    "`{old}` and `{new}` differ: {a} vs {b}"
                )));
            }
        }
        line.replace_at(&path, new).expect("path checked")
    } else if step.everywhere {
        let mut count = 0;
        let base = match &step.position {
            Some(p) => p.clone(),
            None => vec![],
        };
        let sub = line
            .at(&base)
            .ok_or_else(|| Error::Structural(format!("no subterm at {}", fmt_path(&base))))?;
        let new = rewrite_everywhere(ax, sub, &mut count)?;
        if count == 0 {
            return Err(Error::Structural(format!("`{}` matches nowhere", ax.name)));
        }
        line.replace_at(&base, new).expect("path checked")
    } else {
        let path = match &step.position {
            Some(p) => p.clone(),
            None => {
                let mut p = Vec::new();
                if !first_match(ax, line, &mut p)? {
                    return Err(Error::Structural(format!("`{}` matches nowhere", ax.name)));
                }
                p
            }
        };
        let sub = line
            .at(&path)
            .ok_or_else(|| Error::Structural(format!("no subterm at {}", fmt_path(&path))))?;
        let new = ax.apply_root(sub)?.ok_or_else(|| {
            Error::Structural(format!("`{}` does not match `{sub}` at {}", ax.name, fmt_path(&path)))
        })?;
        line.replace_at(&path, new).expect("path checked")
    };
    if ax.kind == AxiomKind::Identity {
        let (a, b) = (normal_form(line)?, normal_form(&next)?);
        if a != b {
            return Err(Error::Structural(format!(
                "identity `{}` changed the normal form: {a} became {b}",
                ax.name
            )));
        }
    }
    if let Some(exp) = &step.expect {
        let exp = parse_with(exp, params)?.canon()?;
        if exp != next {
            return Err(Error::Structural(format!("expected `{exp}`, got `{next}`")));
        }
    }
    Ok(next)
}

fn nf_string(e: &KExpr) -> String {
    normal_form(e).map(|n| n.to_string()).unwrap_or_else(|err| format!("<{err}>"))
}

/// Validates a script against the standard axioms plus its own declared
/// instances. Step failures are reported, not raised; only malformed
/// scripts (unparsable start or end, bad declarations) are errors.
pub fn chain_verify(script: &Script) -> Result<ChainReport> {
    let params = script.param_map();
    let mut reg = AxiomRegistry::standard();
    for d in &script.axioms {
        reg.register(RewriteAxiom::pattern_with(&d.name, &d.left, &d.right, d.kind, &d.anchor, &params)?);
    }
    let start = parse_with(&script.start, &params)?.canon()?;
    let end = parse_with(&script.end, &params)?.canon()?;
    let mut steps = Vec::new();
    let mut line = start.clone();
    let mut failed = None;
    for (i, step) in script.steps.iter().enumerate() {
        let anchor = reg.get(&step.axiom).map(|a| a.anchor.clone()).unwrap_or_default();
        match apply_step(&reg, step, &line, &params) {
            Ok(next) => {
                line = next;
                steps.push(StepReport {
                    index: i + 1,
                    axiom: step.axiom.clone(),
                    anchor,
                    note: step.note.clone(),
                    ok: true,
                    line: line.to_string(),
                    normal_form: nf_string(&line),
                    error: None,
                });
            }
            Err(e) => {
                steps.push(StepReport {
                    index: i + 1,
                    axiom: step.axiom.clone(),
                    anchor,
                    note: step.note.clone(),
                    ok: false,
                    line: line.to_string(),
                    normal_form: nf_string(&line),
                    error: Some(e.to_string()),
                });
                failed = Some(i + 1);
                break;
            }
        }
    }
    let mut pass = failed.is_none();
    if pass {
        let (a, b) = (normal_form(&line)?, normal_form(&end)?);
        if a != b {
            pass = false;
            failed = Some(script.steps.len() + 1);
        }
    }
    Ok(ChainReport {
        script: script.name.clone(),
        params: script.params.clone(),
        start: start.to_string(),
        end: end.to_string(),
        final_normal_form: nf_string(&line),
        steps,
        pass,
        failed_step: failed,
    })
}

/// The multiadditivity computation for `I(L_1 * Q, L_2, ...)`, as a script.
pub fn multadd_script(lines: &[&str], q: &str) -> Result<Script> {
    if lines.is_empty() {
        return Err(Error::Domain("need at least one line".into()));
    }
    let l1 = lines[0];
    let rest: Vec<String> = lines[1..].iter().map(|l| format!("(O - {l})")).collect();
    let with_rest = |head: &str| {
        if rest.is_empty() {
            head.to_string()
        } else {
            format!("({head}) * {}", rest.join(" * "))
        }
    };
    let tail: String = lines[1..].iter().map(|l| format!(", {l}")).collect();
    let i_l = format!("I({l1}{tail})");
    let i_lq = format!("I({l1} * {q}{tail})");
    let i_q = format!("I({q}{tail})");
    let start = format!(
        "lambda((O - {q}) * (O - {l1}){})",
        rest.iter().map(|r| format!(" * {r}")).collect::<String>()
    );
    let a = format!("lambda({})", with_rest(&format!("O - {l1}")));
    let diff = format!("(O - {l1} * {q}) - (O - {q})");
    let line1 = format!("lambda({})", with_rest(&format!("(O - {l1}) - ({diff})")));
    let line2 = format!("{a} * lambda({})^-1", with_rest(&diff));
    let line3 = format!(
        "{a} * (lambda({}) * lambda({})^-1)^-1",
        with_rest(&format!("O - {l1} * {q}")),
        with_rest(&format!("O - {q}"))
    );
    let line4 = format!("{i_l} * ({i_lq} * {i_q}^-1)^-1");
    let line5 = format!("{i_l} * (({i_l} * {i_q}) * {i_q}^-1)^-1");
    // The product (O - Q) * (O - L1) sits under one tensor per further line.
    let mut head = vec![0];
    head.extend(std::iter::repeat_n(0, rest.len()));
    let step = |axiom: &str, position: Vec<usize>, everywhere: bool, replace: Option<String>, note: &str, expect: &str| Step {
        axiom: axiom.into(),
        position: Some(position),
        note: note.into(),
        everywhere,
        replace,
        expect: Some(expect.into()),
    };
    Ok(Script {
        name: format!("multadd({})", lines.len()),
        description: "multiadditivity of the intersection line in its first argument".into(),
        params: BTreeMap::new(),
        axioms: vec![],
        start,
        end: "lambda(0)".into(),
        steps: vec![
            step(
                "cancel",
                head,
                false,
                Some(format!("(O - {l1}) - ({diff})")),
                "(O - Q)(O - L1) = (O - L1) - ((O - L1 Q) - (O - Q))",
                &line1,
            ),
            step("split", vec![], false, None, "additivity", &line2),
            step("split", vec![1, 0], false, None, "additivity", &line3),
            step("ducrot-fold", vec![], true, None, "recognise intersection lines", &line4),
            step("multadd", vec![1, 0, 0], false, None, "multiadditivity in the first argument", &line5),
            step("line-cancel", vec![], false, None, "cancel inverse pairs", "lambda(0)"),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultaddReport {
    pub lhs: String,
    pub rhs: String,
    pub lhs_normal_form: String,
    pub rhs_normal_form: String,
    pub chain: ChainReport,
}

/// Both ends of the multiadditivity computation and the checked chain
/// between them.
pub fn multiadditivity_expand(lines: &[&str], q: &str) -> Result<(KExpr, KExpr, MultaddReport)> {
    let script = multadd_script(lines, q)?;
    let chain = chain_verify(&script)?;
    let lhs = parse_with(&script.start, &Params::new())?.canon()?;
    let rhs = parse_with(&script.end, &Params::new())?.canon()?;
    let report = MultaddReport {
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        lhs_normal_form: nf_string(&lhs),
        rhs_normal_form: nf_string(&rhs),
        chain,
    };
    Ok((lhs, rhs, report))
}
