//! Presented Chow rings of concrete smooth projective families.
//!
//! A model is a polynomial ring on weighted generators modulo homogeneous
//! rewrite rules `lead -> replacement`, where every replacement monomial is
//! smaller than its lead in graded-lex order (first generator largest).
//! Loading a model checks termination, confluence (critical pairs),
//! vanishing above the top degree, and that the point class spans the
//! top degree.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::charclass::{ch_from_chern, dual_ch, sym_ch, todd_from_chern, CharClass};
use crate::error::{Error, Result};
use crate::exactalg::{rat, Rational, TruncatedSeries, VarTable};

/// `lead -> sum coeff * monomial`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pub lead: Vec<u32>,
    pub replace: Vec<(Vec<u32>, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChowModel {
    pub name: String,
    vars: Arc<VarTable>,
    rules: Vec<RewriteRule>,
    rel_dim: u32,
    total_dim: u32,
    base: Vec<usize>,
    tangent_chern: TruncatedSeries,
    point_class: Vec<u32>,
}

/// Graded-lex comparison: weighted degree first, then the exponent of the
/// first generator, and so on.
pub fn monomial_cmp(vars: &VarTable, a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    vars.degree(a).cmp(&vars.degree(b)).then_with(|| a.cmp(b))
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn quotient(b: &[u32], a: &[u32]) -> Vec<u32> {
    b.iter().zip(a).map(|(y, x)| y - x).collect()
}

fn product(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// All exponent vectors of weighted degree exactly `deg`.
fn monomials_of_degree(vars: &VarTable, deg: u32) -> Vec<Vec<u32>> {
    fn go(vars: &VarTable, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == vars.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let w = vars.weight(i);
        for e in 0..=left / w {
            cur.push(e);
            go(vars, i + 1, left - e * w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(vars, 0, deg, &mut Vec::new(), &mut out);
    out
}

impl ChowModel {
    /// Validates and assembles a model. Series are re-homed onto the
    /// model's variable table and truncated at `total_dim`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        vars: VarTable,
        rules: Vec<RewriteRule>,
        rel_dim: u32,
        total_dim: u32,
        base_generators: &[&str],
        tangent_chern: Vec<(Vec<u32>, Rational)>,
        point_class: Vec<u32>,
    ) -> Result<Self> {
        let vars = Arc::new(vars);
        let n = vars.len();
        let invalid = |m: String| Error::InvalidModel(m);
        if n == 0 {
            return Err(invalid("model has no generators".into()));
        }
        if rel_dim > total_dim {
            return Err(invalid(format!("rel_dim {rel_dim} exceeds total_dim {total_dim}")));
        }
        let mut base = Vec::new();
        for b in base_generators {
            let i = vars
                .index_of(b)
                .ok_or_else(|| invalid(format!("unknown base generator `{b}`")))?;
            base.push(i);
        }
        base.sort_unstable();
        base.dedup();
        for r in &rules {
            if r.lead.len() != n || r.replace.iter().any(|(e, _)| e.len() != n) {
                return Err(invalid("rule exponent vector has the wrong length".into()));
            }
            if r.lead.iter().all(|&e| e == 0) {
                return Err(invalid("rule with constant lead".into()));
            }
            let d = vars.degree(&r.lead);
            for (e, _) in &r.replace {
                if vars.degree(e) != d {
                    return Err(invalid(format!(
                        "rule {:?} is not homogeneous (replacement term {:?})",
                        r.lead, e
                    )));
                }
                if monomial_cmp(&vars, e, &r.lead) != std::cmp::Ordering::Less {
                    return Err(invalid(format!(
                        "rule {:?} does not decrease the monomial order (term {:?}); rewriting may not terminate",
                        r.lead, e
                    )));
                }
            }
        }
        if point_class.len() != n {
            return Err(invalid("point class has the wrong length".into()));
        }
        let tangent = TruncatedSeries::from_terms(vars.clone(), total_dim, tangent_chern)
            .map_err(|e| invalid(e.to_string()))?;
        let model = Self {
            name: name.into(),
            vars,
            rules,
            rel_dim,
            total_dim,
            base,
            tangent_chern: tangent,
            point_class,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |m: String| Error::InvalidModel(m);
        // Confluence: every critical pair joins.
        let unbounded = self.total_dim + 2 * self.vars.max_weight() * 8;
        for (i, r) in self.rules.iter().enumerate() {
            for s in &self.rules[i + 1..] {
                let m = lcm(&r.lead, &s.lead);
                if self.vars.degree(&m) > self.total_dim + self.vars.max_weight() {
                    continue;
                }
                let via = |rule: &RewriteRule| -> Result<TruncatedSeries> {
                    let q = quotient(&m, &rule.lead);
                    let terms = rule.replace.iter().map(|(e, c)| (product(e, &q), c.clone()));
                    let s = TruncatedSeries::from_terms(self.vars.clone(), unbounded, terms)?;
                    Ok(self.reduce(&s))
                };
                if via(r)? != via(s)? {
                    return Err(invalid(format!(
                        "rules {:?} and {:?} are not confluent at {:?}",
                        r.lead, s.lead, m
                    )));
                }
            }
        }
        // Dimension closure: no standard monomials just above the top degree.
        for deg in self.total_dim + 1..=self.total_dim + self.vars.max_weight() {
            if let Some(m) = self.standard_monomials(deg).first() {
                return Err(invalid(format!(
                    "monomial {m:?} of degree {deg} > total_dim survives reduction"
                )));
            }
        }
        let top = self.standard_monomials(self.total_dim);
        if top != vec![self.point_class.clone()] {
            return Err(invalid(format!(
                "point class {:?} is not the unique top-degree standard monomial (found {:?})",
                self.point_class, top
            )));
        }
        if !self.tangent_chern.constant_term().is_one() {
            return Err(invalid("tangent_chern must have constant term 1".into()));
        }
        Ok(())
    }

    /// Monomials of degree `deg` divisible by no rule lead.
    pub fn standard_monomials(&self, deg: u32) -> Vec<Vec<u32>> {
        monomials_of_degree(&self.vars, deg)
            .into_iter()
            .filter(|m| !self.rules.iter().any(|r| divides(&r.lead, m)))
            .collect()
    }

    fn reduce(&self, s: &TruncatedSeries) -> TruncatedSeries {
        let mut cur = s.clone();
        loop {
            // Rewrite the largest reducible term first; replacements are
            // strictly smaller, so this terminates.
            let hit = cur
                .terms()
                .filter_map(|(e, c)| {
                    self.rules
                        .iter()
                        .find(|r| divides(&r.lead, e))
                        .map(|r| (e.clone(), c.clone(), r))
                })
                .max_by(|a, b| monomial_cmp(&self.vars, &a.0, &b.0));
            let Some((e, c, rule)) = hit else {
                return cur;
            };
            let q = quotient(&e, &rule.lead);
            let mut next = cur.clone();
            next.add_term(e, -c.clone());
            for (r, rc) in &rule.replace {
                next.add_term(product(r, &q), &c * rc);
            }
            cur = next;
        }
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn rel_dim(&self) -> u32 {
        self.rel_dim
    }

    pub fn total_dim(&self) -> u32 {
        self.total_dim
    }

    pub fn base_dim(&self) -> u32 {
        self.total_dim - self.rel_dim
    }

    pub fn base_generators(&self) -> Vec<&str> {
        self.base.iter().map(|&i| self.vars.name(i)).collect()
    }

    pub fn tangent_chern(&self) -> &TruncatedSeries {
        &self.tangent_chern
    }

    pub fn point_class(&self) -> &[u32] {
        &self.point_class
    }

    pub fn zero(&self) -> TruncatedSeries {
        TruncatedSeries::zero(self.vars.clone(), self.total_dim)
    }

    pub fn one(&self) -> TruncatedSeries {
        TruncatedSeries::one(self.vars.clone(), self.total_dim)
    }

    pub fn generator(&self, name: &str) -> Result<TruncatedSeries> {
        TruncatedSeries::var(self.vars.clone(), self.total_dim, name)
    }

    /// Builds a class from `(exponents, coefficient)` pairs.
    pub fn class(&self, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Result<TruncatedSeries> {
        TruncatedSeries::from_terms(self.vars.clone(), self.total_dim, terms)
    }

    fn check_home(&self, c: &TruncatedSeries) -> Result<()> {
        if **c.vars() != *self.vars {
            return Err(Error::Domain(format!(
                "class does not use the generators of model `{}`",
                self.name
            )));
        }
        Ok(())
    }

    /// Fully reduced representative of `c` in the model's Chow ring.
    pub fn normal_form(&self, c: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check_home(c)?;
        Ok(self.reduce(&c.truncate(self.total_dim)))
    }

    /// Degree of `c`: the coefficient of the point class after reduction.
    pub fn integrate(&self, c: &TruncatedSeries) -> Result<Rational> {
        Ok(self.normal_form(c)?.coeff(&self.point_class))
    }

    /// The point class with base generators removed.
    pub fn relative_point_class(&self) -> Vec<u32> {
        let mut e = self.point_class.clone();
        for &i in &self.base {
            e[i] = 0;
        }
        e
    }

    fn base_part(&self, e: &[u32]) -> Vec<u32> {
        let mut out = vec![0; e.len()];
        for &i in &self.base {
            out[i] = e[i];
        }
        out
    }

    fn require_base(&self) -> Result<()> {
        if self.base.is_empty() && self.base_dim() > 0 {
            return Err(Error::UnsupportedModel(format!(
                "model `{}` declares no base generators",
                self.name
            )));
        }
        if self.base_dim() == 0 && !self.base.is_empty() {
            return Err(Error::UnsupportedModel(format!(
                "model `{}` has base generators but a zero-dimensional base",
                self.name
            )));
        }
        Ok(())
    }

    /// Pushforward to the base: keeps the terms whose fiber part is the
    /// relative point class, and drops that fiber part.
    pub fn fiber_pushforward(&self, c: &TruncatedSeries) -> Result<TruncatedSeries> {
        if self.base.is_empty() && self.base_dim() > 0 {
            return Err(Error::UnsupportedModel(format!(
                "model `{}` declares no base structure",
                self.name
            )));
        }
        let rel = self.relative_point_class();
        let nf = self.normal_form(c)?;
        let mut out = self.zero();
        for (e, coeff) in nf.terms() {
            let b = self.base_part(e);
            let fiber: Vec<u32> = e.iter().zip(&b).map(|(x, y)| x - y).collect();
            if fiber == rel {
                out.add_term(b, coeff.clone());
            }
        }
        Ok(out)
    }

    /// Degree on the base of a class supported on base generators.
    pub fn integrate_base(&self, beta: &TruncatedSeries) -> Result<Rational> {
        self.require_base()?;
        Ok(beta.coeff(&self.base_part(&self.point_class)))
    }

    /// `Td(T_f)`.
    pub fn todd(&self) -> CharClass {
        todd_from_chern(&self.tangent_chern).expect("validated tangent class")
    }

    /// `ch(T_f)`.
    pub fn tangent_ch(&self) -> CharClass {
        ch_from_chern(self.rel_dim as i64, &self.tangent_chern).expect("validated tangent class")
    }

    /// `ch(Omega_f)`.
    pub fn cotangent_ch(&self) -> CharClass {
        dual_ch(&self.tangent_ch())
    }

    /// Sum of weight-one generators with the given coefficients, in order.
    pub fn line_class(&self, coeffs: &[i64]) -> Result<TruncatedSeries> {
        let gens: Vec<usize> = (0..self.vars.len()).filter(|&i| self.vars.weight(i) == 1).collect();
        if coeffs.len() != gens.len() {
            return Err(Error::Domain(format!(
                "model `{}` has {} degree-one generators, got {} coefficients",
                self.name,
                gens.len(),
                coeffs.len()
            )));
        }
        let mut out = self.zero();
        for (&i, &c) in gens.iter().zip(coeffs) {
            let mut e = vec![0; self.vars.len()];
            e[i] = 1;
            out.add_term(e, rat(c));
        }
        Ok(out)
    }

    /// Parses a bundle expression (see [`parse_bundle`]).
    pub fn bundle(&self, text: &str) -> Result<BundleClass> {
        parse_bundle(self, text)
    }

    /// Serializable description in the model-file schema.
    pub fn to_file(&self) -> ModelFile {
        let terms = |s: &TruncatedSeries| {
            s.sorted_terms()
                .into_iter()
                .map(|(e, c)| FileTerm {
                    exponents: e.clone(),
                    coeff: c.to_string(),
                })
                .collect()
        };
        ModelFile {
            name: self.name.clone(),
            generators: self
                .vars
                .vars()
                .iter()
                .map(|v| FileGenerator {
                    name: v.name.clone(),
                    weight: v.weight,
                })
                .collect(),
            relations: self
                .rules
                .iter()
                .map(|r| FileRelation {
                    lead: r.lead.clone(),
                    replace: r
                        .replace
                        .iter()
                        .map(|(e, c)| FileTerm {
                            exponents: e.clone(),
                            coeff: c.to_string(),
                        })
                        .collect(),
                })
                .collect(),
            rel_dim: self.rel_dim,
            total_dim: self.total_dim,
            base_generators: self.base_generators().into_iter().map(String::from).collect(),
            tangent_chern: terms(&self.tangent_chern),
            point_class: self.point_class.clone(),
        }
    }
}

impl fmt::Display for ChowModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (dim {}, fiber dim {})", self.name, self.total_dim, self.rel_dim)
    }
}

// ---------------------------------------------------------------------------
// Model files

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileGenerator {
    pub name: String,
    pub weight: u32,
}

/// A coefficient is written as an integer or a fraction string (`"-3/2"`);
/// plain JSON integers are accepted too.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileTerm {
    pub exponents: Vec<u32>,
    #[serde(deserialize_with = "de_coeff")]
    pub coeff: String,
}

fn de_coeff<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    let v = serde_json::Value::deserialize(d)?;
    match v {
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::String(s) => Ok(s),
        other => Err(serde::de::Error::custom(format!("bad coefficient {other}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRelation {
    pub lead: Vec<u32>,
    pub replace: Vec<FileTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub generators: Vec<FileGenerator>,
    pub relations: Vec<FileRelation>,
    pub rel_dim: u32,
    pub total_dim: u32,
    #[serde(default)]
    pub base_generators: Vec<String>,
    pub tangent_chern: Vec<FileTerm>,
    pub point_class: Vec<u32>,
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl ModelFile {
    pub fn into_model(self) -> Result<ChowModel> {
        let vars = VarTable::new(self.generators.iter().map(|g| (g.name.clone(), g.weight)))
            .map_err(|e| Error::InvalidModel(e.to_string()))?;
        let terms = |ts: &[FileTerm]| -> Result<Vec<(Vec<u32>, Rational)>> {
            ts.iter()
                .map(|t| Ok((t.exponents.clone(), parse_rational(&t.coeff)?)))
                .collect()
        };
        let rules = self
            .relations
            .iter()
            .map(|r| {
                Ok(RewriteRule {
                    lead: r.lead.clone(),
                    replace: terms(&r.replace)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let base: Vec<&str> = self.base_generators.iter().map(String::as_str).collect();
        ChowModel::new(
            self.name.clone(),
            vars,
            rules,
            self.rel_dim,
            self.total_dim,
            &base,
            terms(&self.tangent_chern)?,
            self.point_class.clone(),
        )
    }
}

/// Parses and validates a JSON model document.
pub fn load_model(text: &str) -> Result<ChowModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    file.into_model()
}

// ---------------------------------------------------------------------------
// Built-in models

fn unit(n: usize, i: usize, p: u32) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = p;
    e
}

fn binomial_i64(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// `P^n` over a point: `h^{n+1} = 0`, `c(T) = (1+h)^{n+1}`.
pub fn projective_space(n: u32) -> Result<ChowModel> {
    if n == 0 {
        return Err(Error::Domain("P^0 has no generator; use n >= 1".into()));
    }
    let vars = VarTable::uniform(["h"])?;
    let tangent = (0..=n).map(|k| (vec![k], rat(binomial_i64(n + 1, k)))).collect();
    ChowModel::new(
        format!("Pn({n})"),
        vars,
        vec![RewriteRule {
            lead: vec![n + 1],
            replace: vec![],
        }],
        n,
        n,
        &[],
        tangent,
        vec![n],
    )
}

/// `P^n x P^m`, viewed as the trivial family over the `P^m` factor
/// (generators `h`, `s`; base generator `s`).
pub fn product_pn_pm(n: u32, m: u32) -> Result<ChowModel> {
    if n == 0 || m == 0 {
        return Err(Error::Domain("both factors need positive dimension".into()));
    }
    let vars = VarTable::uniform(["h", "s"])?;
    let tangent = (0..=n)
        .map(|k| (vec![k, 0], rat(binomial_i64(n + 1, k))))
        .collect();
    ChowModel::new(
        format!("PnxPm({n},{m})"),
        vars,
        vec![
            RewriteRule {
                lead: unit(2, 0, n + 1),
                replace: vec![],
            },
            RewriteRule {
                lead: unit(2, 1, m + 1),
                replace: vec![],
            },
        ],
        n,
        n + m,
        &["s"],
        tangent,
        vec![n, m],
    )
}

/// Hirzebruch surface `F_e = P(O + O(-e))` over `P^1`.
///
/// Generators `z` (relative hyperplane class) and `f` (fiber). Relations
/// `f^2 = 0`, `z^2 = -e z f`; relative tangent class `1 + 2z + e f`.
pub fn hirzebruch(e: i64) -> Result<ChowModel> {
    let vars = VarTable::uniform(["z", "f"])?;
    let mut z2 = RewriteRule {
        lead: vec![2, 0],
        replace: vec![],
    };
    if e != 0 {
        z2.replace.push((vec![1, 1], rat(-e)));
    }
    ChowModel::new(
        format!("Hirzebruch({e})"),
        vars,
        vec![
            z2,
            RewriteRule {
                lead: vec![0, 2],
                replace: vec![],
            },
        ],
        1,
        2,
        &["f"],
        vec![(vec![0, 0], rat(1)), (vec![1, 0], rat(2)), (vec![0, 1], rat(e))],
        vec![1, 1],
    )
}

/// Resolves a built-in model by name: `Pn`, `PnxPm`, `Hirzebruch`
/// (parameters given separately), or a full spec such as `Pn(2)`,
/// `PnxPm(1,1)`, `Hirzebruch(3)`.
pub fn builtin(name: &str, n: Option<u32>, m: Option<u32>, e: Option<i64>) -> Result<ChowModel> {
    let (head, args) = match name.split_once('(') {
        Some((h, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced model spec `{name}`")))?;
            let args: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).collect();
            (h.trim(), args)
        }
        None => (name.trim(), Vec::new()),
    };
    let arg = |i: usize| -> Result<Option<i64>> {
        args.get(i)
            .map(|s| {
                s.parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad model parameter `{s}`")))
            })
            .transpose()
    };
    let nonneg = |v: i64| -> Result<u32> {
        u32::try_from(v).map_err(|_| Error::Domain(format!("dimension {v} must be non-negative")))
    };
    match head.to_ascii_lowercase().as_str() {
        "pn" | "p" => {
            let n = match arg(0)? {
                Some(v) => nonneg(v)?,
                None => n.unwrap_or(1),
            };
            projective_space(n)
        }
        "pnxpm" | "p1xp1" => {
            let n = match arg(0)? {
                Some(v) => nonneg(v)?,
                None => n.unwrap_or(1),
            };
            let m = match arg(1)? {
                Some(v) => nonneg(v)?,
                None => m.unwrap_or(1),
            };
            product_pn_pm(n, m)
        }
        "hirzebruch" | "f" => hirzebruch(arg(0)?.or(e).unwrap_or(0)),
        _ => Err(Error::UnsupportedModel(format!("unknown built-in model `{name}`"))),
    }
}

// ---------------------------------------------------------------------------
// Bundle classes

/// A (virtual) bundle on a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BundleClass {
    /// Presented by rank and total Chern class.
    Chern { rank: i64, chern: TruncatedSeries },
    /// Formal combination `sum coeff * L(v)` of line bundles whose first
    /// Chern class is the generator combination `v`. Kept symbolic until
    /// `ch` is requested.
    LineCombo(Vec<(i64, TruncatedSeries)>),
    /// Already in Chern-character form.
    Character(CharClass),
}

impl BundleClass {
    pub fn line(c1: TruncatedSeries) -> Self {
        BundleClass::LineCombo(vec![(1, c1)])
    }

    pub fn ch(&self) -> Result<CharClass> {
        match self {
            BundleClass::Chern { rank, chern } => ch_from_chern(*rank, chern),
            BundleClass::LineCombo(terms) => {
                let Some((_, first)) = terms.first() else {
                    return Err(Error::Domain("empty line combination".into()));
                };
                let mut acc = TruncatedSeries::zero(first.vars().clone(), first.bound());
                for (k, c1) in terms {
                    acc = &acc + &c1.exp()?.scale(&rat(*k));
                }
                Ok(CharClass::new(acc))
            }
            BundleClass::Character(c) => Ok(c.clone()),
        }
    }

    pub fn rank(&self) -> Result<BigInt> {
        let r = self.ch()?.rank();
        if !r.is_integer() {
            return Err(Error::Domain("non-integral rank".into()));
        }
        Ok(r.to_integer())
    }
}

/// Parses a bundle expression on `model`.
///
/// Grammar (whitespace-insensitive):
///
/// ```text
/// sum    := term (("+" | "-") term)*
/// term   := factor ("*" factor)*
/// factor := atom ("^" int)?
/// atom   := "O" | "O(" ints ")" | "O(" linear ")" | "Omega" | "T"
///         | "Sym^" int "(" sum ")" | "dual(" sum ")" | int | "(" sum ")"
/// ```
///
/// `O(a,b)` lists coefficients of the degree-one generators in order;
/// `O(2h+s)` names them. `*` is the tensor product, `^k` the tensor power
/// (`^-1` the dual), and an integer `n` stands for `n` copies of `O`.
pub fn parse_bundle(model: &ChowModel, text: &str) -> Result<BundleClass> {
    let mut p = BundleParser {
        model,
        src: text.as_bytes(),
        pos: 0,
    };
    let v = p.sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(BundleClass::Character(CharClass::new(v)))
}

struct BundleParser<'a> {
    model: &'a ChowModel,
    src: &'a [u8],
    pos: usize,
}

impl BundleParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!(
            "bundle expression at byte {}: {msg} in `{}`",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{s}`")))
        }
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("expected integer"))
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn sum(&mut self) -> Result<TruncatedSeries> {
        let mut acc = self.term()?;
        loop {
            if self.eat("+") {
                acc = &acc + &self.term()?;
            } else if self.peek() == Some(b'-') {
                self.pos += 1;
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<TruncatedSeries> {
        let mut acc = self.factor()?;
        while self.eat("*") {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<TruncatedSeries> {
        let base = self.atom()?;
        if self.eat("^") {
            let k = self.int()?;
            if k >= 0 {
                return Ok(base.pow(k as u32));
            }
            let dual = dual_ch(&CharClass::new(base)).carrier;
            return Ok(dual.pow((-k) as u32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<TruncatedSeries> {
        let m = self.model;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                self.expect(")")?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.int()?;
                Ok(TruncatedSeries::constant(m.vars.clone(), m.total_dim, rat(n)))
            }
            Some(_) => {
                let id = self.ident();
                match id.as_str() {
                    "O" => {
                        if self.peek() == Some(b'(') {
                            self.pos += 1;
                            let c1 = self.line_args()?;
                            self.expect(")")?;
                            c1.exp()
                        } else {
                            Ok(m.one())
                        }
                    }
                    "Omega" => Ok(m.cotangent_ch().carrier),
                    "T" => Ok(m.tangent_ch().carrier),
                    "Sym" => {
                        self.expect("^")?;
                        let j = self.int()?;
                        if j < 0 {
                            return Err(self.err("negative symmetric power"));
                        }
                        self.expect("(")?;
                        let inner = self.sum()?;
                        self.expect(")")?;
                        Ok(sym_ch(&CharClass::new(inner), j as u32).carrier)
                    }
                    "dual" => {
                        self.expect("(")?;
                        let inner = self.sum()?;
                        self.expect(")")?;
                        Ok(dual_ch(&CharClass::new(inner)).carrier)
                    }
                    "" => Err(self.err("expected a bundle")),
                    other => Err(self.err(&format!("unknown bundle `{other}`"))),
                }
            }
            None => Err(self.err("unexpected end of input")),
        }
    }

    /// `a,b,...` (coefficients of degree-one generators) or `2h - s`.
    fn line_args(&mut self) -> Result<TruncatedSeries> {
        let save = self.pos;
        let mut ints = Vec::new();
        let numeric = loop {
            match self.int() {
                Ok(v) => ints.push(v),
                Err(_) => break false,
            }
            if self.peek() == Some(b')') {
                break true;
            }
            if !self.eat(",") {
                break false;
            }
        };
        if numeric {
            return self.model.line_class(&ints);
        }
        self.pos = save;
        let mut acc = self.model.zero();
        let mut first = true;
        loop {
            let sign = if self.eat("-") {
                -1
            } else if self.eat("+") || first {
                1
            } else {
                return Ok(acc);
            };
            first = false;
            self.skip_ws();
            let mut coeff = 1i64;
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                coeff = self.int()?;
                self.eat("*");
            }
            let name = self.ident();
            let g = self
                .model
                .generator(&name)
                .map_err(|_| self.err(&format!("unknown generator `{name}`")))?;
            if self.model.vars.weight(self.model.vars.index_of(&name).unwrap_or(0)) != 1 {
                return Err(self.err("line classes use degree-one generators"));
            }
            acc = &acc + &g.scale(&rat(sign * coeff));
            if self.peek() == Some(b')') {
                return Ok(acc);
            }
        }
    }
}

/// Reads an integer from a rational that must be integral.
pub fn integral(r: &Rational) -> Option<BigInt> {
    r.is_integer().then(|| r.to_integer())
}

/// Convenience for reports: a rational as `i64` when integral and small.
pub fn small_int(r: &Rational) -> Option<i64> {
    integral(r).and_then(|n| n.to_i64())
}

/// Standard monomials of every degree up to `total_dim`, for inspection.
pub fn basis(model: &ChowModel) -> BTreeSet<Vec<u32>> {
    (0..=model.total_dim)
        .flat_map(|d| model.standard_monomials(d))
        .collect()
}
