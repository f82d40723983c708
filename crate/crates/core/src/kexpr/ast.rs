//! Expression trees for virtual sheaves and determinant lines.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinat::{binomial, pow2};
use crate::error::{Error, Result};

/// Integer-valued expressions: multiplicities, exponents, symmetric-power
/// degrees. Variables are script parameters left unbound or pattern
/// variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntExpr {
    Lit(BigInt),
    Var(String),
    Add(Box<IntExpr>, Box<IntExpr>),
    Sub(Box<IntExpr>, Box<IntExpr>),
    Mul(Box<IntExpr>, Box<IntExpr>),
    Pow(Box<IntExpr>, Box<IntExpr>),
    Neg(Box<IntExpr>),
    /// Binomial coefficient.
    C(Box<IntExpr>, Box<IntExpr>),
    /// `W(n, j) = sum_{i=j}^{n} 2^{n-i} C(i, j)`.
    W(Box<IntExpr>, Box<IntExpr>),
}

impl IntExpr {
    pub fn lit(n: impl Into<BigInt>) -> Self {
        IntExpr::Lit(n.into())
    }

    pub fn eval(&self, env: &BTreeMap<String, BigInt>) -> Result<BigInt> {
        use IntExpr::*;
        let small = |v: BigInt, what: &str| -> Result<u32> {
            v.to_u32()
                .ok_or_else(|| Error::Domain(format!("{what} {v} out of range")))
        };
        Ok(match self {
            Lit(n) => n.clone(),
            Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| Error::Domain(format!("unbound integer variable `{v}`")))?,
            Add(a, b) => a.eval(env)? + b.eval(env)?,
            Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Neg(a) => -a.eval(env)?,
            Pow(a, b) => {
                let base = a.eval(env)?;
                let e = small(b.eval(env)?, "exponent")?;
                num_traits::pow(base, e as usize)
            }
            C(n, k) => {
                let n = n.eval(env)?;
                let k = k.eval(env)?;
                if k.is_negative() || n.is_negative() {
                    BigInt::zero()
                } else {
                    binomial(small(n, "binomial top")?, small(k, "binomial bottom")?)
                }
            }
            W(n, j) => {
                let n = small(n.eval(env)?, "W top")?;
                let j = small(j.eval(env)?, "W bottom")?;
                (j..=n).map(|i| pow2(n - i) * binomial(i, j)).sum()
            }
        })
    }

    /// Value when no variables occur.
    pub fn value(&self) -> Result<BigInt> {
        self.eval(&BTreeMap::new())
    }

    pub fn substitute(&self, env: &BTreeMap<String, BigInt>) -> IntExpr {
        use IntExpr::*;
        let s = |e: &IntExpr| Box::new(e.substitute(env));
        match self {
            Lit(_) => self.clone(),
            Var(v) => env.get(v).map(|n| Lit(n.clone())).unwrap_or_else(|| self.clone()),
            Add(a, b) => Add(s(a), s(b)),
            Sub(a, b) => Sub(s(a), s(b)),
            Mul(a, b) => Mul(s(a), s(b)),
            Pow(a, b) => Pow(s(a), s(b)),
            Neg(a) => Neg(s(a)),
            C(a, b) => C(s(a), s(b)),
            W(a, b) => W(s(a), s(b)),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            IntExpr::Add(..) | IntExpr::Sub(..) => 1,
            IntExpr::Mul(..) => 2,
            IntExpr::Neg(_) => 3,
            IntExpr::Pow(..) => 4,
            IntExpr::Lit(n) if n.is_negative() => 3,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.prec();
        if p < min {
            write!(f, "(")?;
        }
        match self {
            IntExpr::Lit(n) => write!(f, "{n}")?,
            IntExpr::Var(v) => write!(f, "?{v}")?,
            IntExpr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            IntExpr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            IntExpr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " * ")?;
                b.fmt_prec(f, 3)?;
            }
            IntExpr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            IntExpr::Pow(a, b) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^")?;
                b.fmt_prec(f, 4)?;
            }
            IntExpr::C(a, b) => write!(f, "C({a}, {b})")?,
            IntExpr::W(a, b) => write!(f, "W({a}, {b})")?,
        }
        if p < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Functors that may wrap an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Functor {
    /// Pullback to the fixed locus.
    Iota,
    /// Pullback along the blow-up.
    B,
    /// Pullback to the exceptional divisor.
    Mu,
    /// Pullback along the projective bundle `P(N) -> X_G`.
    PPull,
    /// Pullback along the quotient map.
    QPull,
    /// Derived pushforward along the projective bundle.
    Rp,
    /// Pushforward along the quotient map.
    Q,
    /// Invariant part of the pushforward along the quotient map.
    Qp,
    /// Anti-invariant part of the pushforward along the quotient map.
    Qm,
}

impl Functor {
    pub const ALL: [Functor; 9] = [
        Functor::Iota,
        Functor::B,
        Functor::Mu,
        Functor::PPull,
        Functor::QPull,
        Functor::Rp,
        Functor::Q,
        Functor::Qp,
        Functor::Qm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Functor::Iota => "iota",
            Functor::B => "b",
            Functor::Mu => "mu",
            Functor::PPull => "ppull",
            Functor::QPull => "qpull",
            Functor::Rp => "Rp",
            Functor::Q => "q",
            Functor::Qp => "qp",
            Functor::Qm => "qm",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Pullbacks are ring homomorphisms; the rest are only additive.
    pub fn is_pullback(self) -> bool {
        matches!(
            self,
            Functor::Iota | Functor::B | Functor::Mu | Functor::PPull | Functor::QPull
        )
    }
}

/// A formal virtual sheaf (inside `lambda`) or a determinant line
/// (outside it).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KExpr {
    /// The structure sheaf `O`; at line level, the trivial line.
    Unit,
    /// `n` copies of `O`.
    Int(IntExpr),
    Atom(String),
    /// Pattern variable `?X`.
    Var(String),
    Add(Box<KExpr>, Box<KExpr>),
    Sub(Box<KExpr>, Box<KExpr>),
    Neg(Box<KExpr>),
    Tensor(Box<KExpr>, Box<KExpr>),
    /// Tensor power; at line level any integer exponent, `-1` is the dual.
    Pow(Box<KExpr>, IntExpr),
    Dual(Box<KExpr>),
    /// `F{-1}` repeated `n` times.
    Twist(Box<KExpr>, IntExpr),
    Sym(IntExpr, Box<KExpr>),
    /// `P_k` evaluated at the argument.
    Pk(IntExpr, Box<KExpr>),
    Apply(Functor, Box<KExpr>),
    Lambda(Box<KExpr>),
    /// `I(A_1, ..., A_n) = lambda(prod (O - A_i))`.
    Ducrot(Vec<KExpr>),
}

pub fn bx(e: KExpr) -> Box<KExpr> {
    Box::new(e)
}

impl KExpr {
    pub fn atom(s: &str) -> Self {
        KExpr::Atom(s.to_string())
    }

    pub fn int(n: impl Into<BigInt>) -> Self {
        KExpr::Int(IntExpr::lit(n))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: KExpr, b: KExpr) -> Self {
        KExpr::Add(bx(a), bx(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: KExpr, b: KExpr) -> Self {
        KExpr::Sub(bx(a), bx(b))
    }

    pub fn tensor(a: KExpr, b: KExpr) -> Self {
        KExpr::Tensor(bx(a), bx(b))
    }

    pub fn pow(a: KExpr, n: impl Into<BigInt>) -> Self {
        KExpr::Pow(bx(a), IntExpr::lit(n))
    }

    pub fn twist(a: KExpr) -> Self {
        KExpr::Twist(bx(a), IntExpr::lit(1))
    }

    pub fn lambda(a: KExpr) -> Self {
        KExpr::Lambda(bx(a))
    }

    /// Left-associated sum; `0` when empty.
    pub fn sum(terms: impl IntoIterator<Item = KExpr>) -> Self {
        terms
            .into_iter()
            .reduce(KExpr::add)
            .unwrap_or_else(|| KExpr::int(0))
    }

    /// Left-associated tensor product; `O` when empty.
    pub fn product(terms: impl IntoIterator<Item = KExpr>) -> Self {
        terms.into_iter().reduce(KExpr::tensor).unwrap_or(KExpr::Unit)
    }

    pub fn children(&self) -> Vec<&KExpr> {
        use KExpr::*;
        match self {
            Unit | Int(_) | Atom(_) | Var(_) => vec![],
            Add(a, b) | Sub(a, b) | Tensor(a, b) => vec![a, b],
            Neg(a) | Pow(a, _) | Dual(a) | Twist(a, _) | Sym(_, a) | Pk(_, a) | Apply(_, a)
            | Lambda(a) => vec![a],
            Ducrot(v) => v.iter().collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut KExpr> {
        use KExpr::*;
        match self {
            Unit | Int(_) | Atom(_) | Var(_) => vec![],
            Add(a, b) | Sub(a, b) | Tensor(a, b) => vec![a, b],
            Neg(a) | Pow(a, _) | Dual(a) | Twist(a, _) | Sym(_, a) | Pk(_, a) | Apply(_, a)
            | Lambda(a) => vec![a],
            Ducrot(v) => v.iter_mut().collect(),
        }
    }

    /// Subterm at a child-index path.
    pub fn at(&self, path: &[usize]) -> Option<&KExpr> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut KExpr> {
        let mut cur = self;
        for &i in path {
            cur = cur.children_mut().into_iter().nth(i)?;
        }
        Some(cur)
    }

    /// Copy with the subterm at `path` replaced.
    pub fn replace_at(&self, path: &[usize], new: KExpr) -> Option<KExpr> {
        let mut out = self.clone();
        *out.at_mut(path)? = new;
        Some(out)
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    fn map_ints(&self, f: &mut impl FnMut(&IntExpr) -> Result<IntExpr>) -> Result<KExpr> {
        use KExpr::*;
        macro_rules! rec {
            ($e:expr) => {
                $e.map_ints(&mut *f).map(bx)
            };
        }
        Ok(match self {
            Unit | Atom(_) | Var(_) => self.clone(),
            Int(n) => Int(f(n)?),
            Add(a, b) => Add(rec!(a)?, rec!(b)?),
            Sub(a, b) => Sub(rec!(a)?, rec!(b)?),
            Tensor(a, b) => Tensor(rec!(a)?, rec!(b)?),
            Neg(a) => Neg(rec!(a)?),
            Dual(a) => Dual(rec!(a)?),
            Lambda(a) => Lambda(rec!(a)?),
            Apply(g, a) => Apply(*g, rec!(a)?),
            Pow(a, n) => {
                let a = rec!(a)?;
                Pow(a, f(n)?)
            }
            Twist(a, n) => {
                let a = rec!(a)?;
                Twist(a, f(n)?)
            }
            Sym(n, a) => {
                let n = f(n)?;
                Sym(n, rec!(a)?)
            }
            Pk(n, a) => {
                let n = f(n)?;
                Pk(n, rec!(a)?)
            }
            Ducrot(v) => Ducrot(
                v.iter()
                    .map(|e| e.map_ints(&mut *f))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }

    /// Evaluates every integer subexpression to a literal, so trees that
    /// differ only in how an integer is written compare equal.
    pub fn canon(&self) -> Result<KExpr> {
        self.map_ints(&mut |n| Ok(IntExpr::Lit(n.value()?)))
    }

    /// Substitutes integer variables (leaving unknown ones in place).
    pub fn substitute_ints(&self, env: &BTreeMap<String, BigInt>) -> KExpr {
        self.map_ints(&mut |n| Ok(n.substitute(env))).expect("infallible")
    }

    pub fn has_vars(&self) -> bool {
        let mut found = false;
        let _ = self.map_ints(&mut |n| {
            if int_has_vars(n) {
                found = true;
            }
            Ok(n.clone())
        });
        found || matches!(self, KExpr::Var(_)) || self.children().iter().any(|c| c.has_vars())
    }

    fn prec(&self) -> u8 {
        use KExpr::*;
        match self {
            Add(..) | Sub(..) => 1,
            Tensor(..) => 2,
            Neg(_) => 3,
            Pow(..) | Twist(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        use KExpr::*;
        let p = self.prec();
        if p < min {
            write!(f, "(")?;
        }
        match self {
            Unit => write!(f, "O")?,
            Int(IntExpr::Lit(n)) if !n.is_negative() => write!(f, "{n}")?,
            Int(n) => write!(f, "[{n}]")?,
            Atom(a) => write!(f, "{a}")?,
            Var(v) => write!(f, "?{v}")?,
            Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Tensor(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " * ")?;
                b.fmt_prec(f, 3)?;
            }
            Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            Pow(a, n) => {
                a.fmt_prec(f, 5)?;
                match n {
                    IntExpr::Lit(_) | IntExpr::Var(_) => write!(f, "^{n}")?,
                    _ => write!(f, "^({n})")?,
                }
            }
            Twist(a, IntExpr::Lit(n)) if n.is_one() => {
                a.fmt_prec(f, 4)?;
                write!(f, "{{-1}}")?;
            }
            Twist(a, n) => write!(f, "tw({n}, {a})")?,
            Dual(a) => write!(f, "dual({a})")?,
            Sym(j, a) => write!(f, "sym({j}, {a})")?,
            Pk(k, a) => write!(f, "P({k}, {a})")?,
            Apply(g, a) => write!(f, "{}({a})", g.name())?,
            Lambda(a) => write!(f, "lambda({a})")?,
            Ducrot(v) => {
                write!(f, "I(")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")?;
            }
        }
        if p < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn int_has_vars(n: &IntExpr) -> bool {
    use IntExpr::*;
    match n {
        Lit(_) => false,
        Var(_) => true,
        Add(a, b) | Sub(a, b) | Mul(a, b) | Pow(a, b) | C(a, b) | W(a, b) => {
            int_has_vars(a) || int_has_vars(b)
        }
        Neg(a) => int_has_vars(a),
    }
}

impl fmt::Display for KExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
