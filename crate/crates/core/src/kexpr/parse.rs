//! Text syntax for [`KExpr`].
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | postfix
//! postfix := primary ('^' intatom | '{-1}')*
//! primary := '(' expr ')' | '[' iexpr ']' | integer | 'O' | '?' ident
//!          | ident '(' args ')' | ident
//! ```
//!
//! Named forms: `lambda(F)`, `dual(F)`, `sym(j, F)`, `P(k, F)`, `tw(n, F)`,
//! `I(F1, ..., Fn)`, `sum(i=a..b, F)` (expanded while parsing, left
//! associated) and the functors `iota b mu ppull qpull Rp q qp qm`.
//! Identifiers bound in the parameter map are replaced by their values;
//! unbound identifiers in integer position become integer variables.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::ast::{bx, Functor, IntExpr, KExpr};
use crate::error::{Error, Result};

pub type Params = BTreeMap<String, BigInt>;

pub fn parse(text: &str) -> Result<KExpr> {
    parse_with(text, &Params::new())
}

pub fn parse_with(text: &str, params: &Params) -> Result<KExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        env: params.clone(),
    };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    env: Params,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        let rest = String::from_utf8_lossy(&self.src[self.pos.min(self.src.len())..]);
        let rest: String = rest.chars().take(20).collect();
        Error::Parse(format!("{msg} at byte {} (near `{rest}`)", self.pos))
    }

    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.ws();
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

    fn ident(&mut self) -> Option<String> {
        self.ws();
        let start = self.pos;
        if start < self.src.len() && (self.src[start].is_ascii_alphabetic() || self.src[start] == b'_') {
            self.pos += 1;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
        } else {
            None
        }
    }

    fn integer(&mut self) -> Option<BigInt> {
        self.ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            Some(std::str::from_utf8(&self.src[start..self.pos]).unwrap().parse().unwrap())
        }
    }

    fn expr(&mut self) -> Result<KExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat("+") {
                acc = KExpr::add(acc, self.term()?);
            } else if self.peek() == Some(b'-') {
                self.pos += 1;
                acc = KExpr::sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<KExpr> {
        let mut acc = self.unary()?;
        while self.eat("*") {
            acc = KExpr::tensor(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<KExpr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(KExpr::Neg(bx(self.unary()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<KExpr> {
        let mut e = self.primary()?;
        loop {
            if self.eat("{-1}") {
                e = KExpr::Twist(bx(e), IntExpr::lit(1));
            } else if self.eat("^") {
                let n = self.int_atom()?;
                e = KExpr::Pow(bx(e), n);
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> Result<KExpr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Some(b'[') => {
                self.pos += 1;
                let n = self.iexpr()?;
                self.expect("]")?;
                Ok(KExpr::Int(n))
            }
            Some(b'?') => {
                self.pos += 1;
                let name = self.ident().ok_or_else(|| self.err("expected variable name"))?;
                Ok(KExpr::Var(name))
            }
            Some(c) if c.is_ascii_digit() => Ok(KExpr::Int(IntExpr::Lit(self.integer().unwrap()))),
            Some(_) => {
                let save = self.pos;
                let name = self.ident().ok_or_else(|| self.err("expected expression"))?;
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    let e = self.call(&name)?;
                    self.expect(")")?;
                    Ok(e)
                } else if name == "O" {
                    Ok(KExpr::Unit)
                } else {
                    let _ = save;
                    Ok(KExpr::Atom(name))
                }
            }
        }
    }

    fn call(&mut self, name: &str) -> Result<KExpr> {
        let one = |p: &mut Self| p.expr().map(bx);
        Ok(match name {
            "lambda" => KExpr::Lambda(one(self)?),
            "dual" => KExpr::Dual(one(self)?),
            "sym" | "P" | "tw" => {
                let n = self.iexpr()?;
                self.expect(",")?;
                let e = one(self)?;
                match name {
                    "sym" => KExpr::Sym(n, e),
                    "P" => KExpr::Pk(n, e),
                    _ => KExpr::Twist(e, n),
                }
            }
            "I" => {
                let mut v = vec![self.expr()?];
                while self.eat(",") {
                    v.push(self.expr()?);
                }
                KExpr::Ducrot(v)
            }
            "sum" => self.sum()?,
            _ => match Functor::from_name(name) {
                Some(f) => KExpr::Apply(f, one(self)?),
                None => return Err(self.err(&format!("unknown function `{name}`"))),
            },
        })
    }

    fn sum(&mut self) -> Result<KExpr> {
        let var = self.ident().ok_or_else(|| self.err("expected summation index"))?;
        self.expect("=")?;
        let lo = self.iexpr()?.eval(&self.env)?;
        self.expect("..")?;
        let hi = self.iexpr()?.eval(&self.env)?;
        self.expect(",")?;
        let (lo, hi) = match (lo.to_i64(), hi.to_i64()) {
            (Some(a), Some(b)) if b - a < 10_000 => (a, b),
            _ => return Err(self.err("summation range too large")),
        };
        let body = self.pos;
        let saved = self.env.get(&var).cloned();
        let mut terms = Vec::new();
        if lo > hi {
            // Skip the body without evaluating it.
            self.env.insert(var.clone(), BigInt::from(0));
            self.expr()?;
        }
        for i in lo..=hi {
            self.pos = body;
            self.env.insert(var.clone(), BigInt::from(i));
            terms.push(self.expr()?);
        }
        match saved {
            Some(v) => self.env.insert(var, v),
            None => self.env.remove(&var),
        };
        Ok(KExpr::sum(terms))
    }

    fn int_atom(&mut self) -> Result<IntExpr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let n = self.integer().ok_or_else(|| self.err("expected integer"))?;
                Ok(IntExpr::Lit(-n))
            }
            Some(b'(') => {
                self.pos += 1;
                let n = self.iexpr()?;
                self.expect(")")?;
                Ok(n)
            }
            Some(b'?') => {
                self.pos += 1;
                let name = self.ident().ok_or_else(|| self.err("expected variable name"))?;
                Ok(IntExpr::Var(name))
            }
            Some(c) if c.is_ascii_digit() => Ok(IntExpr::Lit(self.integer().unwrap())),
            _ => {
                let name = self.ident().ok_or_else(|| self.err("expected exponent"))?;
                Ok(self.int_name(name))
            }
        }
    }

    fn int_name(&self, name: String) -> IntExpr {
        match self.env.get(&name) {
            Some(v) => IntExpr::Lit(v.clone()),
            None => IntExpr::Var(name),
        }
    }

    fn iexpr(&mut self) -> Result<IntExpr> {
        let mut acc = self.iterm()?;
        loop {
            if self.eat("+") {
                acc = IntExpr::Add(Box::new(acc), Box::new(self.iterm()?));
            } else if self.peek() == Some(b'-') {
                self.pos += 1;
                acc = IntExpr::Sub(Box::new(acc), Box::new(self.iterm()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn iterm(&mut self) -> Result<IntExpr> {
        let mut acc = self.ifactor()?;
        while self.eat("*") {
            acc = IntExpr::Mul(Box::new(acc), Box::new(self.ifactor()?));
        }
        Ok(acc)
    }

    fn ifactor(&mut self) -> Result<IntExpr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(IntExpr::Neg(Box::new(self.ifactor()?)));
        }
        let base = self.iatom()?;
        if self.eat("^") {
            let e = self.ifactor()?;
            return Ok(IntExpr::Pow(Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn iatom(&mut self) -> Result<IntExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let n = self.iexpr()?;
                self.expect(")")?;
                Ok(n)
            }
            Some(b'?') => {
                self.pos += 1;
                let name = self.ident().ok_or_else(|| self.err("expected variable name"))?;
                Ok(IntExpr::Var(name))
            }
            Some(c) if c.is_ascii_digit() => Ok(IntExpr::Lit(self.integer().unwrap())),
            _ => {
                let name = self.ident().ok_or_else(|| self.err("expected integer expression"))?;
                if (name == "C" || name == "W") && self.peek() == Some(b'(') {
                    self.pos += 1;
                    let a = self.iexpr()?;
                    self.expect(",")?;
                    let b = self.iexpr()?;
                    self.expect(")")?;
                    let (a, b) = (Box::new(a), Box::new(b));
                    return Ok(if name == "C" { IntExpr::C(a, b) } else { IntExpr::W(a, b) });
                }
                Ok(self.int_name(name))
            }
        }
    }
}
