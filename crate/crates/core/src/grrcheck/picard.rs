//! Integer linear algebra on formal Picard groups.
//!
//! A [`PicardLattice`] holds named free generators and integer relations.
//! Relations are kept in Hermite normal form, so membership of a goal in
//! their integer span is decided exactly, with no division.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PicardLattice {
    symbols: Vec<String>,
    /// Hermite normal form: pivots strictly increase, pivot entries are
    /// positive, entries above a pivot lie in `[0, pivot)`.
    rows: Vec<Vec<BigInt>>,
}

impl PicardLattice {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::Domain(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Self {
            symbols,
            rows: Vec::new(),
        })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// Relations in reduced form.
    pub fn relations(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    /// Adds a relation given as a coefficient vector over the symbols.
    pub fn add_relation_vec(&mut self, v: Vec<BigInt>) -> Result<()> {
        if v.len() != self.symbols.len() {
            return Err(Error::Domain(format!(
                "relation has {} entries for {} symbols",
                v.len(),
                self.symbols.len()
            )));
        }
        let mut rows = std::mem::take(&mut self.rows);
        rows.push(v);
        self.rows = hermite(rows, self.symbols.len());
        Ok(())
    }

    /// Adds a relation written as `lhs = rhs` or `expr` (meaning `expr = 0`).
    pub fn add_relation(&mut self, text: &str) -> Result<()> {
        let v = self.parse_equation(text)?;
        self.add_relation_vec(v)
    }

    /// Coefficient vector of `lhs - rhs`.
    pub fn parse_equation(&self, text: &str) -> Result<Vec<BigInt>> {
        let (lhs, rhs) = match text.split_once('=') {
            Some((l, r)) => (l, r),
            None => (text, "0"),
        };
        let l = self.parse_combo(lhs)?;
        let r = self.parse_combo(rhs)?;
        Ok(l.iter().zip(&r).map(|(a, b)| a - b).collect())
    }

    /// Parses `3*l1 - l2 + 0`, with `*` optional (`3l1`).
    pub fn parse_combo(&self, text: &str) -> Result<Vec<BigInt>> {
        let mut out = vec![BigInt::zero(); self.symbols.len()];
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty linear combination".into()));
        }
        let bytes = s.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = BigInt::one();
            while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                if bytes[i] == b'-' {
                    sign = -sign;
                }
                i += 1;
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coeff: BigInt = if start == i {
                BigInt::one()
            } else {
                s[start..i].parse().expect("digits")
            };
            if i < bytes.len() && bytes[i] == b'*' {
                i += 1;
            }
            let start = i;
            while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
                i += 1;
            }
            let name = &s[start..i];
            if name.is_empty() {
                if start > 0 && bytes[start - 1] == b'*' {
                    return Err(Error::Parse(format!("dangling `*` in `{text}`")));
                }
                // Bare integer: only zero is meaningful in a lattice equation.
                if !coeff.is_zero() {
                    return Err(Error::Parse(format!(
                        "constant term {coeff} in `{text}`; only 0 is allowed"
                    )));
                }
                continue;
            }
            let k = self
                .symbols
                .iter()
                .position(|x| x == name)
                .ok_or_else(|| Error::Domain(format!("unknown symbol `{name}`")))?;
            out[k] += sign * coeff;
        }
        Ok(out)
    }

    /// Whether the vector lies in the integer span of the relations.
    pub fn contains(&self, goal: &[BigInt]) -> bool {
        let mut g = goal.to_vec();
        let mut r = 0;
        for col in 0..self.symbols.len() {
            if r < self.rows.len() && pivot(&self.rows[r]) == Some(col) {
                let p = &self.rows[r][col];
                let (q, rem) = g[col].div_rem(p);
                if !rem.is_zero() {
                    return false;
                }
                for (x, y) in g.iter_mut().zip(&self.rows[r]) {
                    *x -= &q * y;
                }
                r += 1;
            } else if !g[col].is_zero() {
                return false;
            }
        }
        true
    }

    /// Formats a coefficient vector as a combination of symbols.
    pub fn format(&self, v: &[BigInt]) -> String {
        let mut out = String::new();
        for (c, s) in v.iter().zip(&self.symbols) {
            if c.is_zero() {
                continue;
            }
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            let a = c.abs();
            if !a.is_one() {
                out.push_str(&format!("{a}*"));
            }
            out.push_str(s);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for PicardLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> = self.rows.iter().map(|r| format!("{} = 0", self.format(r))).collect();
        write!(f, "<{}> / ({})", self.symbols.join(", "), rels.join("; "))
    }
}

fn pivot(row: &[BigInt]) -> Option<usize> {
    row.iter().position(|x| !x.is_zero())
}

/// Row-style Hermite normal form over the integers.
fn hermite(mut rows: Vec<Vec<BigInt>>, ncols: usize) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    for col in 0..ncols {
        // Euclid on the column among remaining rows.
        loop {
            rows.retain(|r| r.iter().any(|x| !x.is_zero()));
            let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][col].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
            let small = nz[0];
            let pivot_row = rows[small].clone();
            for &i in &nz[1..] {
                let q = rows[i][col].div_floor(&pivot_row[col]);
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| !rows[i][col].is_zero()) {
            let mut row = rows.remove(i);
            if row[col].is_negative() {
                row.iter_mut().for_each(|x| *x = -x.clone());
            }
            out.push(row);
        }
    }
    // Reduce entries above each pivot.
    for k in 0..out.len() {
        let col = pivot(&out[k]).expect("nonzero row");
        let p = out[k][col].clone();
        for i in 0..k {
            let q = out[i][col].div_floor(&p);
            if !q.is_zero() {
                let row = out[k].clone();
                for (x, y) in out[i].iter_mut().zip(&row) {
                    *x -= &q * y;
                }
            }
        }
    }
    out
}

/// Whether `goal` (an equation in the lattice's symbols) follows from the
/// relations by integer linear combination.
pub fn picard_deduce(lattice: &PicardLattice, goal: &str) -> Result<bool> {
    let v = lattice.parse_equation(goal)?;
    Ok(lattice.contains(&v))
}
