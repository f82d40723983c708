//! A small-step rule system on sheaf expressions, used to check that the
//! normal form does not depend on the order in which local rules fire.
//!
//! Supported fragment: `O`, integers, atoms, `+ - *`, negation, literal
//! non-negative powers, `dual`, twists and pullbacks. The rules push
//! negation, dual, twist and pullbacks towards the leaves and distribute
//! tensor over sums. A fully reduced term is a signed sum of products of
//! leaves, which [`collect`] reads off into a [`KPoly`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::Rng;

use super::ast::{bx, IntExpr, KExpr};
use super::normal::{Base, Factor, KMono, KPoly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Innermost,
    Outermost,
    Random(u64),
}

fn lit_value(n: &IntExpr) -> Option<BigInt> {
    match n {
        IntExpr::Lit(v) => Some(v.clone()),
        _ => None,
    }
}

/// One rule application at the root, if any rule applies.
pub fn step_root(e: &KExpr) -> Option<KExpr> {
    use KExpr::*;
    let neg = |x: KExpr| Neg(bx(x));
    Some(match e {
        Sub(a, b) => KExpr::add((**a).clone(), neg((**b).clone())),
        Neg(a) => match &**a {
            Neg(x) => (**x).clone(),
            Add(x, y) => KExpr::add(neg((**x).clone()), neg((**y).clone())),
            _ => return None,
        },
        Tensor(a, b) => match (&**a, &**b) {
            (Add(x, y), c) => KExpr::add(KExpr::tensor((**x).clone(), c.clone()), KExpr::tensor((**y).clone(), c.clone())),
            (c, Add(x, y)) => KExpr::add(KExpr::tensor(c.clone(), (**x).clone()), KExpr::tensor(c.clone(), (**y).clone())),
            (Neg(x), c) => neg(KExpr::tensor((**x).clone(), c.clone())),
            (c, Neg(x)) => neg(KExpr::tensor(c.clone(), (**x).clone())),
            _ => return None,
        },
        Pow(a, n) => {
            let n = lit_value(n)?.to_u32()?;
            match n {
                0 => Unit,
                1 => (**a).clone(),
                _ => KExpr::tensor((**a).clone(), KExpr::pow((**a).clone(), n - 1)),
            }
        }
        Dual(a) => match &**a {
            Dual(x) => (**x).clone(),
            Unit | Int(_) => (**a).clone(),
            Add(x, y) => KExpr::add(Dual(x.clone()), Dual(y.clone())),
            Neg(x) => neg(Dual(x.clone())),
            Tensor(x, y) => KExpr::tensor(Dual(x.clone()), Dual(y.clone())),
            Twist(x, n) => Twist(bx(Dual(x.clone())), n.clone()),
            _ => return None,
        },
        Twist(a, n) => {
            let v = lit_value(n)?;
            if v.is_even() {
                return Some((**a).clone());
            }
            if !v.is_one() {
                return Some(KExpr::twist((**a).clone()));
            }
            match &**a {
                Twist(x, m) => Twist(x.clone(), IntExpr::Lit(lit_value(m)? + 1)),
                Add(x, y) => KExpr::add(KExpr::twist((**x).clone()), KExpr::twist((**y).clone())),
                Neg(x) => neg(KExpr::twist((**x).clone())),
                Tensor(x, y) => KExpr::tensor(KExpr::twist((**x).clone()), (**y).clone()),
                _ => return None,
            }
        }
        Apply(f, a) if f.is_pullback() => match &**a {
            Unit | Int(_) => (**a).clone(),
            Add(x, y) => KExpr::add(Apply(*f, x.clone()), Apply(*f, y.clone())),
            Neg(x) => neg(Apply(*f, x.clone())),
            Tensor(x, y) => KExpr::tensor(Apply(*f, x.clone()), Apply(*f, y.clone())),
            Twist(x, n) => Twist(bx(Apply(*f, x.clone())), n.clone()),
            Dual(x) => Dual(bx(Apply(*f, x.clone()))),
            _ => return None,
        },
        _ => return None,
    })
}

/// Whether [`step_root`] applies, without building the result.
pub fn is_redex(e: &KExpr) -> bool {
    use KExpr::*;
    match e {
        Sub(..) => true,
        Neg(a) => matches!(**a, Neg(_) | Add(..)),
        Tensor(a, b) => matches!(**a, Add(..) | Neg(_)) || matches!(**b, Add(..) | Neg(_)),
        Pow(_, n) => lit_value(n).and_then(|v| v.to_u32()).is_some(),
        Dual(a) => matches!(**a, Dual(_) | Unit | Int(_) | Add(..) | Neg(_) | Tensor(..) | Twist(..)),
        Twist(a, n) => match lit_value(n) {
            None => false,
            Some(v) => !v.is_one() || matches!(**a, Twist(..) | Add(..) | Neg(_) | Tensor(..)),
        },
        Apply(f, a) => {
            f.is_pullback() && matches!(**a, Unit | Int(_) | Add(..) | Neg(_) | Tensor(..) | Twist(..) | Dual(_))
        }
        _ => false,
    }
}

/// All positions (pre-order) where a rule applies.
fn redexes(e: &KExpr, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if is_redex(e) {
        out.push(path.clone());
    }
    for (i, c) in e.children().into_iter().enumerate() {
        path.push(i);
        redexes(c, path, out);
        path.pop();
    }
}

fn innermost(e: &KExpr) -> Option<Vec<usize>> {
    for (i, c) in e.children().into_iter().enumerate() {
        if let Some(mut p) = innermost(c) {
            p.insert(0, i);
            return Some(p);
        }
    }
    is_redex(e).then(Vec::new)
}

fn outermost(e: &KExpr) -> Option<Vec<usize>> {
    if is_redex(e) {
        return Some(vec![]);
    }
    for (i, c) in e.children().into_iter().enumerate() {
        if let Some(mut p) = outermost(c) {
            p.insert(0, i);
            return Some(p);
        }
    }
    None
}

/// Rewrites to a fixed point. Returns the reduced term and the number of
/// steps taken.
pub fn reduce(e: &KExpr, strategy: Strategy, max_steps: usize) -> Result<(KExpr, usize)> {
    let mut cur = e.clone();
    let mut rng = match strategy {
        Strategy::Random(seed) => Some(<rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed)),
        _ => None,
    };
    for n in 0..max_steps {
        let path = match strategy {
            Strategy::Innermost => innermost(&cur),
            Strategy::Outermost => outermost(&cur),
            Strategy::Random(_) => {
                let mut all = Vec::new();
                redexes(&cur, &mut Vec::new(), &mut all);
                if all.is_empty() {
                    None
                } else {
                    let i = rng.as_mut().unwrap().gen_range(0..all.len());
                    Some(all.swap_remove(i))
                }
            }
        };
        let Some(path) = path else {
            return Ok((cur, n));
        };
        let slot = cur.at_mut(&path).expect("redex path");
        *slot = step_root(slot).expect("redex");
    }
    Err(Error::Structural(format!("no fixed point within {max_steps} steps")))
}

/// Reads a fully reduced term into a polynomial.
pub fn collect(e: &KExpr) -> Result<KPoly> {
    use KExpr::*;
    let shape = || Error::Structural(format!("`{e}` is not in reduced shape"));
    match e {
        Add(a, b) => Ok(collect(a)?.add(&collect(b)?)),
        Neg(a) => Ok(collect(a)?.neg()),
        _ => {
            let mut mono = KMono::unit();
            let mut coeff = BigInt::one();
            leaf_product(e, &mut mono, &mut coeff).map_err(|_| shape())?;
            let mut p = KPoly::zero();
            p.add_term(mono, coeff);
            Ok(p)
        }
    }
}

fn leaf_product(e: &KExpr, mono: &mut KMono, coeff: &mut BigInt) -> Result<()> {
    use KExpr::*;
    match e {
        Tensor(a, b) => {
            leaf_product(a, mono, coeff)?;
            leaf_product(b, mono, coeff)
        }
        Unit => Ok(()),
        Int(n) => {
            *coeff *= n.value()?;
            Ok(())
        }
        Twist(a, _) => {
            mono.twist = !mono.twist;
            leaf_product(a, mono, coeff)
        }
        _ => {
            let f = leaf_factor(e)?;
            *mono.factors.entry(f).or_insert(0) += 1;
            Ok(())
        }
    }
}

fn leaf_factor(e: &KExpr) -> Result<Factor> {
    match e {
        KExpr::Atom(a) => Ok(Factor {
            pulls: vec![],
            base: Base::Atom(a.clone()),
            dual: false,
        }),
        KExpr::Dual(a) => {
            let mut f = leaf_factor(a)?;
            f.dual = !f.dual;
            Ok(f)
        }
        KExpr::Apply(g, a) if g.is_pullback() => {
            let mut f = leaf_factor(a)?;
            f.pulls.insert(0, *g);
            Ok(f)
        }
        _ => Err(Error::Structural(format!("unexpected leaf `{e}`"))),
    }
}

/// Random expression of the supported fragment, of depth at most `depth`.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize) -> KExpr {
    use super::ast::Functor;
    const ATOMS: [&str; 4] = ["L", "M", "N", "Q"];
    if depth <= 1 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..6) {
            0 => KExpr::Unit,
            1 => KExpr::int(rng.gen_range(-2i64..4)),
            _ => KExpr::atom(ATOMS[rng.gen_range(0..ATOMS.len())]),
        };
    }
    let d = depth - 1;
    let sub = |rng: &mut R| random_expr(rng, d);
    match rng.gen_range(0..9) {
        0 => KExpr::add(sub(rng), sub(rng)),
        1 => KExpr::sub(sub(rng), sub(rng)),
        2 | 3 => KExpr::tensor(sub(rng), sub(rng)),
        4 => KExpr::Neg(bx(sub(rng))),
        5 => KExpr::pow(sub(rng), rng.gen_range(0u32..3)),
        6 => KExpr::Dual(bx(sub(rng))),
        7 => KExpr::Twist(bx(sub(rng)), IntExpr::lit(rng.gen_range(1u32..4))),
        _ => {
            let f = [Functor::Iota, Functor::QPull, Functor::B][rng.gen_range(0..3)];
            KExpr::Apply(f, bx(sub(rng)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kexpr::normal::sheaf_nf;
    use crate::kexpr::parse::parse;
    use rand::SeedableRng;

    #[test]
    fn reduces_examples() {
        for s in ["(O - L) * (O - Q)", "dual(iota(M{-1} * L)^2)", "tw(3, L - -M)"] {
            let e = parse(s).unwrap();
            let (r, _) = reduce(&e, Strategy::Innermost, 10_000).unwrap();
            assert_eq!(collect(&r).unwrap(), sheaf_nf(&e).unwrap(), "{s}");
            assert!(step_root(&r).is_none());
            assert!(!is_redex(&r));
        }
    }

    #[test]
    fn strategies_agree_on_small_corpus() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for i in 0..200 {
            let e = random_expr(&mut rng, 5);
            let nf = sheaf_nf(&e).unwrap();
            for s in [Strategy::Innermost, Strategy::Outermost, Strategy::Random(i)] {
                let (r, _) = reduce(&e, s, 200_000).unwrap();
                assert_eq!(collect(&r).unwrap(), nf, "{e} under {s:?}");
            }
        }
    }

    #[test]
    fn redex_test_agrees_with_rules() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let e = random_expr(&mut rng, 4);
            let mut stack = vec![&e];
            while let Some(x) = stack.pop() {
                assert_eq!(is_redex(x), step_root(x).is_some(), "{x}");
                stack.extend(x.children());
            }
        }
    }

    #[test]
    fn zero_coefficients_vanish() {
        let e = parse("L - L + 0 * M").unwrap();
        let (r, _) = reduce(&e, Strategy::Outermost, 1000).unwrap();
        assert!(collect(&r).unwrap().is_zero());
        assert!(KPoly::zero().terms.is_empty());
    }
}
