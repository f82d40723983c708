use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;

use detline::combinat::{pk_poly, IntPoly};
use detline::kexpr::normal::{line_nf, sheaf_nf, KMono, KPoly};
use detline::kexpr::structural::{collect, random_expr, reduce, Strategy as Order};
use detline::kexpr::{builtin_script, chain_verify, multiadditivity_expand, normalize, parse, KExpr};

fn arb_expr() -> impl Strategy<Value = KExpr> {
    (any::<u64>(), 1usize..=6).prop_map(|(seed, depth)| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        random_expr(&mut rng, depth)
    })
}

#[test]
fn confluence_corpus() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut max_depth = 0;
    for i in 0..1000 {
        let e = random_expr(&mut rng, 6);
        max_depth = max_depth.max(e.depth());
        let nf = sheaf_nf(&e).unwrap();
        for s in [Order::Innermost, Order::Outermost, Order::Random(i), Order::Random(i + 5000)] {
            let (r, _) = reduce(&e, s, 1_000_000).unwrap();
            assert_eq!(collect(&r).unwrap(), nf, "{e} under {s:?}");
        }
    }
    assert!((5..=6).contains(&max_depth));
}

#[test]
fn normalize_examples() {
    let n = |s: &str| normalize(&parse(s).unwrap()).unwrap();
    assert_eq!(n("F{-1}{-1}"), n("F"));
    assert_eq!(n("2 - (O + L{-1})"), n("O - L{-1}"));
    assert_eq!(n("(O - L) * (O - Q)"), n("O - L - Q + L * Q"));
}

/// Normalizing the step (d) line gives `lambda(M)^(2^(k+1) - 1)` and
/// `lambda(M L^j)^(-C(k+1, j))`; the same numbers come from expanding
/// `(1-u) P_k(1-u)` with the integer polynomials of `combinat`.
#[test]
fn step_d_exponents_match_combinat() {
    for k in 0..=8u32 {
        let line = parse(&format!("lambda(M * (O - L) * P({k}, O - L))")).unwrap();
        let nf = line_nf(&line).unwrap();
        let one_minus_u = IntPoly::from_i64(&[1, -1]);
        let poly = one_minus_u.mul(&pk_poly(k).compose(&one_minus_u));
        let m = sheaf_nf(&parse("M").unwrap()).unwrap();
        let l = sheaf_nf(&parse("L").unwrap()).unwrap();
        let mut total = 0usize;
        for j in 0..=k as usize + 1 {
            let mono: KMono = m.mul(&l.pow(j as u32)).terms.keys().next().unwrap().clone();
            assert_eq!(nf.exponent(&mono), poly.coeff(j), "k = {k}, j = {j}");
            total += 1;
        }
        assert_eq!(nf.exps.len(), total);
        let lm = m.terms.keys().next().unwrap();
        assert_eq!(nf.exponent(lm), detline::combinat::pow2(k + 1) - BigInt::from(1));
    }
}

#[test]
fn scripts_sweep_and_corruptions() {
    for k in 0..=4 {
        let s = builtin_script("invfunc-a-k").unwrap().with_param("k", k).unwrap();
        let r = chain_verify(&s).unwrap();
        assert!(r.pass);
        assert_eq!(r.steps.len(), 11);
        for n in 1..s.steps.len() {
            assert_eq!(chain_verify(&s.clone().corrupt(n).unwrap()).unwrap().failed_step, Some(n));
        }
    }
    let r = chain_verify(&builtin_script("invfunc-l-p").unwrap().with_param("d", 3).unwrap()).unwrap();
    assert!(r.pass);
    assert_eq!(r.final_normal_form, "lambda(M)^16");
}

#[test]
fn unknown_axiom_is_a_step_failure() {
    let mut s = builtin_script("invfunc-a-k").unwrap();
    s.steps[2].axiom = "no-such-axiom".into();
    let r = chain_verify(&s).unwrap();
    assert!(!r.pass);
    assert_eq!(r.failed_step, Some(3));
    assert!(r.steps[2].error.as_ref().unwrap().contains("unknown axiom"));
}

#[test]
fn mismatched_end_fails_after_last_step() {
    let mut s = builtin_script("invfunc-l-p").unwrap();
    s.end = "lambda(M)^7".into();
    let r = chain_verify(&s).unwrap();
    assert!(!r.pass);
    assert_eq!(r.failed_step, Some(s.steps.len() + 1));
}

#[test]
fn multiadditivity_examples() {
    let (lhs, rhs, rep) = multiadditivity_expand(&["L1", "L2"], "Q").unwrap();
    assert!(rep.chain.pass);
    assert_eq!(rhs.to_string(), "lambda(0)");
    assert_eq!(lhs.to_string(), "lambda((O - Q) * (O - L1) * (O - L2))");
    // With Q = O both ends are already trivial.
    let (lhs, _, rep) = multiadditivity_expand(&["L1", "L2", "L3"], "O").unwrap();
    assert!(rep.chain.pass);
    assert!(line_nf(&lhs).unwrap().is_trivial());
    let (_, _, rep) = multiadditivity_expand(&["L1"], "Q").unwrap();
    assert!(rep.chain.pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalize_is_idempotent(e in arb_expr()) {
        let once = normalize(&e).unwrap();
        prop_assert_eq!(normalize(&once).unwrap(), once);
    }

    #[test]
    fn printing_round_trips(e in arb_expr()) {
        prop_assert_eq!(parse(&e.to_string()).unwrap().canon().unwrap(), e.canon().unwrap());
    }

    #[test]
    fn dual_and_twist_are_involutions(e in arb_expr(), f in arb_expr()) {
        let p = sheaf_nf(&e).unwrap();
        let q = sheaf_nf(&f).unwrap();
        prop_assert_eq!(p.dual().dual(), p.clone());
        prop_assert_eq!(p.twist().twist(), p.clone());
        // Both commute with tensor.
        prop_assert_eq!(p.mul(&q).dual(), p.dual().mul(&q.dual()));
        prop_assert_eq!(p.mul(&q).twist(), p.twist().mul(&q));
    }

    #[test]
    fn random_orders_agree(e in arb_expr(), seed in any::<u64>()) {
        let (a, _) = reduce(&e, Order::Random(seed), 1_000_000).unwrap();
        let (b, _) = reduce(&e, Order::Outermost, 1_000_000).unwrap();
        prop_assert_eq!(collect(&a).unwrap(), collect(&b).unwrap());
    }

    #[test]
    fn multadd_for_random_line_counts(n in 1usize..5, q_unit in any::<bool>()) {
        let names: Vec<String> = (1..=n).map(|i| format!("L{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let (_, _, rep) = multiadditivity_expand(&refs, if q_unit { "O" } else { "Q" }).unwrap();
        prop_assert!(rep.chain.pass);
    }
}

#[test]
fn zero_polynomial_prints_as_zero() {
    assert_eq!(KPoly::zero().to_expr().to_string(), "0");
}
