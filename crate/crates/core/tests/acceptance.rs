//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Runtime limits are checked on the measured wall time of each criterion.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::SeedableRng;

use detline::chowmodel::{hirzebruch, product_pn_pm, projective_space};
use detline::combinat::{binomial, coeff_table, pk_identity_check};
use detline::exactalg::{rat, ratio, Rational, TruncatedSeries};
use detline::grrcheck::picard::{picard_deduce, PicardLattice};
use detline::grrcheck::{
    c1_lambda, deligne_combo_d1, ducrot_defect, ducrot_product, euler_char, main_combo, universal_defect,
    universal_lambda_k_d1, verify_main_on_model, UniversalRing,
};
use detline::kexpr::structural::{collect, random_expr, reduce, Strategy};
use detline::kexpr::{builtin_script, chain_verify, normal::sheaf_nf};
use detline::quotientlab::{conormal_degree_zero, fixed_ideal, flatness_verdict, GradedAlgebra, Verdict, DEFAULT_BOUND};

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn c1_coeff_tables() -> Outcome {
    let t1 = coeff_table(1).map_err(|e| e.to_string())?;
    let t2 = coeff_table(2).map_err(|e| e.to_string())?;
    check(t1.entries == ints(&[7, -4, 1]), format!("d=1 gave {:?}", t1.entry_strings()))?;
    check(t2.entries == ints(&[31, -26, 16, -6, 1]), format!("d=2 gave {:?}", t2.entry_strings()))?;
    Ok("d=1 [7, -4, 1], d=2 [31, -26, 16, -6, 1]".into())
}

fn c2_pk_identity() -> Outcome {
    for k in 0..=64 {
        check(pk_identity_check(k), format!("fails at k = {k}"))?;
    }
    Ok("t P_k(t) = 2^(k+1) - (2-t)^(k+1) for k = 0..64".into())
}

fn c3_universal_defect() -> Outcome {
    // Hand check at d = 1 in Q[l, a].
    let ring = UniversalRing::new(1);
    let s = |terms: &[(&[u32], Rational)]| {
        TruncatedSeries::from_terms(ring.vars.clone(), 2, terms.iter().map(|(e, c)| (e.to_vec(), c.clone()))).unwrap()
    };
    let dch = ring.combo_ch(&main_combo(1));
    let hand = s(&[(&[0, 0], rat(12)), (&[1, 0], rat(8)), (&[0, 1], rat(2)), (&[1, 1], rat(4))]);
    check(
        dch.carrier.truncate(1) == hand.truncate(1) && dch.carrier.coeff(&[1, 1]) == rat(4),
        format!("d=1 combination is {}", dch.carrier),
    )?;
    let td = s(&[(&[0, 0], rat(1)), (&[0, 1], ratio(-1, 2)), (&[0, 2], ratio(1, 12))]);
    check(ring.todd_tf().carrier == td, "d=1 Todd class")?;
    let mut times = Vec::new();
    for d in 1..=4 {
        let t = Instant::now();
        let defect = universal_defect(d, &main_combo(d)).map_err(|e| e.to_string())?;
        check(defect.component(d + 1).is_zero(), format!("degree {} defect nonzero at d = {d}", d + 1))?;
        check(!defect.component(d).is_zero(), format!("degree {d} control vanishes at d = {d}"))?;
        times.push(t.elapsed());
    }
    check(times[3] < Duration::from_secs(10), format!("d = 4 took {:?}", times[3]))?;
    Ok(format!("vanishes in degree d+1 for d = 1..4, degree d nonzero; d=4 in {:?}", times[3]))
}

fn c4_deligne() -> Outcome {
    let defect = universal_defect(1, &deligne_combo_d1()).map_err(|e| e.to_string())?;
    check(defect.component(2).is_zero(), format!("degree 2 part {}", defect.component(2)))?;
    Ok("degree-2 defect of the (18, -18, -6, 6) combination is 0".into())
}

fn c5_ducrot() -> Outcome {
    for d in 1..=3u32 {
        let names: Vec<String> = (1..=d + 2).map(|i| format!("l{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let full = ducrot_defect(d, &refs).map_err(|e| e.to_string())?;
        check(full.carrier.is_zero(), format!("d+2 factors nonzero at d = {d}"))?;
        let short = ducrot_product(d, &refs[..d as usize + 1]).map_err(|e| e.to_string())?;
        check(!short.component(d + 1).is_zero(), format!("d+1 factors vanish at d = {d}"))?;
    }
    Ok("d+2 factors vanish, d+1 factors do not, d = 1..3".into())
}

fn c6_concrete_family() -> Outcome {
    let m = product_pn_pm(1, 1).map_err(|e| e.to_string())?;
    let bundle = |s: &str| m.bundle(s).map_err(|e| e.to_string());
    let r = verify_main_on_model(&m, &bundle("O(1,1)")?).map_err(|e| e.to_string())?;
    check(r.lhs == "32" && r.rhs == "32", format!("O(1,1): {} vs {}", r.lhs, r.rhs))?;
    check(r.terms == ["6", "2", "-2"], format!("terms {:?}", r.terms))?;
    let terms: Vec<i64> = r.terms.iter().map(|t| t.parse().unwrap()).collect();
    check(7 * terms[0] - 4 * terms[1] + terms[2] == 32, "7*6 - 4*2 + (-2)")?;
    for a in -2..=2i64 {
        for b in -2..=2i64 {
            let f = bundle(&format!("O({a},{b})"))?;
            let deg = c1_lambda(&m, &f).map_err(|e| e.to_string())?;
            check(deg == rat(b * (a + 1)), format!("deg lambda(O({a},{b})) = {deg}"))?;
            let r = verify_main_on_model(&m, &f).map_err(|e| e.to_string())?;
            check(r.pass, format!("O({a},{b}): {} vs {}", r.lhs, r.rhs))?;
        }
    }
    for e in 0..=3 {
        let h = hirzebruch(e).map_err(|e| e.to_string())?;
        let r = verify_main_on_model(&h, &h.bundle("O").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        check(r.pass, format!("Hirzebruch({e}): {} vs {}", r.lhs, r.rhs))?;
    }
    Ok("16 deg lambda(O(1,1)) = 32 = 7*6 - 4*2 - 2; 25 twists of P1xP1 and Hirzebruch(0..3) pass".into())
}

fn c7_mumford() -> Outcome {
    let mut degrees = Vec::new();
    for e in 1..=3 {
        let h = hirzebruch(e).map_err(|e| e.to_string())?;
        let l1 = c1_lambda(&h, &h.bundle("Omega").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let l2 = c1_lambda(&h, &h.bundle("Omega^2").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        check(l2 == l1.clone() * rat(13), format!("e = {e}: {l2} vs 13 * {l1}"))?;
        degrees.push(l1.to_string());
    }
    check(
        universal_lambda_k_d1(2) == universal_lambda_k_d1(1) * rat(13),
        "universal ratio lambda_2 / lambda_1",
    )?;
    let mut p = PicardLattice::new(["l0", "l1", "l2"]).map_err(|e| e.to_string())?;
    p.add_relation("16*l0 = 7*l0 - 4*l1 + l2").map_err(|e| e.to_string())?;
    p.add_relation("l0 = l1").map_err(|e| e.to_string())?;
    check(picard_deduce(&p, "13*l1 = l2").map_err(|e| e.to_string())?, "13 l1 = l2 not derived")?;
    check(!picard_deduce(&p, "12*l1 = 0").map_err(|e| e.to_string())?, "12 l1 = 0 derived too early")?;
    p.add_relation("l2 = l1").map_err(|e| e.to_string())?;
    check(picard_deduce(&p, "12*l1 = 0").map_err(|e| e.to_string())?, "12 l1 = 0 not derived")?;
    Ok(format!(
        "Hirzebruch(1..3) deg lambda(Omega) = {:?} (K_f^2 = 0), universal 13/12 = 13 * 1/12; 13 l1 = l2 then 12 l1 = 0",
        degrees
    ))
}

fn c8_rewriter() -> Outcome {
    let mut checked = 0;
    for name in ["invfunc-a-k", "invfunc-l-p"] {
        let s = builtin_script(name).map_err(|e| e.to_string())?;
        let r = chain_verify(&s).map_err(|e| e.to_string())?;
        check(r.pass, format!("{name} fails at step {:?}", r.failed_step))?;
        for n in 1..s.steps.len() {
            let r = chain_verify(&s.clone().corrupt(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            check(!r.pass && r.failed_step == Some(n), format!("{name} swap {n} reported {:?}", r.failed_step))?;
            checked += 1;
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let corpus = 1000;
    for i in 0..corpus {
        let e = random_expr(&mut rng, 6);
        let nf = sheaf_nf(&e).map_err(|e| e.to_string())?;
        for s in [Strategy::Innermost, Strategy::Outermost, Strategy::Random(i)] {
            let (r, _) = reduce(&e, s, 1_000_000).map_err(|e| e.to_string())?;
            check(collect(&r).map_err(|e| e.to_string())? == nf, format!("{e} under {s:?}"))?;
        }
    }
    Ok(format!("both chains pass, {checked} swaps rejected at their index, {corpus} random terms confluent"))
}

fn c9_quotient() -> Outcome {
    let parse = |s: &str| s.parse::<GradedAlgebra>().map_err(|e| e.to_string());
    let kx = parse("x:1:odd")?;
    let r = flatness_verdict(&kx, DEFAULT_BOUND);
    check(r.verdict == Verdict::Free && r.basis == ["1", "x"], format!("k[x]: {} {:?}", r.verdict, r.basis))?;
    let kxy = parse("x:1:odd,y:1:odd")?;
    let r = flatness_verdict(&kxy, DEFAULT_BOUND);
    check(r.verdict == Verdict::NotFree, format!("k[x,y] both odd: {}", r.verdict))?;
    for text in ["x:1:odd", "x:1:odd,y:1:even", "x:3:odd,y:2:even,z:1:even"] {
        let a = parse(text)?;
        check(fixed_ideal(&a).cartier, format!("{text} not Cartier"))?;
        check(conormal_degree_zero(&a, 20).map_err(|e| e.to_string())?, format!("{text}: conormal has degree 0"))?;
    }
    Ok("k[x] FREE {1, x}; k[x,y] NOT-FREE; conormal degree 0 vanishes on Cartier cases".into())
}

/// Sections of O(a) on P^n counted as degree-a monomials in n+1 variables;
/// negative degrees on P^1 through Serre duality.
fn monomial_chi(n: u32, a: i64) -> i64 {
    let h0 = |a: i64| if a < 0 { 0 } else { i64::try_from(binomial(a as u32 + n, n)).unwrap() };
    if n == 1 {
        h0(a) - h0(-a - 2)
    } else {
        h0(a)
    }
}

fn c10_hrr() -> Outcome {
    let p1 = projective_space(1).map_err(|e| e.to_string())?;
    for a in -3..=3 {
        let chi = euler_char(&p1, &p1.bundle(&format!("O({a})")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        check(chi == rat(monomial_chi(1, a)) && chi == rat(a + 1), format!("P1 O({a}): {chi}"))?;
    }
    let p2 = projective_space(2).map_err(|e| e.to_string())?;
    for a in 0..=3 {
        let chi = euler_char(&p2, &p2.bundle(&format!("O({a})")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        check(
            chi == rat(monomial_chi(2, a)) && chi == rat((a + 1) * (a + 2) / 2),
            format!("P2 O({a}): {chi}"),
        )?;
    }
    Ok("chi(P1, O(a)) = a+1 for |a| <= 3, chi(P2, O(a)) = (a+1)(a+2)/2 for a = 0..3".into())
}

type Criterion = (u32, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, c1_coeff_tables, Duration::from_millis(1)),
        (2, c2_pk_identity, Duration::from_millis(100)),
        (3, c3_universal_defect, Duration::from_secs(10)),
        (4, c4_deligne, Duration::from_millis(10)),
        (5, c5_ducrot, Duration::from_secs(1)),
        (6, c6_concrete_family, Duration::from_secs(5)),
        (7, c7_mumford, Duration::from_secs(1)),
        (8, c8_rewriter, Duration::from_secs(10)),
        (9, c9_quotient, Duration::from_secs(1)),
        (10, c10_hrr, Duration::from_millis(100)),
    ];
    let mut failures = 0;
    for (n, f, limit) in criteria {
        let t = Instant::now();
        let out = f();
        let took = t.elapsed();
        let (ok, detail) = match out {
            Ok(d) if took < limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {n:>2}: {} [{:.3?} of {:?}] {detail}",
            if ok { "PASS" } else { "FAIL" },
            took,
            limit
        );
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
