//! Check builders shared by the single-purpose subcommands and `verify-all`.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Deserialize;
use serde_json::{json, Value};

use detline::chowmodel::{self, hirzebruch, integral, product_pn_pm, projective_space, ChowModel};
use detline::combinat::{binomial, binomial_expansion_check, coeff_matrix, coeff_table, pk_identity_check, pk_poly, pow2};
use detline::exactalg::rat;
use detline::grrcheck::{
    c1_lambda, deligne_combo_d1, ducrot_defect, ducrot_product, euler_char, main_combo, universal_defect,
    universal_defect_unchecked, universal_lambda_k_d1, verify_main_on_model, PicardLattice, VirtualCombo,
};
use detline::kexpr::{builtin_script, chain_verify, Script};
use detline::quotientlab::{conormal_degree_zero, fixed_ideal, flatness_verdict, GradedAlgebra, Verdict};
use detline::{Rational, Result};

use crate::report::Row;

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(BigInt::to_string).collect()
}

pub fn coeffs(d: u32, matrix: bool) -> Result<Vec<Row>> {
    let table = coeff_table(d)?;
    let mut witness = json!({ "dim": d, "entries": table.entry_strings() });
    if matrix {
        witness["matrix"] = json!(coeff_matrix(d).iter().map(|r| strings(r)).collect::<Vec<_>>());
    }
    let e = &table.entries;
    let n = e.len() - 1;
    let sum: BigInt = e.iter().sum();
    let alternating = e.iter().enumerate().all(|(j, c)| c.is_positive() == (j % 2 == 0));
    let invariants = sum == pow2(2 * d) && e[0] == pow2(2 * d + 1) - 1u32 && e[n].is_one() && alternating;
    Ok(vec![
        Row::new(format!("coeff-table d={d}"), "exponents c_j(d), j = 0..2d", true, witness),
        Row::new(
            format!("table-invariants d={d}"),
            "sum 4^d, c_0 = 2^(2d+1) - 1, c_2d = 1, alternating signs",
            invariants,
            json!({ "sum": sum.to_string(), "c0": e[0].to_string(), "alternating": alternating }),
        ),
        Row::new(
            format!("binomial-expansion d={d}"),
            "P_2d expanded at O - N{-1}",
            binomial_expansion_check(d)?,
            json!({ "dim": d }),
        ),
    ])
}

pub fn polyid(k: u32) -> Vec<Row> {
    vec![Row::new(
        format!("pk-identity k={k}"),
        "t P_k(t) = 2^(k+1) - (2-t)^(k+1)",
        pk_identity_check(k),
        json!({ "k": k, "p_k": strings(pk_poly(k).coeffs()) }),
    )]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Main,
    #[value(name = "deligne-d1")]
    DeligneD1,
}

pub fn preset_combo(p: Preset, d: u32) -> VirtualCombo {
    match p {
        Preset::Main => main_combo(d),
        Preset::DeligneD1 => deligne_combo_d1(),
    }
}

/// Degree-`(d+1)` defect of `combo`, with a nonvacuity control in degree `d`
/// when `control` is set. `d = 0` is evaluated rather than refused.
pub fn universal(d: u32, label: &str, combo: &VirtualCombo, control: bool) -> Result<Vec<Row>> {
    let defect = if d == 0 {
        universal_defect_unchecked(0, combo)
    } else {
        universal_defect(d, combo)?
    };
    let components: Vec<Value> = (0..=d + 1)
        .map(|k| json!({ "degree": k, "value": defect.component(k).to_string() }))
        .collect();
    let top = defect.component(d + 1);
    let mut rows = vec![Row::new(
        format!("universal-defect {label} d={d}"),
        "degree-(d+1) part of ch(D) Td(T_f)",
        top.is_zero(),
        json!({ "dim": d, "preset": label, "combo": combo, "components": components }),
    )];
    if control {
        let low = defect.component(d);
        rows.push(Row::new(
            format!("defect-control {label} d={d}"),
            "degree-d part is not identically zero",
            !low.is_zero(),
            json!({ "dim": d, "degree": d, "terms": low.len() }),
        ));
    }
    Ok(rows)
}

fn line_names(count: u32) -> Vec<String> {
    (1..=count).map(|i| format!("l{i}")).collect()
}

/// `prod (1 - e^{l_i})` over `d+2` lines, or `d+1` with `drop_one`.
pub fn ducrot(d: u32, drop_one: bool) -> Result<Vec<Row>> {
    let names = line_names(if drop_one { d + 1 } else { d + 2 });
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let product = if drop_one {
        ducrot_product(d, &refs)?
    } else {
        ducrot_defect(d, &refs)?
    };
    let top = product.component(d + 1);
    Ok(vec![Row::new(
        format!("ducrot d={d}{}", if drop_one { " drop-one" } else { "" }),
        "prod (1 - e^(l_i)) truncated at degree d+1",
        top.is_zero(),
        json!({ "dim": d, "lines": names, "degree_top": top.to_string() }),
    )])
}

pub fn c1lambda(model: &ChowModel, bundle: &str) -> Result<Vec<Row>> {
    let f = model.bundle(bundle)?;
    let deg = c1_lambda(model, &f)?;
    Ok(vec![Row::new(
        "c1-lambda",
        "deg c_1(lambda(F)) on the base",
        true,
        json!({ "model": model.name, "bundle": bundle, "degree": deg.to_string() }),
    )])
}

pub fn verify_main(model: &ChowModel, line: &str) -> Result<Vec<Row>> {
    let r = verify_main_on_model(model, &model.bundle(line)?)?;
    Ok(vec![Row::new(
        format!("main-identity {} {line}", model.name),
        "2^(2d+2) deg lambda(L) = sum_j c_j deg lambda(L^2 Sym^j Omega)",
        r.pass,
        json!(r),
    )])
}

pub fn euler(model: &ChowModel, bundle: &str) -> Result<Vec<Row>> {
    let chi = euler_char(model, &model.bundle(bundle)?)?;
    Ok(vec![Row::new(
        "euler-characteristic",
        "chi(F) = integral of ch(F) Td(T) is an integer",
        integral(&chi).is_some(),
        json!({ "model": model.name, "bundle": bundle, "chi": chi.to_string() }),
    )])
}

/// Relations file: `{"symbols": [...], "relations": ["16*l0 = ...", ...]}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationsFile {
    pub symbols: Vec<String>,
    #[serde(default)]
    pub relations: Vec<String>,
}

pub fn picard(rel: &RelationsFile, goal: &str) -> Result<Vec<Row>> {
    let mut lattice = PicardLattice::new(rel.symbols.iter().cloned())?;
    for r in &rel.relations {
        lattice.add_relation(r)?;
    }
    let v = lattice.parse_equation(goal)?;
    let pass = lattice.contains(&v);
    Ok(vec![Row::new(
        format!("picard {goal}"),
        "goal in the integer span of the relations",
        pass,
        json!({ "relations": rel.relations, "goal": goal, "reduced": lattice.to_string() }),
    )])
}

/// One row per attempted step and one for the endpoint comparison.
pub fn rewrite(script: &Script) -> Result<Vec<Row>> {
    let report = chain_verify(script)?;
    let mut rows: Vec<Row> = report
        .steps
        .iter()
        .map(|s| Row::new(format!("{} step {}: {}", report.script, s.index, s.axiom), s.anchor.clone(), s.ok, json!(s)))
        .collect();
    rows.push(Row::new(
        format!("{} endpoint", report.script),
        "final line agrees with the stated end",
        report.pass,
        json!({
            "end": report.end,
            "final_normal_form": report.final_normal_form,
            "params": report.params,
            "failed_step": report.failed_step,
        }),
    ));
    Ok(rows)
}

/// Freeness verdict, passing when it is definite and consistent with the
/// Cartier flag.
pub fn quotient(a: &GradedAlgebra, bound: usize) -> Result<Vec<Row>> {
    let r = flatness_verdict(a, bound);
    let fixed = fixed_ideal(a);
    let conormal = if fixed.cartier {
        Some(conormal_degree_zero(a, bound.min(20))?)
    } else {
        None
    };
    let pass = match r.verdict {
        Verdict::Inconclusive => false,
        Verdict::NotFree => !fixed.cartier,
        Verdict::Free => r.basis_verified && conormal != Some(false),
    };
    Ok(vec![Row::new(
        format!("quotient {}", describe(a)),
        "definite freeness verdict over R_0, FREE on the Cartier locus with (N)_0 = 0",
        pass,
        json!({
            "hs_R": r.hs_r.coeffs,
            "hs_R0": r.hs_r0.coeffs,
            "ratio": r.ratio.coeffs,
            "verdict": r.verdict,
            "basis": r.basis,
            "cartier": fixed.cartier,
            "conormal_degree_zero": conormal,
        }),
    )])
}

fn describe(a: &GradedAlgebra) -> String {
    a.vars
        .iter()
        .map(|v| format!("{}:{}:{}", v.name, v.degree, if v.odd { "odd" } else { "even" }))
        .collect::<Vec<_>>()
        .join(",")
}

/// A unit of `verify-all` work: a group of rows computed together.
pub type Task = Box<dyn FnOnce() -> Vec<Row> + Send>;

fn guarded(name: &'static str, f: impl FnOnce() -> Result<Vec<Row>> + Send + 'static) -> Task {
    Box::new(move || f().unwrap_or_else(|e| vec![Row::error(name, "check raised an error", e)]))
}

fn p1p1() -> Result<ChowModel> {
    product_pn_pm(1, 1)
}

/// The full suite up to relative dimension `max_dim`, in report order.
pub fn verify_all(max_dim: u32, bound: usize) -> Vec<Task> {
    let mut tasks: Vec<Task> = Vec::new();
    for d in 1..=max_dim {
        tasks.push(guarded("coeffs", move || coeffs(d, false)));
    }
    tasks.push(Box::new(|| {
        let bad: Vec<u32> = (0..=64).filter(|&k| !pk_identity_check(k)).collect();
        vec![Row::new("pk-identity k=0..64", "t P_k(t) = 2^(k+1) - (2-t)^(k+1)", bad.is_empty(), json!({ "failing": bad }))]
    }));
    tasks.push(guarded("degenerate d=0", || {
        let refused = coeff_table(0).is_err();
        let defect = universal_defect_unchecked(0, &main_combo(0));
        Ok(vec![Row::new(
            "degenerate d=0",
            "d = 0 is refused; its defect is nonzero",
            refused && !defect.component(1).is_zero(),
            json!({ "refused": refused, "degree_1": defect.component(1).to_string() }),
        )])
    }));
    for d in 1..=max_dim {
        tasks.push(guarded("universal", move || universal(d, "main", &main_combo(d), true)));
    }
    tasks.push(guarded("universal deligne-d1", || universal(1, "deligne-d1", &deligne_combo_d1(), false)));
    for d in 1..=max_dim {
        tasks.push(guarded("ducrot", move || {
            let mut rows = ducrot(d, false)?;
            let control = ducrot(d, true)?.remove(0);
            rows.push(Row::new(
                format!("ducrot-control d={d}"),
                "d+1 factors do not vanish",
                !control.pass,
                control.witness,
            ));
            Ok(rows)
        }));
    }
    tasks.push(guarded("c1-lambda closed form", || {
        let m = p1p1()?;
        let mut wrong = Vec::new();
        for a in -3..=3i64 {
            for b in -3..=3i64 {
                let deg = c1_lambda(&m, &m.bundle(&format!("O({a},{b})"))?)?;
                if deg != rat(b * (a + 1)) {
                    wrong.push(format!("O({a},{b}): {deg}"));
                }
            }
        }
        Ok(vec![Row::new(
            "c1-lambda PnxPm(1,1) O(a,b)",
            "deg lambda(O(a,b)) = b(a+1), |a|,|b| <= 3",
            wrong.is_empty(),
            json!({ "mismatches": wrong }),
        )])
    }));
    tasks.push(guarded("main P1xP1", || verify_main(&p1p1()?, "O(1,1)")));
    for e in 0..=3 {
        tasks.push(guarded("main Hirzebruch", move || verify_main(&hirzebruch(e)?, "O(1,1)")));
    }
    if max_dim >= 2 {
        tasks.push(guarded("main P2xP1", || verify_main(&product_pn_pm(2, 1)?, "O(1,1)")));
    }
    tasks.push(guarded("mumford ratio", || {
        let mut degrees = Vec::new();
        let mut ok = universal_lambda_k_d1(2) == universal_lambda_k_d1(1) * rat(13);
        for e in 1..=3 {
            let h = hirzebruch(e)?;
            let l1 = c1_lambda(&h, &h.bundle("Omega")?)?;
            let l2 = c1_lambda(&h, &h.bundle("Omega^2")?)?;
            ok &= l2 == l1.clone() * rat(13);
            degrees.push(json!({ "e": e, "lambda_1": l1.to_string(), "lambda_2": l2.to_string() }));
        }
        Ok(vec![Row::new(
            "mumford-ratio",
            "deg lambda(Omega^2) = 13 deg lambda(Omega)",
            ok,
            json!({
                "universal_lambda_1": universal_lambda_k_d1(1).to_string(),
                "universal_lambda_2": universal_lambda_k_d1(2).to_string(),
                "hirzebruch": degrees,
            }),
        )])
    }));
    tasks.push(guarded("picard", || {
        let syms = vec!["l0".to_string(), "l1".into(), "l2".into()];
        let mut rel = RelationsFile {
            symbols: syms,
            relations: vec!["16*l0 = 7*l0 - 4*l1 + l2".into(), "l0 = l1".into()],
        };
        let mut rows = picard(&rel, "13*l1 = l2")?;
        let mut early = picard(&rel, "12*l1 = 0")?.remove(0);
        early.check = "picard 12*l1 = 0 needs the extra relation".into();
        early.pass = !early.pass;
        rows.push(early);
        rel.relations.push("l2 = l1".into());
        rows.extend(picard(&rel, "12*l1 = 0")?);
        Ok(rows)
    }));
    for name in detline::kexpr::BUILTIN_CHAINS {
        tasks.push(guarded("rewrite", move || rewrite(&builtin_script(name)?)));
    }
    for name in ["invfunc-a-k", "invfunc-l-p"] {
        tasks.push(guarded("rewrite corruptions", move || {
            let s = builtin_script(name)?;
            let mut wrong = Vec::new();
            for n in 1..s.steps.len() {
                let r = chain_verify(&s.clone().corrupt(n)?)?;
                if r.pass || r.failed_step != Some(n) {
                    wrong.push(json!({ "swap": n, "failed_step": r.failed_step }));
                }
            }
            Ok(vec![Row::new(
                format!("{name} corruptions"),
                "swapping steps n, n+1 fails at step n",
                wrong.is_empty(),
                json!({ "swaps": s.steps.len() - 1, "undetected": wrong }),
            )])
        }));
    }
    for vars in ["x:1:odd", "x:1:odd,y:1:odd", "x:1:odd,y:1:even", "x:3:odd,y:2:even,z:1:even"] {
        tasks.push(guarded("quotient", move || quotient(&vars.parse()?, bound)));
    }
    tasks.push(guarded("euler", || {
        let mut wrong = Vec::new();
        for n in 1..=3u32 {
            let p = projective_space(n)?;
            for a in 0..=4i64 {
                let chi = euler_char(&p, &p.bundle(&format!("O({a})"))?)?;
                let expect = binomial(a as u32 + n, n);
                if chi != Rational::from_integer(expect.clone()) {
                    wrong.push(format!("P{n} O({a}): {chi} vs {expect}"));
                }
            }
        }
        Ok(vec![Row::new(
            "euler P^n O(a)",
            "chi(P^n, O(a)) = C(a+n, n), n <= 3, a = 0..4",
            wrong.is_empty(),
            json!({ "mismatches": wrong }),
        )])
    }));
    tasks
}

/// Resolves `--model-file` or a built-in name.
pub fn load_model(
    name: Option<&str>,
    file: Option<&std::path::Path>,
    n: Option<u32>,
    m: Option<u32>,
    e: Option<i64>,
) -> std::result::Result<ChowModel, String> {
    match (name, file) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|err| format!("{}: {err}", path.display()))?;
            chowmodel::load_model(&text).map_err(|err| err.to_string())
        }
        (Some(name), None) => chowmodel::builtin(name, n, m, e).map_err(|err| err.to_string()),
        (None, None) => Err("this command needs --model or --model-file".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coeffs_rows() {
        let rows = coeffs(1, true).unwrap();
        assert_eq!(rows[0].witness["entries"], json!(["7", "-4", "1"]));
        assert_eq!(rows[0].witness["matrix"].as_array().unwrap().len(), 3);
        assert!(rows.iter().all(|r| r.pass));
        assert!(coeffs(0, false).is_err());
    }

    #[test]
    fn degenerate_universal_is_a_failure_not_an_error() {
        let rows = universal(0, "main", &main_combo(0), false).unwrap();
        assert!(!rows[0].pass);
    }

    #[test]
    fn ducrot_drop_one_fails() {
        assert!(ducrot(2, false).unwrap()[0].pass);
        assert!(!ducrot(2, true).unwrap()[0].pass);
    }

    #[test]
    fn quotient_verdicts() {
        let free = quotient(&"x:1:odd".parse().unwrap(), 40).unwrap();
        assert!(free[0].pass);
        assert_eq!(free[0].witness["verdict"], "FREE");
        let nf = quotient(&"x:1:odd,y:1:odd".parse().unwrap(), 40).unwrap();
        assert!(nf[0].pass);
        assert_eq!(nf[0].witness["verdict"], "NOT-FREE");
        assert_eq!(nf[0].witness["conormal_degree_zero"], Value::Null);
    }

    #[test]
    fn corrupted_rewrite_fails_at_the_swap() {
        let s = builtin_script("invfunc-a-k").unwrap().corrupt(6).unwrap();
        let rows = rewrite(&s).unwrap();
        let first_bad = rows.iter().position(|r| !r.pass).unwrap();
        assert_eq!(rows[first_bad].witness["index"], 6);
    }
}
