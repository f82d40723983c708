//! Library results against independently computed values.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use detline::charclass::todd_from_chern;
use detline::chowmodel::product_pn_pm;
use detline::combinat::coeff_table;
use detline::exactalg::{rat, TruncatedSeries, VarTable};
use detline::grrcheck::PicardLattice;
use detline::quotientlab::{algebra_hs, invariants_hs, odd_part_hs, GradedAlgebra, GradedVar};

fn pascal(n: usize) -> Vec<Vec<i128>> {
    let mut rows = vec![vec![1i128]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![1i128; i + 1];
        for j in 1..i {
            row[j] = prev[j - 1] + prev[j];
        }
        rows.push(row);
    }
    rows
}

#[test]
fn coeff_tables_against_double_sum() {
    let c = pascal(32);
    for d in 1..=16usize {
        let n = 2 * d;
        let table = coeff_table(d as u32).unwrap();
        assert_eq!(table.entries.len(), n + 1);
        for (j, entry) in table.entries.iter().enumerate() {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let expect: i128 = (j..=n).map(|i| (1i128 << (n - i)) * sign * c[i][j]).sum();
            assert_eq!(entry, &BigInt::from(expect), "d = {d}, j = {j}");
        }
    }
}

#[test]
fn todd_of_a_line_inverts_the_exponential_quotient() {
    // (1 - e^{-x}) / x = sum_k (-1)^k x^k / (k+1)!; Td is its reciprocal.
    let n = 10;
    let mut fact = vec![BigInt::from(1)];
    for k in 1..=n + 1 {
        let next = &fact[k - 1] * BigInt::from(k);
        fact.push(next);
    }
    let a = |k: usize| {
        let s = if k % 2 == 0 { 1 } else { -1 };
        BigRational::new(BigInt::from(s), fact[k + 1].clone())
    };
    let mut t = vec![BigRational::from_integer(1.into())];
    for m in 1..=n {
        let s: BigRational = (1..=m).map(|k| a(k) * &t[m - k]).sum();
        t.push(-s);
    }
    let vars = Arc::new(VarTable::uniform(["x"]).unwrap());
    let c = &TruncatedSeries::one(vars.clone(), n as u32) + &TruncatedSeries::var(vars, n as u32, "x").unwrap();
    let td = todd_from_chern(&c).unwrap();
    for (m, expect) in t.iter().enumerate() {
        assert_eq!(&td.carrier.coeff(&[m as u32]), expect, "x^{m}");
    }
    assert_eq!(t[2], BigRational::new(1.into(), 12.into()));
    assert_eq!(t[4], BigRational::new((-1).into(), 720.into()));
}

#[test]
fn product_integrals_are_kronecker() {
    for (n, m) in [(1u32, 1u32), (2, 1), (1, 3), (2, 2)] {
        let model = product_pn_pm(n, m).unwrap();
        for a in 0..=n + 1 {
            for b in 0..=m + 1 {
                if a + b != n + m {
                    continue;
                }
                let c = model.class([(vec![a, b], rat(1))]).unwrap();
                let expect = if a == n && b == m { rat(1) } else { rat(0) };
                assert_eq!(model.integrate(&c).unwrap(), expect, "P{n}xP{m}: h^{a} s^{b}");
            }
        }
    }
}

/// Monomials of each degree up to `bound`, split by parity.
fn brute_counts(vars: &[(u32, bool)], bound: usize) -> (Vec<i64>, Vec<i64>) {
    let mut all = vec![0i64; bound + 1];
    let mut even = vec![0i64; bound + 1];
    fn go(vars: &[(u32, bool)], deg: usize, odd: bool, bound: usize, all: &mut [i64], even: &mut [i64]) {
        match vars.split_first() {
            None => {
                all[deg] += 1;
                if !odd {
                    even[deg] += 1;
                }
            }
            Some((&(w, p), rest)) => {
                let mut e = 0;
                while deg + e * w as usize <= bound {
                    go(rest, deg + e * w as usize, odd ^ (p && e % 2 == 1), bound, all, even);
                    e += 1;
                }
            }
        }
    }
    go(vars, 0, false, bound, &mut all, &mut even);
    (all, even)
}

fn algebra(vars: &[(u32, bool)]) -> GradedAlgebra {
    GradedAlgebra::new(
        vars.iter()
            .enumerate()
            .map(|(i, &(degree, odd))| GradedVar {
                name: format!("x{i}"),
                degree,
                odd,
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn hilbert_series_count_monomials(vars in prop::collection::vec((1u32..=3, any::<bool>()), 1..=4)) {
        let bound = 14;
        let a = algebra(&vars);
        let (all, even) = brute_counts(&vars, bound);
        prop_assert_eq!(&algebra_hs(&a, bound).coeffs, &all);
        prop_assert_eq!(&invariants_hs(&a, bound).coeffs, &even);
        let odd: Vec<i64> = all.iter().zip(&even).map(|(x, y)| x - y).collect();
        prop_assert_eq!(&odd_part_hs(&a, bound).coeffs, &odd);
    }

    #[test]
    fn picard_contains_constructed_combinations(
        rels in prop::collection::vec(prop::collection::vec(-4i64..=4, 3), 1..=3),
        mult in prop::collection::vec(-3i64..=3, 3),
    ) {
        let mut p = PicardLattice::new(["a", "b", "c", "z"]).unwrap();
        // `z` never appears in a relation.
        for r in &rels {
            if r.iter().all(|&x| x == 0) {
                continue;
            }
            p.add_relation_vec(r.iter().chain([&0]).map(|&x| BigInt::from(x)).collect()).unwrap();
        }
        let mut goal = vec![BigInt::from(0); 4];
        for (r, k) in rels.iter().zip(&mult) {
            for (g, x) in goal.iter_mut().zip(r) {
                *g += BigInt::from(x * k);
            }
        }
        prop_assert!(p.contains(&goal));
        goal[3] = BigInt::from(1);
        prop_assert!(!p.contains(&goal));
    }
}

#[test]
fn picard_is_integral_not_rational() {
    let mut p = PicardLattice::new(["a"]).unwrap();
    p.add_relation("2*a = 0").unwrap();
    assert!(p.contains(&[BigInt::from(4)]));
    assert!(!p.contains(&[BigInt::from(1)]));
}
