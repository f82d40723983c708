//! Proof scripts shipped with the crate.

use super::rewrite::{multadd_script, Script};
use crate::error::{Error, Result};

const INVFUNC_A_K: &str = include_str!("../../scripts/invfunc-a-k.json");
const INVFUNC_L_P: &str = include_str!("../../scripts/invfunc-l-p.json");
const INVFUNC_SYM: &str = include_str!("../../scripts/invfunc-sym.json");

pub const BUILTIN_CHAINS: [&str; 4] = ["invfunc-a-k", "invfunc-l-p", "invfunc-sym", "multadd-d1"];

/// A built-in script by name.
pub fn builtin_script(name: &str) -> Result<Script> {
    match name {
        "invfunc-a-k" => Script::from_json(INVFUNC_A_K),
        "invfunc-l-p" => Script::from_json(INVFUNC_L_P),
        "invfunc-sym" => Script::from_json(INVFUNC_SYM),
        "multadd-d1" => multadd_script(&["L1", "L2"], "Q"),
        _ => Err(Error::Domain(format!(
            "unknown chain `{name}`; expected one of {}",
            BUILTIN_CHAINS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kexpr::rewrite::chain_verify;

    #[test]
    fn builtins_pass_at_default_parameters() {
        for name in BUILTIN_CHAINS {
            let s = builtin_script(name).unwrap();
            let r = chain_verify(&s).unwrap();
            assert!(r.pass, "{name}: {r:#?}");
        }
        assert!(builtin_script("nope").is_err());
    }

    #[test]
    fn paper_step_counts() {
        assert_eq!(builtin_script("invfunc-a-k").unwrap().steps.len(), 11);
        assert_eq!(builtin_script("multadd-d1").unwrap().steps.len(), 6);
    }

    #[test]
    fn parameter_sweep() {
        for k in 0..=5 {
            let s = builtin_script("invfunc-a-k").unwrap().with_param("k", k).unwrap();
            assert!(chain_verify(&s).unwrap().pass, "k = {k}");
        }
        for d in 1..=4 {
            for name in ["invfunc-l-p", "invfunc-sym"] {
                let s = builtin_script(name).unwrap().with_param("d", d).unwrap();
                assert!(chain_verify(&s).unwrap().pass, "{name}, d = {d}");
            }
        }
    }

    #[test]
    fn every_swap_fails_at_its_index() {
        for name in BUILTIN_CHAINS {
            let s = builtin_script(name).unwrap();
            for n in 1..s.steps.len() {
                let r = chain_verify(&s.clone().corrupt(n).unwrap()).unwrap();
                assert!(!r.pass, "{name} swap {n}");
                assert_eq!(r.failed_step, Some(n), "{name} swap {n}: {r:#?}");
            }
        }
    }
}
