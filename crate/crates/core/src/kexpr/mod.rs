//! Term rewriting over formal virtual sheaves and determinant lines.

pub mod ast;
pub mod normal;
pub mod parse;
pub mod rewrite;
pub mod scripts;
pub mod structural;

pub use ast::{Functor, IntExpr, KExpr};
pub use normal::{normal_form, normalize, NormalForm};
pub use parse::{parse, parse_with};
pub use rewrite::{
    chain_verify, multiadditivity_expand, AxiomKind, AxiomRegistry, ChainReport, RewriteAxiom, Script, Step,
};
pub use scripts::{builtin_script, BUILTIN_CHAINS};
