//! Exact verification engine for determinant-of-cohomology identities.
//!
//! The crate is layered bottom-up:
//!
//! - [`exactalg`]: exact rationals and truncated multivariate series;
//! - [`combinat`]: the `P_k` polynomials and the exponent tables `c_j(d)`;
//! - [`chowmodel`]: presented Chow rings of concrete families;
//! - [`charclass`]: Chern character, Todd class, Adams operations, `Sym^j`;
//! - [`grrcheck`]: universal defects, degrees of `c_1(lambda)` on families,
//!   and Picard-lattice deductions;
//! - [`kexpr`]: a rewriting engine for formal virtual-sheaf expressions;
//! - [`quotientlab`]: Hilbert-series checks for sign involutions.

pub mod charclass;
pub mod chowmodel;
pub mod combinat;
pub mod error;
pub mod exactalg;
pub mod grrcheck;
pub mod kexpr;
pub mod quotientlab;

pub use error::{Error, Result};
pub use exactalg::{Rational, TruncatedSeries, VarTable};
