//! Numerical laboratory for the complex Szász-Durrmeyer-Chlodowsky operator
//!
//! ```text
//! F_n(f; z) = (n+1)/b_n · Σ_k p_{n,k}(z/b_n) ∫_0^{b_n} φ_{n,k}(t/b_n) f(t) dt
//! ```
//!
//! acting on analytic functions given by Taylor coefficients with a
//! `|c_p| <= M A^p / (2p)!` decay certificate. Every computation path that
//! feeds a bound check has an independent second route:
//!
//! * [`moments`]: moment polynomials by recurrence and by direct Poisson series,
//! * [`operator`]: the operator by moment expansion and by quadrature,
//! * [`analysis`]: derivatives by Cauchy integrals and by termwise differentiation.
//!
//! Sweeps over `n` run on rayon when the `parallel` feature is on (the
//! default) and sequentially otherwise; see [`exec`].

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod exec;
pub mod function_model;
pub mod moments;
pub mod numerics;
pub mod operator;

pub use error::{Error, Result};
pub use exec::Execution;
pub use function_model::{ComplexPolynomial, FunctionSpec, TaylorFunction};
pub use moments::MomentTable;
pub use num_complex::Complex64;
pub use operator::{BnRule, OperatorConfig};
