//! Symbolic-numeric toolkit for first-order totally linear partial
//! differential operators `L + q`, where `L = sum_k a_k ∂/∂x_k`.
//!
//! - [`expr`]: expression trees with parsing, exact differentiation,
//!   substitution, normalization and evaluation.
//! - [`operator`]: the operators themselves, conjugation `η⁻¹(L+q)η`,
//!   factorization through a kernel element, powers and eigenfunction shifts.
//! - [`solution`]: building solutions of `Lφ = 0`, `(L+q)ψ = 0` and
//!   `(L+q)χ = b` from one another.
//! - [`verify`]: seeded sampling on guarded domains, residuals, the
//!   finite-difference oracle, Jacobian rank and characteristic flows.
//! - [`cli`]: problem files and batch commands.

pub mod cli;
pub mod expr;
pub mod operator;
pub mod solution;
pub mod verify;

pub use expr::{parse, CoordinateSystem, Expr, Point};
pub use operator::{DifferentialOperator, KernelCertificate};
pub use verify::{CheckSettings, Domain, VerificationReport};
