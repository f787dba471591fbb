//! Exact differential-algebra kernel for evolution equations on jet space.
//!
//! The crate provides a canonicalizing symbolic kernel over exact rationals
//! (with declared function symbols, algebraic relations, and one adjoined
//! surd), the jet-space calculus built on it (total derivative, time
//! derivative along a flow, Fréchet derivative, Euler operator, symmetry and
//! conserved-density residuals), formal pseudodifferential operators with
//! D^{-1} terms, verification of differential substitutions between
//! evolution equations, and a catalog of equations, maps, symmetries, and
//! operators used by the verification command-line tool.

pub mod atom;
pub mod catalog;
pub mod context;
pub mod derive;
pub mod diffalg;
pub mod display;
pub mod error;
pub mod expr;
pub mod parse;
pub mod point;
pub mod poly;
pub mod psdo;
pub mod subst;
pub mod transform;

pub use atom::{Atom, Monomial};
pub use context::{rat, Context, ContextBuilder, SessionOpts};
pub use diffalg::{
    conserved_density_residual, euler_operator, frechet, solve_linear_ansatz, symmetry_residual,
    DifferentialOperator, EvolutionEquation, Residual,
};
pub use error::{Error, Result};
pub use expr::Expr;
pub use parse::parse;
pub use point::{zero_test, JetPoint, QuadExt, Verdict};
pub use psdo::{apply_psdo, integrate_total, is_total_x_derivative, PseudoDiffOperator};
pub use transform::{
    implicit_invariance_residual, point_pushforward, pushforward_residual, ImplicitRelation,
    Substitution,
};
