//! Automorphism constraints on the matrix `B` of a discrete symmetry.
//!
//! Every discrete contact symmetry induces a nonsingular matrix `B` with
//! `X_i = b_il X̂_l` that preserves the structure constants. This module
//! generates the resulting quadratic system, solves it into parametric
//! families by case splitting, and reduces the families modulo inner
//! automorphisms `B ↦ A(j, ε)·B`.

mod canonical;
mod constraints;
mod family;
mod solver;
mod strategies;

pub use canonical::{
    canonicalize, greedy_strategy, EpsFormula, ReductionStep, Strategy, StrategyBranch,
    StrategyError,
};
pub use constraints::{Constraint, ConstraintLine, ConstraintSystem};
pub use family::{BMatrixFamily, FamilyFile, ParamDecl, ParamDomain, SymbolicEntry};
pub use solver::{solve_families, solve_families_with, SolveError, SolveOptions};
pub use strategies::{bundled_strategy, bundled_strategy_names, strategy_for_algebra};
