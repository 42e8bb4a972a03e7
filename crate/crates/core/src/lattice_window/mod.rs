//! Finite-dimensional models of lattice sets: windows, stable subspaces,
//! strata invariants and their enumeration.

pub mod enumerate;
pub mod subspace;
pub mod window;

pub use enumerate::{BruteForce, ChildFilter, ClosureBfs, Query, SubspaceEnumerator, DEFAULT_CAP};
pub use subspace::Subspace;
pub use window::{
    factor_multiplication, strata_invariants, transfer, FactorAction, FactorWindow, Frame, LatticePoint, Strata, WindowModel,
};
