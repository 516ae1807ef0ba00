//! Finite-difference solutions of the hydrodynamic equations.

mod grid;
mod solver;

pub use grid::{Grid, GridFunction};
pub use solver::{
    solve_convdiff, solve_epcs_pde, solve_eprs_pde, stable_dt, transform_solution, Drift, FnDrift,
    HalfGammaDrift, ShiftDrift, ZeroDrift, BOUND_SLACK, CFL_SAFETY,
};
