//! Finite-difference solver on tensor grids: explicit Euler in time,
//! centered second differences (4-point cross stencil for mixed terms) and
//! first-order upwinding of the total drift.
//!
//! In nonlinear mode the quadratic gradient term is advanced as a drift
//! `P'(u) K ∇u` built from the previous time level.

pub mod envelope;
pub mod grid;
pub mod series;
pub mod step;

pub use envelope::{check_envelope, measured, DominationReport};
pub use grid::{build_grid, compatibility_mismatch, Grid, GridState, Stats};
pub use series::{sample_times, simulate, Sample, TimeSeries, CSV_HEADER};
pub use step::{step, Solver, CFL_FRACTION};
