//! Finite-difference solver and explicit long-time bounds for
//! non-divergence diffusion-transport equations with drifts.

pub mod bounds;
pub mod config;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod scenario;
pub mod solver;
pub mod transform;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use geometry::{Domain, Point};
pub use scenario::{Expr, Mode, PFamily, Scenario};
