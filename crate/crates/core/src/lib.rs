//! Exact-arithmetic engine for contiguous fair division.
//!
//! Cake instances are piecewise-constant densities on `[0,1]`; every position,
//! height and value is an exact [`Rational`]. The crate covers the
//! approximation protocols ([`moving_knife`], [`midpoint_protocol`]), an exact
//! LP-based decision procedure ([`exact_solver`] on top of [`ratlp`]),
//! indivisible items on a line ([`discrete`]), the continuous/discrete
//! [`bridges`], and the reduction [`gadgets`].
//!
//! Enumerative searches run on rayon when the `parallel` feature is enabled
//! and fall back to a sequential loop otherwise; see [`exec`].

pub mod allocations;
pub mod bridges;
pub mod discrete;
pub mod error;
pub mod exact_solver;
pub mod exec;
pub mod gadgets;
pub mod midpoint_protocol;
pub mod moving_knife;
pub mod random;
pub mod ratlp;
pub mod valuations;

pub use allocations::{envy_report, is_eps_ef, ContiguousAllocation, EnvyReport};
pub use error::{Error, Result};
pub use exec::{Exec, SearchOptions};
pub use valuations::{eval, rat, Block, CakeInstance, PiecewiseConstantValuation, Rational};
