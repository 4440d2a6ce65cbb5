//! Geometric dynamics for first-order flows on semi-Riemannian manifolds.

pub mod dynamics;
pub mod error;
pub mod flows;
pub mod geometry;
pub mod ode;
pub mod tbundle;
pub mod verify;
pub mod vfexpr;

pub use error::{Error, Result};
