//! Gelfand-Cetlin polytopes, toric degenerations of flag manifolds and
//! potential functions of their Lagrangian torus fibers.

pub mod degeneration;
pub mod error;
mod exact;
pub mod flagcombi;
pub mod gcpoly;
pub mod gcsystem;
pub mod potential;
pub mod rational;
pub mod toda;
mod volume;

pub use error::{Error, Result};
