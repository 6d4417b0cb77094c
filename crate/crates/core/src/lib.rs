//! Controllability certificates for parameterized linear ensemble systems.

pub mod analytic;
pub mod basis;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod laurent;
pub mod poly;
pub mod quadrature;
pub mod reduction;
pub mod witness;

pub use error::{Error, Result};
