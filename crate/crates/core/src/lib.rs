//! Numerical laboratory for confluent hypergeometric systems
//! `dF/dz = (u + A/z) F`.
//!
//! The crate computes formal solutions, Stokes matrices and connection
//! matrices through normalized infinite matrix products, validates them
//! against an independent ODE integrator, and checks the algebraic
//! structures attached to them: Yangian RTT relations, RLL relations with
//! the standard R-matrix, quantum group generator relations, commutation
//! relations of the product matrix, and the braid group action on Stokes
//! pairs.

pub mod braid;
pub mod error;
pub mod glrep;
pub mod hypersys;
pub mod numkit;
pub mod oracle;
pub mod qrel;
pub mod stokes;
pub mod yangian;

pub use error::{Error, Result};
