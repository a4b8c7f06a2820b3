//! Effective convergence bounds for Frobenius structures on connections
//! over the p-adic projective line, with an experimental pipeline that
//! computes the Frobenius matrix of a built-in elliptic-curve family by
//! the deformation method and measures its pole orders modulo p^m.

pub mod arith;
pub mod bounds;
pub mod cli;
pub mod connection;
pub mod error;
pub mod frobenius;
pub mod reconstruct;

pub use error::{Error, Result};
