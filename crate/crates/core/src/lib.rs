//! Spectral solver for the Christoffel problem `Δu + 2u = f` on S² together
//! with kernel-based convexity tests for its solutions.
//!
//! The L_p variant and body reconstruction live in `lp` and `body`.

pub mod body;
pub mod cli_io;
pub mod convexity;
pub mod error;
pub mod harmonics;
pub mod kernels;
pub mod lp;
pub mod quadrature;
pub mod sphere;

pub use error::{Error, Result};
