//! Exact p-adic tools for slopes of Newton polygons of integer operators
//! and for eigenvalue congruences between operators that agree on a
//! finite quotient.
//!
//! The modules build on each other:
//!
//! * [`padic`]: primes, valuations, unit parts, congruences and slopes.
//! * [`matrix`]: square big-integer matrices with a JSON form.
//! * [`lattice`]: Smith normal form, divisor profiles and kernels mod `p^N`.
//! * [`newton`]: characteristic polynomials, Newton polygons, Hensel
//!   lifting of slope roots and eigenvectors mod `p^N`.
//! * [`bounds`]: the boundary functions behind the slope bound `c` and
//!   the closed-form estimates for tensor profiles.
//! * [`family`]: random congruent instance pairs and the trial runners.

pub mod bounds;
pub mod error;
pub mod family;
pub mod lattice;
pub mod matrix;
pub mod newton;
pub mod padic;

pub use error::{Error, Result};
pub use matrix::IntMatrix;
pub use padic::{Prime, Slope, Valuation};
