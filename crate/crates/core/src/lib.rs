//! Eigenvalues, Stokes multipliers and PT-pseudo-norms of `H = p^2 + V(q)`
//! with polynomial PT-symmetric potentials `V(q) = -[(iq)^m + a_1 (iq)^{m-1} + ...]`.
//!
//! Eigenvalues are the zeros of the Stokes multiplier `C(E)` linking the
//! canonical solutions recessive in adjacent sectors; the pseudo-norm of an
//! eigenfunction is tied to `C'(E_n)` through `int_L Y^2 dX = -2 C'(E_n)`.

pub mod canonical;
pub mod error;
pub mod exceptional;
pub mod odecore;
pub mod oracle;
pub mod potential;
pub mod ptnorm;
pub mod quadrature;
pub mod spectrum;
pub mod stokes;

pub use error::{Error, Result};
pub use num_complex::Complex64;
