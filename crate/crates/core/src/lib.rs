//! Numerical toolkit for conformal eigenvalue bounds on the disk and the
//! sphere: Möbius renormalization of measures, cap folding and rearrangement,
//! maximizing-direction search, Rayleigh-quotient certificates, and a P1
//! finite-element Neumann eigensolver used as independent ground truth.

pub mod bounds;
pub mod caps;
pub mod cli;
pub mod directions;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod measures;
pub mod moebius;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
