//! Numerical laboratory for the null-state PDE system of one-leg boundary
//! operators, its explicit solution spaces for one and two arcs, the
//! interval-collapse limit functionals indexed by noncrossing arc diagrams,
//! and a Monte Carlo check of Cardy's crossing formula.
//!
//! Module map:
//!
//! - [`specfun`]: Gauss hypergeometric ₂F₁ and the complete elliptic integral K.
//! - [`params`]: κ-dependent central charge, boundary weights, Kac table and Potts Q.
//! - [`diagrams`]: Catalan enumeration of arc diagrams and allowable limit sequences.
//! - [`solutions`]: closed-form solution handles and Möbius covariance checks.
//! - [`pde_check`]: finite-difference residuals of the null-state PDEs and Ward identities.
//! - [`limits`]: extrapolated collapse limits, interval classification, dual vectors.
//! - [`percolation`]: crossing probabilities, both from the formula and from simulation.

pub mod diagrams;
pub mod error;
pub mod limits;
pub mod params;
pub mod pde_check;
pub mod percolation;
pub mod solutions;
pub mod specfun;

mod richardson;
mod stencil;

pub use error::{Error, Result};
pub use params::Kappa;
pub use solutions::{ConfigPoint, Evaluate, SolutionHandle};
