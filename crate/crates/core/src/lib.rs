//! Discrete Laplace operators on quad-graphs embedded in `Z^d`, their
//! discrete-exponential wave functions, quasimomentum level-set contours on
//! the Riemann sphere, and Green's functions obtained as contour integrals
//! of spectral densities, plus Riemann theta evaluation utilities.
//!
//! Module map:
//!
//! - [`quadgraph`] — combinatorics of quad-graphs, patch generators,
//!   validation, JSON serialization
//! - [`spectral`] — genus-0 spectral data, wave functions, four-point
//!   coefficients, edge weights
//! - [`operators`] — weighted Laplacian, discrete Cauchy-Riemann residuals,
//!   vertex weight sums
//! - [`quasimomentum`] — imaginary parts of quasimomenta, level-set contour
//!   extraction on two charts, adaptive quadrature, winding numbers
//! - [`green`] — the H function, Green fields with diagonal calibration,
//!   residue oracle, delta/growth verification reports
//! - [`theta`] — Riemann theta lattice sums and the explicit wave-function
//!   formula over user-supplied period data

pub mod green;
pub mod operators;
pub mod quadgraph;
pub mod quasimomentum;
pub mod spectral;
pub mod sphere;
pub mod theta;

pub use num_complex::Complex64;
pub use sphere::SpherePoint;
