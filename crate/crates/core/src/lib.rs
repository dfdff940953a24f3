//! High-precision diagonal Padé approximants to Cauchy transforms on unions of
//! real intervals, and the strong-asymptotics predictor built on the associated
//! hyperelliptic Riemann surface.
//!
//! Module map:
//! - [`numerics`]: precision context, quadrature, polynomials, elimination, roots.
//! - [`contour`]: interval contours, analytic weights, moments and Cauchy transforms.
//! - [`pade`]: minimal diagonal Padé pairs from power-series coefficients.
//! - [`surface`]: periods, Abel map, Green differential, theta function, Jacobi inversion.
//! - [`szego`]: Szegő functions, index classification and the predictor `Ψ_n`.
//! - [`verify`]: comparisons between Padé data and the predictor.

pub mod contour;
pub mod error;
pub mod numerics;
pub mod pade;
pub mod surface;
pub mod szego;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::{ComplexValue, PrecisionContext, Real};
