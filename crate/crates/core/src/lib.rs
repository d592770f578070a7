//! Numerical laboratory for weighted Fourier extension estimates in the plane.
//!
//! The crate builds discrete curve measures, evaluates the extension operator
//! `Ef = (f dσ)^` on planar grids, measures tube masses and fractal-dimension
//! weight functionals, runs the exponent-bootstrap recursion, and probes
//! Mizohata-Takeuchi-type inequalities
//!
//! ```text
//!     ∫ |Ef(x)|^q w(x) dx  ≲  (sup_T w(T)) ‖f‖_{L²(σ)}^q
//! ```
//!
//! at desk scale. Everything is deterministic given a configuration and a
//! seed; suprema over continuum families are restricted to grid centers and
//! dyadic radii, so every reported functional value is a certified lower
//! bound of its continuum counterpart.

pub mod error;
pub mod experiments;
pub mod fourier;
pub mod grid;
pub mod halton;
pub mod io;
pub mod maximal;
pub mod measures;
pub mod quad;
mod svg;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{Grid, GridSpec};
pub use measures::{CurveSpec, DiscreteMeasure};
