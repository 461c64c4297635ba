//! Numerical laboratory for self-expanding solutions of mean curvature flow.
//!
//! The crate builds the one-parameter family of complete self-expander
//! curves in the plane (and their products with flat factors), integrates
//! weighted volumes and growth functionals on them, computes the bottom of
//! the spectrum of the drifted Laplacian `𝓛 = Δ + ½⟨x, ∇·⟩` and of the
//! stability operator `L = 𝓛 + |A|² - ½`, and checks the pointwise
//! identities, integral inequalities and rigidity hypotheses that hold for
//! self-expanders.

pub mod curve;
pub mod error;
pub mod fmt;
pub mod identities;
pub mod measure;
pub mod ode;
pub mod quadrature;
pub mod report;
pub mod rigidity;
pub mod spectral;
pub mod tridiag;

pub use curve::{
    integrate_curve, CurveParams, CurveSample, Expander, ExpanderCurve, ProductExpander,
};
pub use error::{Error, Result};
