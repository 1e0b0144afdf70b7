//! Quadrant dependence in expectation (QDE) and Grüss-type covariance bounds.
//!
//! The crate is organized bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`numerics`] | adaptive Gauss–Kronrod quadrature, bracketing root finder, golden-section maximizer |
//! | [`copula`] | Fréchet bounds, independence, FGM, the Genest–Ghoudi Archimedean family, convex mixtures |
//! | [`models`] | marginals, joint models, distortions, threshold covariances `Cov[X, 1{Y > y}]` |
//! | [`dependence`] | QD / QDE classification, sign surfaces, mixture thresholds, κ-constant criterion |
//! | [`bounds`] | Hoeffding-route covariance, classical bounds, QDE and regression bounds |
//! | [`extremal`] | the κ_p function, its maximizer `x_p`, and sharp central-moment bounds |
//! | [`oracle`] | seeded Monte Carlo sampling used to cross-check every quadrature value |
//!
//! All computations are pure functions of their inputs.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod copula;
pub mod dependence;
mod error;
pub mod extremal;
pub mod models;
pub mod numerics;
pub mod oracle;

pub use copula::Copula;
pub use error::{Error, Result};
pub use models::{Distortion, JointModel, Marginal};
pub use numerics::Tolerance;
