//! Hierarchical finite-element renormalization of a Gaussian scalar field on
//! triangles.
//!
//! A triangle is repeatedly split at its centroid into three triangles of
//! equal area. Integrating out the field value at each new centroid gives an
//! exact map on quadratic actions of the parent triangle; the cotangent
//! (linear finite element) action is a fixed point of that map.
//!
//! - [`shape_space`]: cotangent coordinates of marked triangles, the
//!   hyperboloid and half-plane pictures, and the exact group matrices.
//! - [`subdivision`]: the centroid-subdivision semigroup, random flows and
//!   explicit hierarchical meshes.
//! - [`action`]: quadratic actions, the one-step decimation and the induced
//!   map on coefficient functions.
//! - [`schur_oracle`]: full-mesh stiffness assembly and interior elimination,
//!   used to cross-check the decimation map over many levels.
//! - [`expr`]: the arithmetic grammar for user-supplied coefficient functions.

pub mod action;
pub mod error;
pub mod expr;
pub mod sampling;
pub mod schur_oracle;
pub mod shape_space;
pub mod subdivision;

pub use error::{Error, Result};

/// Library version string, echoed into every CLI artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A point in the plane.
pub type Point2 = [f64; 2];
