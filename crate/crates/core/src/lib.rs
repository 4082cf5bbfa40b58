//! Lattice-truncated path-integral reduction for scalar electrodynamics.
//!
//! The crate is layered bottom-up:
//!
//! * [`lattice`]: periodic cubic lattices, finite differences, inner products.
//! * [`gauge`]: the U(1) action, Coulomb-gauge adapted coordinates, the
//!   Faddeev-Popov operator and the projectors `P⊥` and `N`.
//! * [`geometry`]: orbit metric, mechanical connection, horizontal metric,
//!   Christoffel contractions, mean curvatures and the reduction Jacobian.
//! * [`stochastic`]: Euler-Maruyama integration of the original and reduced
//!   SDEs, Feynman-Kac and Girsanov estimators.
//! * [`oracle`]: a grid solver for the backward Kolmogorov equation on at
//!   most three degrees of freedom, plus closed-form Gaussian kernels.

pub mod error;
pub mod gauge;
pub mod geometry;
pub mod lattice;
pub mod oracle;
pub mod stochastic;

pub use error::{Error, Result};
pub use gauge::{AdaptedCoords, FaddeevPopov, FieldPair, GaugeStructure};
pub use geometry::{OrbitGeometry, OrbitMetric};
pub use lattice::{Lattice, LatticeSpec, SiteDoublet, SiteScalar, SiteVector};
