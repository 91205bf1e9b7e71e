//! Numerical laboratory for the second variation of area of minimal
//! submanifolds in products `CP × M` and `HP × M`.
//!
//! The crate is organised bottom-up:
//!
//! * [`tangent`]: ambient tangent vectors of a product, factor projections,
//!   Gram-Schmidt and seeded random adapted frames.
//! * [`model`]: projective, spherical and flat factor models: curvature
//!   tensors, complex/quaternionic structures and the Veronese
//!   second-fundamental-form inner products.
//! * [`variation`]: the stability sum `Q` computed by five independent
//!   formulas, together with the equality-case and structure classifiers.
//! * [`geodesic`]: closed geodesics in `CP¹ × S¹` and `CP¹ × Sᵏ`, normal
//!   parallel transport and the discretised Jacobi index form.

pub mod construct;
pub mod error;
pub mod geodesic;
pub mod model;
pub mod tangent;
pub mod variation;

pub use error::{Error, Result};
pub use model::{FactorModel, ProductSpace, ProjectiveKind, ProjectiveModel};
pub use tangent::{AdaptedFrame, AmbientVector, Factor, Split};
