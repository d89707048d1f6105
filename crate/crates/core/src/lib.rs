//! Principal curvature lines of deformed Clifford tori in S³ and their
//! stereographic images in R³.
//!
//! The pipeline runs from chart jets ([`geometry`]) through fundamental forms
//! ([`forms`]) to the principal-line quadratic ([`field`]), whose branches are
//! integrated with lift bookkeeping in [`flow`]. [`perturb`] checks the ε-expansion
//! of the return map and [`projection`] carries everything to R³.

pub mod error;
pub mod field;
pub mod flow;
pub mod forms;
pub mod geometry;
pub mod jet;
pub mod ode;
pub mod perturb;
pub mod projection;

pub use error::{Error, Result};
pub use field::{Branch, FieldCoefficients, ProjectiveDirection};
pub use geometry::{BuiltinBump, BumpFunction, Deformation, Epsilon, Sin2Bump, SurfaceJet, TorusPoint, ZeroBump};
