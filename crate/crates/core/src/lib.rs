//! Numerical laboratory for closed convex hypersurfaces moving with normal
//! speed `f(H) = H (ln(H + H₀))^α`.
//!
//! The evolving state is the generating profile of a convex surface of
//! revolution in R³ ([`geometry::AxiSurface`]). Around the flow driver sit
//! exact scalar references ([`oracle`]), residual checks of the evolution
//! equations ([`identities`]), pinching constants and certificates
//! ([`pinching`]), blowup-rate analysis and rescaling ([`singularity`]) and a
//! graph-patch solver used for cross-validation ([`graphflow`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity, clippy::result_large_err)]

pub mod cli;
pub mod config;
pub mod curve;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod graphflow;
pub mod identities;
pub mod io;
pub mod jet;
pub mod oracle;
pub mod pinching;
pub mod quad;
pub mod singularity;
pub mod speed;

pub use error::{Error, Result};
pub use geometry::{AxiSurface, CurvatureField, SphereState};
pub use speed::SpeedParams;
