//! Spectral Galerkin laboratory for the damped extensible beam
//!
//! ```text
//! u_tt + κAu + A₁u + f(u) + k(‖A^α u‖² + ‖u_t‖²) u_t = λh   on (0, L), hinged ends
//! ```

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod functionals;
pub mod inequalities;
pub mod integrator;
pub mod laws;
pub mod spectral;
pub mod stationary;

pub use error::{Error, Result};
pub use spectral::{GridField, ModalState, Operator, SpectralModel};
