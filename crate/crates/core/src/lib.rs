//! Riemann–Hilbert problems on Hurwitz spaces: branched coverings, canonical
//! bidifferentials, contour-integral solutions of the irregular linear system,
//! exact Stokes/connection/monodromy data, Schlesinger transforms and tau-function
//! gradient identities.

pub mod cli;
pub mod contours;
pub mod covering;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod monodromy;
pub mod poly;
pub mod quad;
pub mod rh_solver;
pub mod transforms_tau;

pub use covering::{Covering, CoveringKind, LineConfig, SurfacePoint};
pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
