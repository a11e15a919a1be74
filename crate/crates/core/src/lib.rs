//! Surfaces in the homogeneous 3-manifolds E(kappa, tau).
//!
//! The crate extracts the fundamental data `(g, S, T, nu)` of a surface
//! patch (induced metric, shape operator, tangential part and normal
//! component of the vertical Killing field), checks the compatibility
//! equations that data must satisfy, maps it through the sister and twin
//! correspondences, and integrates the moving-frame equations to rebuild
//! an immersion from compatible data.

pub mod ambient;
pub mod cli;
pub mod compatibility;
pub mod correspondence;
pub mod error;
pub mod fd;
pub mod immersion;
pub mod io;
pub mod par;
pub mod reconstruction;

pub use ambient::{AmbientPoint, AmbientVector, Basis, Christoffels, FrameMatrix, ModelSpace};
pub use error::{Error, Result};
pub use par::Execution;
