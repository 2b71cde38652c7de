//! Certification of genuine quantum teleportation.
//!
//! Builds single-qubit process matrices from tomography data, computes the
//! classical-teleportation bound and the quantum composition / robustness
//! measures by semidefinite programming, and evaluates steerable weight and
//! negativity of the shared resource state.

pub mod classical;
pub mod error;
pub mod io;
pub mod linalg;
pub mod process;
pub mod quantum;
pub mod report;
pub mod sdp;
pub mod steering;
pub mod tomography;

pub use error::{Error, Result};
