//! Degradedness coefficients between discrete memoryless channels and the
//! capacity results they unlock for cooperative broadcast, primitive relay
//! and broadcast diamond channels.
//!
//! The strong less-noisy coefficient `eta_ln` is computed from the curvature
//! of mutual information over the input simplex: `eta * I(X;Y1) - I(X;Y2)`
//! is concave exactly when `eta` dominates the generalized Rayleigh quotient
//! of the two Hessians on the tangent space, so no auxiliary search is needed.

mod aux;
pub mod channel;
pub mod error;
pub mod degradedness;
pub mod infotheory;
mod lp;
mod optim;
pub mod nonlinear;
pub mod regions;
pub mod reproduce;
pub mod verify;

pub use channel::{AuxiliaryJoint, Channel, Distribution, StandardKind};
pub use error::{Error, Result};
