//! Sparse recovery in overcomplete composite-frame dictionaries.
//!
//! The unknown `x = W α` is represented in a dictionary `W = [W1, ..., WK]`
//! made of sub-frames (increments, cosine, identity, learned atoms). The
//! coefficients follow a conditionally Gaussian prior `α_j | θ_j ~ N(0, θ_j)`
//! whose variances carry a generalized gamma hyperprior. The MAP estimate is
//! computed with the iterative alternating sequential (IAS) scheme: a
//! Krylov least-squares update of `α` with early stopping, followed by a
//! componentwise update of `θ`. Hybrid drivers start from a convex model and
//! hand off to a more aggressively sparsity-promoting one.
//!
//! Modules:
//! - [`linops`]: matrix-free operators and dictionaries.
//! - [`hyperprior`]: generalized gamma parameters, the `θ` update, penalties.
//! - [`solver`]: CGLS, the IAS loop and the hybrid drivers.
//! - [`experiments`]: generative models, metrics and classification.

pub mod error;
pub mod experiments;
pub mod hyperprior;
pub mod linops;
pub mod solver;
pub mod vector;

pub use error::{Error, Result};
