//! Learning planted ReLU models with projected gradient descent under
//! structured constraints.
//!
//! The library covers the full experimental loop for the realizable model
//! `y_i = max(0, <x_i, w*>)` with i.i.d. standard Gaussian features:
//!
//! - [`model`] generates planted weight vectors and datasets,
//! - [`loss`] evaluates the ReLU least-squares loss and its (generalized)
//!   gradients,
//! - [`constraint`] holds the supported constraint sets `K = {w : R(w) <= R}`
//!   and their Euclidean projections,
//! - [`solver`] runs the projected gradient iteration
//!   `w_{t+1} = P_K(w_t - mu * grad L(w_t))` from `w_0 = 0` and records a
//!   convergence trace,
//! - [`geometry`] estimates the minimal-sample quantity
//!   `n0 = omega^2(C ∩ B^d)` for descent cones, both in closed form and by
//!   Monte Carlo over polar-cone distances,
//! - [`verifier`] runs sampled-direction checks of the concentration
//!   inequalities that drive the recovery guarantee,
//! - [`harness`] orchestrates sweeps over `n/n0` grids and rate experiments.
//!
//! All randomness is drawn from counter-style ChaCha streams so that every
//! artifact is a pure function of `(seed, index)` and safely parallelizable.

pub mod constraint;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod loss;
pub mod model;
pub mod rng;
pub mod solver;
pub mod verifier;

pub use constraint::{ConstraintKind, ConstraintSet, ConstraintSpec};
pub use error::{Error, Result};
pub use geometry::{DescentConeDescriptor, WidthEstimate, WidthMethod};
pub use model::{Dataset, PlantedSpec, Structure, WeightVector};
pub use solver::{SolveConfig, SolveTrace};
pub use verifier::CheckReport;
