//! Neural adaptive outer-loop control for flexible-joint robots.
//!
//! The crate is split into four layers:
//!
//! - [`dynamics`]: planar serial-chain flexible-joint models (reduced and
//!   two-mass), friction, RK4 stepping and an analytic pendulum regressor.
//! - [`network`]: a dense regressor network `Y(·)` with a separate linear
//!   output layer `â`, manual reverse-mode gradients and Adam.
//! - [`control`]: sliding variables, the PD baseline, the adaptive motor
//!   position law with its output-layer adaptation, and Lyapunov diagnostics.
//! - [`scenario`]: excitation signals, dataset collection, event-driven
//!   closed-loop runs with slow online retraining, metrics and CSV export.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod network;
pub mod scenario;

pub use error::{Error, Result};
