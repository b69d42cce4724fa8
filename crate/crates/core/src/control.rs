//! Sliding variables, control laws, adaptation and Lyapunov diagnostics.

mod gains;
mod law;
mod lyapunov;
mod reference;

pub use gains::{Gains, DEFAULT_BOUNDARY_LAYER};
pub use law::{
    adapt_output_layer, adaptive_control, pd_control, regressor_input, sgn_smoothed,
    AnalyticPendulum, ControlCommand, Regressor,
};
pub use lyapunov::lyapunov_value;
pub use reference::{reference_signals, DesiredSample, ReferenceState};
