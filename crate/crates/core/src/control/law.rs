//! PD baseline, the adaptive motor-position law and output-layer adaptation.

use nalgebra::{DMatrix, DVector};

use super::gains::Gains;
use super::reference::ReferenceState;
use crate::dynamics::{analytic_regressor, RobotModel};
use crate::error::{check_finite, check_len, Error, Result};
use crate::network::{OutputLayer, RegressorNet};

/// Anything that yields an `n × N` regressor `Y(θ̇₁, θ, θ̇₂, θ̈)`.
pub trait Regressor {
    fn n_joints(&self) -> usize;
    fn basis_dim(&self) -> usize;
    fn regressor(
        &self,
        theta_dot_1: &DVector<f64>,
        theta: &DVector<f64>,
        theta_dot_2: &DVector<f64>,
        theta_ddot: &DVector<f64>,
    ) -> Result<DMatrix<f64>>;
}

/// Concatenates the four regressor arguments into one network input.
pub fn regressor_input(
    theta_dot_1: &DVector<f64>,
    theta: &DVector<f64>,
    theta_dot_2: &DVector<f64>,
    theta_ddot: &DVector<f64>,
) -> DVector<f64> {
    DVector::from_iterator(
        4 * theta.len(),
        theta_dot_1
            .iter()
            .chain(theta.iter())
            .chain(theta_dot_2.iter())
            .chain(theta_ddot.iter())
            .copied(),
    )
}

impl Regressor for RegressorNet {
    fn n_joints(&self) -> usize {
        RegressorNet::n_joints(self)
    }

    fn basis_dim(&self) -> usize {
        RegressorNet::basis_dim(self)
    }

    fn regressor(
        &self,
        theta_dot_1: &DVector<f64>,
        theta: &DVector<f64>,
        theta_dot_2: &DVector<f64>,
        theta_ddot: &DVector<f64>,
    ) -> Result<DMatrix<f64>> {
        self.forward_regressor(&regressor_input(
            theta_dot_1,
            theta,
            theta_dot_2,
            theta_ddot,
        ))
    }
}

/// Exact pendulum regressor, used as an oracle stand-in for the network.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticPendulum {
    pub model: RobotModel,
}

impl Regressor for AnalyticPendulum {
    fn n_joints(&self) -> usize {
        1
    }

    fn basis_dim(&self) -> usize {
        5
    }

    fn regressor(
        &self,
        theta_dot_1: &DVector<f64>,
        theta: &DVector<f64>,
        theta_dot_2: &DVector<f64>,
        theta_ddot: &DVector<f64>,
    ) -> Result<DMatrix<f64>> {
        analytic_regressor(&self.model, theta_dot_1, theta, theta_dot_2, theta_ddot).map(|(y, _)| y)
    }
}

/// `θ_m = θ_d − K1·e − K2·ė`.
pub fn pd_control(reference: &ReferenceState, k1: f64, k2: f64) -> DVector<f64> {
    &reference.theta_d - &reference.e * k1 - &reference.e_dot * k2
}

/// Elementwise `tanh(s/φ)`.
pub fn sgn_smoothed(s: &DVector<f64>, phi: f64) -> DVector<f64> {
    s.map(|v| (v / phi).tanh())
}

/// Motor command together with the regressor it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlCommand {
    pub theta_m: DVector<f64>,
    pub regressor: DMatrix<f64>,
}

/// `θ_m = Y(θ̇_r, θ, θ̇, θ̈_r)·â − K_s·s − k·tanh(s/φ)`.
pub fn adaptive_control<R: Regressor + ?Sized>(
    regressor: &R,
    out: &OutputLayer,
    reference: &ReferenceState,
    theta: &DVector<f64>,
    theta_dot: &DVector<f64>,
    gains: &Gains,
) -> Result<ControlCommand> {
    let n = regressor.n_joints();
    check_len("theta", n, theta.len())?;
    check_len("theta_dot", n, theta_dot.len())?;
    check_len("output layer", regressor.basis_dim(), out.len())?;
    check_len("k_s", n, gains.k_s.len())?;
    let y = regressor.regressor(
        &reference.theta_r_dot,
        theta,
        theta_dot,
        &reference.theta_r_ddot,
    )?;
    let feedforward = &y * &out.a_hat;
    let robust = sgn_smoothed(&reference.s, gains.boundary_layer) * gains.k_robust;
    let theta_m = feedforward - gains.k_s.component_mul(&reference.s) - robust;
    if theta_m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("adaptive control command"));
    }
    Ok(ControlCommand {
        theta_m,
        regressor: y,
    })
}

/// Explicit Euler step of `dâ/dt = −P·Yᵀ·s`.
pub fn adapt_output_layer(
    out: &OutputLayer,
    regressor: &DMatrix<f64>,
    s: &DVector<f64>,
    adaptation_rate: &DMatrix<f64>,
    dt: f64,
) -> Result<OutputLayer> {
    check_len("regressor rows", s.len(), regressor.nrows())?;
    check_len("regressor cols", out.len(), regressor.ncols())?;
    check_len("adaptation rate", out.len(), adaptation_rate.nrows())?;
    let a_hat = &out.a_hat - adaptation_rate * (regressor.transpose() * s) * dt;
    check_finite("adapted output layer", a_hat.as_slice())?;
    Ok(OutputLayer { a_hat })
}
