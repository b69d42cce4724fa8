use nalgebra::DVector;

use crate::error::{check_len, Result};

/// Desired position, velocity and acceleration at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct DesiredSample {
    pub position: DVector<f64>,
    pub velocity: DVector<f64>,
    pub acceleration: DVector<f64>,
}

/// Tracking errors, reference signals and the sliding vector.
///
/// `s = ė + Λe`, `θ̇_r = θ̇_d − Λe`, `θ̈_r = θ̈_d − Λė`, hence `s = θ̇ − θ̇_r`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceState {
    pub theta_d: DVector<f64>,
    pub theta_d_dot: DVector<f64>,
    pub theta_d_ddot: DVector<f64>,
    pub theta_r_dot: DVector<f64>,
    pub theta_r_ddot: DVector<f64>,
    pub e: DVector<f64>,
    pub e_dot: DVector<f64>,
    pub s: DVector<f64>,
}

impl ReferenceState {
    /// Measured link position `θ_d + e`.
    pub fn theta(&self) -> DVector<f64> {
        &self.theta_d + &self.e
    }
}

pub fn reference_signals(
    theta: &DVector<f64>,
    theta_dot: &DVector<f64>,
    desired: &DesiredSample,
    lambda: &DVector<f64>,
) -> Result<ReferenceState> {
    let n = theta.len();
    check_len("theta_dot", n, theta_dot.len())?;
    check_len("theta_d", n, desired.position.len())?;
    check_len("theta_d_dot", n, desired.velocity.len())?;
    check_len("theta_d_ddot", n, desired.acceleration.len())?;
    check_len("lambda", n, lambda.len())?;
    let e = theta - &desired.position;
    let e_dot = theta_dot - &desired.velocity;
    let s = &e_dot + lambda.component_mul(&e);
    let theta_r_dot = &desired.velocity - lambda.component_mul(&e);
    let theta_r_ddot = &desired.acceleration - lambda.component_mul(&e_dot);
    Ok(ReferenceState {
        theta_d: desired.position.clone(),
        theta_d_dot: desired.velocity.clone(),
        theta_d_ddot: desired.acceleration.clone(),
        theta_r_dot,
        theta_r_ddot,
        e,
        e_dot,
        s,
    })
}
