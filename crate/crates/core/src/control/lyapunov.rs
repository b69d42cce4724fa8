use nalgebra::DVector;

use super::gains::Gains;
use super::reference::ReferenceState;
use crate::dynamics::RobotModel;
use crate::error::{check_len, Error, Result};
use crate::network::OutputLayer;

/// `V = ½ sᵀ M(θ) s + ½ k_p ãᵀ P⁻¹ ã` with `ã = â − a`.
pub fn lyapunov_value(
    model: &RobotModel,
    reference: &ReferenceState,
    out: &OutputLayer,
    true_a: &DVector<f64>,
    gains: &Gains,
) -> Result<f64> {
    check_len("true parameter vector", out.len(), true_a.len())?;
    check_len("adaptation rate", out.len(), gains.adaptation_rate.nrows())?;
    let m = model.mass_matrix(&reference.theta())?;
    let s = &reference.s;
    let a_tilde = &out.a_hat - true_a;
    let chol = gains
        .adaptation_rate
        .clone()
        .cholesky()
        .ok_or(Error::Singular("adaptation rate"))?;
    let p_inv_a = chol.solve(&a_tilde);
    Ok(0.5 * s.dot(&(m * s)) + 0.5 * model.joint_stiffness * a_tilde.dot(&p_inv_a))
}
