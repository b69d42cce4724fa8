use nalgebra::{DMatrix, DVector};

use super::friction::sgn;
use super::model::RobotModel;
use crate::error::{check_len, Error, Result};

/// Exact linear-in-parameter form of the pendulum dynamics.
///
/// Returns `Y = [θ̈, sin θ, θ, θ̇₁, sgn θ̇₁]` (1 × 5) and
/// `a = k_p⁻¹·[M, m·g·r, k_p, b, c]`, so that
/// `Y·a = k_p⁻¹(M θ̈ + C(θ, θ̇₂) θ̇₁ + G + k_p θ + b θ̇₁ + c sgn θ̇₁)`.
/// The pendulum has `C ≡ 0`, which is why `θ̇₂` does not appear. Only the
/// viscous and Coulomb parts of the friction model are represented.
pub fn analytic_regressor(
    model: &RobotModel,
    theta_dot_1: &DVector<f64>,
    theta: &DVector<f64>,
    theta_dot_2: &DVector<f64>,
    theta_ddot: &DVector<f64>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if model.n_joints() != 1 {
        return Err(Error::Unsupported(
            "analytic regressor is only available for the single pendulum",
        ));
    }
    for (what, v) in [
        ("theta_dot_1", theta_dot_1),
        ("theta", theta),
        ("theta_dot_2", theta_dot_2),
        ("theta_ddot", theta_ddot),
    ] {
        check_len(what, 1, v.len())?;
    }
    let y = DMatrix::from_row_slice(
        1,
        5,
        &[
            theta_ddot[0],
            theta[0].sin(),
            theta[0],
            theta_dot_1[0],
            sgn(theta_dot_1[0]),
        ],
    );
    Ok((y, pendulum_parameters(model)?))
}

/// True parameter vector `a` of [`analytic_regressor`] for `model`.
pub fn pendulum_parameters(model: &RobotModel) -> Result<DVector<f64>> {
    if model.n_joints() != 1 {
        return Err(Error::Unsupported(
            "analytic regressor is only available for the single pendulum",
        ));
    }
    let k = model.joint_stiffness;
    let inertia = model.mass_matrix_unchecked(&DVector::zeros(1))[(0, 0)];
    // G(π/2) = Σ m·g·r
    let mgl = model.gravity_unchecked(&DVector::from_element(1, std::f64::consts::FRAC_PI_2))[0];
    let fr = model.friction[0];
    Ok(DVector::from_vec(vec![
        inertia / k,
        mgl / k,
        1.0,
        fr.viscous() / k,
        fr.coulomb() / k,
    ]))
}
