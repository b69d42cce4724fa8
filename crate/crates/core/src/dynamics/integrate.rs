//! Accelerations of the reduced and two-mass models, and fixed-step RK4.

use nalgebra::DVector;

use super::model::RobotModel;
use super::state::RobotState;
use crate::error::{check_finite, check_len, Error, Result};

/// Default inner integration step (s).
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    /// Motor position is the input: `M θ̈ + C θ̇ + H(θ) + f(θ̇) = k_p θ_m`.
    Reduced,
    /// Motor torque is the input; motor and link are coupled through `k_p`.
    Full,
}

fn solve_spd(model: &RobotModel, theta: &DVector<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    let m = model.mass_matrix_unchecked(theta);
    let chol = m.cholesky().ok_or(Error::Singular("mass matrix"))?;
    Ok(chol.solve(&rhs))
}

/// Link torque balance excluding inertia: `k_p·θ_m − C θ̇ − G − k_p θ − f(θ̇)`.
fn link_rhs(
    model: &RobotModel,
    theta: &DVector<f64>,
    theta_dot: &DVector<f64>,
    theta_m: &DVector<f64>,
) -> DVector<f64> {
    let k = model.joint_stiffness;
    let c = model.coriolis_unchecked(theta, theta_dot);
    let g = model.gravity_unchecked(theta);
    let f = model.friction_torques(theta_dot);
    (theta_m - theta) * k - c * theta_dot - g - f
}

/// Link acceleration of the reduced model for a commanded motor position.
pub fn link_accel_reduced(
    model: &RobotModel,
    state: &RobotState,
    theta_m_cmd: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = model.n_joints();
    check_len("theta", n, state.theta.len())?;
    check_len("theta_dot", n, state.theta_dot.len())?;
    check_len("theta_m_cmd", n, theta_m_cmd.len())?;
    check_finite("theta", state.theta.as_slice())?;
    check_finite("theta_dot", state.theta_dot.as_slice())?;
    check_finite("theta_m_cmd", theta_m_cmd.as_slice())?;
    solve_spd(
        model,
        &state.theta,
        link_rhs(model, &state.theta, &state.theta_dot, theta_m_cmd),
    )
}

/// `(θ̈, θ̈_m)` of the two-mass model under motor torque `tau`.
pub fn full_accel(
    model: &RobotModel,
    state: &RobotState,
    tau: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = model.n_joints();
    state.validate(n)?;
    check_len("tau", n, tau.len())?;
    check_finite("tau", tau.as_slice())?;
    full_accel_unchecked(model, &state.theta, &state.theta_dot, &state.theta_m, tau)
}

fn full_accel_unchecked(
    model: &RobotModel,
    theta: &DVector<f64>,
    theta_dot: &DVector<f64>,
    theta_m: &DVector<f64>,
    tau: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let link = solve_spd(model, theta, link_rhs(model, theta, theta_dot, theta_m))?;
    let k = model.joint_stiffness;
    let motor = DVector::from_iterator(
        theta.len(),
        (0..theta.len()).map(|i| (tau[i] - k * (theta_m[i] - theta[i])) / model.motor_inertia[i]),
    );
    Ok((link, motor))
}

/// Motor-side PD loop used to validate the perfectly-controlled-motor
/// assumption: `τ = K (θ_cmd − θ_m) − D θ̇_m + k_p (θ_m − θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotorLoop {
    pub stiffness: f64,
    pub damping: f64,
}

impl MotorLoop {
    /// Critically damped loop of the given bandwidth for motor inertia `j_m`.
    pub fn critically_damped(bandwidth: f64, j_m: f64) -> Self {
        MotorLoop {
            stiffness: j_m * bandwidth * bandwidth,
            damping: 2.0 * j_m * bandwidth,
        }
    }

    pub fn torque(
        &self,
        model: &RobotModel,
        theta: &DVector<f64>,
        theta_m: &DVector<f64>,
        theta_m_dot: &DVector<f64>,
        cmd: &DVector<f64>,
    ) -> DVector<f64> {
        (cmd - theta_m) * self.stiffness - theta_m_dot * self.damping
            + (theta_m - theta) * model.joint_stiffness
    }
}

fn rk4<F>(x: &DVector<f64>, dt: f64, time: f64, mut f: F) -> Result<DVector<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut eval = |x: &DVector<f64>| {
        if x.iter().all(|v| v.is_finite()) {
            f(x)
        } else {
            Err(Error::Diverged { time })
        }
    };
    let k1 = eval(x)?;
    let k2 = eval(&(x + &k1 * (0.5 * dt)))?;
    let k3 = eval(&(x + &k2 * (0.5 * dt)))?;
    let k4 = eval(&(x + &k3 * dt))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

fn split2(x: &DVector<f64>, n: usize) -> (DVector<f64>, DVector<f64>) {
    (x.rows(0, n).into_owned(), x.rows(n, n).into_owned())
}

fn split4(x: &DVector<f64>, n: usize) -> [DVector<f64>; 4] {
    [0, 1, 2, 3].map(|i| x.rows(i * n, n).into_owned())
}

fn stack(parts: &[&DVector<f64>]) -> DVector<f64> {
    DVector::from_iterator(
        parts.iter().map(|p| p.len()).sum(),
        parts.iter().flat_map(|p| p.iter().copied()),
    )
}

/// One classical RK4 step with the input held constant over `dt`.
///
/// In [`StepMode::Reduced`] `input` is the commanded motor position and the
/// returned state carries it in `theta_m`; in [`StepMode::Full`] `input` is the
/// motor torque.
pub fn step_rk4(
    model: &RobotModel,
    state: &RobotState,
    input: &DVector<f64>,
    dt: f64,
    mode: StepMode,
) -> Result<RobotState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("time step must be > 0, got {dt}")));
    }
    let n = model.n_joints();
    check_len("input", n, input.len())?;
    check_len("theta", n, state.theta.len())?;
    check_len("theta_dot", n, state.theta_dot.len())?;
    let time = state.time + dt;
    let next = match mode {
        StepMode::Reduced => {
            let x = stack(&[&state.theta, &state.theta_dot]);
            let x = rk4(&x, dt, time, |x| {
                let (q, qd) = split2(x, n);
                let qdd = solve_spd(model, &q, link_rhs(model, &q, &qd, input))?;
                Ok(stack(&[&qd, &qdd]))
            })?;
            let (theta, theta_dot) = split2(&x, n);
            let theta_ddot = if x.iter().all(|v| v.is_finite()) {
                solve_spd(model, &theta, link_rhs(model, &theta, &theta_dot, input))?
            } else {
                DVector::from_element(n, f64::NAN)
            };
            RobotState {
                theta,
                theta_dot,
                theta_ddot,
                theta_m: input.clone(),
                theta_m_dot: DVector::zeros(n),
                time,
            }
        }
        StepMode::Full => {
            check_len("theta_m", n, state.theta_m.len())?;
            check_len("theta_m_dot", n, state.theta_m_dot.len())?;
            full_step(model, state, dt, |_, _, _, _| input.clone())?
        }
    };
    if !next.is_finite() {
        return Err(Error::Diverged { time });
    }
    Ok(next)
}

/// RK4 step of the two-mass model with the motor tracking `cmd` through `motor`.
pub fn step_rk4_motor_loop(
    model: &RobotModel,
    state: &RobotState,
    cmd: &DVector<f64>,
    motor: &MotorLoop,
    dt: f64,
) -> Result<RobotState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("time step must be > 0, got {dt}")));
    }
    let n = model.n_joints();
    check_len("cmd", n, cmd.len())?;
    state.validate(n)?;
    let next = full_step(model, state, dt, |q, _, qm, qmd| {
        motor.torque(model, q, qm, qmd, cmd)
    })?;
    if !next.is_finite() {
        return Err(Error::Diverged { time: next.time });
    }
    Ok(next)
}

fn full_step<T>(model: &RobotModel, state: &RobotState, dt: f64, torque: T) -> Result<RobotState>
where
    T: Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64>,
{
    let n = model.n_joints();
    let x = stack(&[
        &state.theta,
        &state.theta_dot,
        &state.theta_m,
        &state.theta_m_dot,
    ]);
    let x = rk4(&x, dt, state.time + dt, |x| {
        let [q, qd, qm, qmd] = split4(x, n);
        let tau = torque(&q, &qd, &qm, &qmd);
        let (qdd, qmdd) = full_accel_unchecked(model, &q, &qd, &qm, &tau)?;
        Ok(stack(&[&qd, &qdd, &qmd, &qmdd]))
    })?;
    let [theta, theta_dot, theta_m, theta_m_dot] = split4(&x, n);
    let theta_ddot = if x.iter().all(|v| v.is_finite()) {
        solve_spd(model, &theta, link_rhs(model, &theta, &theta_dot, &theta_m))?
    } else {
        DVector::from_element(n, f64::NAN)
    };
    Ok(RobotState {
        theta,
        theta_dot,
        theta_ddot,
        theta_m,
        theta_m_dot,
        time: state.time + dt,
    })
}

/// Total mechanical energy of the two-mass model: link kinetic + motor kinetic
/// + gravity potential + spring potential.
pub fn full_energy(model: &RobotModel, state: &RobotState) -> Result<f64> {
    let kin = model.kinetic_energy(&state.theta, &state.theta_dot)?;
    let motor: f64 = state
        .theta_m_dot
        .iter()
        .zip(&model.motor_inertia)
        .map(|(w, j)| 0.5 * j * w * w)
        .sum();
    let pot = model.potential_energy(&state.theta)?;
    let spring = 0.5 * model.joint_stiffness * (&state.theta - &state.theta_m).norm_squared();
    Ok(kin + motor + pot + spring)
}
