//! Flexible-joint robot dynamics.

mod friction;
mod integrate;
mod model;
mod regressor;
mod state;

pub use friction::{friction_torque, sgn, FrictionModel};
pub use integrate::{
    full_accel, full_energy, link_accel_reduced, step_rk4, step_rk4_motor_loop, MotorLoop,
    StepMode, DEFAULT_DT,
};
pub use model::{
    coriolis_matrix, gravity_torque, mass_matrix, RobotModel, DEFAULT_JOINT_STIFFNESS,
};
pub use regressor::{analytic_regressor, pendulum_parameters};
pub use state::RobotState;
