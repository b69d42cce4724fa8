#![allow(dead_code)]

use std::path::PathBuf;

use flexjoint::control::{AnalyticPendulum, Gains};
use flexjoint::dynamics::{pendulum_parameters, FrictionModel, RobotModel};
use flexjoint::network::OutputLayer;
use flexjoint::scenario::{
    EventKind, RegressorSource, RunLog, Scenario, SinusoidSpec, SinusoidTrajectory,
};

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

/// Pendulum tracking 0.2 rad at 0.5 Hz with the exact regressor, starting
/// 0.05 rad off the trajectory. `a_scale` multiplies the true parameters
/// elementwise to form the initial estimate.
pub struct ExactLoop {
    pub scenario: Scenario,
    pub regressor: RegressorSource,
    pub out: OutputLayer,
}

pub fn exact_pendulum(duration: f64, a_scale: &[f64], adapt: bool) -> ExactLoop {
    let model =
        RobotModel::pendulum(1.0, 1.0).with_friction(FrictionModel::viscous_coulomb(0.1, 0.05));
    let a = pendulum_parameters(&model).unwrap();
    let a_hat = a.zip_map(&nalgebra::DVector::from_column_slice(a_scale), |x, s| x * s);
    let gains = Gains::uniform(1, 5, 15.0, 2.0, 0.001, 0.05);
    let traj = SinusoidTrajectory::new(vec![SinusoidSpec::new(0.2, 0.5, 0.0, 0.0)]);
    let mut scenario = Scenario::new(model.clone(), gains, traj, duration);
    scenario.initial_error = nalgebra::DVector::from_element(1, 0.05);
    if adapt {
        scenario = scenario.with_event(0.0, EventKind::EnableAdaptation);
    }
    ExactLoop {
        scenario,
        regressor: RegressorSource::Analytic(AnalyticPendulum { model }),
        out: OutputLayer::new(a_hat),
    }
}

pub const TRUE_A: [f64; 5] = [1.0; 5];
pub const PERTURBED_A: [f64; 5] = [1.5, 0.5, 1.5, 0.5, 1.5];

/// Largest one-tick increase of the logged Lyapunov value.
pub fn max_lyapunov_increase(log: &RunLog) -> f64 {
    log.rows
        .windows(2)
        .map(|w| w[1].lyapunov.unwrap() - w[0].lyapunov.unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest |e| over all joints for rows with `start <= t < end`.
pub fn max_abs_error(log: &RunLog, start: f64, end: f64) -> f64 {
    log.rows
        .iter()
        .filter(|r| r.time >= start - 1e-9 && r.time < end - 1e-9)
        .flat_map(|r| r.e.iter().map(|v| v.abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

pub fn mean_abs_error(log: &RunLog, start: f64, end: f64) -> f64 {
    let vals: Vec<f64> = log
        .rows
        .iter()
        .filter(|r| r.time >= start - 1e-9 && r.time < end - 1e-9)
        .flat_map(|r| r.e.iter().map(|v| v.abs()).collect::<Vec<_>>())
        .collect();
    vals.iter().sum::<f64>() / vals.len() as f64
}
