//! Open-loop data collection and the online retraining buffer.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::spline::spline_derivative;
use crate::dynamics::{step_rk4, RobotModel, RobotState, StepMode, DEFAULT_DT};
use crate::error::{check_len, Error, Result};
use crate::network::TrainBatch;

/// Link position where `k_p·θ_m = G(θ) + k_p·θ` (Newton iteration).
pub fn static_equilibrium(model: &RobotModel, theta_m: &DVector<f64>) -> Result<DVector<f64>> {
    let n = model.n_joints();
    check_len("theta_m", n, theta_m.len())?;
    let k = model.joint_stiffness;
    let mut theta = theta_m.clone();
    for _ in 0..50 {
        let resid = model.gravity_torque(&theta)? + (&theta - theta_m) * k;
        if resid.amax() < 1e-13 {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::identity(n, n) * k;
        for c in 0..n {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[c] += h;
            tm[c] -= h;
            let dg = (model.gravity_torque(&tp)? - model.gravity_torque(&tm)?) / (2.0 * h);
            let mut col = jac.column_mut(c);
            col += &dg;
        }
        let step = jac
            .lu()
            .solve(&resid)
            .ok_or(Error::Singular("equilibrium Jacobian"))?;
        theta -= step;
    }
    Ok(theta)
}

/// Assembles `(θ̇, θ, θ̇, θ̈)` inputs and `θ_m` targets from recorded samples,
/// with `θ̈` from spline differentiation of `θ̇` at spacing `dt`.
pub fn assemble_batch(
    theta: &DMatrix<f64>,
    theta_dot: &DMatrix<f64>,
    theta_m: &DMatrix<f64>,
    dt: f64,
) -> Result<TrainBatch> {
    let (len, n) = theta.shape();
    check_len("theta_dot rows", len, theta_dot.nrows())?;
    check_len("theta_m rows", len, theta_m.nrows())?;
    let mut inputs = DMatrix::zeros(len, 4 * n);
    for j in 0..n {
        let vel: Vec<f64> = theta_dot.column(j).iter().copied().collect();
        let acc = spline_derivative(&vel, dt)?;
        for r in 0..len {
            inputs[(r, j)] = vel[r];
            inputs[(r, n + j)] = theta[(r, j)];
            inputs[(r, 2 * n + j)] = vel[r];
            inputs[(r, 3 * n + j)] = acc[r];
        }
    }
    TrainBatch::new(inputs, theta_m.clone())
}

/// Drives the reduced model with each excitation (`n × len` motor positions
/// held for `1/rate` s each) starting from the static equilibrium of the first
/// command, and records link position and velocity at the command instants.
pub fn collect_dataset(
    model: &RobotModel,
    excitations: &[DMatrix<f64>],
    rate: f64,
) -> Result<TrainBatch> {
    collect_dataset_with_dt(model, excitations, rate, DEFAULT_DT)
}

pub fn collect_dataset_with_dt(
    model: &RobotModel,
    excitations: &[DMatrix<f64>],
    rate: f64,
    sim_dt: f64,
) -> Result<TrainBatch> {
    model.validate()?;
    if excitations.is_empty() {
        return Err(Error::Empty("excitation list"));
    }
    if !(rate > 0.0) {
        return Err(Error::Config("sample rate must be > 0".into()));
    }
    let period = 1.0 / rate;
    let substeps = substeps_for(period, sim_dt)?;
    let h = period / substeps as f64;
    let n = model.n_joints();
    let mut parts = Vec::with_capacity(excitations.len());
    for (index, exc) in excitations.iter().enumerate() {
        let wrap = |source: Error| Error::Trajectory {
            index,
            source: Box::new(source),
        };
        check_len("excitation rows", n, exc.nrows()).map_err(wrap)?;
        let len = exc.ncols();
        let first = exc.column(0).into_owned();
        let theta0 = static_equilibrium(model, &first).map_err(wrap)?;
        let mut state = RobotState::new(theta0, DVector::zeros(n));
        let mut theta = DMatrix::zeros(len, n);
        let mut theta_dot = DMatrix::zeros(len, n);
        let mut theta_m = DMatrix::zeros(len, n);
        for i in 0..len {
            let cmd = exc.column(i).into_owned();
            theta.row_mut(i).copy_from(&state.theta.transpose());
            theta_dot.row_mut(i).copy_from(&state.theta_dot.transpose());
            theta_m.row_mut(i).copy_from(&cmd.transpose());
            for _ in 0..substeps {
                state = step_rk4(model, &state, &cmd, h, StepMode::Reduced).map_err(wrap)?;
            }
        }
        parts.push(assemble_batch(&theta, &theta_dot, &theta_m, period).map_err(wrap)?);
    }
    TrainBatch::concat(&parts)
}

pub(crate) fn substeps_for(period: f64, sim_dt: f64) -> Result<usize> {
    if !(sim_dt > 0.0 && period > 0.0) {
        return Err(Error::Config("time steps must be > 0".into()));
    }
    Ok(((period / sim_dt).round() as usize).max(1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BufferSample {
    pub time: f64,
    pub theta: DVector<f64>,
    pub theta_dot: DVector<f64>,
    pub theta_m: DVector<f64>,
}

/// Fixed-capacity ring of closed-loop samples; the oldest sample is dropped
/// when full.
#[derive(Clone, Debug)]
pub struct DataBuffer {
    samples: VecDeque<BufferSample>,
    capacity: usize,
}

impl DataBuffer {
    pub fn new(capacity: usize) -> Self {
        DataBuffer {
            samples: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn push(&mut self, sample: BufferSample) -> Result<()> {
        if let Some(last) = self.samples.back() {
            if !(sample.time > last.time) {
                return Err(Error::Config(format!(
                    "buffer samples must be time-ordered ({} after {})",
                    sample.time, last.time
                )));
            }
        }
        if self.capacity == 0 {
            return Ok(());
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(sample);
        Ok(())
    }

    pub fn samples(&self) -> impl Iterator<Item = &BufferSample> {
        self.samples.iter()
    }

    /// Training batch of the buffered samples (spacing `dt`).
    pub fn to_batch(&self, dt: f64) -> Result<TrainBatch> {
        let first = self.samples.front().ok_or(Error::Empty("data buffer"))?;
        let n = first.theta.len();
        let len = self.samples.len();
        let mut theta = DMatrix::zeros(len, n);
        let mut theta_dot = DMatrix::zeros(len, n);
        let mut theta_m = DMatrix::zeros(len, n);
        for (r, s) in self.samples.iter().enumerate() {
            theta.row_mut(r).copy_from(&s.theta.transpose());
            theta_dot.row_mut(r).copy_from(&s.theta_dot.transpose());
            theta_m.row_mut(r).copy_from(&s.theta_m.transpose());
        }
        assemble_batch(&theta, &theta_dot, &theta_m, dt)
    }
}
