//! Event-driven closed-loop runs.
//!
//! Each control tick computes the reference signals, the motor command and
//! (when enabled) one adaptation step of `â`, logs the tick, then holds the
//! command while the plant is integrated to the next tick. Retraining of the
//! regressor happens strictly between ticks on a snapshot of the data buffer;
//! the new weights are swapped in before the next tick reads them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::{substeps_for, BufferSample, DataBuffer};
use super::excitation::SinusoidTrajectory;
use crate::control::{
    adapt_output_layer, adaptive_control, lyapunov_value, pd_control, reference_signals,
    AnalyticPendulum, Gains, Regressor,
};
use crate::dynamics::{
    pendulum_parameters, step_rk4, FrictionModel, RobotModel, RobotState, StepMode, DEFAULT_DT,
};
use crate::error::{check_len, Error, Result};
use crate::network::{retrain_online, OutputLayer, RegressorNet, RetrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// Replace the friction model of every joint.
    SwitchFriction {
        friction: FrictionModel,
    },
    /// Attach a point mass at the distal tip.
    AttachPayload {
        mass: f64,
    },
    EnableAdaptation,
    /// Start recording closed-loop samples for retraining.
    BeginBuffering,
    /// Retrain now and then every `retrain_period` seconds.
    RetrainNow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedEvent {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl TimedEvent {
    pub fn new(time: f64, kind: EventKind) -> Self {
        TimedEvent { time, kind }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Pd,
    Adaptive,
    AdaptiveWithRetrain,
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pd" => Ok(ControllerKind::Pd),
            "adaptive" => Ok(ControllerKind::Adaptive),
            "adaptive_with_retrain" | "adaptive-with-retrain" => {
                Ok(ControllerKind::AdaptiveWithRetrain)
            }
            other => Err(Error::Config(format!("unknown controller `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub model: RobotModel,
    pub gains: Gains,
    pub trajectory: SinusoidTrajectory,
    pub events: Vec<TimedEvent>,
    pub duration: f64,
    pub control_rate: f64,
    pub sim_dt: f64,
    pub retrain_period: f64,
    pub retrain_passes: usize,
    pub retrain: RetrainConfig,
    /// `θ(0) − θ_d(0)`.
    pub initial_error: DVector<f64>,
    pub seed: u64,
}

impl Scenario {
    pub fn new(
        model: RobotModel,
        gains: Gains,
        trajectory: SinusoidTrajectory,
        duration: f64,
    ) -> Self {
        let n = model.n_joints();
        Scenario {
            model,
            gains,
            trajectory,
            events: Vec::new(),
            duration,
            control_rate: 100.0,
            sim_dt: DEFAULT_DT,
            retrain_period: 6.0,
            retrain_passes: 50,
            retrain: RetrainConfig::default(),
            initial_error: DVector::zeros(n),
            seed: 0,
        }
    }

    pub fn with_event(mut self, time: f64, kind: EventKind) -> Self {
        self.events.push(TimedEvent::new(time, kind));
        self
    }

    pub fn control_period(&self) -> f64 {
        1.0 / self.control_rate
    }

    pub fn n_ticks(&self) -> usize {
        (self.duration * self.control_rate).round() as usize
    }

    pub fn tick_of(&self, time: f64) -> usize {
        (time * self.control_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let n = self.model.n_joints();
        check_len("trajectory joints", n, self.trajectory.n_joints())?;
        check_len("initial error", n, self.initial_error.len())?;
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Config("duration must be > 0".into()));
        }
        if !(self.control_rate.is_finite() && self.control_rate > 0.0) {
            return Err(Error::Config("control rate must be > 0".into()));
        }
        substeps_for(self.control_period(), self.sim_dt)?;
        if !(self.retrain_period > 0.0) || self.control_rate * self.retrain_period < 100.0 - 1e-9 {
            return Err(Error::Config(format!(
                "retraining every {} s at {} Hz breaks the 100:1 time-scale separation",
                self.retrain_period, self.control_rate
            )));
        }
        let mut last = f64::NEG_INFINITY;
        for ev in &self.events {
            if !(ev.time >= 0.0 && ev.time <= self.duration) {
                return Err(Error::Config(format!(
                    "event at t = {} s outside [0, {}]",
                    ev.time, self.duration
                )));
            }
            if ev.time < last {
                return Err(Error::Config(format!(
                    "events out of order at t = {} s",
                    ev.time
                )));
            }
            last = ev.time;
            match &ev.kind {
                EventKind::SwitchFriction { friction } => friction.validate()?,
                EventKind::AttachPayload { mass } if !(mass.is_finite() && *mass >= 0.0) => {
                    return Err(Error::Config(format!("payload mass {mass} must be >= 0")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Regressor used by a run.
#[derive(Clone, Debug)]
pub enum RegressorSource {
    Network(RegressorNet),
    /// Exact pendulum regressor; enables the Lyapunov trace in the log.
    Analytic(AnalyticPendulum),
}

impl Regressor for RegressorSource {
    fn n_joints(&self) -> usize {
        match self {
            RegressorSource::Network(n) => Regressor::n_joints(n),
            RegressorSource::Analytic(a) => a.n_joints(),
        }
    }

    fn basis_dim(&self) -> usize {
        match self {
            RegressorSource::Network(n) => Regressor::basis_dim(n),
            RegressorSource::Analytic(a) => a.basis_dim(),
        }
    }

    fn regressor(
        &self,
        theta_dot_1: &DVector<f64>,
        theta: &DVector<f64>,
        theta_dot_2: &DVector<f64>,
        theta_ddot: &DVector<f64>,
    ) -> Result<DMatrix<f64>> {
        match self {
            RegressorSource::Network(n) => n.regressor(theta_dot_1, theta, theta_dot_2, theta_ddot),
            RegressorSource::Analytic(a) => {
                a.regressor(theta_dot_1, theta, theta_dot_2, theta_ddot)
            }
        }
    }
}

/// One logged control tick.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRow {
    pub time: f64,
    pub theta: DVector<f64>,
    pub theta_d: DVector<f64>,
    pub e: DVector<f64>,
    pub s: DVector<f64>,
    pub theta_m: DVector<f64>,
    pub norm_a_hat: f64,
    /// Lyapunov value with the true parameters, when an oracle exists.
    pub lyapunov: Option<f64>,
    /// Number of regressor swaps before this tick.
    pub regressor_version: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub n_joints: usize,
    pub rows: Vec<LogRow>,
}

impl RunLog {
    pub fn new(n_joints: usize) -> Self {
        RunLog {
            n_joints,
            rows: Vec::new(),
        }
    }

    pub fn has_lyapunov(&self) -> bool {
        self.rows.first().is_some_and(|r| r.lyapunov.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RetrainRecord {
    pub time: f64,
    pub samples: usize,
    pub buffer_mse_before: f64,
    pub buffer_mse_after: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub log: RunLog,
    pub retrains: Vec<RetrainRecord>,
    pub final_output: OutputLayer,
    pub final_regressor: RegressorSource,
}

/// Runs `scenario` with the trained network `net` and output layer `out`.
pub fn run_scenario(
    scenario: &Scenario,
    controller: ControllerKind,
    net: &RegressorNet,
    out: &OutputLayer,
) -> Result<RunOutput> {
    run_with_regressor(
        scenario,
        controller,
        RegressorSource::Network(net.clone()),
        out,
    )
}

/// Runs `scenario` with any regressor source.
pub fn run_with_regressor(
    scenario: &Scenario,
    controller: ControllerKind,
    regressor: RegressorSource,
    out: &OutputLayer,
) -> Result<RunOutput> {
    scenario.validate()?;
    let n = scenario.model.n_joints();
    if controller != ControllerKind::Pd {
        check_len("regressor joints", n, regressor.n_joints())?;
        check_len("output layer", regressor.basis_dim(), out.len())?;
        scenario.gains.validate(n, regressor.basis_dim())?;
    }
    if controller == ControllerKind::AdaptiveWithRetrain
        && !matches!(regressor, RegressorSource::Network(_))
    {
        return Err(Error::Config("retraining needs a network regressor".into()));
    }
    let oracle = matches!(regressor, RegressorSource::Analytic(_)) && n == 1;

    let dt_c = scenario.control_period();
    let substeps = substeps_for(dt_c, scenario.sim_dt)?;
    let h = dt_c / substeps as f64;
    let n_ticks = scenario.n_ticks();
    let period_ticks = ((scenario.retrain_period * scenario.control_rate).round() as usize).max(1);

    let mut events: Vec<(usize, &EventKind)> = scenario
        .events
        .iter()
        .map(|e| (scenario.tick_of(e.time), &e.kind))
        .collect();
    events.reverse();

    let mut plant = scenario.model.clone();
    let mut regressor = regressor;
    let mut out = out.clone();
    let mut version = 0u64;
    let mut adapting = false;
    let mut buffering = false;
    let mut buffer = DataBuffer::new(period_ticks);
    let mut next_retrain: Option<usize> = None;
    let mut retrains = Vec::new();

    let d0 = scenario.trajectory.sample(0.0);
    let mut state = RobotState::new(&d0.position + &scenario.initial_error, d0.velocity.clone());
    let mut log = RunLog::new(n);
    log.rows.reserve(n_ticks);

    for tick in 0..n_ticks {
        let time = tick as f64 * dt_c;
        while events.last().is_some_and(|(t, _)| *t == tick) {
            let (_, kind) = events.pop().expect("peeked event");
            match kind {
                EventKind::SwitchFriction { friction } => {
                    plant.friction = vec![*friction; n];
                }
                EventKind::AttachPayload { mass } => plant.payload_mass = *mass,
                EventKind::EnableAdaptation => adapting = true,
                EventKind::BeginBuffering => buffering = true,
                EventKind::RetrainNow => next_retrain = Some(tick),
            }
        }

        if controller == ControllerKind::AdaptiveWithRetrain && next_retrain == Some(tick) {
            next_retrain = Some(tick + period_ticks);
            if buffer.len() >= 4 {
                let batch = buffer.to_batch(dt_c)?;
                if let RegressorSource::Network(net) = &regressor {
                    let cfg = RetrainConfig {
                        seed: scenario.seed.wrapping_add(retrains.len() as u64 + 1),
                        ..scenario.retrain.clone()
                    };
                    let before = crate::network::mse(
                        &net.predict_batch(&out, &batch.inputs)?,
                        &batch.targets,
                    )?;
                    let updated = retrain_online(net, &out, &batch, scenario.retrain_passes, &cfg)?;
                    let after = crate::network::mse(
                        &updated.predict_batch(&out, &batch.inputs)?,
                        &batch.targets,
                    )?;
                    retrains.push(RetrainRecord {
                        time,
                        samples: batch.len(),
                        buffer_mse_before: before,
                        buffer_mse_after: after,
                    });
                    regressor = RegressorSource::Network(updated);
                    version += 1;
                }
            }
        }

        let desired = scenario.trajectory.sample(time);
        let reference = reference_signals(
            &state.theta,
            &state.theta_dot,
            &desired,
            &scenario.gains.lambda,
        )?;
        let lyapunov = if oracle && controller != ControllerKind::Pd {
            let true_a = pendulum_parameters(&plant)?;
            Some(lyapunov_value(
                &plant,
                &reference,
                &out,
                &true_a,
                &scenario.gains,
            )?)
        } else {
            None
        };

        let theta_m = match controller {
            ControllerKind::Pd => pd_control(&reference, scenario.gains.k1, scenario.gains.k2),
            ControllerKind::Adaptive | ControllerKind::AdaptiveWithRetrain => {
                let cmd = adaptive_control(
                    &regressor,
                    &out,
                    &reference,
                    &state.theta,
                    &state.theta_dot,
                    &scenario.gains,
                )
                .map_err(|e| Error::ControllerFault {
                    time,
                    reason: e.to_string(),
                })?;
                if adapting {
                    out = adapt_output_layer(
                        &out,
                        &cmd.regressor,
                        &reference.s,
                        &scenario.gains.adaptation_rate,
                        dt_c,
                    )
                    .map_err(|e| Error::ControllerFault {
                        time,
                        reason: e.to_string(),
                    })?;
                }
                cmd.theta_m
            }
        };

        log.rows.push(LogRow {
            time,
            theta: state.theta.clone(),
            theta_d: desired.position.clone(),
            e: reference.e.clone(),
            s: reference.s.clone(),
            theta_m: theta_m.clone(),
            norm_a_hat: out.a_hat.norm(),
            lyapunov,
            regressor_version: version,
        });

        if buffering && controller == ControllerKind::AdaptiveWithRetrain {
            buffer.push(BufferSample {
                time,
                theta: state.theta.clone(),
                theta_dot: state.theta_dot.clone(),
                theta_m: theta_m.clone(),
            })?;
        }

        for _ in 0..substeps {
            state =
                step_rk4(&plant, &state, &theta_m, h, StepMode::Reduced).map_err(|e| match e {
                    Error::Diverged { .. } => Error::Diverged { time },
                    other => other,
                })?;
        }
        state.time = (tick + 1) as f64 * dt_c;
    }

    Ok(RunOutput {
        log,
        retrains,
        final_output: out,
        final_regressor: regressor,
    })
}
