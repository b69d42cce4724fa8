//! TOML run configuration shared by the command-line tool and the examples.
//!
//! A file has the sections `[model]`, `[gains]`, `[network]`, `[training]`,
//! `[excitation]` and `[scenario]` (with `[[scenario.events]]`). Only `[model]`
//! is required; the others fall back to defaults or are required by the
//! subcommand that needs them. The README lists every key.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{Gains, DEFAULT_BOUNDARY_LAYER};
use crate::dynamics::{FrictionModel, RobotModel, DEFAULT_DT};
use crate::error::{Error, Result};
use crate::network::{
    default_architecture, train_offline, Activation, LayerSpec, OutputLayer, RegressorNet,
    RetrainConfig, TrainBatch, TrainConfig, TrainReport, DEFAULT_L2_LAMBDA, DEFAULT_LEARNING_RATE,
};
use crate::scenario::{
    collect_dataset, gen_multisine, gen_sinusoid_family, ControllerKind, Scenario, SinusoidSpec,
    SinusoidTrajectory, TimedEvent, Window,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Overridden by `--seed` on the command line.
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    #[serde(default)]
    pub gains: Option<GainsConfig>,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub excitation: ExcitationConfig,
    #[serde(default)]
    pub scenario: Option<ScenarioConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Pendulum,
    TwoLinkArm,
}

/// A preset plus per-field overrides, or a fully explicit chain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub preset: Option<Preset>,
    pub link_masses: Option<Vec<f64>>,
    pub link_lengths: Option<Vec<f64>>,
    pub com_offsets: Option<Vec<f64>>,
    pub link_inertias: Option<Vec<f64>>,
    pub gravity: Option<f64>,
    pub joint_stiffness: Option<f64>,
    pub motor_inertia: Option<PerJoint>,
    /// One entry applies to every joint.
    pub friction: Option<Vec<FrictionModel>>,
    pub payload_mass: Option<f64>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<RobotModel> {
        let mut m = match self.preset {
            Some(Preset::Pendulum) => RobotModel::pendulum(1.0, 1.0),
            Some(Preset::TwoLinkArm) => RobotModel::two_link_arm(),
            None => {
                let need = |v: &Option<Vec<f64>>, key: &str| {
                    v.clone()
                        .ok_or_else(|| Error::Config(format!("[model] needs `preset` or `{key}`")))
                };
                let masses = need(&self.link_masses, "link_masses")?;
                let n = masses.len();
                let mut m = RobotModel::pendulum(1.0, 1.0);
                m.link_masses = masses;
                m.link_lengths = need(&self.link_lengths, "link_lengths")?;
                m.com_offsets = self
                    .com_offsets
                    .clone()
                    .unwrap_or_else(|| m.link_lengths.clone());
                m.link_inertias = vec![0.0; n];
                m.motor_inertia = vec![0.01; n];
                m.friction = vec![FrictionModel::default(); n];
                m
            }
        };
        let n = m.n_joints();
        if let Some(v) = &self.link_masses {
            m.link_masses = v.clone();
        }
        if let Some(v) = &self.link_lengths {
            m.link_lengths = v.clone();
        }
        if let Some(v) = &self.com_offsets {
            m.com_offsets = v.clone();
        }
        if let Some(v) = &self.link_inertias {
            m.link_inertias = v.clone();
        }
        if let Some(v) = self.gravity {
            m.gravity = v;
        }
        if let Some(v) = self.joint_stiffness {
            m.joint_stiffness = v;
        }
        if let Some(v) = &self.motor_inertia {
            m.motor_inertia = v.expand(n, "motor_inertia")?.as_slice().to_vec();
        }
        if let Some(v) = &self.friction {
            m.friction = match v.as_slice() {
                [one] => vec![*one; n],
                many => many.to_vec(),
            };
        }
        if let Some(v) = self.payload_mass {
            m.payload_mass = v;
        }
        m.validate()?;
        Ok(m)
    }
}

/// Scalar (every joint) or per-joint list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerJoint {
    All(f64),
    Each(Vec<f64>),
}

impl PerJoint {
    pub fn expand(&self, n: usize, key: &str) -> Result<DVector<f64>> {
        match self {
            PerJoint::All(v) => Ok(DVector::from_element(n, *v)),
            PerJoint::Each(v) if v.len() == n => Ok(DVector::from_column_slice(v)),
            PerJoint::Each(v) => Err(Error::Config(format!(
                "`{key}` has {} entries for {n} joints",
                v.len()
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    pub lambda: PerJoint,
    pub k_s: PerJoint,
    pub k_robust: f64,
    /// `P = adaptation_rate · I`.
    pub adaptation_rate: f64,
    #[serde(default = "default_k1")]
    pub k1: f64,
    #[serde(default = "default_k2")]
    pub k2: f64,
    #[serde(default = "default_phi")]
    pub boundary_layer: f64,
}

fn default_k1() -> f64 {
    0.2
}
fn default_k2() -> f64 {
    0.1
}
fn default_phi() -> f64 {
    DEFAULT_BOUNDARY_LAYER
}

impl GainsConfig {
    pub fn build(&self, n_joints: usize, basis_dim: usize) -> Result<Gains> {
        let g = Gains {
            lambda: self.lambda.expand(n_joints, "lambda")?,
            k_s: self.k_s.expand(n_joints, "k_s")?,
            k_robust: self.k_robust,
            adaptation_rate: DMatrix::identity(basis_dim, basis_dim) * self.adaptation_rate,
            k1: self.k1,
            k2: self.k2,
            boundary_layer: self.boundary_layer,
        };
        g.validate(n_joints, basis_dim)?;
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    /// Width of each hidden layer.
    pub hidden: Vec<usize>,
    pub activation: String,
    pub basis_dim: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            hidden: vec![64, 64],
            activation: "tanh".into(),
            basis_dim: 32,
        }
    }
}

impl NetworkConfig {
    pub fn layer_specs(&self, n_joints: usize) -> Result<Vec<LayerSpec>> {
        let act = Activation::from_name(&self.activation)
            .ok_or_else(|| Error::Config(format!("unknown activation `{}`", self.activation)))?;
        if self.hidden == [64, 64] && act == Activation::Tanh {
            return Ok(default_architecture(n_joints, 64, self.basis_dim));
        }
        let mut dims = vec![4 * n_joints];
        dims.extend(&self.hidden);
        let mut specs: Vec<LayerSpec> = dims
            .windows(2)
            .map(|w| LayerSpec::new(w[0], w[1], act))
            .collect();
        specs.push(LayerSpec::new(
            *dims.last().expect("input width"),
            n_joints * self.basis_dim,
            Activation::Linear,
        ));
        Ok(specs)
    }

    /// Fresh network and output layer drawn from `seed`.
    pub fn init(&self, n_joints: usize, seed: u64) -> Result<(RegressorNet, OutputLayer)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = RegressorNet::new(
            &self.layer_specs(n_joints)?,
            n_joints,
            self.basis_dim,
            &mut rng,
        )?;
        let out = OutputLayer::random(self.basis_dim, &mut rng);
        Ok((net, out))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub train_fraction: f64,
    pub learning_rate: f64,
    pub l2_lambda: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 5,
            batch_size: 256,
            train_fraction: 0.8,
            learning_rate: DEFAULT_LEARNING_RATE,
            l2_lambda: DEFAULT_L2_LAMBDA,
        }
    }
}

impl TrainingConfig {
    pub fn build(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            train_fraction: self.train_fraction,
            learning_rate: self.learning_rate,
            l2_lambda: self.l2_lambda,
            seed,
        }
    }
}

/// Motor-position excitation used to collect training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExcitationConfig {
    /// One Schroeder multisine; joint `j` sees it delayed by `j/n` of the
    /// record so the joints are not driven in lockstep.
    Multisine {
        n_harmonics: usize,
        base_freq: f64,
        amplitude: f64,
        duration: f64,
        rate: f64,
    },
    SinusoidFamily {
        count: usize,
        amplitude_range: (f64, f64),
        freq_range: (f64, f64),
        length: usize,
        rate: f64,
        limits: Vec<(f64, f64)>,
    },
}

impl Default for ExcitationConfig {
    fn default() -> Self {
        ExcitationConfig::Multisine {
            n_harmonics: 16,
            base_freq: 0.1,
            amplitude: 1.0,
            duration: 60.0,
            rate: 100.0,
        }
    }
}

impl ExcitationConfig {
    pub fn rate(&self) -> f64 {
        match self {
            ExcitationConfig::Multisine { rate, .. }
            | ExcitationConfig::SinusoidFamily { rate, .. } => *rate,
        }
    }

    /// Excitation matrices (`n_joints × samples`).
    pub fn signals(&self, n_joints: usize, seed: u64) -> Result<Vec<DMatrix<f64>>> {
        match self {
            ExcitationConfig::Multisine {
                n_harmonics,
                base_freq,
                amplitude,
                duration,
                rate,
            } => {
                let u = gen_multisine(*n_harmonics, *base_freq, *amplitude, *duration, *rate)?;
                let len = u.len();
                Ok(vec![DMatrix::from_fn(n_joints, len, |j, i| {
                    u[(i + j * len / n_joints) % len]
                })])
            }
            ExcitationConfig::SinusoidFamily {
                count,
                amplitude_range,
                freq_range,
                length,
                rate,
                limits,
            } => gen_sinusoid_family(
                *count,
                *amplitude_range,
                *freq_range,
                n_joints,
                *length,
                *rate,
                limits,
                seed,
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub duration: f64,
    #[serde(default = "default_rate")]
    pub control_rate: f64,
    #[serde(default = "default_dt")]
    pub sim_dt: f64,
    #[serde(default = "default_period")]
    pub retrain_period: f64,
    #[serde(default = "default_passes")]
    pub retrain_passes: usize,
    #[serde(default = "default_batch")]
    pub retrain_batch_size: usize,
    #[serde(default = "default_lr")]
    pub retrain_learning_rate: f64,
    #[serde(default = "default_l2")]
    pub retrain_l2_lambda: f64,
    #[serde(default = "default_controller")]
    pub controller: ControllerKind,
    pub trajectory: Vec<SinusoidSpec>,
    #[serde(default)]
    pub initial_error: Option<Vec<f64>>,
    /// Metric windows as `[start, end]` pairs in seconds.
    #[serde(default)]
    pub windows: Vec<(f64, f64)>,
    #[serde(default)]
    pub events: Vec<TimedEvent>,
}

fn default_rate() -> f64 {
    100.0
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_period() -> f64 {
    6.0
}
fn default_passes() -> usize {
    50
}
fn default_batch() -> usize {
    256
}
fn default_lr() -> f64 {
    DEFAULT_LEARNING_RATE
}
fn default_l2() -> f64 {
    DEFAULT_L2_LAMBDA
}
fn default_controller() -> ControllerKind {
    ControllerKind::AdaptiveWithRetrain
}

impl ScenarioConfig {
    pub fn build(&self, model: RobotModel, gains: Gains, seed: u64) -> Result<Scenario> {
        let n = model.n_joints();
        let mut sc = Scenario::new(
            model,
            gains,
            SinusoidTrajectory::new(self.trajectory.clone()),
            self.duration,
        );
        sc.control_rate = self.control_rate;
        sc.sim_dt = self.sim_dt;
        sc.retrain_period = self.retrain_period;
        sc.retrain_passes = self.retrain_passes;
        sc.retrain = RetrainConfig {
            batch_size: self.retrain_batch_size,
            learning_rate: self.retrain_learning_rate,
            l2_lambda: self.retrain_l2_lambda,
            seed,
        };
        if let Some(e) = &self.initial_error {
            sc.initial_error = PerJoint::Each(e.clone()).expand(n, "initial_error")?;
        }
        sc.events = self.events.clone();
        sc.seed = seed;
        sc.validate()?;
        Ok(sc)
    }

    pub fn metric_windows(&self) -> Vec<Window> {
        self.windows
            .iter()
            .map(|(a, b)| Window::new(*a, *b))
            .collect()
    }
}

/// Independent seeds for the random streams of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Seeds {
    pub excitation: u64,
    pub init: u64,
    pub training: u64,
    pub scenario: u64,
}

impl Seeds {
    pub fn from_master(seed: u64) -> Self {
        let mix = |k: u64| seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k);
        Seeds {
            excitation: mix(1),
            init: mix(2),
            training: mix(3),
            scenario: mix(4),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn gains(&self, n_joints: usize) -> Result<Gains> {
        self.gains
            .as_ref()
            .ok_or_else(|| Error::Config("missing [gains] section".into()))?
            .build(n_joints, self.network.basis_dim)
    }

    /// Excites the configured model and collects a training batch.
    pub fn collect(&self, seeds: &Seeds) -> Result<TrainBatch> {
        let model = self.model.build()?;
        let signals = self
            .excitation
            .signals(model.n_joints(), seeds.excitation)?;
        collect_dataset(&model, &signals, self.excitation.rate())
    }

    /// Fresh network trained offline on `data`.
    pub fn pretrain(
        &self,
        data: &TrainBatch,
        seeds: &Seeds,
    ) -> Result<(RegressorNet, OutputLayer, TrainReport)> {
        let (mut net, mut out) = self.network.init(data.n_joints(), seeds.init)?;
        let report = train_offline(
            &mut net,
            &mut out,
            data,
            &self.training.build(seeds.training),
        )?;
        Ok((net, out, report))
    }

    pub fn scenario(&self, seed: u64) -> Result<Scenario> {
        let sc = self
            .scenario
            .as_ref()
            .ok_or_else(|| Error::Config("missing [scenario] section".into()))?;
        let model = self.model.build()?;
        let gains = self.gains(model.n_joints())?;
        sc.build(model, gains, seed)
    }
}
