//! Planar serial-chain link dynamics.
//!
//! Every link is a point mass at its center-of-mass offset plus an optional
//! rotational inertia about that point. Joint angles are relative, and
//! `θ = 0` hangs straight down, so a single pendulum has `G(θ) = m·g·l·sin θ`.
//! An attached payload is a point mass at the distal tip of the last link.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::friction::FrictionModel;
use crate::error::{check_finite, check_len, Error, Result};

/// Physical parameters of a flexible-joint planar chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub link_masses: Vec<f64>,
    pub link_lengths: Vec<f64>,
    pub com_offsets: Vec<f64>,
    /// Rotational inertia of each link about its center of mass.
    #[serde(default)]
    pub link_inertias: Vec<f64>,
    pub gravity: f64,
    /// Shared joint stiffness `k_p` (N·m/rad).
    pub joint_stiffness: f64,
    /// Diagonal of `J_m`.
    pub motor_inertia: Vec<f64>,
    pub friction: Vec<FrictionModel>,
    #[serde(default)]
    pub payload_mass: f64,
}

pub const DEFAULT_JOINT_STIFFNESS: f64 = 50.0;

#[derive(Clone, Copy, Debug)]
struct PointMass {
    mass: f64,
    link: usize,
    radius: f64,
}

impl RobotModel {
    /// Point-mass pendulum: `M = m·l²`.
    pub fn pendulum(mass: f64, length: f64) -> Self {
        RobotModel {
            link_masses: vec![mass],
            link_lengths: vec![length],
            com_offsets: vec![length],
            link_inertias: vec![0.0],
            gravity: 9.81,
            joint_stiffness: DEFAULT_JOINT_STIFFNESS,
            motor_inertia: vec![0.01],
            friction: vec![FrictionModel::default()],
            payload_mass: 0.0,
        }
    }

    /// Two-link planar arm moving in the vertical plane.
    pub fn two_link_arm() -> Self {
        RobotModel {
            link_masses: vec![3.0, 2.0],
            link_lengths: vec![1.0, 1.0],
            com_offsets: vec![0.5, 0.5],
            link_inertias: vec![3.0 / 12.0, 2.0 / 12.0],
            gravity: 9.81,
            joint_stiffness: DEFAULT_JOINT_STIFFNESS,
            motor_inertia: vec![0.01, 0.01],
            friction: vec![FrictionModel::viscous_coulomb(0.1, 0.05); 2],
            payload_mass: 0.0,
        }
    }

    pub fn n_joints(&self) -> usize {
        self.link_masses.len()
    }

    pub fn with_friction(mut self, friction: FrictionModel) -> Self {
        self.friction = vec![friction; self.n_joints()];
        self
    }

    pub fn with_gravity(mut self, gravity: f64) -> Self {
        self.gravity = gravity;
        self
    }

    pub fn with_stiffness(mut self, k_p: f64) -> Self {
        self.joint_stiffness = k_p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_joints();
        if n == 0 {
            return Err(Error::InvalidModel("model has no joints".into()));
        }
        check_len("link_lengths", n, self.link_lengths.len())?;
        check_len("com_offsets", n, self.com_offsets.len())?;
        check_len("motor_inertia", n, self.motor_inertia.len())?;
        check_len("friction", n, self.friction.len())?;
        if !self.link_inertias.is_empty() {
            check_len("link_inertias", n, self.link_inertias.len())?;
        }
        let positive = |name: &str, v: &[f64]| -> Result<()> {
            match v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                Some(x) => Err(Error::InvalidModel(format!("{name} must be > 0, got {x}"))),
                None => Ok(()),
            }
        };
        positive("link mass", &self.link_masses)?;
        positive("link length", &self.link_lengths)?;
        positive("com offset", &self.com_offsets)?;
        positive("motor inertia", &self.motor_inertia)?;
        positive("joint stiffness", &[self.joint_stiffness])?;
        if self
            .link_inertias
            .iter()
            .any(|x| !(x.is_finite() && *x >= 0.0))
        {
            return Err(Error::InvalidModel("link inertias must be >= 0".into()));
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(Error::InvalidModel(
                "gravity must be finite and >= 0".into(),
            ));
        }
        if !(self.payload_mass.is_finite() && self.payload_mass >= 0.0) {
            return Err(Error::InvalidModel("payload mass must be >= 0".into()));
        }
        for fr in &self.friction {
            fr.validate()?;
        }
        Ok(())
    }

    fn link_inertia(&self, i: usize) -> f64 {
        self.link_inertias.get(i).copied().unwrap_or(0.0)
    }

    fn point_masses(&self) -> Vec<PointMass> {
        let n = self.n_joints();
        let mut pts: Vec<PointMass> = (0..n)
            .map(|i| PointMass {
                mass: self.link_masses[i],
                link: i,
                radius: self.com_offsets[i],
            })
            .collect();
        if self.payload_mass > 0.0 {
            pts.push(PointMass {
                mass: self.payload_mass,
                link: n - 1,
                radius: self.link_lengths[n - 1],
            });
        }
        pts
    }

    /// Lever arm of link `k` when reaching a point on link `pt.link`.
    fn lever(&self, pt: &PointMass, k: usize) -> f64 {
        if k == pt.link {
            pt.radius
        } else {
            self.link_lengths[k]
        }
    }

    fn check_theta(&self, theta: &DVector<f64>) -> Result<()> {
        check_len("theta", self.n_joints(), theta.len())?;
        check_finite("theta", theta.as_slice())
    }

    /// Position Jacobian (2 × n) of a point mass.
    fn jacobian(&self, pt: &PointMass, phi: &[f64]) -> DMatrix<f64> {
        let n = self.n_joints();
        let mut j = DMatrix::zeros(2, n);
        // Column j sums over links j..=pt.link, so accumulate from the tip.
        let (mut cx, mut cy) = (0.0, 0.0);
        for k in (0..=pt.link).rev() {
            let r = self.lever(pt, k);
            cx += r * phi[k].cos();
            cy += r * phi[k].sin();
            j[(0, k)] = cx;
            j[(1, k)] = cy;
        }
        j
    }

    /// `∂J/∂θ_l` for a point mass.
    fn jacobian_partial(&self, pt: &PointMass, phi: &[f64], l: usize) -> DMatrix<f64> {
        let n = self.n_joints();
        let mut h = DMatrix::zeros(2, n);
        if l > pt.link {
            return h;
        }
        for jcol in 0..=pt.link {
            let start = jcol.max(l);
            let (mut dx, mut dy) = (0.0, 0.0);
            for k in start..=pt.link {
                let r = self.lever(pt, k);
                dx -= r * phi[k].sin();
                dy += r * phi[k].cos();
            }
            h[(0, jcol)] = dx;
            h[(1, jcol)] = dy;
        }
        h
    }

    /// Inertia matrix `M(θ)`.
    pub fn mass_matrix(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        Ok(self.mass_matrix_unchecked(theta))
    }

    pub(crate) fn mass_matrix_unchecked(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n_joints();
        let phi = absolute_angles(theta);
        let mut m = DMatrix::zeros(n, n);
        for pt in self.point_masses() {
            let j = self.jacobian(&pt, &phi);
            m += pt.mass * j.transpose() * &j;
        }
        for i in 0..n {
            let inertia = self.link_inertia(i);
            if inertia > 0.0 {
                // Link i spins at Σ_{j≤i} θ̇_j.
                for a in 0..=i {
                    for b in 0..=i {
                        m[(a, b)] += inertia;
                    }
                }
            }
        }
        m
    }

    /// `∂M/∂θ_l` for every `l`.
    pub fn mass_matrix_partials(&self, theta: &DVector<f64>) -> Result<Vec<DMatrix<f64>>> {
        self.check_theta(theta)?;
        Ok(self.mass_matrix_partials_unchecked(theta))
    }

    fn mass_matrix_partials_unchecked(&self, theta: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let n = self.n_joints();
        let phi = absolute_angles(theta);
        let pts = self.point_masses();
        let jacs: Vec<DMatrix<f64>> = pts.iter().map(|p| self.jacobian(p, &phi)).collect();
        (0..n)
            .map(|l| {
                let mut dm = DMatrix::zeros(n, n);
                for (pt, j) in pts.iter().zip(&jacs) {
                    let h = self.jacobian_partial(pt, &phi, l);
                    let sym = h.transpose() * j;
                    dm += pt.mass * (&sym + sym.transpose());
                }
                dm
            })
            .collect()
    }

    /// Coriolis/centrifugal matrix from Christoffel symbols of the first kind,
    /// so `Ṁ − 2C` is skew-symmetric.
    pub fn coriolis_matrix(
        &self,
        theta: &DVector<f64>,
        theta_dot: &DVector<f64>,
    ) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        check_len("theta_dot", self.n_joints(), theta_dot.len())?;
        check_finite("theta_dot", theta_dot.as_slice())?;
        Ok(self.coriolis_unchecked(theta, theta_dot))
    }

    pub(crate) fn coriolis_unchecked(
        &self,
        theta: &DVector<f64>,
        theta_dot: &DVector<f64>,
    ) -> DMatrix<f64> {
        let n = self.n_joints();
        let mut c = DMatrix::zeros(n, n);
        if theta_dot.iter().all(|v| *v == 0.0) {
            return c;
        }
        let dm = self.mass_matrix_partials_unchecked(theta);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    let christoffel = 0.5 * (dm[k][(i, j)] + dm[j][(i, k)] - dm[i][(j, k)]);
                    acc += christoffel * theta_dot[k];
                }
                c[(i, j)] = acc;
            }
        }
        c
    }

    /// Gravity torque `G(θ) = ∂P/∂θ`.
    pub fn gravity_torque(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_theta(theta)?;
        Ok(self.gravity_unchecked(theta))
    }

    pub(crate) fn gravity_unchecked(&self, theta: &DVector<f64>) -> DVector<f64> {
        let n = self.n_joints();
        let phi = absolute_angles(theta);
        let mut g = DVector::zeros(n);
        for pt in self.point_masses() {
            let mut acc = 0.0;
            for k in (0..=pt.link).rev() {
                acc += self.lever(&pt, k) * phi[k].sin();
                g[k] += pt.mass * self.gravity * acc;
            }
        }
        g
    }

    /// Gravitational potential of the links and payload (zero at the base height).
    pub fn potential_energy(&self, theta: &DVector<f64>) -> Result<f64> {
        self.check_theta(theta)?;
        let phi = absolute_angles(theta);
        let mut p = 0.0;
        for pt in self.point_masses() {
            let y: f64 = (0..=pt.link)
                .map(|k| -self.lever(&pt, k) * phi[k].cos())
                .sum();
            p += pt.mass * self.gravity * y;
        }
        Ok(p)
    }

    /// Link-side kinetic energy `½ θ̇ᵀ M θ̇`.
    pub fn kinetic_energy(&self, theta: &DVector<f64>, theta_dot: &DVector<f64>) -> Result<f64> {
        let m = self.mass_matrix(theta)?;
        check_len("theta_dot", self.n_joints(), theta_dot.len())?;
        Ok(0.5 * theta_dot.dot(&(m * theta_dot)))
    }

    /// Friction torques for every joint at link velocity `theta_dot`.
    pub fn friction_torques(&self, theta_dot: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            theta_dot.len(),
            theta_dot
                .iter()
                .zip(&self.friction)
                .map(|(v, f)| f.torque(*v)),
        )
    }
}

fn absolute_angles(theta: &DVector<f64>) -> Vec<f64> {
    theta
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}

/// Free-function form of [`RobotModel::mass_matrix`].
pub fn mass_matrix(model: &RobotModel, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
    model.mass_matrix(theta)
}

/// Free-function form of [`RobotModel::coriolis_matrix`].
pub fn coriolis_matrix(
    model: &RobotModel,
    theta: &DVector<f64>,
    theta_dot: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    model.coriolis_matrix(theta, theta_dot)
}

/// Free-function form of [`RobotModel::gravity_torque`].
pub fn gravity_torque(model: &RobotModel, theta: &DVector<f64>) -> Result<DVector<f64>> {
    model.gravity_torque(theta)
}
