use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

/// Controller gains for the PD baseline and the adaptive law.
#[derive(Clone, Debug, PartialEq)]
pub struct Gains {
    /// Diagonal of `Λ` (1/s).
    pub lambda: DVector<f64>,
    /// Diagonal of `K_s`.
    pub k_s: DVector<f64>,
    /// Robust gain `k` (rad).
    pub k_robust: f64,
    /// Adaptation rate `P` (N × N, symmetric positive definite).
    pub adaptation_rate: DMatrix<f64>,
    pub k1: f64,
    pub k2: f64,
    /// Boundary layer `φ` of the smoothed sign (rad/s).
    pub boundary_layer: f64,
}

pub const DEFAULT_BOUNDARY_LAYER: f64 = 0.01;

impl Gains {
    /// Equal gains on every joint with `P = p·I`.
    pub fn uniform(
        n_joints: usize,
        basis_dim: usize,
        lambda: f64,
        k_s: f64,
        k_robust: f64,
        p: f64,
    ) -> Self {
        Gains {
            lambda: DVector::from_element(n_joints, lambda),
            k_s: DVector::from_element(n_joints, k_s),
            k_robust,
            adaptation_rate: DMatrix::identity(basis_dim, basis_dim) * p,
            k1: 0.2,
            k2: 0.1,
            boundary_layer: DEFAULT_BOUNDARY_LAYER,
        }
    }

    /// The seven-joint gain set reported for the physical arm
    /// (`K1 = 0.2, K2 = 0.1, k = 5, P = 0.05·I`).
    pub fn seven_joint_reference(basis_dim: usize) -> Self {
        Gains {
            lambda: DVector::from_vec(vec![3.0, 6.0, 3.0, 20.0, 10.0, 10.0, 10.0]),
            k_s: DVector::from_vec(vec![0.1, 0.01, 0.01, 0.1, 0.01, 0.01, 0.01]),
            k_robust: 5.0,
            adaptation_rate: DMatrix::identity(basis_dim, basis_dim) * 0.05,
            k1: 0.2,
            k2: 0.1,
            boundary_layer: DEFAULT_BOUNDARY_LAYER,
        }
    }

    pub fn with_boundary_layer(mut self, phi: f64) -> Self {
        self.boundary_layer = phi;
        self
    }

    pub fn n_joints(&self) -> usize {
        self.lambda.len()
    }

    pub fn basis_dim(&self) -> usize {
        self.adaptation_rate.nrows()
    }

    pub fn validate(&self, n_joints: usize, basis_dim: usize) -> Result<()> {
        check_len("lambda", n_joints, self.lambda.len())?;
        check_len("k_s", n_joints, self.k_s.len())?;
        check_len(
            "adaptation rate rows",
            basis_dim,
            self.adaptation_rate.nrows(),
        )?;
        check_len(
            "adaptation rate cols",
            basis_dim,
            self.adaptation_rate.ncols(),
        )?;
        if self
            .lambda
            .iter()
            .chain(self.k_s.iter())
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(Error::Config("lambda and k_s entries must be > 0".into()));
        }
        if !(self.k_robust.is_finite() && self.k_robust >= 0.0) {
            return Err(Error::Config("robust gain must be >= 0".into()));
        }
        if !(self.k1 >= 0.0 && self.k2 >= 0.0) {
            return Err(Error::Config("PD gains must be >= 0".into()));
        }
        if !(self.boundary_layer.is_finite() && self.boundary_layer > 0.0) {
            return Err(Error::Config("boundary layer must be > 0".into()));
        }
        let p = &self.adaptation_rate;
        if (p - p.transpose()).amax() > 1e-12 * p.amax().max(1.0) {
            return Err(Error::Config("adaptation rate must be symmetric".into()));
        }
        if p.clone().cholesky().is_none() {
            return Err(Error::Config(
                "adaptation rate must be positive definite".into(),
            ));
        }
        Ok(())
    }
}
