use nalgebra::DVector;

use crate::error::{check_finite, check_len, Result};

/// Link and motor coordinates at one time instant.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotState {
    pub theta: DVector<f64>,
    pub theta_dot: DVector<f64>,
    pub theta_ddot: DVector<f64>,
    pub theta_m: DVector<f64>,
    pub theta_m_dot: DVector<f64>,
    pub time: f64,
}

impl RobotState {
    pub fn at_rest(n: usize) -> Self {
        RobotState {
            theta: DVector::zeros(n),
            theta_dot: DVector::zeros(n),
            theta_ddot: DVector::zeros(n),
            theta_m: DVector::zeros(n),
            theta_m_dot: DVector::zeros(n),
            time: 0.0,
        }
    }

    /// Link at `theta` with velocity `theta_dot`, motor collocated and at rest.
    pub fn new(theta: DVector<f64>, theta_dot: DVector<f64>) -> Self {
        let n = theta.len();
        RobotState {
            theta_m: theta.clone(),
            theta,
            theta_dot,
            theta_ddot: DVector::zeros(n),
            theta_m_dot: DVector::zeros(n),
            time: 0.0,
        }
    }

    pub fn n_joints(&self) -> usize {
        self.theta.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for (what, v) in [
            ("theta", &self.theta),
            ("theta_dot", &self.theta_dot),
            ("theta_ddot", &self.theta_ddot),
            ("theta_m", &self.theta_m),
            ("theta_m_dot", &self.theta_m_dot),
        ] {
            check_len(what, n, v.len())?;
            check_finite(what, v.as_slice())?;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite()
            && [
                &self.theta,
                &self.theta_dot,
                &self.theta_ddot,
                &self.theta_m,
                &self.theta_m_dot,
            ]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}
