use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign function with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Joint friction acting on the link side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrictionModel {
    /// `b·v + c·sgn(v)`
    ViscousCoulomb { viscous: f64, coulomb: f64 },
    /// `b·v + (c + (c_s − c)·exp(−(v/v_s)²))·sgn(v)`
    Stribeck {
        viscous: f64,
        coulomb: f64,
        static_level: f64,
        stribeck_velocity: f64,
    },
}

impl Default for FrictionModel {
    fn default() -> Self {
        FrictionModel::ViscousCoulomb {
            viscous: 0.0,
            coulomb: 0.0,
        }
    }
}

impl FrictionModel {
    pub fn viscous_coulomb(viscous: f64, coulomb: f64) -> Self {
        FrictionModel::ViscousCoulomb { viscous, coulomb }
    }

    pub fn stribeck(viscous: f64, coulomb: f64, static_level: f64, stribeck_velocity: f64) -> Self {
        FrictionModel::Stribeck {
            viscous,
            coulomb,
            static_level,
            stribeck_velocity,
        }
    }

    pub fn viscous(&self) -> f64 {
        match *self {
            FrictionModel::ViscousCoulomb { viscous, .. }
            | FrictionModel::Stribeck { viscous, .. } => viscous,
        }
    }

    pub fn coulomb(&self) -> f64 {
        match *self {
            FrictionModel::ViscousCoulomb { coulomb, .. }
            | FrictionModel::Stribeck { coulomb, .. } => coulomb,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (b, c) = (self.viscous(), self.coulomb());
        if !(b.is_finite() && b >= 0.0 && c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "friction coefficients must be finite and nonnegative (b = {b}, c = {c})"
            )));
        }
        if let FrictionModel::Stribeck {
            static_level,
            stribeck_velocity,
            ..
        } = *self
        {
            if !(static_level.is_finite() && static_level >= c) {
                return Err(Error::InvalidModel(format!(
                    "Stribeck static level {static_level} must be >= Coulomb level {c}"
                )));
            }
            if !(stribeck_velocity.is_finite() && stribeck_velocity > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "Stribeck velocity {stribeck_velocity} must be > 0"
                )));
            }
        }
        Ok(())
    }

    /// Friction torque at link velocity `v`. Odd in `v` and zero at rest.
    pub fn torque(&self, v: f64) -> f64 {
        match *self {
            FrictionModel::ViscousCoulomb { viscous, coulomb } => viscous * v + coulomb * sgn(v),
            FrictionModel::Stribeck {
                viscous,
                coulomb,
                static_level,
                stribeck_velocity,
            } => {
                let r = v / stribeck_velocity;
                viscous * v + (coulomb + (static_level - coulomb) * (-r * r).exp()) * sgn(v)
            }
        }
    }
}

/// Checked friction evaluation.
pub fn friction_torque(fr: &FrictionModel, theta_dot: f64) -> Result<f64> {
    if !theta_dot.is_finite() {
        return Err(Error::NonFinite("friction velocity"));
    }
    Ok(fr.torque(theta_dot))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_velocity_gives_zero() {
        let vc = FrictionModel::viscous_coulomb(0.3, 0.7);
        let st = FrictionModel::stribeck(0.3, 0.7, 1.5, 0.1);
        assert_eq!(friction_torque(&vc, 0.0).unwrap(), 0.0);
        assert_eq!(friction_torque(&st, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn viscous_only() {
        let vc = FrictionModel::viscous_coulomb(0.1, 0.0);
        assert!((friction_torque(&vc, 2.0).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn stribeck_at_stribeck_velocity() {
        let st = FrictionModel::stribeck(0.0, 0.5, 1.0, 0.1);
        let expected = 0.5 + 0.5 * (-1.0f64).exp();
        assert!((friction_torque(&st, 0.1).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.6839).abs() < 1e-4);
    }

    #[test]
    fn rejects_non_finite_velocity() {
        let vc = FrictionModel::default();
        assert!(friction_torque(&vc, f64::NAN).is_err());
    }

    #[test]
    fn stribeck_validation() {
        assert!(FrictionModel::stribeck(0.1, 1.0, 0.5, 0.1)
            .validate()
            .is_err());
        assert!(FrictionModel::stribeck(0.1, 0.5, 1.0, 0.0)
            .validate()
            .is_err());
        assert!(FrictionModel::stribeck(0.1, 0.5, 1.0, 0.1)
            .validate()
            .is_ok());
    }
}
