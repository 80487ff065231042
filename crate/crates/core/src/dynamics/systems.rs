use serde::{Deserialize, Serialize};

use crate::dictionary::expr_sgn as sgn;
use crate::{Error, Result};

pub const PENDULUM_DAMPING: f64 = 0.05;
pub const DUFFING_DAMPING: f64 = 0.1;

/// Physical parameters of the golf-robot stroke mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GolfParameters {
    /// m [kg]
    pub mass: f64,
    /// J [kg m²]
    pub inertia: f64,
    /// g [m/s²]
    pub gravity: f64,
    /// a, axis of rotation to centre of mass [m]
    pub com_length: f64,
    /// d, dynamic friction [kg m²/s]
    pub damping: f64,
    /// r, axis of rotation to friction point [m]
    pub friction_length: f64,
    /// μ, static friction [-]
    pub static_friction: f64,
}

impl Default for GolfParameters {
    fn default() -> Self {
        GolfParameters {
            mass: 0.5241,
            inertia: 0.1445,
            gravity: 9.81,
            com_length: 0.4702,
            damping: 0.0132,
            friction_length: 0.0245,
            static_friction: 1.5136,
        }
    }
}

impl GolfParameters {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("inertia", self.inertia),
            ("gravity", self.gravity),
            ("com_length", self.com_length),
            ("damping", self.damping),
            ("friction_length", self.friction_length),
            ("static_friction", self.static_friction),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "golf parameter `{name}` must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Damped pendulum, `ẋ2 = −sin x1 − 0.05 x2 + u`.
pub fn pendulum_rhs(x: [f64; 2], u: f64) -> [f64; 2] {
    [x[1], -x[0].sin() - PENDULUM_DAMPING * x[1] + u]
}

/// Duffing oscillator, `ẋ2 = x1 − x1³ − 0.1 x2 + u`.
pub fn duffing_rhs(x: [f64; 2], u: f64) -> [f64; 2] {
    [x[1], x[0] - x[0].powi(3) - DUFFING_DAMPING * x[1] + u]
}

/// Friction torque `M_d(x) = d x2 + r μ sgn(x2) |m x2² a + m g cos x1|`.
pub fn golf_damping(x: [f64; 2], p: &GolfParameters) -> f64 {
    let normal = p.mass * x[1] * x[1] * p.com_length + p.mass * p.gravity * x[0].cos();
    p.damping * x[1] + p.friction_length * p.static_friction * sgn(x[1]) * normal.abs()
}

/// Golf robot, `ẋ2 = (−m g a sin x1 − M_d(x) + 4u) / J`.
pub fn golf_rhs(x: [f64; 2], u: f64, p: &GolfParameters) -> [f64; 2] {
    let gravity = p.mass * p.gravity * p.com_length * x[0].sin();
    [x[1], (-gravity - golf_damping(x, p) + 4.0 * u) / p.inertia]
}

/// Continuous-time vector field `ẋ = f(x) + B u`.
pub trait Dynamics: Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    /// Writes `ẋ` into `dx`. `u` has `input_dim()` entries.
    fn rhs(&self, x: &[f64], u: &[f64], dx: &mut [f64]);
}

/// The three benchmark systems. All are planar with a scalar input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum SystemModel {
    Pendulum { damping: f64 },
    Duffing { damping: f64 },
    Golf(GolfParameters),
}

impl SystemModel {
    pub fn pendulum() -> Self {
        SystemModel::Pendulum {
            damping: PENDULUM_DAMPING,
        }
    }

    pub fn duffing() -> Self {
        SystemModel::Duffing {
            damping: DUFFING_DAMPING,
        }
    }

    pub fn golf() -> Self {
        SystemModel::Golf(GolfParameters::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemModel::Pendulum { .. } => "pendulum",
            SystemModel::Duffing { .. } => "duffing",
            SystemModel::Golf(_) => "golf",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "pendulum" => Ok(Self::pendulum()),
            "duffing" => Ok(Self::duffing()),
            "golf" => Ok(Self::golf()),
            other => Err(Error::InvalidArgument(format!(
                "unknown system `{other}` (expected pendulum, duffing or golf)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SystemModel::Pendulum { damping } | SystemModel::Duffing { damping } => {
                if damping.is_finite() && *damping >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!("damping must be >= 0, got {damping}")))
                }
            }
            SystemModel::Golf(p) => p.validate(),
        }
    }

    fn eval(&self, x: [f64; 2], u: f64) -> [f64; 2] {
        match self {
            SystemModel::Pendulum { damping } => [x[1], -x[0].sin() - damping * x[1] + u],
            SystemModel::Duffing { damping } => [x[1], x[0] - x[0].powi(3) - damping * x[1] + u],
            SystemModel::Golf(p) => golf_rhs(x, u, p),
        }
    }
}

impl Dynamics for SystemModel {
    fn state_dim(&self) -> usize {
        2
    }

    fn input_dim(&self) -> usize {
        1
    }

    fn rhs(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let d = self.eval([x[0], x[1]], u[0]);
        dx.copy_from_slice(&d);
    }
}

/// Adapter for closures `(x, u, dx)`.
pub struct FnDynamics<F> {
    pub state_dim: usize,
    pub input_dim: usize,
    pub f: F,
}

impl<F> Dynamics for FnDynamics<F>
where
    F: Fn(&[f64], &[f64], &mut [f64]) + Sync,
{
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn rhs(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        (self.f)(x, u, dx)
    }
}
