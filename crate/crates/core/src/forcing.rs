//! Named analytic load profiles shared by the macroscopic and microscopic runs.
//!
//! Both solvers sample the same closed-form functions, so their inputs agree
//! bit for bit.

use crate::error::ConfigError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Spatial shape over `Sigma = (a, b)`, as a function of `s = (x - a)/(b - a)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Shape {
    #[default]
    Constant,
    /// `sin(mode * pi * s)`.
    Sine { mode: u32 },
    /// `s`.
    Linear,
}

impl Shape {
    pub fn eval(self, s: f64) -> f64 {
        match self {
            Shape::Constant => 1.0,
            Shape::Sine { mode } => (mode as f64 * PI * s).sin(),
            Shape::Linear => s,
        }
    }
}

/// A scalar load `amplitude * ramp(t) * shape(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    #[default]
    Zero,
    /// Linear ramp from zero over `[0, t_ramp]`, then constant; switched off
    /// for `t > t_off` when given.
    RampHold {
        amplitude: f64,
        t_ramp: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_off: Option<f64>,
        #[serde(default)]
        shape: Shape,
    },
}

impl Profile {
    pub fn ramp_hold(amplitude: f64, t_ramp: f64, t_off: Option<f64>, shape: Shape) -> Self {
        Profile::RampHold { amplitude, t_ramp, t_off, shape }
    }

    /// Time factor in `[0, 1]`.
    pub fn time_factor(&self, t: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::RampHold { t_ramp, t_off, .. } => {
                if t_off.is_some_and(|off| t > off) || t <= 0.0 {
                    0.0
                } else {
                    (t / t_ramp).min(1.0)
                }
            }
        }
    }

    /// Value at time `t` and position `x` on `sigma`.
    pub fn eval(&self, t: f64, x: f64, sigma: (f64, f64)) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::RampHold { amplitude, shape, .. } => {
                let tf = self.time_factor(t);
                if tf == 0.0 {
                    return 0.0;
                }
                amplitude * tf * shape.eval((x - sigma.0) / (sigma.1 - sigma.0))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero) || matches!(self, Profile::RampHold { amplitude, .. } if *amplitude == 0.0)
    }

    pub fn validate(&self, name: &str) -> Result<(), ConfigError> {
        if let Profile::RampHold { amplitude, t_ramp, t_off, .. } = *self {
            if !amplitude.is_finite() {
                return Err(ConfigError::Invalid(format!("{name}: amplitude must be finite")));
            }
            if !(t_ramp > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "{name}: t_ramp must be positive so that the load vanishes at t = 0"
                )));
            }
            if t_off.is_some_and(|o| !(o >= 0.0)) {
                return Err(ConfigError::Invalid(format!("{name}: t_off must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Macroscopic loads: in-plane fluid and solid body forces `f0`, `g0` and the
/// cell-integrated transverse loads `f1_bar`, `g1_bar`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MacroForcing {
    #[serde(default)]
    pub f0: Profile,
    #[serde(default)]
    pub g0: Profile,
    #[serde(default)]
    pub f1_bar: Profile,
    #[serde(default)]
    pub g1_bar: Profile,
}

/// Loads sampled at one point.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct LoadSample {
    pub f0: f64,
    pub g0: f64,
    pub f1_bar: f64,
    pub g1_bar: f64,
}

impl MacroForcing {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn sample(&self, t: f64, x: f64, sigma: (f64, f64)) -> LoadSample {
        LoadSample {
            f0: self.f0.eval(t, x, sigma),
            g0: self.g0.eval(t, x, sigma),
            f1_bar: self.f1_bar.eval(t, x, sigma),
            g1_bar: self.g1_bar.eval(t, x, sigma),
        }
    }

    /// Multiplies every amplitude by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let sc = |p: Profile| match p {
            Profile::Zero => Profile::Zero,
            Profile::RampHold { amplitude, t_ramp, t_off, shape } => {
                Profile::RampHold { amplitude: amplitude * s, t_ramp, t_off, shape }
            }
        };
        Self { f0: sc(self.f0), g0: sc(self.g0), f1_bar: sc(self.f1_bar), g1_bar: sc(self.g1_bar) }
    }

    /// Switches every profile off after `t_off`.
    pub fn with_cutoff(&self, t_off: f64) -> Self {
        let cut = |p: Profile| match p {
            Profile::Zero => Profile::Zero,
            Profile::RampHold { amplitude, t_ramp, shape, .. } => {
                Profile::RampHold { amplitude, t_ramp, t_off: Some(t_off), shape }
            }
        };
        Self { f0: cut(self.f0), g0: cut(self.g0), f1_bar: cut(self.f1_bar), g1_bar: cut(self.g1_bar) }
    }

    /// Whether any profile is active at time `t`.
    pub fn is_active(&self, t: f64) -> bool {
        [self.f0, self.g0, self.f1_bar, self.g1_bar]
            .iter()
            .any(|p| !p.is_zero() && p.time_factor(t) != 0.0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.f0.validate("forcing.f0")?;
        self.g0.validate("forcing.g0")?;
        self.f1_bar.validate("forcing.f1_bar")?;
        self.g1_bar.validate("forcing.g1_bar")
    }
}
