//! Run configuration: JSON schema, defaults and validation.

use crate::error::{ConfigError, Error};
use crate::forcing::{MacroForcing, Profile, Shape};
use crate::geometry::{CellGeometry, LayerSides};
use crate::material::ElasticityTensor;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Default target size of the cell mesh.
pub const DEFAULT_H_CELL: f64 = 0.05;
/// Default relative solver tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default number of time steps when `dt` is omitted.
pub const DEFAULT_STEPS: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    /// `cavity`, `channel` or `solid`.
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default = "default_h_cell")]
    pub h_cell: f64,
}

fn default_h_cell() -> f64 {
    DEFAULT_H_CELL
}

/// Isotropic Lamé parameters or a full tensor in Voigt layout
/// (engineering shear strain).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voigt: Option<[[f64; 3]; 3]>,
}

impl MaterialSpec {
    pub fn tensor(&self) -> Result<ElasticityTensor, Error> {
        match (self.lambda, self.mu, self.voigt) {
            (Some(l), Some(m), None) => Ok(ElasticityTensor::isotropic(l, m)?),
            (None, None, Some(v)) => Ok(ElasticityTensor::from_voigt(v)?),
            _ => Err(ConfigError::Invalid("material needs either `lambda` and `mu` or `voigt`".into()).into()),
        }
    }
}

/// Which lateral end carries the fluid no-slip condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DirichletEnds {
    #[default]
    A,
    B,
    Both,
}

impl DirichletEnds {
    pub fn sides(self) -> Result<LayerSides, Error> {
        let (a, b) = match self {
            DirichletEnds::A => (true, false),
            DirichletEnds::B => (false, true),
            DirichletEnds::Both => (true, true),
        };
        Ok(LayerSides::new(a, b)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroSpec {
    #[serde(default = "default_sigma")]
    pub sigma: [f64; 2],
    #[serde(default = "default_nodes")]
    pub n_nodes: usize,
    #[serde(default)]
    pub dirichlet: DirichletEnds,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

fn default_sigma() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_nodes() -> usize {
    65
}

fn default_t_end() -> f64 {
    1.0
}

impl Default for MacroSpec {
    fn default() -> Self {
        Self { sigma: default_sigma(), n_nodes: default_nodes(), dirichlet: DirichletEnds::A, t_end: default_t_end(), dt: None }
    }
}

impl MacroSpec {
    /// Time step (`t_end / 100` unless given).
    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(self.t_end / DEFAULT_STEPS)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroSpec {
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Micro time step; must equal the macro one for comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Loads for the micro runs; if given they must equal the main forcing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<MacroForcing>,
}

fn default_eps() -> Vec<f64> {
    vec![0.25, 0.125, 0.0625]
}

impl Default for MicroSpec {
    fn default() -> Self {
        Self { eps: default_eps(), dt: None, forcing: None }
    }
}

/// A complete run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub geometry: GeometrySpec,
    pub material: MaterialSpec,
    #[serde(default, rename = "macro")]
    pub macro_: MacroSpec,
    #[serde(default = "default_forcing")]
    pub forcing: MacroForcing,
    #[serde(default)]
    pub micro: MicroSpec,
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Use the data-parallel executor (results are identical either way).
    #[serde(default = "default_true")]
    pub parallel: bool,
}

fn default_output() -> String {
    "out".to_string()
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_true() -> bool {
    true
}

/// Standard loads: every profile ramps linearly over `t = 0.1` and holds.
pub fn default_forcing() -> MacroForcing {
    MacroForcing {
        f0: Profile::ramp_hold(1.0, 0.1, None, Shape::Sine { mode: 1 }),
        g0: Profile::ramp_hold(0.5, 0.1, None, Shape::Constant),
        f1_bar: Profile::ramp_hold(-1.0, 0.1, None, Shape::Sine { mode: 1 }),
        g1_bar: Profile::ramp_hold(0.3, 0.1, None, Shape::Sine { mode: 2 }),
    }
}

impl RunSpec {
    pub fn cell_geometry(&self) -> Result<CellGeometry, Error> {
        Ok(CellGeometry::build(&self.geometry.family, &self.geometry.params)?)
    }

    pub fn sides(&self) -> Result<LayerSides, Error> {
        self.macro_.dirichlet.sides()
    }

    pub fn sigma(&self) -> (f64, f64) {
        (self.macro_.sigma[0], self.macro_.sigma[1])
    }

    /// Micro time step (the macro one unless given).
    pub fn micro_dt(&self) -> f64 {
        self.micro.dt.unwrap_or_else(|| self.macro_.dt())
    }

    /// Checks ranges and cross-field consistency.
    pub fn validate(&self) -> Result<(), Error> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("geometry.h_cell", self.geometry.h_cell)?;
        positive("tol", self.tol)?;
        positive("macro.t_end", self.macro_.t_end)?;
        positive("macro.dt", self.macro_.dt())?;
        positive("micro.dt", self.micro_dt())?;
        let [a, b] = self.macro_.sigma;
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(ConfigError::Invalid(format!("macro.sigma = [{a}, {b}] is not an interval")).into());
        }
        if self.macro_.n_nodes < 3 {
            return Err(ConfigError::Invalid("macro.n_nodes must be at least 3".into()).into());
        }
        if self.micro.eps.is_empty() {
            return Err(ConfigError::Invalid("micro.eps must not be empty".into()).into());
        }
        for &e in &self.micro.eps {
            positive("micro.eps", e)?;
        }
        if self.micro.eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(ConfigError::NotDecreasing(self.micro.eps.clone()).into());
        }
        self.forcing.validate()?;
        if let Some(f) = &self.micro.forcing {
            f.validate()?;
        }
        self.cell_geometry()?;
        self.material.tensor()?;
        self.sides()?;
        Ok(())
    }
}

/// Parses and validates a configuration from JSON text.
pub fn parse_config(text: &str) -> Result<RunSpec, Error> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: RunSpec = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::SchemaViolation {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    spec.validate()?;
    Ok(spec)
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunSpec, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Config(ConfigError::FileNotFound(path.display().to_string())),
        _ => Error::Io(e),
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"geometry": {"family": "cavity", "params": [0.5, 0.0, 0.25]},
                              "material": {"lambda": 1.0, "mu": 1.0}}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let s = parse_config(MINIMAL).unwrap();
        assert_eq!(s.geometry.h_cell, DEFAULT_H_CELL);
        assert_eq!(s.tol, DEFAULT_TOL);
        assert_eq!(s.macro_.dt(), s.macro_.t_end / 100.0);
        assert_eq!(s.micro_dt(), s.macro_.dt());
        assert_eq!(s.forcing, default_forcing());
    }

    #[test]
    fn increasing_eps_is_rejected() {
        let text = MINIMAL.replace("}}", r#"}, "micro": {"eps": [0.25, 0.5]}}"#);
        let e = parse_config(&text).unwrap_err();
        assert!(matches!(e, Error::Config(ConfigError::NotDecreasing(_))), "{e}");
    }

    #[test]
    fn unknown_field_is_named() {
        let text = MINIMAL.replace(r#""params""#, r#""colour": 1, "params""#);
        match parse_config(&text).unwrap_err() {
            Error::Config(ConfigError::SchemaViolation { path, message }) => {
                assert_eq!(path, "geometry.colour");
                assert!(message.contains("colour"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn material_needs_one_form() {
        let text = MINIMAL.replace(r#""mu": 1.0"#, r#""mu": 1.0, "voigt": [[1,0,0],[0,1,0],[0,0,1]]"#);
        assert!(matches!(parse_config(&text).unwrap_err(), Error::Config(ConfigError::Invalid(_))));
    }
}
