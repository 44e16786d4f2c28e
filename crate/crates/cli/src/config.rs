//! Run configuration: a JSON document with strict schema validation and
//! documented defaults. All quantities are nondimensional.

use serde::{Deserialize, Serialize};
use thinfilm_core::fem::CellType;
use thinfilm_core::physics::{BulkMobility, ContactMobility, MobilityLaws, PhysicsParams};
use thinfilm_core::state::{NumericsParams, TangentialMode};
use thinfilm_core::stepper::{Scheme, SolverModel, StepperConfig};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config invalid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Transient,
    Strong,
    Weak,
}

impl Model {
    pub fn solver(&self) -> SolverModel {
        match self {
            Model::Transient => SolverModel::Transient,
            Model::Strong => SolverModel::Strong,
            Model::Weak => SolverModel::Weak,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum Geometry {
    Disc {
        refinement: usize,
    },
    Ridge {
        length: f64,
        height: f64,
        delta: f64,
        refinement: usize,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Quad,
    Triangle,
}

impl CellKind {
    pub fn cell_type(self) -> CellType {
        match self {
            CellKind::Quad => CellType::Quad,
            CellKind::Triangle => CellType::Tri,
        }
    }
}

fn default_cell_kind() -> CellKind {
    CellKind::Quad
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PhysicsBlock {
    #[serde(default = "one")]
    pub sigma: f64,
    pub s: f64,
    #[serde(default)]
    pub g_x: [f64; 2],
    #[serde(default)]
    pub g_z: f64,
    #[serde(default)]
    pub eps_line: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum BulkMobilityBlock {
    Power { m0: f64, alpha: f64 },
    Slip { b: f64 },
}

impl Default for BulkMobilityBlock {
    fn default() -> Self {
        BulkMobilityBlock::Power { m0: 1.0, alpha: 2.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ContactMobilityBlock {
    pub n0: f64,
    #[serde(default)]
    pub theta: i32,
}

impl Default for ContactMobilityBlock {
    fn default() -> Self {
        ContactMobilityBlock { n0: 1.0, theta: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchemeName {
    Semi1,
    Rich2,
    Rich3,
}

impl SchemeName {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeName::Semi1 => Scheme::Semi1,
            SchemeName::Rich2 => Scheme::Rich2,
            SchemeName::Rich3 => Scheme::Rich3,
        }
    }

    pub fn parse(s: &str) -> Result<SchemeName, ConfigError> {
        match s.to_ascii_uppercase().as_str() {
            "SEMI1" => Ok(SchemeName::Semi1),
            "RICH2" => Ok(SchemeName::Rich2),
            "RICH3" => Ok(SchemeName::Rich3),
            _ => Err(ConfigError::Invalid(format!(
                "scheme must be SEMI1, RICH2 or RICH3, got {s}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StepperBlock {
    pub scheme: SchemeName,
    pub tau: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default)]
    pub vtk: bool,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

fn default_out_dir() -> String {
    "out".into()
}

fn yes() -> bool {
    true
}

fn default_snapshot_every() -> usize {
    10
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            dir: default_out_dir(),
            csv: true,
            vtk: false,
            snapshot_every: default_snapshot_every(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum TangentialModeName {
    Zero,
    TravelingWave,
}

/// The full run configuration. Unknown keys are rejected; every physical
/// quantity is nondimensional. Runs are seed-free and fully deterministic.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub geometry: Geometry,
    pub degree: usize,
    #[serde(default = "default_cell_kind")]
    pub cell_type: CellKind,
    pub physics: PhysicsBlock,
    /// bulk mobility law m(h)
    #[serde(default)]
    pub m: BulkMobilityBlock,
    /// contact-line mobility law n(|grad h|)
    #[serde(default)]
    pub n: ContactMobilityBlock,
    pub stepper: StepperBlock,
    #[serde(default)]
    pub tangential_mode: Option<TangentialModeName>,
    #[serde(default = "default_g_min")]
    pub g_min: f64,
    #[serde(default = "default_feasibility_tol")]
    pub feasibility_tol: f64,
    /// conserved volume; defaults to 1 for discs and to the near-equilibrium
    /// cross-section for ridges
    #[serde(default)]
    pub vol0: Option<f64>,
    #[serde(default)]
    pub output: OutputBlock,
}

fn default_g_min() -> f64 {
    1e-8
}

fn default_feasibility_tol() -> f64 {
    1e-3
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = serde_json::from_str(text)?;
    validate(&config)?;
    Ok(config)
}

fn validate(c: &RunConfig) -> Result<(), ConfigError> {
    let fail = |msg: String| Err(ConfigError::Invalid(msg));
    if !(1..=3).contains(&c.degree) {
        return fail(format!("degree: expected 1, 2 or 3, got {}", c.degree));
    }
    if c.physics.s < 0.0 {
        return fail(format!(
            "physics.s: spreading coefficient must be >= 0, got {}",
            c.physics.s
        ));
    }
    if c.physics.sigma <= 0.0 {
        return fail(format!("physics.sigma: must be > 0, got {}", c.physics.sigma));
    }
    if c.physics.eps_line < 0.0 {
        return fail(format!(
            "physics.eps_line: must be >= 0, got {}",
            c.physics.eps_line
        ));
    }
    match &c.m {
        BulkMobilityBlock::Power { m0, alpha } => {
            if *m0 <= 0.0 {
                return fail(format!("m.power.m0: must be > 0, got {m0}"));
            }
            if *alpha < 0.0 {
                return fail(format!("m.power.alpha: must be >= 0, got {alpha}"));
            }
        }
        BulkMobilityBlock::Slip { b } => {
            if *b < 0.0 {
                return fail(format!("m.slip.b: must be >= 0, got {b}"));
            }
        }
    }
    if c.n.n0 <= 0.0 {
        return fail(format!("n.n0: must be > 0, got {}", c.n.n0));
    }
    if !(-1..=1).contains(&c.n.theta) {
        return fail(format!("n.theta: must be -1, 0 or +1, got {}", c.n.theta));
    }
    if c.stepper.tau <= 0.0 {
        return fail(format!("stepper.tau: must be > 0, got {}", c.stepper.tau));
    }
    if c.stepper.t_end < 0.0 {
        return fail(format!("stepper.t_end: must be >= 0, got {}", c.stepper.t_end));
    }
    if c.g_min <= 0.0 {
        return fail(format!("g_min: must be > 0, got {}", c.g_min));
    }
    if let Geometry::Ridge { length, height, delta, .. } = &c.geometry {
        if *length <= 0.0 || *height <= 0.0 {
            return fail("geometry.ridge: length and height must be > 0".into());
        }
        if delta.abs() >= 1.0 {
            return fail(format!(
                "geometry.ridge.delta: |delta| must be < 1, got {delta}"
            ));
        }
    }
    if let Some(v) = c.vol0 {
        if v <= 0.0 {
            return fail(format!("vol0: must be > 0, got {v}"));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn is_ridge(&self) -> bool {
        matches!(self.geometry, Geometry::Ridge { .. })
    }

    pub fn physics_params(&self) -> PhysicsParams {
        PhysicsParams {
            sigma: self.physics.sigma,
            s: self.physics.s,
            g_x: self.physics.g_x,
            g_z: self.physics.g_z,
            eps_line: self.physics.eps_line,
        }
    }

    pub fn mobility_laws(&self) -> MobilityLaws {
        MobilityLaws {
            bulk: match self.m {
                BulkMobilityBlock::Power { m0, alpha } => BulkMobility::Power { m0, alpha },
                BulkMobilityBlock::Slip { b } => BulkMobility::Slip { b },
            },
            contact: ContactMobility {
                n0: self.n.n0,
                theta: self.n.theta,
            },
        }
    }

    pub fn numerics(&self) -> NumericsParams {
        let tangential = match self.tangential_mode {
            Some(TangentialModeName::Zero) => TangentialMode::Zero,
            Some(TangentialModeName::TravelingWave) => TangentialMode::TravelingWave,
            // droplets carry the traveling-wave correction, ridge translation
            // is pinned by symmetry
            None => {
                if self.is_ridge() {
                    TangentialMode::Zero
                } else {
                    TangentialMode::TravelingWave
                }
            }
        };
        NumericsParams {
            g_min: self.g_min,
            feasibility_tol: self.feasibility_tol,
            tangential,
        }
    }

    pub fn stepper_config(&self) -> StepperConfig {
        StepperConfig {
            scheme: self.stepper.scheme.scheme(),
            tau: self.stepper.tau,
            t_end: self.stepper.t_end,
            snapshot_every: self.output.snapshot_every,
            solver: self.model.solver(),
        }
    }

    pub fn volume(&self) -> f64 {
        match (self.vol0, &self.geometry) {
            (Some(v), _) => v,
            (None, Geometry::Disc { .. }) => 1.0,
            (None, Geometry::Ridge { length, height, .. }) => {
                thinfilm_core::state::ridge_equilibrium_volume(
                    *length,
                    *height,
                    &self.physics_params(),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": "transient",
        "geometry": {"disc": {"refinement": 2}},
        "degree": 2,
        "physics": {"s": 1.0},
        "stepper": {"scheme": "SEMI1", "tau": 0.01, "t_end": 0.1}
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.model, Model::Transient);
        assert_eq!(c.physics.sigma, 1.0);
        assert_eq!(c.g_min, 1e-8);
        assert_eq!(c.feasibility_tol, 1e-3);
        assert_eq!(c.output.snapshot_every, 10);
        assert!(matches!(c.m, BulkMobilityBlock::Power { m0, alpha } if m0 == 1.0 && alpha == 2.0));
        assert_eq!(c.volume(), 1.0);
    }

    #[test]
    fn negative_spreading_coefficient_rejected() {
        let bad = MINIMAL.replace("\"s\": 1.0", "\"s\": -1.0");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("physics.s"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("\"degree\": 2,", "\"degree\": 2, \"bogus\": 1,");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn sliding_droplet_config_round_trips() {
        // the g_x = 5 sliding-droplet parameter set
        let text = r#"{
            "model": "transient",
            "geometry": {"disc": {"refinement": 3}},
            "degree": 2,
            "physics": {"g_x": [5.0, 0.0], "g_z": 0.0, "s": 1.0},
            "n": {"n0": 1.0, "theta": 0},
            "m": {"power": {"m0": 1.0, "alpha": 2.0}},
            "stepper": {"scheme": "RICH2", "tau": 0.005, "t_end": 2.0}
        }"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.physics.g_x, [5.0, 0.0]);
        let echo = serde_json::to_string_pretty(&c).unwrap();
        let c2 = parse_config(&echo).unwrap();
        assert_eq!(c, c2);
    }
}
