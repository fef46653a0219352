//! Scenario configuration: flat key-value TOML with sections for the
//! scenario, plant parameters, grid, time stepping, controller, reference
//! and output. All fields have defaults; the effective (fully resolved)
//! configuration is echoed into the output directory.

use std::path::{Path, PathBuf};

use hjflow::sim::{Controller, InitialCondition, Reference, Scheme, SimConfig};
use hjflow::{Grid, Params};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub controller: ControllerSection,
    #[serde(default)]
    pub reference: ReferenceSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    /// When true, cmd-simulate also runs the unilateral baseline on the same
    /// scenario and reports the control-effort ratio.
    pub compare_unilateral: bool,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            compare_unilateral: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            a: 1.0,
            b: 1.0,
            c1: 1.0,
            c2: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 201 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
    /// "semi_implicit" or "explicit"
    pub scheme: String,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            t0: 0.0,
            t_end: 8.0,
            dt: 1e-3,
            record_every: 10,
            scheme: "semi_implicit".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    /// fullstate | output_feedback | static | unilateral | feedforward
    pub kind: String,
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self {
            kind: "fullstate".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSection {
    /// traffic | sine
    pub family: String,
    /// sine amplitude d
    pub d: f64,
    /// sine output location
    pub x0: f64,
    pub k_max: usize,
    pub term_tol: f64,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        Self {
            family: "traffic".into(),
            d: 0.25,
            x0: 0.5,
            k_max: 30,
            term_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    /// reference | reference_plus_sine
    pub kind: String,
    pub amplitude: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: "reference_plus_sine".into(),
            amplitude: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(toml::de::Error),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "config io error: {e}"),
            ConfigError::Parse(e) => write!(f, "config parse error: {e}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        toml::from_str(&text).map_err(ConfigError::Parse)
    }

    pub fn params(&self) -> Result<Params, ConfigError> {
        Params::new(
            self.params.epsilon,
            self.params.a,
            self.params.b,
            self.params.c1,
            self.params.c2,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn reference(&self) -> Result<Reference, ConfigError> {
        match self.reference.family.as_str() {
            "traffic" => Ok(Reference::Traffic),
            "sine" => Ok(Reference::Sine {
                d: self.reference.d,
                x0: self.reference.x0,
            }),
            other => Err(ConfigError::Invalid(format!(
                "unknown reference family '{other}'"
            ))),
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let params = self.params()?;
        let grid = Grid::new(self.grid.n).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let scheme = match self.time.scheme.as_str() {
            "semi_implicit" => Scheme::SemiImplicit,
            "explicit" => Scheme::ExplicitEuler,
            other => return Err(ConfigError::Invalid(format!("unknown scheme '{other}'"))),
        };
        let controller = match self.controller.kind.as_str() {
            "fullstate" => Controller::FullState,
            "output_feedback" => Controller::OutputFeedback,
            "static" => Controller::Static,
            "unilateral" => Controller::Unilateral,
            "feedforward" => Controller::FeedforwardOnly,
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown controller '{other}'"
                )))
            }
        };
        let initial = match self.initial.kind.as_str() {
            "reference" => InitialCondition::Reference,
            "reference_plus_sine" => InitialCondition::ReferencePlusSine {
                amplitude: self.initial.amplitude,
            },
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown initial kind '{other}'"
                )))
            }
        };
        let cfg = SimConfig {
            params,
            grid,
            t0: self.time.t0,
            t_end: self.time.t_end,
            dt: self.time.dt,
            scheme,
            controller,
            reference: self.reference()?,
            initial,
            record_every: self.time.record_every,
            v_hat0: None,
        };
        cfg.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    /// Serialize the fully resolved configuration.
    pub fn effective_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
