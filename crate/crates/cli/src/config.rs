//! Experiment configuration: a TOML file plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use geophase::angle::parse_angle;
use geophase::evolution::{CYCLICITY_THRESHOLD, DEFAULT_STEPS};
use geophase::holonomy::DEFAULT_LOOP_POINTS;
use geophase::models::{RingModelParams, SpinModelParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Syntax { path: PathBuf, message: String },
    #[error("{}: field `{field}`: {reason}", path.display())]
    Field {
        path: PathBuf,
        field: String,
        reason: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spin,
    RingStatic,
    RingRotating,
    RingAction,
    DirectSum,
    GaugeSweep,
    Convergence,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Spin,
        Experiment::RingStatic,
        Experiment::RingRotating,
        Experiment::RingAction,
        Experiment::DirectSum,
        Experiment::GaugeSweep,
        Experiment::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spin => "spin",
            Experiment::RingStatic => "ring-static",
            Experiment::RingRotating => "ring-rotating",
            Experiment::RingAction => "ring-action",
            Experiment::DirectSum => "direct-sum",
            Experiment::GaugeSweep => "gauge-sweep",
            Experiment::Convergence => "convergence",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::Spin => "spin-1/2 in a static field: holonomy and AA phases of the invariant eigenstates",
            Experiment::RingStatic => "ring in a static field: per-block phases of the invariant eigenstates",
            Experiment::RingRotating => "ring in a rotating field: 2x2 phase matrix and Wilson loop per block",
            Experiment::RingAction => "adiabatic action-operator eigenfunctions on the angle torus",
            Experiment::DirectSum => "superposition across angular-momentum blocks evolved blockwise",
            Experiment::GaugeSweep => "Wilson-loop spectrum under random smooth gauge transformations",
            Experiment::Convergence => "observed order of the discrete estimators under grid halving",
        }
    }

    /// The closed forms each experiment checks against.
    pub fn formulas(self) -> &'static str {
        match self {
            Experiment::Spin => "gamma_± = pi(1 ± cos 2theta); dynamic = ∓pi cos 2theta; total = pi",
            Experiment::RingStatic => "gamma_n± = pi(1 ± cos 2theta_n)",
            Experiment::RingRotating => {
                "Gamma_n = 2pi [[sin²Theta, sinTheta cosTheta], [sinTheta cosTheta, cos²Theta]]; W = 1"
            }
            Experiment::RingAction => "gamma_± = pi(1 ∓ cos 2Theta); eigenvalues n + (1 ∓ r)/2",
            Experiment::DirectSum => "block n over the n = 0 period: (2n + 1) gamma_n±",
            Experiment::GaugeSweep => "spectrum(W') = spectrum(W) under F -> F g",
            Experiment::Convergence => "error ~ (step)²",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// An angle written either as a number or as text such as `"pi/3"` or `"0.25pi"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Angle {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Experiment,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    tolerance: RawTolerance,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    gauge: RawGauge,
    #[serde(default)]
    spin: RawSpin,
    #[serde(default)]
    ring: RawRing,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    steps: Option<usize>,
    loop_points: Option<usize>,
    angle_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerance {
    phase: Option<f64>,
    cyclicity: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    format: Option<Format>,
    path: Option<PathBuf>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGauge {
    count: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpin {
    omega_s: Option<f64>,
    theta: Option<Angle>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRing {
    epsilon: Option<f64>,
    chi: Option<Angle>,
    omega: Option<f64>,
    omega_o: Option<f64>,
    n_levels: Option<Vec<i64>>,
    theta_n: Option<Vec<Angle>>,
    offsets: Option<Vec<f64>>,
}

/// A validated experiment configuration.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub spin: SpinModelParams,
    pub ring: RingModelParams,
    pub steps: usize,
    pub loop_points: usize,
    pub angle_points: usize,
    pub phase_tolerance: f64,
    pub cyclicity_threshold: f64,
    pub gauge_count: u64,
    pub seed: u64,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path, overrides)
    }

    /// Parses and validates `text`; `origin` only labels diagnostics.
    pub fn parse(text: &str, origin: &Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax {
            path: origin.to_path_buf(),
            message: e.message().to_string(),
        })?;
        let field = |field: &str, reason: String| ConfigError::Field {
            path: origin.to_path_buf(),
            field: field.to_string(),
            reason,
        };
        let angle = |name: &str, a: &Angle| match a {
            Angle::Number(v) => Ok(*v),
            Angle::Text(s) => parse_angle(s).ok_or_else(|| field(name, format!("cannot parse angle `{s}`"))),
        };

        let defaults = RingModelParams::default();
        let spin = SpinModelParams {
            omega_s: raw.spin.omega_s.unwrap_or(1.0),
            theta: match &raw.spin.theta {
                Some(a) => angle("spin.theta", a)?,
                None => std::f64::consts::PI / 6.0,
            },
        };
        let ring = RingModelParams {
            epsilon: raw.ring.epsilon.unwrap_or(defaults.epsilon),
            chi: match &raw.ring.chi {
                Some(a) => angle("ring.chi", a)?,
                None => defaults.chi,
            },
            omega: raw.ring.omega.unwrap_or(defaults.omega),
            n_levels: raw.ring.n_levels.unwrap_or(defaults.n_levels),
            theta_n: match &raw.ring.theta_n {
                Some(list) => list
                    .iter()
                    .map(|a| angle("ring.theta_n", a))
                    .collect::<Result<_, _>>()?,
                None => defaults.theta_n,
            },
            omega_o: raw.ring.omega_o.unwrap_or(match raw.experiment {
                Experiment::RingRotating => 1.0,
                _ => 0.0,
            }),
            offsets: raw.ring.offsets,
        };

        let config = ExperimentConfig {
            experiment: raw.experiment,
            spin,
            ring,
            steps: overrides.steps.or(raw.grid.steps).unwrap_or(DEFAULT_STEPS),
            loop_points: overrides.steps.or(raw.grid.loop_points).unwrap_or(DEFAULT_LOOP_POINTS),
            angle_points: raw.grid.angle_points.unwrap_or(geophase::action::DEFAULT_ANGLE_POINTS),
            phase_tolerance: overrides.tolerance.or(raw.tolerance.phase).unwrap_or(1e-6),
            cyclicity_threshold: raw.tolerance.cyclicity.unwrap_or(CYCLICITY_THRESHOLD),
            gauge_count: raw.gauge.count.unwrap_or(10),
            seed: overrides.seed.or(raw.output.seed).unwrap_or(0),
            format: overrides.format.or(raw.output.format).unwrap_or_default(),
            output: overrides.output.clone().or(raw.output.path),
        };
        config.validate().map_err(|(name, reason)| field(&name, reason))?;
        Ok(config)
    }

    /// Checks every numeric field before anything is computed.
    fn validate(&self) -> Result<(), (String, String)> {
        for (name, v) in [("grid.steps", self.steps), ("grid.loop_points", self.loop_points)] {
            if v < 8 || v % 2 != 0 {
                return Err((name.into(), format!("must be an even number of at least 8, got {v}")));
            }
        }
        if self.angle_points == 0 {
            return Err(("grid.angle_points".into(), "must be positive".into()));
        }
        for (name, v) in [
            ("tolerance.phase", self.phase_tolerance),
            ("tolerance.cyclicity", self.cyclicity_threshold),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err((name.into(), format!("must be positive, got {v}")));
            }
        }
        let model = |section: &str, e: geophase::Error| match e {
            geophase::Error::InvalidParameter { field, reason } => (format!("{section}.{field}"), reason),
            geophase::Error::DegenerateMixingAngle { .. } => {
                (format!("{section}.epsilon, {section}.chi"), e.to_string())
            }
            geophase::Error::StaticFieldMisuse => (format!("{section}.omega_o"), e.to_string()),
            other => (section.to_string(), other.to_string()),
        };
        match self.experiment {
            Experiment::Spin => self.spin.validate().map_err(|e| model("spin", e)),
            Experiment::GaugeSweep | Experiment::Convergence => {
                self.spin.validate().map_err(|e| model("spin", e))?;
                self.ring.validate().map_err(|e| model("ring", e))
            }
            Experiment::RingRotating => {
                self.ring.validate().map_err(|e| model("ring", e))?;
                if self.ring.omega_o == 0.0 {
                    return Err(model("ring", geophase::Error::StaticFieldMisuse));
                }
                Ok(())
            }
            Experiment::DirectSum => {
                self.ring.validate().map_err(|e| model("ring", e))?;
                if self.ring.n_levels.len() < 2 {
                    return Err((
                        "ring.n_levels".into(),
                        "a superposition needs at least two blocks".into(),
                    ));
                }
                Ok(())
            }
            Experiment::RingStatic | Experiment::RingAction => self.ring.validate().map_err(|e| model("ring", e)),
        }
    }
}
