//! Run configuration: scenario presets plus a flat `key = value` format.
//!
//! ```text
//! # Eckart scattering with a coarser trajectory cadence
//! scenario = eckart
//! trajectory_stride = 20
//! ```
//!
//! `scenario` and `regime` are applied first wherever they appear; every
//! other key then overrides the preset in order. Unknown keys are errors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::DEFAULT_ONSET_THRESHOLD;
use crate::bohmian::QuantumPotentialStencil;
use crate::error::{Error, Result};
use crate::field::{GaussianParams, DEFAULT_AMPLITUDE_FLOOR};
use crate::grid::Grid;
use crate::potential::PotentialSpec;
use crate::propagator::{Laplacian, PropagationSchedule, Scheme};

/// Number of time steps of the reference explicit runs.
pub const FULL_STEPS: usize = 10_000_000;

pub const FREE_DURATION: f64 = 0.4;
pub const ECKART_DURATION: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Free,
    Eckart,
    Custom,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Free => "free",
            Scenario::Eckart => "eckart",
            Scenario::Custom => "custom",
        })
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "free" => Ok(Scenario::Free),
            "eckart" => Ok(Scenario::Eckart),
            "custom" => Ok(Scenario::Custom),
            _ => Err(format!("expected free, eckart or custom, got `{s}`")),
        }
    }
}

/// `Desk` runs the implicit scheme with 10^5 steps; `Full` the explicit
/// scheme with 10^7 steps and trajectories moved every step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Desk,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub regime: Regime,
    pub grid: Grid,
    pub packet: GaussianParams,
    pub potential: PotentialSpec,
    pub schedule: PropagationSchedule,
    /// Field steps between trajectory updates.
    pub trajectory_stride: usize,
    pub n_traj: usize,
    pub half_span: f64,
    pub quantum_potential_stencil: QuantumPotentialStencil,
    pub split: f64,
    pub onset_threshold: f64,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn preset(scenario: Scenario) -> Self {
        Settings::preset(scenario)
            .validate()
            .expect("built-in presets are valid")
    }

    /// Same run with the classical potential switched off.
    pub fn free_baseline(&self) -> Self {
        Self {
            potential: PotentialSpec::Free,
            ..self.clone()
        }
    }

    /// Applies `key = value` assignments on top of this configuration's
    /// scenario preset.
    pub fn from_assignments<'a>(
        default_scenario: Scenario,
        assignments: impl IntoIterator<Item = Assignment<'a>>,
    ) -> Result<Self> {
        let assignments: Vec<Assignment<'a>> = assignments.into_iter().collect();
        for a in &assignments {
            if !KEYS.contains(&a.key) {
                return Err(Error::UnknownKey {
                    location: a.location.clone(),
                    key: a.key.to_string(),
                });
            }
        }
        let mut scenario = default_scenario;
        for a in assignments.iter().filter(|a| a.key == "scenario") {
            scenario = a.parse()?;
        }
        let mut settings = Settings::preset(scenario);
        for a in assignments.iter().filter(|a| a.key == "regime") {
            let regime = match a.value {
                "desk" => Regime::Desk,
                "full" => Regime::Full,
                other => return Err(a.bad(format!("expected desk or full, got `{other}`"))),
            };
            settings.set_regime(regime);
        }
        for a in assignments
            .iter()
            .filter(|a| a.key != "scenario" && a.key != "regime")
        {
            settings.apply(a)?;
        }
        settings.validate()
    }
}

/// One `key = value` pair and where it came from (for error messages).
#[derive(Debug, Clone)]
pub struct Assignment<'a> {
    pub key: &'a str,
    pub value: &'a str,
    pub location: String,
}

impl<'a> Assignment<'a> {
    /// Splits `key=value`.
    pub fn parse_pair(text: &'a str, location: String) -> Result<Self> {
        let (key, value) = text.split_once('=').ok_or_else(|| Error::ConfigParse {
            location: location.clone(),
            reason: format!("expected `key = value`, got `{}`", text.trim()),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::ConfigParse {
                location,
                reason: "empty key or value".into(),
            });
        }
        Ok(Self {
            key,
            value,
            location,
        })
    }

    fn bad(&self, reason: String) -> Error {
        Error::ConfigParse {
            location: self.location.clone(),
            reason: format!("{}: {reason}", self.key),
        }
    }

    fn parse<T: FromStr>(&self) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.value
            .parse()
            .map_err(|e: T::Err| self.bad(e.to_string()))
    }

    fn float(&self) -> Result<f64> {
        let v: f64 = self.parse()?;
        if v.is_nan() {
            return Err(self.bad("NaN is not allowed".into()));
        }
        Ok(v)
    }

    /// `auto` maps to `None`.
    fn auto_float(&self) -> Result<Option<f64>> {
        if self.value == "auto" {
            Ok(None)
        } else {
            self.float().map(Some)
        }
    }
}

/// Parses the text of a config file into assignments; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<Assignment<'_>>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        out.push(Assignment::parse_pair(content, format!("line {}", n + 1))?);
    }
    Ok(out)
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::from_assignments(Scenario::Custom, parse_config(&text)?)
}

const KEYS: &[&str] = &[
    "scenario",
    "regime",
    "q_min",
    "q_max",
    "n_points",
    "dt",
    "n_steps",
    "gamma",
    "q0",
    "p0",
    "potential",
    "v0",
    "beta",
    "qv",
    "scheme",
    "laplacian",
    "quantum_potential_stencil",
    "snapshot_stride",
    "norm_check_stride",
    "trajectory_stride",
    "amplitude_floor",
    "n_traj",
    "half_span",
    "split",
    "onset_threshold",
    "output_dir",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PotentialKind {
    Free,
    Eckart,
}

/// Unvalidated, flat form of [`RunConfig`].
#[derive(Debug, Clone)]
struct Settings {
    scenario: Scenario,
    regime: Regime,
    duration: f64,
    q_min: f64,
    q_max: f64,
    n_points: usize,
    dt: f64,
    n_steps: usize,
    gamma: f64,
    q0: f64,
    p0: f64,
    potential: PotentialKind,
    v0: f64,
    beta: f64,
    qv: f64,
    explicit: bool,
    laplacian: Laplacian,
    stencil: QuantumPotentialStencil,
    snapshot_stride: usize,
    norm_check_stride: usize,
    trajectory_stride: usize,
    amplitude_floor: f64,
    n_traj: usize,
    half_span: Option<f64>,
    split: Option<f64>,
    onset_threshold: f64,
    output_dir: PathBuf,
}

impl Settings {
    fn preset(scenario: Scenario) -> Self {
        let (potential, duration) = match scenario {
            Scenario::Eckart => (PotentialKind::Eckart, ECKART_DURATION),
            Scenario::Free | Scenario::Custom => (PotentialKind::Free, FREE_DURATION),
        };
        let n_steps = 100_000;
        Self {
            scenario,
            regime: Regime::Desk,
            duration,
            q_min: -10.0,
            q_max: 10.0,
            n_points: 2500,
            dt: duration / n_steps as f64,
            n_steps,
            gamma: 2.0,
            q0: -2.0,
            p0: 10.0,
            potential,
            v0: 200.0,
            beta: 20.0,
            qv: 0.0,
            explicit: false,
            laplacian: Laplacian::Compact,
            stencil: QuantumPotentialStencil::FivePoint,
            snapshot_stride: 5_000,
            norm_check_stride: 100,
            trajectory_stride: 10,
            amplitude_floor: DEFAULT_AMPLITUDE_FLOOR,
            n_traj: 19,
            half_span: None,
            split: None,
            onset_threshold: DEFAULT_ONSET_THRESHOLD,
            output_dir: PathBuf::from("out"),
        }
    }

    fn set_regime(&mut self, regime: Regime) {
        self.regime = regime;
        let (steps, explicit, snap, norm, traj) = match regime {
            Regime::Desk => (100_000, false, 5_000, 100, 10),
            Regime::Full => (FULL_STEPS, true, 500_000, 10_000, 1),
        };
        self.n_steps = steps;
        self.dt = self.duration / steps as f64;
        self.explicit = explicit;
        self.snapshot_stride = snap;
        self.norm_check_stride = norm;
        self.trajectory_stride = traj;
    }

    fn apply(&mut self, a: &Assignment<'_>) -> Result<()> {
        match a.key {
            "q_min" => self.q_min = a.float()?,
            "q_max" => self.q_max = a.float()?,
            "n_points" => self.n_points = a.parse()?,
            "dt" => self.dt = a.float()?,
            "n_steps" => self.n_steps = a.parse()?,
            "gamma" => self.gamma = a.float()?,
            "q0" => self.q0 = a.float()?,
            "p0" => self.p0 = a.float()?,
            "potential" => {
                self.potential = match a.value {
                    "free" => PotentialKind::Free,
                    "eckart" => PotentialKind::Eckart,
                    other => return Err(a.bad(format!("expected free or eckart, got `{other}`"))),
                }
            }
            "v0" => self.v0 = a.float()?,
            "beta" => self.beta = a.float()?,
            "qv" => self.qv = a.float()?,
            "scheme" => {
                self.explicit = match a.value {
                    "explicit" => true,
                    "implicit" => false,
                    other => {
                        return Err(a.bad(format!("expected explicit or implicit, got `{other}`")))
                    }
                }
            }
            "laplacian" => {
                self.laplacian = match a.value {
                    "compact" => Laplacian::Compact,
                    "three_point" => Laplacian::ThreePoint,
                    other => {
                        return Err(a.bad(format!("expected compact or three_point, got `{other}`")))
                    }
                }
            }
            "quantum_potential_stencil" => {
                self.stencil = match a.value {
                    "five_point" => QuantumPotentialStencil::FivePoint,
                    "three_point" => QuantumPotentialStencil::ThreePoint,
                    other => {
                        return Err(
                            a.bad(format!("expected five_point or three_point, got `{other}`"))
                        )
                    }
                }
            }
            "snapshot_stride" => self.snapshot_stride = a.parse()?,
            "norm_check_stride" => self.norm_check_stride = a.parse()?,
            "trajectory_stride" => self.trajectory_stride = a.parse()?,
            "amplitude_floor" => self.amplitude_floor = a.float()?,
            "n_traj" => self.n_traj = a.parse()?,
            "half_span" => self.half_span = a.auto_float()?,
            "split" => self.split = a.auto_float()?,
            "onset_threshold" => self.onset_threshold = a.float()?,
            "output_dir" => self.output_dir = PathBuf::from(a.value),
            other => unreachable!("key `{other}` passed the allow-list"),
        }
        Ok(())
    }

    fn validate(self) -> Result<RunConfig> {
        let grid = Grid::new(self.q_min, self.q_max, self.n_points, self.dt, self.n_steps)?;
        let packet = GaussianParams::new(self.gamma, self.q0, self.p0)?;
        let potential = match self.potential {
            PotentialKind::Free => PotentialSpec::Free,
            PotentialKind::Eckart => PotentialSpec::eckart(self.v0, self.beta, self.qv)?,
        };
        let scheme = if self.explicit {
            Scheme::ExplicitFtcs
        } else {
            Scheme::ImplicitCn(self.laplacian)
        };
        let schedule = PropagationSchedule {
            scheme,
            snapshot_stride: self.snapshot_stride,
            norm_check_stride: self.norm_check_stride,
            amplitude_floor: self.amplitude_floor,
        };
        schedule.validate(self.n_steps)?;
        if self.trajectory_stride < 1 || self.trajectory_stride > self.n_steps {
            return Err(Error::invalid(
                "trajectory_stride",
                format!(
                    "must be in 1..={}, got {}",
                    self.n_steps, self.trajectory_stride
                ),
            ));
        }
        if self.n_traj % 2 == 0 {
            return Err(Error::invalid(
                "n_traj",
                format!("must be odd, got {}", self.n_traj),
            ));
        }
        let half_span = self.half_span.unwrap_or(2.0 * packet.delta());
        if !(half_span.is_finite() && half_span > 0.0) {
            return Err(Error::invalid(
                "half_span",
                format!("must be positive, got {half_span}"),
            ));
        }
        if !(grid.contains(packet.q0 - half_span) && grid.contains(packet.q0 + half_span)) {
            return Err(Error::invalid(
                "half_span",
                "ensemble does not fit inside the grid",
            ));
        }
        let split = self.split.unwrap_or(match potential {
            PotentialSpec::Eckart { qv, .. } => qv,
            PotentialSpec::Free => 0.0,
        });
        if !grid.contains(split) {
            return Err(Error::invalid(
                "split",
                format!("{split} is not strictly inside the grid"),
            ));
        }
        if !(self.onset_threshold > 0.0) {
            return Err(Error::invalid("onset_threshold", "must be positive"));
        }
        Ok(RunConfig {
            scenario: self.scenario,
            regime: self.regime,
            grid,
            packet,
            potential,
            schedule,
            trajectory_stride: self.trajectory_stride,
            n_traj: self.n_traj,
            half_span,
            quantum_potential_stencil: self.stencil,
            split,
            onset_threshold: self.onset_threshold,
            output_dir: self.output_dir,
        })
    }
}
