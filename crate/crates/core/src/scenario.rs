use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{posture_collides, Environment};
use crate::kinematics::{ChainModel, JointConfig};

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// How the lattice neighbourhood of a posture is enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborhoodMode {
    /// One joint moves by one step.
    AxisOnly,
    /// Every joint moves by -1, 0 or +1 steps simultaneously.
    Combinatorial,
}

impl NeighborhoodMode {
    pub const MAX_COMBINATORIAL_DOF: usize = 8;

    pub fn default_for(dof: usize) -> Self {
        if dof <= 4 {
            NeighborhoodMode::Combinatorial
        } else {
            NeighborhoodMode::AxisOnly
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LoadProfile {
    Constant(f64),
    /// Load of each trajectory step; steps past the end repeat the last value.
    PerStep(Vec<f64>),
}

impl LoadProfile {
    pub fn at(&self, step: usize) -> f64 {
        match self {
            LoadProfile::Constant(v) => *v,
            LoadProfile::PerStep(v) => v.get(step).or(v.last()).copied().unwrap_or(0.0),
        }
    }
}

/// Muscle load carried through a trajectory, normalised by `mvc`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadModel {
    pub profile: LoadProfile,
    pub rate: f64,
    pub mvc: f64,
    pub step_duration: f64,
}

impl LoadModel {
    pub fn validate(&self) -> Result<()> {
        let in_range = |x: &f64| (0.0..=self.mvc).contains(x);
        let loads_ok = match &self.profile {
            LoadProfile::Constant(v) => in_range(v),
            LoadProfile::PerStep(v) => !v.is_empty() && v.iter().all(in_range),
        };
        let finite = self.mvc.is_finite() && self.rate.is_finite() && self.step_duration.is_finite();
        if !finite || self.mvc <= 0.0 || self.rate < 0.0 || self.step_duration < 0.0 || !loads_ok {
            return Err(Error::InvalidScenario(
                "loads must lie in [0, mvc] with mvc > 0, rate >= 0 and step_duration >= 0".into(),
            ));
        }
        Ok(())
    }
}

impl Default for LoadModel {
    fn default() -> Self {
        LoadModel {
            profile: LoadProfile::Constant(0.5),
            rate: 1.0,
            mvc: 1.0,
            step_duration: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessibilityConfig {
    pub samples: usize,
    pub seed: u64,
}

impl AccessibilityConfig {
    /// Documents store integers as signed 64-bit values.
    pub const MAX_SEED: u64 = i64::MAX as u64;
}

impl Default for AccessibilityConfig {
    fn default() -> Self {
        AccessibilityConfig { samples: 16, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub chain: ChainModel,
    pub env: Environment,
    pub start: JointConfig,
    pub destination: Point3<f64>,
    pub epsilon: f64,
    pub dq: f64,
    pub max_iterations: usize,
    pub mode: NeighborhoodMode,
    pub loads: Option<LoadModel>,
    pub accessibility: Option<AccessibilityConfig>,
}

impl Scenario {
    /// Scenario with default iteration budget and neighbourhood mode.
    pub fn new(
        name: impl Into<String>,
        chain: ChainModel,
        env: Environment,
        start: JointConfig,
        destination: Point3<f64>,
        epsilon: f64,
        dq: f64,
    ) -> Self {
        let mode = NeighborhoodMode::default_for(chain.dof());
        Scenario {
            name: name.into(),
            chain,
            env,
            start,
            destination,
            epsilon,
            dq,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            mode,
            loads: None,
            accessibility: None,
        }
    }

    /// Checks everything except the start posture's collision status.
    pub fn validate_parameters(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.dq > 0.0 && self.dq.is_finite()) {
            return Err(Error::InvalidScenario(format!("dq must be positive, got {}", self.dq)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidScenario("max_iterations must be positive".into()));
        }
        if !self.destination.coords.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidScenario("destination must be finite".into()));
        }
        if let Some(l) = &self.loads {
            l.validate()?;
        }
        if let Some(a) = &self.accessibility {
            if a.samples == 0 {
                return Err(Error::InvalidScenario("accessibility samples must be >= 1".into()));
            }
            if a.seed > AccessibilityConfig::MAX_SEED {
                return Err(Error::InvalidScenario(
                    "accessibility seed must fit in a signed 64-bit integer".into(),
                ));
            }
        }
        self.chain
            .validate_config(&self.start)
            .map_err(|e| Error::InvalidScenario(format!("start posture: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_parameters()?;
        if posture_collides(&self.chain, &self.start, &self.env) {
            return Err(Error::InvalidScenario("start posture collides with an obstacle".into()));
        }
        Ok(())
    }

    pub fn load_model(&self) -> LoadModel {
        self.loads.clone().unwrap_or_default()
    }

    pub fn accessibility_config(&self) -> AccessibilityConfig {
        self.accessibility.unwrap_or_default()
    }

    pub fn is_planar(&self) -> bool {
        self.chain.is_planar() && self.env.is_planar() && self.destination.z == 0.0
    }
}
