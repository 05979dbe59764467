use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::lattice::LatticeConfig;
use crate::error::{Error, Result};
use crate::kinematics::JointConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Stuck,
    Aborted,
    BudgetExhausted,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Stuck => "stuck",
            Outcome::Aborted => "aborted",
            Outcome::BudgetExhausted => "budget_exhausted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "success" => Outcome::Success,
            "stuck" => Outcome::Stuck,
            "aborted" => Outcome::Aborted,
            "budget_exhausted" => Outcome::BudgetExhausted,
            _ => return None,
        })
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Initial posture of the run.
    Start,
    /// Greedy move to a neighbour.
    Step,
    /// First posture of a new epoch opened by an intervention.
    Intervention,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Start => "start",
            StepKind::Step => "step",
            StepKind::Intervention => "intervention",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "start" => StepKind::Start,
            "step" => StepKind::Step,
            "intervention" => StepKind::Intervention,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub index: usize,
    pub epoch: usize,
    pub offsets: Vec<i64>,
    pub angles: JointConfig,
    pub distance: f64,
    pub kind: StepKind,
}

/// Span of the trajectory over which the lattice base and step are fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub start_step: usize,
    pub base: Arc<JointConfig>,
    pub dq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    steps: Vec<Step>,
    epochs: Vec<Epoch>,
    outcome: Option<Outcome>,
    visited: HashSet<Vec<i64>>,
}

impl Trajectory {
    /// Trajectory holding only the start posture, at the origin of a fresh
    /// lattice.
    pub fn starting_at(start: JointConfig, dq: f64, distance: f64) -> Self {
        let base = Arc::new(start);
        let origin = LatticeConfig::origin(Arc::clone(&base), dq);
        let mut t = Trajectory {
            steps: Vec::new(),
            epochs: vec![Epoch {
                start_step: 0,
                base,
                dq,
            }],
            outcome: None,
            visited: HashSet::new(),
        };
        t.push_step(&origin, distance, StepKind::Start);
        t
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &Step {
        self.steps.last().expect("trajectory always holds its start")
    }

    pub fn postures(&self) -> impl Iterator<Item = &JointConfig> {
        self.steps.iter().map(|s| &s.angles)
    }

    pub fn current_epoch(&self) -> &Epoch {
        self.epochs.last().expect("trajectory always has an epoch")
    }

    /// Lattice representation of a stored step.
    pub fn lattice_config(&self, step: usize) -> LatticeConfig {
        let s = &self.steps[step];
        let e = &self.epochs[s.epoch];
        LatticeConfig::new(Arc::clone(&e.base), e.dq, s.offsets.clone())
    }

    pub fn current(&self) -> LatticeConfig {
        self.lattice_config(self.steps.len() - 1)
    }

    /// Whether `candidate`'s offsets already occur in the current epoch.
    pub fn contains_in_current_epoch(&self, candidate: &LatticeConfig) -> Result<bool> {
        let e = self.current_epoch();
        let probe = LatticeConfig::origin(Arc::clone(&e.base), e.dq);
        if !candidate.same_lattice(&probe) {
            return Err(Error::invalid(
                "candidate lattice differs from the trajectory's current epoch",
            ));
        }
        Ok(self.visited.contains(candidate.offsets()))
    }

    /// Appends an ordinary step at `cfg`, which must lie on the current
    /// epoch's lattice.
    pub fn record_step(&mut self, cfg: &LatticeConfig, distance: f64) -> Result<()> {
        if self.outcome.is_some() {
            return Err(Error::invalid("trajectory is already finished"));
        }
        if !cfg.same_lattice(&self.current()) {
            return Err(Error::invalid("step lies off the current epoch's lattice"));
        }
        self.push_step(cfg, distance, StepKind::Step);
        Ok(())
    }

    pub(crate) fn push_step(&mut self, cfg: &LatticeConfig, distance: f64, kind: StepKind) {
        let index = self.steps.len();
        self.visited.insert(cfg.offsets().to_vec());
        self.steps.push(Step {
            index,
            epoch: self.epochs.len() - 1,
            offsets: cfg.offsets().to_vec(),
            angles: cfg.config(),
            distance,
            kind,
        });
    }

    /// Opens a new epoch at `base` and records it as the next step.
    pub(crate) fn push_epoch(&mut self, base: JointConfig, dq: f64, distance: f64) -> LatticeConfig {
        let base = Arc::new(base);
        self.epochs.push(Epoch {
            start_step: self.steps.len(),
            base: Arc::clone(&base),
            dq,
        });
        self.visited.clear();
        let origin = LatticeConfig::origin(base, dq);
        self.push_step(&origin, distance, StepKind::Intervention);
        origin
    }

    pub(crate) fn finish(&mut self, outcome: Outcome) {
        self.outcome = Some(outcome);
    }
}
