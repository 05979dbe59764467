use std::collections::VecDeque;
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::trajectory::Outcome;
use crate::kinematics::JointConfig;

/// External change applied when the planner reports a local minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Intervention {
    SetPosture { angles: JointConfig },
    SetStep { dq: f64 },
    Abort,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimumKind {
    /// Every neighbour collides or leaves the joint limits.
    NoFreeNeighbor,
    /// The best collision-free neighbour does not lower the objective.
    NoImprovement,
    /// The best neighbour is a posture already visited in this epoch.
    Revisit,
}

/// What the planner saw for one neighbour of a stuck posture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateVerdict {
    pub delta: Vec<i64>,
    pub collides: bool,
    pub distance: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMinimum {
    pub step: usize,
    pub kind: MinimumKind,
    pub angles: JointConfig,
    pub offsets: Vec<i64>,
    pub dq: f64,
    pub distance: f64,
    pub cost: f64,
    pub candidates: Vec<CandidateVerdict>,
}

impl LocalMinimum {
    /// No collision-free neighbour has a strictly lower cost.
    pub fn no_improving_neighbor(&self) -> bool {
        self.candidates.iter().all(|c| c.collides || c.cost >= self.cost)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlannerEvent {
    Stepped {
        step: usize,
        epoch: usize,
        angles: JointConfig,
        distance: f64,
    },
    LocalMinimum(LocalMinimum),
    InterventionApplied {
        step: usize,
        intervention: Intervention,
    },
    Finished {
        step: usize,
        outcome: Outcome,
    },
}

impl PlannerEvent {
    pub fn step(&self) -> usize {
        match self {
            PlannerEvent::Stepped { step, .. }
            | PlannerEvent::InterventionApplied { step, .. }
            | PlannerEvent::Finished { step, .. } => *step,
            PlannerEvent::LocalMinimum(m) => m.step,
        }
    }
}

/// Supplier of interventions. The planner blocks in [`request`] until one is
/// available.
///
/// [`request`]: InterventionSource::request
pub trait InterventionSource {
    fn request(&mut self, event: &LocalMinimum) -> Intervention;

    /// The last intervention was refused; the planner will call `request` again.
    fn rejected(&mut self, _intervention: &Intervention, _reason: &str) {}

    fn applied(&mut self, _intervention: &Intervention) {}
}

/// Replays a fixed list of interventions in order; an exhausted script aborts.
#[derive(Debug, Clone, Default)]
pub struct ScriptedSource {
    queue: VecDeque<Intervention>,
    rejections: Vec<(Intervention, String)>,
}

impl ScriptedSource {
    pub fn new(script: impl IntoIterator<Item = Intervention>) -> Self {
        ScriptedSource {
            queue: script.into_iter().collect(),
            rejections: Vec::new(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.queue.len()
    }

    pub fn rejections(&self) -> &[(Intervention, String)] {
        &self.rejections
    }
}

impl InterventionSource for ScriptedSource {
    fn request(&mut self, _event: &LocalMinimum) -> Intervention {
        self.queue.pop_front().unwrap_or(Intervention::Abort)
    }

    fn rejected(&mut self, intervention: &Intervention, reason: &str) {
        self.rejections.push((intervention.clone(), reason.to_string()));
    }
}

/// Waits on a channel for each intervention. A closed channel or an expired
/// timeout aborts the run.
pub struct ChannelSource {
    rx: Receiver<Intervention>,
    timeout: Option<Duration>,
}

impl ChannelSource {
    pub fn new(rx: Receiver<Intervention>, timeout: Option<Duration>) -> Self {
        ChannelSource { rx, timeout }
    }
}

impl InterventionSource for ChannelSource {
    fn request(&mut self, _event: &LocalMinimum) -> Intervention {
        match self.timeout {
            None => self.rx.recv().unwrap_or(Intervention::Abort),
            Some(t) => match self.rx.recv_timeout(t) {
                Ok(iv) => iv,
                Err(RecvTimeoutError::Timeout | RecvTimeoutError::Disconnected) => Intervention::Abort,
            },
        }
    }
}
