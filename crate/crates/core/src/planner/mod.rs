//! Greedy lattice descent of the end-effector distance, with an optional
//! intervention hook for escaping local minima and a weighted multi-criteria
//! variant.
//!
//! Each iteration enumerates the lattice neighbourhood of the current
//! posture, drops colliding candidates, and moves to the one with the lowest
//! objective. The run stops with [`Outcome::Stuck`] when no collision-free
//! neighbour strictly improves the objective or the best one repeats a
//! posture of the current epoch. With an [`InterventionSource`] attached the
//! planner instead asks for a new posture or step and carries on in a fresh
//! epoch; it never perturbs itself.

mod events;
mod lattice;
mod search;
mod trajectory;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

pub use events::{
    CandidateVerdict, ChannelSource, Intervention, InterventionSource, LocalMinimum, MinimumKind, PlannerEvent,
    ScriptedSource,
};
pub use lattice::LatticeConfig;
pub use search::{detect_local_minimum, neighborhood_deltas, neighbors, select_best};
pub use trajectory::{Epoch, Outcome, Step, StepKind, Trajectory};

use crate::error::{Error, Result};
use crate::evaluation::{posture_score_angles, visible_angles};
use crate::geometry::{angles_collide, posture_collides};
use crate::kinematics::{ChainModel, LinkSegment};
use crate::scenario::Scenario;

pub const DEFAULT_MAX_INTERVENTIONS: usize = 32;

/// Weights of the multi-criteria objective. The distance term is divided by
/// the start distance so the weights do not depend on scenario scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub distance: f64,
    pub posture: f64,
    pub visibility: f64,
}

impl Weights {
    pub const DISTANCE_ONLY: Weights = Weights {
        distance: 1.0,
        posture: 0.0,
        visibility: 0.0,
    };

    pub fn validate(&self, chain: &ChainModel) -> Result<()> {
        let all = [self.distance, self.posture, self.visibility];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        if self.distance <= 0.0 {
            return Err(Error::invalid("distance weight must be positive"));
        }
        if self.visibility > 0.0 && chain.gaze().is_none() {
            return Err(Error::invalid("visibility weight needs a chain with a gaze joint"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    Distance,
    Weighted(Weights),
}

/// Configured planner run over one scenario.
#[derive(Debug, Clone)]
pub struct Planner<'a> {
    scenario: &'a Scenario,
    objective: Objective,
    max_interventions: usize,
}

impl<'a> Planner<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Planner {
            scenario,
            objective: Objective::Distance,
            max_interventions: DEFAULT_MAX_INTERVENTIONS,
        }
    }

    pub fn objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn max_interventions(mut self, n: usize) -> Self {
        self.max_interventions = n;
        self
    }

    /// Runs to completion, reporting every event to `observer` as it happens.
    /// Without a source, a local minimum ends the run as stuck.
    pub fn run(
        &self,
        mut source: Option<&mut dyn InterventionSource>,
        observer: &mut dyn FnMut(&PlannerEvent),
    ) -> Result<Trajectory> {
        let s = self.scenario;
        s.validate()?;
        if let Objective::Weighted(w) = &self.objective {
            w.validate(&s.chain)?;
        }
        let chain = &s.chain;
        let deltas = neighborhood_deltas(chain.dof(), s.mode)?;
        let start_distance = self.distance(s.start.angles());
        let cost = CostModel {
            scenario: s,
            objective: self.objective,
            scale: if start_distance > 0.0 { start_distance } else { 1.0 },
        };

        let mut traj = Trajectory::starting_at(s.start.clone(), s.dq, start_distance);
        let mut current = traj.current();
        let mut current_distance = start_distance;
        let mut scratch = Scratch::default();
        let mut current_cost = cost.eval(s.start.angles(), start_distance, &mut scratch);
        observer(&stepped(&traj));

        let mut requests = 0usize;
        let outcome = loop {
            if current_distance <= s.epsilon {
                break Outcome::Success;
            }
            if traj.len() > s.max_iterations {
                break Outcome::BudgetExhausted;
            }

            let verdicts = self.evaluate_neighbors(&current, &deltas, &cost, &mut scratch);
            let best = verdicts
                .iter()
                .filter(|v| !v.verdict.collides)
                .fold(None::<&Evaluated>, |best, v| match best {
                    Some(b) if v.verdict.cost >= b.verdict.cost => Some(b),
                    _ => Some(v),
                });

            let kind = match best {
                None => Some(MinimumKind::NoFreeNeighbor),
                Some(b) if b.verdict.cost.partial_cmp(&current_cost) != Some(std::cmp::Ordering::Less) => {
                    Some(MinimumKind::NoImprovement)
                }
                Some(b) if detect_local_minimum(&traj, &b.config)? => Some(MinimumKind::Revisit),
                Some(_) => None,
            };

            let Some(kind) = kind else {
                let b = best.expect("improving candidate exists");
                traj.push_step(&b.config, b.verdict.distance, StepKind::Step);
                current = b.config.clone();
                current_distance = b.verdict.distance;
                current_cost = b.verdict.cost;
                observer(&stepped(&traj));
                continue;
            };

            let last = traj.last();
            let minimum = LocalMinimum {
                step: last.index,
                kind,
                angles: last.angles.clone(),
                offsets: last.offsets.clone(),
                dq: current.dq(),
                distance: current_distance,
                cost: current_cost,
                candidates: verdicts.into_iter().map(|v| v.verdict).collect(),
            };
            observer(&PlannerEvent::LocalMinimum(minimum.clone()));

            let Some(src) = source.as_deref_mut() else {
                break Outcome::Stuck;
            };
            let mut applied = None;
            while requests < self.max_interventions {
                requests += 1;
                let iv = src.request(&minimum);
                match self.check_intervention(&iv) {
                    Ok(()) => {
                        src.applied(&iv);
                        applied = Some(iv);
                        break;
                    }
                    Err(reason) => src.rejected(&iv, &reason),
                }
            }
            let Some(iv) = applied else {
                break Outcome::Stuck;
            };
            let (base, dq) = match &iv {
                Intervention::Abort => {
                    observer(&PlannerEvent::InterventionApplied {
                        step: traj.last().index,
                        intervention: iv,
                    });
                    break Outcome::Aborted;
                }
                Intervention::SetStep { dq } => (traj.last().angles.clone(), *dq),
                Intervention::SetPosture { angles } => (angles.clone(), current.dq()),
            };
            current_distance = self.distance(base.angles());
            current_cost = cost.eval(base.angles(), current_distance, &mut scratch);
            current = traj.push_epoch(base, dq, current_distance);
            observer(&PlannerEvent::InterventionApplied {
                step: traj.last().index,
                intervention: iv,
            });
            observer(&stepped(&traj));
        };

        traj.finish(outcome);
        observer(&PlannerEvent::Finished {
            step: traj.last().index,
            outcome,
        });
        Ok(traj)
    }

    /// Runs and collects the events.
    pub fn run_collect(&self, source: Option<&mut dyn InterventionSource>) -> Result<(Trajectory, Vec<PlannerEvent>)> {
        let mut events = Vec::new();
        let traj = self.run(source, &mut |e| events.push(e.clone()))?;
        Ok((traj, events))
    }

    fn distance(&self, angles: &[f64]) -> f64 {
        end_effector_distance(&self.scenario.chain, angles, &self.scenario.destination)
    }

    fn evaluate_neighbors(
        &self,
        current: &LatticeConfig,
        deltas: &[Vec<i8>],
        cost: &CostModel<'_>,
        scratch: &mut Scratch,
    ) -> Vec<Evaluated> {
        let chain = &self.scenario.chain;
        let mut out = Vec::with_capacity(deltas.len());
        let mut angles = Vec::with_capacity(chain.dof());
        for d in deltas {
            let config = current.shifted(d);
            config.angles_into(&mut angles);
            if !chain.within_limits(&angles) {
                continue;
            }
            let collides = angles_collide(chain, &angles, &self.scenario.env, &mut scratch.segments);
            let distance = self.distance(&angles);
            let c = if collides {
                f64::INFINITY
            } else {
                cost.eval(&angles, distance, scratch)
            };
            out.push(Evaluated {
                verdict: CandidateVerdict {
                    delta: d.iter().map(|x| i64::from(*x)).collect(),
                    collides,
                    distance,
                    cost: c,
                },
                config,
            });
        }
        out
    }

    fn check_intervention(&self, iv: &Intervention) -> std::result::Result<(), String> {
        let s = self.scenario;
        match iv {
            Intervention::Abort => Ok(()),
            Intervention::SetStep { dq } => {
                if dq.is_finite() && *dq > 0.0 {
                    Ok(())
                } else {
                    Err(format!("step must be positive, got {dq}"))
                }
            }
            Intervention::SetPosture { angles } => {
                s.chain.validate_config(angles).map_err(|e| e.to_string())?;
                if posture_collides(&s.chain, angles, &s.env) {
                    Err("posture collides with an obstacle".into())
                } else {
                    Ok(())
                }
            }
        }
    }
}

struct Evaluated {
    verdict: CandidateVerdict,
    config: LatticeConfig,
}

#[derive(Default)]
struct Scratch {
    segments: Vec<LinkSegment>,
}

struct CostModel<'a> {
    scenario: &'a Scenario,
    objective: Objective,
    scale: f64,
}

impl CostModel<'_> {
    fn eval(&self, angles: &[f64], distance: f64, scratch: &mut Scratch) -> f64 {
        match self.objective {
            Objective::Distance => distance,
            Objective::Weighted(w) => {
                let s = self.scenario;
                let mut c = w.distance * (distance / self.scale);
                if w.posture > 0.0 {
                    c += w.posture * posture_score_angles(&s.chain, angles);
                }
                if w.visibility > 0.0 {
                    let gaze = s.chain.gaze().expect("validated");
                    let vis = visible_angles(&s.chain, gaze, angles, &s.destination, &s.env, &mut scratch.segments);
                    c += w.visibility * if vis { 0.0 } else { 1.0 };
                }
                c
            }
        }
    }
}

fn stepped(traj: &Trajectory) -> PlannerEvent {
    let s = traj.last();
    PlannerEvent::Stepped {
        step: s.index,
        epoch: s.epoch,
        angles: s.angles.clone(),
        distance: s.distance,
    }
}

pub(crate) fn end_effector_distance(chain: &ChainModel, angles: &[f64], dest: &Point3<f64>) -> f64 {
    (chain.end_effector_at(angles) - dest).norm()
}

/// Greedy distance descent; stops at the first local minimum.
pub fn plan_soo(scenario: &Scenario) -> Result<(Trajectory, Vec<PlannerEvent>)> {
    Planner::new(scenario).run_collect(None)
}

/// Greedy distance descent that asks `source` for an intervention at every
/// local minimum.
pub fn plan_interactive(
    scenario: &Scenario,
    source: &mut dyn InterventionSource,
) -> Result<(Trajectory, Vec<PlannerEvent>)> {
    Planner::new(scenario).run_collect(Some(source))
}

/// Greedy descent of the weighted distance/posture/visibility objective.
pub fn plan_moo(scenario: &Scenario, weights: Weights) -> Result<(Trajectory, Vec<PlannerEvent>)> {
    Planner::new(scenario)
        .objective(Objective::Weighted(weights))
        .run_collect(None)
}
