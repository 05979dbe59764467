//! Ergonomic scoring of scenarios and trajectories: accessibility, visibility,
//! posture and fatigue.

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{angles_collide, Environment};
use crate::kinematics::{ChainModel, Gaze, JointConfig, LinkSegment};
use crate::planner::{plan_soo, Outcome, Trajectory};
use crate::scenario::{LoadModel, Scenario};

/// Total rejected start draws allowed across all accessibility samples.
pub const MAX_START_REJECTIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accessibility {
    /// Runs that reached the destination.
    pub successes: usize,
    /// Collision-free starts actually found.
    pub sampled: usize,
    pub requested: usize,
}

impl Accessibility {
    pub fn under_sampled(&self) -> bool {
        self.sampled < self.requested
    }
}

/// Seeded collision-free start postures, uniform within the joint limits.
///
/// Each sample slot draws from its own ChaCha stream, so slot `i` gets the
/// same start whenever that start stays collision-free.
pub fn sample_starts(chain: &ChainModel, env: &Environment, count: usize, seed: u64) -> Vec<JointConfig> {
    let mut rejections = 0usize;
    let mut scratch: Vec<LinkSegment> = Vec::new();
    let mut out = Vec::with_capacity(count);
    'slots: for slot in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(slot as u64);
        loop {
            let angles: Vec<f64> = chain
                .joints()
                .iter()
                .map(|j| rng.random_range(j.limit_lo..=j.limit_hi))
                .collect();
            if !angles_collide(chain, &angles, env, &mut scratch) {
                out.push(JointConfig::new(angles));
                break;
            }
            rejections += 1;
            if rejections >= MAX_START_REJECTIONS {
                break 'slots;
            }
        }
    }
    out
}

/// Number of sampled starts from which greedy descent reaches the destination.
pub fn accessibility(scenario: &Scenario, samples: usize, seed: u64) -> Result<Accessibility> {
    accessibility_with(scenario, samples, seed, Execution::default())
}

pub fn accessibility_with(scenario: &Scenario, samples: usize, seed: u64, exec: Execution) -> Result<Accessibility> {
    if samples == 0 {
        return Err(Error::invalid("accessibility needs at least one sample"));
    }
    scenario.validate_parameters()?;
    let starts = sample_starts(&scenario.chain, &scenario.env, samples, seed);
    let base = Point3::from(scenario.chain.base_isometry().translation.vector);
    let unreachable = (scenario.destination - base).norm() > scenario.chain.reach() + scenario.epsilon;
    let successes = if unreachable {
        0
    } else {
        exec.map(&starts, |start| {
            let s = Scenario {
                start: start.clone(),
                ..scenario.clone()
            };
            matches!(plan_soo(&s), Ok((t, _)) if t.outcome() == Some(Outcome::Success))
        })
        .into_iter()
        .filter(|ok| *ok)
        .count()
    };
    Ok(Accessibility {
        successes,
        sampled: starts.len(),
        requested: samples,
    })
}

/// Mean normalised deviation of each joint from the middle of its range:
/// 0 with every joint centred, 1 with every joint at a limit.
pub fn posture_score(chain: &ChainModel, q: &JointConfig) -> f64 {
    debug_assert_eq!(q.len(), chain.dof());
    posture_score_angles(chain, q.angles())
}

pub(crate) fn posture_score_angles(chain: &ChainModel, angles: &[f64]) -> f64 {
    let sum: f64 = chain
        .joints()
        .iter()
        .zip(angles)
        .map(|(j, a)| {
            let neutral = j.neutral();
            let span = (j.limit_hi - neutral).abs().max((neutral - j.limit_lo).abs());
            ((a - neutral).abs() / span).min(1.0)
        })
        .sum();
    sum / chain.dof() as f64
}

/// Gaze origin and forward direction at `angles`.
pub fn gaze_ray(chain: &ChainModel, gaze: &Gaze, angles: &[f64]) -> (Point3<f64>, Vector3<f64>) {
    let frames = chain.joint_frames(angles);
    let origin = chain.link_segments(angles)[gaze.joint].p1;
    let forward = frames[gaze.joint].rotation * Vector3::from(gaze.axis).normalize();
    (origin, forward)
}

pub(crate) fn visible_angles(
    chain: &ChainModel,
    gaze: &Gaze,
    angles: &[f64],
    target: &Point3<f64>,
    env: &Environment,
    scratch: &mut Vec<LinkSegment>,
) -> bool {
    chain.link_segments_into(angles, scratch);
    let origin = scratch[gaze.joint].p1;
    let frame = chain.joint_frames(angles)[gaze.joint];
    let forward = frame.rotation * Vector3::from(gaze.axis).normalize();
    let to_target = target - origin;
    let len = to_target.norm();
    if len > 0.0 {
        let cos = (forward.dot(&to_target) / len).clamp(-1.0, 1.0);
        if cos.acos() > gaze.half_angle {
            return false;
        }
    }
    let sight = LinkSegment {
        p0: origin,
        p1: *target,
        radius: 0.0,
    };
    !env.segment_collides(&sight)
}

/// 1.0 when the target lies inside the gaze cone with an unobstructed sight
/// line, else 0.0.
pub fn visibility(chain: &ChainModel, q: &JointConfig, target: &Point3<f64>, env: &Environment) -> Result<f64> {
    chain.check_dimension(q)?;
    let gaze = chain
        .gaze()
        .ok_or_else(|| Error::Unsupported("chain has no gaze joint".into()))?;
    let vis = visible_angles(chain, gaze, q.angles(), target, env, &mut Vec::new());
    Ok(if vis { 1.0 } else { 0.0 })
}

/// Residual muscle capacity, as a fraction of MVC, after holding each load
/// for `step_duration`: capacity decays as `C <- C * exp(-rate * load/mvc * dt)`.
pub fn fatigue_residual<I>(loads: I, rate: f64, mvc: f64, step_duration: f64) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::invalid("fatigue rate must be non-negative"));
    }
    if !(mvc > 0.0 && mvc.is_finite()) {
        return Err(Error::invalid("MVC must be positive"));
    }
    if !(step_duration >= 0.0 && step_duration.is_finite()) {
        return Err(Error::invalid("step duration must be non-negative"));
    }
    let mut capacity = 1.0f64;
    for load in loads {
        if load < 0.0 || !load.is_finite() {
            return Err(Error::invalid(format!("negative or non-finite load {load}")));
        }
        if load > mvc {
            return Err(Error::invalid(format!("load {load} exceeds MVC {mvc}")));
        }
        capacity *= (-rate * (load / mvc) * step_duration).exp();
    }
    Ok(capacity)
}

/// Fatigue over a trajectory, one load sample per stored posture.
pub fn fatigue(traj_len: usize, model: &LoadModel) -> Result<f64> {
    fatigue_residual(
        (0..traj_len).map(|i| model.profile.at(i)),
        model.rate,
        model.mvc,
        model.step_duration,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDetail {
    pub step: usize,
    pub posture_score: f64,
    pub visible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub accessibility_n: usize,
    pub accessibility_sampled: usize,
    pub accessibility_requested: usize,
    /// Fraction of postures that see the destination; absent without a gaze joint.
    pub visibility: Option<f64>,
    pub posture_score: f64,
    pub fatigue_residual: f64,
    pub outcome: Option<Outcome>,
    /// False unless the trajectory reached the destination.
    pub complete: bool,
    pub steps: usize,
    pub per_step: Option<Vec<StepDetail>>,
}

impl EvaluationReport {
    pub fn under_sampled(&self) -> bool {
        self.accessibility_sampled < self.accessibility_requested
    }
}

/// Options for [`evaluate_postures`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EvaluateOptions {
    pub execution: Execution,
    pub per_step: bool,
    /// Overrides the scenario's accessibility seed.
    pub seed: Option<u64>,
    /// Overrides the scenario's accessibility sample count.
    pub samples: Option<usize>,
}

pub fn evaluate(scenario: &Scenario, traj: &Trajectory) -> Result<EvaluationReport> {
    let postures: Vec<JointConfig> = traj.postures().cloned().collect();
    evaluate_postures(scenario, &postures, traj.outcome(), EvaluateOptions::default())
}

/// Evaluates a realised posture sequence, e.g. one read back from a
/// trajectory table.
pub fn evaluate_postures(
    scenario: &Scenario,
    postures: &[JointConfig],
    outcome: Option<Outcome>,
    opts: EvaluateOptions,
) -> Result<EvaluationReport> {
    if postures.is_empty() {
        return Err(Error::invalid("trajectory has no postures"));
    }
    for q in postures {
        scenario.chain.check_dimension(q)?;
    }
    let cfg = scenario.accessibility_config();
    let acc = accessibility_with(
        scenario,
        opts.samples.unwrap_or(cfg.samples),
        opts.seed.unwrap_or(cfg.seed),
        opts.execution,
    )?;

    let chain = &scenario.chain;
    let mut scratch = Vec::new();
    let details: Vec<StepDetail> = postures
        .iter()
        .enumerate()
        .map(|(i, q)| StepDetail {
            step: i,
            posture_score: posture_score_angles(chain, q.angles()),
            visible: chain
                .gaze()
                .map(|g| visible_angles(chain, g, q.angles(), &scenario.destination, &scenario.env, &mut scratch)),
        })
        .collect();
    let n = details.len() as f64;
    let posture = details.iter().map(|d| d.posture_score).sum::<f64>() / n;
    let visibility = chain
        .gaze()
        .map(|_| details.iter().filter(|d| d.visible == Some(true)).count() as f64 / n);
    let fatigue_residual = fatigue(postures.len(), &scenario.load_model())?;

    Ok(EvaluationReport {
        accessibility_n: acc.successes,
        accessibility_sampled: acc.sampled,
        accessibility_requested: acc.requested,
        visibility,
        posture_score: posture,
        fatigue_residual,
        outcome,
        complete: outcome == Some(Outcome::Success),
        steps: postures.len(),
        per_step: opts.per_step.then_some(details),
    })
}

/// One member of a user population: the scenario chain scaled by `scale`,
/// or an explicit chain (also scaled).
#[derive(Debug, Clone, PartialEq)]
pub struct Mannequin {
    pub name: String,
    pub scale: f64,
    pub chain: Option<ChainModel>,
}

impl Mannequin {
    pub fn scaled(name: impl Into<String>, scale: f64) -> Self {
        Mannequin {
            name: name.into(),
            scale,
            chain: None,
        }
    }

    pub fn chain_for(&self, scenario: &Scenario) -> Result<ChainModel> {
        self.chain.as_ref().unwrap_or(&scenario.chain).scaled(self.scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOutcome {
    Planned(Outcome),
    /// The start posture is invalid or collides for this mannequin.
    Infeasible,
}

impl std::fmt::Display for SweepOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepOutcome::Planned(o) => o.fmt(f),
            SweepOutcome::Infeasible => f.write_str("infeasible"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mannequin: Mannequin,
    pub outcome: SweepOutcome,
    pub trajectory: Option<Trajectory>,
    pub report: Option<EvaluationReport>,
}

pub fn population_sweep(scenario: &Scenario, population: &[Mannequin]) -> Result<Vec<SweepRow>> {
    population_sweep_with(scenario, population, Execution::default())
}

/// Plans and evaluates the scenario once per mannequin, in batch mode. Rows
/// follow the input order.
pub fn population_sweep_with(scenario: &Scenario, population: &[Mannequin], exec: Execution) -> Result<Vec<SweepRow>> {
    if population.is_empty() {
        return Err(Error::invalid("population is empty"));
    }
    exec.map(population, |m| sweep_one(scenario, m, exec))
        .into_iter()
        .collect()
}

fn sweep_one(scenario: &Scenario, m: &Mannequin, exec: Execution) -> Result<SweepRow> {
    let chain = m.chain_for(scenario)?;
    let s = Scenario {
        chain,
        ..scenario.clone()
    };
    if s.validate().is_err() {
        return Ok(SweepRow {
            mannequin: m.clone(),
            outcome: SweepOutcome::Infeasible,
            trajectory: None,
            report: None,
        });
    }
    let (traj, _) = plan_soo(&s)?;
    let postures: Vec<JointConfig> = traj.postures().cloned().collect();
    let report = evaluate_postures(
        &s,
        &postures,
        traj.outcome(),
        EvaluateOptions {
            execution: exec,
            ..EvaluateOptions::default()
        },
    )?;
    Ok(SweepRow {
        mannequin: m.clone(),
        outcome: SweepOutcome::Planned(traj.outcome().expect("finished run")),
        trajectory: Some(traj),
        report: Some(report),
    })
}
