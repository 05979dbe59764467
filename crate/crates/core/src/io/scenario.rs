use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::{from_toml, to_toml, ParseError, FORMAT_VERSION};
use crate::geometry::{posture_collides, Environment, Obstacle};
use crate::kinematics::{planar_chain, BasePose, ChainModel, Gaze, JointConfig, JointSpec, Tip};
use crate::scenario::{
    AccessibilityConfig, LoadModel, LoadProfile, NeighborhoodMode, Scenario, DEFAULT_MAX_ITERATIONS,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    version: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    epsilon: f64,
    dq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_iterations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<NeighborhoodMode>,
    start: Vec<f64>,
    destination: Vec<f64>,
    chain: ChainDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    obstacles: Vec<Obstacle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    loads: Option<LoadsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    accessibility: Option<AccessibilityDoc>,
}

/// Either the `planar` shorthand or an explicit joint table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ChainDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end_effector: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planar: Option<PlanarDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<BasePose>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tip: Option<Tip>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gaze: Option<Gaze>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    joints: Vec<JointSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanarDoc {
    lengths: Vec<f64>,
    #[serde(default)]
    radius: f64,
    limits: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadsDoc {
    profile: LoadProfile,
    #[serde(default = "one")]
    rate: f64,
    #[serde(default = "one")]
    mvc: f64,
    #[serde(default = "default_step_duration")]
    step_duration: f64,
}

fn one() -> f64 {
    1.0
}

fn default_step_duration() -> f64 {
    LoadModel::default().step_duration
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AccessibilityDoc {
    samples: usize,
    seed: u64,
}

impl ChainDoc {
    pub(crate) fn into_chain(self) -> Result<ChainModel, ParseError> {
        let bad = |e: crate::error::Error| ParseError::invalid("chain", e.to_string());
        let chain = match (self.planar, self.joints.is_empty()) {
            (Some(_), false) => {
                return Err(ParseError::invalid(
                    "chain",
                    "give either `planar` or `joints`, not both",
                ))
            }
            (None, true) => {
                return Err(ParseError::MissingKey {
                    key: "chain.joints".into(),
                    line: None,
                })
            }
            (Some(p), true) => {
                if self.tip.is_some() {
                    return Err(ParseError::invalid(
                        "chain.tip",
                        "planar chains derive their tip from `lengths`",
                    ));
                }
                let limits: Vec<(f64, f64)> = p.limits.iter().map(|l| (l[0], l[1])).collect();
                let c = planar_chain(&p.lengths, p.radius, &limits).map_err(bad)?;
                let ee = self.end_effector.unwrap_or(c.dof() - 1);
                ChainModel::new(
                    c.joints().to_vec(),
                    c.tip(),
                    self.base.unwrap_or_default(),
                    ee,
                    self.gaze,
                )
                .map_err(bad)?
            }
            (None, false) => {
                let ee = self.end_effector.unwrap_or(self.joints.len() - 1);
                ChainModel::new(
                    self.joints,
                    self.tip.unwrap_or_default(),
                    self.base.unwrap_or_default(),
                    ee,
                    self.gaze,
                )
                .map_err(bad)?
            }
        };
        Ok(chain)
    }

    pub(crate) fn from_chain(chain: &ChainModel) -> Self {
        ChainDoc {
            end_effector: Some(chain.end_effector_joint()),
            planar: None,
            base: Some(chain.base()),
            tip: Some(chain.tip()),
            gaze: chain.gaze().copied(),
            joints: chain.joints().to_vec(),
        }
    }
}

fn point(key: &str, v: &[f64]) -> Result<Point3<f64>, ParseError> {
    match v {
        [x, y] => Ok(Point3::new(*x, *y, 0.0)),
        [x, y, z] => Ok(Point3::new(*x, *y, *z)),
        _ => Err(ParseError::invalid(
            key,
            format!("expected 2 or 3 coordinates, found {}", v.len()),
        )),
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let doc: ScenarioDoc = from_toml(text)?;
    let chain = doc.chain.into_chain()?;
    let env = Environment::new(doc.obstacles).map_err(|e| ParseError::invalid("obstacles", e.to_string()))?;
    let destination = point("destination", &doc.destination)?;
    if !destination.coords.iter().all(|v| v.is_finite()) {
        return Err(ParseError::invalid("destination", "coordinates must be finite"));
    }
    if !(doc.epsilon > 0.0 && doc.epsilon.is_finite()) {
        return Err(ParseError::invalid("epsilon", "must be positive"));
    }
    if !(doc.dq > 0.0 && doc.dq.is_finite()) {
        return Err(ParseError::invalid("dq", "must be positive"));
    }
    let max_iterations = match doc.max_iterations {
        None => DEFAULT_MAX_ITERATIONS,
        Some(0) => return Err(ParseError::invalid("max_iterations", "must be positive")),
        Some(n) => n as usize,
    };
    let start = JointConfig::new(doc.start);
    chain
        .validate_config(&start)
        .map_err(|e| ParseError::invalid("start", e.to_string()))?;
    if posture_collides(&chain, &start, &env) {
        return Err(ParseError::invalid("start", "start posture collides with an obstacle"));
    }
    let mode = doc.mode.unwrap_or(NeighborhoodMode::default_for(chain.dof()));
    let loads = doc.loads.map(|l| LoadModel {
        profile: l.profile,
        rate: l.rate,
        mvc: l.mvc,
        step_duration: l.step_duration,
    });
    let accessibility = doc.accessibility.map(|a| AccessibilityConfig {
        samples: a.samples,
        seed: a.seed,
    });
    let scenario = Scenario {
        name: doc.name.unwrap_or_default(),
        chain,
        env,
        start,
        destination,
        epsilon: doc.epsilon,
        dq: doc.dq,
        max_iterations,
        mode,
        loads,
        accessibility,
    };
    if let Some(l) = &scenario.loads {
        l.validate().map_err(|e| ParseError::invalid("loads", e.to_string()))?;
    }
    if scenario.accessibility.is_some_and(|a| a.samples == 0) {
        return Err(ParseError::invalid("accessibility", "samples must be at least 1"));
    }
    if scenario
        .accessibility
        .is_some_and(|a| a.seed > AccessibilityConfig::MAX_SEED)
    {
        return Err(ParseError::invalid(
            "accessibility",
            "seed must fit in a signed 64-bit integer",
        ));
    }
    scenario
        .validate()
        .map_err(|e| ParseError::invalid("scenario", e.to_string()))?;
    Ok(scenario)
}

/// Writes the scenario with an explicit joint table; parsing the result
/// yields an equal scenario.
pub fn write_scenario(s: &Scenario) -> String {
    let d = s.destination;
    let destination = if d.z == 0.0 {
        vec![d.x, d.y]
    } else {
        vec![d.x, d.y, d.z]
    };
    let doc = ScenarioDoc {
        version: FORMAT_VERSION,
        name: Some(s.name.clone()),
        epsilon: s.epsilon,
        dq: s.dq,
        max_iterations: Some(s.max_iterations as u64),
        mode: Some(s.mode),
        start: s.start.angles().to_vec(),
        destination,
        chain: ChainDoc::from_chain(&s.chain),
        obstacles: s.env.obstacles.clone(),
        loads: s.loads.as_ref().map(|l| LoadsDoc {
            profile: l.profile.clone(),
            rate: l.rate,
            mvc: l.mvc,
            step_duration: l.step_duration,
        }),
        accessibility: s.accessibility.map(|a| AccessibilityDoc {
            samples: a.samples,
            seed: a.seed,
        }),
    };
    to_toml(&doc)
}
