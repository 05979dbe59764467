//! Comma-separated trajectory tables.
//!
//! ```text
//! step,epoch,q0,q1,q2,distance,event
//! 0,0,0,0.5,-0.25,41.2,start
//! 1,0,0.1,0.5,-0.25,40.7,step:success
//! ```
//!
//! The last row's event carries the run outcome after a colon.

use super::{fmt_f64, ParseError};
use crate::kinematics::JointConfig;
use crate::planner::{Outcome, StepKind, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub epoch: usize,
    pub angles: JointConfig,
    pub distance: f64,
    pub kind: StepKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub rows: Vec<TrajectoryRow>,
    pub outcome: Option<Outcome>,
}

impl TrajectoryTable {
    pub fn dof(&self) -> usize {
        self.rows.first().map_or(0, |r| r.angles.len())
    }

    pub fn postures(&self) -> Vec<JointConfig> {
        self.rows.iter().map(|r| r.angles.clone()).collect()
    }
}

impl From<&Trajectory> for TrajectoryTable {
    fn from(t: &Trajectory) -> Self {
        TrajectoryTable {
            rows: t
                .steps()
                .iter()
                .map(|s| TrajectoryRow {
                    step: s.index,
                    epoch: s.epoch,
                    angles: s.angles.clone(),
                    distance: s.distance,
                    kind: s.kind,
                })
                .collect(),
            outcome: t.outcome(),
        }
    }
}

pub fn write_trajectory(traj: &Trajectory) -> String {
    write_trajectory_rows(&TrajectoryTable::from(traj))
}

pub fn write_trajectory_rows(table: &TrajectoryTable) -> String {
    let n = table.dof();
    let mut out = String::from("step,epoch");
    for i in 0..n {
        out.push_str(&format!(",q{i}"));
    }
    out.push_str(",distance,event\n");
    let last = table.rows.len().saturating_sub(1);
    for (i, r) in table.rows.iter().enumerate() {
        out.push_str(&format!("{},{}", r.step, r.epoch));
        for a in r.angles.angles() {
            out.push(',');
            out.push_str(&fmt_f64(*a));
        }
        out.push(',');
        out.push_str(&fmt_f64(r.distance));
        out.push(',');
        out.push_str(r.kind.as_str());
        if i == last {
            if let Some(o) = table.outcome {
                out.push(':');
                out.push_str(o.as_str());
            }
        }
        out.push('\n');
    }
    out
}

pub fn read_trajectory(text: &str) -> Result<TrajectoryTable, ParseError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(ParseError::Syntax {
        line: 1,
        message: "empty trajectory table".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let n = cols.len().checked_sub(4).ok_or(ParseError::Syntax {
        line: 1,
        message: "header too short".into(),
    })?;
    let expected: Vec<String> = ["step".to_string(), "epoch".to_string()]
        .into_iter()
        .chain((0..n).map(|i| format!("q{i}")))
        .chain(["distance".to_string(), "event".to_string()])
        .collect();
    if cols != expected {
        return Err(ParseError::Syntax {
            line: 1,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }

    let mut rows = Vec::new();
    let mut outcome = None;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if outcome.is_some() {
            return Err(ParseError::Syntax {
                line: lineno,
                message: "row after the final outcome".into(),
            });
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n + 4 {
            return Err(ParseError::Syntax {
                line: lineno,
                message: format!("expected {} fields, found {}", n + 4, fields.len()),
            });
        }
        let bad = |col: &str, msg: String| ParseError::InvalidValue {
            key: col.to_string(),
            line: Some(lineno),
            message: msg,
        };
        let int = |i: usize| fields[i].parse::<usize>().map_err(|e| bad(&expected[i], e.to_string()));
        let float = |i: usize| fields[i].parse::<f64>().map_err(|e| bad(&expected[i], e.to_string()));
        let angles = (0..n).map(|i| float(2 + i)).collect::<Result<Vec<_>, _>>()?;
        let (kind, tail) = match fields[n + 3].split_once(':') {
            Some((k, o)) => (k, Some(o)),
            None => (fields[n + 3], None),
        };
        let kind = StepKind::parse(kind).ok_or_else(|| bad("event", format!("unknown event `{kind}`")))?;
        if let Some(o) = tail {
            outcome = Some(Outcome::parse(o).ok_or_else(|| bad("event", format!("unknown outcome `{o}`")))?);
        }
        rows.push(TrajectoryRow {
            step: int(0)?,
            epoch: int(1)?,
            angles: JointConfig::new(angles),
            distance: float(n + 2)?,
            kind,
        });
    }
    if rows.is_empty() {
        return Err(ParseError::Syntax {
            line: 2,
            message: "trajectory has no rows".into(),
        });
    }
    Ok(TrajectoryTable { rows, outcome })
}
