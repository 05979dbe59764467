//! Scenario fixtures shipped with the crate.
//!
//! The RRR arms share one obstacle layout (two triangles and a block) and
//! differ only in link lengths. `trap` is the longest arm among the same
//! obstacles with a finer step, where the greedy descent stalls; the bundled
//! `setstep01` script releases it. `office_two_women` is a seated desk reach
//! with a gaze joint, paired with a two-person population.

use crate::evaluation::Mannequin;
use crate::io::{parse_population, parse_scenario, parse_script};
use crate::planner::Intervention;
use crate::scenario::Scenario;

pub const RRR_20_10_20: &str = include_str!("../fixtures/rrr_20_10_20.scn");
pub const RRR_20_20_25: &str = include_str!("../fixtures/rrr_20_20_25.scn");
pub const RRR_20_20_40: &str = include_str!("../fixtures/rrr_20_20_40.scn");
pub const TRAP: &str = include_str!("../fixtures/trap.scn");
pub const OFFICE_TWO_WOMEN: &str = include_str!("../fixtures/office_two_women.scn");
pub const OFFICE_POPULATION: &str = include_str!("../fixtures/office_two_women.pop");
pub const SETSTEP01: &str = include_str!("../fixtures/setstep01.ivn");

/// Every scenario fixture as `(file name, text)`.
pub const SCENARIOS: [(&str, &str); 5] = [
    ("rrr_20_10_20.scn", RRR_20_10_20),
    ("rrr_20_20_25.scn", RRR_20_20_25),
    ("rrr_20_20_40.scn", RRR_20_20_40),
    ("trap.scn", TRAP),
    ("office_two_women.scn", OFFICE_TWO_WOMEN),
];

/// Collision-free posture beyond the upper triangle in `trap`; planning
/// resumes from it to success.
pub const TRAP_ESCAPE_POSTURE: [f64; 3] = [-0.5, 1.5, 1.2];

/// Parses a fixture by file name, with or without the `.scn` extension.
pub fn scenario(name: &str) -> Option<Scenario> {
    let name = name.strip_suffix(".scn").unwrap_or(name);
    SCENARIOS
        .iter()
        .find(|(n, _)| n.strip_suffix(".scn") == Some(name))
        .map(|(_, text)| parse_scenario(text).expect("shipped fixtures parse"))
}

pub fn office_population() -> Vec<Mannequin> {
    parse_population(OFFICE_POPULATION).expect("shipped population parses")
}

pub fn setstep01() -> Vec<Intervention> {
    parse_script(SETSTEP01).expect("shipped script parses")
}
