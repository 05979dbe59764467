//! Intervention scripts, consumed in order by a scripted source.
//!
//! ```toml
//! version = 1
//!
//! [[intervention]]
//! kind = "set_step"
//! dq = 0.1
//! ```

use serde::{Deserialize, Serialize};

use super::{from_toml, to_toml, ParseError, FORMAT_VERSION};
use crate::planner::Intervention;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptDoc {
    version: i64,
    #[serde(default)]
    intervention: Vec<Intervention>,
}

pub fn parse_script(text: &str) -> Result<Vec<Intervention>, ParseError> {
    let doc: ScriptDoc = from_toml(text)?;
    for iv in &doc.intervention {
        match iv {
            Intervention::SetStep { dq } if !(*dq > 0.0 && dq.is_finite()) => {
                return Err(ParseError::invalid("dq", "must be positive"));
            }
            Intervention::SetPosture { angles } if !angles.angles().iter().all(|a| a.is_finite()) => {
                return Err(ParseError::invalid("angles", "must be finite"));
            }
            _ => {}
        }
    }
    Ok(doc.intervention)
}

pub fn write_script(script: &[Intervention]) -> String {
    to_toml(&ScriptDoc {
        version: FORMAT_VERSION,
        intervention: script.to_vec(),
    })
}
