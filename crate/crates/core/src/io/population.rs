//! Population files.
//!
//! ```toml
//! version = 1
//!
//! [[mannequin]]
//! name = "small"
//! scale = 0.9
//! ```
//!
//! A mannequin may carry its own `chain` table (same schema as a scenario's);
//! otherwise the scenario chain is used. Either way `scale` is applied.

use serde::{Deserialize, Serialize};

use super::{from_toml, to_toml, ChainDoc, ParseError, FORMAT_VERSION};
use crate::evaluation::Mannequin;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationDoc {
    version: i64,
    #[serde(default)]
    mannequin: Vec<MannequinDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MannequinDoc {
    name: String,
    #[serde(default = "unit")]
    scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chain: Option<ChainDoc>,
}

fn unit() -> f64 {
    1.0
}

/// Parses a population. An empty list is accepted here; sweeping it is not.
pub fn parse_population(text: &str) -> Result<Vec<Mannequin>, ParseError> {
    let doc: PopulationDoc = from_toml(text)?;
    doc.mannequin
        .into_iter()
        .map(|m| {
            if !(m.scale > 0.0 && m.scale.is_finite()) {
                return Err(ParseError::invalid(
                    "scale",
                    format!("mannequin `{}`: must be positive", m.name),
                ));
            }
            Ok(Mannequin {
                name: m.name,
                scale: m.scale,
                chain: m.chain.map(ChainDoc::into_chain).transpose()?,
            })
        })
        .collect()
}

pub fn write_population(population: &[Mannequin]) -> String {
    let doc = PopulationDoc {
        version: FORMAT_VERSION,
        mannequin: population
            .iter()
            .map(|m| MannequinDoc {
                name: m.name.clone(),
                scale: m.scale,
                chain: m.chain.as_ref().map(ChainDoc::from_chain),
            })
            .collect(),
    };
    to_toml(&doc)
}
