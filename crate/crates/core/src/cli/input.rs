use crate::gallery::{generate, GeneratorSpec};
use crate::grid::{Point, SampledSet};
use serde::{Deserialize, Serialize};

/// Explicit samples with a caller-supplied density bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsEntry {
    pub points: Vec<Vec<f64>>,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetEntry {
    Generator(GeneratorSpec),
    Points(PointsEntry),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Construction {
    pub s: u64,
}

/// On-disk description of the sets to verify.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDescriptionFile {
    pub dim: usize,
    pub sets: Vec<SetEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolutions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SetDescriptionFile {
    /// Parses a document. Untagged set entries only report "no variant
    /// matched", so the failing entry is re-parsed on its own to surface
    /// the real cause next to the document position.
    pub fn parse(text: &str) -> Result<Self, String> {
        match serde_json::from_str::<SetDescriptionFile>(text) {
            Ok(doc) => Ok(doc),
            Err(err) => {
                let mut msg = format!("line {} column {}: {err}", err.line(), err.column());
                if let Some(cause) = entry_cause(text) {
                    msg.push_str(&format!(" ({cause})"));
                }
                Err(msg)
            }
        }
    }

    /// The sets, with a single set expanded to `dim` copies.
    pub fn materialize(&self) -> Result<Vec<SampledSet>, String> {
        if self.sets.is_empty() {
            return Err("document lists no sets".into());
        }
        let mut out = Vec::with_capacity(self.sets.len());
        for (i, entry) in self.sets.iter().enumerate() {
            let set = match entry {
                SetEntry::Generator(spec) => generate(spec).map_err(|e| format!("sets[{i}]: {e}"))?.set,
                SetEntry::Points(p) => {
                    let points = p.points.iter().cloned().map(Point::new).collect();
                    SampledSet::new(self.dim, points, p.density).map_err(|e| format!("sets[{i}]: {e}"))?
                }
            };
            if set.dim != self.dim {
                return Err(format!("sets[{i}] has dimension {} but dim is {}", set.dim, self.dim));
            }
            out.push(set);
        }
        if out.len() == 1 && self.dim > 1 {
            out = vec![out[0].clone(); self.dim];
        }
        Ok(out)
    }
}

fn entry_cause(text: &str) -> Option<String> {
    let value: serde_json::Value = serde_json::from_str(text).ok()?;
    let sets = value.get("sets")?.as_array()?;
    for (i, entry) in sets.iter().enumerate() {
        let generator = serde_json::from_value::<GeneratorSpec>(entry.clone());
        let points = serde_json::from_value::<PointsEntry>(entry.clone());
        if let (Err(g), Err(p)) = (generator, points) {
            let err = if entry.get("kind").is_some() { g } else { p };
            return Some(format!("sets[{i}]: {err}"));
        }
    }
    None
}
