//! JSON form of a measurement plan:
//! `{"entries": [{"label", "theta_L", "phi_L", "weight"}, ..]}`.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use trijm_core::ion::{MeasurementPlan, PlanEntry};
use trijm_core::qubit::PulseParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub entries: Vec<PlanFileEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFileEntry {
    pub label: String,
    #[serde(rename = "theta_L")]
    pub theta_l: f64,
    #[serde(rename = "phi_L")]
    pub phi_l: f64,
    pub weight: f64,
}

impl From<&MeasurementPlan> for PlanFile {
    fn from(p: &MeasurementPlan) -> Self {
        PlanFile {
            entries: p
                .entries
                .iter()
                .map(|e| PlanFileEntry { label: e.label.clone(), theta_l: e.pulse.theta, phi_l: e.pulse.phi, weight: e.weight })
                .collect(),
        }
    }
}

impl PlanFile {
    /// Converts to a validated plan.
    pub fn to_plan(&self) -> Result<MeasurementPlan> {
        let plan = MeasurementPlan {
            entries: self
                .entries
                .iter()
                .map(|e| PlanEntry { label: e.label.clone(), pulse: PulseParams::new(e.theta_l, e.phi_l), weight: e.weight })
                .collect(),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn read_plan(path: &Path) -> Result<MeasurementPlan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading plan {}", path.display()))?;
    let file: PlanFile = serde_json::from_str(&text).with_context(|| format!("parsing plan {}", path.display()))?;
    file.to_plan().with_context(|| format!("validating plan {}", path.display()))
}
