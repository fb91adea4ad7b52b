//! JSON documents read and written by the command-line tool.
//!
//! Rationals travel as strings (`"1/2"`), complex numbers as `[re, im]`
//! pairs. Loaders accept the documents the tool itself emits, so outputs
//! can be fed back in: a `bell` output works wherever a scenario is
//! expected, a behavior wherever a model is, and a `search` output
//! wherever a realization is.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bell::{behavior_to_model, bell_scenario, BehaviorFile, BellBehavior};
use crate::error::{Error, Result};
use crate::exactmath::rational::{format_rational, parse_rational};
use crate::quantum::{QuantumRealization, RealizationFile};
use crate::scenario::{ContextualityScenario, ProbabilisticModel, ScenarioFile};

/// `{"values": {label: "num/den"}}`, optionally carrying its scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioFile>,
    pub values: BTreeMap<String, String>,
}

impl ModelFile {
    pub fn from_model(h: &ContextualityScenario, p: &ProbabilisticModel) -> Self {
        Self {
            scenario: None,
            values: h
                .labels()
                .iter()
                .cloned()
                .zip(p.values().iter().map(format_rational))
                .collect(),
        }
    }

    /// Aligns values to the scenario's vertex order; labels must match
    /// exactly.
    pub fn to_model(&self, h: &ContextualityScenario) -> Result<ProbabilisticModel> {
        if let Some(extra) = self.values.keys().find(|l| h.vertex_index(l).is_none()) {
            return Err(Error::UnknownVertex(extra.clone()));
        }
        let values = h
            .labels()
            .iter()
            .map(|l| match self.values.get(l) {
                Some(v) => parse_rational(v),
                None => Err(Error::Parse(format!("model has no value for vertex {l:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProbabilisticModel::new(values))
    }
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

/// A scenario file, or any document with a `scenario` member holding one.
pub fn scenario_from_value(v: Value) -> Result<ContextualityScenario> {
    let v = match v {
        Value::Object(mut map) if !map.contains_key("vertices") && map.contains_key("scenario") => {
            map.remove("scenario").expect("checked")
        }
        other => other,
    };
    ContextualityScenario::from_file(from_value(v, "scenario")?)
}

/// A model file, or a behavior file mapped through the Bell labeling.
pub fn model_from_value(h: &ContextualityScenario, v: Value) -> Result<ProbabilisticModel> {
    let is_behavior = v.get("table").is_some();
    if is_behavior {
        let behavior = BellBehavior::from_file(&from_value::<BehaviorFile>(v, "behavior")?)?;
        let structure = behavior.structure().clone();
        let (bell, _) = bell_scenario(&structure)?;
        let p = behavior_to_model(&structure, &behavior)?;
        ModelFile::from_model(&bell, &p).to_model(h)
    } else {
        from_value::<ModelFile>(v, "model")?.to_model(h)
    }
}

/// A realization file, or a document with a `realization` member.
pub fn realization_from_value(h: &ContextualityScenario, v: Value) -> Result<QuantumRealization> {
    let v = match v {
        Value::Object(mut map) if !map.contains_key("rho") && map.contains_key("realization") => {
            map.remove("realization").expect("checked")
        }
        other => other,
    };
    let file: RealizationFile = from_value(v, "realization")?;
    QuantumRealization::from_file(h, &file)
}
