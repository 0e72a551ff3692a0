//! Versioned JSON parameter files.
//!
//! ```json
//! { "version": 1, "k": [1.01, 1.23345], "w": [0.5, 0.5],
//!   "meta": { "scheme": { "base": 2, "depth": 1 }, "method": "random", "seed": 7 } }
//! ```
//!
//! `meta` and `report` are optional. `fit` writes the resulting error report
//! into `report`; readers ignore it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::ErrorReport;
use crate::approx::ParameterSet;
use crate::error::{contract, Result};
use crate::geometry::Scheme;

pub const PARAM_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub version: u32,
    pub k: Vec<f64>,
    pub w: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<ParamMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ErrorReport>,
}

impl ParamFile {
    pub fn from_params(params: &ParameterSet) -> Self {
        ParamFile {
            version: PARAM_FILE_VERSION,
            k: params.widths().to_vec(),
            w: params.weights().to_vec(),
            meta: params.scheme().map(|s| ParamMeta { scheme: Some(s), ..ParamMeta::default() }),
            report: None,
        }
    }

    pub fn to_params(&self) -> Result<ParameterSet> {
        if self.version != PARAM_FILE_VERSION {
            return Err(contract(format!(
                "unsupported parameter file version {} (expected {PARAM_FILE_VERSION})",
                self.version
            )));
        }
        let p = ParameterSet::new(self.k.clone(), self.w.clone())?;
        Ok(match self.meta.as_ref().and_then(|m| m.scheme) {
            Some(s) => p.with_scheme(s),
            None => p,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| contract(format!("malformed parameter file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter file serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| contract(format!("cannot read {}: {e}", path.display())))?;
        ParamFile::from_json(&text)
    }
}

/// Parses the inline form `k=1.01,1.23345[;w=0.5,0.5]`. Weights default to uniform.
pub fn parse_inline(spec: &str) -> Result<ParameterSet> {
    let mut k = None;
    let mut w = None;
    for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| contract(format!("expected key=values, got '{part}'")))?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| contract(format!("bad number '{v}': {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        match key.trim() {
            "k" => k = Some(values),
            "w" => w = Some(values),
            other => return Err(contract(format!("unknown inline key '{other}'"))),
        }
    }
    let k = k.ok_or_else(|| contract("inline parameters need k=..."))?;
    match w {
        Some(w) => ParameterSet::new(k, w),
        None => ParameterSet::uniform(k),
    }
}
