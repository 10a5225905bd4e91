//! JSON run configuration.
//!
//! ```json
//! {
//!   "system": { "two_qubit": { "loop_a": { "omega_z": 1.5, "omega_1": 1.0, "omega": 1.0 },
//!                              "omega_b": 0.0, "coupling_j": 0.4 } },
//!   "conjugate": { "kind": "identical_invariant", "omega_z_offset": 0.0 },
//!   "sequence": [ { "loop": "C" }, { "loop": "C_bar" }, { "pi_pulse": { "target": "b", "axis": "x" } } ],
//!   "sweep": { "parameter": "omega", "values": [1.0, 0.5, 0.25] },
//!   "output": { "format": "text" }
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use lrphase::{
    ConjugateRule, LoopParameter, LoopSpec, SequenceElement, SequenceSpec, TwoQubitSpec,
};
use lrphase::{PulseAxis, Spin};
use serde::{Deserialize, Serialize};

use crate::{CliError, Format};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub conjugate: ConjugateRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<SequenceEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Loop(LoopSpec),
    TwoQubit(TwoQubitSpec),
}

impl SystemConfig {
    /// The loop driving spin a.
    pub fn primary_loop(&self) -> LoopSpec {
        match self {
            SystemConfig::Loop(l) => *l,
            SystemConfig::TwoQubit(spec) => spec.loop_a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceEntry {
    Loop(LoopRef),
    PiPulse { target: Spin, axis: PulseAxis },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LoopRef {
    Named(LoopName),
    Explicit(LoopSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoopName {
    #[serde(rename = "C")]
    Original,
    #[serde(rename = "C_bar")]
    Conjugate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: LoopParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn two_qubit(&self) -> Option<TwoQubitSpec> {
        match self.system {
            SystemConfig::TwoQubit(spec) => Some(spec),
            SystemConfig::Loop(_) => None,
        }
    }

    /// The configured sequence with named loops resolved, or the default
    /// four-loop sequence `[C, C̄, π_x(b), C, C̄, π_x(b)]`.
    pub fn resolved_sequence(&self) -> Result<SequenceSpec, CliError> {
        let c = self.system.primary_loop();
        let c_bar = self.conjugate.apply(&c)?;
        let Some(entries) = &self.sequence else {
            let default = SequenceSpec::default_four_loop(&c);
            return Ok(
                if c_bar == lrphase::model::identical_invariant_conjugate(&c) {
                    default
                } else {
                    swap_conjugate(&default, &c, &c_bar)?
                },
            );
        };
        let elements = entries
            .iter()
            .map(|e| match e {
                SequenceEntry::Loop(LoopRef::Named(LoopName::Original)) => SequenceElement::Loop(c),
                SequenceEntry::Loop(LoopRef::Named(LoopName::Conjugate)) => {
                    SequenceElement::Loop(c_bar)
                }
                SequenceEntry::Loop(LoopRef::Explicit(l)) => SequenceElement::Loop(*l),
                SequenceEntry::PiPulse { target, axis } => SequenceElement::PiPulse {
                    target: *target,
                    axis: *axis,
                },
            })
            .collect();
        Ok(SequenceSpec::new(elements)?)
    }
}

fn swap_conjugate(
    seq: &SequenceSpec,
    c: &LoopSpec,
    c_bar: &LoopSpec,
) -> Result<SequenceSpec, CliError> {
    let elements = seq
        .elements()
        .iter()
        .map(|e| match e {
            SequenceElement::Loop(l) if l != c => SequenceElement::Loop(*c_bar),
            other => *other,
        })
        .collect();
    Ok(SequenceSpec::new(elements)?)
}
