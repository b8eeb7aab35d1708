//! JSON interchange documents.
//!
//! ```json
//! { "format_version": "1", "kind": "embedding", "payload": { ... },
//!   "provenance": { "command_line": "...", "seed": 0, "artifact_version": "0.1.0" } }
//! ```
//!
//! Loading is two-stage: [`Document::parse`] checks syntax and shape only, so
//! that a structurally sound but mathematically broken object can still be
//! diagnosed; [`Document::validate`] then checks the kind's invariants.
//! Reals are written in shortest round-trip form.

use serde::{Deserialize, Serialize};

use crate::bounds::MarginReport;
use crate::compiler::{ClassicalSmpProtocol, OneWayProtocol, VectorSystem};
use crate::problems::HamParityReport;
use crate::projections::DistortionReport;
use crate::sim::{FingerprintProtocol, RunReport};
use crate::{Error, Realization, Result, Seed, SignMatrix, ThresholdEmbedding};

pub const FORMAT_VERSION: &str = "1";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub format_version: String,
    #[serde(flatten)]
    pub body: Payload,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    SignMatrix(SignMatrix),
    Embedding(ThresholdEmbedding),
    Realization(Realization),
    VectorSystem(VectorSystem),
    Protocol(Protocol),
    Report(Report),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Protocol {
    Smp(ClassicalSmpProtocol),
    OneWay(OneWayProtocol),
    Fingerprint(FingerprintProtocol),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum Report {
    Margin(MarginReport),
    Simulation(SimulationReport),
    Distortion(DistortionReport),
    Verify(VerifyReport),
    Ham(HamParityReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command_line: String,
    pub seed: Seed,
    pub artifact_version: String,
    /// Intermediate objects of a multi-stage pipeline, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    /// Swap-test copies for error 1/3 at these thresholds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    /// `2^{2c}` for a compiled `c`-bit protocol, constant omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotic_repetitions: Option<f64>,
}

impl Stage {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Stage {
            name: name.into(),
            dim,
            delta0: None,
            delta1: None,
            repetitions: None,
            asymptotic_repetitions: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub eps: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub qubits_per_copy: u32,
    pub copies: usize,
    /// `2·q·r`.
    pub total_qubits: u64,
    pub run: RunReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub valid: bool,
    pub unit_norms: bool,
    /// First vector off the unit sphere, e.g. `"alpha 3"`.
    pub first_non_unit: Option<String>,
    /// First pair violating its inequality (threshold embeddings), or the pair attaining the margin.
    pub offending_pair: Option<(usize, usize)>,
    /// Embeddings: `δ0 − max ⟨α,β⟩²` over 0-pairs.
    pub zero_side_slack: Option<f64>,
    /// Embeddings: `min ⟨α,β⟩² − δ1` over 1-pairs.
    pub one_side_slack: Option<f64>,
    /// Realizations: achieved `min M_xy⟨α_x, β_y⟩`.
    pub achieved_margin: Option<f64>,
}

impl Provenance {
    pub fn new(command_line: impl Into<String>, seed: Seed) -> Self {
        Provenance {
            command_line: command_line.into(),
            seed,
            artifact_version: ARTIFACT_VERSION.into(),
            stages: Vec::new(),
        }
    }
}

impl Document {
    pub fn new(body: Payload, provenance: Provenance) -> Self {
        Document {
            format_version: FORMAT_VERSION.into(),
            body,
            provenance,
        }
    }

    /// Syntax and shape only.
    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            Payload::SignMatrix(_) => "sign_matrix",
            Payload::Embedding(_) => "embedding",
            Payload::Realization(_) => "realization",
            Payload::VectorSystem(_) => "vector_system",
            Payload::Protocol(_) => "protocol",
            Payload::Report(_) => "report",
        }
    }

    /// Invariants of the payload, plus the format version.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Shape {
                what: "document",
                detail: format!("unsupported format_version {:?}", self.format_version),
            });
        }
        match &self.body {
            Payload::SignMatrix(m) => m.validate(),
            Payload::Embedding(e) => e.validate(),
            Payload::Realization(r) => r.validate(),
            Payload::VectorSystem(v) => v.validate(),
            Payload::Protocol(Protocol::Smp(p)) => p.validate(),
            Payload::Protocol(Protocol::OneWay(p)) => p.validate(),
            Payload::Protocol(Protocol::Fingerprint(p)) => p.validate(),
            Payload::Report(_) => Ok(()),
        }
    }
}
