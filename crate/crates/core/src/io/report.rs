//! Machine-readable results of one CLI command.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::EngineTrace;
use crate::evp::{Conclusion, EvpCertificate};
use crate::model::assumptions::AssumptionReport;
use crate::product::ProductCertificate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Certified,
    /// The solver ran but some conclusion is not `holds`.
    Uncertified,
    HypothesisFailed,
    PremiseFailed,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok | Status::Certified => 0,
            Status::Uncertified => 1,
            Status::HypothesisFailed | Status::PremiseFailed => 2,
            Status::InputError => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Evp(Box<EvpCertificate>),
    Product(Box<ProductCertificate>),
}

impl Certificate {
    pub fn conclusions(&self) -> &[Conclusion] {
        match self {
            Certificate::Evp(c) => &c.conclusions,
            Certificate::Product(c) => &c.conclusions,
        }
    }

    pub fn certified(&self) -> bool {
        match self {
            Certificate::Evp(c) => c.certified(),
            Certificate::Product(c) => c.certified(),
        }
    }

    pub fn trace(&self) -> &EngineTrace {
        match self {
            Certificate::Evp(c) => &c.trace,
            Certificate::Product(c) => &c.trace,
        }
    }
}

/// Iteration count and endpoints, enough to audit a run without the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub steps: usize,
    pub start: String,
    pub terminal: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<String>,
    pub status: Status,
    /// Path or builtin name the instance came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<AssumptionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_summary: Option<TraceSummary>,
    pub timing_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Command-specific payload (minima, scalar values, generated files).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

impl Report {
    pub fn new(command: &str, status: Status) -> Self {
        Self {
            command: command.to_string(),
            theorem: None,
            status,
            instance: None,
            assumptions: None,
            certificate: None,
            trace_summary: None,
            timing_ms: 0.0,
            error: None,
            data: None,
        }
    }

    pub fn failure(command: &str, status: Status, error: impl fmt::Display) -> Self {
        let mut r = Self::new(command, status);
        r.error = Some(error.to_string());
        r
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.command)?;
        if let Some(t) = &self.theorem {
            write!(f, " [{t}]")?;
        }
        if let Some(i) = &self.instance {
            write!(f, " on {i}")?;
        }
        let status = serde_json::to_value(self.status).ok();
        let status = status.as_ref().and_then(|v| v.as_str()).unwrap_or("?");
        writeln!(f, ": {status}")?;
        if let Some(e) = &self.error {
            writeln!(f, "  error: {e}")?;
        }
        if let Some(a) = &self.assumptions {
            for (name, v) in a.verdicts() {
                writeln!(f, "  assumption {name}: {v:?}")?;
            }
        }
        if let Some(c) = &self.certificate {
            match c {
                Certificate::Evp(c) => writeln!(f, "  x0 = {}, xhat = {}, d = {}", c.x0, c.xhat, c.distance)?,
                Certificate::Product(c) => writeln!(
                    f,
                    "  start = {}, xhat = {}, yhat = {:?}, d = {}",
                    c.start,
                    c.xhat,
                    c.yhat.coords(),
                    c.distance
                )?,
            }
            for k in c.conclusions() {
                writeln!(f, "  ({}) {:?}: {}", k.name, k.verdict, k.statement)?;
            }
        }
        if let Some(t) = &self.trace_summary {
            writeln!(f, "  trace: {} -> {} in {} steps", t.start, t.terminal, t.steps)?;
        }
        if let Some(d) = &self.data {
            writeln!(f, "  {d}")?;
        }
        write!(f, "  {:.3} ms", self.timing_ms)
    }
}
