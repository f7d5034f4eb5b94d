use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::file::NetworkFile;
use crate::alignment::{AlignmentReport, DofFit, GapTable};
use crate::capacity::{CapacityReport, LogBase, PowerAllocation};
use crate::classifier::Verdict;
use crate::network::{Relabeling, Violation};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    IoError,
    ValidationError,
    Inseparable,
    NonConvergence,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::IoError => 1,
            Status::ValidationError => 2,
            Status::Inseparable => 3,
            Status::NonConvergence => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EchoOptions {
    pub log_base: LogBase,
    pub tolerance: f64,
    pub max_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_grid: Option<Vec<f64>>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationSummary {
    pub total: f64,
    pub per_carrier: Vec<f64>,
    pub allocation: PowerAllocation,
    pub kkt_residual: f64,
    pub iterations: usize,
}

impl From<&CapacityReport> for AllocationSummary {
    fn from(r: &CapacityReport) -> Self {
        Self {
            total: r.total,
            per_carrier: r.per_carrier.clone(),
            allocation: r.allocation.clone(),
            kkt_residual: r.kkt_residual,
            iterations: r.iterations,
        }
    }
}

/// Machine-readable result of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: Status,
    pub exit_code: i32,
    pub options: EchoOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<NetworkFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<Violation>>,
    /// Relabeling applied to reach canonical MAC-Z-BC form; results are in the new labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relabeling: Option<Relabeling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation: Option<AllocationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignment: Option<Vec<AlignmentReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof: Option<DofFit>,
    pub duration_seconds: f64,
}

impl AnalysisReport {
    pub fn new(command: &str, options: EchoOptions) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            status: Status::Ok,
            exit_code: 0,
            options,
            input_path: None,
            input: None,
            error: None,
            violations: None,
            relabeling: None,
            verdict: None,
            capacity: None,
            allocation: None,
            alignment: None,
            gap: None,
            dof: None,
            duration_seconds: 0.0,
        }
    }

    pub fn fail(&mut self, status: Status, message: impl Into<String>) {
        self.status = status;
        self.exit_code = status.exit_code();
        self.error = Some(message.into());
    }
}

/// Pretty JSON with every float written to 17 significant digits.
struct SigFigFormatter(PrettyFormatter<'static>);

impl Formatter for SigFigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{}", format_f64(f64::from(value)))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// `P,joint_rate,separate_bound` rows.
pub fn gap_csv(table: &GapTable) -> String {
    let mut s = String::from("P,joint_rate,separate_bound\n");
    for r in &table.rows {
        s.push_str(&format!(
            "{},{},{}\n",
            format_f64(r.power),
            format_f64(r.joint_rate),
            format_f64(r.separate_bound)
        ));
    }
    s
}
