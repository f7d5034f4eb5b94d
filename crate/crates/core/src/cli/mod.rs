//! The `sepnet` command line.
//!
//! ```text
//! sepnet classify --input net.json
//! sepnet allocate --input mac.json --tol 1e-10
//! sepnet demo x --pgrid 1e3:1e9:7 --format csv
//! ```
//!
//! Exit status: 0 success, 1 I/O or parse error, 2 validation error,
//! 3 capacity requested for an inseparable network, 4 optimizer did not converge.

pub mod file;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alignment::{
    self, canonical_channel, canonical_scheme, check_alignment, dof_fit, gap_experiment_with,
    AlignmentError, PowerGrid,
};
use crate::capacity::{optimize_power_allocation, CapacityError, LogBase, OptimizerConfig};
use crate::classifier::{classify, ForbiddenKind, Verdict};
use crate::fixtures;
use crate::network::ChannelInstance;
use file::{FileError, ParsedNetwork};
use report::{AllocationSummary, AnalysisReport, EchoOptions, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Base {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> Self {
        match b {
            Base::Two => LogBase::Two,
            Base::E => LogBase::E,
        }
    }
}

/// Forbidden kinds that have a canonical gap demonstration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GapKind {
    X,
    Sigma,
    ReverseSigma,
}

impl From<GapKind> for ForbiddenKind {
    fn from(k: GapKind) -> Self {
        match k {
            GapKind::X => ForbiddenKind::XNetwork,
            GapKind::Sigma => ForbiddenKind::Sigma,
            GapKind::ReverseSigma => ForbiddenKind::ReverseSigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Decide separability; print the MAC-Z-BC hubs or a forbidden sub-network.
    Classify,
    /// Sum capacity with optimal power allocation. Without --input, a random
    /// canonical MAC-Z-BC instance is drawn from --seed.
    Capacity,
    /// Optimal power allocation across carriers. Without --input, as for `capacity`.
    Allocate,
    /// Joint-coding rate against the separate-coding line over --pgrid.
    Gap { kind: GapKind },
    /// Degrees-of-freedom slope fit over --pgrid.
    Dof { kind: GapKind },
    /// Canonical channel and scheme: alignment checks, gap table and slope fit.
    Demo { kind: GapKind },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Capacity => "capacity",
            Command::Allocate => "allocate",
            Command::Gap { .. } => "gap",
            Command::Dof { .. } => "dof",
            Command::Demo { .. } => "demo",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "sepnet", version, about = "Separability analysis for parallel Gaussian networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Network or channel file (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long = "log-base", global = true, value_enum, default_value = "2")]
    pub log_base: Base,
    /// Target KKT residual of the power optimizer.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long = "max-iter", global = true, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Power grid `lo:hi:points`, log-spaced.
    #[arg(long, global = true, default_value = "1e3:1e9:7")]
    pub pgrid: String,
    /// Seed for randomly generated instances.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

/// One invocation, independent of how it was spelled on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRequest {
    pub command: Command,
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub log_base: LogBase,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub power_grid: String,
    pub seed: u64,
}

impl From<Cli> for AnalysisRequest {
    fn from(c: Cli) -> Self {
        Self {
            command: c.command,
            input_path: c.input,
            output_path: c.output,
            format: c.format,
            log_base: c.log_base.into(),
            tolerance: c.tol,
            max_iterations: c.max_iter,
            power_grid: c.pgrid,
            seed: c.seed,
        }
    }
}

/// Early exit from a command with the status it maps to.
struct Failure(Status, String);

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        let status = if e.is_validation() {
            Status::ValidationError
        } else {
            Status::IoError
        };
        Failure(status, e.to_string())
    }
}

impl From<AlignmentError> for Failure {
    fn from(e: AlignmentError) -> Self {
        Failure(Status::ValidationError, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(Status::ValidationError, msg.into())
}

/// Runs a request. The report always describes the outcome, errors included.
pub fn run(request: &AnalysisRequest) -> AnalysisReport {
    let start = Instant::now();
    let mut report = AnalysisReport::new(
        request.command.name(),
        EchoOptions {
            log_base: request.log_base,
            tolerance: request.tolerance,
            max_iterations: request.max_iterations,
            power_grid: None,
            seed: request.seed,
        },
    );
    report.input_path = request
        .input_path
        .as_ref()
        .map(|p| p.display().to_string());
    if let Err(Failure(status, msg)) = dispatch(request, &mut report) {
        report.fail(status, msg);
    }
    report.duration_seconds = start.elapsed().as_secs_f64();
    report
}

fn dispatch(req: &AnalysisRequest, report: &mut AnalysisReport) -> Result<(), Failure> {
    check_options(req)?;
    match req.command {
        Command::Classify => run_classify(req, report),
        Command::Capacity | Command::Allocate => run_capacity(req, report),
        Command::Gap { kind } | Command::Dof { kind } | Command::Demo { kind } => {
            run_alignment(req, kind.into(), report)
        }
    }
}

fn check_options(req: &AnalysisRequest) -> Result<(), Failure> {
    if !(req.tolerance.is_finite() && req.tolerance > 0.0) {
        return Err(invalid(format!("--tol must be positive, got {}", req.tolerance)));
    }
    if req.max_iterations == 0 {
        return Err(invalid("--max-iter must be at least 1"));
    }
    let tabular = matches!(
        req.command,
        Command::Gap { .. } | Command::Dof { .. } | Command::Demo { .. }
    );
    if req.format == Format::Csv && !tabular {
        return Err(invalid(format!(
            "--format csv applies to gap, dof and demo, not {}",
            req.command.name()
        )));
    }
    if matches!(req.command, Command::Classify) && req.input_path.is_none() {
        return Err(Failure(Status::IoError, "classify requires --input".into()));
    }
    Ok(())
}

fn load(req: &AnalysisRequest, report: &mut AnalysisReport) -> Result<Option<ParsedNetwork>, Failure> {
    let Some(path) = &req.input_path else {
        return Ok(None);
    };
    let parsed = match file::parse_network_file(path) {
        Ok(p) => p,
        Err(FileError::Validation(v)) => {
            report.violations = Some(v.clone());
            return Err(FileError::Validation(v).into());
        }
        Err(e) => return Err(e.into()),
    };
    report.input = Some(parsed.file.clone());
    Ok(Some(parsed))
}

fn run_classify(req: &AnalysisRequest, report: &mut AnalysisReport) -> Result<(), Failure> {
    let parsed = load(req, report)?.expect("checked in check_options");
    let verdict = classify(&parsed.topology).map_err(|e| invalid(e.to_string()))?;
    if let Verdict::Separable(m) = &verdict {
        if !m.is_canonical() {
            report.relabeling = Some(m.relabeling.clone());
        }
    }
    report.verdict = Some(verdict);
    Ok(())
}

/// Random canonical MAC-Z-BC instance: `S, D ≤ 5`, `F ≤ 4`, budgets up to 100.
pub fn seeded_instance(seed: u64) -> ChannelInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = rng.gen_range(1..=4);
    fixtures::random_mac_z_bc(&mut rng, 5, 5, f, 100.0)
}

fn run_capacity(req: &AnalysisRequest, report: &mut AnalysisReport) -> Result<(), Failure> {
    let instance = match load(req, report)? {
        Some(p) => {
            let verdict = classify(&p.topology).map_err(|e| invalid(e.to_string()))?;
            let inseparable = !verdict.is_separable();
            report.verdict = Some(verdict);
            if inseparable {
                return Err(Failure(
                    Status::Inseparable,
                    "network is not MAC-Z-BC; sum capacity is not separable (see verdict.witness)".into(),
                ));
            }
            p.instance
                .ok_or_else(|| invalid("capacity needs a `channel` section in the input file"))?
        }
        None => {
            let inst = seeded_instance(req.seed);
            report.input = Some(file::instance_to_file(&inst));
            inst
        }
    };
    let instance = match classify(instance.topology()).map_err(|e| invalid(e.to_string()))? {
        Verdict::Separable(m) if !m.is_canonical() => {
            let relabeled = instance
                .relabel(&m.relabeling)
                .map_err(|e| invalid(e.to_string()))?;
            report.relabeling = Some(m.relabeling);
            relabeled
        }
        _ => instance,
    };
    let config = OptimizerConfig {
        tolerance: req.tolerance,
        max_iterations: req.max_iterations,
        log_base: req.log_base,
    };
    let allocate = matches!(req.command, Command::Allocate);
    let (result, failure) = match optimize_power_allocation(&instance, &config) {
        Ok(r) => (r, None),
        Err(CapacityError::NonConvergence(best)) => {
            let msg = CapacityError::NonConvergence(best.clone()).to_string();
            (*best, Some(Failure(Status::NonConvergence, msg)))
        }
        Err(e) => return Err(invalid(e.to_string())),
    };
    if allocate {
        report.allocation = Some(AllocationSummary::from(&result));
    } else {
        report.capacity = Some(result);
    }
    failure.map_or(Ok(()), Err)
}

fn run_alignment(
    req: &AnalysisRequest,
    kind: ForbiddenKind,
    report: &mut AnalysisReport,
) -> Result<(), Failure> {
    let grid = PowerGrid::parse(&req.power_grid)?;
    report.options.power_grid = Some(grid.powers.clone());
    let instance = match load(req, report)? {
        Some(p) if matches!(req.command, Command::Demo { .. }) => {
            let _ = p;
            return Err(invalid("demo uses the canonical channel and takes no --input"));
        }
        Some(p) => {
            if p.topology != kind.canonical_topology() {
                return Err(invalid(format!(
                    "input topology is not the canonical {kind} network"
                )));
            }
            p.instance
                .ok_or_else(|| invalid("gain override needs a `channel` section"))?
        }
        None => canonical_channel(kind)?,
    };
    let scheme = canonical_scheme(kind)?;
    if scheme.num_carriers() != instance.num_carriers() {
        return Err(invalid(format!(
            "the {kind} scheme uses {} carriers, input has {}",
            scheme.num_carriers(),
            instance.num_carriers()
        )));
    }
    let base = req.log_base;
    match req.command {
        Command::Gap { .. } => {
            report.gap = Some(gap_experiment_with(&instance, &scheme, kind, &grid, base)?);
        }
        Command::Dof { .. } => {
            report.gap = Some(gap_experiment_with(&instance, &scheme, kind, &grid, base)?);
            report.dof = Some(dof_fit(&instance, &scheme, &grid, base)?);
        }
        _ => {
            let receivers = 1..=instance.topology().num_destinations();
            report.alignment = Some(
                receivers
                    .map(|r| check_alignment(&instance, &scheme, r))
                    .collect::<Result<_, _>>()?,
            );
            report.gap = Some(alignment::gap_experiment_with(&instance, &scheme, kind, &grid, base)?);
            report.dof = Some(dof_fit(&instance, &scheme, &grid, base)?);
        }
    }
    Ok(())
}

/// Report text in the requested format. Failed runs always render as JSON.
pub fn render(report: &AnalysisReport, format: Format) -> String {
    match (&report.gap, format, report.status) {
        (Some(table), Format::Csv, Status::Ok) => report::gap_csv(table),
        _ => report::to_json(report),
    }
}

/// Parses arguments, runs, writes the report and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let request = AnalysisRequest::from(cli);
    let report = run(&request);
    let text = render(&report, request.format);
    if let Some(err) = &report.error {
        eprintln!("sepnet: {err}");
    }
    let written = match &request.output_path {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("sepnet: cannot write report: {e}");
        return Status::IoError.exit_code();
    }
    report.exit_code
}
