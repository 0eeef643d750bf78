//! Command-line front end.
//!
//! Exit codes: 0 all checks pass, 1 a check fails, 2 inconclusive (no
//! failures), 3 numeric overflow, 4 phase-calibration failure, 5 invalid
//! input (label, phase point, operator name or configuration).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::coherent::{self, CoherentLabel, SolveOptions};
use crate::error::Error;
use crate::fock::Sector;
use crate::harmonics;
use crate::identities::{self, IdentityReport, Status, SubspacePolicy};
use crate::operators::{ClassicalPhasePoint, OperatorSet, OPERATOR_NAMES};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "SPHERELAB_THREADS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_OVERFLOW: i32 = 3;
pub const EXIT_CALIBRATION: i32 = 4;
pub const EXIT_INVALID: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "spherelab",
    version,
    about = "Operator algebra for a particle on the two-sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the identity suite on guarded subspaces.
    Verify(VerifyArgs),
    /// Compare N and Π against the spherical-harmonic quadrature oracle.
    Xcheck(XcheckArgs),
    /// Solve for a coherent state and report expectation values.
    Coherent(CoherentArgs),
    /// Write one operator's nonzero matrix elements as CSV.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SectorArg {
    Integer,
    Half,
    All,
}

impl From<SectorArg> for Sector {
    fn from(s: SectorArg) -> Self {
        match s {
            SectorArg::Integer => Sector::IntegerJ,
            SectorArg::Half => Sector::HalfIntegerJ,
            SectorArg::All => Sector::All,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Truncation: states with n1 + n2 <= nmax.
    #[arg(long = "nmax", default_value_t = 40)]
    n_max: usize,
    /// Coupling η > 0 of the annihilation operators.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Tolerance applied to every equality check.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Extra guard blocks beyond each expression's grade width.
    #[arg(long = "guard", default_value_t = 2)]
    guard_extra: usize,
    /// Parity sector of n = 2j on which checks are evaluated.
    #[arg(long, value_enum, default_value_t = SectorArg::Integer)]
    sector: SectorArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct XcheckArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "jmax", default_value_t = 8)]
    j_max: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct CoherentArgs {
    #[command(flatten)]
    common: Common,
    /// Label z as three comma-separated complex numbers, e.g. `0,0,1` or `1.54,1.18i,0`.
    #[arg(long, conflicts_with_all = ["x", "p"])]
    z: Option<String>,
    /// Phase-space position on the unit sphere, `x,y,z`.
    #[arg(long, requires = "p")]
    x: Option<String>,
    /// Tangent momentum, `px,py,pz`.
    #[arg(long, requires = "x")]
    p: Option<String>,
    /// Residual above which the result carries a warning.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// `json` writes the record; `csv` writes coefficients `n1,n2,re,im`
    /// and puts the record in `<out>.json`.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// One of Jx Jy Jz S Nx Ny Nz Pix Piy Piz Zx Zy Zz Px Py Pz.
    operator: String,
    #[command(flatten)]
    common: Common,
}

/// Validated run parameters shared by the subcommands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n_max: usize,
    pub eta: f64,
    pub tol: f64,
    pub guard_extra: usize,
    pub j_max: usize,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    fn validate(&self) -> Result<(), String> {
        if self.n_max < 2 {
            return Err(format!("--nmax must be at least 2, got {}", self.n_max));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(format!(
                "--eta must be positive and finite, got {}",
                self.eta
            ));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(format!("--tol must be positive, got {}", self.tol));
        }
        if self.j_max < 1 {
            return Err("--jmax must be at least 1".into());
        }
        Ok(())
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn emit(&mut self, path: Option<&Path>, body: &str) -> std::io::Result<()> {
        match path {
            Some(p) => fs::write(p, body),
            None => self.out.write_all(body.as_bytes()),
        }
    }

    fn fail(&mut self, code: i32, msg: impl std::fmt::Display) -> i32 {
        let _ = writeln!(self.err, "spherelab: {msg}");
        code
    }
}

fn exit_for(err: &Error) -> i32 {
    match err {
        Error::Overflow { .. } => EXIT_OVERFLOW,
        Error::CalibrationFailed(_) => EXIT_CALIBRATION,
        _ => EXIT_INVALID,
    }
}

fn json_string(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn reports_csv(reports: &[IdentityReport]) -> String {
    let mut s = String::from(
        "name,family,role,n_max,eta,width,guarded_dim,relative_deviation,tolerance,status\n",
    );
    for r in reports {
        let role = serde_json::to_value(r.role).expect("serializable");
        let status = serde_json::to_value(r.status).expect("serializable");
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.family,
            role.as_str().unwrap_or_default(),
            r.n_max,
            r.eta,
            r.width,
            r.guarded_dim,
            fmt_opt(r.relative_deviation),
            r.tolerance,
            status.as_str().unwrap_or_default(),
        ));
    }
    s
}

fn cmd_verify(args: VerifyArgs, io: &mut Io) -> i32 {
    let cfg = RunConfig {
        n_max: args.common.n_max,
        eta: args.common.eta,
        tol: args.tol,
        guard_extra: args.guard_extra,
        j_max: 8,
        output_path: args.common.out.clone(),
        format: args.format,
    };
    if let Err(msg) = cfg.validate() {
        return io.fail(EXIT_INVALID, msg);
    }
    let set = match OperatorSet::build(cfg.n_max, cfg.eta) {
        Ok(s) => s,
        Err(e) => return io.fail(exit_for(&e), e),
    };
    let policy = SubspacePolicy {
        guard_extra: cfg.guard_extra,
        sector: args.sector.into(),
        reference_n_max: None,
        tolerance_override: Some(cfg.tol),
    };
    let reports = match identities::run(&set, &identities::standard_suite(), &policy) {
        Ok(r) => r,
        Err(e) => return io.fail(exit_for(&e), e),
    };
    let status = identities::overall(&reports);
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    let _ = writeln!(
        io.err,
        "verify: {} pass, {} fail, {} inconclusive (n_max {}, eta {})",
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Inconclusive),
        cfg.n_max,
        cfg.eta
    );
    for r in reports.iter().filter(|r| r.status == Status::Fail) {
        let _ = writeln!(
            io.err,
            "  FAIL {} deviation {}",
            r.name,
            fmt_opt(r.relative_deviation)
        );
    }
    let body = match cfg.format {
        Format::Json => json_string(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "verify",
            "config": cfg,
            "sector": policy.sector,
            "status": status,
            "reports": reports,
        })),
        Format::Csv => reports_csv(&reports),
    };
    if let Err(e) = io.emit(cfg.output_path.as_deref(), &body) {
        return io.fail(EXIT_INVALID, e);
    }
    match status {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn cmd_xcheck(args: XcheckArgs, io: &mut Io) -> i32 {
    let cfg = RunConfig {
        n_max: args.common.n_max,
        eta: args.common.eta,
        tol: args.tol,
        guard_extra: 2,
        j_max: args.j_max,
        output_path: args.common.out.clone(),
        format: args.format,
    };
    if let Err(msg) = cfg.validate() {
        return io.fail(EXIT_INVALID, msg);
    }
    if 2 * cfg.j_max + 2 > cfg.n_max {
        let e = Error::InsufficientHeadroom {
            j_max: cfg.j_max,
            n_max: cfg.n_max,
            needed: 2 * cfg.j_max + 2,
        };
        return io.fail(EXIT_INVALID, e);
    }
    let result = OperatorSet::build(cfg.n_max, cfg.eta).and_then(|set| {
        let table = harmonics::build_table(cfg.j_max)?;
        harmonics::xcheck(&set, &table, cfg.j_max)
    });
    let report = match result {
        Ok(r) => r,
        Err(e) => return io.fail(exit_for(&e), e),
    };
    let pass = report.entries.iter().all(|e| e.max_deviation < cfg.tol);
    let body = match cfg.format {
        Format::Json => json_string(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "xcheck",
            "config": cfg,
            "pass": pass,
            "calibration": report.calibration,
            "deviations": report.entries,
        })),
        Format::Csv => {
            let mut s = String::from("kind,component,max_deviation,compared\n");
            for e in &report.entries {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    e.kind.label(),
                    e.component.label(),
                    e.max_deviation,
                    e.compared
                ));
            }
            s
        }
    };
    if let Err(e) = io.emit(cfg.output_path.as_deref(), &body) {
        return io.fail(EXIT_INVALID, e);
    }
    let _ = writeln!(
        io.err,
        "xcheck: max deviation {:.3e} (tol {})",
        report.max_deviation(),
        cfg.tol
    );
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn parse_reals(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected three components in '{s}'"))
}

/// Parses `a,b,c` where each entry is a complex number such as `1`, `0.5i` or `1.2-0.3i`.
pub fn parse_label(s: &str) -> Result<[Complex64; 3], String> {
    let parts: Vec<Complex64> = s
        .split(',')
        .map(|p| Complex64::from_str(p.trim()).map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected three components in '{s}'"))
}

fn cmd_coherent(args: CoherentArgs, io: &mut Io) -> i32 {
    let cfg = RunConfig {
        n_max: args.common.n_max,
        eta: args.common.eta,
        tol: args.tol,
        guard_extra: 2,
        j_max: 8,
        output_path: args.common.out.clone(),
        format: args.format,
    };
    if let Err(msg) = cfg.validate() {
        return io.fail(EXIT_INVALID, msg);
    }
    let label = match (&args.z, &args.x, &args.p) {
        (Some(z), _, _) => parse_label(z)
            .map_err(Error::InvalidLabel)
            .and_then(CoherentLabel::new),
        (None, Some(x), Some(p)) => parse_reals(x)
            .and_then(|x| Ok((x, parse_reals(p)?)))
            .map_err(Error::InvalidPhasePoint)
            .and_then(|(x, p)| ClassicalPhasePoint::new(x, p))
            .and_then(|pt| coherent::label_of(&pt, cfg.eta)),
        _ => Ok(CoherentLabel::new([
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ])
        .expect("north pole is a valid label")),
    };
    let label = match label {
        Ok(l) => l,
        Err(e) => return io.fail(EXIT_INVALID, e),
    };
    let opts = SolveOptions {
        residual_threshold: cfg.tol,
        ..SolveOptions::default()
    };
    let result = OperatorSet::build(cfg.n_max, cfg.eta).and_then(|set| {
        let state = coherent::solve(&set, &label, &opts)?;
        let exp = coherent::expectations(&state, &set)?;
        let coeffs = state.coefficients(&set.basis);
        Ok((state, exp, coeffs))
    });
    let (state, exp, coeffs) = match result {
        Ok(r) => r,
        Err(e) => return io.fail(exit_for(&e), e),
    };
    for w in &state.warnings {
        let _ = writeln!(
            io.err,
            "coherent: warning {}",
            serde_json::to_value(w).expect("serializable")
        );
    }
    let record = json_string(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": "coherent",
        "n_max": cfg.n_max,
        "eta": cfg.eta,
        "label": state.label,
        "residual": state.residual,
        "tail_mass": state.tail_mass,
        "smallest_singular_values": state.smallest_singular_values,
        "warnings": state.warnings,
        "expectations": exp,
    }));
    let written = match cfg.format {
        Format::Json => io.emit(cfg.output_path.as_deref(), &record),
        Format::Csv => {
            let mut csv = String::from("n1,n2,re,im\n");
            for (n1, n2, c) in &coeffs {
                csv.push_str(&format!("{n1},{n2},{},{}\n", c.re, c.im));
            }
            io.emit(cfg.output_path.as_deref(), &csv)
                .and_then(|_| match &cfg.output_path {
                    Some(p) => fs::write(sidecar(p), &record),
                    None => Ok(()),
                })
        }
    };
    if let Err(e) = written {
        return io.fail(EXIT_INVALID, e);
    }
    EXIT_PASS
}

fn cmd_export(args: ExportArgs, io: &mut Io) -> i32 {
    if !OPERATOR_NAMES.contains(&args.operator.as_str()) {
        return io.fail(EXIT_INVALID, Error::UnknownOperator(args.operator));
    }
    let c = &args.common;
    if c.n_max < 2 || !(c.eta.is_finite() && c.eta > 0.0) {
        return io.fail(EXIT_INVALID, "--nmax must be at least 2 and --eta positive");
    }
    let result =
        OperatorSet::build(c.n_max, c.eta).and_then(|set| Ok((set.named(&args.operator)?, set)));
    let (op, set) = match result {
        Ok(r) => r,
        Err(e) => return io.fail(exit_for(&e), e),
    };
    let mut csv = String::from("row_n1,row_n2,col_n1,col_n2,re,im\n");
    for (r, col, v) in op.nonzeros() {
        let (rs, cs) = (set.basis.state(r), set.basis.state(col));
        let v = crate::dd::to_c64(v);
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            rs.n1, rs.n2, cs.n1, cs.n2, v.re, v.im
        ));
    }
    let meta = json_string(&json!({
        "schema_version": SCHEMA_VERSION,
        "operator": args.operator,
        "n_max": c.n_max,
        "eta": c.eta,
        "dim": set.basis.dim(),
        "grade": op.grade(),
        "ordering": "total n ascending, then n1 descending",
        "basis": set.basis.states().iter().map(|s| [s.n1, s.n2]).collect::<Vec<_>>(),
        "nonzeros": op.nonzeros().len(),
    }));
    let written = io.emit(c.out.as_deref(), &csv).and_then(|_| match &c.out {
        Some(p) => fs::write(sidecar(p), &meta),
        None => Ok(()),
    });
    if let Err(e) = written {
        return io.fail(EXIT_INVALID, e);
    }
    EXIT_PASS
}

fn configure_threads(err: &mut dyn Write) {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => {
            let _ = writeln!(
                err,
                "spherelab: ignoring {THREADS_ENV}={v}: expected a positive integer"
            );
        }
    }
}

/// Parses `args` (including the program name) and runs one subcommand,
/// writing results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_INVALID,
            };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_PASS {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    configure_threads(err);
    let mut io = Io { out, err };
    match cli.command {
        Command::Verify(a) => cmd_verify(a, &mut io),
        Command::Xcheck(a) => cmd_xcheck(a, &mut io),
        Command::Coherent(a) => cmd_coherent(a, &mut io),
        Command::Export(a) => cmd_export(a, &mut io),
    }
}
