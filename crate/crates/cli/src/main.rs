//! `qcompat`: decide and certify (in)compatibility of quantum channels.
//!
//! Exit codes: 0 compatible (certified), 2 incompatible (certified),
//! 3 undetermined or conflicting engines, 1 usage or IO error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qcompat::assemblage::{classify, AssemblageReport, ClassifyOptions};
use qcompat::channels::{Channel, ChannelSpec, Povm, VALIDATION_TOL};
use qcompat::criteria::{
    auto_criterion, candidate_bases, closed_form_parameters, oracle_check, replacement_certificate,
    zhu_criterion_channels_with, BasisPolicy, Verdict, VerdictKind, CRITERION_MARGIN,
};
use qcompat::linalg::{Basis, ComplexMatrix, HermitianMatrix, C64};
use qcompat::region::{
    criterion_grid, emit_figure1_data, emit_figure2_data, figure1_csv, figure2_csv,
    figure2_violations, quadrant_directions, rays_csv, scan_rays, DEFAULT_RAYS, MIN_BISECT_TOL,
};
use qcompat::sdp::{FeasibilityResult, OracleOptions, DEFAULT_ORACLE_BUDGET, FEASIBILITY_BAND};

const EXIT_COMPATIBLE: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INCOMPATIBLE: u8 = 2;
const EXIT_UNDETERMINED: u8 = 3;

/// Ray bisection tolerance when none is given.
const DEFAULT_BISECT_TOL: f64 = 1e-3;

#[derive(Parser, Debug)]
#[command(
    name = "qcompat",
    version,
    about = "Decide and certify compatibility of quantum channels"
)]
struct Cli {
    /// Worker threads for subset and ray evaluation.
    #[arg(long, global = true, env = "QCOMPAT_JOBS")]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the criterion (and optionally the exact oracle) on a channel tuple.
    Check {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        /// `auto`, `canonical`, or a JSON file with one basis per channel.
        #[arg(long, default_value = "auto")]
        bases: String,
        /// Include the joint Choi matrix found by the oracle.
        #[arg(long)]
        witness: bool,
    },
    /// Classify an assemblage at level K.
    Assemblage {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, default_value = "auto")]
        bases: String,
    },
    /// Scan the compatibility region of noisy versions of the channels along rays.
    Region {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
        /// Number of rays for a pair; other tuple sizes use the axes and the diagonal.
        #[arg(long, default_value_t = DEFAULT_RAYS)]
        rays: usize,
        #[arg(long, default_value_t = DEFAULT_BISECT_TOL)]
        bisect_tol: f64,
        /// Also evaluate the criterion on a `grid × grid` lattice (pairs only).
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Emit the data behind the figures.
    Figure {
        name: FigureName,
        /// Dimensions for fig2, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,5,20")]
        d: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        /// Schur matrix spec for fig1.
        #[arg(long = "B")]
        b: Option<PathBuf>,
        /// Second Schur matrix for fig1; defaults to B.
        #[arg(long = "C")]
        c: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Check the channel or POVM invariants of spec files.
    Validate {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FigureName {
    Fig1,
    Fig2,
}

#[derive(Args, Debug, Clone)]
struct EngineArgs {
    /// Also run the exact joint-channel SDP.
    #[arg(long)]
    oracle: bool,
    /// Required excess of the criterion value before incompatibility is certified.
    #[arg(long, default_value_t = CRITERION_MARGIN)]
    margin: f64,
    /// Cap on N·D² for the oracle.
    #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
    oracle_budget: usize,
    /// Half-width of the oracle's marginal band.
    #[arg(long, default_value_t = FEASIBILITY_BAND)]
    oracle_band: f64,
}

impl EngineArgs {
    fn oracle_options(&self) -> OracleOptions {
        OracleOptions {
            budget: self.oracle_budget,
            band: self.oracle_band,
        }
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            criterion_margin: self.margin,
            oracle_band: self.oracle_band,
            oracle_budget: self.oracle_budget,
            validation_tol: VALIDATION_TOL,
            bisect_tol: None,
        }
    }
}

#[derive(Serialize)]
struct Tolerances {
    criterion_margin: f64,
    oracle_band: f64,
    oracle_budget: usize,
    validation_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bisect_tol: Option<f64>,
}

#[derive(Serialize)]
struct Header {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    tolerances: Tolerances,
}

impl Header {
    fn new(command: &'static str, tolerances: Tolerances) -> Self {
        Self {
            tool: "qcompat",
            version: env!("CARGO_PKG_VERSION"),
            command,
            tolerances,
        }
    }

    fn csv_comment(&self) -> String {
        let t = &self.tolerances;
        let mut out = format!("# {} {} {}\n", self.tool, self.version, self.command);
        let _ = write!(
            out,
            "# criterion_margin={} oracle_band={} oracle_budget={} validation_tol={}",
            t.criterion_margin, t.oracle_band, t.oracle_budget, t.validation_tol
        );
        if let Some(b) = t.bisect_tol {
            let _ = write!(out, " bisect_tol={b}");
        }
        out.push('\n');
        out
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    header: &'a Header,
    #[serde(flatten)]
    body: T,
}

fn json_report<T: Serialize>(header: &Header, body: T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(&Report { header, body })?;
    s.push('\n');
    Ok(s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_COMPATIBLE
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let (text, code) = match &cli.command {
        Command::Check {
            specs,
            engine,
            bases,
            witness,
        } => cmd_check(specs, engine, bases, *witness, cli.format)?,
        Command::Assemblage {
            specs,
            k,
            engine,
            bases,
        } => cmd_assemblage(specs, *k, engine, bases, cli.format)?,
        Command::Region {
            specs,
            rays,
            bisect_tol,
            grid,
            engine,
        } => cmd_region(specs, *rays, *bisect_tol, *grid, engine, cli.format)?,
        Command::Figure {
            name,
            d,
            resolution,
            b,
            c,
            engine,
        } => cmd_figure(
            *name,
            d,
            *resolution,
            b.as_deref(),
            c.as_deref(),
            engine,
            cli.format,
        )?,
        Command::Validate { specs } => cmd_validate(specs, cli.format)?,
    };
    match &cli.output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(code)
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// serde_json errors already carry the line and column.
fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> anyhow::Result<T> {
    serde_json::from_str(text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_spec(path: &Path) -> anyhow::Result<ChannelSpec> {
    parse(path, &read(path)?)
}

fn load_channels(paths: &[PathBuf]) -> anyhow::Result<Vec<Channel>> {
    paths
        .iter()
        .map(|p| {
            let ch = load_spec(p)?
                .build()
                .with_context(|| format!("{}: invalid channel", p.display()))?;
            let label = format!("{} [{}]", ch.label(), p.display());
            Ok(ch.relabel(label))
        })
        .collect()
}

fn load_schur(path: &Path) -> anyhow::Result<HermitianMatrix> {
    load_spec(path)?
        .schur_matrix()
        .ok_or_else(|| anyhow!("{}: expected a schur spec", path.display()))?
        .with_context(|| format!("{}: invalid Schur matrix", path.display()))
}

/// A basis file is a JSON list with one basis per channel; each basis is a
/// list of vectors of `[re, im]` pairs.
fn basis_policy(arg: &str) -> anyhow::Result<BasisPolicy> {
    match arg {
        "auto" => Ok(BasisPolicy::Auto),
        "canonical" => Ok(BasisPolicy::Canonical),
        path => {
            let path = Path::new(path);
            let raw: Vec<Vec<Vec<C64>>> = parse(path, &read(path)?)?;
            let bases = raw
                .into_iter()
                .enumerate()
                .map(|(i, vs)| {
                    Basis::new(vs).with_context(|| format!("{}: basis {i}", path.display()))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(BasisPolicy::Explicit(bases))
        }
    }
}

#[derive(Serialize)]
struct CriterionRun {
    /// Read-out bases, one per channel, as lists of `[re, im]` vectors.
    bases: Vec<Vec<Vec<C64>>>,
    verdict: Verdict,
}

#[derive(Serialize)]
struct OracleSummary {
    status: String,
    lambda_star: f64,
    upper_bound: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
    verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<C64>>,
}

impl OracleSummary {
    fn new(verdict: Verdict, res: &FeasibilityResult, witness: bool) -> Self {
        Self {
            status: format!("{:?}", res.status),
            lambda_star: res.lambda_star,
            upper_bound: res.upper_bound,
            gap: res.gap(),
            iterations: res.iterations,
            converged: res.converged,
            verdict,
            witness: witness.then(|| res.witness.as_matrix().data().to_vec()),
        }
    }
}

#[derive(Serialize)]
struct CheckBody {
    channels: Vec<String>,
    /// The verdict the criterion stage settled on.
    criterion: Verdict,
    /// Every basis assignment evaluated by the SDP criterion.
    criterion_runs: Vec<CriterionRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleSummary>,
    outcome: &'static str,
}

fn basis_vectors(b: &Basis) -> Vec<Vec<C64>> {
    b.vectors().to_vec()
}

fn cmd_check(
    paths: &[PathBuf],
    engine: &EngineArgs,
    bases: &str,
    witness: bool,
    format: Format,
) -> anyhow::Result<(String, u8)> {
    let channels = load_channels(paths)?;
    let policy = basis_policy(bases)?;
    let mut runs = Vec::new();
    let structural = replacement_certificate(&channels);
    let criterion = match &structural {
        Some(v) => v.clone(),
        None => {
            let v = auto_criterion(&channels, &policy, engine.margin)?;
            // list what was evaluated so the certificate can be replayed
            let d = channels[0].d_in();
            let assignments = candidate_bases(&policy, d, channels.len())?;
            if closed_form_parameters(&channels, &policy)?.is_some() {
                runs.push(CriterionRun {
                    bases: assignments[0].iter().map(basis_vectors).collect(),
                    verdict: v.clone(),
                });
            } else {
                for assignment in assignments {
                    let verdict =
                        zhu_criterion_channels_with(&channels, &assignment, engine.margin)?;
                    runs.push(CriterionRun {
                        bases: assignment.iter().map(basis_vectors).collect(),
                        verdict,
                    });
                }
            }
            v
        }
    };
    let oracle = if engine.oracle {
        let (v, res) = oracle_check(&channels, &engine.oracle_options())?;
        Some(OracleSummary::new(v, &res, witness))
    } else {
        None
    };
    let oracle_kind = oracle.as_ref().map(|o| o.verdict.kind);
    let (outcome, code) = combine(criterion.kind, oracle_kind);
    if outcome == "conflict" {
        eprintln!("warning: criterion and oracle disagree; treating the result as undetermined");
    }
    let header = Header::new("check", engine.tolerances());
    let body = CheckBody {
        channels: channels.iter().map(|c| c.label().to_string()).collect(),
        criterion,
        criterion_runs: runs,
        oracle,
        outcome,
    };
    let text = match format {
        Format::Json => json_report(&header, &body)?,
        Format::Csv => {
            let mut out = header.csv_comment();
            out.push_str("engine,kind,value,certificate\n");
            let mut row = |engine: &str, v: &Verdict| {
                let value = v.value.map(|x| x.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{engine},{:?},{value},{}",
                    v.kind,
                    csv_field(&v.certificate)
                );
            };
            row("criterion", &body.criterion);
            if let Some(o) = &body.oracle {
                row("oracle", &o.verdict);
            }
            out
        }
    };
    Ok((text, code))
}

/// Merges the two engines. Each side only ever certifies what it can prove,
/// so a disagreement means a numerical problem and is not resolved silently.
fn combine(criterion: VerdictKind, oracle: Option<VerdictKind>) -> (&'static str, u8) {
    use VerdictKind::*;
    match (criterion, oracle) {
        (IncompatibleCertified, Some(CompatibleCertified))
        | (CompatibleCertified, Some(IncompatibleCertified)) => ("conflict", EXIT_UNDETERMINED),
        (IncompatibleCertified, _) | (_, Some(IncompatibleCertified)) => {
            ("incompatible", EXIT_INCOMPATIBLE)
        }
        (CompatibleCertified, _) | (_, Some(CompatibleCertified)) => {
            ("compatible", EXIT_COMPATIBLE)
        }
        _ => ("undetermined", EXIT_UNDETERMINED),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_assemblage(
    paths: &[PathBuf],
    k: usize,
    engine: &EngineArgs,
    bases: &str,
    format: Format,
) -> anyhow::Result<(String, u8)> {
    let channels = load_channels(paths)?;
    let opts = ClassifyOptions {
        policy: basis_policy(bases)?,
        use_oracle: engine.oracle,
        oracle: engine.oracle_options(),
        margin: engine.margin,
    };
    let report = classify(&channels, k, &opts)?;
    let header = Header::new("assemblage", engine.tolerances());
    let text = match format {
        Format::Json => json_report(&header, &report)?,
        Format::Csv => assemblage_csv(&header, &report),
    };
    Ok((text, EXIT_COMPATIBLE))
}

fn assemblage_csv(header: &Header, report: &AssemblageReport) -> String {
    let mut out = header.csv_comment();
    let labels: Vec<&str> = report.labels.iter().map(|l| l.as_str()).collect();
    let _ = writeln!(
        out,
        "# n={} k={} labels={}",
        report.n,
        report.k,
        labels.join(";")
    );
    out.push_str("level,subset,kind,value,oracle_kind\n");
    for level in std::iter::once(&report.level).chain(report.next_level.as_ref()) {
        for s in &level.subsets {
            let subset: Vec<String> = s.subset.iter().map(|i| i.to_string()).collect();
            let value = s.verdict.value.map(|x| x.to_string()).unwrap_or_default();
            let oracle = s
                .oracle
                .as_ref()
                .map(|o| format!("{:?}", o.kind))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{:?},{value},{oracle}",
                level.k,
                subset.join(" "),
                s.verdict.kind
            );
        }
    }
    out
}

fn cmd_region(
    paths: &[PathBuf],
    rays: usize,
    bisect_tol: f64,
    grid: Option<usize>,
    engine: &EngineArgs,
    format: Format,
) -> anyhow::Result<(String, u8)> {
    let channels = load_channels(paths)?;
    let n = channels.len();
    let directions = if n == 2 {
        if rays == 0 {
            bail!("--rays must be positive");
        }
        quadrant_directions(rays)
    } else {
        let mut dirs: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        dirs.push(vec![1.0 / (n as f64).sqrt(); n]);
        dirs
    };
    let mut report = scan_rays(
        &channels,
        &directions,
        engine.oracle,
        bisect_tol,
        &engine.oracle_options(),
    )?;
    if let Some(res) = grid {
        report.grid = Some(criterion_grid(&channels, res)?);
    }
    let violations = report.outer_bound_violations(MIN_BISECT_TOL);
    eprintln!(
        "region: {} rays, outer-bound check {} ({violations} violations)",
        report.rays.len(),
        if violations == 0 { "passed" } else { "FAILED" }
    );
    let mut tolerances = engine.tolerances();
    tolerances.bisect_tol = Some(bisect_tol);
    let header = Header::new("region", tolerances);
    let text = match format {
        Format::Json => json_report(&header, &report)?,
        Format::Csv => header.csv_comment() + &rays_csv(&report),
    };
    Ok((
        text,
        if violations == 0 {
            EXIT_COMPATIBLE
        } else {
            EXIT_UNDETERMINED
        },
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_figure(
    name: FigureName,
    ds: &[usize],
    resolution: usize,
    b: Option<&Path>,
    c: Option<&Path>,
    engine: &EngineArgs,
    format: Format,
) -> anyhow::Result<(String, u8)> {
    let mut tolerances = engine.tolerances();
    let (text, violations, rows) = match name {
        FigureName::Fig2 => {
            let rows = emit_figure2_data(ds, resolution)?;
            let violations = figure2_violations(&rows, 1e-9);
            let header = Header::new("figure fig2", tolerances);
            let text = match format {
                Format::Json => json_report(&header, serde_json::json!({ "rows": rows }))?,
                Format::Csv => header.csv_comment() + &figure2_csv(&rows),
            };
            (text, violations, rows.len())
        }
        FigureName::Fig1 => {
            let b = load_schur(b.ok_or_else(|| anyhow!("fig1 needs --B"))?)?;
            let c = match c {
                Some(p) => load_schur(p)?,
                None => b.clone(),
            };
            tolerances.bisect_tol = engine.oracle.then_some(MIN_BISECT_TOL);
            let data =
                emit_figure1_data(&b, &c, resolution, engine.oracle, &engine.oracle_options())?;
            let violations = data.outer_bound_violations();
            let header = Header::new("figure fig1", tolerances);
            let text = match format {
                Format::Json => json_report(&header, &data)?,
                Format::Csv => {
                    let mut out = header.csv_comment();
                    for note in &data.notes {
                        let _ = writeln!(out, "# {note}");
                    }
                    for dot in &data.red_dots {
                        let _ = writeln!(
                            out,
                            "# red_dot direction={:?} oracle_radius={}",
                            dot.direction,
                            dot.oracle_radius.unwrap_or(f64::NAN)
                        );
                    }
                    out + &figure1_csv(&data)
                }
            };
            (text, violations, data.rows.len())
        }
    };
    eprintln!(
        "figure: {rows} rows, outer-bound check {} ({violations} violations)",
        if violations == 0 { "passed" } else { "FAILED" }
    );
    Ok((
        text,
        if violations == 0 {
            EXIT_COMPATIBLE
        } else {
            EXIT_UNDETERMINED
        },
    ))
}

/// `{"kind":"povm","effects":[E_1, E_2, …]}` with each effect a list of rows
/// of `[re, im]` pairs.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmSpec {
    #[allow(dead_code)]
    kind: String,
    effects: Vec<Vec<Vec<C64>>>,
}

#[derive(Serialize)]
struct ValidateRow {
    path: String,
    kind: String,
    d_in: Option<usize>,
    d_out: Option<usize>,
    ok: bool,
    message: String,
}

fn validate_one(path: &Path) -> anyhow::Result<ValidateRow> {
    let text = read(path)?;
    let value: serde_json::Value = parse(path, &text)?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .unwrap_or("")
        .to_string();
    let mut row = ValidateRow {
        path: path.display().to_string(),
        kind: kind.clone(),
        d_in: None,
        d_out: None,
        ok: false,
        message: String::new(),
    };
    if kind == "povm" {
        let spec: PovmSpec = parse(path, &text)?;
        let effects: qcompat::Result<Vec<HermitianMatrix>> = spec
            .effects
            .iter()
            .map(|rows| ComplexMatrix::from_rows(rows).and_then(HermitianMatrix::new))
            .collect();
        match effects.and_then(Povm::new) {
            Ok(p) => {
                row.d_in = Some(p.d());
                row.ok = true;
                row.message = format!("{} effects, positive, summing to the identity", p.len());
            }
            Err(e) => row.message = e.to_string(),
        }
    } else {
        let spec: ChannelSpec = parse(path, &text)?;
        match spec.build() {
            Ok(ch) => {
                row.d_in = Some(ch.d_in());
                row.d_out = Some(ch.d_out());
                row.ok = true;
                row.message = format!(
                    "completely positive and trace preserving{}",
                    if ch.is_unital(VALIDATION_TOL) {
                        ", unital"
                    } else {
                        ""
                    }
                );
            }
            Err(e) => row.message = e.to_string(),
        }
    }
    Ok(row)
}

fn cmd_validate(paths: &[PathBuf], format: Format) -> anyhow::Result<(String, u8)> {
    let rows = paths
        .iter()
        .map(|p| validate_one(p))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let all_ok = rows.iter().all(|r| r.ok);
    let header = Header::new(
        "validate",
        Tolerances {
            criterion_margin: CRITERION_MARGIN,
            oracle_band: FEASIBILITY_BAND,
            oracle_budget: DEFAULT_ORACLE_BUDGET,
            validation_tol: VALIDATION_TOL,
            bisect_tol: None,
        },
    );
    let text = match format {
        Format::Json => json_report(&header, serde_json::json!({ "specs": rows }))?,
        Format::Csv => {
            let mut out = header.csv_comment();
            out.push_str("path,kind,d_in,d_out,ok,message\n");
            for r in &rows {
                let dim = |d: Option<usize>| d.map(|x| x.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    csv_field(&r.path),
                    r.kind,
                    dim(r.d_in),
                    dim(r.d_out),
                    r.ok,
                    csv_field(&r.message)
                );
            }
            out
        }
    };
    Ok((text, if all_ok { EXIT_COMPATIBLE } else { EXIT_ERROR }))
}
