//! The `spectra` command line.
//!
//! Every subcommand except `gen` writes its artifacts plus a
//! `summary.json` into `--out`, after all computation has finished. The
//! summary is written even when a check fails or the input is rejected.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::SpectraError;
use crate::family::spec::FamilySpec;
use crate::family::{uniform_grid, ParamFamily};
use crate::hermitian::eig_ordered;
use crate::projector::{Contour, DEFAULT_NODES};
use crate::regularity::{
    estimate_growth_constant, gronwall_check, holder_constant, matrix_holder_constant, transfer_bound, GronwallReport,
    GrowthModel, HolderCertificate, MatrixHolder, PairPolicy, TransferReport, BOUND_SLACK,
};
use crate::tracking::{project_at, track, write_branches_csv, Branch, Strategy, TrackOptions, Tracking};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

/// Absolute tolerance, scaled by `1 + max|λ|`, for block eigenvalues against
/// the global ordered spectrum.
pub const BLOCK_AGREEMENT_TOL: f64 = 1e-8;

const CERTIFICATE_NOTE: &str =
    "constants are maxima over the tested grid pairs on the given compact interval; nothing is claimed between nodes";

#[derive(Debug, Parser)]
#[command(name = "spectra", version, about = "Eigenvalue tracking, spectral projectors and Hölder certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a family and print its resolved metadata.
    Gen(GenArgs),
    /// Ordered branches, crossings and an optional continuous selection.
    Track(RunArgs),
    /// Hölder certificate for a continuous selection.
    Certify(CertifyArgs),
    /// Riesz projector diagnostics for a fixed contour at every node.
    Project(ProjectArgs),
    /// Track, certify and, given a contour, project in one run.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Family spec: a JSON file or inline JSON.
    #[arg(long)]
    pub spec: String,
    /// Seed for random families whose spec has none.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Also write family.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// `lo:hi:nodes` or a comma-separated list of ascending nodes.
    #[arg(long, default_value = "-1:1:101", allow_hyphen_values = true)]
    pub grid: String,
    /// Hölder exponent; defaults to the spec's.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// ordered, secant or strict; `track` defaults to secant, `certify` and
    /// `report` to ordered.
    #[arg(long)]
    pub strategy: Option<Strategy>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// 1-based ordered index the selection starts on.
    #[arg(long)]
    pub start_index: Option<usize>,
    #[arg(long)]
    pub tol_switch: Option<f64>,
    #[arg(long)]
    pub tol_crossing: Option<f64>,
    /// Skip the midpoint pass over crossings no node resolves.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyOnly {
    #[arg(long)]
    pub claimed_bound: Option<f64>,
    /// all, dyadic or auto.
    #[arg(long, default_value = "auto")]
    pub pair_policy: PairPolicy,
    /// Skip the matrix-level constant, which costs one eigensolve per pair.
    #[arg(long)]
    pub no_matrix_constant: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub certify: CertifyOnly,
}

#[derive(Debug, Clone, Args)]
pub struct ContourArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Initial quadrature nodes; doubled until the projector is idempotent.
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub contour: ContourArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub certify: CertifyOnly,
    #[command(flatten)]
    pub contour: ContourArgs,
}

#[derive(Debug)]
enum Failure {
    BadInput(String),
    Check(String),
}

impl From<SpectraError> for Failure {
    fn from(e: SpectraError) -> Self {
        if e.is_bad_input() {
            Failure::BadInput(e.to_string())
        } else {
            Failure::Check(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::BadInput(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
}

#[derive(Debug, Clone, Serialize)]
struct GridInfo {
    lo: f64,
    hi: f64,
    nodes: usize,
}

#[derive(Debug, Serialize)]
struct Summary {
    command: &'static str,
    family: Option<Value>,
    grid: Option<GridInfo>,
    alpha: Option<f64>,
    checks: Vec<Check>,
    files: Vec<String>,
    passed: bool,
    exit_code: i32,
    error: Option<String>,
}

/// Artifacts and checks accumulated by a run; nothing touches the disk
/// until the run is over.
#[derive(Default)]
struct Run {
    family: Option<Value>,
    grid: Option<GridInfo>,
    alpha: Option<f64>,
    checks: Vec<Check>,
    artifacts: Vec<(String, Vec<u8>)>,
}

impl Run {
    fn check(&mut self, name: &'static str, passed: bool) {
        self.checks.push(Check { name, passed });
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
        bytes.push(b'\n');
        self.artifacts.push((name.to_string(), bytes));
    }

    fn csv(&mut self, name: &str, branches: &[Branch]) {
        let mut bytes = Vec::new();
        write_branches_csv(branches, &mut bytes).expect("writing to memory");
        self.artifacts.push((name.to_string(), bytes));
    }
}

fn read_spec(args: &SpecArgs) -> CliResult<FamilySpec> {
    let text = if args.spec.trim_start().starts_with('{') {
        args.spec.clone()
    } else {
        fs::read_to_string(&args.spec).map_err(|e| Failure::BadInput(format!("cannot read spec `{}`: {e}", args.spec)))?
    };
    Ok(FamilySpec::from_json(&text)?)
}

fn load_family(args: &SpecArgs) -> CliResult<(FamilySpec, ParamFamily)> {
    let spec = read_spec(args)?;
    let family = spec.build(args.seed)?;
    Ok((spec, family))
}

/// Parses `lo:hi:nodes` or `t0,t1,...`.
pub fn parse_grid(text: &str) -> crate::Result<Vec<f64>> {
    let bad = |reason: String| SpectraError::InvalidArgument { name: "grid", reason };
    let number = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [lo, hi, nodes] => {
            let nodes = nodes.trim().parse::<usize>().map_err(|e| bad(format!("`{nodes}`: {e}")))?;
            uniform_grid(number(lo)?, number(hi)?, nodes)?
        }
        [list] => list.split(',').map(number).collect::<crate::Result<Vec<f64>>>()?,
        _ => return Err(bad(format!("`{text}` is neither lo:hi:nodes nor a list"))),
    };
    if grid.len() < 2 {
        return Err(bad("need at least two nodes".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(bad("nodes must be finite".into()));
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[0] < w[1]) {
            return Err(SpectraError::DegenerateGrid { index: i + 1 });
        }
    }
    Ok(grid)
}

struct Setup {
    family: ParamFamily,
    grid: Vec<f64>,
    alpha: f64,
}

fn setup(run: &mut Run, args: &RunArgs) -> CliResult<Setup> {
    let (spec, family) = load_family(&args.spec)?;
    run.family = Some(serde_json::to_value(family.summary()).expect("summary serializes"));
    let grid = parse_grid(&args.grid)?;
    run.grid = Some(GridInfo { lo: grid[0], hi: grid[grid.len() - 1], nodes: grid.len() });
    let alpha = args.alpha.unwrap_or(spec.alpha());
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Failure::BadInput(format!("alpha {alpha} is outside (0, 1]")));
    }
    run.alpha = Some(alpha);
    if family.param_dim() != 1 {
        return Err(Failure::BadInput(format!("family has {} parameters; the CLI tracks along one", family.param_dim())));
    }
    Ok(Setup { family, grid, alpha })
}

fn track_options(args: &RunArgs, n: usize, default_start: Option<usize>, default_strategy: Strategy) -> CliResult<TrackOptions> {
    let start_index = match args.start_index.or(default_start) {
        Some(k) if k == 0 || k > n => {
            return Err(Failure::BadInput(format!("start index {k} is outside 1..={n}")));
        }
        Some(k) => Some(k - 1),
        None => None,
    };
    for (name, tol) in [("tol-switch", args.tol_switch), ("tol-crossing", args.tol_crossing)] {
        if let Some(t) = tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Failure::BadInput(format!("{name} must be a nonnegative number")));
            }
        }
    }
    Ok(TrackOptions {
        strategy: args.strategy.unwrap_or(default_strategy),
        start_index,
        switch_tol: args.tol_switch,
        crossing_tol: args.tol_crossing,
        refine: !args.no_refine,
    })
}

#[derive(Serialize)]
struct CrossingEntry {
    t_lo: f64,
    t_hi: f64,
    /// 1-based ordered indices.
    pair: [usize; 2],
    min_gap: f64,
    at_node: bool,
}

#[derive(Serialize)]
struct SwitchEntry {
    t: f64,
    from: usize,
    to: usize,
}

#[derive(Serialize)]
struct CrossingsReport {
    switch_tol: f64,
    crossing_tol: f64,
    nodes: usize,
    count: usize,
    events: Vec<CrossingEntry>,
    selection_switches: Option<Vec<SwitchEntry>>,
}

fn crossings_report(tr: &Tracking) -> CrossingsReport {
    let events: Vec<CrossingEntry> = tr
        .crossings
        .iter()
        .map(|e| CrossingEntry { t_lo: e.t_lo, t_hi: e.t_hi, pair: [e.pair + 1, e.pair + 2], min_gap: e.min_gap, at_node: e.at_node })
        .collect();
    let selection_switches = tr.selection.as_ref().map(|b| {
        b.switch_points.iter().map(|sp| SwitchEntry { t: b.grid[sp.node], from: sp.from + 1, to: sp.to + 1 }).collect()
    });
    CrossingsReport {
        switch_tol: tr.switch_tol,
        crossing_tol: tr.crossing_tol,
        nodes: tr.samples.len(),
        count: events.len(),
        events,
        selection_switches,
    }
}

fn cmd_track(run: &mut Run, args: &RunArgs) -> CliResult<()> {
    let s = setup(run, args)?;
    let opts = track_options(args, s.family.matrix_dim(), None, Strategy::Secant)?;
    let tr = track(&s.family, &s.grid, &opts)?;
    run.csv("branches.csv", &tr.ordered);
    if let Some(sel) = &tr.selection {
        run.csv("selection.csv", std::slice::from_ref(sel));
    }
    run.json("crossings.json", &crossings_report(&tr));
    run.check("tracking", true);
    Ok(())
}

#[derive(Serialize)]
struct OrderedConstant {
    index: usize,
    constant: f64,
    witness: [f64; 2],
}

#[derive(Serialize)]
#[serde(untagged)]
enum GronwallEntry {
    Checked { growth: GrowthModel, report: GronwallReport },
    Failed { error: String },
}

#[derive(Serialize)]
struct CertifyReport {
    alpha: f64,
    pair_policy: PairPolicy,
    start_index: usize,
    certificate: HolderCertificate,
    ordered: Vec<OrderedConstant>,
    transfer: TransferReport,
    matrix: Option<MatrixHolder>,
    weyl_transfer_holds: Option<bool>,
    gronwall: Option<GronwallEntry>,
    note: &'static str,
}

fn certify(run: &mut Run, s: &Setup, tr: &Tracking, start: usize, c: &CertifyOnly) -> CliResult<()> {
    if let Some(b) = c.claimed_bound {
        if !(b >= 0.0) {
            return Err(Failure::BadInput("claimed bound must be nonnegative".into()));
        }
    }
    let selection = tr.selection.as_ref().expect("certify always requests a selection");
    let policy = c.pair_policy;
    let certificate = holder_constant(selection, s.alpha, policy)?.with_claimed_bound(c.claimed_bound);
    let mut ordered = Vec::with_capacity(tr.ordered.len());
    for (i, b) in tr.ordered.iter().enumerate() {
        let cert = holder_constant(b, s.alpha, policy)?;
        ordered.push(OrderedConstant { index: i + 1, constant: cert.constant, witness: cert.witness });
    }
    let transfer = transfer_bound(&tr.ordered, selection, s.alpha, policy)?;
    let matrix = if c.no_matrix_constant {
        None
    } else {
        Some(matrix_holder_constant(&s.family, &selection.grid, s.alpha, policy)?)
    };
    let weyl_transfer_holds =
        matrix.as_ref().map(|m| transfer.c_ordered <= m.constant + BOUND_SLACK * (1.0 + m.constant));
    let gronwall = (s.alpha == 1.0).then(|| match estimate_growth_constant(selection, None) {
        Ok(growth) => match gronwall_check(selection, &growth) {
            Ok(report) => GronwallEntry::Checked { growth, report },
            Err(e) => GronwallEntry::Failed { error: e.to_string() },
        },
        Err(e) => GronwallEntry::Failed { error: e.to_string() },
    });

    run.check("certificate", certificate.passed);
    run.check("transfer_bound", transfer.holds);
    if let Some(holds) = weyl_transfer_holds {
        run.check("weyl_transfer", holds);
    }
    if let Some(g) = &gronwall {
        run.check("gronwall", matches!(g, GronwallEntry::Checked { report, .. } if report.holds));
    }
    run.json("certificate.json", &certificate);
    run.json(
        "certify_report.json",
        &CertifyReport {
            alpha: s.alpha,
            pair_policy: policy,
            start_index: start + 1,
            certificate: certificate.clone(),
            ordered,
            transfer,
            matrix,
            weyl_transfer_holds,
            gronwall,
            note: CERTIFICATE_NOTE,
        },
    );
    Ok(())
}

fn cmd_certify(run: &mut Run, args: &CertifyArgs) -> CliResult<()> {
    let s = setup(run, &args.run)?;
    let opts = track_options(&args.run, s.family.matrix_dim(), Some(1), Strategy::Ordered)?;
    let tr = track(&s.family, &s.grid, &opts)?;
    run.csv("selection.csv", std::slice::from_ref(tr.selection.as_ref().expect("requested")));
    certify(run, &s, &tr, opts.start_index.expect("requested"), &args.certify)
}

#[derive(Serialize)]
struct NodeEntry {
    t: f64,
    rank: Option<usize>,
    trace_re: Option<f64>,
    trace_im: Option<f64>,
    idempotency_defect: Option<f64>,
    hermiticity_defect: Option<f64>,
    quadrature_nodes: Option<usize>,
    block_eigenvalues: Option<Vec<f64>>,
    /// 1-based ordered indices of the eigenvalues inside the contour.
    enclosed_indices: Vec<usize>,
    comparison_error: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct FailureEntry {
    node: usize,
    t: f64,
    error: String,
}

#[derive(Serialize)]
struct ProjectorReport {
    center: f64,
    radius: f64,
    initial_quadrature_nodes: usize,
    rank: Option<usize>,
    rank_constant: bool,
    first_failure: Option<FailureEntry>,
    max_comparison_error: f64,
    comparison_tolerance: f64,
    nodes: Vec<NodeEntry>,
}

fn project_node(family: &ParamFamily, t: f64, gamma: &Contour) -> crate::Result<(Vec<f64>, Result<crate::tracking::ProjectedSample, SpectraError>)> {
    let values = eig_ordered(&family.eval_at(t)?).values;
    Ok((values, project_at(family, t, gamma)))
}

fn project(run: &mut Run, s: &Setup, c: &ContourArgs) -> CliResult<()> {
    let (Some(center), Some(radius)) = (c.center, c.radius) else {
        return Err(Failure::BadInput("project needs --center and --radius".into()));
    };
    let gamma = Contour::new(center, radius, c.nodes)?;
    let per_node: Vec<(Vec<f64>, crate::Result<crate::tracking::ProjectedSample>)> =
        s.grid.par_iter().map(|&t| project_node(&s.family, t, &gamma)).collect::<crate::Result<_>>()?;

    let scale = per_node.iter().flat_map(|(v, _)| v.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    let tolerance = BLOCK_AGREEMENT_TOL * (1.0 + scale);
    let mut nodes = Vec::with_capacity(per_node.len());
    let mut first_failure = None;
    let mut max_err = 0.0f64;
    let mut count_mismatch = false;
    for (j, (values, projected)) in per_node.into_iter().enumerate() {
        let t = s.grid[j];
        let enclosed: Vec<usize> = (0..values.len()).filter(|&i| gamma.encloses(values[i])).collect();
        let entry = match projected {
            Ok(p) => {
                let comparison_error = if p.block_eigenvalues.len() == enclosed.len() {
                    let err = enclosed.iter().zip(&p.block_eigenvalues).map(|(&i, b)| (values[i] - b).abs()).fold(0.0, f64::max);
                    max_err = max_err.max(err);
                    Some(err)
                } else {
                    count_mismatch = true;
                    None
                };
                NodeEntry {
                    t,
                    rank: Some(p.diagnostics.rank),
                    trace_re: Some(p.diagnostics.trace_re),
                    trace_im: Some(p.diagnostics.trace_im),
                    idempotency_defect: Some(p.diagnostics.idempotency_defect),
                    hermiticity_defect: Some(p.diagnostics.hermiticity_defect),
                    quadrature_nodes: Some(p.diagnostics.nodes),
                    block_eigenvalues: Some(p.block_eigenvalues),
                    enclosed_indices: enclosed.iter().map(|i| i + 1).collect(),
                    comparison_error,
                    error: None,
                }
            }
            Err(e) => {
                if first_failure.is_none() {
                    first_failure = Some(FailureEntry { node: j, t, error: e.to_string() });
                }
                NodeEntry {
                    t,
                    rank: None,
                    trace_re: None,
                    trace_im: None,
                    idempotency_defect: None,
                    hermiticity_defect: None,
                    quadrature_nodes: None,
                    block_eigenvalues: None,
                    enclosed_indices: enclosed.iter().map(|i| i + 1).collect(),
                    comparison_error: None,
                    error: Some(e.to_string()),
                }
            }
        };
        nodes.push(entry);
    }
    let ranks: Vec<usize> = nodes.iter().filter_map(|n| n.rank).collect();
    let rank = ranks.first().copied();
    let rank_constant = ranks.iter().all(|&r| Some(r) == rank);
    if first_failure.is_none() && !rank_constant {
        // an eigenvalue crossed γ between two nodes
        let expected = rank.expect("some node has a rank");
        let (j, found) = nodes.iter().enumerate().find_map(|(j, n)| n.rank.filter(|&r| r != expected).map(|r| (j, r))).unwrap();
        let t = s.grid[j];
        first_failure = Some(FailureEntry { node: j, t, error: SpectraError::RankChanged { expected, found, t }.to_string() });
    }

    run.check("contour_admissible", first_failure.is_none());
    run.check("rank_constant", rank_constant);
    run.check("block_agreement", !count_mismatch && max_err <= tolerance);
    run.json(
        "projector_report.json",
        &ProjectorReport {
            center,
            radius,
            initial_quadrature_nodes: c.nodes,
            rank,
            rank_constant,
            first_failure,
            max_comparison_error: max_err,
            comparison_tolerance: tolerance,
            nodes,
        },
    );
    Ok(())
}

fn cmd_project(run: &mut Run, args: &ProjectArgs) -> CliResult<()> {
    let s = setup(run, &args.run)?;
    project(run, &s, &args.contour)
}

fn cmd_report(run: &mut Run, args: &ReportArgs) -> CliResult<()> {
    let s = setup(run, &args.run)?;
    let opts = track_options(&args.run, s.family.matrix_dim(), Some(1), Strategy::Ordered)?;
    let tr = track(&s.family, &s.grid, &opts)?;
    run.csv("branches.csv", &tr.ordered);
    run.csv("selection.csv", std::slice::from_ref(tr.selection.as_ref().expect("requested")));
    run.json("crossings.json", &crossings_report(&tr));
    run.check("tracking", true);
    certify(run, &s, &tr, opts.start_index.expect("requested"), &args.certify)?;
    if args.contour.center.is_some() || args.contour.radius.is_some() {
        project(run, &s, &args.contour)?;
    }
    Ok(())
}

fn write_outputs(out: &Path, run: &Run, summary: &Summary) -> std::io::Result<()> {
    fs::create_dir_all(out)?;
    for (name, bytes) in &run.artifacts {
        fs::write(out.join(name), bytes)?;
    }
    let mut bytes = serde_json::to_vec_pretty(summary).expect("summary serializes");
    bytes.push(b'\n');
    fs::write(out.join("summary.json"), bytes)
}

fn finish(command: &'static str, out: &Path, run: Run, result: CliResult<()>) -> i32 {
    let (mut exit_code, error) = match &result {
        Ok(()) if run.checks.iter().all(|c| c.passed) => (EXIT_OK, None),
        Ok(()) => (EXIT_CHECK_FAILED, None),
        Err(Failure::Check(msg)) => (EXIT_CHECK_FAILED, Some(msg.clone())),
        Err(Failure::BadInput(msg)) => (EXIT_BAD_INPUT, Some(msg.clone())),
    };
    if let Some(msg) = &error {
        eprintln!("error: {msg}");
    }
    for c in run.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {}", c.name);
    }
    let mut files: Vec<String> = run.artifacts.iter().map(|(n, _)| n.clone()).collect();
    files.push("summary.json".into());
    let summary = Summary {
        command,
        family: run.family.clone(),
        grid: run.grid.clone(),
        alpha: run.alpha,
        checks: run.checks.clone(),
        files,
        passed: exit_code == EXIT_OK,
        exit_code,
        error,
    };
    if let Err(e) = write_outputs(out, &run, &summary) {
        eprintln!("error: cannot write to {}: {e}", out.display());
        exit_code = EXIT_BAD_INPUT;
    }
    exit_code
}

fn cmd_gen(args: &GenArgs) -> i32 {
    let family = match load_family(&args.spec) {
        Ok((_, f)) => f,
        Err(Failure::BadInput(msg)) | Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_BAD_INPUT;
        }
    };
    let mut text = serde_json::to_string_pretty(&family.summary()).expect("summary serializes");
    text.push('\n');
    print!("{text}");
    if let Some(out) = &args.out {
        if let Err(e) = fs::create_dir_all(out).and_then(|_| fs::write(out.join("family.json"), &text)) {
            eprintln!("error: cannot write to {}: {e}", out.display());
            return EXIT_BAD_INPUT;
        }
    }
    EXIT_OK
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("SPECTRA_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| format!("SPECTRA_THREADS=`{value}` is not a count"))?;
    if threads == 0 {
        return Err("SPECTRA_THREADS must be at least 1".into());
    }
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(cli: Cli) -> i32 {
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_BAD_INPUT;
    }
    let mut run = Run::default();
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Track(a) => {
            let r = cmd_track(&mut run, a);
            finish("track", &a.out, run, r)
        }
        Command::Certify(a) => {
            let r = cmd_certify(&mut run, a);
            finish("certify", &a.run.out, run, r)
        }
        Command::Project(a) => {
            let r = cmd_project(&mut run, a);
            finish("project", &a.run.out, run, r)
        }
        Command::Report(a) => {
            let r = cmd_report(&mut run, a);
            finish("report", &a.run.out, run, r)
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let _ = e.print();
            let _ = std::io::stdout().flush();
            code
        }
    }
}
