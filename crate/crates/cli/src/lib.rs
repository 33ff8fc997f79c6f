//! Command-line front end: argument parsing, validation and the four
//! subcommands. `main.rs` only maps the outcome to an exit code.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bienayme::analysis::{
    concentration_report, crt_height_gof, default_grid, feasible_sizes, heights_within_size,
    is_feasible, largest_blob_and_outdegree, original_contour_scale, reduced_contour_scale,
    rescaled_contour, sup_distance, tail_curve, write_contour_csv, write_reports_csv,
    write_tail_csv, BlobTargets, ConcentrationConfig, StatReport, TailConfig, TreeSummary,
    CONTOUR_GRID, MIN_GOF_REPLICATES,
};
use bienayme::exec::Executor;
use bienayme::kernel::{
    classify_family, load_family, solve_tilt, tilt, Criticality, FamilyConstants, FamilyDoc,
    OffspringFamily, TiltSolverOptions,
};
use bienayme::sampler::{
    read_batch_trees, read_manifest, replay, run_batch, write_batch, BatchRequest, Manifest,
    Method, SampleBudget, MANIFEST_FILE,
};
use bienayme::tree::{reduce, MultitypeTree};
use bienayme::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "bienayme",
    version,
    about = "Critical multitype Bienaymé trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the spectral and scaling constants of a family.
    Inspect(InspectArgs),
    /// Sample a batch of trees to disk.
    Sample(SampleArgs),
    /// Run the statistical suites on a batch.
    Verify(VerifyArgs),
    /// Solve for the exponential tilt that makes a family critical in a
    /// given direction.
    Tilt(TiltArgs),
    /// Rerun a batch from its manifest and compare the tree file byte for byte.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Family JSON file, or `preset:<name>`.
    #[arg(long)]
    pub family: String,
    /// Override the weight vector λ (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Also write `inspect.json` into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Bound for the feasible-size lattice.
    #[arg(long, default_value_t = 64)]
    pub feasible_bound: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rejection,
    Exact,
    ByType,
    Unconditioned,
    Spine,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rejection => Method::Rejection,
            MethodArg::Exact => Method::Exact,
            MethodArg::ByType => Method::ByType,
            MethodArg::Unconditioned => Method::Unconditioned,
            MethodArg::Spine => Method::Spine,
        }
    }
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Target `#_λ` (rejection, exact) or spine length (spine).
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub replicates: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    /// 1-based types conditioned on (by-type).
    #[arg(long, value_delimiter = ',')]
    pub types: Vec<usize>,
    /// Target counts for `--types` (by-type).
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<u64>,
    /// Skip the feasibility check.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub max_vertices: Option<usize>,
    #[arg(long)]
    pub max_attempts: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub batch: BatchArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Concentration,
    Blobs,
    Tail,
    Gof,
    Contour,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Concentration => "concentration",
            Suite::Blobs => "blobs",
            Suite::Tail => "tail",
            Suite::Gof => "gof",
            Suite::Contour => "contour",
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Existing batch directory; when absent a batch is sampled inline.
    #[arg(long, conflicts_with = "family")]
    pub batch: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<u64>>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub replicates: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Suites to run (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub suite: Vec<Suite>,
    /// Blob simulations for the Monte Carlo concentration targets.
    #[arg(long, default_value_t = 1_000_000)]
    pub blob_sims: u64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Band width in propagated standard errors.
    #[arg(long, default_value_t = 4.0)]
    pub se_band: f64,
    /// `C` in the `C ln n` outdegree bound.
    #[arg(long, default_value_t = 20.0)]
    pub log_constant: f64,
    /// KS acceptance threshold for the height law.
    #[arg(long, default_value_t = 0.03)]
    pub ks_threshold: f64,
    #[arg(long, default_value_t = MIN_GOF_REPLICATES)]
    pub min_gof_replicates: usize,
    /// Number of replicates whose contours are exported.
    #[arg(long, default_value_t = 8)]
    pub contours: usize,
    /// Median sup-distance band between reduced and original contours.
    #[arg(long, default_value_t = 0.1)]
    pub contour_band: f64,
}

#[derive(Debug, Args)]
pub struct TiltArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// 1-based types the direction refers to (default: 1..=K).
    #[arg(long, value_delimiter = ',')]
    pub types: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub direction: Vec<f64>,
    /// Write the tilted family to this JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Batch directory holding `manifest.json`.
    #[arg(long)]
    pub batch: PathBuf,
    /// Directory for the regenerated batch (default: a `replay` subdirectory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Why a command stopped.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    /// A suite ran and at least one check failed.
    Failed(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_SOLVER: i32 = 5;

pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Failed(_) => EXIT_FAILED,
        CliError::Core(e) => match e {
            Error::Infeasible { .. } => EXIT_INFEASIBLE,
            Error::BudgetExhausted { .. }
            | Error::Overflow { .. }
            | Error::TruncationTooCoarse { .. } => EXIT_BUDGET,
            Error::NoConvergence(_) | Error::NonConvergence { .. } => EXIT_SOLVER,
            Error::InsufficientData(_) => EXIT_FAILED,
            _ => EXIT_CONFIG,
        },
    }
}

fn config(path: &str, message: impl Into<String>) -> CliError {
    CliError::Core(Error::Config {
        path: path.into(),
        message: message.into(),
    })
}

fn load(spec: &str, lambda: &Option<Vec<u64>>) -> CliResult<OffspringFamily> {
    let (family, _) = load_family(spec)?;
    match lambda {
        Some(l) => family
            .with_lambda(l.clone())
            .map_err(|e| config("lambda", e.to_string())),
        None => Ok(family),
    }
}

fn json_string<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Core(Error::Codec(e.to_string())))
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Inspect(a) => cmd_inspect(&a, out),
        Command::Sample(a) => cmd_sample(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Tilt(a) => cmd_tilt(&a, out),
        Command::Replay(a) => cmd_replay(&a, out),
    }
}

#[derive(Debug, Serialize)]
pub struct InspectReport {
    pub family_hash: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "Kprime")]
    pub k_prime: usize,
    pub lambda: Vec<u64>,
    pub mean_matrix: Vec<Vec<f64>>,
    pub radius: f64,
    pub subcritical_radius: f64,
    pub classification: Criticality,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub sigma2: f64,
    pub c_scal: f64,
    pub c_scal_by_type: f64,
    pub flattened_means: Vec<f64>,
    pub c1: f64,
    pub feasible_offset: Option<u64>,
    pub feasible_period: Option<u64>,
}

pub fn inspect_report(family: &OffspringFamily, feasible_bound: u64) -> CliResult<InspectReport> {
    let profile = classify_family(family)?;
    let a = &profile.mean_matrix;
    let mean_matrix = (0..a.nrows())
        .map(|i| a.row(i).iter().copied().collect())
        .collect();
    if !profile.irreducible_on_critical_block {
        return Err(Error::ReducibleCriticalBlock.into());
    }
    if profile.classification != Criticality::Critical {
        return Err(Error::NotCritical {
            radius: profile.radius,
        }
        .into());
    }
    let c = FamilyConstants::compute(family)?;
    let feasible = feasible_sizes(family, feasible_bound);
    Ok(InspectReport {
        family_hash: family.hash_hex(),
        k: family.k(),
        k_prime: family.k_prime(),
        lambda: family.lambda().to_vec(),
        mean_matrix,
        radius: profile.radius,
        subcritical_radius: profile.subcritical_radius,
        classification: profile.classification,
        a: c.vectors.a.iter().copied().collect(),
        b: c.vectors.b.iter().copied().collect(),
        sigma2: c.sigma2,
        c_scal: c.c_scal,
        c_scal_by_type: c.c_scal_by_type,
        flattened_means: c.flattened.means.clone(),
        c1: c.flattened.c1,
        feasible_offset: feasible.offset,
        feasible_period: (feasible.period > 0).then_some(feasible.period),
    })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12}")).collect();
    format!("({})", parts.join(", "))
}

fn cmd_inspect(args: &InspectArgs, out: &mut dyn Write) -> CliResult<()> {
    let family = load(&args.family.family, &args.family.lambda)?;
    let r = inspect_report(&family, args.feasible_bound)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("inspect.json"), json_string(&r)? + "\n")?;
    }
    if args.json {
        writeln!(out, "{}", json_string(&r)?)?;
        return Ok(());
    }
    writeln!(out, "family hash     {}", r.family_hash)?;
    writeln!(out, "K, K'           {}, {}", r.k, r.k_prime)?;
    writeln!(out, "lambda          {:?}", r.lambda)?;
    writeln!(out, "mean matrix")?;
    for row in &r.mean_matrix {
        writeln!(out, "  {}", fmt_vec(row))?;
    }
    writeln!(
        out,
        "rho             {:.12} ({:?})",
        r.radius, r.classification
    )?;
    if r.k_prime > 0 {
        writeln!(out, "rho(M')         {:.12}", r.subcritical_radius)?;
    }
    writeln!(out, "a               {}", fmt_vec(&r.a))?;
    writeln!(out, "b               {}", fmt_vec(&r.b))?;
    writeln!(out, "sigma^2         {:.12}", r.sigma2)?;
    writeln!(out, "c_scal          {:.12}", r.c_scal)?;
    writeln!(out, "c_scal (types)  {:.12}", r.c_scal_by_type)?;
    writeln!(out, "E[xi~_i]        {}", fmt_vec(&r.flattened_means))?;
    writeln!(out, "c1              {:.12}", r.c1)?;
    match (r.feasible_offset, r.feasible_period) {
        (Some(o), Some(d)) => writeln!(
            out,
            "feasible n      {o} mod {d} (bound {})",
            args.feasible_bound
        )?,
        _ => writeln!(out, "feasible n      none up to {}", args.feasible_bound)?,
    }
    Ok(())
}

/// Validated parameters of a sampling run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub family: OffspringFamily,
    pub request: BatchRequest,
}

impl RunConfig {
    pub fn from_args(args: &BatchArgs) -> CliResult<Self> {
        let family = load(&args.family.family, &args.family.lambda)?;
        Self::build(
            family,
            args.n,
            args.replicates,
            args.seed,
            args.method,
            &args.types,
            &args.targets,
            args,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        family: OffspringFamily,
        n: Option<u64>,
        replicates: u64,
        seed: u64,
        method: MethodArg,
        types: &[usize],
        targets: &[u64],
        args: &BatchArgs,
    ) -> CliResult<Self> {
        let mut budget = SampleBudget::default();
        if let Some(v) = args.max_vertices {
            if v == 0 {
                return Err(config("max_vertices", "must be positive"));
            }
            budget.max_vertices = v;
        }
        if let Some(a) = args.max_attempts {
            if a == 0 {
                return Err(config("max_attempts", "must be positive"));
            }
            budget.max_attempts = a;
        }
        if replicates == 0 {
            return Err(config("replicates", "must be positive"));
        }
        let method: Method = method.into();
        match method {
            Method::Rejection | Method::Exact | Method::Spine if n.is_none() => {
                return Err(config("n", "required by this method"));
            }
            Method::ByType => {
                if types.is_empty() || types.len() != targets.len() {
                    return Err(config(
                        "types",
                        "by-type needs --types and --targets of equal length",
                    ));
                }
                if let Some(&t) = types.iter().find(|&&t| t == 0 || t > family.num_types()) {
                    return Err(config(
                        "types",
                        format!("type {t} outside 1..={}", family.num_types()),
                    ));
                }
            }
            _ => {}
        }
        if matches!(method, Method::Rejection | Method::Exact) && !args.force {
            let n = n.unwrap_or(0);
            if !is_feasible(&family, n) {
                return Err(Error::Infeasible { n }.into());
            }
        }
        Ok(RunConfig {
            family,
            request: BatchRequest {
                method,
                n,
                types: types.to_vec(),
                targets: targets.to_vec(),
                replicates,
                seed,
                first_stream: 0,
                budget,
            },
        })
    }
}

fn cmd_sample(args: &SampleArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = RunConfig::from_args(&args.batch)?;
    let exec = Executor::from_env()?;
    let result = run_batch(&cfg.family, &cfg.request, &exec)?;
    let m = write_batch(&args.out, &cfg.family, &cfg.request, &result)?;
    writeln!(
        out,
        "wrote {} trees to {} (attempts {}, overflows {}, sha256 {})",
        m.trees_written,
        args.out.display(),
        m.total_attempts,
        m.overflow_count,
        m.trees_sha256
    )?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub pass: bool,
    /// Set when the suite could not run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub reports: Vec<StatReport>,
}

#[derive(Debug, Serialize)]
pub struct VerifySummary {
    pub family_hash: String,
    pub seed: u64,
    pub n: u64,
    pub replicates: u64,
    pub batch_manifest: String,
    pub bands: serde_json::Value,
    pub suites: Vec<SuiteResult>,
    pub pass: bool,
}

fn write_file(
    path: &Path,
    f: impl FnOnce(BufWriter<File>) -> bienayme::Result<()>,
) -> CliResult<()> {
    f(BufWriter::new(File::create(path)?))?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult<()> {
    let exec = Executor::from_env()?;
    std::fs::create_dir_all(&args.out)?;
    let (manifest, trees): (Manifest, Vec<MultitypeTree>) = match &args.batch {
        Some(dir) => (
            read_manifest(&dir.join(MANIFEST_FILE))?,
            read_batch_trees(dir)?,
        ),
        None => {
            let spec = args
                .family
                .as_deref()
                .ok_or_else(|| config("family", "need --family or --batch"))?;
            let family = load(spec, &args.lambda)?;
            let batch_args = BatchArgs {
                family: FamilyArgs {
                    family: spec.into(),
                    lambda: args.lambda.clone(),
                },
                n: args.n,
                replicates: args.replicates,
                seed: args.seed,
                method: args.method,
                types: vec![],
                targets: vec![],
                force: args.force,
                max_vertices: None,
                max_attempts: None,
            };
            let cfg = RunConfig::build(
                family,
                args.n,
                args.replicates,
                args.seed,
                args.method,
                &[],
                &[],
                &batch_args,
            )?;
            let result = run_batch(&cfg.family, &cfg.request, &exec)?;
            let dir = args.out.join("batch");
            let m = write_batch(&dir, &cfg.family, &cfg.request, &result)?;
            (m, result.into_trees())
        }
    };
    let family = bienayme::kernel::parse_family(
        &serde_json::to_string(&manifest.family)
            .map_err(|e| CliError::Core(Error::Codec(e.to_string())))?,
    )?;
    if trees.is_empty() {
        return Err(Error::InsufficientData("the batch holds no trees".into()).into());
    }
    let summaries = exec.try_map(0..trees.len() as u64, |i| {
        TreeSummary::new(&trees[i as usize], family.lambda())
    })?;
    let n = bienayme::analysis::common_size(&summaries)?;
    let consts = FamilyConstants::compute(&family)?;
    let suites = if args.suite.is_empty() {
        vec![
            Suite::Concentration,
            Suite::Blobs,
            Suite::Tail,
            Suite::Gof,
            Suite::Contour,
        ]
    } else {
        args.suite.clone()
    };
    let conc_cfg = ConcentrationConfig {
        delta: args.delta,
        se_band: args.se_band,
        log_constant: args.log_constant,
        ..ConcentrationConfig::default()
    };
    let tail_cfg = TailConfig::default();
    let heights: Vec<u32> = summaries.iter().map(|s| s.height).collect();
    let seed = manifest.request.seed;
    let needs_targets = suites
        .iter()
        .any(|s| matches!(s, Suite::Concentration | Suite::Contour));
    // streams far above any replicate index
    let targets = if needs_targets {
        Some(BlobTargets::monte_carlo(
            &family,
            args.blob_sims,
            seed,
            1 << 48,
            &exec,
        )?)
    } else {
        None
    };

    let mut results = Vec::new();
    for suite in suites {
        let outcome: CliResult<Vec<StatReport>> = (|| match suite {
            Suite::Concentration => {
                let r = concentration_report(&summaries, targets.as_ref().unwrap(), &conc_cfg)?;
                write_file(&args.out.join("concentration.csv"), |w| {
                    write_reports_csv(w, &r)
                })?;
                Ok(r)
            }
            Suite::Blobs => {
                let r = largest_blob_and_outdegree(&summaries, args.log_constant)?;
                write_file(&args.out.join("blobs.csv"), |w| write_reports_csv(w, &r))?;
                Ok(r)
            }
            Suite::Tail => {
                let curve = tail_curve(&heights, n, &default_grid(&heights), &tail_cfg)?;
                write_file(&args.out.join("tail.csv"), |w| write_tail_csv(w, &curve))?;
                let r = summaries.len() as u64;
                let mut reports = vec![StatReport {
                    statistic: format!(
                        "envelope C={:.6} c={:.6} dominates",
                        curve.big_c, curve.small_c
                    ),
                    estimate: curve.fit_points as f64,
                    se: 0.0,
                    replicates: r,
                    target: None,
                    pass: curve.dominates,
                }];
                if family.lambda().iter().all(|&l| l > 0) {
                    let ok = heights_within_size(&heights, n);
                    reports.push(StatReport {
                        statistic: "P(H<=n)".into(),
                        estimate: heights.iter().filter(|&&h| h as u64 <= n).count() as f64
                            / r as f64,
                        se: 0.0,
                        replicates: r,
                        target: Some(1.0),
                        pass: ok,
                    });
                }
                Ok(reports)
            }
            Suite::Gof => {
                let g = crt_height_gof(
                    &heights,
                    original_contour_scale(consts.c_scal, n),
                    args.min_gof_replicates,
                )?;
                std::fs::write(args.out.join("gof.json"), json_string(&g)? + "\n")?;
                Ok(vec![StatReport {
                    statistic: "KS(c_scal*H/sqrt(n), excursion max)".into(),
                    estimate: g.ks,
                    se: 0.0,
                    replicates: g.replicates,
                    target: Some(args.ks_threshold),
                    pass: g.ks < args.ks_threshold,
                }])
            }
            Suite::Contour => {
                let t = targets.as_ref().unwrap();
                let s_orig = original_contour_scale(consts.c_scal, n);
                let s_red = reduced_contour_scale(t.c1, t.frontier_variance(), n);
                let k = args.contours.min(trees.len());
                let pairs = exec.try_map(0..k as u64, |i| {
                    let tree = &trees[i as usize];
                    let a = rescaled_contour(tree.shape(), s_orig, CONTOUR_GRID);
                    let b = rescaled_contour(&reduce(tree)?, s_red, CONTOUR_GRID);
                    Ok((a, b))
                })?;
                let mut dists: Vec<f64> = pairs.iter().map(|(a, b)| sup_distance(a, b)).collect();
                let (orig, red): (Vec<_>, Vec<_>) = pairs
                    .into_iter()
                    .enumerate()
                    .map(|(i, (a, b))| ((i as u64, a), (i as u64, b)))
                    .unzip();
                write_file(&args.out.join("contour.csv"), |w| {
                    write_contour_csv(w, &orig)
                })?;
                write_file(&args.out.join("contour_reduced.csv"), |w| {
                    write_contour_csv(w, &red)
                })?;
                dists.sort_by(f64::total_cmp);
                let median = if dists.is_empty() {
                    0.0
                } else {
                    dists[dists.len() / 2]
                };
                Ok(vec![StatReport {
                    statistic: "median sup|C_orig - C_red|".into(),
                    estimate: median,
                    se: 0.0,
                    replicates: k as u64,
                    target: Some(args.contour_band),
                    pass: median < args.contour_band,
                }])
            }
        })();
        let res = match outcome {
            Ok(reports) => SuiteResult {
                suite: suite.name().into(),
                pass: reports.iter().all(|r| r.pass),
                error: None,
                reports,
            },
            Err(CliError::Core(e @ Error::InsufficientData(_))) => SuiteResult {
                suite: suite.name().into(),
                pass: false,
                error: Some(e.to_string()),
                reports: vec![],
            },
            Err(e) => return Err(e),
        };
        results.push(res);
    }

    let pass = results.iter().all(|r| r.pass);
    for r in &results {
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        match &r.error {
            Some(e) => writeln!(out, "{verdict} {}: {e}", r.suite)?,
            None => writeln!(out, "{verdict} {}", r.suite)?,
        }
        for s in &r.reports {
            let target = s
                .target
                .map(|t| format!(" target {t:.6}"))
                .unwrap_or_default();
            writeln!(
                out,
                "  {} {} = {:.6} (se {:.2e}){target}",
                if s.pass { "ok  " } else { "FAIL" },
                s.statistic,
                s.estimate,
                s.se
            )?;
        }
    }
    let summary = VerifySummary {
        family_hash: family.hash_hex(),
        seed,
        n,
        replicates: summaries.len() as u64,
        batch_manifest: match &args.batch {
            Some(d) => d.join(MANIFEST_FILE).display().to_string(),
            None => args
                .out
                .join("batch")
                .join(MANIFEST_FILE)
                .display()
                .to_string(),
        },
        bands: serde_json::json!({
            "concentration": conc_cfg,
            "tail": tail_cfg,
            "ks_threshold": args.ks_threshold,
            "min_gof_replicates": args.min_gof_replicates,
            "contour_band": args.contour_band,
            "blob_sims": args.blob_sims,
        }),
        pass,
        suites: results,
    };
    std::fs::write(args.out.join("summary.json"), json_string(&summary)? + "\n")?;
    if let Some(r) = summary.suites.iter().find(|r| r.error.is_some()) {
        return Err(CliError::Failed(format!(
            "{} suite: {}",
            r.suite,
            r.error.as_deref().unwrap_or("")
        )));
    }
    if !pass {
        return Err(CliError::Failed("verification failed".into()));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct TiltReport {
    theta: Vec<f64>,
    radius: f64,
    left_vector: Vec<f64>,
    direction_error: f64,
    iterations: usize,
}

fn cmd_tilt(args: &TiltArgs, out: &mut dyn Write) -> CliResult<()> {
    let family = load(&args.family.family, &args.family.lambda)?;
    let types: Vec<usize> = if args.types.is_empty() {
        (0..family.k()).collect()
    } else {
        if let Some(&t) = args
            .types
            .iter()
            .find(|&&t| t == 0 || t > family.num_types())
        {
            return Err(config(
                "types",
                format!("type {t} outside 1..={}", family.num_types()),
            ));
        }
        args.types.iter().map(|t| t - 1).collect()
    };
    if types.len() != args.direction.len() {
        return Err(config(
            "direction",
            format!("expected {} entries", types.len()),
        ));
    }
    let sol = solve_tilt(
        &family,
        &types,
        &args.direction,
        &TiltSolverOptions::default(),
    )?;
    let report = TiltReport {
        theta: sol.theta.theta.clone(),
        radius: sol.radius,
        left_vector: sol.left_vector.clone(),
        direction_error: sol.direction_error,
        iterations: sol.iterations,
    };
    if let Some(path) = &args.out {
        let tilted = tilt(&family, &sol.theta)?;
        let doc = FamilyDoc::from_family(&tilted, Some("tilted".into()));
        std::fs::write(path, json_string(&doc)? + "\n")?;
    }
    if args.json {
        writeln!(out, "{}", json_string(&report)?)?;
    } else {
        writeln!(out, "theta           {}", fmt_vec(&report.theta))?;
        writeln!(out, "tilted rho      {:.12}", report.radius)?;
        writeln!(out, "left vector     {}", fmt_vec(&report.left_vector))?;
        writeln!(out, "direction error {:.3e}", report.direction_error)?;
    }
    Ok(())
}

fn cmd_replay(args: &ReplayArgs, out: &mut dyn Write) -> CliResult<()> {
    let manifest = read_manifest(&args.batch.join(MANIFEST_FILE))?;
    let exec = Executor::from_env()?;
    let (family, result) = replay(&manifest, &exec)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| args.batch.join("replay"));
    let again = write_batch(&dir, &family, &manifest.request, &result)?;
    if again.trees_sha256 != manifest.trees_sha256 {
        return Err(CliError::Failed(format!(
            "replay produced {} instead of {}",
            again.trees_sha256, manifest.trees_sha256
        )));
    }
    writeln!(
        out,
        "replay matches ({} trees, sha256 {})",
        again.trees_written, again.trees_sha256
    )?;
    Ok(())
}
