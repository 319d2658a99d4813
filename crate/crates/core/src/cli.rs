//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{load_matrix, preprocess, DataMatrix, LabelSource};
use crate::decision::{
    common_threshold_weighted, control_dfdr, control_dfdr_pvalues, estimate_pi0_common,
    maximize_desirability, maximize_desirability_pvalues, per_subset_optimize, pool_subsets,
    DecisionResult, Pi0Choice, Subset, SubsetPartition, DEFAULT_MIN_SUBSET_SIZE,
};
use crate::error::DfdrError;
use crate::estimators::{estimate_dfdr_at_tau, estimate_pi0_auto, CostBenefit, Pi0Estimate};
use crate::resampling::{permutation_null, AbsWelchT, PermutationPlan};
use crate::simulation::{
    measure_local_dfdr, run_replicates, within_bound, BlockDependence, DecisionRule,
    ErrorRateReport, LocalBins, SimulationConfig, TruthMode,
};
use crate::statistics::{two_sample_abs_t, validate_pvalues, StatisticSet};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dfdr", version, about = "Decisive false discovery rate estimation and threshold selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a data matrix (or a p-value file) and choose a rejection threshold.
    Analyze(AnalyzeArgs),
    /// Run a Monte Carlo study of realized error rates.
    Simulate(SimulateArgs),
    /// Re-run the leukemia expression analysis and compare with reference values.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Maximize,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Truth {
    Fixed,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct DecisionArgs {
    #[arg(long, value_enum, default_value = "maximize")]
    pub mode: Mode,
    /// Cost of a false discovery over the benefit of a true one.
    #[arg(long, conflicts_with = "p_threshold")]
    pub cost_ratio: Option<f64>,
    /// Bound on the false-rejection probability; sets cost-ratio = 1/p - 1.
    #[arg(long)]
    pub p_threshold: Option<f64>,
    /// dFDR level for control mode.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// `estimate`, `one`, or a number in [0, 1].
    #[arg(long, default_value = "estimate", value_parser = parse_pi0)]
    pub pi0: Pi0Choice,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(long, required_unless_present = "pvalues")]
    pub matrix: Option<PathBuf>,
    /// Two-column subject/group file; omit to read `subject:group` headers.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub group_a: Option<String>,
    #[arg(long)]
    pub group_b: Option<String>,
    /// One-column p-value file, used instead of a matrix.
    #[arg(long, conflicts_with_all = ["matrix", "subsets", "weights"])]
    pub pvalues: Option<PathBuf>,
    #[command(flatten)]
    pub decision: DecisionArgs,
    #[arg(long, default_value_t = 1000)]
    pub permutations: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Median-normalize each subject and apply the signed log transform.
    #[arg(long)]
    pub preprocess: bool,
    /// Subset file: name, group A, group B, benefit, cost[, feature IDs].
    #[arg(long, conflicts_with = "weights")]
    pub subsets: Option<PathBuf>,
    /// With --subsets, also choose one common threshold by weighted optimization.
    #[arg(long, requires = "subsets")]
    pub common_threshold: bool,
    #[arg(long, default_value_t = DEFAULT_MIN_SUBSET_SIZE)]
    pub min_subset_size: usize,
    /// Per-feature file: feature ID, benefit, cost.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 2000)]
    pub m: usize,
    #[arg(long, default_value_t = 0.8)]
    pub pi0_true: f64,
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    #[arg(long, default_value_t = 10)]
    pub n_a: usize,
    #[arg(long, default_value_t = 10)]
    pub n_b: usize,
    #[arg(long, default_value_t = 2.0)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "fixed")]
    pub truth: Truth,
    /// Equicorrelated block size; requires --rho.
    #[arg(long, requires = "rho")]
    pub block_size: Option<usize>,
    #[arg(long, requires = "block_size")]
    pub rho: Option<f64>,
    #[command(flatten)]
    pub decision: DecisionArgs,
    /// Fraction of each replicate's rejections forming the boundary bin.
    #[arg(long, default_value_t = 0.05)]
    pub boundary_fraction: f64,
    #[arg(long, default_value_t = 20)]
    pub permutations: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value = "ALL")]
    pub group_a: String,
    #[arg(long, default_value = "AML")]
    pub group_b: String,
    /// Third group compared against group A with doubled benefit.
    #[arg(long)]
    pub t_group: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub permutations: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Skip preprocessing (input already transformed).
    #[arg(long)]
    pub no_preprocess: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_pi0(s: &str) -> Result<Pi0Choice, String> {
    match s {
        "estimate" => Ok(Pi0Choice::Estimate),
        "one" | "1" => Ok(Pi0Choice::One),
        _ => {
            let v: f64 = s
                .parse()
                .map_err(|_| format!("expected 'estimate', 'one' or a number, got '{s}'"))?;
            if (0.0..=1.0).contains(&v) {
                Ok(Pi0Choice::Value(v))
            } else {
                Err(format!("pi0 must be in [0, 1], got {v}"))
            }
        }
    }
}

/// Failure of a CLI command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    fn data(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: msg.into(),
        }
    }
}

impl From<DfdrError> for CliError {
    fn from(e: DfdrError) -> Self {
        let code = match e {
            DfdrError::InvalidArgument(_) => EXIT_USAGE,
            DfdrError::Io { .. }
            | DfdrError::Parse { .. }
            | DfdrError::Validation(_)
            | DfdrError::ZeroMedian { .. }
            | DfdrError::UnknownGroup(_)
            | DfdrError::GroupTooSmall { .. }
            | DfdrError::PValueOutOfRange { .. }
            | DfdrError::UndefinedPi0 { .. }
            | DfdrError::SubsetTooSmall { .. } => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let outcome = match &cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Simulate(s) => run_simulate(s).map(|_| ()),
        Command::Reproduce(r) => run_reproduce(r).map(|_| ()),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

impl DecisionArgs {
    fn cost_benefit(&self) -> CliResult<CostBenefit> {
        let cb = match (self.cost_ratio, self.p_threshold) {
            (Some(_), Some(_)) => {
                return Err(CliError::usage("--cost-ratio and --p-threshold are mutually exclusive"))
            }
            (Some(r), None) => CostBenefit::from_ratio(r)?,
            (None, Some(p)) => CostBenefit::from_p_threshold(p)?,
            (None, None) => CostBenefit::from_p_threshold(0.05)?,
        };
        Ok(cb)
    }

    fn validate(&self) -> CliResult<()> {
        self.cost_benefit()?;
        if self.mode == Mode::Control && !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::usage(format!("--alpha must be in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    fn rule(&self) -> CliResult<DecisionRule> {
        let cost_benefit = self.cost_benefit()?;
        Ok(match self.mode {
            Mode::Maximize => DecisionRule::Maximize {
                cost_benefit,
                pi0: self.pi0,
            },
            Mode::Control => DecisionRule::Control {
                alpha: self.alpha,
                cost_benefit,
                pi0: self.pi0,
            },
        })
    }
}

/// Writes `contents` to `path` via a temporary file and rename.
fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let tmp = path.with_extension("tmp");
    let io = |e: std::io::Error| CliError {
        code: EXIT_INTERNAL,
        message: format!("{}: {e}", path.display()),
    };
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError {
        code: EXIT_INTERNAL,
        message: format!("{}: {e}", dir.display()),
    })
}

fn fmt_tau(tau: Option<f64>) -> String {
    tau.map_or("none".to_string(), |t| t.to_string())
}

fn curve_csv(result: &DecisionResult) -> String {
    let mut s = String::from("tau,desirability,dfdr,discoveries\n");
    for p in &result.curve {
        let _ = writeln!(s, "{},{},{},{}", p.tau, p.desirability, p.dfdr, p.discoveries);
    }
    s
}

fn tests_csv(ids: &[String], stats: &[f64], rejected: &[usize]) -> String {
    let mut flags = vec![false; ids.len()];
    for &i in rejected {
        flags[i] = true;
    }
    let mut s = String::from("feature_id,statistic,rejected\n");
    for ((id, t), r) in ids.iter().zip(stats).zip(flags) {
        let _ = writeln!(s, "{id},{t},{}", r as u8);
    }
    s
}

/// Key-value summary record of a decision.
pub struct Summary<'a> {
    pub mode: Mode,
    pub result: &'a DecisionResult,
    pub cost_benefit: CostBenefit,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub permutations: Option<usize>,
    pub tests: usize,
}

impl Summary<'_> {
    pub fn render(&self) -> String {
        let r = self.result;
        let mut s = String::new();
        let mode = match self.mode {
            Mode::Maximize => "maximize",
            Mode::Control => "control",
        };
        let _ = writeln!(s, "mode={mode}");
        let _ = writeln!(s, "tau={}", fmt_tau(r.tau));
        let _ = writeln!(s, "discoveries={}", r.discoveries());
        let _ = writeln!(s, "dfdr={}", r.dfdr);
        let _ = writeln!(s, "desirability={}", r.desirability);
        let _ = writeln!(s, "pi0={}", r.pi0.value);
        let _ = writeln!(s, "pi0_mode={}", r.pi0.mode.as_str());
        let _ = writeln!(s, "lambda={}", r.pi0.lambda.map_or("none".into(), |l| l.to_string()));
        let _ = writeln!(s, "benefit={}", self.cost_benefit.benefit());
        let _ = writeln!(s, "cost={}", self.cost_benefit.cost());
        let _ = writeln!(s, "cost_ratio={}", self.cost_benefit.ratio());
        let _ = writeln!(s, "p_threshold={}", self.cost_benefit.p());
        if let Some(a) = self.alpha {
            let _ = writeln!(s, "alpha={a}");
        }
        let _ = writeln!(s, "tests={}", self.tests);
        if let Some(b) = self.permutations {
            let _ = writeln!(s, "permutations={b}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed={seed}");
        }
        s
    }
}

fn load(args_matrix: &Path, labels: Option<&PathBuf>, pre: bool) -> CliResult<DataMatrix> {
    let source = match labels {
        Some(p) => LabelSource::File(p.clone()),
        None => LabelSource::Header,
    };
    let m = load_matrix(args_matrix, &source)?;
    Ok(if pre { preprocess(&m)? } else { m })
}

fn decide(
    mode: Mode,
    stats: &StatisticSet,
    pi0: &Pi0Estimate,
    cb: &CostBenefit,
    alpha: f64,
) -> CliResult<DecisionResult> {
    Ok(match mode {
        Mode::Maximize => maximize_desirability(stats, pi0, cb),
        Mode::Control => control_dfdr(stats, pi0, alpha, cb)?,
    })
}

/// `analyze` subcommand.
pub fn run_analyze(args: &AnalyzeArgs) -> CliResult<()> {
    args.decision.validate()?;
    let cb = args.decision.cost_benefit()?;
    let alpha = (args.decision.mode == Mode::Control).then_some(args.decision.alpha);
    ensure_dir(&args.out)?;

    if let Some(pv_path) = &args.pvalues {
        let text = fs::read_to_string(pv_path).map_err(|source| DfdrError::Io {
            path: pv_path.clone(),
            source,
        })?;
        let mut raw = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            raw.push(line.parse::<f64>().map_err(|_| DfdrError::Parse {
                path: pv_path.clone(),
                line: i + 1,
                message: format!("'{line}' is not a number"),
            })?);
        }
        let pvals = validate_pvalues(raw)?;
        let pi0 = args.decision.pi0.resolve_pvalues(&pvals)?;
        let result = match args.decision.mode {
            Mode::Maximize => maximize_desirability_pvalues(&pvals, &pi0, &cb),
            Mode::Control => control_dfdr_pvalues(&pvals, &pi0, args.decision.alpha, &cb)?,
        };
        let ids: Vec<String> = (1..=pvals.len()).map(|i| format!("p{i}")).collect();
        let mut table = String::from("feature_id,pvalue,rejected\n");
        let mut flags = vec![false; pvals.len()];
        for &i in &result.rejected {
            flags[i] = true;
        }
        for ((id, p), r) in ids.iter().zip(pvals.values()).zip(flags) {
            let _ = writeln!(table, "{id},{p},{}", r as u8);
        }
        let summary = Summary {
            mode: args.decision.mode,
            result: &result,
            cost_benefit: cb,
            alpha,
            seed: None,
            permutations: None,
            tests: pvals.len(),
        };
        write_atomic(&args.out.join("tests.csv"), &table)?;
        write_atomic(&args.out.join("summary.txt"), &summary.render())?;
        write_atomic(&args.out.join("curve.csv"), &curve_csv(&result))?;
        return Ok(());
    }

    let matrix_path = args
        .matrix
        .as_ref()
        .ok_or_else(|| CliError::usage("--matrix or --pvalues is required"))?;
    let matrix = load(matrix_path, args.labels.as_ref(), args.preprocess)?;
    let plan = PermutationPlan::new(args.permutations, args.seed)?;

    if let Some(subsets_path) = &args.subsets {
        if args.decision.mode == Mode::Control {
            return Err(CliError::usage("--subsets supports maximize mode only"));
        }
        let partition = read_subsets(subsets_path, &matrix, args.min_subset_size)?;
        return write_subset_outputs(args, &matrix, &partition, &plan);
    }

    let (ga, gb) = match (&args.group_a, &args.group_b) {
        (Some(a), Some(b)) => (a.as_str(), b.as_str()),
        _ => return Err(CliError::usage("--group-a and --group-b are required")),
    };
    let observed = two_sample_abs_t(&matrix, ga, gb)?;
    let null = permutation_null(&matrix, ga, gb, &plan, &AbsWelchT)?;
    let stats = StatisticSet::new(observed, null)?;

    let result = if let Some(wpath) = &args.weights {
        if args.decision.mode == Mode::Control {
            return Err(CliError::usage("--weights supports maximize mode only"));
        }
        let (benefits, costs) = read_weights(wpath, &matrix)?;
        let weights: Vec<f64> = benefits.iter().zip(&costs).map(|(b, c)| b + c).collect();
        let pi0 = match args.decision.pi0 {
            Pi0Choice::Estimate => estimate_pi0_common(&stats, &weights)?,
            other => other.resolve(&stats)?,
        };
        common_threshold_weighted(&stats, &weights, &benefits, &pi0)?
    } else {
        let pi0 = args.decision.pi0.resolve(&stats)?;
        decide(args.decision.mode, &stats, &pi0, &cb, args.decision.alpha)?
    };

    let summary = Summary {
        mode: args.decision.mode,
        result: &result,
        cost_benefit: cb,
        alpha,
        seed: Some(args.seed),
        permutations: Some(args.permutations),
        tests: stats.m(),
    };
    write_atomic(
        &args.out.join("tests.csv"),
        &tests_csv(matrix.feature_ids(), stats.observed(), &result.rejected),
    )?;
    write_atomic(&args.out.join("summary.txt"), &summary.render())?;
    write_atomic(&args.out.join("curve.csv"), &curve_csv(&result))?;
    Ok(())
}

fn write_subset_outputs(
    args: &AnalyzeArgs,
    matrix: &DataMatrix,
    partition: &SubsetPartition,
    plan: &PermutationPlan,
) -> CliResult<()> {
    let decisions = per_subset_optimize(partition, matrix, plan, args.decision.pi0)?;
    let mut table = String::from("subset,feature_id,statistic,rejected\n");
    for (d, s) in decisions.iter().zip(partition.subsets()) {
        let mut flags = vec![false; d.features.len()];
        for &k in &d.result.rejected {
            flags[k] = true;
        }
        for (k, &f) in d.features.iter().enumerate() {
            let _ = writeln!(
                table,
                "{},{},{},{}",
                d.name,
                matrix.feature_ids()[f],
                d.stats.observed()[k],
                flags[k] as u8
            );
        }
        let summary = Summary {
            mode: Mode::Maximize,
            result: &d.result,
            cost_benefit: s.cost_benefit,
            alpha: None,
            seed: Some(args.seed),
            permutations: Some(args.permutations),
            tests: d.features.len(),
        };
        write_atomic(&args.out.join(format!("summary_{}.txt", d.name)), &summary.render())?;
        write_atomic(&args.out.join(format!("curve_{}.csv", d.name)), &curve_csv(&d.result))?;
    }
    write_atomic(&args.out.join("tests.csv"), &table)?;

    if args.common_threshold {
        let pooled = pool_subsets(partition, matrix, plan)?;
        let pi0 = match args.decision.pi0 {
            Pi0Choice::Estimate => estimate_pi0_common(&pooled.stats, &pooled.weights)?,
            other => other.resolve(&pooled.stats)?,
        };
        let result =
            common_threshold_weighted(&pooled.stats, &pooled.weights, &pooled.benefits, &pi0)?;
        let mut s = String::new();
        let _ = writeln!(s, "mode=common-threshold");
        let _ = writeln!(s, "tau={}", fmt_tau(result.tau));
        let _ = writeln!(s, "discoveries={}", result.discoveries());
        let _ = writeln!(s, "dfdr={}", result.dfdr);
        let _ = writeln!(s, "desirability={}", result.desirability);
        let _ = writeln!(s, "pi0={}", result.pi0.value);
        let _ = writeln!(s, "pi0_mode={}", result.pi0.mode.as_str());
        let _ = writeln!(s, "tests={}", pooled.stats.m());
        let _ = writeln!(s, "permutations={}", args.permutations);
        let _ = writeln!(s, "seed={}", args.seed);
        write_atomic(&args.out.join("summary_common.txt"), &s)?;
        write_atomic(&args.out.join("curve_common.csv"), &curve_csv(&result))?;
    }
    Ok(())
}

fn read_lines(path: &Path) -> CliResult<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|source| DfdrError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').map(|c| c.trim().to_string()).collect()))
        .collect())
}

fn parse_num(path: &Path, line: usize, cell: &str) -> CliResult<f64> {
    cell.parse().map_err(|_| {
        DfdrError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("'{cell}' is not a number"),
        }
        .into()
    })
}

fn feature_lookup(matrix: &DataMatrix, id: &str) -> CliResult<usize> {
    matrix
        .feature_index(id)
        .ok_or_else(|| CliError::data(format!("unknown feature ID '{id}'")))
}

/// Subset file rows: `name, group_a, group_b, benefit, cost[, id,id,...]`
/// (tab-separated); a missing or `*` feature list means every feature.
pub fn read_subsets(path: &Path, matrix: &DataMatrix, min_size: usize) -> CliResult<SubsetPartition> {
    let mut subsets = Vec::new();
    for (line, cells) in read_lines(path)? {
        if cells.len() != 5 && cells.len() != 6 {
            return Err(DfdrError::Parse {
                path: path.to_path_buf(),
                line,
                message: "expected name, group_a, group_b, benefit, cost[, features]".into(),
            }
            .into());
        }
        let features = match cells.get(5).map(String::as_str) {
            None | Some("*") => (0..matrix.n_features()).collect(),
            Some(list) => list
                .split(',')
                .map(|id| feature_lookup(matrix, id.trim()))
                .collect::<CliResult<Vec<_>>>()?,
        };
        subsets.push(Subset {
            name: cells[0].clone(),
            features,
            group_a: cells[1].clone(),
            group_b: cells[2].clone(),
            cost_benefit: CostBenefit::new(
                parse_num(path, line, &cells[3])?,
                parse_num(path, line, &cells[4])?,
            )
            .map_err(|e| CliError::data(e.to_string()))?,
        });
    }
    Ok(SubsetPartition::new(subsets, min_size)?)
}

/// Weight file rows: `feature_id, benefit, cost`; every feature must appear.
pub fn read_weights(path: &Path, matrix: &DataMatrix) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let m = matrix.n_features();
    let mut benefits = vec![f64::NAN; m];
    let mut costs = vec![f64::NAN; m];
    for (line, cells) in read_lines(path)? {
        if cells.len() != 3 {
            return Err(DfdrError::Parse {
                path: path.to_path_buf(),
                line,
                message: "expected feature_id, benefit, cost".into(),
            }
            .into());
        }
        let i = feature_lookup(matrix, &cells[0])?;
        benefits[i] = parse_num(path, line, &cells[1])?;
        costs[i] = parse_num(path, line, &cells[2])?;
    }
    if let Some(i) = benefits.iter().position(|b| b.is_nan()) {
        return Err(CliError::data(format!(
            "feature '{}' has no weight entry",
            matrix.feature_ids()[i]
        )));
    }
    Ok((benefits, costs))
}

/// Verdicts and report written by `simulate`.
pub struct SimulationOutput {
    pub report: ErrorRateReport,
    pub boundary_rate: f64,
    pub boundary_rejections: usize,
    pub overall_pass: bool,
    pub boundary_pass: bool,
}

/// `simulate` subcommand.
pub fn run_simulate(args: &SimulateArgs) -> CliResult<SimulationOutput> {
    args.decision.validate()?;
    if args.replicates == 0 {
        return Err(CliError::usage("--replicates must be at least 1"));
    }
    if !(args.boundary_fraction > 0.0 && args.boundary_fraction <= 1.0) {
        return Err(CliError::usage("--boundary-fraction must be in (0, 1]"));
    }
    let config = SimulationConfig {
        m: args.m,
        pi0: args.pi0_true,
        replicates: args.replicates,
        n_a: args.n_a,
        n_b: args.n_b,
        delta: args.delta,
        permutations: args.permutations,
        seed: args.seed,
        truth: match args.truth {
            Truth::Fixed => TruthMode::Fixed,
            Truth::Random => TruthMode::Random,
        },
        dependence: args.block_size.zip(args.rho).map(|(block_size, rho)| BlockDependence {
            block_size,
            rho,
        }),
    };
    config.validate().map_err(|e| CliError::usage(e.to_string()))?;
    ensure_dir(&args.out)?;
    let rule = args.decision.rule()?;
    let runs = run_replicates(&config, &[rule])?;
    let report = ErrorRateReport::from_runs(&runs, 0);
    let boundary = measure_local_dfdr(
        &runs,
        0,
        &LocalBins::RejectionFractions(vec![0.0, args.boundary_fraction]),
    )?[0];
    let bound = match args.decision.mode {
        Mode::Maximize => args.decision.cost_benefit()?.p(),
        Mode::Control => args.decision.alpha,
    };
    let overall_pass = within_bound(report.conditional_prob, report.total_rejections, bound, 3.0);
    let boundary_pass = within_bound(boundary.rate, boundary.rejections, bound, 3.0);

    let label = match args.decision.mode {
        Mode::Maximize => "maximize",
        Mode::Control => "control",
    };
    let mut text = String::from("rule\tmetric\tvalue\n");
    text.push_str(&report.to_records(label));
    let _ = writeln!(text, "{label}\tboundary_rejections\t{}", boundary.rejections);
    let _ = writeln!(text, "{label}\tboundary_rate\t{}", boundary.rate);
    let _ = writeln!(text, "{label}\tbound\t{bound}");
    let verdict = |b: bool| if b { "PASS" } else { "FAIL" };
    let _ = writeln!(text, "{label}\tverdict_conditional_prob\t{}", verdict(overall_pass));
    let _ = writeln!(text, "{label}\tverdict_boundary_bin\t{}", verdict(boundary_pass));
    write_atomic(&args.out.join("report.tsv"), &text)?;
    print!("{text}");
    Ok(SimulationOutput {
        report,
        boundary_rate: boundary.rate,
        boundary_rejections: boundary.rejections,
        overall_pass,
        boundary_pass,
    })
}

/// Reference results for the leukemia comparison: (tau, discoveries,
/// D with estimated pi0, D with pi0 = 1, dFDR with estimated pi0, dFDR with
/// pi0 = 1), for maximize/estimated, maximize/one, control/estimated,
/// control/one.
#[allow(clippy::approx_constant)]
pub const REFERENCE_TABLE: [(&str, f64, usize, f64, f64, f64, f64); 4] = [
    ("maximize, pi0 estimated", 3.14, 910, 683.0, 524.0, 0.0125, 0.0212),
    ("maximize, pi0 = 1", 3.37, 768, 656.0, 578.0, 0.0073, 0.0124),
    ("control 5%, pi0 estimated", 2.44, 1496, 1.4, -1043.0, 0.0500, 0.0849),
    ("control 5%, pi0 = 1", 2.73, 1212, 500.0, 2.3, 0.0294, 0.0499),
];
pub const REFERENCE_PI0: f64 = 0.59;
/// Second comparison (group A vs T group, benefit 2): tau, discoveries, dFDR.
pub const REFERENCE_SECOND: (f64, usize, f64) = (3.64, 350, 0.0418);

/// One computed column of the comparison table.
#[derive(Debug, Clone)]
pub struct ReproducedColumn {
    pub label: String,
    pub tau: Option<f64>,
    pub discoveries: usize,
    pub desirability_est: f64,
    pub desirability_one: f64,
    pub dfdr_est: f64,
    pub dfdr_one: f64,
}

pub struct Reproduction {
    pub pi0: Pi0Estimate,
    pub columns: Vec<ReproducedColumn>,
    pub second: Option<DecisionResult>,
}

const DATA_GUIDANCE: &str = "\
The leukemia expression data (7129 genes; 38 B-cell ALL, 25 AML and 9 T-cell ALL
patients) is public but not bundled. Download the training and test sets of the
Golub et al. (1999) ALL/AML study (for example from the Broad Institute's cancer
program data sets, or the Bioconductor `golubEsets` package), merge them into one
tab-separated matrix of raw average-difference values (genes in rows, patients in
columns, first row = patient IDs, first column = gene IDs), and write a
two-column labels file mapping each patient ID to ALL, AML or T-ALL. Then run:
  dfdr reproduce --matrix golub.tsv --labels golub_labels.tsv --t-group T-ALL --out out/";

/// Runs the four threshold rules of the comparison table (plus the second
/// comparison when `t_group` is set).
pub fn reproduce(matrix: &DataMatrix, args: &ReproduceArgs) -> CliResult<Reproduction> {
    let plan = PermutationPlan::new(args.permutations, args.seed)?;
    let observed = two_sample_abs_t(matrix, &args.group_a, &args.group_b)?;
    let null = permutation_null(matrix, &args.group_a, &args.group_b, &plan, &AbsWelchT)?;
    let stats = StatisticSet::new(observed, null)?;
    let cb = CostBenefit::new(1.0, 19.0)?;
    let est = estimate_pi0_auto(&stats)?;
    let one = Pi0Estimate::one();
    let runs = [
        maximize_desirability(&stats, &est, &cb),
        maximize_desirability(&stats, &one, &cb),
        control_dfdr(&stats, &est, 0.05, &cb)?,
        control_dfdr(&stats, &one, 0.05, &cb)?,
    ];
    let columns = runs
        .iter()
        .zip(REFERENCE_TABLE.iter())
        .map(|(r, refs)| {
            let at = |p: &Pi0Estimate| match r.tau {
                Some(t) => {
                    let e = estimate_dfdr_at_tau(&stats, p, t);
                    (
                        crate::estimators::estimate_desirability(&stats, p, &cb, t),
                        e.value,
                    )
                }
                None => (0.0, 0.0),
            };
            let (de, fe) = at(&est);
            let (d1, f1) = at(&one);
            ReproducedColumn {
                label: refs.0.to_string(),
                tau: r.tau,
                discoveries: r.discoveries(),
                desirability_est: de,
                desirability_one: d1,
                dfdr_est: fe,
                dfdr_one: f1,
            }
        })
        .collect();
    let second = match &args.t_group {
        Some(t) => {
            let all: Vec<usize> = (0..matrix.n_features()).collect();
            let partition = SubsetPartition::new(
                vec![
                    Subset {
                        name: "first".into(),
                        features: all.clone(),
                        group_a: args.group_a.clone(),
                        group_b: args.group_b.clone(),
                        cost_benefit: cb,
                    },
                    Subset {
                        name: "second".into(),
                        features: all,
                        group_a: args.group_a.clone(),
                        group_b: t.clone(),
                        cost_benefit: CostBenefit::new(2.0, 19.0)?,
                    },
                ],
                DEFAULT_MIN_SUBSET_SIZE,
            )?;
            let mut d = per_subset_optimize(&partition, matrix, &plan, Pi0Choice::Estimate)?;
            Some(d.remove(1).result)
        }
        None => None,
    };
    Ok(Reproduction {
        pi0: est,
        columns,
        second,
    })
}

fn render_reproduction(rep: &Reproduction) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "pi0_estimate\t{:.4}\treference\t{REFERENCE_PI0}\tdeviation\t{:+.4}",
        rep.pi0.value,
        rep.pi0.value - REFERENCE_PI0
    );
    let _ = writeln!(s, "column\tquantity\tcomputed\treference\tdeviation");
    for (c, r) in rep.columns.iter().zip(REFERENCE_TABLE.iter()) {
        match c.tau {
            Some(t) => {
                let _ = writeln!(s, "{}\ttau\t{t:.4}\t{}\t{:+.4}", c.label, r.1, t - r.1);
            }
            None => {
                let _ = writeln!(s, "{}\ttau\tnone\t{}\tnone", c.label, r.1);
            }
        }
        let rows = [
            ("discoveries", c.discoveries as f64, r.2 as f64),
            ("desirability_pi0_est", c.desirability_est, r.3),
            ("desirability_pi0_one", c.desirability_one, r.4),
            ("dfdr_pi0_est", c.dfdr_est, r.5),
            ("dfdr_pi0_one", c.dfdr_one, r.6),
        ];
        for (q, v, reference) in rows {
            let _ = writeln!(s, "{}\t{q}\t{v:.4}\t{reference}\t{:+.4}", c.label, v - reference);
        }
    }
    if let Some(second) = &rep.second {
        let (t, n, d) = REFERENCE_SECOND;
        match second.tau {
            Some(tau) => {
                let _ = writeln!(s, "second comparison\ttau\t{tau:.4}\t{t}\t{:+.4}", tau - t);
            }
            None => {
                let _ = writeln!(s, "second comparison\ttau\tnone\t{t}\tnone");
            }
        }
        let _ = writeln!(
            s,
            "second comparison\tdiscoveries\t{}\t{n}\t{:+}",
            second.discoveries(),
            second.discoveries() as i64 - n as i64
        );
        let _ = writeln!(s, "second comparison\tdfdr\t{:.4}\t{d}\t{:+.4}", second.dfdr, second.dfdr - d);
    }
    s
}

/// `reproduce` subcommand.
pub fn run_reproduce(args: &ReproduceArgs) -> CliResult<Reproduction> {
    let missing: Vec<&PathBuf> = std::iter::once(&args.matrix)
        .chain(args.labels.as_ref())
        .filter(|p| !p.exists())
        .collect();
    if !missing.is_empty() {
        let names: Vec<String> = missing.iter().map(|p| p.display().to_string()).collect();
        return Err(CliError::data(format!(
            "missing input file(s): {}\n{DATA_GUIDANCE}",
            names.join(", ")
        )));
    }
    let matrix = load(&args.matrix, args.labels.as_ref(), !args.no_preprocess)?;
    let rep = reproduce(&matrix, args)?;
    ensure_dir(&args.out)?;
    let text = render_reproduction(&rep);
    write_atomic(&args.out.join("reproduce.tsv"), &text)?;
    print!("{text}");
    Ok(rep)
}
