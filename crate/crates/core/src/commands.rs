use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use ftvgs::evaluation::{
    ingest_dataset, nrmse, percent, plan_table, run_experiment_grid, verify_lemma1, verify_lemma2,
    DatasetSpec, ExperimentConfig, GeneratorSpec, GraphSpec, Method, SignalSource, SubsetSizing,
    SynthGenerator,
};
use ftvgs::io::{
    read_json, read_matrix, read_sample_set, write_edge_list, write_json, write_matrix,
    write_sample_set,
};
use ftvgs::reconstruction::{
    solve_joint, svt_baseline, tnnr_baseline, two_stage_reconstruct, CompletionConfig,
    JointSolverConfig, ReconstructionResult, SvtConfig, TnnrConfig, TvInpaintConfig,
};
use ftvgs::sampling::{
    bound_report, ccs_sample, full_sample, incoherence_failure_p, lemma1_min_cols, lemma1_min_rows,
    mc_uniform_sample, subset_random_sample, BoundParams, SamplingPlan,
};
use ftvgs::signal::incoherence;
use ftvgs::{GraphOperators, TimeHorizon, TimeOperators, VertexGraph};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Data(#[from] ftvgs::Error),
    #[error("{0}")]
    Usage(String),
    #[error("solver did not converge after {0} iterations; partial result written")]
    NotConverged(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::NotConverged(_) => 3,
        }
    }
}

type CliResult = Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "ftvgs",
    version,
    about = "Subset random sampling and reconstruction of time-vertex graph signals"
)]
pub struct Cli {
    /// Base seed; every random draw of a command derives from it.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Progress messages on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a band-limited low-rank signal on a graph.
    Synth(SynthArgs),
    /// Sample entries of a signal matrix.
    Sample(SampleArgs),
    /// Evaluate the row/column, sample-count and probability bounds.
    Bounds(BoundsArgs),
    /// Recover a signal from a sample set.
    Reconstruct(ReconstructArgs),
    /// Monte Carlo check of the rank and incoherence guarantees.
    Verify(VerifyArgs),
    /// Run a ratio grid of reconstruction methods.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphKind {
    Cycle,
    Path,
    Knn,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Built-in vertex graph.
    #[arg(long, value_enum, default_value_t = GraphKind::Cycle)]
    pub graph: GraphKind,
    /// Edge-list CSV (`u,v,weight`); overrides --graph.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Neighbours per vertex for --graph knn.
    #[arg(long, default_value_t = 5)]
    pub knn_k: usize,
}

impl GraphArgs {
    fn spec(&self, seed: u64) -> GraphSpec {
        match (&self.edges, self.graph) {
            (Some(path), _) => GraphSpec::EdgeList { path: path.clone() },
            (None, GraphKind::Cycle) => GraphSpec::Cycle,
            (None, GraphKind::Path) => GraphSpec::Path,
            (None, GraphKind::Knn) => GraphSpec::Knn {
                k: self.knn_k,
                seed,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct SignalArgs {
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub t: usize,
    #[arg(long, default_value_t = 3)]
    pub rank: usize,
    /// Graph frequencies used by the generator (default: rank).
    #[arg(long)]
    pub graph_band: Option<usize>,
    /// Time frequencies used by the generator (default: rank).
    #[arg(long)]
    pub time_band: Option<usize>,
    #[command(flatten)]
    pub graph: GraphArgs,
}

impl SignalArgs {
    fn generator(&self, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            n_vertices: self.n,
            n_steps: self.t,
            rank: self.rank,
            graph_band: self.graph_band.unwrap_or(self.rank),
            time_band: self.time_band.unwrap_or(self.rank),
            graph: self.graph.spec(seed),
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
    /// Generator spec as JSON; replaces the signal flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the vertex graph as an edge list.
    #[arg(long)]
    pub edges_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Scheme {
    /// Rows, then columns, then entries inside the block.
    Subset,
    /// Every entry once.
    Full,
    /// Uniform draws over the whole matrix.
    Mc,
    /// Draws over the union of the selected rows and columns.
    Ccs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// `rc=<ratio>,sub=<ratio>` or `rows=<n>,cols=<n>,samples=<n>`.
    #[arg(long, value_parser = parse_plan, default_value = "rc=0.8,sub=0.8")]
    pub plan: SamplingPlan,
    #[arg(long, value_enum, default_value_t = Scheme::Subset)]
    pub scheme: Scheme,
    /// Number of draws for --scheme mc (default: the plan's sample count).
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub mu1: f64,
    /// Defaults to mu1.
    #[arg(long)]
    pub mu2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    /// Vertex count; with --t enables the sample-count and recovery bounds.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Evaluate the sample-count bound at these subset sizes.
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Write the full report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long, short)]
    pub samples: PathBuf,
    /// `NxT`; taken from --truth when omitted.
    #[arg(long, value_parser = parse_shape)]
    pub shape: Option<(usize, usize)>,
    /// Ground truth CSV; adds NRMSE to the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, value_parser = parse_method, default_value = "joint")]
    pub method: Method,
    /// Solver settings as JSON for the chosen method.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Run report (defaults to the output path with a .json extension).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LemmaKind {
    #[value(name = "1")]
    Rank,
    #[value(name = "2")]
    Incoherence,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub lemma: LemmaKind,
    #[command(flatten)]
    pub signal: SignalArgs,
    #[arg(long, default_value_t = 300)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// `lemma1`, `full`, `rc=<ratio>` or `rows=<n>,cols=<n>`.
    #[arg(long, default_value = "lemma1")]
    pub sizing: String,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Grid {
    /// (0.9, 0.9), (0.8, 0.8), (0.6, 0.6).
    Table2,
}

impl Grid {
    fn ratios(self) -> Vec<(f64, f64)> {
        match self {
            Grid::Table2 => vec![(0.9, 0.9), (0.8, 0.8), (0.6, 0.6)],
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum, default_value_t = Grid::Table2)]
    pub grid: Grid,
    /// `rc:sub` pairs separated by commas; replaces --grid.
    #[arg(long)]
    pub ratios: Option<String>,
    /// Synthetic signal, `r=<rank>[,graph_band=<k>][,time_band=<k>]`.
    #[arg(long, conflicts_with = "dataset")]
    pub synthetic: Option<String>,
    #[arg(long, default_value_t = 207)]
    pub n: usize,
    #[arg(long, default_value_t = 512)]
    pub t: usize,
    /// Sensor CSV split into windows of --window steps.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    pub window: usize,
    #[arg(long)]
    pub sensors: Option<usize>,
    /// `sensor_id,lat,lon` sidecar for the dataset graph.
    #[arg(long)]
    pub coordinates: Option<PathBuf>,
    #[arg(long, default_value = "svt,tnnr,joint")]
    pub methods: String,
    #[arg(long, default_value_t = 10)]
    pub trials: u64,
    /// Complete experiment config as JSON; replaces the other flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the sample counts and total ratios without running.
    #[arg(long)]
    pub plan_only: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub runtime: bool,
}

fn key_values(s: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        if map
            .insert(k.trim().to_string(), v.trim().to_string())
            .is_some()
        {
            return Err(format!("duplicate key {k:?}"));
        }
    }
    Ok(map)
}

fn take<T: std::str::FromStr>(
    map: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, String> {
    map.remove(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| format!("bad value {v:?} for {key}"))
        })
        .transpose()
}

fn no_leftovers(map: BTreeMap<String, String>) -> Result<(), String> {
    match map.keys().next() {
        Some(k) => Err(format!("unknown key {k:?}")),
        None => Ok(()),
    }
}

pub fn parse_plan(s: &str) -> Result<SamplingPlan, String> {
    let mut map = key_values(s)?;
    let plan = if map.contains_key("rc") || map.contains_key("sub") {
        let rho_rc = take(&mut map, "rc")?.ok_or("missing rc")?;
        let rho_sub = take(&mut map, "sub")?.ok_or("missing sub")?;
        SamplingPlan::ratios(rho_rc, rho_sub)
    } else {
        SamplingPlan::Counts {
            rows: take(&mut map, "rows")?.ok_or("missing rows")?,
            cols: take(&mut map, "cols")?.ok_or("missing cols")?,
            samples: take(&mut map, "samples")?.ok_or("missing samples")?,
        }
    };
    no_leftovers(map)?;
    Ok(plan)
}

pub fn parse_sizing(s: &str, delta: f64, epsilon: f64) -> Result<SubsetSizing, String> {
    match s.trim() {
        "lemma1" => return Ok(SubsetSizing::Lemma1 { delta, epsilon }),
        "full" => return Ok(SubsetSizing::Full),
        _ => {}
    }
    let mut map = key_values(s)?;
    let sizing = if let Some(rho_rc) = take(&mut map, "rc")? {
        SubsetSizing::Ratio { rho_rc }
    } else {
        SubsetSizing::Counts {
            rows: take(&mut map, "rows")?.ok_or("missing rows")?,
            cols: take(&mut map, "cols")?.ok_or("missing cols")?,
        }
    };
    no_leftovers(map)?;
    Ok(sizing)
}

pub fn parse_shape(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxT, got {s:?}"))?;
    let n = a
        .trim()
        .parse()
        .map_err(|_| format!("bad row count {a:?}"))?;
    let t = b
        .trim()
        .parse()
        .map_err(|_| format!("bad column count {b:?}"))?;
    Ok((n, t))
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).map_err(|e| e.to_string())
}

fn parse_ratios(s: &str) -> Result<Vec<(f64, f64)>, String> {
    s.split(',')
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| format!("expected rc:sub, got {pair:?}"))?;
            let rc = a.trim().parse().map_err(|_| format!("bad ratio {a:?}"))?;
            let sub = b.trim().parse().map_err(|_| format!("bad ratio {b:?}"))?;
            Ok((rc, sub))
        })
        .collect()
}

fn parse_synthetic(s: &str, n: usize, t: usize) -> Result<GeneratorSpec, String> {
    let mut map = key_values(s)?;
    let rank: usize = take(&mut map, "r")?.ok_or("missing r")?;
    let graph_band = take(&mut map, "graph_band")?.unwrap_or(rank);
    let time_band = take(&mut map, "time_band")?.unwrap_or(rank);
    no_leftovers(map)?;
    Ok(GeneratorSpec {
        graph_band,
        time_band,
        ..GeneratorSpec::smooth(n, t, rank)
    })
}

fn note(verbose: u8, msg: impl AsRef<str>) {
    if verbose > 0 {
        eprintln!("{}", msg.as_ref());
    }
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Synth(a) => synth(a, cli.seed, cli.verbose),
        Command::Sample(a) => sample(a, cli.seed, cli.verbose),
        Command::Bounds(a) => bounds(a),
        Command::Reconstruct(a) => reconstruct(a, cli.seed, cli.verbose),
        Command::Verify(a) => verify(a, cli.seed, cli.verbose),
        Command::Experiment(a) => experiment(a, cli.seed, cli.verbose),
    }
}

fn synth(a: SynthArgs, seed: u64, verbose: u8) -> CliResult {
    let spec = match &a.config {
        Some(path) => read_json::<GeneratorSpec>(path)?,
        None => a.signal.generator(seed),
    };
    let generator = SynthGenerator::new(spec)?;
    let signal = generator.draw(seed)?;
    write_matrix(&a.out, signal.data())?;
    if let Some(path) = &a.edges_out {
        write_edge_list(path, &generator.graph)?;
    }
    let profile = incoherence(&signal)?;
    println!("shape {}x{}", signal.num_vertices(), signal.num_steps());
    println!("rank {}", profile.rank);
    println!("mu1 {:.6}", profile.mu1);
    println!("mu2 {:.6}", profile.mu2);
    println!("kappa {:.6}", profile.kappa);
    note(verbose, format!("wrote {}", a.out.display()));
    Ok(())
}

fn sample(a: SampleArgs, seed: u64, verbose: u8) -> CliResult {
    let x = read_matrix(&a.input)?;
    let (n, t) = x.shape();
    let s = match a.scheme {
        Scheme::Subset => subset_random_sample(&x, &a.plan, seed)?,
        Scheme::Full => full_sample(&x, seed)?,
        Scheme::Mc => {
            let count = match a.count {
                Some(c) => c,
                None => a.plan.resolve(n, t)?.samples,
            };
            mc_uniform_sample(&x, count, seed)?
        }
        Scheme::Ccs => ccs_sample(&x, &a.plan, seed)?.sample,
    };
    write_sample_set(&a.out, &s)?;
    println!("rows {}", s.rows().len());
    println!("cols {}", s.cols().len());
    println!("samples {}", s.len());
    println!("distinct {}", s.distinct_count());
    println!("rho_total {}%", percent(s.len() as f64 / (n * t) as f64));
    note(verbose, format!("wrote {}", a.out.display()));
    Ok(())
}

fn bounds(a: BoundsArgs) -> CliResult {
    let mu2 = a.mu2.unwrap_or(a.mu1);
    let min_rows = lemma1_min_rows(a.r, a.mu1, a.delta, a.eps)?;
    let min_cols = lemma1_min_cols(a.r, mu2, a.delta, a.eps)?;
    println!("min_rows {min_rows}");
    println!("min_cols {min_cols}");
    let p = incoherence_failure_p(a.r, a.eta)?;
    println!("p {:.6}{}", p.p, if p.vacuous { " (vacuous)" } else { "" });
    let (n, t) = match (a.n, a.t) {
        (Some(n), Some(t)) => (n, t),
        (None, None) => {
            if a.json.is_some() {
                return Err(usage("--json needs --n and --t"));
            }
            return Ok(());
        }
        _ => return Err(usage("--n and --t must be given together")),
    };
    let report = bound_report(&BoundParams {
        r: a.r,
        mu1: a.mu1,
        mu2,
        kappa: a.kappa,
        n_vertices: n,
        n_steps: t,
        delta: a.delta,
        epsilon: a.eps,
        eta: a.eta,
        beta: a.beta,
        rows: a.rows,
        cols: a.cols,
    })?;
    let flag = |v: bool| if v { " (vacuous)" } else { "" };
    println!(
        "min_samples {} at {}x{}{}",
        report.min_samples.required,
        report.rows,
        report.cols,
        flag(report.min_samples.vacuous)
    );
    println!("rank_prob {:.6}", report.rank_prob.clamped);
    println!(
        "incoherence_prob {:.6}{}",
        report.incoherence_prob.clamped,
        flag(report.incoherence_prob.vacuous)
    );
    println!(
        "recovery_prob {:.6}{}",
        report.recovery_prob.clamped,
        flag(report.recovery_prob.vacuous)
    );
    if let Some(path) = &a.json {
        write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TwoStageConfig {
    completion: CompletionConfig,
    tv: TvInpaintConfig,
}

fn config_or_default<T: Default + serde::de::DeserializeOwned>(
    path: Option<&Path>,
) -> Result<T, CliError> {
    Ok(match path {
        Some(p) => read_json(p)?,
        None => T::default(),
    })
}

#[derive(Serialize)]
struct RunReport<'a> {
    method: &'static str,
    n_vertices: usize,
    n_steps: usize,
    samples: usize,
    #[serde(flatten)]
    result: &'a ReconstructionResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    nrmse: Option<f64>,
}

fn reconstruct(a: ReconstructArgs, seed: u64, verbose: u8) -> CliResult {
    let s = read_sample_set(&a.samples)?;
    let truth = a.truth.as_ref().map(read_matrix).transpose()?;
    let (n, t) = match (a.shape, &truth) {
        (Some(shape), Some(x)) if shape != x.shape() => {
            return Err(usage(format!(
                "--shape {}x{} disagrees with the {}x{} truth",
                shape.0,
                shape.1,
                x.nrows(),
                x.ncols()
            )))
        }
        (Some(shape), _) => shape,
        (None, Some(x)) => x.shape(),
        (None, None) => return Err(usage("give --shape or --truth")),
    };
    let cfg_path = a.config.as_deref();
    let graph_frame = || -> Result<(GraphOperators, TimeOperators), CliError> {
        let graph: VertexGraph = a.graph.spec(seed).build(n)?;
        Ok((
            GraphOperators::build(&graph)?,
            TimeOperators::build(TimeHorizon::new(t)?),
        ))
    };
    let result = match a.method {
        Method::Joint => {
            let cfg: JointSolverConfig = config_or_default(cfg_path)?;
            let (ops, tops) = graph_frame()?;
            solve_joint(&s, &ops, &tops, &cfg)?
        }
        Method::TwoStage => {
            let cfg: TwoStageConfig = config_or_default(cfg_path)?;
            let (ops, tops) = graph_frame()?;
            two_stage_reconstruct(&s, &ops, &tops, &cfg.completion, &cfg.tv)?
        }
        Method::Svt => svt_baseline(&s, n, t, &config_or_default::<SvtConfig>(cfg_path)?)?,
        Method::Tnnr => tnnr_baseline(&s, n, t, &config_or_default::<TnnrConfig>(cfg_path)?)?,
    };
    write_matrix(&a.out, &result.x_hat)?;
    let error = truth
        .as_ref()
        .map(|x: &DMatrix<f64>| nrmse(x, &result.x_hat))
        .transpose()?;
    let report_path = a
        .report
        .clone()
        .unwrap_or_else(|| a.out.with_extension("json"));
    write_json(
        &report_path,
        &RunReport {
            method: a.method.name(),
            n_vertices: n,
            n_steps: t,
            samples: s.len(),
            result: &result,
            nrmse: error,
        },
    )?;
    println!("iterations {}", result.iterations);
    println!("converged {}", result.converged);
    if let Some(e) = error {
        println!("nrmse {e:.6e}");
    }
    note(
        verbose,
        format!("wrote {} and {}", a.out.display(), report_path.display()),
    );
    if !result.converged {
        return Err(CliError::NotConverged(result.iterations));
    }
    Ok(())
}

fn verify(a: VerifyArgs, seed: u64, verbose: u8) -> CliResult {
    let sizing = parse_sizing(&a.sizing, a.delta, a.eps).map_err(usage)?;
    let generator = SynthGenerator::new(a.signal.generator(seed))?;
    note(verbose, format!("running {} trials", a.trials));
    match a.lemma {
        LemmaKind::Rank => {
            let r = verify_lemma1(&generator, a.delta, a.eps, a.trials, seed, Some(sizing))?;
            println!("trials {}", r.trials);
            println!(
                "rows_success {:.4} floor {:.4} pass {}",
                r.rows_success, r.floor_rows, r.rows_pass
            );
            println!(
                "cross_success {:.4} floor {:.4} pass {}",
                r.cross_success, r.floor_cross, r.cross_pass
            );
            println!("capped_trials {}", r.capped_trials);
            println!("max_mu1 {:.4}", r.max_mu1);
            println!("max_mu2 {:.4}", r.max_mu2);
            if let Some(out) = &a.out {
                write_json(out, &r)?;
            }
        }
        LemmaKind::Incoherence => {
            let r = verify_lemma2(&generator, a.eta, a.trials, seed, sizing)?;
            let vacuous = if r.floor_vacuous { " (vacuous)" } else { "" };
            println!("p {:.6}", r.p.p);
            println!("floor {:.4}{vacuous}", r.floor);
            println!("checked {} rank_deficient {}", r.checked, r.rank_deficient);
            println!("u_fraction {:.4}", r.u_fraction);
            println!("v_fraction {:.4}", r.v_fraction);
            println!("both_fraction {:.4}", r.both_fraction);
            if let Some(out) = &a.out {
                write_json(out, &r)?;
            }
        }
    }
    Ok(())
}

fn experiment_config(a: &ExperimentArgs, seed: u64) -> Result<ExperimentConfig, CliError> {
    if let Some(path) = &a.config {
        return Ok(read_json(path)?);
    }
    let ratios = match &a.ratios {
        Some(s) => parse_ratios(s).map_err(usage)?,
        None => a.grid.ratios(),
    };
    let methods = a
        .methods
        .split(',')
        .map(parse_method)
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    let signal = match (&a.dataset, &a.synthetic) {
        (Some(path), _) => SignalSource::Dataset(DatasetSpec {
            sensors: a.sensors,
            coordinates: a.coordinates.clone(),
            ..DatasetSpec::new(path, a.window)
        }),
        (None, Some(s)) => SignalSource::Synthetic(parse_synthetic(s, a.n, a.t).map_err(usage)?),
        (None, None) => SignalSource::Synthetic(GeneratorSpec::smooth(a.n, a.t, 3)),
    };
    Ok(ExperimentConfig {
        ratios,
        methods,
        seeds: (0..a.trials).collect(),
        signal,
        base_seed: seed,
        joint: JointSolverConfig::default(),
        completion: CompletionConfig::default(),
        tv: TvInpaintConfig::default(),
        svt: SvtConfig::default(),
        tnnr: None,
        record_runtime: a.runtime,
    })
}

fn experiment(a: ExperimentArgs, seed: u64, verbose: u8) -> CliResult {
    let cfg = experiment_config(&a, seed)?;
    cfg.validate()?;
    let (n, t) = match &cfg.signal {
        SignalSource::Synthetic(g) => (g.n_vertices, g.n_steps),
        SignalSource::Dataset(d) => {
            let data = ingest_dataset(d)?;
            (data.graph.num_vertices(), d.window_len)
        }
    };
    println!("rho_rc,rho_sub,rows,cols,samples,rho_total");
    for row in plan_table(&cfg.ratios, n, t)? {
        println!(
            "{},{},{},{},{},{}%",
            row.rho_rc,
            row.rho_sub,
            row.rows,
            row.cols,
            row.samples,
            percent(row.rho_total)
        );
    }
    if a.plan_only {
        return Ok(());
    }
    let out = a
        .out
        .as_ref()
        .ok_or_else(|| usage("--out is required unless --plan-only is given"))?;
    note(
        verbose,
        format!(
            "running {} settings x {} seeds",
            cfg.ratios.len(),
            cfg.seeds.len()
        ),
    );
    let report = run_experiment_grid(&cfg)?;
    report.write(out)?;
    print!("{}", report.summary_csv());
    note(verbose, format!("wrote {}", out.display()));
    Ok(())
}
