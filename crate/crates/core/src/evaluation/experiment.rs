//! Ratio-grid comparison of reconstruction methods.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ingest_dataset, mean, median, nrmse, DatasetSpec, GeneratorSpec, SynthGenerator};
use crate::error::{Error, Result};
use crate::graph::{GraphOperators, TimeOperators};
use crate::io::{format_f64, write_json};
use crate::reconstruction::{
    solve_joint, svt_baseline, tnnr_baseline, two_stage_reconstruct, CompletionConfig,
    JointSolverConfig, ReconstructionResult, SvtConfig, TnnrConfig, TvInpaintConfig,
};
use crate::rng::derive_seed;
use crate::sampling::{subset_random_sample, SampleSet, SamplingPlan};
use crate::signal::Ftvgs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Svt,
    Tnnr,
    Joint,
    TwoStage,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Svt => "svt",
            Method::Tnnr => "tnnr",
            Method::Joint => "joint",
            Method::TwoStage => "two_stage",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "svt" => Ok(Method::Svt),
            "tnnr" => Ok(Method::Tnnr),
            "joint" | "ours" => Ok(Method::Joint),
            "two_stage" | "two-stage" => Ok(Method::TwoStage),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalSource {
    Synthetic(GeneratorSpec),
    Dataset(DatasetSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `(rho_rc, rho_sub)` pairs.
    pub ratios: Vec<(f64, f64)>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub signal: SignalSource,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default)]
    pub joint: JointSolverConfig,
    #[serde(default)]
    pub completion: CompletionConfig,
    #[serde(default)]
    pub tv: TvInpaintConfig,
    #[serde(default)]
    pub svt: SvtConfig,
    /// Defaults to `trunc_r` equal to the synthetic rank.
    #[serde(default)]
    pub tnnr: Option<TnnrConfig>,
    /// Wall-clock times make reports differ between runs, so they are off
    /// unless asked for.
    #[serde(default)]
    pub record_runtime: bool,
}

fn default_seed() -> u64 {
    42
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() || self.methods.is_empty() || self.seeds.is_empty() {
            return Err(Error::invalid(
                "ratios, methods and seeds must be non-empty",
            ));
        }
        for &(rc, sub) in &self.ratios {
            if !(rc > 0.0 && rc <= 1.0 && sub > 0.0 && sub <= 1.0) {
                return Err(Error::invalid(format!(
                    "ratios must lie in (0, 1], got ({rc}, {sub})"
                )));
            }
        }
        self.joint.validate()?;
        self.completion.validate()?;
        self.tv.validate()?;
        self.svt.validate()?;
        if let Some(t) = &self.tnnr {
            t.validate()?;
        }
        Ok(())
    }
}

/// Sample counts implied by one ratio setting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanRow {
    pub rho_rc: f64,
    pub rho_sub: f64,
    pub rows: usize,
    pub cols: usize,
    pub samples: usize,
    pub rho_total: f64,
}

pub fn plan_table(ratios: &[(f64, f64)], n: usize, t: usize) -> Result<Vec<PlanRow>> {
    ratios
        .iter()
        .map(|&(rho_rc, rho_sub)| {
            let c = SamplingPlan::ratios(rho_rc, rho_sub).resolve(n, t)?;
            Ok(PlanRow {
                rho_rc,
                rho_sub,
                rows: c.rows,
                cols: c.cols,
                samples: c.samples,
                rho_total: c.samples as f64 / (n * t) as f64,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialOutcome {
    pub method: Method,
    pub rho_rc: f64,
    pub rho_sub: f64,
    pub seed: u64,
    pub nrmse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
    pub converged: bool,
    pub distinct_samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellSummary {
    pub rho_rc: f64,
    pub rho_sub: f64,
    pub rho_total: f64,
    pub method: Method,
    pub trials: usize,
    pub mean_nrmse: f64,
    pub median_nrmse: f64,
    pub converged_trials: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub n_vertices: usize,
    pub n_steps: usize,
    pub plan: Vec<PlanRow>,
    pub cells: Vec<CellSummary>,
    pub trials: Vec<TrialOutcome>,
}

enum Signals {
    Synthetic(Box<SynthGenerator>),
    Windows(Vec<Ftvgs>),
}

struct Context {
    cfg: ExperimentConfig,
    ops: GraphOperators,
    tops: TimeOperators,
    tnnr: TnnrConfig,
}

impl Context {
    fn run(
        &self,
        method: Method,
        s: &SampleSet,
        n: usize,
        t: usize,
    ) -> Result<ReconstructionResult> {
        match method {
            Method::Svt => svt_baseline(s, n, t, &self.cfg.svt),
            Method::Tnnr => tnnr_baseline(s, n, t, &self.tnnr),
            Method::Joint => solve_joint(s, &self.ops, &self.tops, &self.cfg.joint),
            Method::TwoStage => {
                two_stage_reconstruct(s, &self.ops, &self.tops, &self.cfg.completion, &self.cfg.tv)
            }
        }
    }
}

/// Every `(ratio, seed)` pair samples one signal once; all methods see the
/// same sample set. Trial seeds come from `(base_seed, ratio index, seed)`,
/// so results do not depend on scheduling.
pub fn run_experiment_grid(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (signals, ops, horizon, rank) = match &cfg.signal {
        SignalSource::Synthetic(spec) => {
            let g = SynthGenerator::new(spec.clone())?;
            let ops = g.ops.clone();
            let horizon = g.horizon;
            (
                Signals::Synthetic(Box::new(g)),
                ops,
                horizon,
                Some(spec.rank),
            )
        }
        SignalSource::Dataset(spec) => {
            let d = ingest_dataset(spec)?;
            let ops = GraphOperators::build(&d.graph)?;
            let horizon = d.windows[0].horizon();
            (Signals::Windows(d.windows), ops, horizon, None)
        }
    };
    let n = ops.num_vertices();
    let t = horizon.num_steps();
    let tnnr = cfg.tnnr.clone().unwrap_or(TnnrConfig {
        trunc_r: rank.unwrap_or(1),
        ..TnnrConfig::default()
    });
    let ctx = Context {
        cfg: cfg.clone(),
        ops,
        tops: TimeOperators::build(horizon),
        tnnr,
    };
    let plan = plan_table(&cfg.ratios, n, t)?;

    let tasks: Vec<(usize, usize)> = (0..cfg.ratios.len())
        .flat_map(|r| (0..cfg.seeds.len()).map(move |s| (r, s)))
        .collect();
    let per_task = tasks
        .par_iter()
        .map(|&(ri, si)| {
            let seed = cfg.seeds[si];
            let (rho_rc, rho_sub) = cfg.ratios[ri];
            let signal = match &signals {
                Signals::Synthetic(g) => g.draw(derive_seed(cfg.base_seed, 0, seed))?,
                Signals::Windows(w) => w[si % w.len()].clone(),
            };
            let sample_seed = derive_seed(cfg.base_seed, ri as u64 + 1, seed);
            let s = subset_random_sample(
                signal.data(),
                &SamplingPlan::ratios(rho_rc, rho_sub),
                sample_seed,
            )?;
            let distinct = s.distinct_count();
            cfg.methods
                .iter()
                .map(|&method| {
                    let start = Instant::now();
                    let r = ctx.run(method, &s, n, t)?;
                    let runtime = start.elapsed().as_secs_f64();
                    Ok(TrialOutcome {
                        method,
                        rho_rc,
                        rho_sub,
                        seed,
                        nrmse: nrmse(signal.data(), &r.x_hat)?,
                        runtime_secs: cfg.record_runtime.then_some(runtime),
                        converged: r.converged,
                        distinct_samples: distinct,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let trials: Vec<TrialOutcome> = per_task.into_iter().flatten().collect();

    let mut cells = Vec::new();
    for (ri, row) in plan.iter().enumerate() {
        let (rho_rc, rho_sub) = cfg.ratios[ri];
        for &method in &cfg.methods {
            let hits: Vec<&TrialOutcome> = trials
                .iter()
                .filter(|o| o.method == method && o.rho_rc == rho_rc && o.rho_sub == rho_sub)
                .collect();
            let errs: Vec<f64> = hits.iter().map(|o| o.nrmse).collect();
            cells.push(CellSummary {
                rho_rc,
                rho_sub,
                rho_total: row.rho_total,
                method,
                trials: hits.len(),
                mean_nrmse: mean(&errs),
                median_nrmse: median(&errs),
                converged_trials: hits.iter().filter(|o| o.converged).count(),
            });
        }
    }
    Ok(ExperimentReport {
        n_vertices: n,
        n_steps: t,
        plan,
        cells,
        trials,
    })
}

/// `rho_total` as a percentage with two decimals.
pub fn percent(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

impl ExperimentReport {
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "rho_rc,rho_sub,rho_total_percent,method,trials,mean_nrmse,median_nrmse,converged\n",
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.rho_rc,
                c.rho_sub,
                percent(c.rho_total),
                c.method.name(),
                c.trials,
                format_f64(c.mean_nrmse),
                format_f64(c.median_nrmse),
                c.converged_trials
            );
        }
        out
    }

    pub fn trials_csv(&self) -> String {
        let with_time = self.trials.iter().any(|o| o.runtime_secs.is_some());
        let mut out = String::from("method,rho_rc,rho_sub,seed,nrmse,converged,distinct_samples");
        out.push_str(if with_time { ",runtime_secs\n" } else { "\n" });
        for o in &self.trials {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}",
                o.method.name(),
                o.rho_rc,
                o.rho_sub,
                o.seed,
                format_f64(o.nrmse),
                o.converged,
                o.distinct_samples
            );
            if let Some(r) = o.runtime_secs {
                let _ = write!(out, ",{r}");
            }
            out.push('\n');
        }
        out
    }

    /// `summary.csv`, `trials.csv`, `report.json` and one
    /// `plot_<method>.dat` per method (`rho_total median mean`).
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, text: &str| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        put("summary.csv", &self.summary_csv())?;
        put("trials.csv", &self.trials_csv())?;
        write_json(dir.join("report.json"), self)?;
        let mut methods: Vec<Method> = Vec::new();
        for c in &self.cells {
            if !methods.contains(&c.method) {
                methods.push(c.method);
            }
        }
        for m in methods {
            let mut text = String::from("# rho_total median_nrmse mean_nrmse\n");
            let mut rows: Vec<&CellSummary> = self.cells.iter().filter(|c| c.method == m).collect();
            rows.sort_by(|a, b| a.rho_total.total_cmp(&b.rho_total));
            for c in rows {
                let _ = writeln!(
                    text,
                    "{} {} {}",
                    c.rho_total,
                    format_f64(c.median_nrmse),
                    format_f64(c.mean_nrmse)
                );
            }
            put(&format!("plot_{}.dat", m.name()), &text)?;
        }
        Ok(())
    }
}
