//! Error metric, Monte Carlo checks of the sampling lemmas, dataset
//! windowing and the ratio-grid experiment runner.

mod dataset;
mod experiment;
mod lemmas;

use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use dataset::{ingest_dataset, split_windows, Dataset, DatasetGraph, DatasetSpec};
pub use experiment::{
    percent, plan_table, run_experiment_grid, CellSummary, ExperimentConfig, ExperimentReport,
    Method, PlanRow, SignalSource, TrialOutcome,
};
pub use lemmas::{
    verify_lemma1, verify_lemma2, Lemma1Report, Lemma1Trial, Lemma2Report, Lemma2Sizing,
    Lemma2Trial, SubsetSizing,
};

use crate::error::{Error, Result};
use crate::graph::{GraphOperators, Metric, TimeHorizon, VertexGraph};
use crate::rng::seeded;
use crate::signal::{synth_ftvgs, Ftvgs, SynthSpec};

/// `||x_a - x_b||_F / ||x_a||_F`.
pub fn nrmse(x_a: &DMatrix<f64>, x_b: &DMatrix<f64>) -> Result<f64> {
    if x_a.shape() != x_b.shape() {
        return Err(Error::dims(
            format!("{}x{}", x_a.nrows(), x_a.ncols()),
            format!("{}x{}", x_b.nrows(), x_b.ncols()),
        ));
    }
    let d = x_a.norm();
    if d == 0.0 {
        return Err(Error::UndefinedMetric(
            "reference matrix is all zero".into(),
        ));
    }
    Ok((x_a - x_b).norm() / d)
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Three-sigma binomial allowance around a success probability `q`.
pub fn binomial_allowance(q: f64, trials: usize) -> f64 {
    let q = q.clamp(0.0, 1.0);
    3.0 * (q * (1.0 - q) / trials as f64).sqrt()
}

/// Vertex graph for synthetic signals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Cycle,
    Path,
    /// Uniform random points in the unit square, Gaussian-kernel k-NN.
    Knn {
        k: usize,
        seed: u64,
    },
    EdgeList {
        path: PathBuf,
    },
}

impl GraphSpec {
    pub fn build(&self, n: usize) -> Result<VertexGraph> {
        match self {
            GraphSpec::Cycle => VertexGraph::cycle(n),
            GraphSpec::Path => VertexGraph::path(n),
            GraphSpec::Knn { k, seed } => {
                let mut rng = seeded(*seed);
                let points: Vec<(f64, f64)> =
                    (0..n).map(|_| (rng.random(), rng.random())).collect();
                VertexGraph::knn_gaussian(&points, *k, Metric::Euclidean)
            }
            GraphSpec::EdgeList { path } => crate::io::read_edge_list(path, n),
        }
    }
}

/// Band-limited low-rank signal family on a fixed graph and horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n_vertices: usize,
    pub n_steps: usize,
    pub rank: usize,
    pub graph_band: usize,
    pub time_band: usize,
    #[serde(default = "default_graph")]
    pub graph: GraphSpec,
}

fn default_graph() -> GraphSpec {
    GraphSpec::Cycle
}

impl GeneratorSpec {
    /// Rank-`r` signal with both bands equal to `r`.
    pub fn smooth(n_vertices: usize, n_steps: usize, rank: usize) -> Self {
        GeneratorSpec {
            n_vertices,
            n_steps,
            rank,
            graph_band: rank,
            time_band: rank,
            graph: GraphSpec::Cycle,
        }
    }
}

/// A [`GeneratorSpec`] with its operators built once.
pub struct SynthGenerator {
    pub spec: GeneratorSpec,
    pub graph: VertexGraph,
    pub ops: GraphOperators,
    pub horizon: TimeHorizon,
}

impl SynthGenerator {
    pub fn new(spec: GeneratorSpec) -> Result<Self> {
        let graph = spec.graph.build(spec.n_vertices)?;
        let ops = GraphOperators::build(&graph)?;
        let horizon = TimeHorizon::new(spec.n_steps)?;
        let g = SynthGenerator {
            spec,
            graph,
            ops,
            horizon,
        };
        // surface infeasible band settings before any trial runs
        g.draw(0)?;
        Ok(g)
    }

    pub fn synth_spec(&self) -> SynthSpec {
        SynthSpec {
            rank: self.spec.rank,
            graph_band: self.spec.graph_band,
            time_band: self.spec.time_band,
        }
    }

    pub fn draw(&self, seed: u64) -> Result<Ftvgs> {
        synth_ftvgs(
            &self.graph,
            &self.ops,
            self.horizon,
            self.synth_spec(),
            seed,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nrmse_examples() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, 0.5]);
        assert_eq!(nrmse(&x, &x).unwrap(), 0.0);
        assert_eq!(nrmse(&x, &DMatrix::zeros(2, 2)).unwrap(), 1.0);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(nrmse(&a, &b).unwrap(), 0.5);
        assert!(matches!(
            nrmse(&DMatrix::zeros(2, 2), &a),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(nrmse(&a, &DMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn graph_spec_json() {
        let g: GraphSpec = serde_json::from_str(r#"{"kind":"knn","k":4,"seed":1}"#).unwrap();
        assert_eq!(g.build(30).unwrap().num_vertices(), 30);
        let c: GraphSpec = serde_json::from_str(r#"{"kind":"cycle"}"#).unwrap();
        assert_eq!(c.build(5).unwrap().num_edges(), 5);
    }

    #[test]
    fn generator_rejects_infeasible_bands() {
        let spec = GeneratorSpec {
            graph_band: 2,
            ..GeneratorSpec::smooth(10, 12, 3)
        };
        assert!(SynthGenerator::new(spec).is_err());
    }
}
