//! Recovering the full signal from a sample set.
//!
//! * [`solve_joint`]: low-rank plus weighted spectral sparsity in both the
//!   graph and the time domain, observations enforced exactly.
//! * [`two_stage_reconstruct`]: nuclear-norm completion of the sampled
//!   submatrix followed by smoothed-TV inpainting of the remaining rows and
//!   columns.
//! * [`svt_baseline`] and [`tnnr_baseline`]: comparison methods.

mod baselines;
mod completion;
mod joint;
pub mod spectral;
mod tv;

use nalgebra::DMatrix;
use serde::Serialize;

pub use baselines::{svt_baseline, tnnr_baseline, SvtConfig, TnnrConfig};
pub use completion::{complete_submatrix, CompletionConfig, SubmatrixCompletion};
pub use joint::{solve_joint, JointSolverConfig};
pub use tv::{tv_gradient, tv_inpaint, tv_objective, TvInpaintConfig, TvInpaintResult};

use crate::error::{Error, Result};
use crate::graph::{GraphOperators, TimeOperators};
use crate::linalg::{symmetric_eigenvalues, ThinSvd};
use crate::sampling::SampleSet;

/// Output of every solver.
#[derive(Clone, Debug, Serialize)]
pub struct ReconstructionResult {
    #[serde(skip)]
    pub x_hat: DMatrix<f64>,
    /// Zero on sampled positions, `-x_hat` elsewhere.
    #[serde(skip)]
    pub error_matrix: DMatrix<f64>,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl ReconstructionResult {
    pub(crate) fn new(
        x_hat: DMatrix<f64>,
        obs: &Observed,
        objective_trace: Vec<f64>,
        converged: bool,
        iterations: usize,
    ) -> Self {
        let error_matrix = x_hat.zip_map(&obs.mask, |v, m| if m { 0.0 } else { -v });
        ReconstructionResult {
            x_hat,
            error_matrix,
            objective_trace,
            converged,
            iterations,
        }
    }
}

/// Distinct constraints of a sample set laid out on the full frame.
#[derive(Clone, Debug)]
pub(crate) struct Observed {
    pub mask: DMatrix<bool>,
    /// Observed values, zero elsewhere.
    pub b: DMatrix<f64>,
    pub count: usize,
}

impl Observed {
    pub fn from_samples(s: &SampleSet, n: usize, t: usize) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        s.check_bounds(n, t)?;
        let mut mask = DMatrix::from_element(n, t, false);
        let mut b = DMatrix::zeros(n, t);
        let mut count = 0;
        for (&(i, j), &v) in s.entries().iter().zip(s.values()) {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("observation at ({i}, {j})")));
            }
            if mask[(i, j)] {
                if b[(i, j)] != v {
                    return Err(Error::invalid(format!(
                        "conflicting observations at ({i}, {j})"
                    )));
                }
                continue;
            }
            mask[(i, j)] = true;
            b[(i, j)] = v;
            count += 1;
        }
        Ok(Observed { mask, b, count })
    }

    pub fn fraction(&self) -> f64 {
        self.count as f64 / self.b.len() as f64
    }

    /// Root mean square of the observed values.
    pub fn rms(&self) -> f64 {
        (self.b.norm_squared() / self.count as f64).sqrt()
    }

    /// Overwrites observed positions of `x` with their values.
    pub fn impose(&self, x: &mut DMatrix<f64>) {
        for ((v, &m), &o) in x.iter_mut().zip(self.mask.iter()).zip(self.b.iter()) {
            if m {
                *v = o;
            }
        }
    }
}

fn check_frame(ops: &GraphOperators, tops: &TimeOperators) -> (usize, usize) {
    (ops.num_vertices(), tops.num_steps())
}

/// `sum_i g(lambda_i(X^T X))` with `g(x) = log(sqrt(x) + 1)`, evaluated from
/// the eigenvalues of the smaller Gram matrix.
pub fn log_surrogate(x: &DMatrix<f64>) -> f64 {
    let gram = if x.nrows() < x.ncols() {
        x * x.transpose()
    } else {
        x.transpose() * x
    };
    symmetric_eigenvalues(&gram)
        .iter()
        .map(|&l| (l.max(0.0).sqrt() + 1.0).ln())
        .sum()
}

/// `sum_i log(sigma_i(X) + 1)`.
pub fn log_singular_sum(x: &DMatrix<f64>) -> f64 {
    ThinSvd::values(x).iter().map(|s| s.ln_1p()).sum()
}

/// Nuclear-norm completion of the sampled submatrix, then TV inpainting of
/// everything outside it.
///
/// The reported trace is the inpainting objective when inpainting ran, else
/// the completion objective.
pub fn two_stage_reconstruct(
    s: &SampleSet,
    ops: &GraphOperators,
    tops: &TimeOperators,
    completion: &CompletionConfig,
    inpaint: &TvInpaintConfig,
) -> Result<ReconstructionResult> {
    let (n, t) = check_frame(ops, tops);
    let obs = Observed::from_samples(s, n, t)?;
    let sub = complete_submatrix(s, completion)?;
    let mut partial = DMatrix::zeros(n, t);
    for (a, &i) in s.rows().iter().enumerate() {
        for (b, &j) in s.cols().iter().enumerate() {
            partial[(i, j)] = sub.x_rc[(a, b)];
        }
    }
    let full_frame = s.rows().len() == n && s.cols().len() == t;
    if full_frame {
        return Ok(ReconstructionResult::new(
            partial,
            &obs,
            sub.objective_trace,
            sub.converged,
            sub.iterations,
        ));
    }
    let tv = tv_inpaint(&partial, s.rows(), s.cols(), ops, tops, inpaint)?;
    let mut x = tv.x;
    obs.impose(&mut x);
    Ok(ReconstructionResult::new(
        x,
        &obs,
        tv.objective_trace,
        sub.converged && tv.converged,
        sub.iterations + tv.iterations,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{TimeHorizon, VertexGraph};
    use crate::sampling::{full_sample, subset_random_sample, SamplingPlan};
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn surrogate_identity_on_random_matrices() {
        let mut rng = crate::rng::seeded(4);
        for (n, t) in [(5, 9), (12, 7), (30, 30)] {
            let x = DMatrix::from_fn(n, t, |_, _| rng.sample::<f64, _>(StandardNormal));
            assert!((log_surrogate(&x) - log_singular_sum(&x)).abs() < 1e-8);
        }
    }

    #[test]
    fn observed_collapses_duplicates_and_rejects_conflicts() {
        let s = SampleSet::new(0, vec![0], vec![1], vec![(0, 1), (0, 1)], vec![2.0, 2.0]).unwrap();
        let o = Observed::from_samples(&s, 2, 2).unwrap();
        assert_eq!(o.count, 1);
        let bad =
            SampleSet::new(0, vec![0], vec![1], vec![(0, 1), (0, 1)], vec![2.0, 3.0]).unwrap();
        assert!(Observed::from_samples(&bad, 2, 2).is_err());
        let empty = SampleSet::new(0, vec![0], vec![1], vec![], vec![]).unwrap();
        assert!(matches!(
            Observed::from_samples(&empty, 2, 2),
            Err(Error::EmptySampleSet)
        ));
    }

    fn frame(n: usize, t: usize) -> (GraphOperators, TimeOperators) {
        let g = VertexGraph::cycle(n).unwrap();
        (
            GraphOperators::build(&g).unwrap(),
            TimeOperators::build(TimeHorizon::new(t).unwrap()),
        )
    }

    #[test]
    fn two_stage_with_full_frame_is_plain_completion() {
        let (n, t) = (8, 10);
        let (ops, tops) = frame(n, t);
        let x = DMatrix::from_fn(n, t, |i, j| (i as f64 + 1.0) * (j as f64 - 4.5));
        let s = subset_random_sample(&x, &SamplingPlan::ratios(1.0, 0.9), 2).unwrap();
        let cfg = CompletionConfig::default();
        let r = two_stage_reconstruct(&s, &ops, &tops, &cfg, &TvInpaintConfig::default()).unwrap();
        let c = complete_submatrix(&s, &cfg).unwrap();
        assert_eq!(r.x_hat, c.x_rc);
    }

    #[test]
    fn two_stage_recovers_a_constant() {
        let (n, t) = (12, 15);
        let (ops, tops) = frame(n, t);
        let x = DMatrix::from_element(n, t, 0.7);
        let s = subset_random_sample(&x, &SamplingPlan::ratios(0.6, 0.5), 8).unwrap();
        let r = two_stage_reconstruct(
            &s,
            &ops,
            &tops,
            &CompletionConfig::default(),
            &TvInpaintConfig::default(),
        )
        .unwrap();
        assert!((&r.x_hat - &x).abs().max() < 1e-6);
    }

    #[test]
    fn error_matrix_vanishes_on_samples() {
        let (n, t) = (4, 5);
        let (ops, tops) = frame(n, t);
        let x = DMatrix::from_fn(n, t, |i, j| (i + j) as f64);
        let s = full_sample(&x, 0).unwrap();
        let r = two_stage_reconstruct(
            &s,
            &ops,
            &tops,
            &CompletionConfig::default(),
            &TvInpaintConfig::default(),
        )
        .unwrap();
        assert_eq!(r.error_matrix, DMatrix::zeros(n, t));
        assert_eq!(r.x_hat, x);
    }
}
