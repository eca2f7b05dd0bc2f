//! Nuclear-norm completion on the sampled submatrix frame.
//!
//! ADMM for `min ||Z||_* s.t. X = Z, X = b on the observed set`:
//! `Z <- SVT_{1/rho}(X + U)`, `X <- P_C(Z - U)`, `U <- U + X - Z`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ThinSvd;
use crate::sampling::SampleSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompletionConfig {
    pub max_iters: usize,
    /// Stop when both the consensus gap and the step are below
    /// `tol * ||b||_F`.
    pub tol: f64,
    /// Penalty relative to `1 / sigma_max(b)`.
    pub rho: f64,
}

impl Default for CompletionConfig {
    fn default() -> Self {
        CompletionConfig {
            max_iters: 1000,
            tol: 1e-9,
            rho: 3.0,
        }
    }
}

impl CompletionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be >= 1"));
        }
        if !(self.tol > 0.0 && self.rho > 0.0) {
            return Err(Error::invalid("tol and rho must be positive"));
        }
        Ok(())
    }
}

/// Completed `|I| x |J|` block, indexed by the sample set's `rows`/`cols`.
#[derive(Clone, Debug)]
pub struct SubmatrixCompletion {
    pub x_rc: DMatrix<f64>,
    /// Nuclear norm of the best feasible iterate so far.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

pub fn complete_submatrix(s: &SampleSet, cfg: &CompletionConfig) -> Result<SubmatrixCompletion> {
    cfg.validate()?;
    if s.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let (rows, cols) = (s.rows(), s.cols());
    let mut mask = DMatrix::from_element(rows.len(), cols.len(), false);
    let mut b = DMatrix::zeros(rows.len(), cols.len());
    for (&(i, j), &v) in s.entries().iter().zip(s.values()) {
        // entries are guaranteed to lie in rows x cols
        let a = rows.binary_search(&i).expect("row in subset");
        let c = cols.binary_search(&j).expect("column in subset");
        mask[(a, c)] = true;
        b[(a, c)] = v;
    }
    complete_masked(&b, &mask, cfg)
}

pub(crate) fn complete_masked(
    b: &DMatrix<f64>,
    mask: &DMatrix<bool>,
    cfg: &CompletionConfig,
) -> Result<SubmatrixCompletion> {
    let b_norm = b.norm();
    let (m, n) = b.shape();
    if b_norm == 0.0 || mask.iter().all(|&v| v) {
        return Ok(SubmatrixCompletion {
            x_rc: b.clone(),
            objective_trace: vec![nuclear_norm(b)],
            converged: true,
            iterations: 0,
        });
    }
    let sigma_max = ThinSvd::values(b)[0];
    let threshold = sigma_max / cfg.rho;

    let feasible = |z: &DMatrix<f64>| z.zip_zip_map(mask, b, |v, k, o| if k { o } else { v });
    let mut x = b.clone();
    let mut u = DMatrix::<f64>::zeros(m, n);
    let mut best = x.clone();
    let mut best_obj = nuclear_norm(&x);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        let svd = ThinSvd::new(&(&x + &u));
        let z = svd.reconstruct_with(|_, s| s - threshold);
        let x_next = feasible(&(&z - &u));
        u += &x_next - &z;
        let gap = (&x_next - &z).norm();
        let step = (&x_next - &x).norm();
        x = x_next;
        let obj = nuclear_norm(&x);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from(&x);
        }
        trace.push(best_obj);
        if gap <= cfg.tol * b_norm && step <= cfg.tol * b_norm {
            converged = true;
            break;
        }
    }
    Ok(SubmatrixCompletion {
        x_rc: best,
        objective_trace: trace,
        converged,
        iterations,
    })
}

pub(crate) fn nuclear_norm(x: &DMatrix<f64>) -> f64 {
    ThinSvd::values(x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn masked(x: &DMatrix<f64>, keep: f64, seed: u64) -> (DMatrix<f64>, DMatrix<bool>) {
        let mut rng = seeded(seed);
        let mask = DMatrix::from_fn(x.nrows(), x.ncols(), |_, _| rng.random::<f64>() < keep);
        (x.zip_map(&mask, |v, k| if k { v } else { 0.0 }), mask)
    }

    #[test]
    fn fully_observed_block_is_returned() {
        let x = DMatrix::from_fn(3, 4, |i, j| (i * j) as f64 + 0.5);
        let s = crate::sampling::full_sample(&x, 0).unwrap();
        let c = complete_submatrix(&s, &CompletionConfig::default()).unwrap();
        assert_eq!(c.x_rc, x);
    }

    #[test]
    fn single_entry_completes_with_zeros() {
        let s = SampleSet::new(0, vec![0, 1], vec![0, 1], vec![(0, 0)], vec![5.0]).unwrap();
        let c = complete_submatrix(&s, &CompletionConfig::default()).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[5.0, 0.0, 0.0, 0.0]);
        assert!((c.x_rc - expected).abs().max() < 1e-9);
    }

    #[test]
    fn rank_one_at_sixty_percent() {
        let mut errs = Vec::new();
        for seed in 0..10 {
            let mut rng = seeded(seed);
            let u = DMatrix::from_fn(30, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
            let v = DMatrix::from_fn(1, 40, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = u * v;
            let (b, mask) = masked(&x, 0.6, 1000 + seed);
            let c = complete_masked(&b, &mask, &CompletionConfig::default()).unwrap();
            assert!(c.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-8));
            errs.push((&c.x_rc - &x).norm() / x.norm());
        }
        errs.sort_by(f64::total_cmp);
        assert!(errs[5] <= 1e-3, "median {}", errs[5]);
    }
}
