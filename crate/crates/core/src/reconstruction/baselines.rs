//! Matrix-completion baselines that ignore the graph and time structure.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::completion::nuclear_norm;
use super::{Observed, ReconstructionResult};
use crate::error::{Error, Result};
use crate::linalg::ThinSvd;
use crate::sampling::SampleSet;

/// `U diag(max(sigma - tau, 0)) V^T`.
pub fn singular_value_threshold(x: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    ThinSvd::new(x).reconstruct_with(|_, s| s - tau)
}

/// Singular value thresholding. Unset `tau` means `5 sqrt(N T)` times the
/// RMS of the observations; unset `step` means `min(1.2 N T / m, 1.9)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvtConfig {
    pub tau: Option<f64>,
    pub step: Option<f64>,
    pub max_iters: usize,
    /// Relative residual on the observed set.
    pub tol: f64,
}

impl Default for SvtConfig {
    fn default() -> Self {
        SvtConfig {
            tau: None,
            step: None,
            max_iters: 3000,
            tol: 1e-4,
        }
    }
}

impl SvtConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(tau) = self.tau {
            if !(tau >= 0.0) {
                return Err(Error::invalid(format!("tau must be >= 0, got {tau}")));
            }
        }
        if let Some(step) = self.step {
            // the dual ascent is monotone only below 2
            if !(step > 0.0 && step < 2.0) {
                return Err(Error::invalid(format!(
                    "step must lie in (0, 2), got {step}"
                )));
            }
        }
        if self.max_iters == 0 || !(self.tol > 0.0) {
            return Err(Error::invalid("max_iters must be >= 1 and tol positive"));
        }
        Ok(())
    }
}

/// Dual ascent on `min tau ||X||_* + ||X||_F^2 / 2 s.t. P(X) = b`. The trace
/// holds the negated dual objective. Observed entries are written back into
/// the returned estimate.
pub fn svt_baseline(
    s: &SampleSet,
    n: usize,
    t: usize,
    cfg: &SvtConfig,
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let obs = Observed::from_samples(s, n, t)?;
    let b = &obs.b;
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(ReconstructionResult::new(
            DMatrix::zeros(n, t),
            &obs,
            vec![0.0],
            true,
            0,
        ));
    }
    let tau = cfg.tau.unwrap_or(5.0 * ((n * t) as f64).sqrt() * obs.rms());
    let step = cfg.step.unwrap_or((1.2 / obs.fraction()).min(1.9));

    let mut y = DMatrix::<f64>::zeros(n, t);
    let mut x = DMatrix::zeros(n, t);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        let svd = ThinSvd::new(&y);
        x = svd.reconstruct_with(|_, sv| sv - tau);
        let residual = (b - &x).zip_map(&obs.mask, |r, m| if m { r } else { 0.0 });
        let dual = tau * nuclear_norm(&x) + 0.5 * x.norm_squared() + y.dot(&residual);
        trace.push(-dual);
        if residual.norm() / b_norm < cfg.tol {
            converged = true;
            break;
        }
        y += residual * step;
    }
    obs.impose(&mut x);
    Ok(ReconstructionResult::new(
        x, &obs, trace, converged, iterations,
    ))
}

/// Truncated nuclear norm regularization: minimize `sum_{i > r} sigma_i(X)`
/// subject to the observations, alternating between fixing the top-`r`
/// singular subspaces and an ADMM solve of the resulting convex problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TnnrConfig {
    pub trunc_r: usize,
    pub outer_iters: usize,
    pub inner_iters: usize,
    /// ADMM penalty relative to `1 / ||b||_F`.
    pub beta: f64,
    pub tol: f64,
}

impl Default for TnnrConfig {
    fn default() -> Self {
        TnnrConfig {
            trunc_r: 1,
            outer_iters: 20,
            inner_iters: 100,
            beta: 1.0,
            tol: 1e-6,
        }
    }
}

impl TnnrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_iters == 0 || self.inner_iters == 0 {
            return Err(Error::invalid("iteration counts must be >= 1"));
        }
        if !(self.beta > 0.0 && self.tol > 0.0) {
            return Err(Error::invalid("beta and tol must be positive"));
        }
        Ok(())
    }
}

fn tail_sum(x: &DMatrix<f64>, r: usize) -> f64 {
    ThinSvd::values(x).iter().skip(r).sum()
}

/// Trace: tail singular-value sum of the best feasible iterate.
pub fn tnnr_baseline(
    s: &SampleSet,
    n: usize,
    t: usize,
    cfg: &TnnrConfig,
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let obs = Observed::from_samples(s, n, t)?;
    let b = &obs.b;
    let b_norm = b.norm();
    if b_norm == 0.0 || obs.count == n * t {
        let trace = vec![tail_sum(b, cfg.trunc_r)];
        return Ok(ReconstructionResult::new(b.clone(), &obs, trace, true, 0));
    }
    let beta = cfg.beta / b_norm;
    let r = cfg.trunc_r.min(n.min(t));

    let mut x = b.clone();
    let mut w = b.clone();
    let mut lambda = DMatrix::<f64>::zeros(n, t);
    let mut best = w.clone();
    let mut best_obj = tail_sum(&w, r);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for outer in 0..cfg.outer_iters {
        iterations = outer + 1;
        let svd = ThinSvd::new(&x);
        let ab = svd.u.columns(0, r) * svd.v.columns(0, r).transpose();
        let w_start = w.clone();
        for _ in 0..cfg.inner_iters {
            x = singular_value_threshold(&(&w - &lambda / beta), 1.0 / beta);
            w = &x + (&ab + &lambda) / beta;
            obs.impose(&mut w);
            let gap = &x - &w;
            lambda += &gap * beta;
            if gap.norm() <= cfg.tol * b_norm {
                break;
            }
        }
        let obj = tail_sum(&w, r);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from(&w);
        }
        trace.push(best_obj);
        if (&w - &w_start).norm() <= cfg.tol * b_norm {
            converged = true;
            break;
        }
    }
    Ok(ReconstructionResult::new(
        best, &obs, trace, converged, iterations,
    ))
}
