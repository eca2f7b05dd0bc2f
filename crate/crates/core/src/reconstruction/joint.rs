//! Joint low-rank and spectral-sparsity recovery.
//!
//! The objective is
//! `sum_i log(sigma_i(X) + 1) + gamma_g ||W_G . F_G||_1 + gamma_t ||W_T . F_T||_1`
//! subject to `X = b` on the sampled positions. Both spectral constraints
//! are changes of variable, so the solver works on `X` alone.
//!
//! Outer loop: linearize the concave terms at the current iterate, which
//! gives singular-value weights `1 / (sigma_i + 1)` and entry weights
//! `1 / (|F| + eps)`. Inner loop: consensus ADMM over three copies of `X`,
//! one per regularizer, each with a closed-form proximal map, and the
//! observation constraint applied exactly to the consensus variable.
//!
//! The weighted problems are majorizers of
//! `Phi(X) = sum log(sigma + 1) + gamma_g sum log(1 + |F_G| / eps) + gamma_t sum log(1 + |F_T| / eps)`,
//! which is the value tracked in the objective trace. ADMM iterates are not
//! monotone in `Phi`, so the solver keeps the best feasible iterate seen.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::spectral::{graph_spectrum, inverse_graph_spectrum, soft, soft_complex, RowDft};
use super::{check_frame, Observed, ReconstructionResult};
use crate::error::{Error, Result};
use crate::graph::{GraphOperators, TimeOperators};
use crate::linalg::ThinSvd;
use crate::sampling::SampleSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JointSolverConfig {
    pub gamma_g: f64,
    pub gamma_t: f64,
    /// Outer (reweighting) iterations.
    pub max_iters: usize,
    /// ADMM sweeps per outer iteration.
    pub inner_iters: usize,
    pub obj_tol: f64,
    /// Stop after this many outer iterations without a relative improvement
    /// of at least `obj_tol`.
    pub patience: usize,
    pub weight_eps: f64,
    /// Scale `weight_eps` by the RMS of the observed values.
    pub relative_eps: bool,
    /// ADMM penalty, relative to the squared signal scale.
    pub rho: f64,
}

impl Default for JointSolverConfig {
    fn default() -> Self {
        JointSolverConfig {
            gamma_g: 1e-3,
            gamma_t: 1e-3,
            max_iters: 500,
            inner_iters: 20,
            obj_tol: 1e-6,
            patience: 10,
            weight_eps: 0.1,
            relative_eps: true,
            rho: 3.0,
        }
    }
}

impl JointSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_g >= 0.0 && self.gamma_t >= 0.0) {
            return Err(Error::invalid("gamma_g and gamma_t must be >= 0"));
        }
        if self.max_iters == 0 || self.inner_iters == 0 || self.patience == 0 {
            return Err(Error::invalid(
                "max_iters, inner_iters and patience must be >= 1",
            ));
        }
        if !(self.obj_tol > 0.0 && self.weight_eps > 0.0 && self.rho > 0.0) {
            return Err(Error::invalid(
                "obj_tol, weight_eps and rho must be positive",
            ));
        }
        Ok(())
    }
}

struct Potential<'a> {
    ops: &'a GraphOperators,
    dft: &'a RowDft,
    gamma_g: f64,
    gamma_t: f64,
    eps: f64,
}

impl Potential<'_> {
    fn eval(&self, x: &DMatrix<f64>, sigma: &[f64]) -> f64 {
        let rank: f64 = sigma.iter().map(|s| s.ln_1p()).sum();
        let fg: f64 = graph_spectrum(x, self.ops)
            .iter()
            .map(|v| (v.abs() / self.eps).ln_1p())
            .sum();
        let ft: f64 = self
            .dft
            .forward(x)
            .iter()
            .map(|c| (c.norm() / self.eps).ln_1p())
            .sum();
        rank + self.gamma_g * fg + self.gamma_t * ft
    }
}

pub fn solve_joint(
    s: &SampleSet,
    ops: &GraphOperators,
    tops: &TimeOperators,
    cfg: &JointSolverConfig,
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let (n, t) = check_frame(ops, tops);
    let obs = Observed::from_samples(s, n, t)?;
    let b = &obs.b;
    if b.iter().all(|&v| v == 0.0) {
        let zero = DMatrix::zeros(n, t);
        return Ok(ReconstructionResult::new(zero, &obs, vec![0.0], true, 0));
    }

    let eps = if cfg.relative_eps {
        cfg.weight_eps * obs.rms()
    } else {
        cfg.weight_eps
    };
    let scale2 = b.norm_squared() / obs.fraction();
    let inv_rho = scale2 / cfg.rho;
    let dft = RowDft::new(t);
    let potential = Potential {
        ops,
        dft: &dft,
        gamma_g: cfg.gamma_g,
        gamma_t: cfg.gamma_t,
        eps,
    };

    let mut y = b.clone();
    let mut z = [b.clone(), b.clone(), b.clone()];
    let mut u = [
        DMatrix::zeros(n, t),
        DMatrix::zeros(n, t),
        DMatrix::zeros(n, t),
    ];
    let mut w_g = DMatrix::from_element(n, t, 1.0);
    let mut w_t = DMatrix::from_element(n, t, 1.0);

    let mut best = y.clone();
    let mut best_phi = f64::INFINITY;
    let mut trace = Vec::new();
    let mut stall = 0;
    let mut converged = false;
    let mut iterations = 0;

    let mut sigma = ThinSvd::values(&y);
    for outer in 0..cfg.max_iters {
        iterations = outer + 1;
        let w_sigma: Vec<f64> = sigma.iter().map(|s| 1.0 / (s + 1.0)).collect();
        if outer > 0 {
            w_g = graph_spectrum(&y, ops).map(|v| 1.0 / (v.abs() + eps));
            w_t = dft.forward(&y).map(|c| 1.0 / (c.norm() + eps));
        }

        for _ in 0..cfg.inner_iters {
            let svd = ThinSvd::new(&(&y - &u[0]));
            z[0] = svd.reconstruct_with(|i, sv| sv - w_sigma[i] * inv_rho);

            let mut fg = graph_spectrum(&(&y - &u[1]), ops);
            fg.zip_apply(&w_g, |v, w| *v = soft(*v, cfg.gamma_g * w * inv_rho));
            z[1] = inverse_graph_spectrum(&fg, ops);

            let mut ft = dft.forward(&(&y - &u[2]));
            ft.zip_apply(&w_t, |c, w| {
                *c = soft_complex(*c, cfg.gamma_t * w * inv_rho)
            });
            z[2] = dft.inverse_real(&ft);

            let mut next = (&z[0] + &u[0] + &z[1] + &u[1] + &z[2] + &u[2]) / 3.0;
            obs.impose(&mut next);
            for k in 0..3 {
                u[k] += &z[k] - &next;
            }
            y = next;
        }

        sigma = ThinSvd::values(&y);
        let phi = potential.eval(&y, sigma.as_slice());
        if phi < best_phi - cfg.obj_tol * best_phi.abs() {
            stall = 0;
        } else {
            stall += 1;
        }
        if phi < best_phi {
            best_phi = phi;
            best.copy_from(&y);
        }
        trace.push(best_phi);
        if stall >= cfg.patience {
            converged = true;
            break;
        }
    }
    Ok(ReconstructionResult::new(
        best, &obs, trace, converged, iterations,
    ))
}
