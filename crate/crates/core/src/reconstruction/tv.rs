//! Smoothed total-variation inpainting.
//!
//! Minimizes `sum_{i,j} ||grad X(i, j)||_a` over the entries outside a known
//! row/column block, the block held fixed. Gradient descent with
//! Barzilai-Borwein steps and Armijo backtracking, with continuation in `a`
//! from the data scale down to the target value.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{gradient_parts, Edge, GraphOperators, TimeOperators};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TvInpaintConfig {
    pub smoothing_a: f64,
    /// Scale `smoothing_a` by the RMS of the known block.
    pub relative_a: bool,
    /// Total gradient steps over all continuation stages.
    pub tv_iters: usize,
    pub tv_tol: f64,
    /// Initial step, in units of the current `a`.
    pub step: f64,
}

impl Default for TvInpaintConfig {
    fn default() -> Self {
        TvInpaintConfig {
            smoothing_a: 1e-3,
            relative_a: true,
            tv_iters: 20_000,
            tv_tol: 1e-9,
            step: 1.0,
        }
    }
}

impl TvInpaintConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.smoothing_a > 0.0 && self.smoothing_a.is_finite()) {
            return Err(Error::invalid(format!(
                "smoothing_a must be positive, got {}",
                self.smoothing_a
            )));
        }
        if self.tv_iters == 0 {
            return Err(Error::invalid("tv_iters must be >= 1"));
        }
        if !(self.tv_tol > 0.0 && self.step > 0.0) {
            return Err(Error::invalid("tv_tol and step must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TvInpaintResult {
    pub x: DMatrix<f64>,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

fn eval(x: &DMatrix<f64>, edges: &[Edge], a: f64, want_grad: bool) -> (f64, DMatrix<f64>) {
    let (n, t) = x.shape();
    let parts = gradient_parts(x, edges);
    let a2 = a * a;
    let nrm = parts
        .graph_sq
        .zip_map(&parts.temporal, |g, d| (g + d * d + a2).sqrt());
    let f = nrm.sum();
    if !want_grad {
        return (f, DMatrix::zeros(0, 0));
    }
    let mut grad = DMatrix::zeros(n, t);
    for j in 0..t.saturating_sub(1) {
        for i in 0..n {
            let q = parts.temporal[(i, j)] / nrm[(i, j)];
            grad[(i, j + 1)] += q;
            grad[(i, j)] -= q;
        }
    }
    for e in edges {
        let sw = e.weight.sqrt();
        for j in 0..t {
            let d = sw * (x[(e.u, j)] - x[(e.v, j)]);
            let c = (1.0 / nrm[(e.u, j)] + 1.0 / nrm[(e.v, j)]) * d * sw;
            grad[(e.u, j)] += c;
            grad[(e.v, j)] -= c;
        }
    }
    (f, grad)
}

/// `sum_{i,j} ||grad X(i, j)||_a`.
pub fn tv_objective(x: &DMatrix<f64>, ops: &GraphOperators, a: f64) -> f64 {
    eval(x, &ops.edges, a, false).0
}

/// Derivative of [`tv_objective`] with respect to every entry of `x`.
pub fn tv_gradient(x: &DMatrix<f64>, ops: &GraphOperators, a: f64) -> DMatrix<f64> {
    eval(x, &ops.edges, a, true).1
}

/// Fills everything outside `rows x cols` of `partial`.
pub fn tv_inpaint(
    partial: &DMatrix<f64>,
    rows: &[usize],
    cols: &[usize],
    ops: &GraphOperators,
    tops: &TimeOperators,
    cfg: &TvInpaintConfig,
) -> Result<TvInpaintResult> {
    cfg.validate()?;
    let (n, t) = partial.shape();
    if n != ops.num_vertices() || t != tops.num_steps() {
        return Err(Error::dims(
            format!("{}x{}", ops.num_vertices(), tops.num_steps()),
            format!("{n}x{t}"),
        ));
    }
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::invalid("known block is empty"));
    }
    if rows.iter().any(|&i| i >= n) || cols.iter().any(|&j| j >= t) {
        return Err(Error::IndexOutOfRange(
            "known block exceeds the frame".into(),
        ));
    }
    if partial.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("partial matrix".into()));
    }
    let mut known = DMatrix::from_element(n, t, false);
    for &i in rows {
        for &j in cols {
            known[(i, j)] = true;
        }
    }
    let free = known.iter().filter(|k| !**k).count();
    let known_vals: Vec<f64> = partial
        .iter()
        .zip(known.iter())
        .filter(|(_, k)| **k)
        .map(|(v, _)| *v)
        .collect();
    let mean = known_vals.iter().sum::<f64>() / known_vals.len() as f64;
    let scale = crate::linalg::rms(&known_vals);
    let a_final = if cfg.relative_a && scale > 0.0 {
        cfg.smoothing_a * scale
    } else {
        cfg.smoothing_a
    };

    let mut x = partial.zip_map(&known, |v, k| if k { v } else { mean });
    let edges = &ops.edges;
    if free == 0 {
        let f = eval(&x, edges, a_final, false).0;
        return Ok(TvInpaintResult {
            x,
            objective_trace: vec![f],
            converged: true,
            iterations: 0,
        });
    }

    let restrict = |g: &mut DMatrix<f64>| {
        g.zip_apply(&known, |v, k| {
            if k {
                *v = 0.0
            }
        })
    };
    let move_floor = 1e-16 * scale.max(a_final) * (free as f64).sqrt();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged;
    let mut a = scale.max(a_final);
    loop {
        let (mut f, mut g) = eval(&x, edges, a, true);
        restrict(&mut g);
        let g_tol = cfg.tv_tol * scale.max(a) * (free as f64).sqrt() / a;
        let mut step = cfg.step * a;
        let mut prev: Option<(DMatrix<f64>, DMatrix<f64>)> = None;
        let mut stage_done = g.norm() <= g_tol;
        while !stage_done && iterations < cfg.tv_iters {
            if let Some((xp, gp)) = &prev {
                let s = &x - xp;
                let y = &g - gp;
                let sy = s.dot(&y);
                step = if sy > 0.0 {
                    s.norm_squared() / sy
                } else {
                    step * 2.0
                };
            }
            let g2 = g.norm_squared();
            let (x_next, f_next, g_next) = loop {
                let cand = &x - &g * step;
                let (fc, mut gc) = eval(&cand, edges, a, true);
                if fc <= f - 1e-4 * step * g2 {
                    restrict(&mut gc);
                    break (Some(cand), fc, gc);
                }
                step *= 0.5;
                if step * g2.sqrt() < move_floor {
                    break (None, f, DMatrix::zeros(0, 0));
                }
            };
            let Some(x_next) = x_next else {
                // no representable descent step left at this a
                stage_done = true;
                break;
            };
            iterations += 1;
            prev = Some((
                std::mem::replace(&mut x, x_next),
                std::mem::replace(&mut g, g_next),
            ));
            f = f_next;
            trace.push(f);
            stage_done = g.norm() <= g_tol;
        }
        converged = stage_done;
        if a <= a_final || iterations >= cfg.tv_iters {
            break;
        }
        a = (a / 10.0).max(a_final);
    }
    Ok(TvInpaintResult {
        x,
        objective_trace: trace,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{TimeHorizon, VertexGraph};
    use crate::rng::seeded;
    use rand::Rng;

    fn ops_for(g: &VertexGraph, t: usize) -> (GraphOperators, TimeOperators) {
        (
            GraphOperators::build(g).unwrap(),
            TimeOperators::build(TimeHorizon::new(t).unwrap()),
        )
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = seeded(11);
        for trial in 0..5 {
            let mut edges = Vec::new();
            for u in 0..5 {
                for v in (u + 1)..5 {
                    if rng.random::<f64>() < 0.6 {
                        edges.push((u, v, 0.2 + rng.random::<f64>()));
                    }
                }
            }
            let g = VertexGraph::new(5, edges).unwrap();
            let (ops, _) = ops_for(&g, 6);
            let x = DMatrix::from_fn(5, 6, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let a = 0.1;
            let grad = tv_gradient(&x, &ops, a);
            let h = 1e-6;
            let mut fd = DMatrix::zeros(5, 6);
            for k in 0..30 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                fd[k] = (tv_objective(&xp, &ops, a) - tv_objective(&xm, &ops, a)) / (2.0 * h);
            }
            let rel = (&grad - &fd).norm() / fd.norm();
            assert!(rel < 1e-5, "trial {trial}: relative error {rel}");
        }
    }

    #[test]
    fn constant_block_extends_constant() {
        let g = VertexGraph::cycle(6).unwrap();
        let (ops, tops) = ops_for(&g, 7);
        let mut partial = DMatrix::zeros(6, 7);
        for i in [1, 2, 4] {
            for j in [0, 3, 5] {
                partial[(i, j)] = 2.5;
            }
        }
        let r = tv_inpaint(
            &partial,
            &[1, 2, 4],
            &[0, 3, 5],
            &ops,
            &tops,
            &TvInpaintConfig::default(),
        )
        .unwrap();
        assert!(r.x.iter().all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn single_vertex_ramp_interpolates() {
        let g = VertexGraph::new(1, []).unwrap();
        let (ops, tops) = ops_for(&g, 5);
        let partial = DMatrix::from_row_slice(1, 5, &[0.0, 0.0, 2.0, 0.0, 4.0]);
        let r = tv_inpaint(
            &partial,
            &[0],
            &[0, 2, 4],
            &ops,
            &tops,
            &TvInpaintConfig::default(),
        )
        .unwrap();
        assert!((r.x[(0, 1)] - 1.0).abs() < 1e-3, "{}", r.x);
        assert!((r.x[(0, 3)] - 3.0).abs() < 1e-3, "{}", r.x);
        assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-8));
    }

    #[test]
    fn two_vertices_pull_together() {
        let g = VertexGraph::path(2).unwrap();
        let t = 12;
        let (ops, tops) = ops_for(&g, t);
        let row: Vec<f64> = (0..t).map(|j| (j as f64 * 0.3).sin() + 2.0).collect();
        let mut partial = DMatrix::zeros(2, t);
        for j in 0..t {
            partial[(0, j)] = row[j];
        }
        let cols: Vec<usize> = (0..t).collect();
        let r = tv_inpaint(
            &partial,
            &[0],
            &cols,
            &ops,
            &tops,
            &TvInpaintConfig::default(),
        )
        .unwrap();
        // TV clips the row ends and the extremum a little; everywhere else
        // the free row sits on the known one
        let range = row.iter().cloned().fold(f64::MIN, f64::max)
            - row.iter().cloned().fold(f64::MAX, f64::min);
        let gaps: Vec<f64> = (0..t).map(|j| (r.x[(1, j)] - row[j]).abs()).collect();
        let mean_gap = gaps.iter().sum::<f64>() / t as f64;
        let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
        assert!(mean_gap < 0.05 * range, "mean gap {mean_gap}\n{}", r.x);
        assert!(max_gap < 0.15 * range, "max gap {max_gap}\n{}", r.x);
        let interior = gaps[2..t - 2].iter().cloned().fold(0.0, f64::max);
        assert!(interior < 0.03 * range, "interior gap {interior}");
    }

    #[test]
    fn rejects_empty_block_and_bad_a() {
        let g = VertexGraph::path(2).unwrap();
        let (ops, tops) = ops_for(&g, 3);
        let p = DMatrix::zeros(2, 3);
        assert!(tv_inpaint(&p, &[], &[0], &ops, &tops, &TvInpaintConfig::default()).is_err());
        let bad = TvInpaintConfig {
            smoothing_a: 0.0,
            ..Default::default()
        };
        assert!(tv_inpaint(&p, &[0], &[0], &ops, &tops, &bad).is_err());
    }
}
