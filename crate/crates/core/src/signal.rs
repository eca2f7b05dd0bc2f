//! Signal container, SVD-based diagnostics and the band-limited generator.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{smoothness_from_edges, GraphOperators, TimeHorizon, VertexGraph};
use crate::linalg::{two_inf_norm, ThinSvd};
use crate::rng::seeded;

/// Default relative rank tolerance (`sigma_i > tol * sigma_max`).
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// A real `N x T` signal bound to its vertex graph and time horizon.
#[derive(Clone, Debug)]
pub struct Ftvgs {
    data: DMatrix<f64>,
    graph: VertexGraph,
    horizon: TimeHorizon,
}

impl Ftvgs {
    pub fn new(data: DMatrix<f64>, graph: VertexGraph, horizon: TimeHorizon) -> Result<Self> {
        if data.nrows() != graph.num_vertices() || data.ncols() != horizon.num_steps() {
            return Err(Error::dims(
                format!("{}x{}", graph.num_vertices(), horizon.num_steps()),
                format!("{}x{}", data.nrows(), data.ncols()),
            ));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            let n = data.nrows();
            return Err(Error::NonFinite(format!("entry ({}, {})", k % n, k / n)));
        }
        Ok(Ftvgs {
            data,
            graph,
            horizon,
        })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn graph(&self) -> &VertexGraph {
        &self.graph
    }

    pub fn horizon(&self) -> TimeHorizon {
        self.horizon
    }

    pub fn num_vertices(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_steps(&self) -> usize {
        self.data.ncols()
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }
}

/// Rank-`r` thin SVD factors.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
    pub rank: usize,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (c, s) in self.sigma.iter().enumerate() {
            us.column_mut(c).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// `sigma_1 / sigma_r`.
    pub fn condition_number(&self) -> f64 {
        self.sigma[0] / self.sigma[self.rank - 1]
    }
}

/// Thin SVD truncated at the numerical rank `#{sigma_i > rank_tol * sigma_max}`.
pub fn thin_svd(x: &DMatrix<f64>, rank_tol: f64) -> Result<SvdFactors> {
    if !(rank_tol > 0.0) {
        return Err(Error::invalid(format!(
            "rank tolerance must be positive, got {rank_tol}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix passed to thin_svd".into()));
    }
    let svd = ThinSvd::new(x);
    let rank = svd.numerical_rank(rank_tol);
    if rank == 0 {
        return Err(Error::ZeroRank);
    }
    Ok(SvdFactors {
        u: svd.u.columns(0, rank).into_owned(),
        sigma: svd.s.rows(0, rank).into_owned(),
        v: svd.v.columns(0, rank).into_owned(),
        rank,
    })
}

/// Rank, incoherence constants, condition number and smoothness constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncoherenceProfile {
    pub rank: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub kappa: f64,
    pub smoothness_c: f64,
}

/// The tightest `mu1 = (N/r) ||U||_{2,inf}^2`, `mu2 = (T/r) ||V||_{2,inf}^2`.
pub fn incoherence_of(factors: &SvdFactors) -> (f64, f64) {
    let r = factors.rank as f64;
    let n = factors.u.nrows() as f64;
    let t = factors.v.nrows() as f64;
    let mu1 = n / r * two_inf_norm(&factors.u).powi(2);
    let mu2 = t / r * two_inf_norm(&factors.v).powi(2);
    (mu1, mu2)
}

pub fn incoherence(x: &Ftvgs) -> Result<IncoherenceProfile> {
    let factors = thin_svd(x.data(), DEFAULT_RANK_TOL)?;
    let (mu1, mu2) = incoherence_of(&factors);
    Ok(IncoherenceProfile {
        rank: factors.rank,
        mu1,
        mu2,
        kappa: factors.condition_number(),
        smoothness_c: smoothness_from_edges(x.data(), x.graph().edges()),
    })
}

/// Parameters of the band-limited low-rank generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub rank: usize,
    pub graph_band: usize,
    pub time_band: usize,
}

/// `Re(Psi_G[:, ..k_G] A B^T Psi_T[:, ..k_T]^H)` with standard-normal `A`
/// (`k_G x r`) and `B` (`k_T x r`), rescaled to unit Frobenius norm.
///
/// Time bands stop below the Nyquist index, so the real part keeps `k_T`
/// independent cosine modes.
pub fn synth_ftvgs(
    graph: &VertexGraph,
    ops: &GraphOperators,
    horizon: TimeHorizon,
    spec: SynthSpec,
    seed: u64,
) -> Result<Ftvgs> {
    let n = graph.num_vertices();
    let t = horizon.num_steps();
    let SynthSpec {
        rank,
        graph_band,
        time_band,
    } = spec;
    if ops.num_vertices() != n {
        return Err(Error::dims(
            format!("{n} vertices"),
            format!("{}", ops.num_vertices()),
        ));
    }
    if rank == 0 || rank > graph_band.min(time_band) || graph_band > n || time_band > t / 2 + 1 {
        return Err(Error::invalid(format!(
            "infeasible bands: rank {rank}, graph band {graph_band} (N = {n}), time band {time_band} (T = {t}, max {})",
            t / 2 + 1
        )));
    }
    let mut rng = seeded(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let a = DMatrix::from_fn(graph_band, rank, |_, _| normal());
    let b = DMatrix::from_fn(time_band, rank, |_, _| normal());
    let left = ops.gft_basis.columns(0, graph_band) * a;
    // Re(Psi_T^H)(k, t) = cos(2 pi t k / T) / sqrt(T)
    let scale = 1.0 / (t as f64).sqrt();
    let cosines = DMatrix::from_fn(time_band, t, |k, s| {
        (2.0 * PI * (((s * k) % t) as f64) / t as f64).cos() * scale
    });
    let right = b.transpose() * cosines;
    let mut x = left * right;
    let norm = x.norm();
    if norm == 0.0 {
        return Err(Error::ZeroRank);
    }
    x /= norm;
    Ftvgs::new(x, graph.clone(), horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_svd() {
        let x = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let f = thin_svd(&x, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank, 2);
        assert!((f.sigma[0] - 3.0).abs() < 1e-14 && (f.sigma[1] - 1.0).abs() < 1e-14);
        assert!((f.u.abs() - DMatrix::identity(2, 2)).abs().max() < 1e-14);
    }

    #[test]
    fn all_ones_is_rank_one() {
        let f = thin_svd(&DMatrix::from_element(2, 2, 1.0), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank, 1);
        assert!((f.sigma[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_has_zero_rank() {
        assert!(matches!(
            thin_svd(&DMatrix::zeros(3, 3), 1e-9),
            Err(Error::ZeroRank)
        ));
        assert!(thin_svd(&DMatrix::zeros(3, 3), 0.0).is_err());
    }

    #[test]
    fn spike_is_maximally_coherent() {
        let (n, t) = (5, 7);
        let mut x = DMatrix::zeros(n, t);
        x[(0, 0)] = 1.0;
        let sig = Ftvgs::new(
            x,
            VertexGraph::path(n).unwrap(),
            TimeHorizon::new(t).unwrap(),
        )
        .unwrap();
        let p = incoherence(&sig).unwrap();
        assert!((p.mu1 - n as f64).abs() < 1e-12);
        assert!((p.mu2 - t as f64).abs() < 1e-12);
        assert_eq!(p.kappa, 1.0);
    }

    #[test]
    fn flat_singular_vector_has_unit_mu1() {
        let (n, t) = (6, 4);
        let v = [0.1, -0.5, 0.7, 0.3];
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let x = DMatrix::from_fn(n, t, |_, j| v[j] / norm / (n as f64).sqrt());
        let sig = Ftvgs::new(
            x,
            VertexGraph::cycle(n).unwrap(),
            TimeHorizon::new(t).unwrap(),
        )
        .unwrap();
        let p = incoherence(&sig).unwrap();
        assert_eq!(p.rank, 1);
        assert!((p.mu1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ftvgs_rejects_bad_shapes_and_values() {
        let g = VertexGraph::path(3).unwrap();
        let h = TimeHorizon::new(4).unwrap();
        assert!(Ftvgs::new(DMatrix::zeros(2, 4), g.clone(), h).is_err());
        let mut x = DMatrix::zeros(3, 4);
        x[(1, 2)] = f64::NAN;
        assert!(matches!(Ftvgs::new(x, g, h), Err(Error::NonFinite(_))));
    }

    #[test]
    fn lowest_bands_give_a_constant_matrix() {
        let g = VertexGraph::cycle(8).unwrap();
        let ops = GraphOperators::build(&g).unwrap();
        let h = TimeHorizon::new(6).unwrap();
        let spec = SynthSpec {
            rank: 1,
            graph_band: 1,
            time_band: 1,
        };
        let x = synth_ftvgs(&g, &ops, h, spec, 3).unwrap();
        let first = x.data()[(0, 0)];
        assert!(x.data().iter().all(|v| (v - first).abs() < 1e-12));
        assert!((x.data().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generator_is_deterministic_and_checks_bands() {
        let g = VertexGraph::cycle(10).unwrap();
        let ops = GraphOperators::build(&g).unwrap();
        let h = TimeHorizon::new(12).unwrap();
        let spec = SynthSpec {
            rank: 2,
            graph_band: 4,
            time_band: 3,
        };
        let a = synth_ftvgs(&g, &ops, h, spec, 9).unwrap();
        let b = synth_ftvgs(&g, &ops, h, spec, 9).unwrap();
        assert_eq!(a.data(), b.data());
        let bad = SynthSpec {
            rank: 4,
            graph_band: 3,
            time_band: 5,
        };
        assert!(synth_ftvgs(&g, &ops, h, bad, 0).is_err());
    }
}
