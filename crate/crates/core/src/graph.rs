//! Vertex graph and time-axis operators.
//!
//! The vertex graph is undirected and weighted. Every edge gets a fixed
//! orientation from the lower to the higher vertex index, and its incidence
//! column carries `+sqrt(w)` at the tail and `-sqrt(w)` at the head so that
//! `Q Q^T` is the weighted Laplacian. The time axis uses non-circular forward
//! differences `D_1` (`T x (T-1)`) and `D_2` (`T x (T-2)`).

use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{first_significant_is_negative, symmetric_eigen};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    /// Tail (lower index).
    pub u: usize,
    /// Head (higher index).
    pub v: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexGraph {
    num_vertices: usize,
    edges: Vec<Edge>,
}

impl VertexGraph {
    /// Validates and normalizes an edge list. Endpoints are reordered so the
    /// lower index is the tail; edges are kept sorted by `(u, v)`.
    pub fn new(
        num_vertices: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::invalid("graph must have at least one vertex"));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            if a >= num_vertices || b >= num_vertices {
                return Err(Error::IndexOutOfRange(format!(
                    "edge ({a}, {b}) outside [0, {num_vertices})"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) has non-positive weight {w}"
                )));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(Error::invalid(format!("duplicate edge ({u}, {v})")));
            }
            out.push(Edge { u, v, weight: w });
        }
        out.sort_by_key(|e| (e.u, e.v));
        Ok(VertexGraph {
            num_vertices,
            edges: out,
        })
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i, 1.0)))
    }

    /// Cycle graph; for `n < 3` this degenerates to the path.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Self::path(n);
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
    }

    /// Symmetrized k-nearest-neighbour graph on planar points with Gaussian
    /// weights `exp(-d^2 / sigma^2)`, `sigma` the mean k-NN distance.
    pub fn knn_gaussian(points: &[(f64, f64)], k: usize, metric: Metric) -> Result<Self> {
        let n = points.len();
        let dist = |a: usize, b: usize| metric.distance(points[a], points[b]);
        let neighbours = knn_lists(n, k, dist);
        let mut total = 0.0;
        let mut count = 0usize;
        for (a, list) in neighbours.iter().enumerate() {
            for &b in list {
                total += dist(a, b);
                count += 1;
            }
        }
        let sigma = if count > 0 { total / count as f64 } else { 1.0 };
        let sigma = if sigma > 0.0 { sigma } else { 1.0 };
        let mut pairs = std::collections::BTreeMap::new();
        for (a, list) in neighbours.iter().enumerate() {
            for &b in list {
                let key = (a.min(b), a.max(b));
                let d = dist(a, b);
                // coincident points would give weight 1; floor keeps weights > 0
                let w = (-(d * d) / (sigma * sigma)).exp().max(f64::MIN_POSITIVE);
                pairs.insert(key, w);
            }
        }
        Self::new(n, pairs.into_iter().map(|((u, v), w)| (u, v, w)))
    }

    /// Symmetrized k-NN graph ranking neighbours by a similarity (higher is
    /// closer); the edge weight is the similarity itself. Pairs with
    /// non-positive similarity are skipped.
    pub fn knn_similarity(n: usize, k: usize, sim: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let neighbours = knn_lists(n, k, |a, b| -sim(a, b));
        let mut pairs = std::collections::BTreeMap::new();
        for (a, list) in neighbours.iter().enumerate() {
            for &b in list {
                let w = sim(a, b);
                if w > 0.0 && w.is_finite() {
                    pairs.insert((a.min(b), a.max(b)), w);
                }
            }
        }
        Self::new(n, pairs.into_iter().map(|((u, v), w)| (u, v, w)))
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weighted incidence matrix `Q` (`N x M`).
    pub fn incidence(&self) -> DMatrix<f64> {
        let mut q = DMatrix::zeros(self.num_vertices, self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            let s = e.weight.sqrt();
            q[(e.u, k)] = s;
            q[(e.v, k)] = -s;
        }
        q
    }

    /// Weighted Laplacian assembled from the edge list.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.num_vertices, self.num_vertices);
        for e in &self.edges {
            l[(e.u, e.u)] += e.weight;
            l[(e.v, e.v)] += e.weight;
            l[(e.u, e.v)] -= e.weight;
            l[(e.v, e.u)] -= e.weight;
        }
        l
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// Great-circle distance in kilometres; points are `(lat, lon)` degrees.
    Haversine,
}

impl Metric {
    pub fn distance(self, a: (f64, f64), b: (f64, f64)) -> f64 {
        match self {
            Metric::Euclidean => ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt(),
            Metric::Haversine => {
                const R: f64 = 6371.0;
                let (la1, lo1) = (a.0.to_radians(), a.1.to_radians());
                let (la2, lo2) = (b.0.to_radians(), b.1.to_radians());
                let h = ((la2 - la1) / 2.0).sin().powi(2)
                    + la1.cos() * la2.cos() * ((lo2 - lo1) / 2.0).sin().powi(2);
                2.0 * R * h.sqrt().min(1.0).asin()
            }
        }
    }
}

fn knn_lists(n: usize, k: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|a| {
            let mut others: Vec<(f64, usize)> = (0..n)
                .filter(|&b| b != a)
                .map(|b| (cost(a, b), b))
                .collect();
            others.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            others.into_iter().take(k).map(|(_, b)| b).collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeHorizon {
    num_steps: usize,
}

impl TimeHorizon {
    pub fn new(num_steps: usize) -> Result<Self> {
        if num_steps < 3 {
            return Err(Error::invalid(format!(
                "time horizon needs T >= 3 for the second difference, got {num_steps}"
            )));
        }
        Ok(TimeHorizon { num_steps })
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }
}

/// Incidence, Laplacian and GFT basis of a vertex graph.
#[derive(Clone, Debug)]
pub struct GraphOperators {
    pub incidence: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    /// Laplacian eigenvectors as columns, eigenvalues ascending.
    pub gft_basis: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
    pub edges: Vec<Edge>,
}

impl GraphOperators {
    pub fn build(graph: &VertexGraph) -> Result<Self> {
        let incidence = graph.incidence();
        let laplacian = &incidence * incidence.transpose();
        let (eigenvalues, gft_basis) = sorted_eigen(&laplacian);
        Ok(GraphOperators {
            incidence,
            laplacian,
            gft_basis,
            eigenvalues,
            edges: graph.edges().to_vec(),
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.laplacian.nrows()
    }
}

fn sorted_eigen(l: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = l.nrows();
    let (eigenvalues, eigenvectors) = symmetric_eigen(l);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eigenvectors.column(src).into_owned();
        if first_significant_is_negative(col.iter().copied()) {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Temporal difference operators and the unitary DFT basis.
#[derive(Clone, Debug)]
pub struct TimeOperators {
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    pub dft_basis: DMatrix<Complex<f64>>,
}

impl TimeOperators {
    pub fn build(horizon: TimeHorizon) -> Self {
        let t = horizon.num_steps();
        TimeOperators {
            d1: first_difference(t),
            d2: second_difference(t),
            dft_basis: dft_basis(t),
        }
    }

    pub fn num_steps(&self) -> usize {
        self.dft_basis.nrows()
    }
}

/// `T x (T-1)`: column `j` is `-1` at row `j`, `+1` at row `j+1`.
pub fn first_difference(t: usize) -> DMatrix<f64> {
    let cols = t.saturating_sub(1);
    let mut d = DMatrix::zeros(t, cols);
    for j in 0..cols {
        d[(j, j)] = -1.0;
        d[(j + 1, j)] = 1.0;
    }
    d
}

/// `T x (T-2)`: column `j` is `[1, -2, 1]` at rows `j..j+3`.
pub fn second_difference(t: usize) -> DMatrix<f64> {
    let cols = t.saturating_sub(2);
    let mut d = DMatrix::zeros(t, cols);
    for j in 0..cols {
        d[(j, j)] = 1.0;
        d[(j + 1, j)] = -2.0;
        d[(j + 2, j)] = 1.0;
    }
    d
}

/// Unitary DFT matrix, entry `(t, k) = exp(-2 pi i t k / T) / sqrt(T)`.
pub fn dft_basis(t: usize) -> DMatrix<Complex<f64>> {
    let scale = 1.0 / (t as f64).sqrt();
    DMatrix::from_fn(t, t, |r, k| {
        // reduce t*k mod T first so large T keeps full phase accuracy
        let phase = -2.0 * PI * (((r * k) % t) as f64) / t as f64;
        Complex::new(phase.cos() * scale, phase.sin() * scale)
    })
}

fn check_dims(x: &DMatrix<f64>, ops: &GraphOperators, tops: &TimeOperators) -> Result<()> {
    if x.nrows() != ops.num_vertices() || x.ncols() != tops.num_steps() {
        return Err(Error::dims(
            format!("{}x{}", ops.num_vertices(), tops.num_steps()),
            format!("{}x{}", x.nrows(), x.ncols()),
        ));
    }
    Ok(())
}

/// `X(:, j)^T L X(:, j)`.
pub fn graph_total_variation(x: &DMatrix<f64>, ops: &GraphOperators, j: usize) -> Result<f64> {
    if x.nrows() != ops.num_vertices() {
        return Err(Error::dims(
            format!("{} rows", ops.num_vertices()),
            format!("{} rows", x.nrows()),
        ));
    }
    if j >= x.ncols() {
        return Err(Error::IndexOutOfRange(format!(
            "column {j} of {}",
            x.ncols()
        )));
    }
    let col = x.column(j);
    let v = col.dot(&(&ops.laplacian * col));
    Ok(v.max(0.0))
}

/// Per-entry pieces of the joint gradient: the squared norm of the graph
/// differences on edges incident to each vertex, and the forward temporal
/// difference (zero in the last column).
pub(crate) struct GradientParts {
    pub graph_sq: DMatrix<f64>,
    pub temporal: DMatrix<f64>,
}

pub(crate) fn gradient_parts(x: &DMatrix<f64>, edges: &[Edge]) -> GradientParts {
    let (n, t) = x.shape();
    let mut graph_sq = DMatrix::zeros(n, t);
    for e in edges {
        let sw = e.weight.sqrt();
        for j in 0..t {
            let d = sw * (x[(e.u, j)] - x[(e.v, j)]);
            let d2 = d * d;
            graph_sq[(e.u, j)] += d2;
            graph_sq[(e.v, j)] += d2;
        }
    }
    let mut temporal = DMatrix::zeros(n, t);
    for j in 0..t.saturating_sub(1) {
        for i in 0..n {
            temporal[(i, j)] = x[(i, j + 1)] - x[(i, j)];
        }
    }
    GradientParts { graph_sq, temporal }
}

/// `||grad X(i, j)||`: graph differences on the edges incident to vertex `i`
/// stacked with the forward temporal difference (absent for `j = T-1`).
pub fn joint_gradient_norm(
    x: &DMatrix<f64>,
    ops: &GraphOperators,
    tops: &TimeOperators,
    i: usize,
    j: usize,
) -> Result<f64> {
    smoothed_gradient_norm(x, ops, tops, i, j, 0.0)
}

/// `||grad X(i, j)||_a = sqrt(||grad X(i, j)||^2 + a^2)`.
pub fn smoothed_gradient_norm(
    x: &DMatrix<f64>,
    ops: &GraphOperators,
    tops: &TimeOperators,
    i: usize,
    j: usize,
    a: f64,
) -> Result<f64> {
    check_dims(x, ops, tops)?;
    if i >= x.nrows() || j >= x.ncols() {
        return Err(Error::IndexOutOfRange(format!(
            "({i}, {j}) in {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let mut sq = a * a;
    for e in ops.edges.iter().filter(|e| e.u == i || e.v == i) {
        let d = e.weight.sqrt() * (x[(e.u, j)] - x[(e.v, j)]);
        sq += d * d;
    }
    if j + 1 < x.ncols() {
        let d = x[(i, j + 1)] - x[(i, j)];
        sq += d * d;
    }
    Ok(sq.sqrt())
}

/// Smallest `C` bounding graph total variation, joint gradient norm and
/// second temporal difference at every position.
pub fn smoothness_constant(
    x: &DMatrix<f64>,
    ops: &GraphOperators,
    tops: &TimeOperators,
) -> Result<f64> {
    check_dims(x, ops, tops)?;
    Ok(smoothness_from_edges(x, &ops.edges))
}

pub(crate) fn smoothness_from_edges(x: &DMatrix<f64>, edges: &[Edge]) -> f64 {
    let (n, t) = x.shape();
    let parts = gradient_parts(x, edges);
    let mut c = 0.0_f64;
    // column-wise x^T L x = sum over edges of w (x_u - x_v)^2 = half the vertex sum
    for j in 0..t {
        let tv: f64 = parts.graph_sq.column(j).sum() / 2.0;
        c = c.max(tv.abs());
    }
    for j in 0..t {
        for i in 0..n {
            let g = (parts.graph_sq[(i, j)] + parts.temporal[(i, j)].powi(2)).sqrt();
            c = c.max(g);
        }
    }
    for j in 0..t.saturating_sub(2) {
        for i in 0..n {
            let d2 = x[(i, j)] - 2.0 * x[(i, j + 1)] + x[(i, j + 2)];
            c = c.max(d2.abs());
        }
    }
    c
}
