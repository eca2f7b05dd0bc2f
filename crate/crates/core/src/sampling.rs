//! Subset random sampling and the sample-complexity bounds.
//!
//! Subset random sampling draws a row subset `I` and a column subset `J`
//! uniformly without replacement, then draws entries of `X(I, J)` uniformly
//! with replacement. No sample ever lands on an unselected row or column.
//! Uniform matrix-completion sampling and cross-concentrated (CCS) sampling
//! are provided only to compare footprints.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::round_half_away;
use crate::rng::seeded;

/// Sampled row/column subsets and entry draws with their observed values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSampleSet")]
pub struct SampleSet {
    seed: u64,
    rows: Vec<usize>,
    cols: Vec<usize>,
    entries: Vec<(usize, usize)>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSampleSet {
    seed: u64,
    rows: Vec<usize>,
    cols: Vec<usize>,
    entries: Vec<(usize, usize)>,
    values: Vec<f64>,
}

impl TryFrom<RawSampleSet> for SampleSet {
    type Error = Error;

    fn try_from(raw: RawSampleSet) -> Result<Self> {
        SampleSet::new(raw.seed, raw.rows, raw.cols, raw.entries, raw.values)
    }
}

fn strictly_increasing(v: &[usize]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl SampleSet {
    /// Checks the structural invariants: sorted distinct subsets, every entry
    /// inside `rows x cols`, one value per entry, finite values.
    pub fn new(
        seed: u64,
        rows: Vec<usize>,
        cols: Vec<usize>,
        entries: Vec<(usize, usize)>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !strictly_increasing(&rows) || !strictly_increasing(&cols) {
            return Err(Error::invalid(
                "row and column subsets must be sorted and distinct",
            ));
        }
        if entries.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} entries but {} values",
                entries.len(),
                values.len()
            )));
        }
        for &(i, j) in &entries {
            if rows.binary_search(&i).is_err() || cols.binary_search(&j).is_err() {
                return Err(Error::IndexOutOfRange(format!(
                    "entry ({i}, {j}) outside the selected rows/columns"
                )));
            }
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("observation {k}")));
        }
        Ok(SampleSet {
            seed,
            rows,
            cols,
            entries,
            values,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of draws `|S|`, duplicates included.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct observed positions, sorted, with their values.
    pub fn distinct(&self) -> Vec<((usize, usize), f64)> {
        let mut seen = std::collections::BTreeMap::new();
        for (&e, &v) in self.entries.iter().zip(&self.values) {
            seen.entry(e).or_insert(v);
        }
        seen.into_iter().collect()
    }

    pub fn distinct_count(&self) -> usize {
        self.entries.iter().collect::<BTreeSet<_>>().len()
    }

    pub fn touched_rows(&self) -> BTreeSet<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn touched_cols(&self) -> BTreeSet<usize> {
        self.entries.iter().map(|e| e.1).collect()
    }

    /// Fails when an index lies outside an `n x t` frame.
    pub fn check_bounds(&self, n: usize, t: usize) -> Result<()> {
        let row_ok = self.rows.last().is_none_or(|&r| r < n);
        let col_ok = self.cols.last().is_none_or(|&c| c < t);
        if !row_ok || !col_ok {
            return Err(Error::IndexOutOfRange(format!(
                "sample set exceeds a {n}x{t} frame"
            )));
        }
        Ok(())
    }
}

/// How many rows, columns and entry draws to take.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingPlan {
    /// `|I| = Round(rho_rc N)`, `|J| = Round(rho_rc T)`,
    /// `|S| = Round(rho_sub |I| |J|)`.
    Ratios { rho_rc: f64, rho_sub: f64 },
    Counts {
        rows: usize,
        cols: usize,
        samples: usize,
    },
}

/// Resolved `(|I|, |J|, |S|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PlanCounts {
    pub rows: usize,
    pub cols: usize,
    pub samples: usize,
}

impl SamplingPlan {
    pub fn ratios(rho_rc: f64, rho_sub: f64) -> Self {
        SamplingPlan::Ratios { rho_rc, rho_sub }
    }

    pub fn resolve(&self, n: usize, t: usize) -> Result<PlanCounts> {
        let counts = match *self {
            SamplingPlan::Ratios { rho_rc, rho_sub } => {
                for (name, r) in [("rho_rc", rho_rc), ("rho_sub", rho_sub)] {
                    if !(r > 0.0 && r <= 1.0) {
                        return Err(Error::invalid(format!(
                            "{name} must lie in (0, 1], got {r}"
                        )));
                    }
                }
                let rows = round_half_away(rho_rc * n as f64).max(0) as usize;
                let cols = round_half_away(rho_rc * t as f64).max(0) as usize;
                let samples = round_half_away(rho_sub * (rows * cols) as f64).max(0) as usize;
                PlanCounts {
                    rows,
                    cols,
                    samples,
                }
            }
            SamplingPlan::Counts {
                rows,
                cols,
                samples,
            } => PlanCounts {
                rows,
                cols,
                samples,
            },
        };
        if counts.rows > n || counts.cols > t {
            return Err(Error::invalid(format!(
                "plan asks for {}x{} but the signal is {n}x{t}",
                counts.rows, counts.cols
            )));
        }
        if counts.samples == 0 {
            return Err(Error::EmptySampleSet);
        }
        if counts.rows == 0 || counts.cols == 0 {
            return Err(Error::invalid("plan selects no rows or no columns"));
        }
        Ok(counts)
    }
}

/// `rho_total = |S| / (N T)` under the ratio arithmetic of the plan.
pub fn total_ratio(plan: &SamplingPlan, n: usize, t: usize) -> Result<f64> {
    let c = plan.resolve(n, t)?;
    Ok(c.samples as f64 / (n * t) as f64)
}

fn sorted_subset<R: Rng>(rng: &mut R, universe: usize, count: usize) -> Vec<usize> {
    if count == universe {
        return (0..universe).collect();
    }
    let mut v = sample_indices(rng, universe, count).into_vec();
    v.sort_unstable();
    v
}

/// Subset random sampling of `x`.
pub fn subset_random_sample(x: &DMatrix<f64>, plan: &SamplingPlan, seed: u64) -> Result<SampleSet> {
    let (n, t) = x.shape();
    let counts = plan.resolve(n, t)?;
    let mut rng = seeded(seed);
    let rows = sorted_subset(&mut rng, n, counts.rows);
    let cols = sorted_subset(&mut rng, t, counts.cols);
    let mut entries = Vec::with_capacity(counts.samples);
    let mut values = Vec::with_capacity(counts.samples);
    for _ in 0..counts.samples {
        let i = rows[rng.random_range(0..rows.len())];
        let j = cols[rng.random_range(0..cols.len())];
        entries.push((i, j));
        values.push(x[(i, j)]);
    }
    SampleSet::new(seed, rows, cols, entries, values)
}

/// Every entry observed exactly once.
pub fn full_sample(x: &DMatrix<f64>, seed: u64) -> Result<SampleSet> {
    let (n, t) = x.shape();
    let entries: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..t).map(move |j| (i, j))).collect();
    let values = entries.iter().map(|&(i, j)| x[(i, j)]).collect();
    SampleSet::new(seed, (0..n).collect(), (0..t).collect(), entries, values)
}

/// Uniform with-replacement draws over the whole matrix; the footprint
/// record lists every row and column.
pub fn mc_uniform_sample(x: &DMatrix<f64>, count: usize, seed: u64) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::EmptySampleSet);
    }
    let (n, t) = x.shape();
    let mut rng = seeded(seed);
    let mut entries = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..t));
        entries.push((i, j));
        values.push(x[(i, j)]);
    }
    SampleSet::new(seed, (0..n).collect(), (0..t).collect(), entries, values)
}

/// CCS draws plus the selected cross.
#[derive(Clone, Debug)]
pub struct CrossSample {
    pub sample: SampleSet,
    pub cross_rows: Vec<usize>,
    pub cross_cols: Vec<usize>,
}

impl CrossSample {
    pub fn in_cross(&self, i: usize, j: usize) -> bool {
        self.cross_rows.binary_search(&i).is_ok() || self.cross_cols.binary_search(&j).is_ok()
    }
}

/// Cross-concentrated footprint: selected full rows `X(I, :)` plus selected
/// full columns `X(:, J)`, with `Round(rho_sub |cross|)` uniform
/// with-replacement draws inside the cross.
pub fn ccs_sample(x: &DMatrix<f64>, plan: &SamplingPlan, seed: u64) -> Result<CrossSample> {
    let (n, t) = x.shape();
    let counts = plan.resolve(n, t)?;
    let mut rng = seeded(seed);
    let cross_rows = sorted_subset(&mut rng, n, counts.rows);
    let cross_cols = sorted_subset(&mut rng, t, counts.cols);
    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..t).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            cross_rows.binary_search(&i).is_ok() || cross_cols.binary_search(&j).is_ok()
        })
        .collect();
    let draws = match plan {
        SamplingPlan::Ratios { rho_sub, .. } => {
            round_half_away(rho_sub * cells.len() as f64).max(1) as usize
        }
        SamplingPlan::Counts { samples, .. } => *samples,
    };
    let mut entries = Vec::with_capacity(draws);
    let mut values = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (i, j) = cells[rng.random_range(0..cells.len())];
        entries.push((i, j));
        values.push(x[(i, j)]);
    }
    let sample = SampleSet::new(seed, (0..n).collect(), (0..t).collect(), entries, values)?;
    Ok(CrossSample {
        sample,
        cross_rows,
        cross_cols,
    })
}

/// `P_S`: observed values at sampled positions, zeros elsewhere.
pub fn project(n: usize, t: usize, s: &SampleSet) -> Result<DMatrix<f64>> {
    s.check_bounds(n, t)?;
    let mut out = DMatrix::zeros(n, t);
    for (&(i, j), &v) in s.entries.iter().zip(&s.values) {
        out[(i, j)] = v;
    }
    Ok(out)
}

/// Boolean mask of sampled positions.
pub fn sample_mask(n: usize, t: usize, s: &SampleSet) -> Result<DMatrix<bool>> {
    s.check_bounds(n, t)?;
    let mut out = DMatrix::from_element(n, t, false);
    for &(i, j) in &s.entries {
        out[(i, j)] = true;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Bounds. All logarithms are natural.

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

fn check_mu(name: &str, mu: f64) -> Result<()> {
    // measured incoherence can land a few ulps below 1
    if mu.is_finite() && mu >= 1.0 - 1e-9 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be >= 1, got {mu}")))
    }
}

fn lemma1_min(r: usize, mu: f64, delta: f64, epsilon: f64) -> Result<usize> {
    if r == 0 {
        return Err(Error::invalid("rank must be >= 1"));
    }
    check_mu("mu", mu)?;
    check_open_unit("delta", delta)?;
    check_open_unit("epsilon", epsilon)?;
    let r = r as f64;
    let raw = 3.0 * r * mu * (2.0 * r / delta).ln() / (epsilon * epsilon);
    Ok(raw.ceil() as usize)
}

/// Minimum `|I|` keeping `rank(X_R) = r` w.p. at least `1 - delta`.
pub fn lemma1_min_rows(r: usize, mu1: f64, delta: f64, epsilon: f64) -> Result<usize> {
    lemma1_min(r, mu1, delta, epsilon)
}

/// Minimum `|J|`, same formula with `mu2`.
pub fn lemma1_min_cols(r: usize, mu2: f64, delta: f64, epsilon: f64) -> Result<usize> {
    lemma1_min(r, mu2, delta, epsilon)
}

/// Evaluated sample-count bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleBound {
    pub raw: f64,
    pub required: u64,
    /// The bound exceeds `rows * cols`, the number of distinct candidates.
    pub vacuous: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Inputs {
    pub r: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub kappa: f64,
    pub n_vertices: usize,
    pub eta: f64,
    pub beta: f64,
    pub rows: usize,
    pub cols: usize,
}

/// `|S| >= 32 beta kappa^4 r^2 N (1-eta)^-3 mu1 mu2 (|I|+|J|)/|I| log^2(2n)`,
/// `n = max(|I|, |J|)`.
pub fn theorem1_min_samples(p: &Theorem1Inputs) -> Result<SampleBound> {
    if p.r == 0 || p.n_vertices == 0 {
        return Err(Error::invalid("rank and vertex count must be >= 1"));
    }
    if !(p.beta > 1.0) {
        return Err(Error::invalid(format!(
            "beta must exceed 1, got {}",
            p.beta
        )));
    }
    if !(0.0..1.0).contains(&p.eta) {
        return Err(Error::invalid(format!(
            "eta must lie in [0, 1), got {}",
            p.eta
        )));
    }
    if p.rows == 0 || p.cols == 0 {
        return Err(Error::invalid("rows and cols must be >= 1"));
    }
    if !(p.kappa >= 1.0 - 1e-9) {
        return Err(Error::invalid(format!(
            "kappa must be >= 1, got {}",
            p.kappa
        )));
    }
    check_mu("mu1", p.mu1)?;
    check_mu("mu2", p.mu2)?;
    let r = p.r as f64;
    let (rows, cols) = (p.rows as f64, p.cols as f64);
    let n = rows.max(cols);
    let raw = 32.0 * p.beta * p.kappa.powi(4) * r * r * p.n_vertices as f64 / (1.0 - p.eta).powi(3)
        * p.mu1
        * p.mu2
        * (rows + cols)
        / rows
        * (2.0 * n).ln().powi(2);
    let required = if raw >= u64::MAX as f64 {
        u64::MAX
    } else {
        raw.ceil() as u64
    };
    Ok(SampleBound {
        raw,
        required,
        vacuous: raw > rows * cols,
    })
}

/// Incoherence-transfer failure probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FailureProbability {
    pub p: f64,
    /// `p >= 1`: the incoherence guarantee says nothing.
    pub vacuous: bool,
}

/// `p = r [e^{-eta} / (1-eta)^{1-eta}]^{ln r}`.
pub fn incoherence_failure_p(r: usize, eta: f64) -> Result<FailureProbability> {
    if r == 0 {
        return Err(Error::invalid("rank must be >= 1"));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::invalid(format!("eta must lie in [0, 1), got {eta}")));
    }
    let r = r as f64;
    let bracket = (-eta).exp() / (1.0 - eta).powf(1.0 - eta);
    let p = r * bracket.powf(r.ln());
    Ok(FailureProbability {
        p,
        vacuous: p >= 1.0,
    })
}

/// `(1-delta)^2 (1-p)^2 - 6 ln n / (|I|+|J|)^{2 beta - 2} - n^{2 - 2 sqrt(beta)}`,
/// evaluated as written (it can be negative, or meaningless for `p > 1`).
pub fn recovery_probability(delta: f64, p: f64, beta: f64, rows: usize, cols: usize) -> f64 {
    let n = rows.max(cols) as f64;
    let sum = (rows + cols) as f64;
    (1.0 - delta).powi(2) * (1.0 - p).powi(2)
        - 6.0 * n.ln() / sum.powf(2.0 * beta - 2.0)
        - n.powf(2.0 - 2.0 * beta.sqrt())
}

/// A probability as evaluated and as reported.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReportedProbability {
    pub raw: f64,
    pub clamped: f64,
    pub vacuous: bool,
}

impl ReportedProbability {
    fn new(raw: f64) -> Self {
        ReportedProbability {
            raw,
            clamped: raw.clamp(0.0, 1.0),
            vacuous: raw <= 0.0 || raw > 1.0,
        }
    }
}

/// Parameters for a full bound report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub r: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub kappa: f64,
    pub n_vertices: usize,
    pub n_steps: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub beta: f64,
    /// Evaluate the sample bound at these sizes; defaults to the Lemma 1
    /// minimums clamped to the matrix dimensions.
    pub rows: Option<usize>,
    pub cols: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub delta: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub beta: f64,
    pub min_rows: usize,
    pub min_cols: usize,
    /// Lemma 1 asks for more rows/columns than the signal has.
    pub rows_vacuous: bool,
    pub cols_vacuous: bool,
    pub rows: usize,
    pub cols: usize,
    pub min_samples: SampleBound,
    pub p: FailureProbability,
    pub rank_prob: ReportedProbability,
    pub incoherence_prob: ReportedProbability,
    pub recovery_prob: ReportedProbability,
}

pub fn bound_report(b: &BoundParams) -> Result<BoundReport> {
    let min_rows = lemma1_min_rows(b.r, b.mu1, b.delta, b.epsilon)?;
    let min_cols = lemma1_min_cols(b.r, b.mu2, b.delta, b.epsilon)?;
    let rows = b.rows.unwrap_or(min_rows.min(b.n_vertices));
    let cols = b.cols.unwrap_or(min_cols.min(b.n_steps));
    let min_samples = theorem1_min_samples(&Theorem1Inputs {
        r: b.r,
        mu1: b.mu1,
        mu2: b.mu2,
        kappa: b.kappa,
        n_vertices: b.n_vertices,
        eta: b.eta,
        beta: b.beta,
        rows,
        cols,
    })?;
    let p = incoherence_failure_p(b.r, b.eta)?;
    // a failure probability above one carries no information; report the
    // floor as zero rather than squaring a negative complement
    let p_eff = p.p.min(1.0);
    let mut incoherence_prob = ReportedProbability::new((1.0 - p_eff).powi(2));
    incoherence_prob.vacuous |= p.vacuous;
    let mut recovery_prob =
        ReportedProbability::new(recovery_probability(b.delta, p_eff, b.beta, rows, cols));
    recovery_prob.vacuous |= p.vacuous;
    Ok(BoundReport {
        delta: b.delta,
        epsilon: b.epsilon,
        eta: b.eta,
        beta: b.beta,
        min_rows,
        min_cols,
        rows_vacuous: min_rows > b.n_vertices,
        cols_vacuous: min_cols > b.n_steps,
        rows,
        cols,
        min_samples,
        p,
        rank_prob: ReportedProbability::new((1.0 - b.delta).powi(2)),
        incoherence_prob,
        recovery_prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize, t: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, t, |i, j| (i * t + j) as f64)
    }

    #[test]
    fn exhaustive_plan_selects_everything() {
        let x = ramp(7, 9);
        let s = subset_random_sample(&x, &SamplingPlan::ratios(1.0, 0.5), 1).unwrap();
        assert_eq!(s.rows(), (0..7).collect::<Vec<_>>().as_slice());
        assert_eq!(s.cols(), (0..9).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn metr_la_counts() {
        let c = SamplingPlan::ratios(0.9, 0.9).resolve(207, 512).unwrap();
        assert_eq!((c.rows, c.cols), (186, 461));
    }

    #[test]
    fn same_seed_same_sample() {
        let x = ramp(20, 30);
        let plan = SamplingPlan::ratios(0.7, 0.4);
        let a = subset_random_sample(&x, &plan, 5).unwrap();
        let b = subset_random_sample(&x, &plan, 5).unwrap();
        assert_eq!(
            serde_json::to_vec(&a).unwrap(),
            serde_json::to_vec(&b).unwrap()
        );
        let c = subset_random_sample(&x, &plan, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn plan_errors() {
        let x = ramp(4, 4);
        let too_many = SamplingPlan::Counts {
            rows: 5,
            cols: 2,
            samples: 3,
        };
        assert!(subset_random_sample(&x, &too_many, 0).is_err());
        let none = SamplingPlan::Counts {
            rows: 2,
            cols: 2,
            samples: 0,
        };
        assert!(matches!(
            subset_random_sample(&x, &none, 0),
            Err(Error::EmptySampleSet)
        ));
        assert!(SamplingPlan::ratios(0.0, 0.5).resolve(4, 4).is_err());
        assert!(SamplingPlan::ratios(0.5, 1.5).resolve(4, 4).is_err());
    }

    #[test]
    fn projection_examples() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let full = full_sample(&x, 0).unwrap();
        assert_eq!(project(2, 2, &full).unwrap(), x);

        let single = SampleSet::new(0, vec![0], vec![0], vec![(0, 0)], vec![5.0]).unwrap();
        assert_eq!(
            project(2, 2, &single).unwrap(),
            DMatrix::from_row_slice(2, 2, &[5.0, 0.0, 0.0, 0.0])
        );
        let dup =
            SampleSet::new(0, vec![0], vec![0], vec![(0, 0), (0, 0)], vec![5.0, 5.0]).unwrap();
        assert_eq!(
            project(2, 2, &dup).unwrap(),
            project(2, 2, &single).unwrap()
        );
        assert_eq!(dup.distinct_count(), 1);

        let far = SampleSet::new(0, vec![3], vec![0], vec![(3, 0)], vec![1.0]).unwrap();
        assert!(project(2, 2, &far).is_err());
    }

    #[test]
    fn sample_set_rejects_entries_outside_subsets() {
        assert!(SampleSet::new(0, vec![0, 2], vec![1], vec![(1, 1)], vec![0.0]).is_err());
        assert!(SampleSet::new(0, vec![2, 0], vec![1], vec![], vec![]).is_err());
        assert!(SampleSet::new(0, vec![0], vec![1], vec![(0, 1)], vec![]).is_err());
    }

    #[test]
    fn json_layout_is_canonical() {
        let s = SampleSet::new(7, vec![0, 1], vec![2], vec![(1, 2)], vec![0.5]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"seed":7,"rows":[0,1],"cols":[2],"entries":[[1,2]],"values":[0.5]}"#
        );
        let back: SampleSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"seed":7,"rows":[0],"cols":[2],"entries":[[1,2]],"values":[0.5]}"#;
        assert!(serde_json::from_str::<SampleSet>(bad).is_err());
    }

    #[test]
    fn ccs_stays_in_cross() {
        let x = ramp(12, 15);
        let cs = ccs_sample(&x, &SamplingPlan::ratios(0.3, 0.5), 3).unwrap();
        assert!(cs.sample.entries().iter().all(|&(i, j)| cs.in_cross(i, j)));
    }

    #[test]
    fn mc_uniform_rejects_zero_count() {
        assert!(mc_uniform_sample(&ramp(2, 2), 0, 0).is_err());
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_min_rows(2, 1.0, 0.1, 0.5).unwrap(), 89);
        assert_eq!(lemma1_min_rows(1, 1.0, 0.5, 0.9).unwrap(), 6);
        assert!(lemma1_min_rows(0, 1.0, 0.1, 0.5).is_err());
        assert!(lemma1_min_rows(2, 0.5, 0.1, 0.5).is_err());
        assert!(lemma1_min_rows(2, 1.0, 1.0, 0.5).is_err());
        assert!(lemma1_min_cols(2, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn theorem1_example() {
        // 32 * 1.5 * 100 * (130 / 50) * ln^2(160) = 321452.2179...
        let b = theorem1_min_samples(&Theorem1Inputs {
            r: 1,
            mu1: 1.0,
            mu2: 1.0,
            kappa: 1.0,
            n_vertices: 100,
            eta: 0.0,
            beta: 1.5,
            rows: 50,
            cols: 80,
        })
        .unwrap();
        assert_eq!(b.required, 321_453);
        assert!((b.raw - 321_452.217_900_341_8).abs() < 1e-6);
        assert!(b.vacuous);
    }

    #[test]
    fn kappa_enters_to_the_fourth() {
        let mut p = Theorem1Inputs {
            r: 2,
            mu1: 1.3,
            mu2: 1.1,
            kappa: 1.7,
            n_vertices: 50,
            eta: 0.2,
            beta: 2.0,
            rows: 20,
            cols: 30,
        };
        let a = theorem1_min_samples(&p).unwrap().raw;
        p.kappa *= 2.0;
        let b = theorem1_min_samples(&p).unwrap().raw;
        assert!((b / a - 16.0).abs() < 1e-12);
    }

    #[test]
    fn theorem1_parameter_errors() {
        let ok = Theorem1Inputs {
            r: 1,
            mu1: 1.0,
            mu2: 1.0,
            kappa: 1.0,
            n_vertices: 10,
            eta: 0.0,
            beta: 1.5,
            rows: 5,
            cols: 5,
        };
        assert!(theorem1_min_samples(&Theorem1Inputs { beta: 1.0, ..ok }).is_err());
        assert!(theorem1_min_samples(&Theorem1Inputs { eta: 1.0, ..ok }).is_err());
        assert!(theorem1_min_samples(&Theorem1Inputs { rows: 0, ..ok }).is_err());
    }

    #[test]
    fn failure_probability_examples() {
        let p = incoherence_failure_p(5, 0.0).unwrap();
        assert!((p.p - 5.0).abs() < 1e-12 && p.vacuous);
        for eta in [0.0, 0.3, 0.9] {
            let p = incoherence_failure_p(1, eta).unwrap();
            assert_eq!(p.p, 1.0);
            assert!(p.vacuous);
        }
        // 16 * (e^-0.5 / 0.5^0.5)^ln 16 = 10.45625526...
        let p = incoherence_failure_p(16, 0.5).unwrap();
        assert!((p.p - 10.456_255_261_620_792).abs() < 1e-9);
        assert!(p.vacuous);
    }

    #[test]
    fn recovery_probability_examples() {
        // 0.81 * 0.9025 - 6 ln 1000 / 2000^2 - 1000^(2 - 2 sqrt 2) = 0.72774335...
        let v = recovery_probability(0.1, 0.05, 2.0, 1000, 1000);
        assert!((v - 0.727_743_351_532_918_3).abs() < 1e-12);
        assert!(recovery_probability(1.0, 0.0, 3.0, 100, 100) <= 0.0);
        let big = recovery_probability(0.0, 0.0, 400.0, 1000, 1000);
        assert!((big - 1.0).abs() < 1e-6);
    }

    #[test]
    fn report_flags_vacuous_floors() {
        let r = bound_report(&BoundParams {
            r: 16,
            mu1: 2.0,
            mu2: 2.0,
            kappa: 3.0,
            n_vertices: 200,
            n_steps: 300,
            delta: 0.1,
            epsilon: 0.5,
            eta: 0.5,
            beta: 2.0,
            rows: None,
            cols: None,
        })
        .unwrap();
        assert!(r.rows_vacuous && r.cols_vacuous);
        assert_eq!((r.rows, r.cols), (200, 300));
        assert!(r.p.vacuous && r.incoherence_prob.vacuous && r.recovery_prob.vacuous);
        assert_eq!(r.incoherence_prob.clamped, 0.0);
        assert!((r.rank_prob.raw - 0.81).abs() < 1e-15);
    }
}
