//! Monte Carlo checks of the rank-preservation and incoherence-transfer
//! lemmas behind subset random sampling.

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binomial_allowance, SynthGenerator};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, round_half_away, select_rows, submatrix, two_inf_norm};
use crate::rng::{derive_seed, seeded};
use crate::sampling::{
    incoherence_failure_p, lemma1_min_cols, lemma1_min_rows, FailureProbability,
};
use crate::signal::{incoherence_of, thin_svd, DEFAULT_RANK_TOL};

/// How many rows and columns each trial selects.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetSizing {
    /// Lemma 1 minimum from the measured incoherence, capped at the
    /// dimensions.
    Lemma1 {
        delta: f64,
        epsilon: f64,
    },
    Counts {
        rows: usize,
        cols: usize,
    },
    Ratio {
        rho_rc: f64,
    },
    Full,
}

/// Alias used by the Lemma 2 runner.
pub type Lemma2Sizing = SubsetSizing;

impl SubsetSizing {
    /// `(rows, cols, capped)`.
    fn resolve(
        &self,
        n: usize,
        t: usize,
        rank: usize,
        mu1: f64,
        mu2: f64,
    ) -> Result<(usize, usize, bool)> {
        let (rows, cols, capped) = match *self {
            SubsetSizing::Lemma1 { delta, epsilon } => {
                let r = lemma1_min_rows(rank, mu1, delta, epsilon)?;
                let c = lemma1_min_cols(rank, mu2, delta, epsilon)?;
                (r.min(n), c.min(t), r > n || c > t)
            }
            SubsetSizing::Counts { rows, cols } => (rows, cols, false),
            SubsetSizing::Ratio { rho_rc } => {
                if !(rho_rc > 0.0 && rho_rc <= 1.0) {
                    return Err(Error::invalid(format!(
                        "rho_rc must lie in (0, 1], got {rho_rc}"
                    )));
                }
                let r = round_half_away(rho_rc * n as f64) as usize;
                let c = round_half_away(rho_rc * t as f64) as usize;
                (r, c, false)
            }
            SubsetSizing::Full => (n, t, false),
        };
        if rows == 0 || cols == 0 || rows > n || cols > t {
            return Err(Error::invalid(format!(
                "cannot select {rows}x{cols} from {n}x{t}"
            )));
        }
        Ok((rows, cols, capped))
    }
}

fn subsets(n: usize, t: usize, rows: usize, cols: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seeded(seed);
    let mut i = sample_indices(&mut rng, n, rows).into_vec();
    let mut j = sample_indices(&mut rng, t, cols).into_vec();
    i.sort_unstable();
    j.sort_unstable();
    (i, j)
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Trial {
    pub trial: usize,
    pub seed: u64,
    pub rank: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub rows: usize,
    pub cols: usize,
    pub rank_rows: usize,
    pub rank_cross: usize,
    /// The Lemma 1 minimum exceeded a dimension and was capped.
    pub capped: bool,
    /// The drawn signal did not have the generator's rank.
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Report {
    pub trials: usize,
    pub rank: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub sizing: SubsetSizing,
    /// Fraction of non-degenerate trials with `rank(X_R) = r`.
    pub rows_success: f64,
    /// Fraction with `rank(X_RC) = r`.
    pub cross_success: f64,
    pub floor_rows: f64,
    pub floor_cross: f64,
    pub allowance_rows: f64,
    pub allowance_cross: f64,
    pub rows_pass: bool,
    pub cross_pass: bool,
    pub capped_trials: usize,
    pub degenerate_trials: usize,
    pub max_mu1: f64,
    pub max_mu2: f64,
    pub outcomes: Vec<Lemma1Trial>,
}

/// Draws `trials` signals, selects rows and columns (by default at the
/// Lemma 1 minimum for the measured incoherence) and checks the rank of the
/// row submatrix and of the cross submatrix.
pub fn verify_lemma1(
    generator: &SynthGenerator,
    delta: f64,
    epsilon: f64,
    trials: usize,
    base_seed: u64,
    sizing: Option<SubsetSizing>,
) -> Result<Lemma1Report> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let sizing = sizing.unwrap_or(SubsetSizing::Lemma1 { delta, epsilon });
    let target = generator.spec.rank;
    let (n, t) = (generator.spec.n_vertices, generator.spec.n_steps);
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(base_seed, 0, k as u64);
            let x = generator.draw(seed)?;
            let f = thin_svd(x.data(), DEFAULT_RANK_TOL)?;
            let (mu1, mu2) = incoherence_of(&f);
            let (rows, cols, capped) = sizing.resolve(n, t, f.rank, mu1, mu2)?;
            let (i, j) = subsets(n, t, rows, cols, derive_seed(base_seed, 1, k as u64));
            let rank_rows = numerical_rank(&select_rows(x.data(), &i), DEFAULT_RANK_TOL);
            let rank_cross = numerical_rank(&submatrix(x.data(), &i, &j), DEFAULT_RANK_TOL);
            Ok(Lemma1Trial {
                trial: k,
                seed,
                rank: f.rank,
                mu1,
                mu2,
                rows,
                cols,
                rank_rows,
                rank_cross,
                capped,
                degenerate: f.rank != target,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let valid: Vec<&Lemma1Trial> = outcomes.iter().filter(|o| !o.degenerate).collect();
    if valid.is_empty() {
        return Err(Error::invalid(format!(
            "generator never produced rank-{target} signals"
        )));
    }
    let m = valid.len() as f64;
    let rows_success = valid.iter().filter(|o| o.rank_rows == o.rank).count() as f64 / m;
    let cross_success = valid.iter().filter(|o| o.rank_cross == o.rank).count() as f64 / m;
    let floor_rows = 1.0 - delta;
    let floor_cross = floor_rows * floor_rows;
    let allowance_rows = binomial_allowance(floor_rows, valid.len());
    let allowance_cross = binomial_allowance(floor_cross, valid.len());
    Ok(Lemma1Report {
        trials,
        rank: target,
        delta,
        epsilon,
        sizing,
        rows_success,
        cross_success,
        floor_rows,
        floor_cross,
        allowance_rows,
        allowance_cross,
        rows_pass: rows_success >= floor_rows - allowance_rows,
        cross_pass: cross_success >= floor_cross - allowance_cross,
        capped_trials: outcomes.iter().filter(|o| o.capped).count(),
        degenerate_trials: outcomes.len() - valid.len(),
        max_mu1: outcomes.iter().map(|o| o.mu1).fold(0.0, f64::max),
        max_mu2: outcomes.iter().map(|o| o.mu2).fold(0.0, f64::max),
        outcomes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma2Trial {
    pub trial: usize,
    pub seed: u64,
    pub rank: usize,
    pub kappa: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub rows: usize,
    pub cols: usize,
    /// `X_RC` lost rank; the inequalities were not evaluated.
    pub rank_deficient: bool,
    pub u_norm: Option<f64>,
    pub u_bound: f64,
    pub v_norm: Option<f64>,
    pub v_bound: f64,
    pub u_holds: bool,
    pub v_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma2Report {
    pub trials: usize,
    pub eta: f64,
    pub sizing: SubsetSizing,
    pub p: FailureProbability,
    /// `(1 - p)^2` with `p` capped at 1.
    pub floor: f64,
    pub floor_vacuous: bool,
    pub checked: usize,
    pub rank_deficient: usize,
    /// Fractions over the checked (full-rank) trials.
    pub u_fraction: f64,
    pub v_fraction: f64,
    pub both_fraction: f64,
    pub outcomes: Vec<Lemma2Trial>,
}

/// Checks `||U_RC||_{2,inf} <= kappa sqrt(mu1 r / ((1 - eta) |I|))` and the
/// matching column inequality on every trial.
pub fn verify_lemma2(
    generator: &SynthGenerator,
    eta: f64,
    trials: usize,
    base_seed: u64,
    sizing: SubsetSizing,
) -> Result<Lemma2Report> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::invalid(format!("eta must lie in [0, 1), got {eta}")));
    }
    let (n, t) = (generator.spec.n_vertices, generator.spec.n_steps);
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(base_seed, 0, k as u64);
            let x = generator.draw(seed)?;
            let f = thin_svd(x.data(), DEFAULT_RANK_TOL)?;
            let (mu1, mu2) = incoherence_of(&f);
            let kappa = f.condition_number();
            let r = f.rank;
            let (rows, cols, _) = sizing.resolve(n, t, r, mu1, mu2)?;
            let (i, j) = subsets(n, t, rows, cols, derive_seed(base_seed, 1, k as u64));
            let rc = thin_svd(&submatrix(x.data(), &i, &j), DEFAULT_RANK_TOL);
            let u_bound = kappa * (mu1 * r as f64 / ((1.0 - eta) * rows as f64)).sqrt();
            let v_bound = kappa * (mu2 * r as f64 / ((1.0 - eta) * cols as f64)).sqrt();
            let (u_norm, v_norm) = match rc {
                Ok(g) if g.rank == r => (Some(two_inf_norm(&g.u)), Some(two_inf_norm(&g.v))),
                Ok(_) | Err(Error::ZeroRank) => (None, None),
                Err(e) => return Err(e),
            };
            // relative slack for rounding in the SVD
            let holds = |v: Option<f64>, b: f64| v.is_some_and(|v| v <= b * (1.0 + 1e-12));
            Ok(Lemma2Trial {
                trial: k,
                seed,
                rank: r,
                kappa,
                mu1,
                mu2,
                rows,
                cols,
                rank_deficient: u_norm.is_none(),
                u_norm,
                u_bound,
                v_norm,
                v_bound,
                u_holds: holds(u_norm, u_bound),
                v_holds: holds(v_norm, v_bound),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let p = incoherence_failure_p(generator.spec.rank, eta)?;
    let floor = (1.0 - p.p.min(1.0)).powi(2);
    let checked = outcomes.iter().filter(|o| !o.rank_deficient).count();
    let frac = |pred: &dyn Fn(&Lemma2Trial) -> bool| {
        if checked == 0 {
            0.0
        } else {
            outcomes
                .iter()
                .filter(|o| !o.rank_deficient && pred(o))
                .count() as f64
                / checked as f64
        }
    };
    Ok(Lemma2Report {
        trials,
        eta,
        sizing,
        p,
        floor,
        floor_vacuous: p.vacuous,
        checked,
        rank_deficient: outcomes.len() - checked,
        u_fraction: frac(&|o| o.u_holds),
        v_fraction: frac(&|o| o.v_holds),
        both_fraction: frac(&|o| o.u_holds && o.v_holds),
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::GeneratorSpec;

    fn generator() -> SynthGenerator {
        SynthGenerator::new(GeneratorSpec::smooth(40, 50, 3)).unwrap()
    }

    #[test]
    fn full_selection_always_succeeds() {
        let r = verify_lemma1(&generator(), 0.1, 0.5, 20, 1, Some(SubsetSizing::Full)).unwrap();
        assert_eq!(r.rows_success, 1.0);
        assert_eq!(r.cross_success, 1.0);
    }

    #[test]
    fn too_few_rows_always_fail() {
        let sizing = SubsetSizing::Counts { rows: 2, cols: 50 };
        let r = verify_lemma1(&generator(), 0.1, 0.5, 20, 1, Some(sizing)).unwrap();
        assert_eq!(r.rows_success, 0.0);
        assert_eq!(r.cross_success, 0.0);
    }

    #[test]
    fn reports_are_schedule_independent() {
        let g = generator();
        let a = verify_lemma2(&g, 0.5, 16, 7, SubsetSizing::Ratio { rho_rc: 0.5 }).unwrap();
        let b = verify_lemma2(&g, 0.5, 16, 7, SubsetSizing::Ratio { rho_rc: 0.5 }).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.outcomes.len(), 16);
    }

    #[test]
    fn full_selection_satisfies_both_inequalities() {
        let r = verify_lemma2(&generator(), 0.5, 10, 3, SubsetSizing::Full).unwrap();
        assert_eq!(r.checked, 10);
        assert_eq!(r.both_fraction, 1.0);
    }

    #[test]
    fn eta_zero_floor_is_vacuous() {
        let r = verify_lemma2(&generator(), 0.0, 4, 3, SubsetSizing::Full).unwrap();
        assert!(r.floor_vacuous);
        assert_eq!(r.p.p, 3.0);
        assert_eq!(r.floor, 0.0);
    }
}
