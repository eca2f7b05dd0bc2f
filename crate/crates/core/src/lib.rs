//! Subset random sampling of finite time-vertex graph signals (FTVGS).
//!
//! An FTVGS is an `N x T` real matrix whose rows are the time series observed
//! at the vertices of a graph and whose columns are static graph signals. This
//! crate provides:
//!
//! * [`graph`]: incidence matrix, Laplacian, temporal difference operators,
//!   GFT/DFT bases and the smoothness functionals of the signal model;
//! * [`signal`]: the signal container, thin SVD, incoherence diagnostics and a
//!   band-limited synthetic generator;
//! * [`sampling`]: subset random sampling (rows, then columns, then entries
//!   inside the selected submatrix), comparison footprints, and the
//!   sample-complexity bound calculators;
//! * [`reconstruction`]: the joint low-rank / spectral-sparsity solver, the
//!   two-stage completion + TV-inpainting pipeline and the SVT/TNNR baselines;
//! * [`evaluation`]: NRMSE, Monte Carlo checks of the bounds, dataset windowing
//!   and the ratio-grid experiment runner.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluation;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod reconstruction;
pub mod rng;
pub mod sampling;
pub mod signal;

pub use error::{Error, Result};
pub use graph::{GraphOperators, TimeHorizon, TimeOperators, VertexGraph};
pub use sampling::{SampleSet, SamplingPlan};
pub use signal::{Ftvgs, IncoherenceProfile, SvdFactors};
