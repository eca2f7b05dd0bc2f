//! Graph and time spectra of a signal.

use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::graph::GraphOperators;

/// `F_G = Psi_G^T X`.
pub fn graph_spectrum(x: &DMatrix<f64>, ops: &GraphOperators) -> DMatrix<f64> {
    ops.gft_basis.tr_mul(x)
}

/// `Psi_G F`.
pub fn inverse_graph_spectrum(f: &DMatrix<f64>, ops: &GraphOperators) -> DMatrix<f64> {
    &ops.gft_basis * f
}

/// `F_T = Psi_T^H X^T` (`T x N`).
pub fn time_spectrum(x: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    let rows = RowDft::new(x.ncols()).forward(x);
    // real input: the conjugate-phase transform is the conjugate of the FFT
    rows.map(|c| c.conj()).transpose()
}

/// Unitary row-wise DFT: `F(i, k) = sum_t X(i, t) e^{-2 pi i t k / T} / sqrt(T)`.
///
/// For real rows its moduli coincide with those of [`time_spectrum`].
pub struct RowDft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl RowDft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        RowDft {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn forward(&self, x: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
        assert_eq!(x.ncols(), self.len, "row length");
        let scale = 1.0 / (self.len as f64).sqrt();
        let mut out = DMatrix::zeros(x.nrows(), self.len);
        let mut buf = vec![Complex::new(0.0, 0.0); self.len];
        for i in 0..x.nrows() {
            for (t, b) in buf.iter_mut().enumerate() {
                *b = Complex::new(x[(i, t)], 0.0);
            }
            self.forward.process(&mut buf);
            for (k, b) in buf.iter().enumerate() {
                out[(i, k)] = b * scale;
            }
        }
        out
    }

    /// Real part of the inverse transform.
    pub fn inverse_real(&self, f: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
        assert_eq!(f.ncols(), self.len, "row length");
        let scale = 1.0 / (self.len as f64).sqrt();
        let mut out = DMatrix::zeros(f.nrows(), self.len);
        let mut buf = vec![Complex::new(0.0, 0.0); self.len];
        for i in 0..f.nrows() {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = f[(i, k)];
            }
            self.inverse.process(&mut buf);
            for (t, b) in buf.iter().enumerate() {
                out[(i, t)] = b.re * scale;
            }
        }
        out
    }
}

/// Real soft threshold `sign(v) max(|v| - th, 0)`.
pub(crate) fn soft(v: f64, th: f64) -> f64 {
    let m = v.abs() - th;
    if m > 0.0 {
        m.copysign(v)
    } else {
        0.0
    }
}

/// Complex soft threshold on the modulus, phase kept.
pub(crate) fn soft_complex(z: Complex<f64>, th: f64) -> Complex<f64> {
    let m = z.norm();
    if m > th {
        z * ((m - th) / m)
    } else {
        Complex::new(0.0, 0.0)
    }
}
