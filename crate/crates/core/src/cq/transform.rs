use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::TimeGrid;
use crate::error::{Error, Result};

/// Scaled discrete Fourier transform pair on the contour `|zeta| = lambda`.
///
/// `forward`: `x_k <- sum_n lambda^n x_n zeta^{-kn}`.
/// `inverse`: `x_l <- lambda^{-l} / (N+1) sum_k x_k zeta^{lk}`.
#[derive(Clone)]
pub struct ContourTransform {
    len: usize,
    powers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for ContourTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContourTransform")
            .field("len", &self.len)
            .finish()
    }
}

impl ContourTransform {
    pub fn new(grid: &TimeGrid) -> Self {
        let len = grid.len();
        let mut planner = FftPlanner::new();
        let powers = (0..len).map(|n| grid.lambda().powi(n as i32)).collect();
        Self {
            len,
            powers,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.len {
            return Err(Error::DimensionMismatch(format!(
                "sequence of length {n} on a grid with {} samples",
                self.len
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &mut [Complex64]) -> Result<()> {
        self.check(x.len())?;
        for (v, p) in x.iter_mut().zip(&self.powers) {
            *v *= *p;
        }
        self.forward.process(x);
        Ok(())
    }

    pub fn inverse(&self, x: &mut [Complex64]) -> Result<()> {
        self.check(x.len())?;
        self.inverse.process(x);
        let scale = 1.0 / self.len as f64;
        for (v, p) in x.iter_mut().zip(&self.powers) {
            *v *= scale / *p;
        }
        Ok(())
    }

    /// Forward transform of a real sequence, with the output made exactly
    /// conjugate symmetric (`X_{N+1-k} = conj(X_k)`).
    pub fn forward_real(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf)?;
        symmetrize(&mut buf);
        Ok(buf)
    }

    /// Transforms a vector-valued real series `series[n][i]` into spectra
    /// `out[k][i]`.
    pub fn forward_real_series(&self, series: &[Vec<f64>]) -> Result<Vec<Vec<Complex64>>> {
        self.check(series.len())?;
        let dim = series.first().map_or(0, Vec::len);
        if series.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch("ragged series".into()));
        }
        let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; self.len];
        let mut column = vec![0.0; self.len];
        for i in 0..dim {
            for (n, v) in series.iter().enumerate() {
                column[n] = v[i];
            }
            let spec = self.forward_real(&column)?;
            for (k, value) in spec.into_iter().enumerate() {
                out[k][i] = value;
            }
        }
        Ok(out)
    }

    /// Inverse transform of spectra `spectra[k][i]`, returning the real parts
    /// `out[n][i]` and the largest discarded imaginary magnitude.
    pub fn inverse_series_to_real(&self, spectra: &[Vec<Complex64>]) -> Result<(Vec<Vec<f64>>, f64)> {
        self.check(spectra.len())?;
        let dim = spectra.first().map_or(0, Vec::len);
        if spectra.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch("ragged spectra".into()));
        }
        let mut out = vec![vec![0.0; dim]; self.len];
        let mut residual: f64 = 0.0;
        let mut column = vec![Complex64::new(0.0, 0.0); self.len];
        for i in 0..dim {
            for (k, v) in spectra.iter().enumerate() {
                column[k] = v[i];
            }
            self.inverse(&mut column)?;
            for (n, value) in column.iter().enumerate() {
                out[n][i] = value.re;
                residual = residual.max(value.im.abs());
            }
        }
        Ok((out, residual))
    }
}

/// Enforces `X_{len-k} = conj(X_k)` and real `X_0` (and real Nyquist term).
pub(crate) fn symmetrize(x: &mut [Complex64]) {
    let len = x.len();
    if len == 0 {
        return;
    }
    x[0].im = 0.0;
    for k in 1..len {
        if 2 * k == len {
            x[k].im = 0.0;
        } else if 2 * k > len {
            x[k] = x[len - k].conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::DEFAULT_EPS;

    #[test]
    fn round_trip() {
        let grid = TimeGrid::new(16, 2.0, DEFAULT_EPS).unwrap();
        let t = ContourTransform::new(&grid);
        let orig: Vec<Complex64> = (0..17)
            .map(|n| Complex64::new((n as f64 * 0.3).sin(), (n as f64).cos() * 0.1))
            .collect();
        let mut x = orig.clone();
        t.forward(&mut x).unwrap();
        t.inverse(&mut x).unwrap();
        for (a, b) in x.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn forward_matches_definition() {
        let grid = TimeGrid::with_lambda(6, 0.5, 0.8).unwrap();
        let t = ContourTransform::new(&grid);
        let data: Vec<f64> = (0..7).map(|n| 1.0 + n as f64 * n as f64).collect();
        let spec = t.forward_real(&data).unwrap();
        let pts = grid.contour_points();
        for (k, s) in spec.iter().enumerate() {
            // sum_n g_n (lambda zeta^{-k})^n
            let mut acc = Complex64::new(0.0, 0.0);
            for (n, g) in data.iter().enumerate() {
                acc += pts[k].powi(n as i32) * *g;
            }
            assert!((acc - s).norm() < 1e-12 * acc.norm().max(1.0));
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let grid = TimeGrid::new(4, 1.0, DEFAULT_EPS).unwrap();
        let t = ContourTransform::new(&grid);
        let mut x = vec![Complex64::new(0.0, 0.0); 4];
        assert!(t.forward(&mut x).is_err());
    }
}
