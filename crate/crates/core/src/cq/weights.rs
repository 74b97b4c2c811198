use num_complex::Complex64;

use super::{cq_frequencies, ContourTransform, MultistepRule, TimeGrid};
use crate::error::{Error, Result};

/// Convolution weights `omega_0..omega_N`.
///
/// `shift` is the number of leading weights known to vanish (zero for the
/// standard scheme, `m` for a modified sequence).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    weights: Vec<Complex64>,
    shift: usize,
}

impl WeightSequence {
    pub fn new(weights: Vec<Complex64>, shift: usize) -> Self {
        Self { weights, shift }
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// Convolves a real scalar series, keeping the real part.
    pub fn convolve_real(&self, g: &[f64]) -> Result<Vec<f64>> {
        let vectors: Vec<Vec<Complex64>> =
            g.iter().map(|&v| vec![Complex64::new(v, 0.0)]).collect();
        Ok(apply_convolution(self, &vectors)?
            .into_iter()
            .map(|v| v[0].re)
            .collect())
    }
}

/// Discrete convolution `sum_{j<=n} omega_{n-j} g_j` for `n = 0..=N`.
///
/// Weights with index below the sequence's shift are treated as zero, so a
/// modified sequence produces an exactly vanishing output for `n < m`.
pub fn apply_convolution(
    weights: &WeightSequence,
    g: &[Vec<Complex64>],
) -> Result<Vec<Vec<Complex64>>> {
    if g.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights against {} samples",
            weights.len(),
            g.len()
        )));
    }
    let dim = g.first().map_or(0, Vec::len);
    if g.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch("ragged input series".into()));
    }
    let w = weights.weights();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; g.len()];
    for (n, slot) in out.iter_mut().enumerate() {
        if n < weights.shift() {
            continue;
        }
        for j in 0..=(n - weights.shift()) {
            let wk = w[n - j];
            for (o, x) in slot.iter_mut().zip(&g[j]) {
                *o += wk * x;
            }
        }
    }
    Ok(out)
}

/// CQ weights of `kernel` by the trapezoidal rule on the scaled contour,
/// i.e. one inverse FFT of `kernel(s_l)`.
pub fn scalar_weights_fft<F>(kernel: F, rule: MultistepRule, grid: &TimeGrid) -> Result<WeightSequence>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let freqs = cq_frequencies(rule, grid)?;
    let mut values = Vec::with_capacity(freqs.len());
    for (index, s) in freqs.into_iter().enumerate() {
        let v = kernel(s).map_err(|e| Error::TransferEvaluation {
            index,
            message: e.to_string(),
        })?;
        if !v.is_finite() {
            return Err(Error::TransferEvaluation {
                index,
                message: format!("non-finite value at s = {s}"),
            });
        }
        values.push(v);
    }
    let transform = ContourTransform::new(grid);
    transform.inverse(&mut values)?;
    Ok(WeightSequence::new(values, 0))
}

/// Generating function of the modified weights,
/// `zeta^m e^{m delta(zeta)} K(delta(zeta) / dt)`.
pub fn modified_symbol<F>(
    kernel: F,
    shift: usize,
    rule: MultistepRule,
    grid: &TimeGrid,
    zeta: Complex64,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let d = rule.delta(zeta)?;
    let k = kernel(d / grid.dt())?;
    if shift == 0 {
        return Ok(k);
    }
    let m = shift as f64;
    Ok(zeta.powi(shift as i32) * (d * m).exp() * k)
}

/// Modified weights `omega_{j;m}` by the contour FFT.
pub fn modified_weights_fft<F>(
    kernel: F,
    shift: usize,
    rule: MultistepRule,
    grid: &TimeGrid,
) -> Result<WeightSequence>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut values = Vec::with_capacity(grid.len());
    for (index, zeta) in grid.contour_points().into_iter().enumerate() {
        let v = modified_symbol(&kernel, shift, rule, grid, zeta).map_err(|e| {
            Error::TransferEvaluation {
                index,
                message: e.to_string(),
            }
        })?;
        values.push(v);
    }
    let transform = ContourTransform::new(grid);
    transform.inverse(&mut values)?;
    Ok(WeightSequence::new(values, shift))
}
