//! Truncated power series in `zeta` and transfer functions that can be
//! composed with `delta(zeta) / dt` without any contour. This is the FFT-free
//! route to the convolution weights.

use num_complex::Complex64;

use super::{MultistepRule, TimeGrid, WeightSequence};
use crate::error::{Error, Result};

/// Real power series truncated after a fixed number of coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<f64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(value: f64, len: usize) -> Self {
        let mut coeffs = vec![0.0; len];
        if len > 0 {
            coeffs[0] = value;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * a).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        let mut out = vec![0.0; n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Series quotient by recursive division.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let n = self.len().min(other.len());
        let b0 = other.coeffs.first().copied().unwrap_or(0.0);
        if b0 == 0.0 {
            return Err(Error::UnsupportedTransfer(
                "denominator vanishes at zeta = 0".into(),
            ));
        }
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= other.coeffs[j] * q[k - j];
            }
            q[k] = acc / b0;
        }
        Ok(Self::new(q))
    }

    /// `exp` of the series, via `n E_n = sum_k k A_k E_{n-k}`.
    pub fn exp(&self) -> Self {
        let n = self.len();
        let mut e = vec![0.0; n];
        if n == 0 {
            return Self::new(e);
        }
        e[0] = self.coeffs[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.coeffs[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Self::new(e)
    }

    /// Multiplies by `zeta^m`.
    pub fn shift(&self, m: usize) -> Self {
        let n = self.len();
        let mut out = vec![0.0; n];
        if m < n {
            out[m..].copy_from_slice(&self.coeffs[..n - m]);
        }
        Self::new(out)
    }

    /// Polynomial in this series, `sum_k p_k S^k`, by Horner's scheme.
    pub fn compose_polynomial(&self, p: &[f64]) -> Self {
        let mut acc = Self::constant(0.0, self.len());
        for c in p.iter().rev() {
            acc = acc.mul(self);
            acc.coeffs[0] += c;
        }
        acc
    }
}

/// Transfer functions `K(s)` with an exact composition with
/// `s = delta(zeta) / dt`.
#[derive(Debug, Clone, PartialEq)]
pub enum TransferFunction {
    /// `sum_k c_k s^k`
    Polynomial(Vec<f64>),
    /// ratio of two polynomials in `s`
    Rational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
    },
    /// `exp(constant + slope * s)`
    Exponential { constant: f64, slope: f64 },
    Product(Vec<TransferFunction>),
}

impl TransferFunction {
    pub fn constant(c: f64) -> Self {
        TransferFunction::Polynomial(vec![c])
    }

    /// `s^k`
    pub fn power(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        TransferFunction::Polynomial(c)
    }

    /// `s^{-k}`
    pub fn inverse_power(k: usize) -> Self {
        let mut d = vec![0.0; k + 1];
        d[k] = 1.0;
        TransferFunction::Rational {
            numerator: vec![1.0],
            denominator: d,
        }
    }

    /// Pure delay `exp(-s r)`.
    pub fn delay(r: f64) -> Self {
        TransferFunction::Exponential {
            constant: 0.0,
            slope: -r,
        }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let poly = |c: &[f64]| {
            c.iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * s + ck)
        };
        match self {
            TransferFunction::Polynomial(c) => poly(c),
            TransferFunction::Rational {
                numerator,
                denominator,
            } => poly(numerator) / poly(denominator),
            TransferFunction::Exponential { constant, slope } => (s * *slope + *constant).exp(),
            TransferFunction::Product(parts) => parts
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, p| acc * p.eval(s)),
        }
    }

    /// Splits off the exponential factors: returns `(constant, slope, rest)`
    /// with `K(s) = exp(constant + slope s) * prod(rest)`.
    fn split_exponential(&self) -> (f64, f64, Vec<&TransferFunction>) {
        match self {
            TransferFunction::Exponential { constant, slope } => (*constant, *slope, Vec::new()),
            TransferFunction::Product(parts) => {
                let mut c = 0.0;
                let mut b = 0.0;
                let mut rest = Vec::new();
                for p in parts {
                    let (pc, pb, pr) = p.split_exponential();
                    c += pc;
                    b += pb;
                    rest.extend(pr);
                }
                (c, b, rest)
            }
            other => (0.0, 0.0, vec![other]),
        }
    }

    fn non_exponential_series(&self, s: &PowerSeries) -> Result<PowerSeries> {
        match self {
            TransferFunction::Polynomial(c) => Ok(s.compose_polynomial(c)),
            TransferFunction::Rational {
                numerator,
                denominator,
            } => s
                .compose_polynomial(numerator)
                .div(&s.compose_polynomial(denominator)),
            TransferFunction::Exponential { .. } | TransferFunction::Product(_) => {
                self.series_with_exponent(s, &PowerSeries::constant(0.0, s.len()))
            }
        }
    }

    /// Series of `exp(extra) * K(S)` where `S` is the frequency series.
    fn series_with_exponent(&self, s: &PowerSeries, extra: &PowerSeries) -> Result<PowerSeries> {
        let (c, b, rest) = self.split_exponential();
        let exponent = extra.add(&s.scale(b));
        let mut exponent = exponent;
        if let Some(first) = exponent.coeffs.first_mut() {
            *first += c;
        }
        let mut acc = exponent.exp();
        for part in rest {
            acc = acc.mul(&part.non_exponential_series(s)?);
        }
        Ok(acc)
    }
}

fn frequency_series(rule: MultistepRule, grid: &TimeGrid) -> PowerSeries {
    PowerSeries::new(rule.delta_coefficients(grid.steps())).scale(1.0 / grid.dt())
}

fn to_weights(series: PowerSeries, shift: usize) -> WeightSequence {
    WeightSequence::new(
        series
            .coeffs
            .into_iter()
            .map(|c| Complex64::new(c, 0.0))
            .collect(),
        shift,
    )
}

/// Taylor coefficients of `K(delta(zeta)/dt)` through `zeta^N`.
pub fn scalar_weights_exact(
    kernel: &TransferFunction,
    rule: MultistepRule,
    grid: &TimeGrid,
) -> Result<WeightSequence> {
    let s = frequency_series(rule, grid);
    let zero = PowerSeries::constant(0.0, s.len());
    Ok(to_weights(kernel.series_with_exponent(&s, &zero)?, 0))
}

/// Taylor coefficients of `zeta^m exp(m delta(zeta)) K(delta(zeta)/dt)`.
///
/// The factor `exp(m delta)` is merged with any exponential factor of `K`
/// before exponentiation, so delay kernels cancel exactly.
pub fn modified_weights_exact(
    kernel: &TransferFunction,
    shift: usize,
    rule: MultistepRule,
    grid: &TimeGrid,
) -> Result<WeightSequence> {
    let s = frequency_series(rule, grid);
    let extra = PowerSeries::new(rule.delta_coefficients(grid.steps())).scale(shift as f64);
    let series = kernel.series_with_exponent(&s, &extra)?.shift(shift);
    Ok(to_weights(series, shift))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_inverts_multiplication() {
        let a = PowerSeries::new(vec![1.5, -2.0, 0.5, 0.0, 0.0, 0.0]);
        let b = PowerSeries::new(vec![2.0, 1.0, -3.0, 0.25, 1.0, 0.0]);
        let q = a.mul(&b).div(&b).unwrap();
        for (x, y) in q.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn exp_of_linear_series() {
        // exp(2 z) = sum 2^k z^k / k!
        let e = PowerSeries::new(vec![0.0, 2.0, 0.0, 0.0, 0.0, 0.0]).exp();
        let mut fact = 1.0;
        for (k, c) in e.coeffs().iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((c - 2f64.powi(k as i32) / fact).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_denominator_rejected() {
        let grid = TimeGrid::with_lambda(5, 1.0, 0.5).unwrap();
        // 1/(s - 1.5) has a pole at delta(0)/dt = 1.5
        let k = TransferFunction::Rational {
            numerator: vec![1.0],
            denominator: vec![-1.5, 1.0],
        };
        assert!(matches!(
            scalar_weights_exact(&k, MultistepRule::Bdf2, &grid),
            Err(Error::UnsupportedTransfer(_))
        ));
    }

    #[test]
    fn square_of_derivative_bdf2() {
        let grid = TimeGrid::with_lambda(6, 0.5, 0.5).unwrap();
        let w = scalar_weights_exact(&TransferFunction::power(2), MultistepRule::Bdf2, &grid).unwrap();
        // (3/2 - 2z + z^2/2)^2 / dt^2
        let expect = [2.25, -6.0, 5.5, -2.0, 0.25, 0.0, 0.0];
        for (x, e) in w.weights().iter().zip(expect) {
            assert!((x.re - e / 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_s_first_weight() {
        let dt = 0.1;
        let grid = TimeGrid::with_lambda(10, dt, 0.5).unwrap();
        let w = scalar_weights_exact(&TransferFunction::inverse_power(1), MultistepRule::Bdf2, &grid)
            .unwrap();
        assert!((w.weights()[0].re - 2.0 * dt / 3.0).abs() < 1e-15);
    }

    #[test]
    fn modified_delay_becomes_pure_shift() {
        let grid = TimeGrid::with_lambda(12, 0.25, 0.5).unwrap();
        let m = 3;
        let k = TransferFunction::delay(m as f64 * grid.dt());
        for rule in MultistepRule::ALL {
            let w = modified_weights_exact(&k, m, rule, &grid).unwrap();
            for (j, x) in w.weights().iter().enumerate() {
                let e = if j == m { 1.0 } else { 0.0 };
                assert!((x.re - e).abs() < 1e-14, "{rule} j={j} {x}");
            }
        }
    }

    #[test]
    fn eval_matches_series_at_small_zeta() {
        let grid = TimeGrid::with_lambda(40, 0.5, 0.5).unwrap();
        let k = TransferFunction::Product(vec![
            TransferFunction::delay(0.75),
            TransferFunction::inverse_power(1),
        ]);
        for rule in MultistepRule::ALL {
            let w = scalar_weights_exact(&k, rule, &grid).unwrap();
            let z = Complex64::new(0.1, 0.05);
            let direct = k.eval(rule.delta(z).unwrap() / grid.dt());
            let summed = w
                .weights()
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
            assert!((direct - summed).norm() < 1e-12 * direct.norm());
        }
    }
}
