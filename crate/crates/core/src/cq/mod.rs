//! Time discretization: multistep generating functions, the scaled frequency
//! contour, convolution weights (standard and modified) and scalar discrete
//! convolution.
//!
//! The discrete Fourier convention used throughout the crate is
//! `X_k = sum_n x_n zeta^{-kn}` with `zeta = exp(2 pi i / (N+1))`, and the
//! inverse carries the `1/(N+1)` factor. Contour point `k` is
//! `lambda * zeta^{-k}`.

mod series;
mod transform;
mod weights;

pub use series::{modified_weights_exact, scalar_weights_exact, PowerSeries, TransferFunction};
pub use transform::ContourTransform;
pub use weights::{
    apply_convolution, modified_symbol, modified_weights_fft, scalar_weights_fft, WeightSequence,
};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Working precision used to place the contour when none is given.
pub const DEFAULT_EPS: f64 = f64::EPSILON;

/// Relative level below which FFT-computed weights count as zero.
pub fn fft_zero_tolerance(eps: f64) -> f64 {
    100.0 * eps.sqrt()
}

/// An A-stable second-order linear multistep method, represented by its
/// generating function `delta(zeta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MultistepRule {
    Bdf2,
    Trapezoidal,
}

impl MultistepRule {
    pub const ALL: [MultistepRule; 2] = [MultistepRule::Bdf2, MultistepRule::Trapezoidal];

    pub fn name(self) -> &'static str {
        match self {
            MultistepRule::Bdf2 => "bdf2",
            MultistepRule::Trapezoidal => "trapezoidal",
        }
    }

    pub fn order(self) -> u32 {
        2
    }

    /// Evaluates the generating function.
    pub fn delta(self, zeta: Complex64) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        match self {
            MultistepRule::Bdf2 => {
                let w = one - zeta;
                Ok(w + w * w * 0.5)
            }
            MultistepRule::Trapezoidal => {
                let den = one + zeta;
                if den.re == 0.0 && den.im == 0.0 {
                    return Err(Error::Pole {
                        re: zeta.re,
                        im: zeta.im,
                    });
                }
                Ok((one - zeta) * 2.0 / den)
            }
        }
    }

    /// Taylor coefficients of `delta` about `zeta = 0`, through `zeta^n`.
    pub fn delta_coefficients(self, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; n + 1];
        match self {
            MultistepRule::Bdf2 => {
                c[0] = 1.5;
                if n >= 1 {
                    c[1] = -2.0;
                }
                if n >= 2 {
                    c[2] = 0.5;
                }
            }
            MultistepRule::Trapezoidal => {
                // 2(1 - z)/(1 + z) = 2 + sum_{k>=1} 4 (-1)^k z^k
                c[0] = 2.0;
                for (k, ck) in c.iter_mut().enumerate().skip(1) {
                    *ck = if k % 2 == 0 { 4.0 } else { -4.0 };
                }
            }
        }
        c
    }
}

impl fmt::Display for MultistepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MultistepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bdf2" => Ok(MultistepRule::Bdf2),
            "trapezoidal" | "trap" => Ok(MultistepRule::Trapezoidal),
            other => Err(Error::Config(format!("unknown multistep rule `{other}`"))),
        }
    }
}

/// `delta_at(rule, zeta)`.
pub fn delta_at(rule: MultistepRule, zeta: Complex64) -> Result<Complex64> {
    rule.delta(zeta)
}

/// Contour radius `eps^{1/(2(N+1))}`.
pub fn choose_lambda(steps: usize, eps: f64) -> f64 {
    eps.powf(1.0 / (2.0 * (steps as f64 + 1.0)))
}

/// Uniform time grid `t_n = n dt`, `n = 0..=N`, together with the radius of
/// the frequency contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    steps: usize,
    dt: f64,
    lambda: f64,
    eps: f64,
}

impl TimeGrid {
    /// Grid with `steps` steps up to `final_time`, contour radius picked from `eps`.
    pub fn new(steps: usize, final_time: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidGrid(format!("eps = {eps} must lie in (0, 1)")));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("at least one time step is required".into()));
        }
        let dt = final_time / steps as f64;
        let mut grid = Self::with_lambda(steps, dt, choose_lambda(steps, eps))?;
        grid.eps = eps;
        Ok(grid)
    }

    /// Grid with an explicit contour radius. `steps = 0` is allowed and gives
    /// a single sample at `t = 0`.
    pub fn with_lambda(steps: usize, dt: f64, lambda: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt = {dt} must be positive")));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidGrid(format!(
                "contour radius {lambda} must lie in (0, 1)"
            )));
        }
        let eps = lambda.powf(2.0 * (steps as f64 + 1.0));
        Ok(Self {
            steps,
            dt,
            lambda,
            eps,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of samples, `N + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |n| self.time(n))
    }

    /// Number of frequency systems left after conjugate symmetry,
    /// `ceil((N + 2) / 2)`.
    pub fn half_len(&self) -> usize {
        self.len() / 2 + 1
    }

    /// Contour points `lambda * zeta_{N+1}^{-k}`, `k = 0..=N`.
    ///
    /// The upper half is the exact complex conjugate of the lower half.
    pub fn contour_points(&self) -> Vec<Complex64> {
        let len = self.len();
        let mut points = vec![Complex64::new(0.0, 0.0); len];
        for k in 0..len {
            if 2 * k > len {
                points[k] = points[len - k].conj();
            } else if 2 * k == len {
                points[k] = Complex64::new(-self.lambda, 0.0);
            } else {
                let angle = 2.0 * PI * k as f64 / len as f64;
                points[k] = Complex64::new(self.lambda * angle.cos(), -self.lambda * angle.sin());
            }
        }
        points
    }
}

/// `s_k = delta(lambda zeta^{-k}) / dt` for `k = 0..=N`.
pub fn cq_frequencies(rule: MultistepRule, grid: &TimeGrid) -> Result<Vec<Complex64>> {
    grid.contour_points()
        .into_iter()
        .map(|z| Ok(rule.delta(z)? / grid.dt()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_examples() {
        assert_eq!(MultistepRule::Bdf2.delta(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(MultistepRule::Bdf2.delta(c(0.0, 0.0)).unwrap(), c(1.5, 0.0));
        assert_eq!(MultistepRule::Trapezoidal.delta(c(0.0, 0.0)).unwrap(), c(2.0, 0.0));
        assert_eq!(MultistepRule::Trapezoidal.delta(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn trapezoidal_pole() {
        let err = MultistepRule::Trapezoidal.delta(c(-1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Pole { .. }));
    }

    #[test]
    fn consistency_and_a_stability() {
        for rule in MultistepRule::ALL {
            let mut worst: f64 = 0.0;
            for i in 0..=20 {
                for j in -20..=20 {
                    let z = c(0.1 * i as f64 / 20.0, 0.1 * j as f64 / 20.0);
                    if z.norm() > 0.1 || z.norm() == 0.0 {
                        continue;
                    }
                    let d = rule.delta((-z).exp()).unwrap();
                    worst = worst.max((d - z).norm() / z.norm().powi(3));
                }
            }
            assert!(worst <= 1.0, "{rule}: consistency ratio {worst}");

            for i in 1..=30 {
                for j in -30..=30 {
                    let z = c(0.2 * i as f64, 0.7 * j as f64);
                    let d = rule.delta((-z).exp()).unwrap();
                    assert!(d.re > 0.0, "{rule}: Re delta <= 0 at {z}");
                }
            }
        }
    }

    #[test]
    fn delta_coefficients_match_evaluation() {
        for rule in MultistepRule::ALL {
            let coeffs = rule.delta_coefficients(60);
            let z = c(0.3, -0.2);
            let mut acc = c(0.0, 0.0);
            let mut p = c(1.0, 0.0);
            for ck in &coeffs {
                acc += p * *ck;
                p *= z;
            }
            assert!((acc - rule.delta(z).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn lambda_examples() {
        assert!((choose_lambda(0, 1e-16) - 1e-8).abs() < 1e-22);
        let l = choose_lambda(511, 2f64.powi(-52));
        assert!((l - (-52.0 * 2f64.ln() / 1024.0).exp()).abs() < 1e-15);
        assert!((l - 0.96542).abs() < 1e-5);
        let mut prev = 0.0;
        for n in [1, 10, 100, 1000, 10000] {
            let l = choose_lambda(n, 1e-16);
            assert!(l > prev && l < 1.0);
            prev = l;
        }
    }

    #[test]
    fn frequencies_single_step() {
        let grid = TimeGrid::with_lambda(0, 1.0, 0.5).unwrap();
        let s = cq_frequencies(MultistepRule::Bdf2, &grid).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0] - c(0.625, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn frequencies_in_right_half_plane() {
        for rule in MultistepRule::ALL {
            for n in [1, 2, 7, 64, 255] {
                let grid = TimeGrid::new(n, 3.0, DEFAULT_EPS).unwrap();
                for s in cq_frequencies(rule, &grid).unwrap() {
                    assert!(s.re > 0.0);
                }
            }
        }
    }

    #[test]
    fn contour_is_conjugate_symmetric() {
        for n in [1, 2, 5, 64, 99] {
            let grid = TimeGrid::new(n, 1.0, DEFAULT_EPS).unwrap();
            let pts = grid.contour_points();
            for k in 1..pts.len() {
                assert_eq!(pts[k], pts[pts.len() - k].conj());
            }
            assert_eq!(pts[0].im, 0.0);
            for p in &pts {
                assert!((p.norm() - grid.lambda()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::with_lambda(4, 0.0, 0.5).is_err());
        assert!(TimeGrid::with_lambda(4, 0.1, 1.0).is_err());
        assert!(TimeGrid::with_lambda(4, 0.1, 0.0).is_err());
        assert!(TimeGrid::new(0, 1.0, 1e-16).is_err());
        let g = TimeGrid::new(8, 2.0, 1e-16).unwrap();
        assert_eq!(g.final_time(), 2.0);
        assert_eq!(g.half_len(), 5);
        assert_eq!(TimeGrid::new(7, 2.0, 1e-16).unwrap().half_len(), 5);
    }
}
