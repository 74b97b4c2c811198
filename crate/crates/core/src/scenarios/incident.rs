//! Incident waves: the windowed plane wave and the radial Gaussian pulse
//! evolved through its Hankel transform.

use std::f64::consts::TAU;

use crate::geometry::Point;
use crate::kernels::bessel_j0;
use crate::quadrature::GaussRule;

/// Tail level of `F(k)` at which the Hankel integral is truncated.
pub const HANKEL_TAIL: f64 = 1e-16;
const OVERSAMPLING: f64 = 8.0;
const MIN_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncidentSpec {
    /// Boundary data `sin(omega (t - x.alpha)) exp(-((t - delay - x.alpha)/width)^2)`.
    WindowedPlaneWave {
        omega: f64,
        alpha: [f64; 2],
        delay: f64,
        width: f64,
    },
    /// Radial pulse with initial value `exp(-a^2 |x - center|^2 / 2)` and zero
    /// initial velocity.
    GaussianPulse { a: f64, center: [f64; 2] },
}

impl IncidentSpec {
    pub fn plane_wave(omega: f64, alpha: [f64; 2]) -> Self {
        IncidentSpec::WindowedPlaneWave {
            omega,
            alpha,
            delay: 4.0,
            width: 0.7,
        }
    }

    pub fn gaussian() -> Self {
        IncidentSpec::GaussianPulse {
            a: 10.0,
            center: [0.25, 0.0],
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match self {
            IncidentSpec::WindowedPlaneWave { omega, .. } => Some(*omega),
            IncidentSpec::GaussianPulse { .. } => None,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        match self {
            IncidentSpec::WindowedPlaneWave { alpha, width, .. } => {
                let norm = alpha[0].hypot(alpha[1]);
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(crate::Error::Config(format!(
                        "plane-wave direction must be a unit vector, |alpha| = {norm}"
                    )));
                }
                if !(*width > 0.0) {
                    return Err(crate::Error::Config(format!("window width {width} must be positive")));
                }
            }
            IncidentSpec::GaussianPulse { a, .. } => {
                if !(*a > 0.0) {
                    return Err(crate::Error::Config(format!("pulse parameter a = {a} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// Incident field `u^inc(t, x)`.
    pub fn incident(&self, t: f64, x: &Point) -> f64 {
        match self {
            IncidentSpec::WindowedPlaneWave { .. } => -plane_wave(t, x, self),
            IncidentSpec::GaussianPulse { .. } => gaussian_incident(x, t, self),
        }
    }

    /// Dirichlet data `g = -u^inc` on the boundary.
    pub fn dirichlet_data(&self, t: f64, x: &Point) -> f64 {
        -self.incident(t, x)
    }
}

pub fn window(t: f64, width: f64) -> f64 {
    (-(t / width).powi(2)).exp()
}

/// Boundary data of the windowed plane wave; zero for other incident kinds.
pub fn plane_wave(t: f64, x: &Point, spec: &IncidentSpec) -> f64 {
    match *spec {
        IncidentSpec::WindowedPlaneWave {
            omega,
            alpha,
            delay,
            width,
        } => {
            let xa = x.x * alpha[0] + x.y * alpha[1];
            (omega * (t - xa)).sin() * window(t - delay - xa, width)
        }
        IncidentSpec::GaussianPulse { .. } => 0.0,
    }
}

fn hankel_cutoff(a: f64) -> f64 {
    a * (2.0 * (1.0 / HANKEL_TAIL).ln()).sqrt()
}

fn hankel_nodes(k_max: f64, reach: f64) -> usize {
    ((k_max * reach / TAU * OVERSAMPLING).ceil() as usize).max(MIN_NODES)
}

/// `u^inc(x, t) = int_0^inf F(k) J_0(k r) k cos(k t) dk` with
/// `F(k) = exp(-k^2 / (2 a^2)) / a^2`, `r = |x - center|`.
pub fn gaussian_incident(x: &Point, t: f64, spec: &IncidentSpec) -> f64 {
    let IncidentSpec::GaussianPulse { a, center } = *spec else {
        return 0.0;
    };
    let r = (x - Point::new(center[0], center[1])).norm();
    let k_max = hankel_cutoff(a);
    let rule = GaussRule::new(hankel_nodes(k_max, t.abs() + r));
    rule.integrate(0.0, k_max, |k| {
        (-k * k / (2.0 * a * a)).exp() / (a * a) * bessel_j0(k * r) * k * (k * t).cos()
    })
}

/// Evaluates the Gaussian pulse at many times for one point with a single
/// quadrature rule, sharing the Bessel values across times.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    a: f64,
    center: Point,
    nodes: Vec<(f64, f64)>,
}

impl GaussianSampler {
    /// Rule valid for `t <= t_max` and `|x - center| <= r_max`.
    pub fn new(spec: &IncidentSpec, t_max: f64, r_max: f64) -> Option<Self> {
        let IncidentSpec::GaussianPulse { a, center } = *spec else {
            return None;
        };
        let k_max = hankel_cutoff(a);
        let rule = GaussRule::new(hankel_nodes(k_max, t_max.abs() + r_max));
        let nodes = rule
            .mapped(0.0, k_max)
            .map(|(k, w)| (k, w * (-k * k / (2.0 * a * a)).exp() / (a * a) * k))
            .collect();
        Some(Self {
            a,
            center: Point::new(center[0], center[1]),
            nodes,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `u^inc(x, n dt)` for `n = 0..count`.
    pub fn series(&self, x: &Point, dt: f64, count: usize) -> Vec<f64> {
        let r = (x - self.center).norm();
        let mut out = vec![0.0; count];
        for &(k, w) in &self.nodes {
            let c = w * bessel_j0(k * r);
            // cos(k n dt) by the Chebyshev recurrence
            let step = (k * dt).cos();
            let mut prev = (k * dt).cos();
            let mut cur = 1.0;
            for (n, slot) in out.iter_mut().enumerate() {
                *slot += c * cur;
                let next = 2.0 * step * cur - prev;
                prev = cur;
                cur = next;
                if n % 64 == 63 {
                    // re-anchor to keep the recurrence error small
                    let t = (n + 1) as f64 * dt;
                    cur = (k * t).cos();
                    prev = (k * (t - dt)).cos();
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_wave_examples() {
        let spec = IncidentSpec::plane_wave(1.0, [0.0, -1.0]);
        let x = Point::new(0.3, 0.5);
        let xa = -0.5;
        let v = plane_wave(4.0 + xa, &x, &spec);
        assert!((v - 4f64.sin()).abs() < 1e-15);
        assert!((v + 0.756_80).abs() < 1e-5);
        assert!(plane_wave(0.0, &Point::new(0.0, -1.5), &spec).abs() <= 1e-5);
        let fast = IncidentSpec::plane_wave(5.0, [0.0, -1.0]);
        let t = 3.3;
        let ratio = plane_wave(t, &x, &fast) / plane_wave(t, &x, &spec);
        assert!((ratio - (5.0 * (t - xa)).sin() / (t - xa).sin()).abs() < 1e-12);
        assert_eq!(spec.dirichlet_data(t, &x), -spec.incident(t, &x));
    }

    #[test]
    fn gaussian_initial_value() {
        let spec = IncidentSpec::gaussian();
        let v = gaussian_incident(&Point::new(0.25, 0.0), 0.0, &spec);
        assert!((v - 1.0).abs() < 1e-12);
        let x = Point::new(0.4, 0.1);
        let r2 = (0.15f64).powi(2) + 0.01;
        assert!((gaussian_incident(&x, 0.0, &spec) - (-50.0 * r2).exp()).abs() < 1e-10);
    }

    #[test]
    fn sampler_matches_direct_evaluation() {
        let spec = IncidentSpec::gaussian();
        let sampler = GaussianSampler::new(&spec, 10.0, 1.5).unwrap();
        let x = Point::new(-0.6, 0.7);
        let dt = 10.0 / 300.0;
        let s = sampler.series(&x, dt, 301);
        for n in [0, 17, 64, 150, 300] {
            let direct = gaussian_incident(&x, n as f64 * dt, &spec);
            assert!((s[n] - direct).abs() < 1e-10, "n = {n}: {} vs {direct}", s[n]);
        }
    }
}
