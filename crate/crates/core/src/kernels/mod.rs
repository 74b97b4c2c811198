//! Fundamental solutions of the wave equation in the Laplace and time
//! domains.

mod bessel;

pub use bessel::{bessel_j0, bessel_k0_scaled, EULER_GAMMA};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Spatial dimension of the free-space kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `K(s, r) = K_0(s r) / (2 pi)`
    D2,
    /// `K(s, r) = e^{-s r} / (4 pi r)`
    D3,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::D2 => "2d",
            KernelFamily::D3 => "3d",
        })
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "2d" | "d2" => Ok(KernelFamily::D2),
            "3d" | "d3" => Ok(KernelFamily::D3),
            other => Err(Error::Config(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// Laplace-domain kernel `K(s, r)`.
pub fn laplace_kernel(family: KernelFamily, s: Complex64, r: f64) -> Result<Complex64> {
    shifted_kernel(family, s, r, 0.0)
}

/// `e^{s t_m} K(s, r)` for `0 <= t_m <= r`, evaluated as
/// `e^{-s (r - t_m)} [e^{s r} K(s, r)]` so that neither factor overflows.
pub fn shifted_kernel(family: KernelFamily, s: Complex64, r: f64, t_m: f64) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return Err(Error::Domain(format!("kernel frequency {s} must have Re s > 0")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("kernel distance {r} must be positive")));
    }
    if !(t_m >= 0.0 && t_m <= r) {
        return Err(Error::Domain(format!(
            "shift time {t_m} must lie in [0, r = {r}]"
        )));
    }
    let decay = (-(s * (r - t_m))).exp();
    match family {
        KernelFamily::D2 => {
            let sr = s * r;
            Ok(decay * bessel_k0_scaled(sr)? / (2.0 * PI))
        }
        KernelFamily::D3 => Ok(decay / (4.0 * PI * r)),
    }
}

/// Value of the time-domain kernel; the 3D kernel is a delta distribution
/// and is never sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeKernelValue {
    Regular(f64),
    Distributional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeKernelSample {
    pub t: f64,
    pub r: f64,
    pub value: TimeKernelValue,
}

/// `H(t - r) / (2 pi sqrt(t^2 - r^2))`.
pub fn time_kernel_2d(t: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("distance {r} must be positive")));
    }
    if t == r {
        return Err(Error::Domain(format!("kernel is singular at t = r = {r}")));
    }
    if t < r {
        return Ok(0.0);
    }
    Ok(1.0 / (2.0 * PI * (t * t - r * r).sqrt()))
}

pub fn time_kernel(family: KernelFamily, t: f64, r: f64) -> Result<TimeKernelSample> {
    let value = match family {
        KernelFamily::D2 => TimeKernelValue::Regular(time_kernel_2d(t, r)?),
        KernelFamily::D3 if t < r => TimeKernelValue::Regular(0.0),
        KernelFamily::D3 => TimeKernelValue::Distributional,
    };
    Ok(TimeKernelSample { t, r, value })
}
