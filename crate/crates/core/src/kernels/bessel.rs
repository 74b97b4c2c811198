//! Bessel functions needed by the 2D kernels and the radial incident wave.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_RADIUS: f64 = 2.0;
const ASYMPTOTIC_RADIUS: f64 = 25.0;
const MAX_ITER: usize = 2000;

/// Exponentially scaled Macdonald function `e^z K_0(z)` for `Re z >= 0`,
/// `z != 0`.
///
/// Ascending series for `|z| <= 2`, Steed's continued fraction up to
/// `|z| = 25` and the Hankel expansion beyond.
pub fn bessel_k0_scaled(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("K0 argument {z} is not finite")));
    }
    if z.re < 0.0 {
        return Err(Error::Domain(format!("K0 argument {z} has negative real part")));
    }
    let r = z.norm();
    if r == 0.0 {
        return Err(Error::Domain("K0 is singular at z = 0".into()));
    }
    if r <= SERIES_RADIUS {
        Ok(k0_series(z) * z.exp())
    } else if r <= ASYMPTOTIC_RADIUS {
        k0_scaled_continued_fraction(z)
    } else {
        Ok(k0_scaled_asymptotic(z))
    }
}

/// Unscaled ascending series
/// `K_0(z) = -(ln(z/2) + gamma) I_0(z) + sum_k H_k (z^2/4)^k / (k!)^2`.
fn k0_series(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let log_term = (z * 0.5).ln() + EULER_GAMMA;
    let mut term = Complex64::new(1.0, 0.0);
    let mut i0 = term;
    let mut harmonic_sum = Complex64::new(0.0, 0.0);
    let mut h = 0.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        term = term * q / (kf * kf);
        h += 1.0 / kf;
        i0 += term;
        harmonic_sum += term * h;
        if term.norm() * h <= 1e-17 * (i0.norm() + harmonic_sum.norm()) {
            break;
        }
    }
    harmonic_sum - log_term * i0
}

/// Steed's algorithm (continued fraction CF2 of Temme/Thompson–Barnett) for
/// `e^z K_0(z)`.
fn k0_scaled_continued_fraction(z: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut b = (one + z) * 2.0;
    let mut d = one / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = a1;
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += qnew * c;
        b += 2.0;
        d = one / (b + d * a);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() {
            return Ok((Complex64::new(PI, 0.0) / (z * 2.0)).sqrt() / s);
        }
    }
    Err(Error::NonConvergence(format!(
        "K0 continued fraction at z = {z}"
    )))
}

/// Hankel expansion `sqrt(pi/(2z)) sum_k a_k(0) / z^k`, summed until the
/// terms fall below roundoff or start to grow.
fn k0_scaled_asymptotic(z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term = term * inv * (-(odd * odd) / (8.0 * kf));
        let size = term.norm();
        if size > prev {
            break;
        }
        sum += term;
        if size < 1e-17 * sum.norm() {
            break;
        }
        prev = size;
    }
    (Complex64::new(PI, 0.0) / (z * 2.0)).sqrt() * sum
}

/// Bessel function of the first kind `J_0(x)` for `x >= 0`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 2.0 {
        j0_series(x)
    } else if x <= ASYMPTOTIC_RADIUS {
        j0_miller(x)
    } else {
        j0_asymptotic(x)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..100 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalised by `J_0 + 2 sum_k J_{2k} = 1`.
fn j0_miller(x: f64) -> f64 {
    let start = 2 * (((x + 40.0) / 2.0).ceil() as usize);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = if start % 2 == 0 { 2.0 * cur } else { 0.0 };
    for k in (1..=start).rev() {
        let prev = (2.0 * k as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        let index = k - 1;
        if index > 0 && index % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    cur / norm
}

fn j0_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / x;
    // a_k(0) / x^k with alternating signs folded into P and Q.
    let mut a = 1.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= -(odd * odd) / (8.0 * kf) * inv;
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        // P = sum (-1)^j a_{2j} x^{-2j}, Q = sum (-1)^j a_{2j+1} x^{-2j-1}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
