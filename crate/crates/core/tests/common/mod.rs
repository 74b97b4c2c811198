//! Reference computations shared by the integration tests. Nothing here
//! calls into the library's special-function or weight code.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// double-double arithmetic

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };
    pub const EULER: Dd = Dd {
        hi: 0.577_215_664_901_532_9,
        lo: -4.942_915_152_430_645e-18,
    };

    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, b: Dd) -> Dd {
        let s = two_sum(self.hi, b.hi);
        let t = two_sum(self.lo, b.lo);
        let s = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(s.hi, s.lo + t.lo)
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, b: Dd) -> Dd {
        self.add(b.neg())
    }

    pub fn mul(self, b: Dd) -> Dd {
        let p = two_prod(self.hi, b.hi);
        quick_two_sum(p.hi, p.lo + self.hi * b.lo + self.lo * b.hi)
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        self.mul(Dd::from(b))
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let p = two_prod(q1, b);
        let r = (self.hi - p.hi - p.lo + self.lo) / b;
        quick_two_sum(q1, r)
    }

    pub fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self.sub(b.mul_f64(q1));
        let q2 = r.hi / b.hi;
        let r = r.sub(b.mul_f64(q2));
        let q3 = r.hi / b.hi;
        quick_two_sum(q1, q2).add(Dd::from(q3))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn exp(self) -> Dd {
        let k = (self.hi / Dd::LN2.hi).round();
        let r = self.sub(Dd::LN2.mul_f64(k));
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..60 {
            term = term.mul(r).div_f64(n as f64);
            sum = sum.add(term);
            if term.hi.abs() < 1e-34 * sum.hi.abs() {
                break;
            }
        }
        let scale = 2f64.powi(k as i32);
        Dd {
            hi: sum.hi * scale,
            lo: sum.lo * scale,
        }
    }

    /// Natural log of a positive number by one Newton step from `f64`.
    pub fn ln(self) -> Dd {
        let y0 = Dd::from(self.hi.ln());
        y0.add(self.mul(y0.neg().exp())).sub(Dd::ONE)
    }

    /// `(sin x, cos x)` by Taylor series, for `|x| <= pi`.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let x2 = self.mul(self);
        let mut s_term = self;
        let mut s = self;
        let mut c_term = Dd::ONE;
        let mut cs = Dd::ONE;
        for n in 1..40 {
            let k = 2.0 * n as f64;
            c_term = c_term.mul(x2).div_f64(-(k - 1.0) * k);
            s_term = s_term.mul(x2).div_f64(-k * (k + 1.0));
            cs = cs.add(c_term);
            s = s.add(s_term);
            if c_term.hi.abs() + s_term.hi.abs() < 1e-34 {
                break;
            }
        }
        (s, cs)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub fn from(z: Complex64) -> Cdd {
        Cdd {
            re: Dd::from(z.re),
            im: Dd::from(z.im),
        }
    }

    pub fn add(self, b: Cdd) -> Cdd {
        Cdd {
            re: self.re.add(b.re),
            im: self.im.add(b.im),
        }
    }

    pub fn sub(self, b: Cdd) -> Cdd {
        Cdd {
            re: self.re.sub(b.re),
            im: self.im.sub(b.im),
        }
    }

    pub fn mul(self, b: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(b.re).sub(self.im.mul(b.im)),
            im: self.re.mul(b.im).add(self.im.mul(b.re)),
        }
    }

    pub fn div_f64(self, b: f64) -> Cdd {
        Cdd {
            re: self.re.div_f64(b),
            im: self.im.div_f64(b),
        }
    }

    pub fn norm_hi(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    pub fn to_c64(self) -> Complex64 {
        c(self.re.to_f64(), self.im.to_f64())
    }

    /// Principal logarithm for `Re z >= 0`.
    pub fn ln(self) -> Cdd {
        let modulus2 = self.re.mul(self.re).add(self.im.mul(self.im));
        let theta0 = self.im.hi.atan2(self.re.hi);
        let (s, co) = Dd::from(theta0).sin_cos();
        // rotate onto the positive real axis; the residual angle is tiny
        let re = self.re.mul(co).add(self.im.mul(s));
        let im = self.im.mul(co).sub(self.re.mul(s));
        Cdd {
            re: modulus2.ln().mul_f64(0.5),
            im: Dd::from(theta0).add(Dd::from(im.hi / re.hi)),
        }
    }
}

// ---------------------------------------------------------------------------
// K0 oracles

/// `K_0(z)` from the ascending series summed in double-double arithmetic,
/// so that the cancellation for large `Re z` costs nothing at `|z| <= 12`.
pub fn k0_series_dd(z: Complex64) -> Complex64 {
    let zz = Cdd::from(z);
    let q = zz.mul(zz).div_f64(4.0);
    let log_term = zz.div_f64(2.0).ln().add(Cdd {
        re: Dd::EULER,
        im: Dd::ZERO,
    });
    let mut term = Cdd::from(c(1.0, 0.0));
    let mut i0 = term;
    let mut harmonic = Cdd::from(c(0.0, 0.0));
    let mut h = Dd::ZERO;
    for k in 1..400 {
        let kf = k as f64;
        term = term.mul(q).div_f64(kf * kf);
        h = h.add(Dd::ONE.div_f64(kf));
        i0 = i0.add(term);
        let th = term.mul(Cdd { re: h, im: Dd::ZERO });
        harmonic = harmonic.add(th);
        if th.norm_hi() < 1e-34 * (i0.norm_hi() + harmonic.norm_hi()) {
            break;
        }
    }
    harmonic.sub(log_term.mul(i0)).to_c64()
}

pub fn k0_scaled_series_oracle(z: Complex64) -> Complex64 {
    k0_series_dd(z) * z.exp()
}

/// `e^z K_0(z) = z^{-1/2} int_0^inf 2 e^{-x^2} / sqrt(x^2 / z + 2) dx`,
/// the Laplace representation behind the Hankel expansion, integrated
/// adaptively. Valid for `Re z >= 0`, `z != 0`.
pub fn k0_scaled_laplace(z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let f = |x: f64| 2.0 * (-x * x).exp() / (inv * (x * x) + 2.0).sqrt();
    let mut breaks = vec![0.0];
    let scale = z.norm().sqrt();
    let mut b = scale * 2f64.powi(-40);
    while b < 7.0 {
        if b > 1e-14 {
            breaks.push(b);
        }
        b *= 2.0;
    }
    for k in 1..=14 {
        breaks.push(0.5 * k as f64);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = c(0.0, 0.0);
    for w in breaks.windows(2) {
        total += gk_adaptive_complex(&f, w[0], w[1], 1e-15, 1e-300);
    }
    total / z.sqrt()
}

/// Optimally truncated Hankel expansion of `e^z K_0(z)`.
pub fn k0_scaled_hankel(z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let mut term = c(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for k in 1..400 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * inv * (-(odd * odd) / (8.0 * kf));
        if next.norm() >= prev {
            break;
        }
        prev = next.norm();
        term = next;
        sum += term;
    }
    (c(PI, 0.0) / (2.0 * z)).sqrt() * sum
}

/// Reference for `e^z K_0(z)`: double-double series for `|z| <= 10`, the
/// Laplace representation beyond.
pub fn k0_scaled_oracle(z: Complex64) -> Complex64 {
    if z.norm() <= 10.0 {
        k0_scaled_series_oracle(z)
    } else {
        k0_scaled_laplace(z)
    }
}

// ---------------------------------------------------------------------------
// adaptive Gauss-Kronrod (7, 15)

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let s = f(mid - x) + f(mid + x);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * half, ((kron - gauss) * half).norm())
}

/// Globally adaptive bisection with a (7, 15) Gauss-Kronrod pair: the cell
/// with the largest error estimate is split until the total estimate
/// meets the tolerance or 4000 cells are in use.
pub fn gk_adaptive_complex<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, rel: f64, abs: f64) -> Complex64 {
    let (v, e) = gk15(f, a, b);
    let mut cells = vec![(a, b, v, e)];
    loop {
        let total: Complex64 = cells.iter().map(|c| c.2).sum();
        let err: f64 = cells.iter().map(|c| c.3).sum();
        if err <= abs.max(rel * total.norm()) || cells.len() >= 4000 {
            return total;
        }
        let (k, _) = cells
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = cells.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return total;
        }
        let (l, el) = gk15(f, lo, mid);
        let (r, er) = gk15(f, mid, hi);
        cells.push((lo, mid, l, el));
        cells.push((mid, hi, r, er));
    }
}

pub fn gk_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    gk_adaptive_complex(&|x| c(f(x), 0.0), a, b, rel, abs).re
}

// ---------------------------------------------------------------------------
// closed-form convolution weights and solutions

/// Taylor coefficients of `1 / delta(zeta)`.
pub fn inverse_delta_coefficients(bdf2: bool, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            if bdf2 {
                // 2 / ((1 - zeta)(3 - zeta)) = 1/(1 - zeta) - 1/(3 - zeta)
                1.0 - 3f64.powi(-(k as i32) - 1)
            } else if k == 0 {
                0.5
            } else {
                1.0
            }
        })
        .collect()
}

pub fn cauchy_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|n| (0..=n).map(|j| a[j] * b[n - j]).sum())
        .collect()
}

/// `int_0^t (t - tau) tau^4 sin(tau) dtau`, the solution of `y'' = t^4 sin t`
/// with zero initial data.
pub fn second_antiderivative_t4_sin(t: f64) -> f64 {
    let (s, co) = t.sin_cos();
    let f4 = |t: f64| {
        -t.powi(4) * co + 4.0 * t.powi(3) * s + 12.0 * t * t * co - 24.0 * t * s - 24.0 * co
    };
    let f5 = -t.powi(5) * co + 5.0 * t.powi(4) * s + 20.0 * t.powi(3) * co - 60.0 * t * t * s
        - 120.0 * t * co
        + 120.0 * s;
    t * (f4(t) + 24.0) - f5
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_exponent(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `int_0^1 int_0^1 f(tau, sigma) dsigma dtau` by nested adaptive
/// quadrature; the inner integral is split at `tau` when `split_diagonal`
/// is set.
pub fn unit_square_oracle<F: Fn(f64, f64) -> Complex64>(f: &F, split_diagonal: bool, rel: f64) -> Complex64 {
    let inner = |tau: f64| {
        let g = |sigma: f64| f(tau, sigma);
        if split_diagonal && tau > 0.0 && tau < 1.0 {
            gk_adaptive_complex(&g, 0.0, tau, rel, 1e-300) + gk_adaptive_complex(&g, tau, 1.0, rel, 1e-300)
        } else {
            gk_adaptive_complex(&g, 0.0, 1.0, rel, 1e-300)
        }
    };
    gk_adaptive_complex(&inner, 0.0, 1.0, rel, 1e-300)
}

/// Deterministic low-discrepancy pair in `[0, 1)^2` (Kronecker sequence).
pub fn kronecker(k: usize) -> (f64, f64) {
    const A1: f64 = 0.754_877_666_246_692_8;
    const A2: f64 = 0.569_840_290_998_053_3;
    let kf = k as f64 + 0.5;
    ((kf * A1).fract(), (kf * A2).fract())
}
