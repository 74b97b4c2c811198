//! Rank-revealing complex least squares: Householder QR with column
//! pivoting, truncation of the trailing block, and a second QR of the
//! retained rows to return the minimum-norm solution.
//!
//! Only ring operations, real square roots and moduli are used, so the
//! factorization of `conj(A)` is exactly the conjugate of the factorization
//! of `A`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative truncation level for singular directions.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Householder reflector `H = I - 2 v v^H / (v^H v)` acting on rows
/// `offset..` of a column.
#[derive(Debug, Clone)]
struct Reflector {
    offset: usize,
    v: Vec<Complex64>,
    scale: f64,
}

impl Reflector {
    /// Builds the reflector mapping `x` to `beta e_1`; returns it and `beta`.
    fn new(offset: usize, x: &[Complex64]) -> (Option<Self>, Complex64) {
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let alpha = x[0];
        if norm == 0.0 {
            return (None, ZERO);
        }
        let abs_alpha = alpha.norm();
        let phase = if abs_alpha == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            alpha / abs_alpha
        };
        let beta = -phase * norm;
        let mut v = x.to_vec();
        v[0] = alpha + phase * norm;
        let vhv = 2.0 * norm * (norm + abs_alpha);
        (
            Some(Self {
                offset,
                v,
                scale: 2.0 / vhv,
            }),
            beta,
        )
    }

    fn apply(&self, y: &mut [Complex64]) {
        let tail = &mut y[self.offset..self.offset + self.v.len()];
        let mut dot = ZERO;
        for (vi, yi) in self.v.iter().zip(tail.iter()) {
            dot += vi.conj() * yi;
        }
        let f = dot * self.scale;
        if f == ZERO {
            return;
        }
        for (vi, yi) in self.v.iter().zip(tail.iter_mut()) {
            *yi -= vi * f;
        }
    }
}

/// Truncated complete orthogonal decomposition `A P = Q [T 0; 0 0] Z^H`.
#[derive(Debug, Clone)]
pub struct LeastSquaresFactor {
    rows: usize,
    cols: usize,
    rank: usize,
    perm: Vec<usize>,
    left: Vec<Reflector>,
    /// Leading `rank x cols` rows of R, stored row-major.
    r_rows: Vec<Vec<Complex64>>,
    /// QR of `R[..rank, ..]^H` when the rank is deficient.
    right: Option<(Vec<Reflector>, DMatrix<Complex64>)>,
    diag_max: f64,
    diag_min: f64,
}

impl LeastSquaresFactor {
    pub fn new(a: &DMatrix<Complex64>, rank_tol: f64) -> Self {
        let (m, n) = a.shape();
        let mut work = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<f64> = (0..n)
            .map(|j| work.column(j).iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let mut reference = norms.clone();
        let steps = m.min(n);
        let mut left = Vec::with_capacity(steps);
        let mut diag_max = 0.0;
        let mut diag_min = 0.0;
        let mut rank = 0;

        for k in 0..steps {
            let mut p = k;
            for j in k + 1..n {
                if norms[j] > norms[p] {
                    p = j;
                }
            }
            if p != k {
                work.swap_columns(k, p);
                norms.swap(k, p);
                reference.swap(k, p);
                perm.swap(k, p);
            }
            let (reflector, beta) = {
                let col = &work.as_slice()[k * m..(k + 1) * m];
                Reflector::new(k, &col[k..])
            };
            let size = beta.norm();
            if k == 0 {
                diag_max = size;
            }
            if size == 0.0 || size < rank_tol * diag_max {
                break;
            }
            let Some(reflector) = reflector else { break };
            {
                let data = work.as_mut_slice();
                data[k * m + k] = beta;
                for v in &mut data[k * m + k + 1..(k + 1) * m] {
                    *v = ZERO;
                }
                for j in k + 1..n {
                    reflector.apply(&mut data[j * m..(j + 1) * m]);
                }
                for j in k + 1..n {
                    let r = data[j * m + k].norm_sqr();
                    norms[j] -= r;
                    if norms[j] <= 1e-10 * reference[j] {
                        norms[j] = data[j * m + k + 1..(j + 1) * m]
                            .iter()
                            .map(|z| z.norm_sqr())
                            .sum();
                        reference[j] = norms[j];
                    }
                }
            }
            left.push(reflector);
            diag_min = size;
            rank = k + 1;
        }

        let r_rows: Vec<Vec<Complex64>> = (0..rank)
            .map(|i| (0..n).map(|j| work[(i, j)]).collect())
            .collect();

        let right = if rank < n && rank > 0 {
            // W = R[..rank, ..]^H, n x rank; QR without pivoting.
            let mut w = DMatrix::from_fn(n, rank, |i, j| r_rows[j][i].conj());
            let mut refl = Vec::with_capacity(rank);
            for k in 0..rank {
                let (reflector, beta) = {
                    let col = &w.as_slice()[k * n..(k + 1) * n];
                    Reflector::new(k, &col[k..])
                };
                let data = w.as_mut_slice();
                data[k * n + k] = beta;
                for v in &mut data[k * n + k + 1..(k + 1) * n] {
                    *v = ZERO;
                }
                if let Some(reflector) = reflector {
                    for j in k + 1..rank {
                        reflector.apply(&mut data[j * n..(j + 1) * n]);
                    }
                    refl.push(reflector);
                } else {
                    refl.push(Reflector {
                        offset: k,
                        v: vec![ZERO; n - k],
                        scale: 0.0,
                    });
                }
            }
            Some((refl, w))
        } else {
            None
        };

        Self {
            rows: m,
            cols: n,
            rank,
            perm,
            left,
            r_rows,
            right,
            diag_max,
            diag_min,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Ratio of the largest to the smallest retained diagonal of R.
    pub fn condition_estimate(&self) -> f64 {
        if self.rank == 0 {
            f64::INFINITY
        } else {
            self.diag_max / self.diag_min
        }
    }

    pub fn solve(&self, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let r = self.rank;
        let n = self.cols;
        let mut c: Vec<Complex64> = b.iter().copied().collect();
        for h in &self.left {
            h.apply(&mut c);
        }
        let mut y = vec![ZERO; n];
        match &self.right {
            None => {
                // back substitution with R11 (r x r, here r == n or r == 0)
                for i in (0..r).rev() {
                    let row = &self.r_rows[i];
                    let mut acc = c[i];
                    for j in i + 1..r {
                        acc -= row[j] * y[j];
                    }
                    y[i] = acc / row[i];
                }
            }
            Some((refl, w)) => {
                // R[..r, ..] = L Q2^H with L = R2^H lower triangular.
                let mut z = vec![ZERO; n];
                for i in 0..r {
                    let mut acc = c[i];
                    for j in 0..i {
                        acc -= w[(j, i)].conj() * z[j];
                    }
                    z[i] = acc / w[(i, i)].conj();
                }
                for h in refl.iter().rev() {
                    h.apply(&mut z);
                }
                y = z;
            }
        }
        let mut x = DVector::from_element(n, ZERO);
        for (j, &p) in self.perm.iter().enumerate() {
            x[p] = y[j];
        }
        Ok(x)
    }
}

/// Minimum-norm least-squares solution with singular directions below
/// `rank_tol * sigma_max` (as revealed by the pivoted QR) truncated.
pub fn least_squares(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    rank_tol: f64,
) -> Result<DVector<Complex64>> {
    LeastSquaresFactor::new(a, rank_tol).solve(b)
}
