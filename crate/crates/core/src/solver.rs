//! All-at-once contour solves, marching-on-in-time, and field evaluation.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::assembly::{ContourAssembler, ObservationAssembler, RhsSeries};
use crate::cq::{fft_zero_tolerance, ContourTransform, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{LeastSquaresFactor, DEFAULT_RANK_TOL};

pub use crate::linalg::least_squares;

/// A matrix-valued transfer function sampled on the CQ contour.
pub trait ContourOperator: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// Symbol at the contour point `zeta`.
    fn matrix(&self, zeta: Complex64) -> Result<DMatrix<Complex64>>;
}

impl ContourOperator for ContourAssembler {
    fn rows(&self) -> usize {
        self.disc.rows()
    }

    fn cols(&self) -> usize {
        self.disc.cols()
    }

    fn matrix(&self, zeta: Complex64) -> Result<DMatrix<Complex64>> {
        ContourAssembler::matrix(self, zeta)
    }
}

impl ContourOperator for ObservationAssembler {
    fn rows(&self) -> usize {
        self.points.len()
    }

    fn cols(&self) -> usize {
        self.disc.cols()
    }

    fn matrix(&self, zeta: Complex64) -> Result<DMatrix<Complex64>> {
        ObservationAssembler::matrix(self, zeta)
    }
}

/// Operator given by a closure, mostly for small model problems.
pub struct FnOperator<F> {
    pub rows: usize,
    pub cols: usize,
    pub f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(Complex64) -> Result<DMatrix<Complex64>> + Sync,
{
    pub fn new(rows: usize, cols: usize, f: F) -> Self {
        Self { rows, cols, f }
    }
}

impl<F> ContourOperator for FnOperator<F>
where
    F: Fn(Complex64) -> Result<DMatrix<Complex64>> + Sync,
{
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn matrix(&self, zeta: Complex64) -> Result<DMatrix<Complex64>> {
        (self.f)(zeta)
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Worker threads for the frequency solves; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Solve only `ceil((N+2)/2)` systems and fill the rest by conjugation.
    pub use_symmetry: bool,
    pub rank_tol: f64,
    /// Treat rank deficiency of a square system as an error.
    pub require_full_rank: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            workers: None,
            use_symmetry: true,
            rank_tol: DEFAULT_RANK_TOL,
            require_full_rank: false,
        }
    }
}

fn run_parallel<T, F>(workers: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Contour indices that are solved directly.
fn solved_indices(grid: &TimeGrid, use_symmetry: bool) -> std::ops::Range<usize> {
    if use_symmetry {
        0..grid.half_len()
    } else {
        0..grid.len()
    }
}

/// Fills entries `k > len / 2` with the conjugates of `len - k`.
fn fill_by_conjugation(values: &mut [Vec<Complex64>]) {
    let len = values.len();
    for k in 1..len {
        if 2 * k > len {
            values[k] = values[len - k].iter().map(|z| z.conj()).collect();
        }
    }
}

/// Real densities `phi_n`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityHistory {
    /// `phi[n][j]`.
    pub phi: Vec<Vec<f64>>,
    /// Largest imaginary part dropped by the inverse transform.
    pub residual_imag: f64,
}

impl DensityHistory {
    pub fn max_abs(&self) -> f64 {
        self.phi.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Whether the discarded imaginary part stays below `1e-6 max |phi|`.
    pub fn is_real_recovery_clean(&self) -> bool {
        self.residual_imag <= 1e-6 * self.max_abs().max(f64::MIN_POSITIVE)
    }
}

/// Diagnostics for one contour system.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRecord {
    pub index: usize,
    pub zeta: Complex64,
    pub relative_residual: f64,
    pub rank: usize,
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub records: Vec<FrequencyRecord>,
    pub wall_time: Duration,
    pub scheme: String,
    pub rule: String,
    pub residual_imag: f64,
    pub warnings: Vec<String>,
}

impl SolveReport {
    /// `key = value` text, one frequency per line under `[frequencies]`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[solve]");
        let _ = writeln!(out, "scheme = {}", self.scheme);
        let _ = writeln!(out, "rule = {}", self.rule);
        let _ = writeln!(out, "wall_time_seconds = {:.6}", self.wall_time.as_secs_f64());
        let _ = writeln!(out, "systems = {}", self.records.len());
        let _ = writeln!(out, "residual_imag = {:e}", self.residual_imag);
        for w in &self.warnings {
            let _ = writeln!(out, "warning = {w}");
        }
        let _ = writeln!(out, "\n[frequencies]");
        let _ = writeln!(out, "# index, re zeta, im zeta, relative residual, rank, condition estimate");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{}, {:e}, {:e}, {:e}, {}, {:e}",
                r.index, r.zeta.re, r.zeta.im, r.relative_residual, r.rank, r.condition
            );
        }
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.relative_residual)
            .fold(0.0, f64::max)
    }
}

/// Solves the fully discrete convolution system through `N + 1` decoupled
/// systems `V(lambda zeta^{-k}) phi_k = g_k` on the contour.
pub fn all_at_once_solve(
    op: &dyn ContourOperator,
    rhs: &RhsSeries,
    grid: &TimeGrid,
    options: &SolverOptions,
) -> Result<(DensityHistory, SolveReport)> {
    let start = Instant::now();
    if rhs.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} samples, grid has {}",
            rhs.len(),
            grid.len()
        )));
    }
    if rhs.dim() != op.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of size {} for a system with {} rows",
            rhs.dim(),
            op.rows()
        )));
    }
    let transform = ContourTransform::new(grid);
    let g_hat = transform.forward_real_series(&rhs.values)?;
    let zetas = grid.contour_points();
    let indices = solved_indices(grid, options.use_symmetry);

    let solve_one = |k: usize| -> Result<(Vec<Complex64>, FrequencyRecord)> {
        let a = op.matrix(zetas[k])?;
        let factor = LeastSquaresFactor::new(&a, options.rank_tol);
        if options.require_full_rank && a.is_square() && factor.rank() < a.ncols() {
            return Err(Error::SingularSystem { index: k });
        }
        let b = DVector::from_column_slice(&g_hat[k]);
        let x = factor.solve(&b)?;
        let bn = b.norm();
        let residual = (&a * &x - &b).norm();
        let record = FrequencyRecord {
            index: k,
            zeta: zetas[k],
            relative_residual: if bn > 0.0 { residual / bn } else { residual },
            rank: factor.rank(),
            condition: factor.condition_estimate(),
        };
        Ok((x.iter().copied().collect(), record))
    };

    let results: Vec<Result<(Vec<Complex64>, FrequencyRecord)>> =
        run_parallel(options.workers, || indices.clone().into_par_iter().map(solve_one).collect())?;

    let mut phi_hat = vec![vec![Complex64::new(0.0, 0.0); op.cols()]; grid.len()];
    let mut records = Vec::with_capacity(results.len());
    for (k, res) in indices.zip(results) {
        let (x, record) = res?;
        phi_hat[k] = x;
        records.push(record);
    }
    if options.use_symmetry {
        fill_by_conjugation(&mut phi_hat);
    }
    let (phi, residual_imag) = transform.inverse_series_to_real(&phi_hat)?;
    let density = DensityHistory { phi, residual_imag };
    let mut warnings = Vec::new();
    if !density.is_real_recovery_clean() {
        warnings.push(format!(
            "imaginary residual {:e} exceeds 1e-6 of max |phi| = {:e}; the scheme may be unstable",
            residual_imag,
            density.max_abs()
        ));
    }
    let report = SolveReport {
        records,
        wall_time: start.elapsed(),
        scheme: String::new(),
        rule: String::new(),
        residual_imag,
        warnings,
    };
    Ok((density, report))
}

/// Matrix weights `omega_j = lambda^{-j}/(N+1) sum_k V(lambda zeta^{-k}) zeta^{kj}`
/// computed with one inverse transform per entry. Returns the real parts
/// and the largest discarded imaginary part.
pub fn matrix_weights_fft(
    op: &dyn ContourOperator,
    grid: &TimeGrid,
    workers: Option<usize>,
) -> Result<(Vec<DMatrix<f64>>, f64)> {
    let zetas = grid.contour_points();
    let indices = solved_indices(grid, true);
    let mats: Vec<Result<DMatrix<Complex64>>> =
        run_parallel(workers, || indices.clone().into_par_iter().map(|k| op.matrix(zetas[k])).collect())?;
    let len = grid.len();
    let (rows, cols) = (op.rows(), op.cols());
    let mut symbols: Vec<Vec<Complex64>> = vec![Vec::new(); len];
    for (k, m) in indices.zip(mats) {
        symbols[k] = m?.iter().copied().collect();
    }
    fill_by_conjugation(&mut symbols);
    let transform = ContourTransform::new(grid);
    let (weights, imag) = transform.inverse_series_to_real(&symbols)?;
    let out = weights
        .into_iter()
        .map(|w| DMatrix::from_vec(rows, cols, w))
        .collect();
    Ok((out, imag))
}

/// Marching-on-in-time: `phi_n = lstsq(omega_0, g_n - sum_{l<n} omega_{n-l} phi_l)`.
pub fn mot_solve(weights: &[DMatrix<f64>], rhs: &RhsSeries, rank_tol: f64) -> Result<DensityHistory> {
    let Some(w0) = weights.first() else {
        return Err(Error::DimensionMismatch("empty weight sequence".into()));
    };
    if weights.len() != rhs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} right-hand sides",
            weights.len(),
            rhs.len()
        )));
    }
    let (rows, cols) = w0.shape();
    if rhs.dim() != rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of size {} for {rows} rows",
            rhs.dim()
        )));
    }
    let scale = weights
        .iter()
        .flat_map(|w| w.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = fft_zero_tolerance(f64::EPSILON) * scale;
    let zero_columns = (0..cols)
        .filter(|&j| w0.column(j).iter().all(|v| v.abs() <= tol))
        .count();
    if zero_columns > 0 {
        return Err(Error::MotInfeasible {
            zero_columns,
            columns: cols,
        });
    }
    let w0c = w0.map(|v| Complex64::new(v, 0.0));
    let factor = LeastSquaresFactor::new(&w0c, rank_tol);
    if factor.rank() < cols {
        return Err(Error::MotRankDeficient {
            rank: factor.rank(),
            columns: cols,
        });
    }
    let mut phi: Vec<DVector<f64>> = Vec::with_capacity(rhs.len());
    for n in 0..rhs.len() {
        let mut b = DVector::from_column_slice(&rhs.values[n]);
        for (l, p) in phi.iter().enumerate() {
            b -= &weights[n - l] * p;
        }
        let x = factor.solve(&b.map(|v| Complex64::new(v, 0.0)))?;
        phi.push(x.map(|z| z.re));
    }
    Ok(DensityHistory {
        phi: phi.into_iter().map(|v| v.iter().copied().collect()).collect(),
        residual_imag: 0.0,
    })
}

/// Field values `u(t_n, X_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    /// `values[n][l]`.
    pub values: Vec<Vec<f64>>,
    pub grid: TimeGrid,
    pub residual_imag: f64,
}

impl FieldSamples {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn points(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// `u = S(d_t) phi` via the same contour transform as the solve.
pub fn evaluate_field(
    density: &DensityHistory,
    observation: &dyn ContourOperator,
    grid: &TimeGrid,
    options: &SolverOptions,
) -> Result<FieldSamples> {
    if density.len() != grid.len() {
        return Err(Error::MisalignedGrids(format!(
            "density has {} samples, grid has {}",
            density.len(),
            grid.len()
        )));
    }
    let dim = density.phi.first().map_or(0, Vec::len);
    if dim != observation.cols() {
        return Err(Error::DimensionMismatch(format!(
            "density of size {dim} for an observation operator with {} columns",
            observation.cols()
        )));
    }
    let transform = ContourTransform::new(grid);
    let phi_hat = transform.forward_real_series(&density.phi)?;
    let zetas = grid.contour_points();
    let indices = solved_indices(grid, options.use_symmetry);
    let apply = |k: usize| -> Result<Vec<Complex64>> {
        let s = observation.matrix(zetas[k])?;
        let u = s * DVector::from_column_slice(&phi_hat[k]);
        Ok(u.iter().copied().collect())
    };
    let results: Vec<Result<Vec<Complex64>>> =
        run_parallel(options.workers, || indices.clone().into_par_iter().map(apply).collect())?;
    let mut u_hat = vec![vec![Complex64::new(0.0, 0.0); observation.rows()]; grid.len()];
    for (k, r) in indices.zip(results) {
        u_hat[k] = r?;
    }
    if options.use_symmetry {
        fill_by_conjugation(&mut u_hat);
    }
    let (values, residual_imag) = transform.inverse_series_to_real(&u_hat)?;
    Ok(FieldSamples {
        values,
        grid: *grid,
        residual_imag,
    })
}

/// Step ratio between a coarse grid and a nested fine grid.
pub fn alignment_ratio(coarse: &TimeGrid, fine: &TimeGrid) -> Result<usize> {
    if fine.steps() % coarse.steps().max(1) != 0 {
        return Err(Error::MisalignedGrids(format!(
            "{} steps do not refine {} steps",
            fine.steps(),
            coarse.steps()
        )));
    }
    let ratio = fine.steps() / coarse.steps().max(1);
    let rel = (coarse.final_time() - fine.final_time()).abs() / fine.final_time().abs().max(1e-300);
    if rel > 1e-12 {
        return Err(Error::MisalignedGrids(format!(
            "final times {} and {} differ",
            coarse.final_time(),
            fine.final_time()
        )));
    }
    Ok(ratio)
}

/// `max_{n, l} |u_h(t_n, X_l) - u_ref(t_n, X_l)|` with the reference on a
/// nested (possibly finer) grid.
pub fn max_error(u_h: &FieldSamples, u_ref: &FieldSamples) -> Result<f64> {
    let ratio = alignment_ratio(&u_h.grid, &u_ref.grid)?;
    if u_h.points() != u_ref.points() {
        return Err(Error::DimensionMismatch(format!(
            "{} and {} observation points",
            u_h.points(),
            u_ref.points()
        )));
    }
    let mut err: f64 = 0.0;
    for (n, row) in u_h.values.iter().enumerate() {
        for (a, b) in row.iter().zip(&u_ref.values[n * ratio]) {
            err = err.max((a - b).abs());
        }
    }
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::MultistepRule;

    fn scalar_op<F>(f: F) -> FnOperator<impl Fn(Complex64) -> Result<DMatrix<Complex64>> + Sync>
    where
        F: Fn(Complex64) -> Result<Complex64> + Sync,
    {
        FnOperator::new(1, 1, move |z| Ok(DMatrix::from_element(1, 1, f(z)?)))
    }

    fn series(values: Vec<f64>) -> RhsSeries {
        RhsSeries {
            values: values.into_iter().map(|v| vec![v]).collect(),
        }
    }

    #[test]
    fn identity_symbol_returns_data() {
        let grid = TimeGrid::new(31, 3.0, f64::EPSILON).unwrap();
        let data: Vec<f64> = grid.times().map(|t| (t * 2.0).sin() * t).collect();
        let op = scalar_op(|_| Ok(Complex64::new(1.0, 0.0)));
        let (phi, report) = all_at_once_solve(&op, &series(data.clone()), &grid, &SolverOptions::default()).unwrap();
        assert_eq!(report.records.len(), 17);
        for (p, g) in phi.phi.iter().zip(&data) {
            assert!((p[0] - g).abs() < 1e-7);
        }
    }

    #[test]
    fn shifted_symbol_advances_data() {
        // symbol zeta^m: solution is the data advanced by m steps
        let m = 3;
        let grid = TimeGrid::new(40, 4.0, f64::EPSILON).unwrap();
        let data: Vec<f64> = grid.times().map(|t| (-(t - 2.0) * (t - 2.0) * 4.0).exp()).collect();
        let op = scalar_op(move |z| Ok(z.powu(m as u32)));
        let (phi, _) = all_at_once_solve(&op, &series(data.clone()), &grid, &SolverOptions::default()).unwrap();
        for n in 0..grid.len() - m {
            assert!((phi.phi[n][0] - data[n + m]).abs() < 1e-6, "n = {n}");
        }
    }

    #[test]
    fn half_and_full_solves_agree() {
        let grid = TimeGrid::new(20, 2.0, f64::EPSILON).unwrap();
        let data: Vec<f64> = grid.times().map(|t| t * t * (1.0 - t).cos()).collect();
        let dt = grid.dt();
        let op = scalar_op(move |z| Ok(dt / MultistepRule::Bdf2.delta(z)? + 1.0));
        let mut opts = SolverOptions::default();
        let (a, _) = all_at_once_solve(&op, &series(data.clone()), &grid, &opts).unwrap();
        opts.use_symmetry = false;
        let (b, rep) = all_at_once_solve(&op, &series(data), &grid, &opts).unwrap();
        assert_eq!(rep.records.len(), 21);
        assert_eq!(a.phi, b.phi);
    }

    #[test]
    fn mot_with_identity_weights() {
        let weights = vec![DMatrix::identity(2, 2), DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)];
        let rhs = RhsSeries {
            values: vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
        };
        let phi = mot_solve(&weights, &rhs, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(phi.phi, rhs.values);
    }

    #[test]
    fn mot_rejects_zero_leading_weight() {
        let weights = vec![DMatrix::zeros(2, 2), DMatrix::identity(2, 2)];
        let rhs = RhsSeries {
            values: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
        };
        assert_eq!(
            mot_solve(&weights, &rhs, DEFAULT_RANK_TOL),
            Err(Error::MotInfeasible {
                zero_columns: 2,
                columns: 2
            })
        );
    }

    #[test]
    fn zero_density_gives_zero_field() {
        let grid = TimeGrid::new(8, 1.0, f64::EPSILON).unwrap();
        let density = DensityHistory {
            phi: vec![vec![0.0; 3]; 9],
            residual_imag: 0.0,
        };
        let op = FnOperator::new(2, 3, |_| Ok(DMatrix::from_element(2, 3, Complex64::new(1.0, 0.5))));
        let u = evaluate_field(&density, &op, &grid, &SolverOptions::default()).unwrap();
        assert_eq!(u.max_abs(), 0.0);
    }

    #[test]
    fn max_error_alignment() {
        let coarse = TimeGrid::new(32, 1.0, f64::EPSILON).unwrap();
        let fine = TimeGrid::new(1024, 1.0, f64::EPSILON).unwrap();
        assert_eq!(alignment_ratio(&coarse, &fine).unwrap(), 32);
        let odd = TimeGrid::new(48, 1.0, f64::EPSILON).unwrap();
        assert!(alignment_ratio(&odd, &fine).is_err());
        let f = |g: &TimeGrid| FieldSamples {
            values: g.times().map(|t| vec![t.sin()]).collect(),
            grid: *g,
            residual_imag: 0.0,
        };
        let a = f(&coarse);
        let b = f(&fine);
        assert_eq!(max_error(&a, &b).unwrap(), 0.0);
        let mut c = a.clone();
        c.values[5][0] += 0.5;
        assert!((max_error(&c, &b).unwrap() - 0.5).abs() < 1e-15);
    }
}
