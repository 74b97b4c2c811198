//! Frequency-domain single-layer matrices for MFS and Galerkin
//! discretizations, their modified (entrywise shifted) counterparts,
//! right-hand sides and observation matrices.

pub mod galerkin;

pub use galerkin::{GalerkinQuadrature, GalerkinRules};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cq::{MultistepRule, TimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{
    distances, galerkin_distances, MfsLayout, PanelMesh, Point, ShiftData,
};
use crate::kernels::{shifted_kernel, KernelFamily};

/// A complex matrix tagged with the frequency it was assembled at.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatrix {
    pub entries: DMatrix<Complex64>,
    pub s: Complex64,
    /// Contour point for modified assemblies.
    pub zeta: Option<Complex64>,
}

impl FrequencyMatrix {
    pub fn shape(&self) -> (usize, usize) {
        self.entries.shape()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Real boundary data `g_n` sampled on the test degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsSeries {
    /// `values[n][i]`, `n = 0..=N`.
    pub values: Vec<Vec<f64>>,
}

impl RhsSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Galerkin BEM on a panel mesh with its quadrature rules.
#[derive(Debug, Clone)]
pub struct GalerkinBem {
    pub mesh: PanelMesh,
    pub rules: GalerkinRules,
}

impl GalerkinBem {
    pub fn new(mesh: PanelMesh, quadrature: GalerkinQuadrature) -> Self {
        Self {
            mesh,
            rules: GalerkinRules::new(quadrature),
        }
    }
}

/// Spatial discretization of the single-layer operator.
#[derive(Debug, Clone)]
pub enum Discretization {
    Mfs(MfsLayout),
    Galerkin(GalerkinBem),
}

impl Discretization {
    /// Number of test degrees of freedom (equations).
    pub fn rows(&self) -> usize {
        match self {
            Discretization::Mfs(l) => l.rows(),
            Discretization::Galerkin(g) => g.mesh.len(),
        }
    }

    /// Number of unknowns.
    pub fn cols(&self) -> usize {
        match self {
            Discretization::Mfs(l) => l.cols(),
            Discretization::Galerkin(g) => g.mesh.len(),
        }
    }

    /// Distances `r_ij` (lower bounds for Galerkin) driving the shifts.
    pub fn distances(&self) -> DMatrix<f64> {
        match self {
            Discretization::Mfs(l) => distances(&l.collocation, &l.sources),
            Discretization::Galerkin(g) => galerkin_distances(&g.mesh),
        }
    }

    pub fn shift_data(&self, dt: f64) -> Result<ShiftData> {
        ShiftData::from_distances(self.distances(), dt)
    }

    /// Observation-to-unknown distances (lower bounds for Galerkin).
    pub fn observation_distances(&self, points: &[Point]) -> Result<DMatrix<f64>> {
        let r = match self {
            Discretization::Mfs(l) => distances(points, &l.sources),
            Discretization::Galerkin(g) => DMatrix::from_fn(points.len(), g.mesh.len(), |l, j| {
                g.mesh.panels[j].distance_lower_bound(&points[l])
            }),
        };
        if let Discretization::Galerkin(g) = self {
            for (l, p) in points.iter().enumerate() {
                for (j, panel) in g.mesh.panels.iter().enumerate() {
                    let true_gap = (p - panel.start).norm().min((p - panel.end).norm());
                    if r[(l, j)] == 0.0 && true_gap < 1e-12 {
                        return Err(Error::InvalidGeometry(format!(
                            "observation point {l} lies on panel {j}"
                        )));
                    }
                }
            }
        }
        if r.iter().any(|&v| v == 0.0) && matches!(self, Discretization::Mfs(_)) {
            return Err(Error::InvalidGeometry(
                "observation point coincides with a source".into(),
            ));
        }
        Ok(r)
    }

    pub fn observation_shift_data(&self, points: &[Point], dt: f64) -> Result<ShiftData> {
        ShiftData::from_distances(self.observation_distances(points)?, dt)
    }

    /// `sum_i data(x) phi_i` on the test side: point samples for MFS, panel
    /// integrals for Galerkin.
    pub fn project(&self, data: &dyn Fn(&Point) -> f64) -> Vec<f64> {
        match self {
            Discretization::Mfs(l) => l.collocation.iter().map(data).collect(),
            Discretization::Galerkin(g) => (0..g.mesh.len())
                .map(|j| galerkin::panel_data_integral(&g.mesh, &g.rules, j, data))
                .collect(),
        }
    }

    /// Points and weights realising [`Discretization::project`] for each
    /// unknown.
    pub fn projection_nodes(&self) -> Vec<Vec<(Point, f64)>> {
        match self {
            Discretization::Mfs(l) => l.collocation.iter().map(|x| vec![(*x, 1.0)]).collect(),
            Discretization::Galerkin(g) => (0..g.mesh.len())
                .map(|j| galerkin::panel_data_nodes(&g.mesh, &g.rules, j))
                .collect(),
        }
    }

    /// `[e^{s t_ij} V(s)]_ij` with shift times `t_ij` (zero when absent).
    fn shifted_system(
        &self,
        family: KernelFamily,
        s: Complex64,
        times: Option<(&DMatrix<usize>, f64)>,
    ) -> Result<DMatrix<Complex64>> {
        let t_of = |i: usize, j: usize| times.map_or(0.0, |(m, dt)| m[(i, j)] as f64 * dt);
        match self {
            Discretization::Mfs(l) => {
                let mut out = DMatrix::from_element(l.rows(), l.cols(), Complex64::new(0.0, 0.0));
                for j in 0..l.cols() {
                    for i in 0..l.rows() {
                        let r = (l.collocation[i] - l.sources[j]).norm();
                        out[(i, j)] = shifted_kernel(family, s, r, t_of(i, j))?;
                    }
                }
                Ok(out)
            }
            Discretization::Galerkin(g) => {
                if family != KernelFamily::D2 {
                    return Err(Error::InvalidGeometry(
                        "Galerkin assembly on curves requires the 2D kernel".into(),
                    ));
                }
                let n = g.mesh.len();
                let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
                for i in 0..n {
                    for j in i..n {
                        let t = t_of(i, j);
                        let kernel = |r: f64| shifted_kernel(family, s, r, t);
                        let v = galerkin::panel_pair_integral(&g.mesh, &g.rules, i, j, s.norm(), &kernel)
                            .map_err(|e| match e {
                                Error::Domain(msg) => Error::Domain(format!("panel pair ({i}, {j}): {msg}")),
                                other => other,
                            })?;
                        out[(i, j)] = v;
                        out[(j, i)] = v;
                    }
                }
                Ok(out)
            }
        }
    }

    fn shifted_observation(
        &self,
        family: KernelFamily,
        points: &[Point],
        s: Complex64,
        times: Option<(&DMatrix<usize>, f64)>,
    ) -> Result<DMatrix<Complex64>> {
        let t_of = |i: usize, j: usize| times.map_or(0.0, |(m, dt)| m[(i, j)] as f64 * dt);
        let mut out = DMatrix::from_element(points.len(), self.cols(), Complex64::new(0.0, 0.0));
        match self {
            Discretization::Mfs(l) => {
                for j in 0..l.cols() {
                    for (i, x) in points.iter().enumerate() {
                        let r = (x - l.sources[j]).norm();
                        out[(i, j)] = shifted_kernel(family, s, r, t_of(i, j))?;
                    }
                }
            }
            Discretization::Galerkin(g) => {
                for j in 0..g.mesh.len() {
                    for (i, x) in points.iter().enumerate() {
                        let t = t_of(i, j);
                        let kernel = |r: f64| shifted_kernel(family, s, r, t);
                        out[(i, j)] =
                            galerkin::panel_point_integral(&g.mesh, &g.rules, j, x, s.norm(), &kernel)?;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `(V_MFS(s))_ij = K(s, |x_i - y_j|)`.
pub fn assemble_mfs(layout: &MfsLayout, family: KernelFamily, s: Complex64) -> Result<FrequencyMatrix> {
    let entries = Discretization::Mfs(layout.clone()).shifted_system(family, s, None)?;
    Ok(FrequencyMatrix {
        entries,
        s,
        zeta: None,
    })
}

/// Galerkin matrix `int_{Gamma_i} int_{Gamma_j} K(s, |x - y|)`.
pub fn assemble_galerkin(bem: &GalerkinBem, s: Complex64) -> Result<FrequencyMatrix> {
    let entries = Discretization::Galerkin(bem.clone()).shifted_system(KernelFamily::D2, s, None)?;
    Ok(FrequencyMatrix {
        entries,
        s,
        zeta: None,
    })
}

/// Standard assembly `V(s)`.
pub fn assemble(disc: &Discretization, family: KernelFamily, s: Complex64) -> Result<FrequencyMatrix> {
    Ok(FrequencyMatrix {
        entries: disc.shifted_system(family, s, None)?,
        s,
        zeta: None,
    })
}

/// Applies `zeta^{m_ij}` entrywise.
fn apply_zeta_powers(entries: &mut DMatrix<Complex64>, m: &DMatrix<usize>, zeta: Complex64) {
    let mut cache: Vec<Option<Complex64>> = Vec::new();
    for (e, &mij) in entries.iter_mut().zip(m.iter()) {
        if mij >= cache.len() {
            cache.resize(mij + 1, None);
        }
        let p = *cache[mij].get_or_insert_with(|| zeta.powu(mij as u32));
        *e *= p;
    }
}

/// Modified matrix `zeta^{m_ij} e^{m_ij delta(zeta)} V(delta(zeta)/dt)_ij`,
/// with the exponential folded into the kernel evaluation.
pub fn assemble_modified(
    disc: &Discretization,
    family: KernelFamily,
    shifts: &ShiftData,
    rule: MultistepRule,
    grid: &TimeGrid,
    zeta: Complex64,
) -> Result<FrequencyMatrix> {
    check_shift_shape(shifts, disc.rows(), disc.cols())?;
    let s = rule.delta(zeta)? / grid.dt();
    let mut entries = disc.shifted_system(family, s, Some((&shifts.m, grid.dt())))?;
    apply_zeta_powers(&mut entries, &shifts.m, zeta);
    Ok(FrequencyMatrix {
        entries,
        s,
        zeta: Some(zeta),
    })
}

fn check_shift_shape(shifts: &ShiftData, rows: usize, cols: usize) -> Result<()> {
    if shifts.m.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch(format!(
            "shift matrix {:?} for a {rows} x {cols} system",
            shifts.m.shape()
        )));
    }
    Ok(())
}

/// Boundary data projected at every time step `t_n`.
pub fn project_rhs(
    disc: &Discretization,
    data: &(dyn Fn(f64, &Point) -> f64 + Sync),
    grid: &TimeGrid,
) -> RhsSeries {
    let values = grid
        .times()
        .map(|t| disc.project(&|x: &Point| data(t, x)))
        .collect();
    RhsSeries { values }
}

/// Same as [`project_rhs`] for data given as whole time series per point:
/// `series(x)` must return the `N + 1` values `data(t_n, x)`.
pub fn project_rhs_series(
    disc: &Discretization,
    series: &(dyn Fn(&Point) -> Vec<f64> + Sync),
    grid: &TimeGrid,
) -> Result<RhsSeries> {
    use rayon::prelude::*;
    let nodes = disc.projection_nodes();
    let columns: Vec<Result<Vec<f64>>> = nodes
        .par_iter()
        .map(|dof| {
            let mut acc = vec![0.0; grid.len()];
            for (x, w) in dof {
                let s = series(x);
                if s.len() != grid.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "data series of length {} for {} time steps",
                        s.len(),
                        grid.len()
                    )));
                }
                for (a, v) in acc.iter_mut().zip(s) {
                    *a += w * v;
                }
            }
            Ok(acc)
        })
        .collect();
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    let values = (0..grid.len())
        .map(|n| columns.iter().map(|c| c[n]).collect())
        .collect();
    Ok(RhsSeries { values })
}

/// Potential matrix `S(s)` from the unknowns to observation points.
pub fn assemble_observation(
    disc: &Discretization,
    family: KernelFamily,
    points: &[Point],
    s: Complex64,
) -> Result<FrequencyMatrix> {
    disc.observation_distances(points)?;
    Ok(FrequencyMatrix {
        entries: disc.shifted_observation(family, points, s, None)?,
        s,
        zeta: None,
    })
}

/// Modified potential matrix with observation shifts.
pub fn assemble_observation_modified(
    disc: &Discretization,
    family: KernelFamily,
    points: &[Point],
    shifts: &ShiftData,
    rule: MultistepRule,
    grid: &TimeGrid,
    zeta: Complex64,
) -> Result<FrequencyMatrix> {
    check_shift_shape(shifts, points.len(), disc.cols())?;
    let s = rule.delta(zeta)? / grid.dt();
    let mut entries = disc.shifted_observation(family, points, s, Some((&shifts.m, grid.dt())))?;
    apply_zeta_powers(&mut entries, &shifts.m, zeta);
    Ok(FrequencyMatrix {
        entries,
        s,
        zeta: Some(zeta),
    })
}

/// How the convolution operator is discretized in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Standard,
    Modified,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Standard => "standard",
            Scheme::Modified => "modified",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(Scheme::Standard),
            "modified" => Ok(Scheme::Modified),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// A spatial discretization bound to a time grid: produces the matrix
/// symbol at every contour point.
#[derive(Debug, Clone)]
pub struct ContourAssembler {
    pub disc: Discretization,
    pub family: KernelFamily,
    pub rule: MultistepRule,
    pub grid: TimeGrid,
    /// Zero shifts for the standard scheme.
    pub shifts: ShiftData,
    pub scheme: Scheme,
}

impl ContourAssembler {
    pub fn new(
        disc: Discretization,
        family: KernelFamily,
        rule: MultistepRule,
        grid: TimeGrid,
        scheme: Scheme,
    ) -> Result<Self> {
        let shifts = disc.shift_data(grid.dt())?;
        let shifts = match scheme {
            Scheme::Standard => shifts.zeroed(),
            Scheme::Modified => shifts,
        };
        Ok(Self {
            disc,
            family,
            rule,
            grid,
            shifts,
            scheme,
        })
    }

    /// System matrix at contour point `zeta`.
    pub fn matrix(&self, zeta: Complex64) -> Result<DMatrix<Complex64>> {
        Ok(assemble_modified(&self.disc, self.family, &self.shifts, self.rule, &self.grid, zeta)?.entries)
    }

    /// Observation assembler for `points` consistent with this scheme.
    pub fn observation(&self, points: &[Point]) -> Result<ObservationAssembler> {
        let shifts = self.disc.observation_shift_data(points, self.grid.dt())?;
        let shifts = match self.scheme {
            Scheme::Standard => shifts.zeroed(),
            Scheme::Modified => shifts,
        };
        Ok(ObservationAssembler {
            disc: self.disc.clone(),
            family: self.family,
            rule: self.rule,
            grid: self.grid,
            points: points.to_vec(),
            shifts,
        })
    }
}

/// Potential matrices from the unknowns to a fixed set of points.
#[derive(Debug, Clone)]
pub struct ObservationAssembler {
    pub disc: Discretization,
    pub family: KernelFamily,
    pub rule: MultistepRule,
    pub grid: TimeGrid,
    pub points: Vec<Point>,
    pub shifts: ShiftData,
}

impl ObservationAssembler {
    pub fn matrix(&self, zeta: Complex64) -> Result<DMatrix<Complex64>> {
        Ok(assemble_observation_modified(
            &self.disc,
            self.family,
            &self.points,
            &self.shifts,
            self.rule,
            &self.grid,
            zeta,
        )?
        .entries)
    }

    /// Same points with all observation shifts removed.
    pub fn unshifted(&self) -> Self {
        Self {
            shifts: self.shifts.zeroed(),
            ..self.clone()
        }
    }
}
