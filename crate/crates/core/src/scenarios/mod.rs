//! The experiment scenarios: disk, two ellipses and semicircles in the
//! exterior, the unit disk from the inside, plus convergence studies,
//! snapshot grids and file output.

pub mod config;
pub mod incident;

pub use incident::{gaussian_incident, plane_wave, window, GaussianSampler, IncidentSpec};

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::assembly::{
    project_rhs_series, ContourAssembler, Discretization, GalerkinBem, GalerkinQuadrature, Scheme,
};
use crate::cq::{MultistepRule, TimeGrid, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::geometry::{
    mfs_points, panel_mesh, ring_points, MfsShape, ParametricBoundary, Point, Shape,
};
use crate::kernels::KernelFamily;
use crate::solver::{
    all_at_once_solve, evaluate_field, matrix_weights_fft, max_error, mot_solve, DensityHistory,
    FieldSamples, SolveReport, SolverOptions,
};

pub const DEFAULT_FINAL_TIME: f64 = 10.0;
pub const DEFAULT_STEPS: usize = 256;
pub const OBSERVATION_COUNT: usize = 8;
pub const SNAPSHOT_TIMES: [f64; 6] = [2.5, 3.75, 5.0, 6.25, 7.5, 8.75];
/// Largest ratio of total to incident field accepted without a warning.
pub const ENERGY_BOUND: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Disk,
    TwoEllipses,
    Semicircles,
    DiskInterior,
}

impl Geometry {
    pub fn boundary(self) -> ParametricBoundary {
        match self {
            Geometry::Disk | Geometry::DiskInterior => ParametricBoundary::shape(Shape::Disk),
            Geometry::TwoEllipses => ParametricBoundary::shape(Shape::TwoEllipses),
            Geometry::Semicircles => ParametricBoundary::shape(Shape::Semicircles),
        }
    }

    pub fn problem(self) -> Problem {
        match self {
            Geometry::DiskInterior => Problem::Interior,
            _ => Problem::Exterior,
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Disk => "disk",
            Geometry::TwoEllipses => "two_ellipses",
            Geometry::Semicircles => "semicircles",
            Geometry::DiskInterior => "disk_interior",
        })
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "disk" => Ok(Geometry::Disk),
            "two_ellipses" | "ellipses" => Ok(Geometry::TwoEllipses),
            "semicircles" => Ok(Geometry::Semicircles),
            "disk_interior" | "interior" => Ok(Geometry::DiskInterior),
            other => Err(Error::Config(format!("unknown geometry `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Exterior,
    Interior,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Exterior => "exterior",
            Problem::Interior => "interior",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exterior" => Ok(Problem::Exterior),
            "interior" => Ok(Problem::Interior),
            other => Err(Error::Config(format!("unknown problem `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spatial {
    Mfs { m: usize, k: usize, radius: f64 },
    Galerkin { m: usize },
}

/// How the fully discrete system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    AllAtOnce,
    MarchingOnInTime,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::AllAtOnce => "all_at_once",
            SolveMethod::MarchingOnInTime => "mot",
        })
    }
}

impl FromStr for SolveMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all_at_once" | "all-at-once" => Ok(SolveMethod::AllAtOnce),
            "mot" | "marching" => Ok(SolveMethod::MarchingOnInTime),
            other => Err(Error::Config(format!("unknown solver method `{other}`"))),
        }
    }
}

/// Regular `x, y` grid and times for snapshots of the total field.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSpec {
    pub times: Vec<f64>,
    /// `(min, max, count)`.
    pub x: (f64, f64, usize),
    pub y: (f64, f64, usize),
}

impl SnapshotSpec {
    pub fn points(&self) -> Vec<Point> {
        let axis = |(a, b, n): (f64, f64, usize)| -> Vec<f64> {
            if n == 1 {
                return vec![a];
            }
            (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
        };
        let xs = axis(self.x);
        let ys = axis(self.y);
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| Point::new(x, y)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub geometry: Geometry,
    pub problem: Problem,
    pub spatial: Spatial,
    pub rule: MultistepRule,
    pub scheme: Scheme,
    pub steps: usize,
    pub final_time: f64,
    pub eps: f64,
    pub incident: IncidentSpec,
    pub observation: Vec<Point>,
    /// Apply travel-time shifts to the potential evaluation as well.
    pub shifted_observation: bool,
    pub method: SolveMethod,
    pub workers: Option<usize>,
    pub use_symmetry: bool,
    pub output: Option<PathBuf>,
    pub snapshots: SnapshotSpec,
    pub quadrature: GalerkinQuadrature,
}

impl Scenario {
    /// Desk-scale defaults for each geometry.
    pub fn preset(geometry: Geometry) -> Self {
        let down = [0.0, -1.0];
        let diagonal = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let (spatial, incident, ring, x, y) = match geometry {
            Geometry::Disk => (
                Spatial::Mfs {
                    m: 200,
                    k: 100,
                    radius: 0.9,
                },
                IncidentSpec::plane_wave(1.0, down),
                2.0,
                (-4.0, 4.0, 80),
                (-4.0, 4.0, 80),
            ),
            Geometry::TwoEllipses => (
                Spatial::Mfs {
                    m: 200,
                    k: 100,
                    radius: 0.9,
                },
                IncidentSpec::plane_wave(1.0, down),
                4.0,
                (-6.0, 6.0, 96),
                (-4.0, 4.0, 64),
            ),
            Geometry::Semicircles => (
                Spatial::Galerkin { m: 100 },
                IncidentSpec::plane_wave(1.0, diagonal),
                2.0,
                (-3.0, 3.0, 80),
                (-3.0, 3.0, 80),
            ),
            Geometry::DiskInterior => (
                Spatial::Mfs {
                    m: 200,
                    k: 100,
                    radius: 1.1,
                },
                IncidentSpec::gaussian(),
                0.5,
                (-1.0, 1.0, 80),
                (-1.0, 1.0, 80),
            ),
        };
        Scenario {
            name: geometry.to_string(),
            geometry,
            problem: geometry.problem(),
            spatial,
            rule: MultistepRule::Bdf2,
            scheme: Scheme::Modified,
            steps: DEFAULT_STEPS,
            final_time: DEFAULT_FINAL_TIME,
            eps: DEFAULT_EPS,
            incident,
            observation: ring_points(OBSERVATION_COUNT, ring),
            shifted_observation: true,
            method: SolveMethod::AllAtOnce,
            workers: None,
            use_symmetry: true,
            output: None,
            snapshots: SnapshotSpec {
                times: SNAPSHOT_TIMES.to_vec(),
                x,
                y,
            },
            quadrature: GalerkinQuadrature::default(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_config(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.problem != self.geometry.problem() {
            return Err(Error::Config(format!(
                "geometry `{}` describes an {} problem, not {}",
                self.geometry,
                self.geometry.problem(),
                self.problem
            )));
        }
        if self.steps == 0 {
            return Err(Error::Config("time.steps must be positive".into()));
        }
        if !(self.final_time > 0.0) {
            return Err(Error::Config(format!("final time {} must be positive", self.final_time)));
        }
        self.incident.validate()?;
        if let Spatial::Mfs { radius, .. } = self.spatial {
            let ok = match self.problem {
                Problem::Exterior => radius < 1.0,
                Problem::Interior => radius > 1.0,
            };
            if !ok {
                return Err(Error::Config(format!(
                    "MFS radius {radius} puts the sources on the wrong side for an {} problem",
                    self.problem
                )));
            }
            if self.geometry == Geometry::Semicircles {
                return Err(Error::Config(
                    "the semicircle domain is only supported with Galerkin BEM".into(),
                ));
            }
        }
        if self.observation.is_empty() {
            return Err(Error::Config("at least one observation point is needed".into()));
        }
        let boundary = self.geometry.boundary();
        for p in &self.observation {
            let inside = boundary.contains(p);
            if inside != (self.problem == Problem::Interior) {
                return Err(Error::Config(format!(
                    "observation point ({}, {}) is not in the {} domain",
                    p.x, p.y, self.problem
                )));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.steps, self.final_time, self.eps)
    }

    pub fn discretization(&self) -> Result<Discretization> {
        match self.spatial {
            Spatial::Mfs { m, k, radius } => {
                let shape = match self.geometry {
                    Geometry::Disk | Geometry::DiskInterior => MfsShape::Disk,
                    Geometry::TwoEllipses => MfsShape::TwoEllipses,
                    Geometry::Semicircles => {
                        return Err(Error::Config(
                            "the semicircle domain is only supported with Galerkin BEM".into(),
                        ))
                    }
                };
                Ok(Discretization::Mfs(mfs_points(shape, m, k, radius)?))
            }
            Spatial::Galerkin { m } => {
                let mesh = panel_mesh(&self.geometry.boundary(), m)?;
                Ok(Discretization::Galerkin(GalerkinBem::new(mesh, self.quadrature)))
            }
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            workers: self.workers,
            use_symmetry: self.use_symmetry,
            ..SolverOptions::default()
        }
    }

    /// `u^inc(t_n, x)` for every step of `grid`.
    pub fn incident_series(&self, grid: &TimeGrid, points: &[Point]) -> Vec<Vec<f64>> {
        let r_max = points
            .iter()
            .map(|p| incident_reach(&self.incident, p))
            .fold(0.0, f64::max);
        match GaussianSampler::new(&self.incident, grid.final_time(), r_max) {
            Some(sampler) => points
                .iter()
                .map(|p| sampler.series(p, grid.dt(), grid.len()))
                .collect(),
            None => points
                .iter()
                .map(|p| grid.times().map(|t| self.incident.incident(t, p)).collect())
                .collect(),
        }
    }
}

fn incident_reach(spec: &IncidentSpec, p: &Point) -> f64 {
    match spec {
        IncidentSpec::GaussianPulse { center, .. } => (p - Point::new(center[0], center[1])).norm(),
        IncidentSpec::WindowedPlaneWave { .. } => 0.0,
    }
}

/// Projected Dirichlet data `g = -u^inc` for every time step.
pub fn scenario_rhs(
    sc: &Scenario,
    disc: &Discretization,
    grid: &TimeGrid,
) -> Result<crate::assembly::RhsSeries> {
    let r_max = disc
        .projection_nodes()
        .iter()
        .flatten()
        .map(|(p, _)| incident_reach(&sc.incident, p))
        .fold(0.0, f64::max);
    match GaussianSampler::new(&sc.incident, grid.final_time(), r_max) {
        Some(sampler) => project_rhs_series(
            disc,
            &|x: &Point| sampler.series(x, grid.dt(), grid.len()).into_iter().map(|v| -v).collect(),
            grid,
        ),
        None => {
            let spec = sc.incident;
            project_rhs_series(
                disc,
                &|x: &Point| grid.times().map(|t| spec.dirichlet_data(t, x)).collect(),
                grid,
            )
        }
    }
}

/// Everything one solve produces.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub grid: TimeGrid,
    pub assembler: ContourAssembler,
    pub density: DensityHistory,
    pub field: FieldSamples,
    pub report: SolveReport,
}

/// Assembles, solves and evaluates the scattered field at the observation
/// points, without writing anything.
pub fn solve_scenario(sc: &Scenario) -> Result<ScenarioRun> {
    sc.validate()?;
    let grid = sc.grid()?;
    let disc = sc.discretization()?;
    let rhs = scenario_rhs(sc, &disc, &grid)?;
    let assembler = ContourAssembler::new(disc, KernelFamily::D2, sc.rule, grid, sc.scheme)?;
    let options = sc.solver_options();
    let (density, mut report) = match sc.method {
        SolveMethod::AllAtOnce => all_at_once_solve(&assembler, &rhs, &grid, &options)?,
        SolveMethod::MarchingOnInTime => {
            let start = std::time::Instant::now();
            let (weights, imag) = matrix_weights_fft(&assembler, &grid, options.workers)?;
            let density = mot_solve(&weights, &rhs, options.rank_tol)?;
            let report = SolveReport {
                records: Vec::new(),
                wall_time: start.elapsed(),
                scheme: String::new(),
                rule: String::new(),
                residual_imag: imag,
                warnings: Vec::new(),
            };
            (density, report)
        }
    };
    report.scheme = sc.scheme.to_string();
    report.rule = sc.rule.to_string();
    let field = observe(&assembler, sc, &density, &sc.observation)?;
    if !field.residual_imag.is_finite() || field.residual_imag > 1e-6 * field.max_abs().max(f64::MIN_POSITIVE) {
        report.warnings.push(format!(
            "field evaluation discarded an imaginary part of {:e} (max |u| = {:e}); the scheme may be unstable",
            field.residual_imag,
            field.max_abs()
        ));
    }
    Ok(ScenarioRun {
        grid,
        assembler,
        density,
        field,
        report,
    })
}

fn observe(
    assembler: &ContourAssembler,
    sc: &Scenario,
    density: &DensityHistory,
    points: &[Point],
) -> Result<FieldSamples> {
    let obs = assembler.observation(points)?;
    let obs = if sc.shifted_observation { obs } else { obs.unshifted() };
    evaluate_field(density, &obs, &assembler.grid, &sc.solver_options())
}

/// Solves and, when the scenario names an output directory, writes
/// `scenario.cfg`, `points.csv`, `field.csv`, `density.csv` and `report.txt`.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioRun> {
    let run = solve_scenario(sc)?;
    if let Some(dir) = &sc.output {
        write_run(dir, sc, &run)?;
    }
    Ok(run)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_run(dir: &Path, sc: &Scenario, run: &ScenarioRun) -> Result<()> {
    create_dir(dir)?;
    write_file(&dir.join("scenario.cfg"), &sc.to_config())?;
    let mut points = String::from("index,x,y\n");
    for (l, p) in sc.observation.iter().enumerate() {
        let _ = writeln!(points, "{l},{:e},{:e}", p.x, p.y);
    }
    write_file(&dir.join("points.csv"), &points)?;
    write_file(&dir.join("field.csv"), &series_csv("u", &run.grid, &run.field.values))?;
    write_file(&dir.join("density.csv"), &series_csv("phi", &run.grid, &run.density.phi))?;
    write_file(&dir.join("report.txt"), &run.report.to_text())
}

fn series_csv(prefix: &str, grid: &TimeGrid, rows: &[Vec<f64>]) -> String {
    let width = rows.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for l in 0..width {
        let _ = write!(out, ",{prefix}{l}");
    }
    out.push('\n');
    for (n, row) in rows.iter().enumerate() {
        let _ = write!(out, "{:e}", grid.time(n));
        for v in row {
            let _ = write!(out, ",{v:e}");
        }
        out.push('\n');
    }
    out
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub steps: usize,
    pub rule: MultistepRule,
    pub scheme: Scheme,
    pub omega: Option<f64>,
    pub error: f64,
}

/// Every (rule, scheme) pair.
pub fn all_combinations() -> Vec<(MultistepRule, Scheme)> {
    MultistepRule::ALL
        .iter()
        .flat_map(|&r| [Scheme::Standard, Scheme::Modified].map(|s| (r, s)))
        .collect()
}

/// Maximum error at the observation points against `reference` for every
/// step count in `steps` and every (rule, scheme) in `combos`.
pub fn convergence_study(
    template: &Scenario,
    steps: &[usize],
    reference: &Scenario,
    combos: &[(MultistepRule, Scheme)],
) -> Result<Vec<ErrorRow>> {
    for &n in steps {
        if n == 0 || reference.steps % n != 0 {
            return Err(Error::MisalignedGrids(format!(
                "reference N = {} is not a multiple of N = {n}",
                reference.steps
            )));
        }
    }
    if reference.final_time != template.final_time || reference.observation != template.observation {
        return Err(Error::MisalignedGrids(
            "reference and template differ in final time or observation points".into(),
        ));
    }
    let u_ref = solve_scenario(reference)?.field;
    let mut rows = Vec::new();
    for &n in steps {
        for &(rule, scheme) in combos {
            let sc = Scenario {
                steps: n,
                rule,
                scheme,
                ..template.clone()
            };
            let u = solve_scenario(&sc)?.field;
            rows.push(ErrorRow {
                steps: n,
                rule,
                scheme,
                omega: sc.incident.omega(),
                error: max_error(&u, &u_ref)?,
            });
        }
    }
    Ok(rows)
}

pub fn error_table_csv(rows: &[ErrorRow]) -> String {
    let mut out = String::from("N,rule,scheme,omega,error\n");
    for r in rows {
        let omega = r.omega.map_or_else(|| "nan".to_string(), |w| w.to_string());
        let _ = writeln!(out, "{},{},{},{},{:e}", r.steps, r.rule, r.scheme, omega, r.error);
    }
    out
}

/// The total field on the snapshot grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub requested_time: f64,
    /// Grid time actually used, `n dt` with `n` nearest to the request.
    pub time: f64,
    /// `(x, y, value)`, with NaN at masked points.
    pub values: Vec<(f64, f64, f64)>,
}

impl Snapshot {
    pub fn masked(&self) -> usize {
        self.values.iter().filter(|v| v.2.is_nan()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,value\n");
        for (x, y, v) in &self.values {
            if v.is_nan() {
                let _ = writeln!(out, "{x:e},{y:e},nan");
            } else {
                let _ = writeln!(out, "{x:e},{y:e},{v:e}");
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub frames: Vec<Snapshot>,
    pub report: SolveReport,
    pub warnings: Vec<String>,
}

/// Points of the snapshot grid that lie outside the computational domain
/// or on the boundary.
pub fn snapshot_mask(sc: &Scenario, disc: &Discretization, points: &[Point]) -> Vec<bool> {
    let boundary = sc.geometry.boundary();
    points
        .iter()
        .map(|p| {
            let outside = boundary.contains(p) != (sc.problem == Problem::Interior);
            outside
                || disc
                    .observation_distances(std::slice::from_ref(p))
                    .map_or(true, |r| r.min() < 1e-9)
        })
        .collect()
}

/// Solves the scenario and samples `u + u^inc` on the snapshot grid at
/// `times` (the scenario's own list when empty).
pub fn render_snapshots(sc: &Scenario, times: &[f64]) -> Result<SnapshotSet> {
    let times = if times.is_empty() { &sc.snapshots.times[..] } else { times };
    let run = solve_scenario(sc)?;
    let grid = run.grid;
    let mut indices = Vec::with_capacity(times.len());
    for &t in times {
        if !(0.0..=grid.final_time() * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::Config(format!(
                "snapshot time {t} outside [0, {}]",
                grid.final_time()
            )));
        }
        indices.push(((t / grid.dt()).round() as usize).min(grid.steps()));
    }
    let all = sc.snapshots.points();
    let mask = snapshot_mask(sc, &run.assembler.disc, &all);
    let live: Vec<Point> = all.iter().zip(&mask).filter(|(_, m)| !**m).map(|(p, _)| *p).collect();
    let (scattered, incident) = if live.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let u = observe(&run.assembler, sc, &run.density, &live)?;
        let inc = sc.incident_series(&grid, &live);
        (u.values, inc)
    };
    let mut frames = Vec::with_capacity(times.len());
    let mut max_total: f64 = 0.0;
    let mut max_incident: f64 = 0.0;
    for (&t, &n) in times.iter().zip(&indices) {
        let mut values = Vec::with_capacity(all.len());
        let mut l = 0;
        for (p, &masked) in all.iter().zip(&mask) {
            let v = if masked {
                f64::NAN
            } else {
                let total = scattered[n][l] + incident[l][n];
                max_total = max_total.max(total.abs());
                l += 1;
                total
            };
            values.push((p.x, p.y, v));
        }
        frames.push(Snapshot {
            requested_time: t,
            time: grid.time(n),
            values,
        });
    }
    for series in &incident {
        max_incident = series.iter().fold(max_incident, |m, v| m.max(v.abs()));
    }
    let mut warnings = run.report.warnings.clone();
    if max_total > ENERGY_BOUND * max_incident {
        warnings.push(format!(
            "total field reaches {max_total:e}, more than {ENERGY_BOUND} times the incident maximum {max_incident:e}"
        ));
    }
    Ok(SnapshotSet {
        frames,
        report: run.report,
        warnings,
    })
}

/// Writes `snapshot_<k>.csv` per frame and `snapshots.txt` listing the
/// times and warnings.
pub fn write_snapshots(dir: &Path, set: &SnapshotSet) -> Result<()> {
    create_dir(dir)?;
    let mut index = String::from("# file, requested time, grid time, masked points\n");
    for (k, frame) in set.frames.iter().enumerate() {
        let name = format!("snapshot_{k}.csv");
        write_file(&dir.join(&name), &frame.to_csv())?;
        let _ = writeln!(
            index,
            "{name}, {}, {:e}, {}",
            frame.requested_time,
            frame.time,
            frame.masked()
        );
    }
    for w in &set.warnings {
        let _ = writeln!(index, "warning = {w}");
    }
    write_file(&dir.join("snapshots.txt"), &index)
}
