//! Scatterer boundaries, MFS point layouts, panel meshes and the distance
//! and shift matrices used by the modified scheme.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

pub type Point = Vector2<f64>;

/// Largest curvature of the conformal-map ellipse with semi-axes 0.6 and 0.4.
const ELLIPSE_MAX_CURVATURE: f64 = 0.6 / (0.4 * 0.4);

/// `f(z) = (i/2)(z + 1/(5z))` shifted horizontally by `offset`.
pub fn conformal_ellipse_map(z: Complex64, offset: f64) -> Result<Point> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidGeometry("conformal map is singular at z = 0".into()));
    }
    let w = Complex64::new(0.0, 0.5) * (z + 1.0 / (5.0 * z));
    Ok(Point::new(w.re + offset, w.im))
}

/// A smooth boundary piece parametrized by `u` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    /// `center + radius (cos a, sin a)` with `a` running from `start_angle` to
    /// `end_angle`.
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
    /// Image of the unit circle, traversed counter-clockwise from `theta = 0`,
    /// under the conformal ellipse map with the given offset.
    Ellipse { offset: f64 },
}

impl Piece {
    fn angle(&self, u: f64) -> f64 {
        match self {
            Piece::Arc {
                start_angle,
                end_angle,
                ..
            } => start_angle + (end_angle - start_angle) * u,
            Piece::Ellipse { .. } => TAU * u,
        }
    }

    pub fn point(&self, u: f64) -> Point {
        let a = self.angle(u);
        match self {
            Piece::Arc { center, radius, .. } => center + Point::new(a.cos(), a.sin()) * *radius,
            Piece::Ellipse { offset } => Point::new(offset - 0.4 * a.sin(), 0.6 * a.cos()),
        }
    }

    /// Derivative of [`Piece::point`] with respect to `u`.
    pub fn tangent(&self, u: f64) -> Point {
        let a = self.angle(u);
        match self {
            Piece::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => Point::new(-a.sin(), a.cos()) * (radius * (end_angle - start_angle)),
            Piece::Ellipse { .. } => Point::new(-0.4 * a.cos(), -0.6 * a.sin()) * TAU,
        }
    }

    /// `point(u + du) - point(u)` without cancellation for small `du`.
    pub fn displacement(&self, u: f64, du: f64) -> Point {
        let a = self.angle(u);
        match self {
            Piece::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => {
                let half = 0.5 * (end_angle - start_angle) * du;
                let mid = a + half;
                Point::new(-mid.sin(), mid.cos()) * (2.0 * radius * half.sin())
            }
            Piece::Ellipse { .. } => {
                let half = PI * du;
                let mid = a + half;
                let f = 2.0 * half.sin();
                Point::new(-0.4 * mid.cos() * f, -0.6 * mid.sin() * f)
            }
        }
    }

    pub fn speed(&self, u: f64) -> f64 {
        self.tangent(u).norm()
    }

    pub fn max_curvature(&self) -> f64 {
        match self {
            Piece::Arc { radius, .. } => 1.0 / radius,
            Piece::Ellipse { .. } => ELLIPSE_MAX_CURVATURE,
        }
    }

    /// Arc length between parameters `0` and `u`.
    pub fn arclength_to(&self, u: f64) -> f64 {
        match self {
            Piece::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => radius * (end_angle - start_angle).abs() * u,
            Piece::Ellipse { .. } => {
                let rule = GaussRule::new(20);
                let cells = ((u * 32.0).ceil() as usize).max(1);
                let h = u / cells as f64;
                (0..cells)
                    .map(|c| rule.integrate(c as f64 * h, (c + 1) as f64 * h, |v| self.speed(v)))
                    .sum()
            }
        }
    }

    pub fn length(&self) -> f64 {
        self.arclength_to(1.0)
    }

    /// Parameter at which the arc length from `0` equals `s`.
    pub fn parameter_at_arclength(&self, s: f64) -> f64 {
        let total = self.length();
        let mut u = (s / total).clamp(0.0, 1.0);
        if matches!(self, Piece::Arc { .. }) {
            return u;
        }
        for _ in 0..50 {
            let step = (self.arclength_to(u) - s) / self.speed(u);
            u -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        u.clamp(0.0, 1.0)
    }
}

/// Named boundary shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Disk,
    TwoEllipses,
    Semicircles,
}

/// A boundary made of smooth pieces; every connected component is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricBoundary {
    pub pieces: Vec<Piece>,
    pub closed: bool,
}

impl ParametricBoundary {
    pub fn disk() -> Self {
        Self {
            pieces: vec![Piece::Arc {
                center: Point::zeros(),
                radius: 1.0,
                start_angle: 0.0,
                end_angle: TAU,
            }],
            closed: true,
        }
    }

    pub fn two_ellipses() -> Self {
        Self {
            pieces: vec![Piece::Ellipse { offset: -2.0 }, Piece::Ellipse { offset: 2.0 }],
            closed: true,
        }
    }

    pub fn shape(shape: Shape) -> Self {
        match shape {
            Shape::Disk => Self::disk(),
            Shape::TwoEllipses => Self::two_ellipses(),
            Shape::Semicircles => semicircle_boundary(),
        }
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    /// Winding number of the boundary about `p`, from a fine polygonal trace.
    pub fn winding_number(&self, p: &Point) -> f64 {
        let samples = 4096;
        let mut total = 0.0;
        for piece in &self.pieces {
            let mut prev = piece.point(0.0) - p;
            for k in 1..=samples {
                let next = piece.point(k as f64 / samples as f64) - p;
                let cross = prev.x * next.y - prev.y * next.x;
                total += cross.atan2(prev.dot(&next));
                prev = next;
            }
        }
        total / TAU
    }

    /// Whether `p` lies inside the region enclosed by the boundary.
    pub fn contains(&self, p: &Point) -> bool {
        self.winding_number(p).abs() > 0.5
    }
}

/// The non-convex domain bounded by four semicircles of radii `1, 1/4,
/// 1/2, 1/4`.
pub fn semicircle_boundary() -> ParametricBoundary {
    let arc = |cx: f64, cy: f64, radius: f64, start_angle: f64, end_angle: f64| Piece::Arc {
        center: Point::new(cx, cy),
        radius,
        start_angle,
        end_angle,
    };
    ParametricBoundary {
        pieces: vec![
            arc(0.0, 0.0, 1.0, -FRAC_PI_2, FRAC_PI_2),
            arc(0.0, 0.75, 0.25, FRAC_PI_2, 3.0 * FRAC_PI_2),
            // (1/2) e^{-i theta}, theta from -pi/2 to pi/2
            arc(0.0, 0.0, 0.5, FRAC_PI_2, -FRAC_PI_2),
            arc(0.0, -0.75, 0.25, FRAC_PI_2, 3.0 * FRAC_PI_2),
        ],
        closed: true,
    }
}

/// Collocation points on the boundary and source points off it.
#[derive(Debug, Clone, PartialEq)]
pub struct MfsLayout {
    pub collocation: Vec<Point>,
    pub sources: Vec<Point>,
    pub radius: f64,
}

impl MfsLayout {
    pub fn rows(&self) -> usize {
        self.collocation.len()
    }

    pub fn cols(&self) -> usize {
        self.sources.len()
    }
}

/// Shapes that admit an MFS layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfsShape {
    Disk,
    TwoEllipses,
}

fn roots_of_unity(count: usize, scale: f64) -> impl Iterator<Item = Complex64> {
    (0..count).map(move |k| Complex64::from_polar(scale, TAU * k as f64 / count as f64))
}

/// Uniform MFS layout: `M` collocation points on the boundary and `K`
/// sources on the curve scaled by `R`. For two ellipses each ellipse gets
/// half of the points.
pub fn mfs_points(shape: MfsShape, m: usize, k: usize, radius: f64) -> Result<MfsLayout> {
    if !(radius > 0.0) || radius == 1.0 || !radius.is_finite() {
        return Err(Error::InvalidGeometry(format!(
            "source radius {radius} must be positive and different from 1"
        )));
    }
    if k == 0 || m < k {
        return Err(Error::InvalidGeometry(format!(
            "need M >= K >= 1, got M = {m}, K = {k}"
        )));
    }
    match shape {
        MfsShape::Disk => Ok(MfsLayout {
            collocation: roots_of_unity(m, 1.0).map(|z| Point::new(z.re, z.im)).collect(),
            sources: roots_of_unity(k, radius).map(|z| Point::new(z.re, z.im)).collect(),
            radius,
        }),
        MfsShape::TwoEllipses => {
            if m % 2 != 0 || k % 2 != 0 {
                return Err(Error::InvalidGeometry(format!(
                    "two ellipses need even M and K, got M = {m}, K = {k}"
                )));
            }
            if radius <= 1.0 / 5f64.sqrt() {
                return Err(Error::InvalidGeometry(format!(
                    "source radius {radius} lies inside the critical circle of the conformal map"
                )));
            }
            let mut collocation = Vec::with_capacity(m);
            let mut sources = Vec::with_capacity(k);
            for offset in [-2.0, 2.0] {
                for z in roots_of_unity(m / 2, 1.0) {
                    collocation.push(conformal_ellipse_map(z, offset)?);
                }
                for z in roots_of_unity(k / 2, radius) {
                    sources.push(conformal_ellipse_map(z, offset)?);
                }
            }
            Ok(MfsLayout {
                collocation,
                sources,
                radius,
            })
        }
    }
}

/// One boundary panel: the image of `[u0, u1]` under a piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub piece: usize,
    pub u0: f64,
    pub u1: f64,
    pub start: Point,
    pub mid: Point,
    pub end: Point,
    pub length: f64,
    pub curvature: f64,
}

/// Point and Jacobian of a panel at the local coordinate `tau` in `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct PanelSample {
    pub point: Point,
    pub jacobian: f64,
}

/// A panel subdivision of a boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelMesh {
    pub boundary: ParametricBoundary,
    pub panels: Vec<Panel>,
    /// For each panel, the panels sharing an endpoint with it.
    pub neighbours: Vec<Vec<usize>>,
}

impl PanelMesh {
    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn sample(&self, i: usize, tau: f64) -> PanelSample {
        let panel = &self.panels[i];
        let piece = &self.boundary.pieces[panel.piece];
        let du = panel.u1 - panel.u0;
        let u = panel.u0 + du * tau;
        PanelSample {
            point: piece.point(u),
            jacobian: piece.speed(u) * du,
        }
    }

    /// `x_i(tau + dtau) - x_i(tau)` for panel `i`, accurate for small `dtau`.
    pub fn displacement(&self, i: usize, tau: f64, dtau: f64) -> Point {
        let panel = &self.panels[i];
        let du = panel.u1 - panel.u0;
        self.boundary.pieces[panel.piece].displacement(panel.u0 + du * tau, du * dtau)
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbours[i].contains(&j)
    }

    pub fn total_length(&self) -> f64 {
        self.panels.iter().map(|p| p.length).sum()
    }

    /// Panel counts per boundary piece.
    pub fn piece_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.boundary.pieces.len()];
        for p in &self.panels {
            counts[p.piece] += 1;
        }
        counts
    }
}

/// Split `total` into integer shares proportional to `weights` (largest
/// remainder, ties to the earlier piece), each share at least one.
fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q.floor() as usize).max(1)).collect();
    let mut assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut idx = 0;
    while assigned < total {
        counts[order[idx % order.len()]] += 1;
        assigned += 1;
        idx += 1;
    }
    while assigned > total {
        let largest = (0..counts.len()).max_by_key(|&i| counts[i]).unwrap();
        counts[largest] -= 1;
        assigned -= 1;
    }
    counts
}

/// Arc-length uniform panels on each piece, with counts proportional to
/// piece lengths and summing to `m`.
pub fn panel_mesh(boundary: &ParametricBoundary, m: usize) -> Result<PanelMesh> {
    let pieces = boundary.pieces.len();
    if m < pieces.max(1) {
        return Err(Error::InvalidGeometry(format!(
            "{m} panels cannot cover {pieces} boundary pieces"
        )));
    }
    let lengths: Vec<f64> = boundary.pieces.iter().map(Piece::length).collect();
    let counts = apportion(&lengths, m);
    let mut panels = Vec::with_capacity(m);
    for (p, piece) in boundary.pieces.iter().enumerate() {
        let n = counts[p];
        let h = lengths[p] / n as f64;
        let breaks: Vec<f64> = (0..=n)
            .map(|k| match k {
                0 => 0.0,
                k if k == n => 1.0,
                k => piece.parameter_at_arclength(k as f64 * h),
            })
            .collect();
        for k in 0..n {
            let (u0, u1) = (breaks[k], breaks[k + 1]);
            let length = piece.arclength_to(u1) - piece.arclength_to(u0);
            panels.push(Panel {
                piece: p,
                u0,
                u1,
                start: piece.point(u0),
                mid: piece.point(0.5 * (u0 + u1)),
                end: piece.point(u1),
                length,
                curvature: piece.max_curvature(),
            });
        }
    }
    let tol = 1e-10;
    let touches = |a: &Panel, b: &Panel| {
        (a.start - b.end).norm() < tol
            || (a.end - b.start).norm() < tol
            || (a.start - b.start).norm() < tol
            || (a.end - b.end).norm() < tol
    };
    let neighbours = (0..panels.len())
        .map(|i| {
            (0..panels.len())
                .filter(|&j| j != i && touches(&panels[i], &panels[j]))
                .collect()
        })
        .collect();
    Ok(PanelMesh {
        boundary: boundary.clone(),
        panels,
        neighbours,
    })
}

/// Travel-time shifts `m_ij = floor(r_ij / dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftData {
    pub r: DMatrix<f64>,
    pub m: DMatrix<usize>,
    pub dt: f64,
}

/// `floor(r / dt)`, never exceeding `r / dt` when the quotient sits within
/// rounding of an integer.
pub fn shift_index(r: f64, dt: f64) -> usize {
    let q = r / dt;
    let guarded = (q - 1e-12 * q.max(1.0)).floor();
    if guarded <= 0.0 {
        0
    } else {
        guarded as usize
    }
}

impl ShiftData {
    pub fn from_distances(r: DMatrix<f64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidGrid(format!("time step {dt} must be positive")));
        }
        let m = r.map(|v| shift_index(v, dt));
        Ok(Self { r, m, dt })
    }

    /// Same distances with all shifts set to zero.
    pub fn zeroed(&self) -> Self {
        Self {
            r: self.r.clone(),
            m: DMatrix::zeros(self.r.nrows(), self.r.ncols()),
            dt: self.dt,
        }
    }

    pub fn min_shift(&self) -> usize {
        self.m.iter().copied().min().unwrap_or(0)
    }

    pub fn max_shift(&self) -> usize {
        self.m.iter().copied().max().unwrap_or(0)
    }
}

pub fn distances(points: &[Point], sources: &[Point]) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), sources.len(), |i, j| (points[i] - sources[j]).norm())
}

pub fn shift_data_mfs(layout: &MfsLayout, dt: f64) -> Result<ShiftData> {
    ShiftData::from_distances(distances(&layout.collocation, &layout.sources), dt)
}

fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    };
    (p - (a + ab * t)).norm()
}

fn segments_cross(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let orient = |p: &Point, q: &Point, r: &Point| (q - p).perp(&(r - p));
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn segment_distance(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    if segments_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

impl Panel {
    fn polyline(&self) -> [(Point, Point); 2] {
        [(self.start, self.mid), (self.mid, self.end)]
    }

    /// Upper bound on the distance of any panel point from its
    /// start-mid-end polyline.
    pub fn deviation(&self) -> f64 {
        let half = 0.5 * self.length;
        self.curvature * half * half / 8.0
    }

    /// Certified lower bound on the distance from `p` to the panel.
    pub fn distance_lower_bound(&self, p: &Point) -> f64 {
        let poly = self.polyline();
        let d = poly
            .iter()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min);
        (d - self.deviation()).max(0.0)
    }
}

/// Certified lower bound on the distance between two panels.
pub fn panel_distance_lower_bound(a: &Panel, b: &Panel) -> f64 {
    let mut d = f64::INFINITY;
    for (p, q) in a.polyline() {
        for (r, s) in b.polyline() {
            d = d.min(segment_distance(&p, &q, &r, &s));
        }
    }
    (d - a.deviation() - b.deviation()).max(0.0)
}

pub fn galerkin_distances(mesh: &PanelMesh) -> DMatrix<f64> {
    let n = mesh.len();
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = if mesh.adjacent(i, j) {
                0.0
            } else {
                panel_distance_lower_bound(&mesh.panels[i], &mesh.panels[j])
            };
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    r
}

pub fn shift_data_galerkin(mesh: &PanelMesh, dt: f64) -> Result<ShiftData> {
    ShiftData::from_distances(galerkin_distances(mesh), dt)
}

/// Observation-to-source distances for MFS.
pub fn observation_shifts_mfs(points: &[Point], layout: &MfsLayout, dt: f64) -> Result<ShiftData> {
    ShiftData::from_distances(distances(points, &layout.sources), dt)
}

/// Certified lower bounds on observation-to-panel distances.
pub fn observation_shifts_galerkin(points: &[Point], mesh: &PanelMesh, dt: f64) -> Result<ShiftData> {
    let r = DMatrix::from_fn(points.len(), mesh.len(), |l, j| {
        mesh.panels[j].distance_lower_bound(&points[l])
    });
    ShiftData::from_distances(r, dt)
}

/// `count` points equally spaced on a circle of the given radius, starting
/// at angle `pi / count`.
pub fn ring_points(count: usize, radius: f64) -> Vec<Point> {
    (0..count)
        .map(|k| {
            let a = PI * (2 * k + 1) as f64 / count as f64;
            Point::new(radius * a.cos(), radius * a.sin())
        })
        .collect()
}
