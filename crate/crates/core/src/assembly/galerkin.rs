//! Double panel integrals for piecewise-constant Galerkin BEM.
//!
//! Well-separated pairs use tensor Gauss–Legendre rules. Coincident and
//! vertex-sharing pairs are regularised by Duffy-type substitutions that
//! move the logarithmic singularity to one coordinate, which is then
//! integrated with a geometrically graded rule.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{PanelMesh, Point};
use crate::quadrature::{graded_rule, GaussRule};

/// Quadrature parameters for Galerkin assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalerkinQuadrature {
    /// Gauss points per panel direction for separated pairs; doubled for
    /// pairs closer than a panel length.
    pub order: usize,
    /// Gauss points per graded cell and in the smooth Duffy direction.
    pub singular_order: usize,
    /// Ratio between consecutive graded cells.
    pub grading: f64,
    pub levels: usize,
}

impl Default for GalerkinQuadrature {
    fn default() -> Self {
        Self {
            order: 8,
            singular_order: 10,
            grading: 0.2,
            levels: 21,
        }
    }
}

/// Precomputed rules for one quadrature setting.
#[derive(Debug, Clone)]
pub struct GalerkinRules {
    pub settings: GalerkinQuadrature,
    regular: GaussRule,
    near: GaussRule,
    smooth: GaussRule,
    graded: Vec<(f64, f64)>,
}

impl GalerkinRules {
    pub fn new(settings: GalerkinQuadrature) -> Self {
        let singular = GaussRule::new(settings.singular_order);
        Self {
            settings,
            regular: GaussRule::new(settings.order),
            near: GaussRule::new(2 * settings.order),
            smooth: singular.clone(),
            graded: graded_rule(&singular, settings.grading, settings.levels),
        }
    }

    /// Graded rule on `[0, 1]` with cells split so that each spans at most
    /// `cell` in absolute size.
    fn graded_limited(&self, cell: f64) -> Vec<(f64, f64)> {
        if cell >= 1.0 {
            return self.graded.clone();
        }
        let base = &self.smooth;
        let mut out = Vec::new();
        let sigma = self.settings.grading;
        let mut hi = 1.0;
        for level in 0..=self.settings.levels {
            let lo = if level == self.settings.levels { 0.0 } else { hi * sigma };
            let pieces = ((hi - lo) / cell).ceil().max(1.0) as usize;
            let h = (hi - lo) / pieces as f64;
            for p in 0..pieces {
                let a = lo + p as f64 * h;
                out.extend(base.mapped(a, a + h));
            }
            hi = lo;
        }
        out
    }
}

/// Local samples of one panel on a Gauss rule mapped to `[a, b]`.
fn panel_nodes(mesh: &PanelMesh, i: usize, rule: &GaussRule, a: f64, b: f64) -> Vec<(Point, f64)> {
    rule.mapped(a, b)
        .map(|(t, w)| {
            let s = mesh.sample(i, t);
            (s.point, w * s.jacobian)
        })
        .collect()
}

/// Number of sub-intervals keeping `|s| h` moderate on a panel.
fn oscillation_splits(s_abs: f64, length: f64) -> usize {
    ((s_abs * length / 4.0).ceil() as usize).clamp(1, 512)
}

/// `int_{Gamma_i} int_{Gamma_j} k(|x - y|) dGamma_y dGamma_x` for a kernel
/// given as a function of distance.
pub fn panel_pair_integral<F>(
    mesh: &PanelMesh,
    rules: &GalerkinRules,
    i: usize,
    j: usize,
    s_abs: f64,
    kernel: &F,
) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if i == j {
        return self_integral(mesh, rules, i, s_abs, kernel);
    }
    if mesh.adjacent(i, j) {
        return adjacent_integral(mesh, rules, i, j, s_abs, kernel);
    }
    let (pi, pj) = (&mesh.panels[i], &mesh.panels[j]);
    let gap = crate::geometry::panel_distance_lower_bound(pi, pj);
    let near = gap < pi.length.max(pj.length);
    let rule = if near { &rules.near } else { &rules.regular };
    let ni = oscillation_splits(s_abs, pi.length);
    let nj = oscillation_splits(s_abs, pj.length);
    let xs: Vec<(Point, f64)> = (0..ni)
        .flat_map(|a| panel_nodes(mesh, i, rule, a as f64 / ni as f64, (a + 1) as f64 / ni as f64))
        .collect();
    let ys: Vec<(Point, f64)> = (0..nj)
        .flat_map(|b| panel_nodes(mesh, j, rule, b as f64 / nj as f64, (b + 1) as f64 / nj as f64))
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (x, wx) in &xs {
        let mut inner = Complex64::new(0.0, 0.0);
        for (y, wy) in &ys {
            inner += kernel((x - y).norm())? * *wy;
        }
        total += inner * *wx;
    }
    Ok(total)
}

/// `2 int_0^1 (1 - xi) int_0^1 F((1 - xi) eta, (1 - xi) eta + xi) d eta d xi`.
fn self_integral<F>(
    mesh: &PanelMesh,
    rules: &GalerkinRules,
    i: usize,
    s_abs: f64,
    kernel: &F,
) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let len = mesh.panels[i].length;
    let outer = rules.graded_limited(4.0 / (s_abs * len).max(1e-300));
    let mut total = Complex64::new(0.0, 0.0);
    for &(xi, wxi) in &outer {
        let span = 1.0 - xi;
        let mut inner = Complex64::new(0.0, 0.0);
        for (eta, weta) in rules.smooth.mapped(0.0, 1.0) {
            let tau = span * eta;
            let a = mesh.sample(i, tau);
            let b = mesh.sample(i, tau + xi);
            let r = mesh.displacement(i, tau, xi).norm();
            inner += kernel(r)? * (weta * a.jacobian * b.jacobian);
        }
        total += inner * (2.0 * span * wxi);
    }
    Ok(total)
}

/// Vertex-sharing panels, split along the diagonal through the common
/// corner.
fn adjacent_integral<F>(
    mesh: &PanelMesh,
    rules: &GalerkinRules,
    i: usize,
    j: usize,
    s_abs: f64,
    kernel: &F,
) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let (pi, pj) = (&mesh.panels[i], &mesh.panels[j]);
    let tol = 1e-10;
    let ends_i = [pi.start, pi.end];
    let ends_j = [pj.start, pj.end];
    let mut shared = Vec::new();
    for (a, ea) in ends_i.iter().enumerate() {
        for (b, eb) in ends_j.iter().enumerate() {
            if (ea - eb).norm() < tol {
                shared.push((a, b));
            }
        }
    }
    if shared.len() != 1 {
        return Err(Error::InvalidGeometry(format!(
            "panels {i} and {j} share {} endpoints; refine the mesh",
            shared.len()
        )));
    }
    let (ci, cj) = shared[0];
    // positions are measured from the shared vertex to avoid cancellation
    let (vi, si) = if ci == 0 { (0.0, 1.0) } else { (1.0, -1.0) };
    let (vj, sj) = if cj == 0 { (0.0, 1.0) } else { (1.0, -1.0) };
    let eval = |u: f64, v: f64| -> Result<Complex64> {
        let a = mesh.sample(i, vi + si * u);
        let b = mesh.sample(j, vj + sj * v);
        let da = mesh.displacement(i, vi, si * u);
        let db = mesh.displacement(j, vj, sj * v);
        Ok(kernel((da - db).norm())? * (a.jacobian * b.jacobian))
    };
    let len = pi.length.max(pj.length);
    let outer = rules.graded_limited(4.0 / (s_abs * len).max(1e-300));
    let inner_splits = oscillation_splits(s_abs, len);
    let mut total = Complex64::new(0.0, 0.0);
    for &(u, wu) in &outer {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..inner_splits {
            let a = k as f64 / inner_splits as f64;
            let b = (k + 1) as f64 / inner_splits as f64;
            for (w, ww) in rules.smooth.mapped(a, b) {
                acc += (eval(u, u * w)? + eval(u * w, u)?) * ww;
            }
        }
        total += acc * (u * wu);
    }
    Ok(total)
}

/// `int_{Gamma_j} k(|x - y|) dGamma_y` for `x` off the panel.
pub fn panel_point_integral<F>(
    mesh: &PanelMesh,
    rules: &GalerkinRules,
    j: usize,
    x: &Point,
    s_abs: f64,
    kernel: &F,
) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let panel = &mesh.panels[j];
    let gap = panel.distance_lower_bound(x).max(1e-3 * panel.length);
    let geometric = ((2.0 * panel.length / gap).ceil() as usize).clamp(1, 256);
    let splits = geometric.max(oscillation_splits(s_abs, panel.length));
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..splits {
        let a = k as f64 / splits as f64;
        let b = (k + 1) as f64 / splits as f64;
        for (y, w) in panel_nodes(mesh, j, &rules.near, a, b) {
            total += kernel((x - y).norm())? * w;
        }
    }
    Ok(total)
}

/// Integral of real data over one panel with the regular rule.
/// Quadrature nodes and weights used by [`panel_data_integral`].
pub fn panel_data_nodes(mesh: &PanelMesh, rules: &GalerkinRules, j: usize) -> Vec<(Point, f64)> {
    panel_nodes(mesh, j, &rules.regular, 0.0, 1.0)
}

pub fn panel_data_integral(
    mesh: &PanelMesh,
    rules: &GalerkinRules,
    j: usize,
    data: &dyn Fn(&Point) -> f64,
) -> f64 {
    panel_nodes(mesh, j, &rules.regular, 0.0, 1.0)
        .iter()
        .map(|(p, w)| data(p) * w)
        .sum()
}
