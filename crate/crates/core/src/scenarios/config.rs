//! Flat `section.key = value` scenario files.
//!
//! ```text
//! # exterior scattering by the unit disk
//! scenario.name = disk
//! scenario.geometry = disk
//! scenario.problem = exterior
//! spatial.method = mfs
//! spatial.m = 200
//! spatial.k = 100
//! spatial.radius = 0.9
//! time.rule = bdf2
//! time.scheme = modified
//! time.steps = 256
//! time.final_time = 10
//! incident.kind = plane_wave
//! incident.omega = 1
//! incident.alpha = 0, -1
//! observation.points = 2, 0; 0, 2
//! ```
//!
//! Keys left out take the defaults of the geometry's preset. Blank lines
//! and `#` comments are ignored; unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use super::{Geometry, IncidentSpec, Problem, Scenario, SolveMethod, Spatial};
use crate::assembly::{GalerkinQuadrature, Scheme};
use crate::cq::MultistepRule;
use crate::error::{Error, Result};
use crate::geometry::Point;

fn fmt_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("`{key}`: `{value}` is not a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("`{key}`: `{value}` is not a non-negative integer")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("`{key}`: `{other}` is not a boolean"))),
    }
}

pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_f64(key, v)).collect()
}

fn parse_pair(key: &str, value: &str) -> Result<[f64; 2]> {
    let v = parse_list(key, value)?;
    if v.len() != 2 {
        return Err(Error::Config(format!("`{key}` needs two numbers, got `{value}`")));
    }
    Ok([v[0], v[1]])
}

fn parse_points(key: &str, value: &str) -> Result<Vec<Point>> {
    value
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_pair(key, p).map(|[x, y]| Point::new(x, y)))
        .collect()
}

fn parse_axis(key: &str, value: &str) -> Result<(f64, f64, usize)> {
    let v = parse_list(key, value)?;
    if v.len() != 3 || v[2] < 1.0 || v[2].fract() != 0.0 {
        return Err(Error::Config(format!(
            "`{key}` needs `min, max, count`, got `{value}`"
        )));
    }
    Ok((v[0], v[1], v[2] as usize))
}

/// Splits a file into `key -> value`, rejecting duplicates.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let key = key.trim().to_ascii_lowercase();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(map)
}

impl Scenario {
    /// Parses a scenario file on top of the preset named by
    /// `scenario.geometry` (default `disk`).
    pub fn from_config(text: &str) -> Result<Self> {
        let mut map = parse_pairs(text)?;
        let geometry = match map.remove("scenario.geometry") {
            Some(g) => Geometry::from_str(&g)?,
            None => Geometry::Disk,
        };
        let mut sc = Scenario::preset(geometry);
        let mut method = map.remove("spatial.method");
        let mut spatial_keys = BTreeMap::new();
        let mut incident_kind = map.remove("incident.kind");
        let mut incident_keys = BTreeMap::new();
        for (key, value) in map {
            let k = key.as_str();
            match k {
                "scenario.name" => sc.name = value,
                "scenario.problem" => sc.problem = Problem::from_str(&value)?,
                "time.rule" => sc.rule = MultistepRule::from_str(&value)?,
                "time.scheme" => sc.scheme = Scheme::from_str(&value)?,
                "time.steps" => sc.steps = parse_usize(k, &value)?,
                "time.final_time" => sc.final_time = parse_f64(k, &value)?,
                "time.eps" => sc.eps = parse_f64(k, &value)?,
                "observation.points" => sc.observation = parse_points(k, &value)?,
                "observation.shifted" => sc.shifted_observation = parse_bool(k, &value)?,
                "solver.method" => sc.method = SolveMethod::from_str(&value)?,
                "solver.workers" => {
                    sc.workers = match value.trim() {
                        "" | "auto" => None,
                        v => Some(parse_usize(k, v)?),
                    }
                }
                "solver.symmetry" => sc.use_symmetry = parse_bool(k, &value)?,
                "output.directory" => {
                    sc.output = if value.trim().is_empty() {
                        None
                    } else {
                        Some(PathBuf::from(value.trim()))
                    }
                }
                "snapshots.times" => sc.snapshots.times = parse_list(k, &value)?,
                "snapshots.x" => sc.snapshots.x = parse_axis(k, &value)?,
                "snapshots.y" => sc.snapshots.y = parse_axis(k, &value)?,
                "quadrature.order" => sc.quadrature.order = parse_usize(k, &value)?,
                "quadrature.singular_order" => sc.quadrature.singular_order = parse_usize(k, &value)?,
                "quadrature.grading" => sc.quadrature.grading = parse_f64(k, &value)?,
                "quadrature.levels" => sc.quadrature.levels = parse_usize(k, &value)?,
                _ if k.starts_with("spatial.") => {
                    spatial_keys.insert(key, value);
                }
                _ if k.starts_with("incident.") => {
                    incident_keys.insert(key, value);
                }
                _ => return Err(Error::Config(format!("unknown key `{key}`"))),
            }
        }
        sc.spatial = parse_spatial(sc.spatial, method.take(), spatial_keys)?;
        sc.incident = parse_incident(sc.incident, incident_kind.take(), incident_keys)?;
        Ok(sc)
    }

    /// Writes every field, so that `from_config(to_config(sc)) == sc`.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("scenario.name", self.name.clone());
        put("scenario.geometry", self.geometry.to_string());
        put("scenario.problem", self.problem.to_string());
        match self.spatial {
            Spatial::Mfs { m, k, radius } => {
                put("spatial.method", "mfs".into());
                put("spatial.m", m.to_string());
                put("spatial.k", k.to_string());
                put("spatial.radius", radius.to_string());
            }
            Spatial::Galerkin { m } => {
                put("spatial.method", "galerkin".into());
                put("spatial.m", m.to_string());
            }
        }
        put("time.rule", self.rule.to_string());
        put("time.scheme", self.scheme.to_string());
        put("time.steps", self.steps.to_string());
        put("time.final_time", self.final_time.to_string());
        put("time.eps", self.eps.to_string());
        match self.incident {
            IncidentSpec::WindowedPlaneWave {
                omega,
                alpha,
                delay,
                width,
            } => {
                put("incident.kind", "plane_wave".into());
                put("incident.omega", omega.to_string());
                put("incident.alpha", fmt_list(&alpha));
                put("incident.delay", delay.to_string());
                put("incident.width", width.to_string());
            }
            IncidentSpec::GaussianPulse { a, center } => {
                put("incident.kind", "gaussian".into());
                put("incident.a", a.to_string());
                put("incident.center", fmt_list(&center));
            }
        }
        put(
            "observation.points",
            self.observation
                .iter()
                .map(|p| fmt_list(&[p.x, p.y]))
                .collect::<Vec<_>>()
                .join("; "),
        );
        put("observation.shifted", self.shifted_observation.to_string());
        put("solver.method", self.method.to_string());
        put(
            "solver.workers",
            self.workers.map_or_else(|| "auto".into(), |w| w.to_string()),
        );
        put("solver.symmetry", self.use_symmetry.to_string());
        put(
            "output.directory",
            self.output
                .as_ref()
                .map_or_else(String::new, |p| p.display().to_string()),
        );
        put("snapshots.times", fmt_list(&self.snapshots.times));
        let (x0, x1, nx) = self.snapshots.x;
        put("snapshots.x", fmt_list(&[x0, x1, nx as f64]));
        let (y0, y1, ny) = self.snapshots.y;
        put("snapshots.y", fmt_list(&[y0, y1, ny as f64]));
        let GalerkinQuadrature {
            order,
            singular_order,
            grading,
            levels,
        } = self.quadrature;
        put("quadrature.order", order.to_string());
        put("quadrature.singular_order", singular_order.to_string());
        put("quadrature.grading", grading.to_string());
        put("quadrature.levels", levels.to_string());
        out
    }
}

fn parse_spatial(
    current: Spatial,
    method: Option<String>,
    keys: BTreeMap<String, String>,
) -> Result<Spatial> {
    let method = method.unwrap_or_else(|| match current {
        Spatial::Mfs { .. } => "mfs".into(),
        Spatial::Galerkin { .. } => "galerkin".into(),
    });
    let (mut m, mut k, mut radius) = match current {
        Spatial::Mfs { m, k, radius } => (m, k, radius),
        Spatial::Galerkin { m } => (m, m / 2, 0.9),
    };
    let galerkin = match method.trim().to_ascii_lowercase().as_str() {
        "mfs" => false,
        "galerkin" | "bem" => true,
        other => return Err(Error::Config(format!("unknown spatial method `{other}`"))),
    };
    for (key, value) in keys {
        match key.as_str() {
            "spatial.m" => m = parse_usize(&key, &value)?,
            "spatial.k" if !galerkin => k = parse_usize(&key, &value)?,
            "spatial.radius" if !galerkin => radius = parse_f64(&key, &value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}` for method `{method}`"))),
        }
    }
    Ok(if galerkin {
        Spatial::Galerkin { m }
    } else {
        Spatial::Mfs { m, k, radius }
    })
}

fn parse_incident(
    current: IncidentSpec,
    kind: Option<String>,
    keys: BTreeMap<String, String>,
) -> Result<IncidentSpec> {
    let kind = kind.unwrap_or_else(|| match current {
        IncidentSpec::WindowedPlaneWave { .. } => "plane_wave".into(),
        IncidentSpec::GaussianPulse { .. } => "gaussian".into(),
    });
    let mut spec = match (kind.trim().to_ascii_lowercase().as_str(), current) {
        ("plane_wave" | "planewave", c @ IncidentSpec::WindowedPlaneWave { .. }) => c,
        ("plane_wave" | "planewave", _) => IncidentSpec::plane_wave(1.0, [0.0, -1.0]),
        ("gaussian", c @ IncidentSpec::GaussianPulse { .. }) => c,
        ("gaussian", _) => IncidentSpec::gaussian(),
        (other, _) => return Err(Error::Config(format!("unknown incident kind `{other}`"))),
    };
    for (key, value) in keys {
        match (&mut spec, key.as_str()) {
            (IncidentSpec::WindowedPlaneWave { omega, .. }, "incident.omega") => {
                *omega = parse_f64(&key, &value)?
            }
            (IncidentSpec::WindowedPlaneWave { alpha, .. }, "incident.alpha") => {
                *alpha = parse_pair(&key, &value)?
            }
            (IncidentSpec::WindowedPlaneWave { delay, .. }, "incident.delay") => {
                *delay = parse_f64(&key, &value)?
            }
            (IncidentSpec::WindowedPlaneWave { width, .. }, "incident.width") => {
                *width = parse_f64(&key, &value)?
            }
            (IncidentSpec::GaussianPulse { a, .. }, "incident.a") => *a = parse_f64(&key, &value)?,
            (IncidentSpec::GaussianPulse { center, .. }, "incident.center") => {
                *center = parse_pair(&key, &value)?
            }
            _ => return Err(Error::Config(format!("unknown key `{key}` for incident `{kind}`"))),
        }
    }
    Ok(spec)
}
