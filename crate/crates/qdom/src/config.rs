//! Run configuration: a JSON document selecting the method, the measure,
//! the grid resolution, and per-method options. Defaults are materialized
//! at parse time and echoed back into `resolved_config.json` so every run
//! is a reproducible artifact.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::grid::Grid2D;
use crate::levelset::Shape;
use crate::measure::{Density, Measure, MeasureComponent, Poly2};
use crate::method_one::MethodOneConfig;
use crate::method_two::MethodTwoConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    One,
    Two,
    Heleshaw,
    Oracle,
}

/// Density in a config file: a plain number or polynomial terms
/// `[[coeff, pow_x, pow_y], ...]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    Uniform(f64),
    Poly { poly: Vec<(f64, u32, u32)> },
}

impl DensitySpec {
    fn to_density(&self) -> Density {
        match self {
            DensitySpec::Uniform(m) => Density::Uniform(*m),
            DensitySpec::Poly { poly } => Density::Poly(Poly2 { terms: poly.clone() }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ComponentSpec {
    Disc { center: [f64; 2], radius: f64, density: DensitySpec },
    Polygon { vertices: Vec<[f64; 2]>, density: DensitySpec },
    Point {
        location: [f64; 2],
        mass: f64,
        /// Smoothing radius; defaults to `3h` when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        smoothing: Option<f64>,
    },
}

impl ComponentSpec {
    /// Materialize with the grid spacing known (point-mass smoothing).
    fn to_component(&self, h: f64) -> MeasureComponent {
        match self {
            ComponentSpec::Disc { center, radius, density } => MeasureComponent::Disc {
                center: Vec2::new(center[0], center[1]),
                radius: *radius,
                density: density.to_density(),
            },
            ComponentSpec::Polygon { vertices, density } => MeasureComponent::Polygon {
                vertices: vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect(),
                density: density.to_density(),
            },
            ComponentSpec::Point { location, mass, smoothing } => MeasureComponent::PointMass {
                location: Vec2::new(location[0], location[1]),
                mass: *mass,
                smoothing: smoothing.unwrap_or(3.0 * h),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum ShapeSpec {
    Disc { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    Union { parts: Vec<ShapeSpec> },
}

impl ShapeSpec {
    pub fn to_shape(&self) -> Shape {
        match self {
            ShapeSpec::Disc { center, radius } => {
                Shape::Disc { center: Vec2::new(center[0], center[1]), radius: *radius }
            }
            ShapeSpec::Polygon { vertices } => Shape::Polygon {
                vertices: vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect(),
            },
            ShapeSpec::Union { parts } => Shape::Union(parts.iter().map(|p| p.to_shape()).collect()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialDomainSpec {
    Auto(String), // the literal "auto"
    Shape(ShapeSpec),
}

fn default_padding() -> f64 {
    1.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub h: f64,
    #[serde(default = "default_padding")]
    pub padding_factor: f64,
    /// Explicit half-width override; auto-sized from the a-priori outer
    /// radius when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeleShawSpec {
    #[serde(default)]
    pub initial_domain: Option<ShapeSpec>,
    pub times: Vec<f64>,
}

/// Raw configuration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub measure: Vec<ComponentSpec>,
    pub grid: GridSpec,
    #[serde(default)]
    pub initial_domain: Option<InitialDomainSpec>,
    #[serde(default)]
    pub method_one: Option<MethodOneConfig>,
    #[serde(default)]
    pub method_two: Option<MethodTwoConfig>,
    #[serde(default)]
    pub heleshaw: Option<HeleShawSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

fn default_output_dir() -> String {
    "out".into()
}

/// Configuration with all defaults materialized and the grid computed.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub method: Method,
    pub measure: Measure,
    pub grid: Grid2D,
    pub grid_spec: GridSpec,
    pub initial_shape: Option<Shape>,
    pub method_one: MethodOneConfig,
    pub method_two: MethodTwoConfig,
    pub heleshaw: Option<HeleShawSpec>,
    pub output_dir: String,
    /// Point-mass smoothing radii actually used, per component index.
    pub smoothing_used: Vec<(usize, f64)>,
    pub raw: RunConfig,
}

/// Parse and validate a configuration document, materializing defaults.
pub fn parse_config(text: &str) -> Result<ResolvedConfig> {
    let raw: RunConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
    resolve(raw)
}

pub fn resolve(raw: RunConfig) -> Result<ResolvedConfig> {
    if !(raw.grid.h > 0.0) {
        return Err(Error::Config("grid.h must be positive".into()));
    }
    if raw.grid.padding_factor < 1.1 {
        return Err(Error::Config("grid.padding_factor must be at least 1.1".into()));
    }
    if raw.measure.is_empty() {
        return Err(Error::Config("measure must have at least one component".into()));
    }
    let h = raw.grid.h;

    let mut smoothing_used = Vec::new();
    for (i, c) in raw.measure.iter().enumerate() {
        if let ComponentSpec::Point { smoothing, .. } = c {
            smoothing_used.push((i, smoothing.unwrap_or(3.0 * h)));
        }
    }
    let components: Vec<MeasureComponent> = raw.measure.iter().map(|c| c.to_component(h)).collect();
    let measure = Measure::new(components)?;

    // For an injection run the box must hold the domain at the last time.
    let sizing_measure = if raw.method == Method::Heleshaw {
        let hs = raw
            .heleshaw
            .as_ref()
            .ok_or_else(|| Error::Config("method \"heleshaw\" needs a heleshaw block".into()))?;
        if hs.times.is_empty() {
            return Err(Error::Config("heleshaw.times must be nonempty".into()));
        }
        let t_max = hs.times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spec = crate::heleshaw::HeleShawRun {
            initial_domain: hs.initial_domain.as_ref().map(|s| s.to_shape()),
            injection: measure.clone(),
            times: vec![t_max],
            solver: MethodOneConfig::default(),
        };
        spec.measure_at(t_max)?
    } else {
        measure.clone()
    };
    let sakai = sizing_measure.sakai_radii();

    let initial_shape = match &raw.initial_domain {
        None => None,
        Some(InitialDomainSpec::Auto(word)) => {
            if word != "auto" {
                return Err(Error::Config(format!("unknown initial_domain \"{word}\"")));
            }
            None
        }
        Some(InitialDomainSpec::Shape(s)) => Some(s.to_shape()),
    };

    let mut half = raw.grid.half_width.unwrap_or(sakai.outer * raw.grid.padding_factor);
    if raw.grid.half_width.is_none() {
        // The explicit initial shape must fit too.
        if let Some(shape) = &initial_shape {
            let (lo, hi) = shape.bbox();
            let reach = [lo.x, hi.x]
                .iter()
                .map(|x| (x - sakai.centroid.x).abs())
                .chain([lo.y, hi.y].iter().map(|y| (y - sakai.centroid.y).abs()))
                .fold(0.0f64, f64::max);
            half = half.max(reach + 5.0 * h);
        }
    }
    let grid = Grid2D::centered(sakai.centroid, half, h)?;

    // Supports must sit strictly inside the box.
    let max = grid.max_corner();
    for (i, c) in sizing_measure.components.iter().enumerate() {
        let (lo, hi) = c.bbox();
        if lo.x < grid.origin.x + h || lo.y < grid.origin.y + h || hi.x > max.x - h || hi.y > max.y - h
        {
            return Err(Error::Config(format!(
                "support of component {i} not inside the grid (outer radius {:.4}, half-width {:.4})",
                sakai.outer, half
            )));
        }
    }

    Ok(ResolvedConfig {
        method: raw.method,
        measure,
        grid,
        grid_spec: GridSpec { h, padding_factor: raw.grid.padding_factor, half_width: Some(half) },
        initial_shape,
        method_one: raw.method_one.unwrap_or_default(),
        method_two: raw.method_two.unwrap_or_default(),
        heleshaw: raw.heleshaw.clone(),
        output_dir: raw.output_dir.clone(),
        smoothing_used,
        raw,
    })
}

impl ResolvedConfig {
    /// JSON echo of the configuration with every default materialized.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::json!({
            "method": self.method,
            "measure": self.raw.measure,
            "grid": {
                "h": self.grid.h,
                "padding_factor": self.grid_spec.padding_factor,
                "half_width": self.grid_spec.half_width,
                "nx": self.grid.nx,
                "ny": self.grid.ny,
                "origin": [self.grid.origin.x, self.grid.origin.y],
            },
            "initial_domain": self.raw.initial_domain,
            "method_one": self.method_one,
            "method_two": self.method_two,
            "heleshaw": self.heleshaw,
            "output_dir": self.output_dir,
            "point_smoothing_used": self.smoothing_used,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(
            r#"{
                "method": "one",
                "measure": [{"kind": "disc", "center": [0,0], "radius": 0.5, "density": 4.0}],
                "grid": {"h": 0.05}
            }"#,
        )
        .unwrap();
        assert!((cfg.method_one.zeta - (2.0 - std::f64::consts::SQRT_2)).abs() < 1e-15);
        assert!((cfg.method_one.tol - 1e-4).abs() < 1e-18);
        assert!((cfg.method_one.tau - 1.0).abs() < 1e-15);
        // Auto grid: half-width 1.5 * 1.1 around the origin.
        assert!((cfg.grid_spec.half_width.unwrap() - 1.65).abs() < 1e-12);
        assert_eq!(cfg.output_dir, "out");
    }

    #[test]
    fn explicit_options_are_honored_and_echoed() {
        let cfg = parse_config(
            r#"{
                "method": "one",
                "measure": [{"kind": "disc", "center": [0,0], "radius": 0.5, "density": 4.0}],
                "grid": {"h": 0.05, "padding_factor": 1.3},
                "method_one": {"tol": 1e-5, "max_iters": 9, "theta_fixed_point_iters": 2,
                               "tau": 0.5, "zeta": 0.6, "extension_forcing": "zero"},
                "output_dir": "scratch"
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.method_one.max_iters, 9);
        assert!((cfg.method_one.zeta - 0.6).abs() < 1e-15);
        let echo = cfg.echo();
        assert_eq!(echo["method_one"]["max_iters"], 9);
        assert_eq!(echo["method_one"]["extension_forcing"], "zero");
        assert_eq!(echo["output_dir"], "scratch");
    }

    #[test]
    fn point_smoothing_default_is_recorded() {
        let cfg = parse_config(
            r#"{
                "method": "one",
                "measure": [{"kind": "point", "location": [0,0], "mass": 1.0}],
                "grid": {"h": 0.02}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.smoothing_used, vec![(0, 0.06)]);
    }

    #[test]
    fn rejects_support_outside_explicit_grid() {
        let err = parse_config(
            r#"{
                "method": "one",
                "measure": [{"kind": "disc", "center": [0,0], "radius": 0.5, "density": 16.0}],
                "grid": {"h": 0.05, "half_width": 0.3}
            }"#,
        )
        .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("outer radius"), "message: {msg}");
    }

    #[test]
    fn rejects_malformed_json_with_location() {
        let err = parse_config("{\"method\": \"one\",").unwrap_err();
        assert!(format!("{err}").contains("line"), "error should carry a location");
    }

    #[test]
    fn rejects_low_padding() {
        let err = parse_config(
            r#"{
                "method": "one",
                "measure": [{"kind": "disc", "center": [0,0], "radius": 0.5, "density": 4.0}],
                "grid": {"h": 0.05, "padding_factor": 1.0}
            }"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
