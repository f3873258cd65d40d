//! Injection-flow driver: for the growing measure `mu_t = chi_D0 + t nu`
//! each time is a quadrature-domain problem in its own right, solved by the
//! level-set method; the domain family is monotone in `t` and its area
//! follows the injected mass exactly.
//!
//! Times are solved sequentially with warm starts by default (the warm
//! start only accelerates the fixed point, it cannot change it), or from
//! cold starts in parallel.

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::grid::ScalarField;
use crate::levelset::{LevelSetFn, Shape};
use crate::measure::{Density, Measure, MeasureComponent, Poly2};
use crate::method_one::{self, IterationReport, MethodOneConfig};
use serde::{Deserialize, Serialize};

/// Specification of a run: initial fluid region, injection measure, and the
/// times at which the domain is wanted.
#[derive(Debug, Clone)]
pub struct HeleShawRun {
    /// Initial domain `D0`; `None` for pure measure growth.
    pub initial_domain: Option<Shape>,
    /// Injection measure `nu`.
    pub injection: Measure,
    /// Strictly increasing positive times.
    pub times: Vec<f64>,
    pub solver: MethodOneConfig,
}

/// One solved time.
#[derive(Debug, Clone)]
pub struct HeleShawStep {
    pub t: f64,
    pub domain: LevelSetFn,
    pub u: ScalarField,
    pub reports: Vec<IterationReport>,
    pub mass_defect: f64,
    pub complementarity: f64,
    pub components: usize,
    pub converged: bool,
}

/// Per-pair nesting diagnostic of the monotonicity report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NestingReport {
    pub t_from: f64,
    pub t_to: f64,
    /// Worst violation of `phi_t <= phi_s + h` over all nodes; nesting
    /// holds within one cell when this is <= 0.
    pub max_violation: f64,
}

#[derive(Debug, Clone)]
pub struct HeleShawResult {
    pub steps: Vec<HeleShawStep>,
    pub nesting: Vec<NestingReport>,
    /// All consecutive domains nested within one grid cell.
    pub monotone: bool,
}

fn scale_density(d: &Density, t: f64) -> Density {
    match d {
        Density::Uniform(m) => Density::Uniform(m * t),
        Density::Poly(p) => Density::Poly(Poly2 {
            terms: p.terms.iter().map(|&(c, px, py)| (c * t, px, py)).collect(),
        }),
    }
}

impl HeleShawRun {
    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(Error::Config("no times requested".into()));
        }
        for w in self.times.windows(2) {
            if w[1] < w[0] {
                return Err(Error::Config("times must be non-decreasing".into()));
            }
        }
        if self.times[0] < 0.0 {
            return Err(Error::Config("times must be non-negative".into()));
        }
        if self.times[0] == 0.0 && self.initial_domain.is_none() {
            return Err(Error::Config("t = 0 needs an initial domain".into()));
        }
        Ok(())
    }

    /// The measure of the quadrature problem at time `t`:
    /// `chi_D0 + t * nu`. At `t = 0` the injection drops out and the
    /// measure is the initial-domain indicator alone.
    pub fn measure_at(&self, t: f64) -> Result<Measure> {
        let mut components = Vec::new();
        match &self.initial_domain {
            Some(Shape::Disc { center, radius }) => components.push(MeasureComponent::Disc {
                center: *center,
                radius: *radius,
                density: Density::Uniform(1.0),
            }),
            Some(Shape::Polygon { vertices }) => components.push(MeasureComponent::Polygon {
                vertices: vertices.clone(),
                density: Density::Uniform(1.0),
            }),
            Some(Shape::Union(parts)) => {
                for p in parts {
                    match p {
                        Shape::Disc { center, radius } => components.push(MeasureComponent::Disc {
                            center: *center,
                            radius: *radius,
                            density: Density::Uniform(1.0),
                        }),
                        Shape::Polygon { vertices } => components.push(MeasureComponent::Polygon {
                            vertices: vertices.clone(),
                            density: Density::Uniform(1.0),
                        }),
                        Shape::Union(_) => {
                            return Err(Error::Config("nested unions not supported for D0".into()))
                        }
                    }
                }
            }
            None => {}
        }
        if t == 0.0 {
            return Measure::new(components);
        }
        for c in &self.injection.components {
            components.push(match c {
                MeasureComponent::Disc { center, radius, density } => MeasureComponent::Disc {
                    center: *center,
                    radius: *radius,
                    density: scale_density(density, t),
                },
                MeasureComponent::Polygon { vertices, density } => MeasureComponent::Polygon {
                    vertices: vertices.clone(),
                    density: scale_density(density, t),
                },
                MeasureComponent::PointMass { location, mass, smoothing } => {
                    MeasureComponent::PointMass {
                        location: *location,
                        mass: mass * t,
                        smoothing: *smoothing,
                    }
                }
            });
        }
        Measure::new(components)
    }

    /// Solve one time. `prev` (the domain of an earlier time) warm-starts
    /// the iteration.
    pub fn step(&self, grid: Grid2D, t: f64, prev: Option<&LevelSetFn>) -> Result<HeleShawStep> {
        let mu = self.measure_at(t)?;
        let h = grid.h;

        if t == 0.0 {
            // chi_D0 is its own quadrature domain: nothing to iterate.
            let shape = self.initial_domain.as_ref().unwrap();
            let domain = LevelSetFn::from_shape(shape, grid)?;
            let mass_defect = (domain.area() - mu.total_mass()).abs() / mu.total_mass();
            let components = domain.contours().len();
            return Ok(HeleShawStep {
                t,
                u: ScalarField::zeros(grid),
                reports: Vec::new(),
                mass_defect,
                complementarity: 0.0,
                components,
                converged: true,
                domain,
            });
        }

        let init = method_one::default_initial_domain(&mu, grid)?;
        let omega0 = match prev {
            // Pointwise min keeps the warm start while guaranteeing the
            // support stays strictly covered.
            Some(p) => {
                let values = p
                    .field
                    .values
                    .iter()
                    .zip(init.field.values.iter())
                    .map(|(&a, &b)| a.min(b))
                    .collect();
                LevelSetFn::from_field(ScalarField { grid, values }).reinitialize()?
            }
            None => init,
        };
        let out = method_one::run(&mu, &omega0, &self.solver)?;

        // D_t = D0 union {u_t > 0}, realized as a pointwise level-set min so
        // coarse grids cannot lose parts of D0.
        let domain = match &self.initial_domain {
            Some(shape) => {
                let values = out
                    .phi_final
                    .field
                    .values
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        let p = grid.pos(k % grid.nx, k / grid.nx);
                        v.min(shape.signed_distance(p))
                    })
                    .collect();
                LevelSetFn::from_field(ScalarField { grid, values }).reinitialize()?
            }
            None => out.phi_final,
        };

        // Weak-solution checks: u bounded below by the grid scale, and the
        // complementarity integral of u over the exterior is at noise level.
        let min_u = out.u_final.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_u < -h {
            return Err(Error::InvariantViolation(format!(
                "u dips to {min_u:.3e} below the -h positivity floor at t = {t}"
            )));
        }
        let mut complementarity = 0.0;
        for (k, &uv) in out.u_final.values.iter().enumerate() {
            if domain.field.values[k] >= 0.0 {
                complementarity += uv.max(0.0) * h * h;
            }
        }
        let box_area = (grid.nx - 1) as f64 * (grid.ny - 1) as f64 * h * h;
        if complementarity > h * box_area {
            return Err(Error::InvariantViolation(format!(
                "complementarity integral {complementarity:.3e} above tolerance at t = {t}"
            )));
        }

        let mass_defect = (domain.area() - mu.total_mass()).abs() / mu.total_mass();
        let components = domain.contours().len();
        Ok(HeleShawStep {
            t,
            u: out.u_final,
            reports: out.reports,
            mass_defect,
            complementarity,
            components,
            converged: out.converged,
            domain,
        })
    }

    /// Solve all times sequentially, warm-starting each from the previous
    /// domain, and check the nesting `D_s subset D_t` for `s < t`.
    pub fn run(&self, grid: Grid2D) -> Result<HeleShawResult> {
        self.validate()?;
        let mut steps: Vec<HeleShawStep> = Vec::new();
        for &t in &self.times {
            let prev = steps.last().map(|s| &s.domain);
            steps.push(self.step(grid, t, prev)?);
        }
        Ok(assemble_result(grid, steps))
    }

    /// Solve all times concurrently from cold starts. Results are the same
    /// fixed points as the sequential run; only wall time differs.
    pub fn run_parallel(&self, grid: Grid2D) -> Result<HeleShawResult> {
        self.validate()?;
        let mut slots: Vec<Option<Result<HeleShawStep>>> = Vec::new();
        for _ in &self.times {
            slots.push(None);
        }
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for &t in &self.times {
                handles.push(scope.spawn(move || self.step(grid, t, None)));
            }
            for (slot, handle) in slots.iter_mut().zip(handles) {
                *slot = Some(handle.join().expect("solver thread panicked"));
            }
        });
        let mut steps = Vec::new();
        for s in slots {
            steps.push(s.unwrap()?);
        }
        Ok(assemble_result(grid, steps))
    }
}

fn assemble_result(grid: Grid2D, steps: Vec<HeleShawStep>) -> HeleShawResult {
    let h = grid.h;
    let mut nesting = Vec::new();
    let mut monotone = true;
    for w in steps.windows(2) {
        let mut worst = f64::NEG_INFINITY;
        for (a, b) in w[0].domain.field.values.iter().zip(w[1].domain.field.values.iter()) {
            // phi_t <= phi_s + h  <=>  b - a - h <= 0.
            worst = worst.max(b - a - h);
        }
        if worst > 0.0 {
            monotone = false;
        }
        nesting.push(NestingReport { t_from: w[0].t, t_to: w[1].t, max_violation: worst });
    }
    HeleShawResult { steps, nesting, monotone }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::hausdorff_distance;
    use crate::geom::Vec2;
    use std::f64::consts::PI;

    fn radial_injection(h: f64) -> (HeleShawRun, Grid2D) {
        let spec = HeleShawRun {
            initial_domain: Some(Shape::Disc { center: Vec2::ZERO, radius: 1.0 }),
            injection: Measure::new(vec![MeasureComponent::PointMass {
                location: Vec2::ZERO,
                mass: 1.0,
                smoothing: 3.0 * h,
            }])
            .unwrap(),
            times: vec![1.0, 2.0, 4.0],
            solver: MethodOneConfig::default(),
        };
        // Size the box for the largest time.
        let sakai = spec.measure_at(4.0).unwrap().sakai_radii();
        let grid = Grid2D::centered(Vec2::ZERO, sakai.outer * 1.1, h).unwrap();
        (spec, grid)
    }

    #[test]
    fn radial_injection_follows_the_area_law() {
        let h = 0.03;
        let (spec, grid) = radial_injection(h);
        let out = spec.run(grid).unwrap();
        assert!(out.monotone, "nesting violated: {:?}", out.nesting);
        for step in &out.steps {
            assert!(step.converged, "t = {} did not converge", step.t);
            let expect = (1.0 + step.t / PI).sqrt();
            let curves = step.domain.contours();
            assert_eq!(curves.len(), 1);
            let (lo, hi) = curves[0].radial_extent(Vec2::ZERO);
            assert!(
                (lo - expect).abs() <= 2.0 * h && (hi - expect).abs() <= 2.0 * h,
                "t = {}: radius [{lo}, {hi}] vs {expect}",
                step.t
            );
            assert!(step.mass_defect <= 0.02, "mass defect {}", step.mass_defect);
        }
    }

    #[test]
    fn duplicate_times_are_deterministic() {
        let h = 0.04;
        let (mut spec, grid) = radial_injection(h);
        spec.times = vec![1.0, 1.0];
        let out = spec.run(grid).unwrap();
        let a = &out.steps[0].domain.contours()[0];
        let b = &out.steps[1].domain.contours()[0];
        assert!(hausdorff_distance(a, b) <= h, "domains differ across duplicate times");
    }

    #[test]
    fn parallel_matches_sequential_fixed_points() {
        let h = 0.04;
        let (mut spec, grid) = radial_injection(h);
        spec.times = vec![1.0, 2.0];
        let seq = spec.run(grid).unwrap();
        let par = spec.run_parallel(grid).unwrap();
        for (s, p) in seq.steps.iter().zip(par.steps.iter()) {
            let d = hausdorff_distance(&s.domain.contours()[0], &p.domain.contours()[0]);
            assert!(d <= h, "t = {}: parallel differs by {d}", s.t);
        }
    }

    #[test]
    fn rejects_unordered_times() {
        let h = 0.05;
        let (mut spec, grid) = radial_injection(h);
        spec.times = vec![2.0, 1.0];
        assert!(matches!(spec.run(grid), Err(Error::Config(_))));
    }

    #[test]
    fn time_zero_returns_the_initial_domain() {
        let h = 0.04;
        let (spec, grid) = radial_injection(h);
        let step = spec.step(grid, 0.0, None).unwrap();
        assert!(step.converged);
        let curves = step.domain.contours();
        assert_eq!(curves.len(), 1);
        let (lo, hi) = curves[0].radial_extent(Vec2::ZERO);
        assert!((lo - 1.0).abs() <= h && (hi - 1.0).abs() <= h, "[{lo}, {hi}]");
        // u vanishes identically for the stationary measure.
        let sup = step.u.values.iter().cloned().fold(0.0f64, f64::max);
        assert!(sup <= 1e-3, "sup u = {sup}");
    }
}
