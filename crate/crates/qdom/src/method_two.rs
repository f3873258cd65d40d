//! Second solver: shape quasi-Newton iteration on an explicit marker
//! polygon.
//!
//! Each iteration solves the Dirichlet problem `lap u = 1 - mu` on the
//! polygon interior with `u = 0` on the boundary, samples `grad u` at every
//! marker from the interior side, and moves each vertex by the full sampled
//! gradient: `x <- x - beta grad u(x)`. Since `u` vanishes on the boundary
//! the gradient is normal there, and for the quadratic far-field profile
//! `u = dist^2 / 2` the step is an exact Newton step. Iteration stops when
//! the boundary L2 norm of the gradient is small — the free boundary
//! condition of the underlying problem.
//!
//! The energy `E(u, Omega) = int 1/2 |grad u|^2 + int (1 - mu) u` decreases
//! along the iteration and its shape derivative in a normal velocity field
//! `V` is `-oint 1/2 |grad u|^2 V.n ds`; both are instrumented here, with a
//! finite-difference check of the derivative.
//!
//! Markers do not change topology: merging-domain problems belong to the
//! level-set solver.

use crate::curve::MarkerCurve;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::grid::{Grid2D, ScalarField};
use crate::levelset::{LevelSetFn, Shape};
use crate::measure::Measure;
use crate::poisson::{solve_dirichlet_warm, DomainMask};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodTwoConfig {
    /// Stop when ||grad u||_{L2(Gamma)} falls below this.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Step scale beta in (0, 1]; halved on self-intersection.
    pub step_scale: f64,
    /// Target marker spacing; `None` resolves to `2h` at run time.
    pub marker_spacing: Option<f64>,
}

impl Default for MethodTwoConfig {
    fn default() -> Self {
        MethodTwoConfig { grad_tol: 1e-2, max_iters: 40, step_scale: 1.0, marker_spacing: None }
    }
}

impl MethodTwoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::Parameter("grad_tol must be positive".into()));
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 1.0) {
            return Err(Error::Parameter("step_scale must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MethodTwoReport {
    pub k: usize,
    pub grad_l2: f64,
    pub energy: f64,
    pub mass_defect: f64,
    pub max_displacement: f64,
    /// Largest tangential component of the sampled vertex gradients; small
    /// whenever u really vanishes on the boundary.
    pub tangential_residual: f64,
    pub beta_used: f64,
}

#[derive(Debug, Clone)]
pub struct MethodTwoRun {
    pub gamma_final: MarkerCurve,
    pub u_final: ScalarField,
    pub reports: Vec<MethodTwoReport>,
    pub converged: bool,
}

/// Sampled gradient at a marker, one-sided from the interior (u is extended
/// by zero outside, so a stencil across the boundary would bias the
/// magnitude low). Two interior samples are extrapolated linearly to the
/// marker; the offsets keep the blended difference stencils entirely on
/// the inside, since the stencil of `gradient_at` reaches two cells beyond
/// the sample point.
pub fn sample_gradient(u: &ScalarField, x: Vec2, outward: Vec2) -> Result<Vec2> {
    let h = u.grid.h;
    let (s1, s2) = (2.5 * h, 4.0 * h);
    let g1 = u.gradient_at(x - outward * s1)?;
    let g2 = u.gradient_at(x - outward * s2)?;
    // Linear extrapolation to offset zero.
    let (w1, w2) = (s2 / (s2 - s1), -s1 / (s2 - s1));
    Ok(g1 * w1 + g2 * w2)
}

/// Vertex gradients, boundary gradient norm, and tangential residual.
fn boundary_gradients(u: &ScalarField, curve: &MarkerCurve) -> Result<(Vec<Vec2>, f64, f64)> {
    let n = curve.len();
    let mut grads = Vec::with_capacity(n);
    let mut norm2 = 0.0;
    let mut tangential = 0.0f64;
    for k in 0..n {
        let nk = curve.outward_normal(k);
        let g = sample_gradient(u, curve.vertices[k], nk)?;
        norm2 += g.dot(g) * curve.vertex_weight(k);
        let t = g - nk * g.dot(nk);
        tangential = tangential.max(t.norm());
        grads.push(g);
    }
    Ok((grads, norm2.sqrt(), tangential))
}

/// One quasi-Newton boundary update: `x <- x - beta * grad u(x)` at every
/// marker, then resampling. Fails when the moved polygon self-intersects
/// (the caller halves beta and retries).
pub fn quasi_newton_step(
    curve: &MarkerCurve,
    u: &ScalarField,
    beta: f64,
    spacing: f64,
) -> Result<MarkerCurve> {
    let (grads, _, _) = boundary_gradients(u, curve)?;
    step_with_gradients(curve, &grads, beta, spacing)
}

fn step_with_gradients(
    curve: &MarkerCurve,
    grads: &[Vec2],
    beta: f64,
    spacing: f64,
) -> Result<MarkerCurve> {
    let moved: Vec<Vec2> = curve
        .vertices
        .iter()
        .zip(grads)
        .map(|(&x, &g)| x - g * beta)
        .collect();
    let candidate = MarkerCurve::new(moved)?.resample(spacing)?;
    if candidate.is_self_intersecting() {
        return Err(Error::Geometry("step too large: moved boundary self-intersects".into()));
    }
    Ok(candidate)
}

/// Points on the boundary of a component's support, for containment tests.
fn support_boundary_samples(comp: &crate::measure::MeasureComponent) -> Vec<Vec2> {
    use crate::measure::MeasureComponent as MC;
    match comp {
        MC::Disc { center, radius, .. } => (0..32)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                Vec2::new(center.x + radius * t.cos(), center.y + radius * t.sin())
            })
            .collect(),
        MC::PointMass { location, smoothing, .. } => (0..32)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                Vec2::new(location.x + smoothing * t.cos(), location.y + smoothing * t.sin())
            })
            .collect(),
        MC::Polygon { vertices, .. } => {
            let n = vertices.len();
            (0..n)
                .flat_map(|k| {
                    let a = vertices[k];
                    let b = vertices[(k + 1) % n];
                    [a, (a + b) * 0.5]
                })
                .collect()
        }
    }
}

fn polygon_mask(curve: &MarkerCurve, grid: Grid2D) -> Result<(LevelSetFn, DomainMask)> {
    let phi = LevelSetFn::from_shape(&Shape::Polygon { vertices: curve.vertices.clone() }, grid)?;
    let mask = DomainMask::from_levelset(&phi)?;
    Ok((phi, mask))
}

/// Run the marker iteration from an initial simple closed curve around the
/// measure support.
pub fn run(mu: &Measure, gamma0: &MarkerCurve, grid: Grid2D, cfg: &MethodTwoConfig) -> Result<MethodTwoRun> {
    run_observed(mu, gamma0, grid, cfg, |_, _| Ok(()))
}

/// Like [`run`], invoking `observer(k, curve)` after every boundary update.
pub fn run_observed(
    mu: &Measure,
    gamma0: &MarkerCurve,
    grid: Grid2D,
    cfg: &MethodTwoConfig,
    mut observer: impl FnMut(usize, &MarkerCurve) -> Result<()>,
) -> Result<MethodTwoRun> {
    cfg.validate()?;
    let h = grid.h;
    let spacing = cfg.marker_spacing.unwrap_or(2.0 * h);
    if gamma0.is_self_intersecting() {
        return Err(Error::Geometry("initial curve self-intersects".into()));
    }
    let mu_field = mu.rasterize(grid)?;
    let mass = mu.total_mass();
    let f = ScalarField { grid, values: mu_field.values.iter().map(|m| 1.0 - m).collect() };

    let support_inside = |c: &MarkerCurve| -> bool {
        mu.components
            .iter()
            .all(|comp| support_boundary_samples(comp).iter().all(|&p| c.contains(p)))
    };
    if !support_inside(gamma0) {
        return Err(Error::Geometry("measure support not inside the initial curve".into()));
    }

    let mut curve = gamma0.resample(spacing)?;
    let mut u_prev: Option<ScalarField> = None;
    let mut reports = Vec::new();

    for k in 0..cfg.max_iters {
        let (phi, mask) = polygon_mask(&curve, grid)?;
        let u = solve_dirichlet_warm(&mask, &f, u_prev.as_ref())?;
        u_prev = Some(u.clone());
        let (grads, grad_l2, tangential) = boundary_gradients(&u, &curve)?;
        let energy = energy_clipped(&curve, &phi, &u, &mu_field);
        let mass_defect = (curve.area() - mass).abs() / mass;

        if grad_l2 < cfg.grad_tol {
            reports.push(MethodTwoReport {
                k,
                grad_l2,
                energy,
                mass_defect,
                max_displacement: 0.0,
                tangential_residual: tangential,
                beta_used: 0.0,
            });
            return Ok(MethodTwoRun { gamma_final: curve, u_final: u, reports, converged: true });
        }

        // Move markers; halve beta (up to 5 times) when the new curve
        // self-intersects, leaves the grid, or exposes the support.
        let mut beta = cfg.step_scale;
        let mut stepped = None;
        for _ in 0..=5 {
            match step_with_gradients(&curve, &grads, beta, spacing) {
                Ok(next) => {
                    let inside_grid = next.vertices.iter().all(|&v| {
                        let max = grid.max_corner();
                        v.x > grid.origin.x + 3.0 * h
                            && v.y > grid.origin.y + 3.0 * h
                            && v.x < max.x - 3.0 * h
                            && v.y < max.y - 3.0 * h
                    });
                    if inside_grid && support_inside(&next) {
                        stepped = Some(next);
                        break;
                    }
                    beta *= 0.5;
                }
                Err(_) => beta *= 0.5,
            }
        }
        let next = stepped.ok_or_else(|| {
            Error::Geometry("quasi-Newton step failed after 5 step-halvings".into())
        })?;

        let max_displacement = beta * grads.iter().map(|g| g.norm()).fold(0.0f64, f64::max);
        reports.push(MethodTwoReport {
            k,
            grad_l2,
            energy,
            mass_defect,
            max_displacement,
            tangential_residual: tangential,
            beta_used: beta,
        });
        curve = next;
        observer(k, &curve)?;
    }

    let u_final = u_prev.unwrap_or_else(|| ScalarField::zeros(grid));
    Ok(MethodTwoRun { gamma_final: curve, u_final, reports, converged: false })
}

/// Energy `E(u, Omega) = int_Omega 1/2 |grad u|^2 + int_Omega (1 - mu) u`
/// by midpoint quadrature; the cells cut by the polygon are weighted by
/// their exact clipped area, so the energy responds smoothly to boundary
/// perturbations far below the cell size.
pub fn energy(sigma: &MarkerCurve, u: &ScalarField, mu_field: &ScalarField) -> f64 {
    let phi = LevelSetFn::from_field(ScalarField::from_fn(u.grid, |p| {
        crate::geom::polygon_signed_distance(&sigma.vertices, p)
    }));
    energy_clipped(sigma, &phi, u, mu_field)
}

fn energy_clipped(
    sigma: &MarkerCurve,
    phi: &LevelSetFn,
    u: &ScalarField,
    mu_field: &ScalarField,
) -> f64 {
    let grid = u.grid;
    let h = grid.h;
    let half = h / 2.0;
    let band = std::f64::consts::SQRT_2 * h;
    let mut total = 0.0;
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let d = phi.field.at(i, j);
            let w = if d <= -band {
                1.0
            } else if d >= band {
                0.0
            } else {
                let p = grid.pos(i, j);
                let lo = Vec2::new(p.x - half, p.y - half);
                let hi = Vec2::new(p.x + half, p.y + half);
                polygon_cell_clip_area(&sigma.vertices, lo, hi) / (h * h)
            };
            if w == 0.0 {
                continue;
            }
            // Nodal gradient, never differencing across the boundary: u is
            // extended by zero outside and a crossing stencil would bias
            // |grad u|^2 low in the whole boundary band.
            let one_axis = |vm: f64, v0: f64, vp: f64, dm: f64, dp: f64| -> f64 {
                let in_m = dm < 0.0;
                let in_p = dp < 0.0;
                if in_m && in_p {
                    (vp - vm) / (2.0 * h)
                } else if in_m {
                    (v0 - vm) / h
                } else if in_p {
                    (vp - v0) / h
                } else {
                    (vp - vm) / (2.0 * h)
                }
            };
            let gx = one_axis(
                u.at(i - 1, j),
                u.at(i, j),
                u.at(i + 1, j),
                phi.field.at(i - 1, j),
                phi.field.at(i + 1, j),
            );
            let gy = one_axis(
                u.at(i, j - 1),
                u.at(i, j),
                u.at(i, j + 1),
                phi.field.at(i, j - 1),
                phi.field.at(i, j + 1),
            );
            let integrand = 0.5 * (gx * gx + gy * gy) + (1.0 - mu_field.at(i, j)) * u.at(i, j);
            total += w * integrand * h * h;
        }
    }
    total
}

/// Area of `polygon intersect [lo, hi]` by successive half-plane clipping.
fn polygon_cell_clip_area(vertices: &[Vec2], lo: Vec2, hi: Vec2) -> f64 {
    // Clip against one half-plane keep(p) >= 0, with `cross(a, b)` the
    // intersection of segment [a, b] with its boundary.
    fn clip(
        poly: &[Vec2],
        keep: impl Fn(Vec2) -> f64,
        cross: impl Fn(Vec2, Vec2, f64, f64) -> Vec2,
    ) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(poly.len() + 4);
        let n = poly.len();
        for k in 0..n {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            let (da, db) = (keep(a), keep(b));
            if da >= 0.0 {
                out.push(a);
                if db < 0.0 {
                    out.push(cross(a, b, da, db));
                }
            } else if db >= 0.0 {
                out.push(cross(a, b, da, db));
            }
        }
        out
    }
    let lerp = |a: Vec2, b: Vec2, da: f64, db: f64| {
        let t = da / (da - db);
        a + (b - a) * t
    };
    let mut poly = vertices.to_vec();
    poly = clip(&poly, |p| p.x - lo.x, lerp);
    if poly.len() < 3 {
        return 0.0;
    }
    poly = clip(&poly, |p| hi.x - p.x, lerp);
    if poly.len() < 3 {
        return 0.0;
    }
    poly = clip(&poly, |p| p.y - lo.y, lerp);
    if poly.len() < 3 {
        return 0.0;
    }
    poly = clip(&poly, |p| hi.y - p.y, lerp);
    if poly.len() < 3 {
        return 0.0;
    }
    let n = poly.len();
    let mut area = 0.0;
    for k in 0..n {
        area += poly[k].cross(poly[(k + 1) % n]);
    }
    area.abs() / 2.0
}

/// Outcome of the shape-derivative consistency check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShapeDerivativeCheck {
    /// Boundary integral `-oint 1/2 |grad u|^2 V.n ds` over the markers.
    pub analytic: f64,
    /// `(E(Sigma + eps V n) - E(Sigma)) / eps` with re-solved state.
    pub finite_diff: f64,
}

/// Compare the closed-form shape derivative of the energy against a
/// finite difference of re-solved energies, for a normal velocity given at
/// the markers. Perturbation size `eps = h/4`.
pub fn shape_derivative_check(
    mu: &Measure,
    sigma: &MarkerCurve,
    grid: Grid2D,
    v_n: &[f64],
) -> Result<ShapeDerivativeCheck> {
    if v_n.len() != sigma.len() {
        return Err(Error::Parameter("normal velocity not aligned with markers".into()));
    }
    let h = grid.h;
    let mu_field = mu.rasterize(grid)?;
    let f = ScalarField { grid, values: mu_field.values.iter().map(|m| 1.0 - m).collect() };

    let (phi, mask) = polygon_mask(sigma, grid)?;
    let u = solve_dirichlet_warm(&mask, &f, None)?;
    let (grads, _, _) = boundary_gradients(&u, sigma)?;

    let mut analytic = 0.0;
    for k in 0..sigma.len() {
        analytic -= 0.5 * grads[k].dot(grads[k]) * v_n[k] * sigma.vertex_weight(k);
    }

    let e0 = energy_clipped(sigma, &phi, &u, &mu_field);
    let eps = h / 4.0;
    let moved: Vec<Vec2> = sigma
        .vertices
        .iter()
        .enumerate()
        .map(|(k, &x)| x + sigma.outward_normal(k) * (eps * v_n[k]))
        .collect();
    let sigma_eps = MarkerCurve::new(moved)?;
    let (phi_eps, mask_eps) = polygon_mask(&sigma_eps, grid)?;
    let u_eps = solve_dirichlet_warm(&mask_eps, &f, Some(&u))?;
    let e1 = energy_clipped(&sigma_eps, &phi_eps, &u_eps, &mu_field);

    Ok(ShapeDerivativeCheck { analytic, finite_diff: (e1 - e0) / eps })
}
