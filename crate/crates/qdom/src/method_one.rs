//! First solver: Robin-boundary fixed-point iteration with level-set
//! interface evolution.
//!
//! Each outer iteration solves `lap u = 1 - mu` on the current domain with
//! the Robin condition `du/dn = -theta u`, where `theta` is tuned by a short
//! fixed-point loop so that `theta u` tracks `sqrt(2u)` on the boundary.
//! The boundary then moves outward with speed `zeta sqrt(2u)`, extended to
//! the whole box by an auxiliary Poisson solve, and the signed distance
//! function is advected and redistanced. Iteration stops when the boundary
//! values of `u` drop below the tolerance; at the fixed point `u` and
//! `|grad u|` vanish together on the free boundary.
//!
//! The displacement factor `zeta = 2 - sqrt(2)` comes from the quadratic
//! Taylor model of `u` near the boundary: requiring
//! `u - d sqrt(2u) + d^2/4 = 0` for the step `d` gives
//! `d = (2 - sqrt(2)) sqrt(2u)`.

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::levelset::LevelSetFn;
use crate::measure::Measure;
use crate::poisson::{
    robin_interface_values, solve_extension_warm, solve_robin_warm, DomainMask, ExtensionForcing,
};
use serde::{Deserialize, Serialize};

/// Configuration of the outer iteration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodOneConfig {
    /// Stop when `sup_Gamma |u| < tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Robin sub-iterations tuning theta per outer step.
    pub theta_fixed_point_iters: usize,
    /// Pseudo-time relaxation in (0, 1].
    pub tau: f64,
    /// Displacement factor in (0, 1].
    pub zeta: f64,
    /// Forcing of the inside region in the velocity extension.
    pub extension_forcing: ExtensionForcing,
}

impl Default for MethodOneConfig {
    fn default() -> Self {
        MethodOneConfig {
            tol: 1e-4,
            max_iters: 60,
            theta_fixed_point_iters: 3,
            tau: 1.0,
            zeta: 2.0 - std::f64::consts::SQRT_2,
            extension_forcing: ExtensionForcing::One,
        }
    }
}

impl MethodOneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Parameter("tol must be positive".into()));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Parameter("tau must lie in (0, 1]".into()));
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return Err(Error::Parameter("zeta must lie in (0, 1]".into()));
        }
        if self.theta_fixed_point_iters == 0 {
            return Err(Error::Parameter("theta iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics, emitted as JSON Lines by the driver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IterationReport {
    pub k: usize,
    pub sup_boundary_u: f64,
    pub mass_defect: f64,
    pub max_displacement: f64,
    pub theta_used: f64,
}

/// Outcome of a run. `converged` is false when the iteration cap was hit;
/// the fields still carry the last state so partial artifacts can be
/// written.
#[derive(Debug, Clone)]
pub struct MethodOneRun {
    pub phi_final: LevelSetFn,
    pub u_final: ScalarField,
    pub reports: Vec<IterationReport>,
    pub converged: bool,
}

/// Theta rule: `theta = sqrt(2 / sup_Gamma u)`. Returns `None` when the
/// boundary values are already at machine scale (outer loop should stop).
pub fn theta_update(sup_boundary_u: f64) -> Option<f64> {
    if sup_boundary_u <= 1e-14 {
        None
    } else {
        Some((2.0 / sup_boundary_u).sqrt())
    }
}

/// Default initial guess: the measure support inflated by a tenth of the
/// mass radius — slightly outside the support, close enough for the
/// displacement law to be accurate from the first step.
pub fn default_initial_domain(mu: &Measure, grid: crate::grid::Grid2D) -> Result<LevelSetFn> {
    let inflate = 0.1 * mu.sakai_radii().r_mu;
    let field = ScalarField::from_fn(grid, |p| mu.support_distance(p) - inflate);
    LevelSetFn::from_field(field).reinitialize()
}

/// Run the fixed-point iteration for `lap u = chi_Omega - mu`.
pub fn run(mu: &Measure, omega0: &LevelSetFn, cfg: &MethodOneConfig) -> Result<MethodOneRun> {
    run_observed(mu, omega0, cfg, |_, _| Ok(()))
}

/// Like [`run`], invoking `observer(k, phi)` with the level set after every
/// interface advance (field dumps, live diagnostics).
pub fn run_observed(
    mu: &Measure,
    omega0: &LevelSetFn,
    cfg: &MethodOneConfig,
    mut observer: impl FnMut(usize, &LevelSetFn) -> Result<()>,
) -> Result<MethodOneRun> {
    cfg.validate()?;
    let grid = omega0.grid();
    let h = grid.h;
    let sakai = mu.sakai_radii();

    // The box must contain the a-priori outer ball.
    let max = grid.max_corner();
    let c = sakai.centroid;
    if c.x - sakai.outer < grid.origin.x
        || c.y - sakai.outer < grid.origin.y
        || c.x + sakai.outer > max.x
        || c.y + sakai.outer > max.y
    {
        return Err(Error::Geometry(format!(
            "grid does not contain the outer ball of radius {:.4} around ({:.4}, {:.4})",
            sakai.outer, c.x, c.y
        )));
    }

    let mu_field = mu.rasterize(grid)?;
    let support = mu.support_mask(grid);
    let mass = mu.total_mass();

    // Support strictly inside the initial domain (interior support nodes; a
    // boundary node of the support may sit exactly on the initial interface).
    let support_check = |phi: &LevelSetFn| -> bool {
        support.iter().enumerate().all(|(k, &s)| {
            if !s {
                return true;
            }
            let p = grid.pos(k % grid.nx, k / grid.nx);
            mu.support_distance(p) >= -h || phi.field.values[k] < 0.0
        })
    };
    if !support_check(omega0) {
        return Err(Error::Geometry("measure support not inside the initial domain".into()));
    }

    let f = ScalarField { grid, values: mu_field.values.iter().map(|m| 1.0 - m).collect() };

    let mut phi = omega0.clone();
    let mut reports: Vec<IterationReport> = Vec::new();
    let mut theta = 2.0 / (0.1 * sakai.r_mu).max(h); // seed for the first solve
    let mut u_prev: Option<ScalarField> = None;
    let mut v_prev: Option<ScalarField> = None;
    let mut u = ScalarField::zeros(grid);

    for k in 0..cfg.max_iters {
        let mask = DomainMask::from_levelset(&phi)?;
        if !support_check(&phi) {
            return Err(Error::Geometry("measure support left the domain".into()));
        }

        // Robin solve with the theta fixed point.
        for _ in 0..cfg.theta_fixed_point_iters {
            u = solve_robin_warm(&mask, &f, theta, u_prev.as_ref())?;
            u_prev = Some(u.clone());
            let sup_pos = robin_interface_values(&u, &mask, theta)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            match theta_update(sup_pos) {
                Some(t) => theta = t,
                None => break, // boundary already at machine zero
            }
        }
        let interface_values = robin_interface_values(&u, &mask, theta);
        let sup_abs = interface_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sup_pos = interface_values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let mass_defect = (phi.area() - mass).abs() / mass;

        // Stop on the boundary criterion, or when u <= 0 everywhere on the
        // interface: all outward speeds vanish then and the clamped dynamics
        // cannot move the boundary any further.
        if sup_abs < cfg.tol || sup_pos <= 0.0 {
            reports.push(IterationReport {
                k,
                sup_boundary_u: sup_abs,
                mass_defect,
                max_displacement: 0.0,
                theta_used: theta,
            });
            // Boundary criterion met: the volume identity must agree, else
            // the run is under-resolved and claiming success would be wrong.
            if mass_defect > 0.05 {
                return Err(Error::InvariantViolation(format!(
                    "boundary criterion met but mass defect is {:.1}% (under-resolved run)",
                    100.0 * mass_defect
                )));
            }
            return Ok(MethodOneRun { phi_final: phi, u_final: u, reports, converged: true });
        }

        // Outward speed zeta sqrt(2u) at the interface; u may be slightly
        // negative at first order, clamp before the square root.
        let speeds: Vec<f64> = interface_values
            .iter()
            .map(|&uc| cfg.zeta * (2.0 * uc.max(0.0)).sqrt())
            .collect();
        let mut v =
            solve_extension_warm(&mask, &support, &speeds, cfg.extension_forcing, v_prev.as_ref())?;
        for val in &mut v.values {
            if *val < 0.0 {
                *val = 0.0; // discrete undershoot near the interface
            }
        }
        v_prev = Some(v.clone());

        let max_v = v.values.iter().fold(0.0f64, |m, &x| m.max(x));
        // Cap the step so the interface moves at most 5 cells; the
        // remainder is picked up by the next iteration.
        let tau_eff = if cfg.tau * max_v > 5.0 * h { 5.0 * h / max_v } else { cfg.tau };
        phi = phi.advance(&v, tau_eff)?;

        if !support_check(&phi) {
            return Err(Error::InvariantViolation(
                "measure support no longer inside the domain after an advance".into(),
            ));
        }

        reports.push(IterationReport {
            k,
            sup_boundary_u: sup_abs,
            mass_defect,
            max_displacement: tau_eff * max_v,
            theta_used: theta,
        });
        observer(k, &phi)?;
    }

    Ok(MethodOneRun { phi_final: phi, u_final: u, reports, converged: false })
}

// ---- one-dimensional scheme ----

/// Uniform-density interval of a 1-D measure.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Interval1D {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

/// 1-D measure: a sum of uniform interval densities.
#[derive(Debug, Clone)]
pub struct Measure1D {
    pub intervals: Vec<Interval1D>,
}

impl Measure1D {
    pub fn new(intervals: Vec<Interval1D>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Config("1-D measure needs at least one interval".into()));
        }
        for iv in &intervals {
            if !(iv.hi > iv.lo) || !(iv.density > 0.0) {
                return Err(Error::Config("1-D intervals need hi > lo and positive density".into()));
            }
        }
        Ok(Measure1D { intervals })
    }

    pub fn total_mass(&self) -> f64 {
        self.intervals.iter().map(|iv| iv.density * (iv.hi - iv.lo)).sum()
    }

    pub fn density_at(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .filter(|iv| x >= iv.lo && x <= iv.hi)
            .map(|iv| iv.density)
            .sum()
    }

    pub fn support_bounds(&self) -> (f64, f64) {
        let lo = self.intervals.iter().map(|iv| iv.lo).fold(f64::INFINITY, f64::min);
        let hi = self.intervals.iter().map(|iv| iv.hi).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Result of the one-shot 1-D scheme.
#[derive(Debug, Clone)]
pub struct Run1DResult {
    pub c_f: f64,
    pub d_f: f64,
    /// Sampled profile on [c, d] for inspection.
    pub u_samples: Vec<(f64, f64)>,
    pub u_at_c: f64,
    pub u_at_d: f64,
}

/// Solve `u'' = 1 - mu` on `(c, d)` with the nonlinear flux conditions
/// `u'(c) = sqrt(2 u(c))` and `u'(d) = -sqrt(2 u(d))` by shooting with
/// bisection on `u(c)`, then place the free boundary one displacement away:
/// `c_f = c - sqrt(2 u(c))`, `d_f = d + sqrt(2 u(d))`.
///
/// Outside the support the true solution satisfies `(u')^2 / 2 = u`
/// exactly, so a single solve plus displacement lands on the free boundary;
/// no outer iteration is needed.
pub fn run_1d(mu: &Measure1D, c: f64, d: f64) -> Result<Run1DResult> {
    if !(d > c) {
        return Err(Error::Parameter("need d > c".into()));
    }
    let (slo, shi) = mu.support_bounds();
    if c > slo || d < shi {
        return Err(Error::Geometry("(c, d) must contain the measure support".into()));
    }
    // 1-D a-priori interval: |B_r| = 2r gives r_mu = mass / 2.
    let mass = mu.total_mass();
    let r_mu = mass / 2.0;
    let centroid: f64 = mu
        .intervals
        .iter()
        .map(|iv| iv.density * (iv.hi * iv.hi - iv.lo * iv.lo) / 2.0)
        .sum::<f64>()
        / mass;
    let big_r = mu
        .intervals
        .iter()
        .map(|iv| (centroid - iv.lo).abs().max((centroid - iv.hi).abs()))
        .fold(0.0f64, f64::max);
    // The initial interval must stay close to the support: inside the inner
    // a-priori interval (10% slack) when it exists, the outer one otherwise.
    let half = if r_mu > 2.0 * big_r { 1.1 * (r_mu - big_r) } else { r_mu + big_r };
    if c < centroid - half || d > centroid + half {
        return Err(Error::Geometry(format!(
            "initial interval ({c}, {d}) too far from the support (allowed half-width {half:.4} around {centroid:.4})"
        )));
    }

    // Piecewise-exact propagation of (u, u') across constant-forcing pieces.
    let mut breaks: Vec<f64> = vec![c, d];
    for iv in &mu.intervals {
        if iv.lo > c && iv.lo < d {
            breaks.push(iv.lo);
        }
        if iv.hi > c && iv.hi < d {
            breaks.push(iv.hi);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let shoot = |s: f64| -> (f64, f64) {
        let mut u = s;
        let mut du = (2.0 * s).sqrt();
        for w in breaks.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let q = 1.0 - mu.density_at((x0 + x1) / 2.0);
            let len = x1 - x0;
            u += du * len + q * len * len / 2.0;
            du += q * len;
        }
        (u, du)
    };
    let mismatch = |s: f64| -> f64 {
        let (ud, dud) = shoot(s);
        dud + (2.0 * ud.max(0.0)).sqrt()
    };

    let s_hi = 2.0 * (r_mu + big_r).powi(2) + 1.0;
    let f_lo = mismatch(0.0);
    let f_hi = mismatch(s_hi);
    let s_star = if f_lo.abs() < 1e-12 {
        0.0
    } else if f_lo * f_hi > 0.0 {
        return Err(Error::Geometry(
            "shooting bracket failed: initial interval not close enough to the support".into(),
        ));
    } else {
        let (mut lo, mut hi) = (0.0, s_hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mismatch(lo) * mismatch(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let (u_d, _) = shoot(s_star);
    let u_d = u_d.max(0.0);
    let c_f = c - (2.0 * s_star).sqrt();
    let d_f = d + (2.0 * u_d).sqrt();

    // Sampled profile for plotting and inspection.
    let n = 512;
    let mut u_samples = Vec::with_capacity(n + 1);
    let mut uu = s_star;
    let mut du = (2.0 * s_star).sqrt();
    let mut x = c;
    let step = (d - c) / n as f64;
    u_samples.push((x, uu));
    for _ in 0..n {
        let q = 1.0 - mu.density_at(x + step / 2.0);
        uu += du * step + q * step * step / 2.0;
        du += q * step;
        x += step;
        u_samples.push((x, uu));
    }

    Ok(Run1DResult { c_f, d_f, u_samples, u_at_c: s_star, u_at_d: u_d })
}
