//! Acceptance suite: every capability checked end to end against closed
//! forms and a-priori identities, one pass/fail line per criterion
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The heavy solver runs are shared across criteria through a lazily built
//! registry, so the suite performs each run once.

use qdom::config::parse_config;
use qdom::curve::hausdorff_distance;
use qdom::driver::{execute, Flags};
use qdom::geom::Vec2;
use qdom::grid::Grid2D;
use qdom::heleshaw::{HeleShawResult, HeleShawRun};
use qdom::levelset::Shape;
use qdom::measure::{Density, Measure, MeasureComponent};
use qdom::method_one::{self, MethodOneConfig, MethodOneRun};
use qdom::method_two::{self, sample_gradient, MethodTwoConfig, MethodTwoRun};
use qdom::MarkerCurve;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Non-convex sample polygon used for the polygon-source cases.
fn polygon_p() -> Vec<Vec2> {
    [
        (-0.8, -0.6),
        (0.1, -0.9),
        (0.9, -0.3),
        (0.7, 0.5),
        (0.0, 0.9),
        (-0.2, 0.4),
        (-0.9, 0.3),
    ]
    .iter()
    .map(|&(x, y)| Vec2::new(x, y))
    .collect()
}

fn disc_measure(center: Vec2, radius: f64, m: f64) -> Measure {
    Measure::new(vec![MeasureComponent::Disc { center, radius, density: Density::Uniform(m) }])
        .unwrap()
}

fn polygon_measure(density: f64) -> Measure {
    Measure::new(vec![MeasureComponent::Polygon {
        vertices: polygon_p(),
        density: Density::Uniform(density),
    }])
    .unwrap()
}

fn auto_grid(mu: &Measure, h: f64) -> Grid2D {
    let sakai = mu.sakai_radii();
    Grid2D::centered(sakai.centroid, sakai.outer * 1.1, h).unwrap()
}

struct Shared {
    /// Radial benchmark, level-set method, h = 0.01.
    radial_one: MethodOneRun,
    radial_h: f64,
    /// Radial benchmark, marker method from circle(0.7), h = 0.01.
    radial_two: MethodTwoRun,
    /// Sakai instance (density 16), level-set method, h = 0.02.
    sakai_run: MethodOneRun,
    sakai_h: f64,
    /// Weighted-disc source, level-set method, h = 0.02.
    weighted_run: MethodOneRun,
    weighted_measure: Measure,
    /// Polygon source, density 11, marker method, h = 0.02.
    ball_like: MethodTwoRun,
    /// Polygon source, density 1.5, both methods, h = 0.015.
    cross_one: MethodOneRun,
    cross_two: MethodTwoRun,
    cross_h: f64,
    /// Two-disc injection flow, h = 0.05.
    merging: HeleShawResult,
    merging_masses: Vec<f64>,
    /// Radial injection flow, h = 0.02.
    injection: HeleShawResult,
    injection_h: f64,
    /// (name, mass defect) of every converged 2-D run above.
    mass_defects: Vec<(String, f64)>,
}

fn shared() -> &'static Shared {
    static SHARED: OnceLock<Shared> = OnceLock::new();
    SHARED.get_or_init(|| {
        let mut mass_defects = Vec::new();

        // Radial benchmark: density 4 on a disc of radius 0.5, free radius 1.
        let radial_h = 0.01;
        let radial_mu = disc_measure(Vec2::ZERO, 0.5, 4.0);
        let grid = auto_grid(&radial_mu, radial_h);
        let omega0 = method_one::default_initial_domain(&radial_mu, grid).unwrap();
        let radial_one = method_one::run(&radial_mu, &omega0, &MethodOneConfig::default()).unwrap();
        mass_defects.push((
            "radial, level-set method".into(),
            (radial_one.phi_final.area() - radial_mu.total_mass()).abs() / radial_mu.total_mass(),
        ));

        // Plain Newton overshoots from radius 0.7 (the first step lands past
        // the free boundary) and the return move raises the energy, which
        // decreases only along outward motion. A mild damping keeps the
        // approach one-sided so the energy check is meaningful.
        let gamma0 = MarkerCurve::circle(Vec2::ZERO, 0.7, 440);
        let cfg_two = MethodTwoConfig { step_scale: 0.8, ..Default::default() };
        let radial_two = method_two::run(&radial_mu, &gamma0, grid, &cfg_two).unwrap();
        mass_defects.push((
            "radial, marker method".into(),
            (radial_two.gamma_final.area() - radial_mu.total_mass()).abs()
                / radial_mu.total_mass(),
        ));

        // Sakai sandwich instance: mass 4 pi forces r_mu = 2.
        let sakai_h = 0.02;
        let sakai_mu = disc_measure(Vec2::ZERO, 0.5, 16.0);
        let grid = auto_grid(&sakai_mu, sakai_h);
        let omega0 = method_one::default_initial_domain(&sakai_mu, grid).unwrap();
        let sakai_run = method_one::run(&sakai_mu, &omega0, &MethodOneConfig::default()).unwrap();
        mass_defects.push((
            "sakai instance".into(),
            (sakai_run.phi_final.area() - sakai_mu.total_mass()).abs() / sakai_mu.total_mass(),
        ));

        // Weighted disc 1 + 2x^2 + y^2 on the unit disc.
        let weighted_measure = Measure::new(vec![MeasureComponent::Disc {
            center: Vec2::ZERO,
            radius: 1.0,
            density: Density::Poly(qdom::Poly2 {
                terms: vec![(1.0, 0, 0), (2.0, 2, 0), (1.0, 0, 2)],
            }),
        }])
        .unwrap();
        let grid = auto_grid(&weighted_measure, 0.02);
        let omega0 = method_one::default_initial_domain(&weighted_measure, grid).unwrap();
        let weighted_run =
            method_one::run(&weighted_measure, &omega0, &MethodOneConfig::default()).unwrap();
        mass_defects.push((
            "weighted disc".into(),
            (weighted_run.phi_final.area() - weighted_measure.total_mass()).abs()
                / weighted_measure.total_mass(),
        ));

        // Polygon source, density 11: domain close to a ball.
        let mu11 = polygon_measure(11.0);
        let grid = auto_grid(&mu11, 0.02);
        let sak = mu11.sakai_radii();
        let r0 = sak.big_r + (0.05 * sak.big_r).max(5.0 * 0.02);
        let gamma0 = MarkerCurve::circle(sak.centroid, r0, 256);
        let ball_like = method_two::run(&mu11, &gamma0, grid, &MethodTwoConfig::default()).unwrap();
        mass_defects.push((
            "polygon density 11".into(),
            (ball_like.gamma_final.area() - mu11.total_mass()).abs() / mu11.total_mass(),
        ));

        // Polygon source, density 1.5: both methods on the same grid.
        let cross_h = 0.015;
        let mu15 = polygon_measure(1.5);
        let grid = auto_grid(&mu15, cross_h);
        let omega0 = method_one::default_initial_domain(&mu15, grid).unwrap();
        let cross_one = method_one::run(&mu15, &omega0, &MethodOneConfig::default()).unwrap();
        let sak = mu15.sakai_radii();
        let r0 = sak.big_r + (0.05 * sak.big_r).max(5.0 * cross_h);
        let gamma0 = MarkerCurve::circle(sak.centroid, r0, 256);
        let cross_two = method_two::run(&mu15, &gamma0, grid, &MethodTwoConfig::default()).unwrap();
        mass_defects.push((
            "polygon density 1.5, level-set method".into(),
            (cross_one.phi_final.area() - mu15.total_mass()).abs() / mu15.total_mass(),
        ));
        mass_defects.push((
            "polygon density 1.5, marker method".into(),
            (cross_two.gamma_final.area() - mu15.total_mass()).abs() / mu15.total_mass(),
        ));

        // Two-disc injection: mu_t = t (chi_B1 + 2 chi_B2), tangency at t=4.
        let merging_spec = HeleShawRun {
            initial_domain: None,
            injection: Measure::new(vec![
                MeasureComponent::Disc {
                    center: Vec2::new(-2.0, 0.0),
                    radius: 1.0,
                    density: Density::Uniform(1.0),
                },
                MeasureComponent::Disc {
                    center: Vec2::new(8.0_f64.sqrt(), 0.0),
                    radius: 1.0,
                    density: Density::Uniform(2.0),
                },
            ])
            .unwrap(),
            times: vec![3.5, 5.0, 6.0],
            solver: MethodOneConfig::default(),
        };
        let grid = auto_grid(&merging_spec.measure_at(6.0).unwrap(), 0.05);
        let merging = merging_spec.run(grid).unwrap();
        let merging_masses: Vec<f64> = merging_spec
            .times
            .iter()
            .map(|&t| merging_spec.measure_at(t).unwrap().total_mass())
            .collect();
        for step in &merging.steps {
            mass_defects.push((format!("two-disc injection t = {}", step.t), step.mass_defect));
        }

        // Radial injection into a unit disc.
        let injection_h = 0.02;
        let injection_spec = HeleShawRun {
            initial_domain: Some(Shape::Disc { center: Vec2::ZERO, radius: 1.0 }),
            injection: Measure::new(vec![MeasureComponent::PointMass {
                location: Vec2::ZERO,
                mass: 1.0,
                smoothing: 3.0 * injection_h,
            }])
            .unwrap(),
            times: vec![1.0, 2.0, 4.0],
            solver: MethodOneConfig::default(),
        };
        let grid = auto_grid(&injection_spec.measure_at(4.0).unwrap(), injection_h);
        let injection = injection_spec.run(grid).unwrap();
        for step in &injection.steps {
            mass_defects.push((format!("radial injection t = {}", step.t), step.mass_defect));
        }

        Shared {
            radial_one,
            radial_h,
            radial_two,
            sakai_run,
            sakai_h,
            weighted_run,
            weighted_measure,
            ball_like,
            cross_one,
            cross_two,
            cross_h,
            merging,
            merging_masses,
            injection,
            injection_h,
            mass_defects,
        }
    })
}

fn criterion(n: usize, what: &str, pass: bool, details: &str) {
    println!("criterion {n:2}: {} - {what} ({details})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {what}: {details}");
}

fn radial_deviation(curve: &MarkerCurve, center: Vec2, target: f64) -> f64 {
    curve
        .vertices
        .iter()
        .map(|v| (v.dist(center) - target).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_01_radial_oracle_level_set_method() {
    let s = shared();
    let curves = s.radial_one.phi_final.contours();
    let dev = radial_deviation(&curves[0], Vec2::ZERO, 1.0);
    criterion(
        1,
        "level-set method recovers the radius-1 circle",
        s.radial_one.converged && curves.len() == 1 && dev <= 2.0 * s.radial_h,
        &format!("max radial deviation {dev:.5} vs 2h = {:.5}", 2.0 * s.radial_h),
    );
}

#[test]
fn criterion_02_radial_oracle_marker_method() {
    let s = shared();
    let dev = radial_deviation(&s.radial_two.gamma_final, Vec2::ZERO, 1.0);
    let mut energy_ok = true;
    let mut worst_rise = 0.0f64;
    for w in s.radial_two.reports.windows(2).skip(1) {
        let rise = (w[1].energy - w[0].energy) / w[0].energy.abs().max(1e-12);
        worst_rise = worst_rise.max(rise);
        if rise > 1e-3 {
            energy_ok = false;
        }
    }
    criterion(
        2,
        "marker method recovers the circle with non-increasing energy",
        s.radial_two.converged && dev <= 2.0 * s.radial_h && energy_ok,
        &format!(
            "deviation {dev:.5} vs 2h = {:.5}, worst relative energy rise {worst_rise:.2e}",
            2.0 * s.radial_h
        ),
    );
}

#[test]
fn criterion_03_mass_identity_all_runs() {
    let s = shared();
    let worst = s
        .mass_defects
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    criterion(
        3,
        "volume of every converged domain matches its measure within 2%",
        s.mass_defects.iter().all(|(_, d)| *d <= 0.02),
        &format!("worst: {} at {:.4}", worst.0, worst.1),
    );
}

#[test]
fn criterion_04_sakai_sandwich() {
    let s = shared();
    let curves = s.sakai_run.phi_final.contours();
    let h = s.sakai_h;
    let (mut min_r, mut max_r) = (f64::INFINITY, 0.0f64);
    for c in &curves {
        let (lo, hi) = c.radial_extent(Vec2::ZERO);
        min_r = min_r.min(lo);
        max_r = max_r.max(hi);
    }
    criterion(
        4,
        "converged domain sits between the a-priori balls B(1.5) and B(2.5)",
        s.sakai_run.converged && min_r >= 1.5 - h && max_r <= 2.5 + h,
        &format!("boundary radii in [{min_r:.4}, {max_r:.4}]"),
    );
}

#[test]
fn criterion_05_gradient_ratio_near_boundary() {
    let s = shared();
    let u = &s.radial_one.u_final;
    let h = s.radial_h;
    let curves = s.radial_one.phi_final.contours();
    let curve = &curves[0];
    let mut worst: f64 = 1.0;
    let mut checked = 0;
    let stride = (curve.len() / 24).max(1);
    for k in (0..curve.len()).step_by(stride) {
        let inward = -curve.outward_normal(k);
        for dist_cells in [3.0, 5.0, 7.0, 10.0] {
            let p = curve.vertices[k] + inward * (dist_cells * h);
            let grad = u.gradient_at(p).unwrap().norm();
            let val = u.interpolate(p).unwrap().max(0.0);
            let ratio = grad / (2.0 * val).sqrt().max(1e-12);
            if (ratio - 1.0).abs() > (worst - 1.0).abs() {
                worst = ratio;
            }
            checked += 1;
            assert!(
                (0.85..=1.15).contains(&ratio),
                "ratio {ratio:.4} at {dist_cells} cells inside, vertex {k}"
            );
        }
    }
    criterion(
        5,
        "|grad u| / sqrt(2u) close to 1 near the free boundary",
        checked > 50,
        &format!("worst ratio {worst:.4} over {checked} samples in [3h, 10h]"),
    );
}

#[test]
fn criterion_06_weighted_disc_fast_convergence() {
    let s = shared();
    let iters = s.weighted_run.reports.len();
    // |grad u| on the final boundary against the interior scale of u.
    let curves = s.weighted_run.phi_final.contours();
    let curve = &curves[0];
    let u = &s.weighted_run.u_final;
    let mut grad_max = 0.0f64;
    for k in 0..curve.len() {
        let n = curve.outward_normal(k);
        if let Ok(g) = sample_gradient(u, curve.vertices[k], n) {
            grad_max = grad_max.max(g.norm());
        }
    }
    let sup_u = u.values.iter().cloned().fold(0.0f64, f64::max);
    let bound = 0.05 * (2.0 * sup_u).sqrt();
    criterion(
        6,
        "weighted-disc source converges in at most 5 sweeps with a flat boundary gradient",
        s.weighted_run.converged && iters <= 5 && grad_max <= bound,
        &format!("{iters} iterations, |grad u| on boundary {grad_max:.4} vs bound {bound:.4}"),
    );
    let _ = &s.weighted_measure;
}

#[test]
fn criterion_07_strong_polygon_source_is_nearly_a_ball() {
    let s = shared();
    let c = &s.ball_like.gamma_final;
    let ratio = 4.0 * PI * c.area() / (c.perimeter() * c.perimeter());
    criterion(
        7,
        "density-11 polygon source produces a near-circular domain",
        s.ball_like.converged && ratio >= 0.99,
        &format!("isoperimetric ratio {ratio:.5}"),
    );
}

#[test]
fn criterion_08_two_disc_injection_merges() {
    let s = shared();
    let counts: Vec<usize> = s.merging.steps.iter().map(|st| st.components).collect();
    let all_converged = s.merging.steps.iter().all(|st| st.converged);
    let mass_ok = s.merging.steps.iter().all(|st| st.mass_defect <= 0.02);
    criterion(
        8,
        "two sources stay separate at t = 3.5 and merge by t = 5",
        all_converged && counts == vec![2, 1, 1] && mass_ok,
        &format!(
            "components {:?}, masses {:?}, worst defect {:.4}",
            counts,
            s.merging_masses,
            s.merging.steps.iter().map(|st| st.mass_defect).fold(0.0, f64::max)
        ),
    );
}

#[test]
fn criterion_09_one_dimensional_single_shot() {
    let mu = method_one::Measure1D::new(vec![method_one::Interval1D {
        lo: -0.5,
        hi: 0.5,
        density: 3.0,
    }])
    .unwrap();
    let out = method_one::run_1d(&mu, -0.6, 0.6).unwrap();
    let err = (out.c_f + 1.5).abs().max((out.d_f - 1.5).abs());
    criterion(
        9,
        "one shooting solve plus displacement lands on the 1-D free boundary",
        err <= 1e-6,
        &format!("free boundary ({:.8}, {:.8}), error {err:.2e}", out.c_f, out.d_f),
    );
}

#[test]
fn criterion_10_shape_derivative_consistency() {
    let h = 0.01;
    let mu = disc_measure(Vec2::ZERO, 0.5, 4.0);
    let grid = auto_grid(&mu, h);
    let sigma = MarkerCurve::circle(Vec2::ZERO, 0.9, 512);
    let v_n = vec![1.0; sigma.len()];
    let chk = method_two::shape_derivative_check(&mu, &sigma, grid, &v_n).unwrap();
    let rel = (chk.analytic - chk.finite_diff).abs() / chk.analytic.abs().max(1e-12);
    criterion(
        10,
        "boundary-integral energy derivative matches the finite difference",
        rel <= 0.05,
        &format!("analytic {:.6}, finite difference {:.6}, gap {rel:.3}", chk.analytic, chk.finite_diff),
    );
}

#[test]
fn criterion_11_methods_agree_on_polygon_source() {
    let s = shared();
    let one_main = s
        .cross_one
        .phi_final
        .contours()
        .into_iter()
        .max_by(|a, b| a.area().partial_cmp(&b.area()).unwrap())
        .unwrap();
    let d = hausdorff_distance(&one_main, &s.cross_two.gamma_final);
    criterion(
        11,
        "level-set and marker boundaries agree",
        s.cross_one.converged && s.cross_two.converged && d <= 3.0 * s.cross_h,
        &format!("Hausdorff distance {d:.5} vs 3h = {:.5}", 3.0 * s.cross_h),
    );
}

#[test]
fn criterion_12_radial_injection_monotone() {
    let s = shared();
    let h = s.injection_h;
    let mut radius_ok = true;
    let mut detail = String::new();
    for step in &s.injection.steps {
        let expect = (1.0 + step.t / PI).sqrt();
        let curves = step.domain.contours();
        let dev = radial_deviation(&curves[0], Vec2::ZERO, expect);
        detail.push_str(&format!("t = {}: dev {:.4}; ", step.t, dev));
        if curves.len() != 1 || dev > 2.0 * h || !step.converged {
            radius_ok = false;
        }
    }
    criterion(
        12,
        "injected domains nest and follow the area law",
        s.injection.monotone && radius_ok,
        &format!("{detail}nesting ok: {}", s.injection.monotone),
    );
}

/// The CLI contract on a tiny instance: artifacts, exit codes, determinism.
#[test]
fn cli_round_trip_is_deterministic() {
    let dir = std::env::temp_dir().join("qdom_acceptance_cli");
    let _ = std::fs::remove_dir_all(&dir);
    let config = format!(
        r#"{{
            "method": "one",
            "measure": [{{"kind": "disc", "center": [0, 0], "radius": 0.5, "density": 4.0}}],
            "grid": {{"h": 0.05}},
            "output_dir": "{}"
        }}"#,
        dir.display()
    );
    let cfg = parse_config(&config).unwrap();
    let first = execute(&cfg, &Flags::default()).unwrap();
    assert_eq!(first.exit_code, 0);
    let mut a = first.summary;
    let second = execute(&cfg, &Flags::default()).unwrap();
    let mut b = second.summary;
    // Wall time is the one intentionally non-reproducible field.
    a["wall_time_s"] = serde_json::Value::Null;
    b["wall_time_s"] = serde_json::Value::Null;
    assert_eq!(a, b, "summaries differ between identical runs");
    for f in ["u_final.csv", "phi_final.csv", "contour_0.csv", "iterations.jsonl", "summary.json", "resolved_config.json"] {
        assert!(dir.join(f).exists(), "missing artifact {f}");
    }
}
