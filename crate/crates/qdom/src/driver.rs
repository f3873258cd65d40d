//! Dispatch a resolved configuration to the solvers and write the run
//! artifacts: final fields and contours as CSV, per-iteration reports as
//! JSON Lines, and a `summary.json` with the convergence and a-priori
//! checks.
//!
//! Exit codes: 0 converged, 2 not converged, 3 configuration error,
//! 4 invariant violation (a run that claims success while failing a bound
//! every true solution satisfies).

use crate::config::{Method, ResolvedConfig};
use crate::curve::{hausdorff_distance, MarkerCurve};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::levelset::{LevelSetFn, Shape};
use crate::measure::{Density, Measure, MeasureComponent, SakaiRadii};
use crate::method_one;
use crate::method_two;
use crate::oracle;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Diagnostic toggles (everything that does not change the run itself).
#[derive(Debug, Clone, Copy, Default)]
pub struct Flags {
    pub dump_fields: bool,
    pub verify: bool,
    pub parallel_times: bool,
    pub verify_shape_derivative: bool,
}

#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: Value,
}

pub fn execute(cfg: &ResolvedConfig, flags: &Flags) -> Result<Outcome> {
    let outdir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&outdir)?;
    write_json(&outdir.join("resolved_config.json"), &cfg.echo())?;
    let started = Instant::now();
    let mut outcome = match cfg.method {
        Method::One => run_method_one(cfg, flags, &outdir),
        Method::Two => run_method_two(cfg, flags, &outdir),
        Method::Heleshaw => run_heleshaw(cfg, flags, &outdir),
        Method::Oracle => run_oracle(cfg, &outdir),
    }?;
    // Wall time is informational; every other summary field is a
    // deterministic function of the configuration.
    outcome.summary["wall_time_s"] = json!(started.elapsed().as_secs_f64());
    outcome.summary["exit_code"] = json!(outcome.exit_code);
    write_json(&outdir.join("summary.json"), &outcome.summary)?;
    Ok(outcome)
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn write_jsonl(path: &Path, lines: &[Value]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for line in lines {
        writeln!(f, "{}", serde_json::to_string(line)?)?;
    }
    Ok(())
}

/// A-priori inclusion checks on a set of boundary curves: every boundary
/// vertex inside the outer ball, and (when applicable) the inner ball
/// covered by the domain. Slack of one cell on both.
fn sakai_checks(curves: &[MarkerCurve], sakai: &SakaiRadii, h: f64) -> (bool, Option<bool>) {
    let outer_ok = curves.iter().all(|c| {
        c.vertices.iter().all(|&v| v.dist(sakai.centroid) <= sakai.outer + h)
    });
    let inner_ok = sakai.inner.map(|inner| {
        (0..256).all(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 256.0;
            let p = Vec2::new(
                sakai.centroid.x + inner * t.cos(),
                sakai.centroid.y + inner * t.sin(),
            );
            curves.iter().any(|c| c.contains(p) || c.distance_to(p) <= h)
        })
    });
    (outer_ok, inner_ok)
}

fn sakai_json(sakai: &SakaiRadii, outer_ok: bool, inner_ok: Option<bool>) -> Value {
    json!({
        "r_mu": sakai.r_mu,
        "big_r": sakai.big_r,
        "outer": sakai.outer,
        "inner": sakai.inner,
        "outer_sup_based": sakai.outer_sup_based,
        "centroid": [sakai.centroid.x, sakai.centroid.y],
        "outer_ok": outer_ok,
        "inner_ok": inner_ok,
    })
}

/// The oracle circle for a single uniform-disc measure with density > 1.
fn oracle_circle(measure: &Measure) -> Option<MarkerCurve> {
    if measure.components.len() != 1 {
        return None;
    }
    match &measure.components[0] {
        MeasureComponent::Disc { center, radius, density: Density::Uniform(m) } if *m > 1.0 => {
            let case = oracle::RadialCase::new(*center, *radius, *m, 2).ok()?;
            Some(MarkerCurve::circle(*center, case.free_radius(), 1024))
        }
        MeasureComponent::PointMass { location, mass, .. } => {
            let r = oracle::point_mass_domain(*mass, 2).ok()?;
            Some(MarkerCurve::circle(*location, r, 1024))
        }
        _ => None,
    }
}

fn initial_levelset(cfg: &ResolvedConfig) -> Result<LevelSetFn> {
    match &cfg.initial_shape {
        Some(shape) => LevelSetFn::from_shape(shape, cfg.grid),
        None => method_one::default_initial_domain(&cfg.measure, cfg.grid),
    }
}

fn initial_curve(cfg: &ResolvedConfig) -> Result<MarkerCurve> {
    let h = cfg.grid.h;
    let spacing = cfg.method_two.marker_spacing.unwrap_or(2.0 * h);
    match &cfg.initial_shape {
        Some(Shape::Disc { center, radius }) => {
            let n = ((2.0 * std::f64::consts::PI * radius / spacing).ceil() as usize).max(16);
            Ok(MarkerCurve::circle(*center, *radius, n))
        }
        Some(Shape::Polygon { vertices }) => MarkerCurve::new(vertices.clone())?.resample(spacing),
        Some(Shape::Union(_)) => Err(Error::Config(
            "the marker method needs a single closed initial curve, not a union".into(),
        )),
        None => {
            let sakai = cfg.measure.sakai_radii();
            let r = sakai.big_r + (0.05 * sakai.big_r).max(5.0 * h);
            let n = ((2.0 * std::f64::consts::PI * r / spacing).ceil() as usize).max(16);
            Ok(MarkerCurve::circle(sakai.centroid, r, n))
        }
    }
}

fn run_method_one(cfg: &ResolvedConfig, flags: &Flags, outdir: &Path) -> Result<Outcome> {
    let omega0 = initial_levelset(cfg)?;
    let out = if flags.dump_fields {
        method_one::run_observed(&cfg.measure, &omega0, &cfg.method_one, |k, phi| {
            phi.field.write_csv_file(outdir.join(format!("phi_iter_{k:04}.csv")))
        })?
    } else {
        method_one::run(&cfg.measure, &omega0, &cfg.method_one)?
    };

    out.u_final.write_csv_file(outdir.join("u_final.csv"))?;
    out.phi_final.field.write_csv_file(outdir.join("phi_final.csv"))?;
    let curves = out.phi_final.contours();
    for (i, c) in curves.iter().enumerate() {
        c.write_csv_file(outdir.join(format!("contour_{i}.csv")))?;
    }
    let report_lines: Vec<Value> =
        out.reports.iter().map(|r| serde_json::to_value(r).unwrap()).collect();
    write_jsonl(&outdir.join("iterations.jsonl"), &report_lines)?;

    let sakai = cfg.measure.sakai_radii();
    let (outer_ok, inner_ok) = sakai_checks(&curves, &sakai, cfg.grid.h);
    let mass_defect = oracle::mass_identity_defect(&out.phi_final, &cfg.measure);

    let mut summary = json!({
        "method": "one",
        "converged": out.converged,
        "iterations": out.reports.len(),
        "sup_boundary_u": out.reports.last().map(|r| r.sup_boundary_u),
        "mass_defect": mass_defect,
        "components": curves.len(),
        "sakai": sakai_json(&sakai, outer_ok, inner_ok),
        "grid": {"h": cfg.grid.h, "nx": cfg.grid.nx, "ny": cfg.grid.ny},
    });

    if flags.verify {
        summary["verify"] = cross_verify(cfg, Some(&curves), None)?;
    }

    let exit_code = if !out.converged {
        2
    } else if !outer_ok {
        4 // a true solution always fits the outer ball: solver bug
    } else {
        0
    };
    Ok(Outcome { exit_code, summary })
}

fn run_method_two(cfg: &ResolvedConfig, flags: &Flags, outdir: &Path) -> Result<Outcome> {
    let gamma0 = initial_curve(cfg)?;
    let out = if flags.dump_fields {
        method_two::run_observed(&cfg.measure, &gamma0, cfg.grid, &cfg.method_two, |k, c| {
            c.write_csv_file(outdir.join(format!("gamma_iter_{k:04}.csv")))
        })?
    } else {
        method_two::run(&cfg.measure, &gamma0, cfg.grid, &cfg.method_two)?
    };

    out.u_final.write_csv_file(outdir.join("u_final.csv"))?;
    out.gamma_final.write_csv_file(outdir.join("gamma_final.csv"))?;
    let report_lines: Vec<Value> =
        out.reports.iter().map(|r| serde_json::to_value(r).unwrap()).collect();
    write_jsonl(&outdir.join("iterations.jsonl"), &report_lines)?;

    let sakai = cfg.measure.sakai_radii();
    let curves = vec![out.gamma_final.clone()];
    let (outer_ok, inner_ok) = sakai_checks(&curves, &sakai, cfg.grid.h);
    let mass = cfg.measure.total_mass();
    let mass_defect = (out.gamma_final.area() - mass).abs() / mass;

    let mut summary = json!({
        "method": "two",
        "converged": out.converged,
        "iterations": out.reports.len(),
        "grad_l2": out.reports.last().map(|r| r.grad_l2),
        "energy": out.reports.last().map(|r| r.energy),
        "mass_defect": mass_defect,
        "sakai": sakai_json(&sakai, outer_ok, inner_ok),
        "grid": {"h": cfg.grid.h, "nx": cfg.grid.nx, "ny": cfg.grid.ny},
    });

    if flags.verify_shape_derivative {
        let v_n = vec![1.0; out.gamma_final.len()];
        let chk = method_two::shape_derivative_check(&cfg.measure, &out.gamma_final, cfg.grid, &v_n)?;
        summary["shape_derivative"] = serde_json::to_value(chk)?;
    }
    if flags.verify {
        summary["verify"] = cross_verify(cfg, None, Some(&out.gamma_final))?;
    }

    let exit_code = if !out.converged {
        2
    } else if !outer_ok {
        4
    } else {
        0
    };
    Ok(Outcome { exit_code, summary })
}

/// Run the other method on the same configuration and compare boundaries;
/// when a closed-form radial solution exists, compare against it too.
fn cross_verify(
    cfg: &ResolvedConfig,
    curves_one: Option<&[MarkerCurve]>,
    curve_two: Option<&MarkerCurve>,
) -> Result<Value> {
    let one_main: MarkerCurve = match curves_one {
        Some(cs) => cs
            .iter()
            .max_by(|a, b| a.area().partial_cmp(&b.area()).unwrap())
            .cloned()
            .ok_or_else(|| Error::Degenerate("no contour to verify".into()))?,
        None => {
            let omega0 = initial_levelset(cfg)?;
            let out = method_one::run(&cfg.measure, &omega0, &cfg.method_one)?;
            out.phi_final
                .contours()
                .into_iter()
                .max_by(|a, b| a.area().partial_cmp(&b.area()).unwrap())
                .ok_or_else(|| Error::Degenerate("level-set run produced no contour".into()))?
        }
    };
    let two: MarkerCurve = match curve_two {
        Some(c) => c.clone(),
        None => {
            let gamma0 = initial_curve(cfg)?;
            method_two::run(&cfg.measure, &gamma0, cfg.grid, &cfg.method_two)?.gamma_final
        }
    };
    let cross = hausdorff_distance(&one_main, &two);
    let mut v = json!({
        "hausdorff_method_one_vs_two": cross,
        "within_3h": cross <= 3.0 * cfg.grid.h,
    });
    if let Some(oracle_curve) = oracle_circle(&cfg.measure) {
        v["hausdorff_one_vs_oracle"] = json!(hausdorff_distance(&one_main, &oracle_curve));
        v["hausdorff_two_vs_oracle"] = json!(hausdorff_distance(&two, &oracle_curve));
    }
    Ok(v)
}

fn run_heleshaw(cfg: &ResolvedConfig, flags: &Flags, outdir: &Path) -> Result<Outcome> {
    let hs = cfg
        .heleshaw
        .as_ref()
        .ok_or_else(|| Error::Config("method \"heleshaw\" needs a heleshaw block".into()))?;
    let spec = crate::heleshaw::HeleShawRun {
        initial_domain: hs.initial_domain.as_ref().map(|s| s.to_shape()),
        injection: cfg.measure.clone(),
        times: hs.times.clone(),
        solver: cfg.method_one,
    };
    let result = if flags.parallel_times {
        spec.run_parallel(cfg.grid)?
    } else {
        spec.run(cfg.grid)?
    };

    let mut lines = Vec::new();
    let mut per_time = Vec::new();
    for step in &result.steps {
        let curves = step.domain.contours();
        let mut path = outdir.join(format!("d_t_{}.csv", step.t));
        let mut f = fs::File::create(&path)?;
        for (i, c) in curves.iter().enumerate() {
            if i > 0 {
                writeln!(f)?; // blank line between components
            }
            c.write_csv(&mut f)?;
        }
        drop(f);
        path = outdir.join(format!("phi_t_{}.csv", step.t));
        if flags.dump_fields {
            step.domain.field.write_csv_file(&path)?;
        }
        for r in &step.reports {
            let mut v = serde_json::to_value(r)?;
            v["t"] = json!(step.t);
            lines.push(v);
        }
        per_time.push(json!({
            "t": step.t,
            "converged": step.converged,
            "components": step.components,
            "mass_defect": step.mass_defect,
            "complementarity": step.complementarity,
            "iterations": step.reports.len(),
        }));
    }
    for n in &result.nesting {
        lines.push(json!({"nesting": serde_json::to_value(n)?}));
    }
    write_jsonl(&outdir.join("iterations.jsonl"), &lines)?;

    let mut final_sakai = json!(null);
    let mut outer_ok = true;
    if let Some(last) = result.steps.last() {
        last.domain.field.write_csv_file(outdir.join("phi_final.csv"))?;
        last.u.write_csv_file(outdir.join("u_final.csv"))?;
        // A-priori bound at the last (largest) time.
        let sakai = spec.measure_at(last.t)?.sakai_radii();
        let curves = last.domain.contours();
        let (ok, inner_ok) = sakai_checks(&curves, &sakai, cfg.grid.h);
        outer_ok = ok;
        final_sakai = sakai_json(&sakai, ok, inner_ok);
    }

    let all_converged = result.steps.iter().all(|s| s.converged);
    let summary = json!({
        "method": "heleshaw",
        "converged": all_converged,
        "monotone": result.monotone,
        "times": per_time,
        "nesting": result.nesting.iter().map(|n| serde_json::to_value(n).unwrap()).collect::<Vec<_>>(),
        "sakai": final_sakai,
        "mass_defect": result.steps.iter().map(|s| s.mass_defect).fold(0.0f64, f64::max),
        "grid": {"h": cfg.grid.h, "nx": cfg.grid.nx, "ny": cfg.grid.ny},
    });
    let exit_code = if !all_converged {
        2
    } else if !result.monotone || !outer_ok {
        4 // weak solutions nest in time and respect the outer ball
    } else {
        0
    };
    Ok(Outcome { exit_code, summary })
}

fn run_oracle(cfg: &ResolvedConfig, _outdir: &Path) -> Result<Outcome> {
    let sakai = cfg.measure.sakai_radii();
    let mut rows = Vec::new();
    for (i, c) in cfg.measure.components.iter().enumerate() {
        let mut row = json!({
            "component": i,
            "mass": c.mass(),
            "support_area": c.support_area(),
            "sup_density": c.sup_density(),
        });
        match c {
            MeasureComponent::Disc { center, radius, density: Density::Uniform(m) } if *m > 1.0 => {
                let case = oracle::RadialCase::new(*center, *radius, *m, 2)?;
                row["free_radius"] = json!(case.free_radius());
                row["center_value"] = json!(case.u_at_radius(0.0));
            }
            MeasureComponent::PointMass { mass, .. } => {
                row["free_radius"] = json!(oracle::point_mass_domain(*mass, 2)?);
            }
            _ => {}
        }
        rows.push(row);
    }
    let summary = json!({
        "method": "oracle",
        "total_mass": cfg.measure.total_mass(),
        "sakai": sakai_json(&sakai, true, None),
        "components": rows,
    });
    println!("total mass        {:>12.6}", cfg.measure.total_mass());
    println!("mass radius r_mu  {:>12.6}", sakai.r_mu);
    println!("support radius R  {:>12.6}", sakai.big_r);
    println!("outer bound       {:>12.6}", sakai.outer);
    match sakai.inner {
        Some(inner) => println!("inner bound       {:>12.6}", inner),
        None => println!("inner bound       {:>12}", "n/a"),
    }
    for row in summary["components"].as_array().unwrap() {
        if let Some(r) = row.get("free_radius") {
            println!("component {} free radius {:.6}", row["component"], r.as_f64().unwrap());
        }
    }
    Ok(Outcome { exit_code: 0, summary })
}
