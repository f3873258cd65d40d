//! Injection flow: fluid pumped into the center of a unit disc. The domain
//! at time t is the disc of area pi + t, so the radius follows
//! sqrt(1 + t/pi) exactly; each time is one quadrature-domain solve.
//!
//!     cargo run --release --example radial_injection

use qdom::geom::Vec2;
use qdom::grid::Grid2D;
use qdom::heleshaw::HeleShawRun;
use qdom::levelset::Shape;
use qdom::measure::{Measure, MeasureComponent};
use qdom::method_one::MethodOneConfig;
use std::f64::consts::PI;

fn main() -> qdom::Result<()> {
    let h = 0.03;
    let spec = HeleShawRun {
        initial_domain: Some(Shape::Disc { center: Vec2::ZERO, radius: 1.0 }),
        injection: Measure::new(vec![MeasureComponent::PointMass {
            location: Vec2::ZERO,
            mass: 1.0,
            smoothing: 3.0 * h,
        }])?,
        times: vec![1.0, 2.0, 4.0],
        solver: MethodOneConfig::default(),
    };
    let sakai = spec.measure_at(4.0)?.sakai_radii();
    let grid = Grid2D::centered(sakai.centroid, sakai.outer * 1.1, h)?;

    let result = spec.run(grid)?;
    println!("{:>5} {:>10} {:>10} {:>10}", "t", "radius", "expected", "defect");
    for step in &result.steps {
        let contour = &step.domain.contours()[0];
        let (lo, hi) = contour.radial_extent(Vec2::ZERO);
        println!(
            "{:>5} {:>10.5} {:>10.5} {:>9.3}%",
            step.t,
            (lo + hi) / 2.0,
            (1.0 + step.t / PI).sqrt(),
            100.0 * step.mass_defect
        );
    }
    println!("nested in time: {}", result.monotone);
    Ok(())
}
