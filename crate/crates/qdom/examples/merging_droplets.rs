//! Topology change under a growing measure: two uniform discs of density
//! ratio 1:2 produce separate domains that touch tangentially around t = 4
//! and merge into one for larger t. The level-set solver tracks the merge
//! without any special casing.
//!
//!     cargo run --release --example merging_droplets

use qdom::geom::Vec2;
use qdom::grid::Grid2D;
use qdom::heleshaw::HeleShawRun;
use qdom::measure::{Density, Measure, MeasureComponent};
use qdom::method_one::MethodOneConfig;

fn main() -> qdom::Result<()> {
    let spec = HeleShawRun {
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
        ])?,
        times: vec![3.5, 5.0, 6.0],
        solver: MethodOneConfig::default(),
    };

    // One grid sized for the largest time.
    let sakai = spec.measure_at(6.0)?.sakai_radii();
    let grid = Grid2D::centered(sakai.centroid, sakai.outer * 1.1, 0.06)?;
    println!("grid {} x {} at h = {}", grid.nx, grid.ny, grid.h);

    let result = spec.run(grid)?;
    for step in &result.steps {
        println!(
            "t = {:>4}: {} component(s), area {:.3} vs mass {:.3} (defect {:.3}%), {} iterations",
            step.t,
            step.components,
            step.domain.area(),
            spec.measure_at(step.t)?.total_mass(),
            100.0 * step.mass_defect,
            step.reports.len()
        );
    }
    println!("domains nested in time: {}", result.monotone);
    Ok(())
}
