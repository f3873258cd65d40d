//! Marker-based shape-Newton solve for a polygonal source of density 1.5:
//! the free boundary is a smooth curve hugging the polygon, found in a
//! handful of iterations while the energy decreases.
//!
//!     cargo run --release --example polygon_source

use qdom::curve::MarkerCurve;
use qdom::geom::Vec2;
use qdom::grid::Grid2D;
use qdom::measure::{Density, Measure, MeasureComponent};
use qdom::method_two::{self, MethodTwoConfig};

fn main() -> qdom::Result<()> {
    let h = 0.015;
    let vertices: Vec<Vec2> = [
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
    .collect();
    let mu = Measure::new(vec![MeasureComponent::Polygon {
        vertices,
        density: Density::Uniform(1.5),
    }])?;
    let sakai = mu.sakai_radii();
    let grid = Grid2D::centered(sakai.centroid, sakai.outer * 1.1, h)?;

    // Initial guess: a circle just enclosing the polygon.
    let r0 = sakai.big_r * 1.05;
    let gamma0 = MarkerCurve::circle(sakai.centroid, r0, 256);
    let run = method_two::run(&mu, &gamma0, grid, &MethodTwoConfig::default())?;

    println!("converged: {} in {} iterations", run.converged, run.reports.len());
    for r in &run.reports {
        println!(
            "  k = {}  ||grad u||_L2(boundary) = {:.4e}  E = {:.6}  mass defect = {:.4}",
            r.k, r.grad_l2, r.energy, r.mass_defect
        );
    }
    let c = &run.gamma_final;
    println!(
        "final boundary: {} markers, area {:.4} (mass {:.4}), perimeter {:.4}",
        c.len(),
        c.area(),
        mu.total_mass(),
        c.perimeter()
    );
    Ok(())
}
