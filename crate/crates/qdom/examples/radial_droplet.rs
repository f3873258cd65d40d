//! Level-set solve of the radial benchmark: a disc of density 4 and radius
//! 1/2 must produce the unit disc (free radius sqrt(4) * 0.5 = 1).
//!
//!     cargo run --release --example radial_droplet

use qdom::geom::Vec2;
use qdom::grid::Grid2D;
use qdom::measure::{Density, Measure, MeasureComponent};
use qdom::method_one::{self, MethodOneConfig};
use qdom::oracle::RadialCase;

fn main() -> qdom::Result<()> {
    let h = 0.02;
    let mu = Measure::new(vec![MeasureComponent::Disc {
        center: Vec2::ZERO,
        radius: 0.5,
        density: Density::Uniform(4.0),
    }])?;
    let case = RadialCase::new(Vec2::ZERO, 0.5, 4.0, 2)?;
    let sakai = mu.sakai_radii();
    println!("total mass {:.6}, outer bound {:.4}", mu.total_mass(), sakai.outer);
    println!("closed-form free radius: {:.6}", case.free_radius());

    let grid = Grid2D::centered(sakai.centroid, sakai.outer * 1.1, h)?;
    let omega0 = method_one::default_initial_domain(&mu, grid)?;
    let run = method_one::run(&mu, &omega0, &MethodOneConfig::default())?;

    println!("converged: {} in {} iterations", run.converged, run.reports.len());
    for r in &run.reports {
        println!(
            "  k = {:2}  sup_boundary_u = {:.3e}  mass defect = {:.4}  moved {:.4}",
            r.k, r.sup_boundary_u, r.mass_defect, r.max_displacement
        );
    }
    let contour = &run.phi_final.contours()[0];
    let (lo, hi) = contour.radial_extent(Vec2::ZERO);
    println!("final boundary radius in [{lo:.5}, {hi:.5}] (target 1, cell {h})");
    Ok(())
}
