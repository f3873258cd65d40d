//! Closed-form reference values: free radii of radial sources, point-mass
//! domains, and the a-priori inclusion radii used to size grids.
//!
//!     cargo run --example oracle_tables

use qdom::geom::Vec2;
use qdom::measure::{Density, Measure, MeasureComponent};
use qdom::oracle::{point_mass_domain, RadialCase};

fn main() -> qdom::Result<()> {
    println!("radial sources mu = M chi_B(0, a):  r = sqrt(M) a");
    println!("{:>6} {:>6} {:>10} {:>12}", "M", "a", "radius", "u(center)");
    for (m, a) in [(4.0, 0.5), (16.0, 0.5), (2.0, 1.0), (11.0, 0.8)] {
        let case = RadialCase::new(Vec2::ZERO, a, m, 2)?;
        println!(
            "{m:>6} {a:>6} {:>10.6} {:>12.6}",
            case.free_radius(),
            case.u_at_radius(0.0)
        );
    }

    println!("\npoint masses alpha * delta:  pi r^2 = alpha");
    for alpha in [1.0, std::f64::consts::PI, 4.0] {
        println!("  alpha = {alpha:.5} -> r = {:.6}", point_mass_domain(alpha, 2)?);
    }

    println!("\na-priori radii for a two-disc measure");
    let mu = Measure::new(vec![
        MeasureComponent::Disc {
            center: Vec2::new(-2.0, 0.0),
            radius: 1.0,
            density: Density::Uniform(4.0),
        },
        MeasureComponent::Disc {
            center: Vec2::new(2.8284271247461903, 0.0),
            radius: 1.0,
            density: Density::Uniform(8.0),
        },
    ])?;
    let s = mu.sakai_radii();
    println!("  mass {:.6}", mu.total_mass());
    println!("  centroid ({:.4}, {:.4})", s.centroid.x, s.centroid.y);
    println!("  r_mu {:.4}, R {:.4}", s.r_mu, s.big_r);
    println!("  domain contained in the ball of radius {:.4}", s.outer);
    match s.inner {
        Some(inner) => println!("  domain contains the ball of radius {inner:.4}"),
        None => println!("  no inner ball (r_mu <= 2R)"),
    }
    Ok(())
}
