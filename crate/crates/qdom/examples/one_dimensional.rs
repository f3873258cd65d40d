//! The 1-D scheme needs exactly one iteration: solve the two-point problem
//! u'' = 1 - mu with the nonlinear flux conditions u' = +-sqrt(2u), then
//! displace each endpoint by sqrt(2u). Outside the support the solution
//! satisfies (u')^2/2 = u exactly, so the displacement lands on the free
//! boundary to solver precision.
//!
//!     cargo run --release --example one_dimensional

use qdom::method_one::{run_1d, Interval1D, Measure1D};

fn main() -> qdom::Result<()> {
    // Density 3 on [-1/2, 1/2]: total mass 3, free boundary at +-3/2.
    let mu = Measure1D::new(vec![Interval1D { lo: -0.5, hi: 0.5, density: 3.0 }])?;
    let out = run_1d(&mu, -0.6, 0.6)?;
    println!("symmetric source, mass {}", mu.total_mass());
    println!("  u(c) = {:.9}, u(d) = {:.9}", out.u_at_c, out.u_at_d);
    println!("  free boundary ({:.9}, {:.9})  [exact: (-1.5, 1.5)]", out.c_f, out.d_f);

    // Asymmetric source: density 2 on [0, 1], free boundary (-1/2, 3/2).
    let mu = Measure1D::new(vec![Interval1D { lo: 0.0, hi: 1.0, density: 2.0 }])?;
    let out = run_1d(&mu, -0.02, 1.02)?;
    println!("asymmetric source, mass {}", mu.total_mass());
    println!(
        "  free boundary ({:.9}, {:.9}), length {:.9}",
        out.c_f,
        out.d_f,
        out.d_f - out.c_f
    );
    Ok(())
}
