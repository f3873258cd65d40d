//! The source measure: components, exact masses, a-priori radii, and
//! rasterization onto a grid.
//!
//! Densities are polynomials so that all masses and first moments are exact
//! (discs via central moments, polygons via Green's theorem with
//! Gauss-Legendre edge quadrature). Point masses are smoothed into small
//! discs of equal mass, since the elliptic solves need a bounded right-hand
//! side.

use crate::error::{Error, Result};
use crate::geom::{point_in_polygon, polygon_signed_distance, Vec2};
use crate::grid::{Grid2D, ScalarField};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Polynomial in two variables, stored as `(coeff, pow_x, pow_y)` terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly2 {
    pub terms: Vec<(f64, u32, u32)>,
}

impl Poly2 {
    pub fn constant(c: f64) -> Self {
        Poly2 { terms: vec![(c, 0, 0)] }
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        self.terms
            .iter()
            .map(|&(c, px, py)| c * p.x.powi(px as i32) * p.y.powi(py as i32))
            .sum()
    }

    /// Multiply by the monomial x^a y^b.
    fn shifted(&self, a: u32, b: u32) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().map(|&(c, px, py)| (c, px + a, py + b)).collect(),
        }
    }

    fn max_degree(&self) -> u32 {
        self.terms.iter().map(|&(_, px, py)| px + py).max().unwrap_or(0)
    }
}

/// Density of a component: either a constant or a polynomial in x, y.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform(f64),
    Poly(Poly2),
}

impl Density {
    pub fn eval(&self, p: Vec2) -> f64 {
        match self {
            Density::Uniform(m) => *m,
            Density::Poly(poly) => poly.eval(p),
        }
    }

    fn as_poly(&self) -> Poly2 {
        match self {
            Density::Uniform(m) => Poly2::constant(*m),
            Density::Poly(p) => p.clone(),
        }
    }
}

/// One building block of the measure.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureComponent {
    /// Density (constant or polynomial) on a disc.
    Disc { center: Vec2, radius: f64, density: Density },
    /// Density on a simple polygon (vertices stored counterclockwise).
    Polygon { vertices: Vec<Vec2>, density: Density },
    /// Point mass of total `mass`, smoothed to a disc of radius `smoothing`
    /// with uniform density `mass / (pi * smoothing^2)`.
    PointMass { location: Vec2, mass: f64, smoothing: f64 },
}

impl MeasureComponent {
    /// Equivalent disc/polygon view of the component for integration.
    fn canonical(&self) -> MeasureComponent {
        match self {
            MeasureComponent::PointMass { location, mass, smoothing } => MeasureComponent::Disc {
                center: *location,
                radius: *smoothing,
                density: Density::Uniform(mass / (PI * smoothing * smoothing)),
            },
            other => other.clone(),
        }
    }

    /// Exact integral of `x^a y^b` against this component's density.
    fn moment(&self, a: u32, b: u32) -> f64 {
        match self.canonical() {
            MeasureComponent::Disc { center, radius, density } => {
                disc_poly_integral(&density.as_poly().shifted(a, b), center, radius)
            }
            MeasureComponent::Polygon { vertices, density } => {
                polygon_poly_integral(&density.as_poly().shifted(a, b), &vertices)
            }
            MeasureComponent::PointMass { .. } => unreachable!(),
        }
    }

    pub fn mass(&self) -> f64 {
        self.moment(0, 0)
    }

    /// Signed distance to the support (negative inside).
    pub fn support_distance(&self, p: Vec2) -> f64 {
        match self.canonical() {
            MeasureComponent::Disc { center, radius, .. } => p.dist(center) - radius,
            MeasureComponent::Polygon { vertices, .. } => polygon_signed_distance(&vertices, p),
            MeasureComponent::PointMass { .. } => unreachable!(),
        }
    }

    /// Density value at a point, zero outside the support.
    pub fn density_at(&self, p: Vec2) -> f64 {
        match self.canonical() {
            MeasureComponent::Disc { center, radius, density } => {
                if p.dist(center) <= radius {
                    density.eval(p)
                } else {
                    0.0
                }
            }
            MeasureComponent::Polygon { vertices, density } => {
                if point_in_polygon(&vertices, p) {
                    density.eval(p)
                } else {
                    0.0
                }
            }
            MeasureComponent::PointMass { .. } => unreachable!(),
        }
    }

    /// Axis-aligned bounding box of the support.
    pub fn bbox(&self) -> (Vec2, Vec2) {
        match self.canonical() {
            MeasureComponent::Disc { center, radius, .. } => (
                Vec2::new(center.x - radius, center.y - radius),
                Vec2::new(center.x + radius, center.y + radius),
            ),
            MeasureComponent::Polygon { vertices, .. } => {
                let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in &vertices {
                    lo.x = lo.x.min(v.x);
                    lo.y = lo.y.min(v.y);
                    hi.x = hi.x.max(v.x);
                    hi.y = hi.y.max(v.y);
                }
                (lo, hi)
            }
            MeasureComponent::PointMass { .. } => unreachable!(),
        }
    }

    pub fn support_area(&self) -> f64 {
        match self.canonical() {
            MeasureComponent::Disc { radius, .. } => PI * radius * radius,
            MeasureComponent::Polygon { vertices, .. } => {
                let n = vertices.len();
                let mut a = 0.0;
                for k in 0..n {
                    a += vertices[k].cross(vertices[(k + 1) % n]);
                }
                a.abs() / 2.0
            }
            MeasureComponent::PointMass { .. } => unreachable!(),
        }
    }

    /// Largest density value on the support (sampled for polynomials).
    pub fn sup_density(&self) -> f64 {
        match self.canonical() {
            MeasureComponent::Disc { center, radius, density } => match density {
                Density::Uniform(m) => m,
                Density::Poly(_) => {
                    sample_sup(|p| self.density_at(p), center - Vec2::new(radius, radius), center + Vec2::new(radius, radius))
                }
            },
            MeasureComponent::Polygon { density, .. } => match density {
                Density::Uniform(m) => m,
                Density::Poly(_) => {
                    let (lo, hi) = self.bbox();
                    sample_sup(|p| self.density_at(p), lo, hi)
                }
            },
            MeasureComponent::PointMass { .. } => unreachable!(),
        }
    }
}

fn sample_sup(f: impl Fn(Vec2) -> f64, lo: Vec2, hi: Vec2) -> f64 {
    let n = 128;
    let mut best = 0.0f64;
    for j in 0..=n {
        for i in 0..=n {
            let p = Vec2::new(
                lo.x + (hi.x - lo.x) * i as f64 / n as f64,
                lo.y + (hi.y - lo.y) * j as f64 / n as f64,
            );
            best = best.max(f(p));
        }
    }
    best
}

/// A finite positive measure: a nonempty sum of components.
/// Overlapping supports add.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub components: Vec<MeasureComponent>,
}

/// A-priori radii for the solution domain: any quadrature domain of the
/// measure lies in `B(centroid, outer)`, and when `r_mu > 2R` it also
/// contains `B(centroid, inner)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SakaiRadii {
    /// Radius with `|B_{r_mu}| = total mass`.
    pub r_mu: f64,
    /// Radius of the smallest centroid-centered ball containing the support.
    pub big_r: f64,
    pub outer: f64,
    pub inner: Option<f64>,
    pub centroid: Vec2,
    /// Conservative variant using the density sup instead of the exact mass.
    pub outer_sup_based: f64,
}

impl Measure {
    pub fn new(components: Vec<MeasureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("measure needs at least one component".into()));
        }
        let m = Measure { components };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        for (k, c) in self.components.iter().enumerate() {
            match c {
                MeasureComponent::Disc { radius, .. } if !(*radius > 0.0) => {
                    return Err(Error::Config(format!("component {k}: disc radius must be positive")));
                }
                MeasureComponent::Polygon { vertices, .. } if vertices.len() < 3 => {
                    return Err(Error::Config(format!("component {k}: polygon needs 3+ vertices")));
                }
                MeasureComponent::PointMass { mass, smoothing, .. }
                    if !(*mass > 0.0) || !(*smoothing > 0.0) =>
                {
                    return Err(Error::Config(format!(
                        "component {k}: point mass and smoothing radius must be positive"
                    )));
                }
                _ => {}
            }
            // Positive density on the support (sampled for polynomials).
            let density = match c.canonical() {
                MeasureComponent::Disc { density, .. } => Some(density),
                MeasureComponent::Polygon { density, .. } => Some(density),
                MeasureComponent::PointMass { .. } => None,
            };
            match density {
                Some(Density::Uniform(m)) if m <= 0.0 => {
                    return Err(Error::Config(format!("component {k}: density must be positive")));
                }
                Some(Density::Poly(_)) => {
                    let (lo, hi) = c.bbox();
                    let min = sample_inf(|p| c.density_at(p), |p| c.support_distance(p) < 0.0, lo, hi);
                    if min <= 0.0 {
                        return Err(Error::Config(format!(
                            "component {k}: polynomial density not positive on support (min sample {min})"
                        )));
                    }
                }
                _ => {}
            }
            if c.mass() <= 0.0 || !c.mass().is_finite() {
                return Err(Error::Config(format!("component {k}: mass must be finite and positive")));
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.components.iter().map(|c| c.mass()).sum()
    }

    /// Distance to the union of supports (negative inside any support).
    pub fn support_distance(&self, p: Vec2) -> f64 {
        self.components
            .iter()
            .map(|c| c.support_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Total density at a point (overlaps add).
    pub fn density_at(&self, p: Vec2) -> f64 {
        self.components.iter().map(|c| c.density_at(p)).sum()
    }

    pub fn sakai_radii(&self) -> SakaiRadii {
        let mass = self.total_mass();
        let mx: f64 = self.components.iter().map(|c| c.moment(1, 0)).sum();
        let my: f64 = self.components.iter().map(|c| c.moment(0, 1)).sum();
        let centroid = Vec2::new(mx / mass, my / mass);
        let big_r = self
            .components
            .iter()
            .map(|c| match c.canonical() {
                MeasureComponent::Disc { center, radius, .. } => centroid.dist(center) + radius,
                MeasureComponent::Polygon { vertices, .. } => vertices
                    .iter()
                    .map(|v| centroid.dist(*v))
                    .fold(0.0, f64::max),
                MeasureComponent::PointMass { .. } => unreachable!(),
            })
            .fold(0.0, f64::max);
        let r_mu = (mass / PI).sqrt();
        let sup: f64 = self.components.iter().map(|c| c.sup_density()).fold(0.0, f64::max);
        let area: f64 = self.components.iter().map(|c| c.support_area()).sum();
        let r_sup = (sup * area / PI).sqrt();
        SakaiRadii {
            r_mu,
            big_r,
            outer: r_mu + big_r,
            inner: (r_mu > 2.0 * big_r).then_some(r_mu - big_r),
            centroid,
            outer_sup_based: r_sup.max(r_mu) + big_r,
        }
    }

    /// Nodal density field. Cells cut by a support boundary get an
    /// area-fraction weighted density from a 4x4 midpoint subsample, so the
    /// grid sum reproduces the total mass closely.
    pub fn rasterize(&self, grid: Grid2D) -> Result<ScalarField> {
        let min = grid.origin;
        let max = grid.max_corner();
        for (k, c) in self.components.iter().enumerate() {
            let (lo, hi) = c.bbox();
            if lo.x < min.x + grid.h
                || lo.y < min.y + grid.h
                || hi.x > max.x - grid.h
                || hi.y > max.y - grid.h
            {
                return Err(Error::Config(format!(
                    "component {k}: support not strictly inside the grid rectangle"
                )));
            }
        }
        let mut out = ScalarField::zeros(grid);
        for c in &self.components {
            rasterize_component(&c.canonical(), &mut out);
        }
        Ok(out)
    }

    /// Node mask of the support union (geometric membership).
    pub fn support_mask(&self, grid: Grid2D) -> Vec<bool> {
        let mut mask = vec![false; grid.node_count()];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if self.support_distance(grid.pos(i, j)) <= 0.0 {
                    mask[grid.idx(i, j)] = true;
                }
            }
        }
        mask
    }
}

fn sample_inf(
    f: impl Fn(Vec2) -> f64,
    in_support: impl Fn(Vec2) -> bool,
    lo: Vec2,
    hi: Vec2,
) -> f64 {
    let n = 64;
    let mut worst = f64::INFINITY;
    for j in 0..=n {
        for i in 0..=n {
            let p = Vec2::new(
                lo.x + (hi.x - lo.x) * i as f64 / n as f64,
                lo.y + (hi.y - lo.y) * j as f64 / n as f64,
            );
            if in_support(p) {
                worst = worst.min(f(p));
            }
        }
    }
    worst
}

fn rasterize_component(c: &MeasureComponent, out: &mut ScalarField) {
    let grid = out.grid;
    let h = grid.h;
    let (lo, hi) = c.bbox();
    // 4x4 midpoint subsamples resolve the boundary well once the support
    // spans many cells; tiny supports (smoothed point masses at eps ~ 3h)
    // need a finer split to keep the mass error under 0.5%.
    let diag = hi.dist(lo);
    let nsub: usize = if diag < 16.0 * h { 16 } else { 4 };
    let i0 = (((lo.x - grid.origin.x) / h).floor() as isize - 1).max(0) as usize;
    let j0 = (((lo.y - grid.origin.y) / h).floor() as isize - 1).max(0) as usize;
    let i1 = ((((hi.x - grid.origin.x) / h).ceil() as usize) + 1).min(grid.nx - 1);
    let j1 = ((((hi.y - grid.origin.y) / h).ceil() as usize) + 1).min(grid.ny - 1);
    let half = h / 2.0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let p = grid.pos(i, j);
            // Cell around the node.
            let corner_dist = |dx: f64, dy: f64| c.support_distance(Vec2::new(p.x + dx, p.y + dy));
            let d_corners = [
                corner_dist(-half, -half),
                corner_dist(half, -half),
                corner_dist(half, half),
                corner_dist(-half, half),
            ];
            let all_in = d_corners.iter().all(|&d| d < 0.0);
            let all_out = d_corners.iter().all(|&d| d >= 0.0);
            let far = d_corners.iter().all(|&d| d >= h * std::f64::consts::SQRT_2);
            let add = if all_in && d_corners.iter().all(|&d| d < -h * 0.01) {
                c.density_at(p)
            } else if all_out && far {
                0.0
            } else {
                // Cut cell: midpoint subsample of density * indicator.
                let mut acc = 0.0;
                for sj in 0..nsub {
                    for si in 0..nsub {
                        let q = Vec2::new(
                            p.x - half + (si as f64 + 0.5) * h / nsub as f64,
                            p.y - half + (sj as f64 + 0.5) * h / nsub as f64,
                        );
                        acc += c.density_at(q);
                    }
                }
                acc / (nsub * nsub) as f64
            };
            if add != 0.0 {
                let k = grid.idx(i, j);
                out.values[k] += add;
            }
        }
    }
}

// ---- exact polynomial integrals ----

/// Integral of a polynomial over a disc, via central moments.
fn disc_poly_integral(poly: &Poly2, center: Vec2, radius: f64) -> f64 {
    let mut total = 0.0;
    for &(coeff, px, py) in &poly.terms {
        // Expand (cx + xi)^px (cy + eta)^py and integrate term by term.
        for k in 0..=px {
            for l in 0..=py {
                let c = coeff
                    * binomial(px, k)
                    * binomial(py, l)
                    * center.x.powi((px - k) as i32)
                    * center.y.powi((py - l) as i32);
                total += c * disc_central_moment(radius, k, l);
            }
        }
    }
    total
}

/// Integral of xi^m eta^n over the origin-centered disc of given radius.
/// Zero for odd powers; otherwise `a^(m+n+2)/(m+n+2) * W(m,n)` with `W` the
/// full-circle trigonometric moment.
fn disc_central_moment(radius: f64, m: u32, n: u32) -> f64 {
    if m % 2 == 1 || n % 2 == 1 {
        return 0.0;
    }
    let w = 2.0 * PI * double_factorial(m.saturating_sub(1)) * double_factorial(n.saturating_sub(1))
        / double_factorial(m + n);
    radius.powi((m + n + 2) as i32) / (m + n + 2) as f64 * w
}

fn double_factorial(k: u32) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    let mut acc = 1.0;
    let mut v = k;
    while v > 1 {
        acc *= v as f64;
        v -= 2;
    }
    acc
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Integral of a polynomial over a simple polygon via Green's theorem:
/// `int x^p y^q dA = oint x^(p+1)/(p+1) y^q dy`, each edge integrated
/// exactly with Gauss-Legendre. Sign follows the vertex orientation, so the
/// caller-facing integral uses |.| against the shoelace sign.
fn polygon_poly_integral(poly: &Poly2, vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    // Orientation sign so the result is the integral over the region.
    let mut area2 = 0.0;
    for k in 0..n {
        area2 += vertices[k].cross(vertices[(k + 1) % n]);
    }
    let sign = if area2 >= 0.0 { 1.0 } else { -1.0 };

    let deg = poly.max_degree() + 1; // degree in t along an edge
    let rule = gauss_legendre_01(((deg + 2) / 2).max(1) as usize);

    let mut total = 0.0;
    for &(coeff, px, py) in &poly.terms {
        let mut term = 0.0;
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            let dy = b.y - a.y;
            if dy == 0.0 {
                continue;
            }
            let mut edge = 0.0;
            for &(t, w) in &rule {
                let x = a.x + t * (b.x - a.x);
                let y = a.y + t * dy;
                edge += w * x.powi((px + 1) as i32) * y.powi(py as i32);
            }
            term += edge * dy / (px + 1) as f64;
        }
        total += coeff * term;
    }
    sign * total
}

/// Gauss-Legendre nodes/weights on [0, 1], exact for degree 2n-1.
#[allow(clippy::excessive_precision)] // published table values kept verbatim
fn gauss_legendre_01(n: usize) -> Vec<(f64, f64)> {
    // Nodes/weights on [-1, 1].
    let base: &[(f64, f64)] = match n.min(8) {
        1 => &[(0.0, 2.0)],
        2 => &[(-0.5773502691896257, 1.0), (0.5773502691896257, 1.0)],
        3 => &[
            (-0.7745966692414834, 0.5555555555555556),
            (0.0, 0.8888888888888888),
            (0.7745966692414834, 0.5555555555555556),
        ],
        4 => &[
            (-0.8611363115940526, 0.3478548451374538),
            (-0.3399810435848563, 0.6521451548625461),
            (0.3399810435848563, 0.6521451548625461),
            (0.8611363115940526, 0.3478548451374538),
        ],
        5 => &[
            (-0.9061798459386640, 0.2369268850561891),
            (-0.5384693101056831, 0.4786286704993665),
            (0.0, 0.5688888888888889),
            (0.5384693101056831, 0.4786286704993665),
            (0.9061798459386640, 0.2369268850561891),
        ],
        6 => &[
            (-0.9324695142031521, 0.1713244923791704),
            (-0.6612093864662645, 0.3607615730481386),
            (-0.2386191860831969, 0.4679139345726910),
            (0.2386191860831969, 0.4679139345726910),
            (0.6612093864662645, 0.3607615730481386),
            (0.9324695142031521, 0.1713244923791704),
        ],
        7 => &[
            (-0.9491079123427585, 0.1294849661688697),
            (-0.7415311855993945, 0.2797053914892766),
            (-0.4058451513773972, 0.3818300505051189),
            (0.0, 0.4179591836734694),
            (0.4058451513773972, 0.3818300505051189),
            (0.7415311855993945, 0.2797053914892766),
            (0.9491079123427585, 0.1294849661688697),
        ],
        _ => &[
            (-0.9602898564975363, 0.1012285362903763),
            (-0.7966664774136267, 0.2223810344533745),
            (-0.5255324099163290, 0.3137066458778873),
            (-0.1834346424956498, 0.3626837833783620),
            (0.1834346424956498, 0.3626837833783620),
            (0.5255324099163290, 0.3137066458778873),
            (0.7966664774136267, 0.2223810344533745),
            (0.9602898564975363, 0.1012285362903763),
        ],
    };
    base.iter().map(|&(x, w)| ((x + 1.0) / 2.0, w / 2.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn disc(center: Vec2, radius: f64, m: f64) -> MeasureComponent {
        MeasureComponent::Disc { center, radius, density: Density::Uniform(m) }
    }

    #[test]
    fn uniform_disc_mass() {
        let mu = Measure::new(vec![disc(Vec2::ZERO, 0.5, 4.0)]).unwrap();
        assert!((mu.total_mass() - PI).abs() < 1e-14);
    }

    #[test]
    fn point_mass_preserves_mass() {
        for eps in [0.05, 0.2] {
            let mu = Measure::new(vec![MeasureComponent::PointMass {
                location: Vec2::new(0.3, -0.1),
                mass: 1.0,
                smoothing: eps,
            }])
            .unwrap();
            assert!((mu.total_mass() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn polynomial_disc_mass_matches_quadrature() {
        // density 1 + 2x^2 + y^2 on the unit disc; exact value is 7*pi/4.
        let poly = Poly2 { terms: vec![(1.0, 0, 0), (2.0, 2, 0), (1.0, 0, 2)] };
        let mu = Measure::new(vec![MeasureComponent::Disc {
            center: Vec2::ZERO,
            radius: 1.0,
            density: Density::Poly(poly.clone()),
        }])
        .unwrap();
        let exact = mu.total_mass();
        assert!((exact - 7.0 * PI / 4.0).abs() < 1e-12, "mass {exact}");

        // Brute-force midpoint quadrature at 2000^2 over the bounding box.
        let n = 2000;
        let dx = 2.0 / n as f64;
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                let p = Vec2::new(-1.0 + (i as f64 + 0.5) * dx, -1.0 + (j as f64 + 0.5) * dx);
                if p.norm() <= 1.0 {
                    acc += poly.eval(p);
                }
            }
        }
        acc *= dx * dx;
        assert!((exact - acc).abs() < 1e-3 * exact, "quadrature {acc} vs exact {exact}");
    }

    #[test]
    fn polygon_polynomial_integral_on_square() {
        // int over [0,1]^2 of x^2 y = 1/3 * 1/2.
        let square = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let val = polygon_poly_integral(&Poly2 { terms: vec![(1.0, 2, 1)] }, &square);
        assert!((val - 1.0 / 6.0).abs() < 1e-14, "val {val}");
        // Orientation-independent.
        let mut rev = square.clone();
        rev.reverse();
        let val_rev = polygon_poly_integral(&Poly2 { terms: vec![(1.0, 2, 1)] }, &rev);
        assert!((val_rev - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn sakai_radii_disc_instance() {
        // mass 4*pi forces r_mu = 2; support ball radius 0.5.
        let mu = Measure::new(vec![disc(Vec2::ZERO, 0.5, 16.0)]).unwrap();
        let s = mu.sakai_radii();
        assert!((s.r_mu - 2.0).abs() < 1e-12);
        assert!((s.big_r - 0.5).abs() < 1e-12);
        assert!((s.outer - 2.5).abs() < 1e-12);
        assert!((s.inner.unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn sakai_inner_absent_at_equality() {
        // r_mu = 1, R = 1: the strict inequality r_mu > 2R fails.
        let mu = Measure::new(vec![disc(Vec2::ZERO, 1.0, 1.0)]).unwrap();
        let s = mu.sakai_radii();
        assert!((s.r_mu - 1.0).abs() < 1e-12);
        assert!(s.inner.is_none());
    }

    #[test]
    fn sup_based_outer_bound() {
        // weighted unit disc: outer radius consistent with sqrt(M) + 1.
        let poly = Poly2 { terms: vec![(1.0, 0, 0), (2.0, 2, 0), (1.0, 0, 2)] };
        let mu = Measure::new(vec![MeasureComponent::Disc {
            center: Vec2::ZERO,
            radius: 1.0,
            density: Density::Poly(poly),
        }])
        .unwrap();
        let s = mu.sakai_radii();
        let m_sup: f64 = 4.0; // max of 1 + 2x^2 + y^2 on the disc
        assert!(s.outer <= m_sup.sqrt() + 1.0 + 1e-9);
        assert!(s.outer_sup_based <= m_sup.sqrt() + 1.0 + 0.05);
        assert!(s.outer <= s.outer_sup_based + 1e-12);
    }

    #[test]
    fn rasterize_reproduces_mass() {
        let mu = Measure::new(vec![disc(Vec2::ZERO, 0.5, 4.0)]).unwrap();
        let grid = Grid2D::centered(Vec2::ZERO, 1.0, 0.01).unwrap();
        let f = mu.rasterize(grid).unwrap();
        let sum: f64 = f.values.iter().sum::<f64>() * grid.h * grid.h;
        assert!(
            (sum - PI).abs() < 0.005 * PI,
            "rasterized mass {sum} vs {}",
            PI
        );
    }

    #[test]
    fn rasterize_point_mass_local_and_conservative() {
        let h = 0.02;
        let eps = 3.0 * h;
        let loc = Vec2::new(0.2, 0.1);
        let mu = Measure::new(vec![MeasureComponent::PointMass { location: loc, mass: 1.0, smoothing: eps }])
            .unwrap();
        let grid = Grid2D::centered(Vec2::ZERO, 1.0, h).unwrap();
        let f = mu.rasterize(grid).unwrap();
        let mut sum = 0.0;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let v = f.at(i, j);
                if v != 0.0 {
                    assert!(grid.pos(i, j).dist(loc) <= eps + h, "nonzero too far out");
                    sum += v;
                }
            }
        }
        sum *= h * h;
        assert!((sum - 1.0).abs() < 0.005, "mass {sum}");
    }

    #[test]
    fn rasterize_polygon_reproduces_mass() {
        let vertices = vec![
            Vec2::new(-0.8, -0.6),
            Vec2::new(0.1, -0.9),
            Vec2::new(0.9, -0.3),
            Vec2::new(0.7, 0.5),
            Vec2::new(0.0, 0.9),
            Vec2::new(-0.2, 0.4),
            Vec2::new(-0.9, 0.3),
        ];
        let mu = Measure::new(vec![MeasureComponent::Polygon {
            vertices,
            density: Density::Uniform(1.5),
        }])
        .unwrap();
        let grid = Grid2D::centered(Vec2::ZERO, 1.3, 0.01).unwrap();
        let f = mu.rasterize(grid).unwrap();
        let sum: f64 = f.values.iter().sum::<f64>() * grid.h * grid.h;
        let exact = mu.total_mass();
        assert!((sum - exact).abs() < 0.005 * exact, "rasterized {sum} vs {exact}");
    }

    #[test]
    fn rasterize_additive_for_disjoint_discs() {
        let a = disc(Vec2::new(-0.4, 0.0), 0.2, 2.0);
        let b = disc(Vec2::new(0.4, 0.0), 0.15, 3.0);
        let grid = Grid2D::centered(Vec2::ZERO, 1.0, 0.02).unwrap();
        let both = Measure::new(vec![a.clone(), b.clone()]).unwrap().rasterize(grid).unwrap();
        let fa = Measure::new(vec![a]).unwrap().rasterize(grid).unwrap();
        let fb = Measure::new(vec![b]).unwrap().rasterize(grid).unwrap();
        for k in 0..both.values.len() {
            assert!((both.values[k] - fa.values[k] - fb.values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rasterize_rejects_support_outside_grid() {
        let mu = Measure::new(vec![disc(Vec2::new(0.9, 0.0), 0.5, 1.0)]).unwrap();
        let grid = Grid2D::centered(Vec2::ZERO, 1.0, 0.05).unwrap();
        assert!(matches!(mu.rasterize(grid), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn total_mass_additive_and_order_invariant(
            m1 in 0.5f64..4.0, m2 in 0.5f64..4.0, r1 in 0.2f64..0.8, r2 in 0.2f64..0.8
        ) {
            let c1 = disc(Vec2::new(-1.0, 0.0), r1, m1);
            let c2 = disc(Vec2::new(1.0, 0.3), r2, m2);
            let ab = Measure::new(vec![c1.clone(), c2.clone()]).unwrap().total_mass();
            let ba = Measure::new(vec![c2.clone(), c1.clone()]).unwrap().total_mass();
            let single: f64 = Measure::new(vec![c1]).unwrap().total_mass()
                + Measure::new(vec![c2]).unwrap().total_mass();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((ab - single).abs() < 1e-12);
        }

        #[test]
        fn outer_radius_monotone_in_mass(m in 0.5f64..8.0) {
            let lo = Measure::new(vec![disc(Vec2::ZERO, 0.5, m)]).unwrap().sakai_radii();
            let hi = Measure::new(vec![disc(Vec2::ZERO, 0.5, m * 1.5)]).unwrap().sakai_radii();
            prop_assert!(hi.r_mu > lo.r_mu);
            prop_assert!(hi.outer > lo.outer);
        }
    }
}
