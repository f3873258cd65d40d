//! Signed-distance level sets: construction from shapes, fast-sweeping
//! reinitialization, and the nodewise interface advance.
//!
//! Sign convention: `phi < 0` inside the domain, `phi > 0` outside, the zero
//! set is the free boundary. Reinitialization keeps `|grad phi| = 1` so a
//! nodal speed field translates directly into normal displacement.

use crate::contour::extract_contour;
use crate::curve::MarkerCurve;
use crate::error::{Error, Result};
use crate::geom::{polygon_signed_distance, Vec2};
use crate::grid::{Grid2D, ScalarField};

/// Geometric shapes with exact signed distance functions.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disc { center: Vec2, radius: f64 },
    Polygon { vertices: Vec<Vec2> },
    Union(Vec<Shape>),
}

impl Shape {
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match self {
            Shape::Disc { center, radius } => p.dist(*center) - radius,
            Shape::Polygon { vertices } => polygon_signed_distance(vertices, p),
            Shape::Union(parts) => parts
                .iter()
                .map(|s| s.signed_distance(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        match self {
            Shape::Disc { center, radius } => (
                Vec2::new(center.x - radius, center.y - radius),
                Vec2::new(center.x + radius, center.y + radius),
            ),
            Shape::Polygon { vertices } => {
                let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo.x = lo.x.min(v.x);
                    lo.y = lo.y.min(v.y);
                    hi.x = hi.x.max(v.x);
                    hi.y = hi.y.max(v.y);
                }
                (lo, hi)
            }
            Shape::Union(parts) => {
                let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for s in parts {
                    let (l, h) = s.bbox();
                    lo.x = lo.x.min(l.x);
                    lo.y = lo.y.min(l.y);
                    hi.x = hi.x.max(h.x);
                    hi.y = hi.y.max(h.y);
                }
                (lo, hi)
            }
        }
    }
}

/// Level-set representation of the domain: negative inside.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetFn {
    pub field: ScalarField,
}

impl LevelSetFn {
    /// Exact signed distance of a shape sampled on the grid.
    /// The shape must lie inside the grid rectangle.
    pub fn from_shape(shape: &Shape, grid: Grid2D) -> Result<Self> {
        let (lo, hi) = shape.bbox();
        let max = grid.max_corner();
        if lo.x < grid.origin.x + grid.h
            || lo.y < grid.origin.y + grid.h
            || hi.x > max.x - grid.h
            || hi.y > max.y - grid.h
        {
            return Err(Error::Config("initial shape not inside the grid rectangle".into()));
        }
        Ok(LevelSetFn { field: ScalarField::from_fn(grid, |p| shape.signed_distance(p)) })
    }

    pub fn from_field(field: ScalarField) -> Self {
        LevelSetFn { field }
    }

    pub fn grid(&self) -> Grid2D {
        self.field.grid
    }

    #[inline]
    pub fn is_inside(&self, k: usize) -> bool {
        self.field.values[k] < 0.0
    }

    pub fn has_interface(&self) -> bool {
        let any_neg = self.field.values.iter().any(|&v| v < 0.0);
        let any_pos = self.field.values.iter().any(|&v| v >= 0.0);
        any_neg && any_pos
    }

    /// Does the inside region touch the boundary of the computational box?
    pub fn touches_border(&self) -> bool {
        let g = self.grid();
        for i in 0..g.nx {
            if self.is_inside(g.idx(i, 0)) || self.is_inside(g.idx(i, g.ny - 1)) {
                return true;
            }
        }
        for j in 0..g.ny {
            if self.is_inside(g.idx(0, j)) || self.is_inside(g.idx(g.nx - 1, j)) {
                return true;
            }
        }
        false
    }

    pub fn area(&self) -> f64 {
        self.field.integrate_indicator()
    }

    pub fn contours(&self) -> Vec<MarkerCurve> {
        extract_contour(&self.field)
    }

    /// Redistance from the current zero set with a 4-direction fast sweep.
    /// Nodes adjacent to the interface are anchored at their cut-fraction
    /// distances, so the zero set moves by at most half a cell.
    pub fn reinitialize(&self) -> Result<LevelSetFn> {
        if !self.has_interface() {
            return Err(Error::Degenerate(
                "level set has no zero crossing (domain vanished or filled the box)".into(),
            ));
        }
        let g = self.grid();
        let (nx, ny) = (g.nx, g.ny);
        let h = g.h;
        let phi = &self.field.values;
        let big = f64::INFINITY;
        let inside = |v: f64| v < 0.0;

        // Per-node nearest interface distance along each axis.
        let mut dx = vec![big; phi.len()];
        let mut dy = vec![big; phi.len()];
        for j in 0..ny {
            for i in 0..nx {
                let k = g.idx(i, j);
                if i + 1 < nx {
                    let k2 = g.idx(i + 1, j);
                    if inside(phi[k]) != inside(phi[k2]) {
                        let t = (phi[k] / (phi[k] - phi[k2])).clamp(0.0, 1.0);
                        dx[k] = dx[k].min(t * h);
                        dx[k2] = dx[k2].min((1.0 - t) * h);
                    }
                }
                if j + 1 < ny {
                    let k2 = g.idx(i, j + 1);
                    if inside(phi[k]) != inside(phi[k2]) {
                        let t = (phi[k] / (phi[k] - phi[k2])).clamp(0.0, 1.0);
                        dy[k] = dy[k].min(t * h);
                        dy[k2] = dy[k2].min((1.0 - t) * h);
                    }
                }
            }
        }

        let mut dist = vec![big; phi.len()];
        let mut frozen = vec![false; phi.len()];
        for k in 0..phi.len() {
            let (a, b) = (dx[k], dy[k]);
            if a.is_finite() && b.is_finite() {
                // Distance to the line through the two crossings; degenerates
                // to 0 when a crossing sits on the node itself.
                dist[k] = if a == 0.0 || b == 0.0 {
                    0.0
                } else {
                    a * b / (a * a + b * b).sqrt()
                };
                frozen[k] = true;
            } else if a.is_finite() {
                dist[k] = a;
                frozen[k] = true;
            } else if b.is_finite() {
                dist[k] = b;
                frozen[k] = true;
            }
        }

        // Zhao's update: solve the local eikonal quadratic from the smaller
        // axis neighbors.
        let update = |dist: &mut Vec<f64>, i: usize, j: usize| {
            let k = j * nx + i;
            if frozen[k] {
                return;
            }
            let a = {
                let mut m = big;
                if i > 0 {
                    m = m.min(dist[k - 1]);
                }
                if i + 1 < nx {
                    m = m.min(dist[k + 1]);
                }
                m
            };
            let b = {
                let mut m = big;
                if j > 0 {
                    m = m.min(dist[k - nx]);
                }
                if j + 1 < ny {
                    m = m.min(dist[k + nx]);
                }
                m
            };
            let cand = if (a - b).abs() >= h {
                a.min(b) + h
            } else {
                0.5 * (a + b + (2.0 * h * h - (a - b) * (a - b)).sqrt())
            };
            if cand < dist[k] {
                dist[k] = cand;
            }
        };

        for _ in 0..2 {
            for j in 0..ny {
                for i in 0..nx {
                    update(&mut dist, i, j);
                }
            }
            for j in 0..ny {
                for i in (0..nx).rev() {
                    update(&mut dist, i, j);
                }
            }
            for j in (0..ny).rev() {
                for i in 0..nx {
                    update(&mut dist, i, j);
                }
            }
            for j in (0..ny).rev() {
                for i in (0..nx).rev() {
                    update(&mut dist, i, j);
                }
            }
        }

        let values = phi
            .iter()
            .zip(dist.iter())
            .map(|(&p, &d)| if p < 0.0 { -d } else { d })
            .collect();
        Ok(LevelSetFn { field: ScalarField { grid: g, values } })
    }

    /// One explicit step of `d(phi)/dt + v = 0`: `phi <- phi - tau * v`,
    /// followed by reinitialization. With `tau = 1` and `v` the extended
    /// boundary speed, the interface moves outward by the nodal speed, since
    /// `|grad phi| = 1`.
    pub fn advance(&self, v: &ScalarField, tau: f64) -> Result<LevelSetFn> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Parameter(format!("step tau = {tau} outside (0, 1]")));
        }
        if v.grid != self.grid() {
            return Err(Error::Parameter("velocity field on a different grid".into()));
        }
        let values: Vec<f64> = self
            .field
            .values
            .iter()
            .zip(v.values.iter())
            .map(|(&p, &s)| p - tau * s)
            .collect();
        LevelSetFn { field: ScalarField { grid: self.grid(), values } }.reinitialize()
    }

    /// Max norm of `|grad_h phi| - 1` over interior nodes farther than `2h`
    /// from the interface. Nodes on the medial axis are skipped: the
    /// distance function has a ridge there and central differences
    /// legitimately collapse.
    pub fn distance_residual(&self) -> f64 {
        let g = self.grid();
        let h = g.h;
        let mut worst = 0.0f64;
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let v = self.field.at(i, j);
                if v.abs() <= 2.0 * h {
                    continue;
                }
                let (w, e) = (self.field.at(i - 1, j), self.field.at(i + 1, j));
                let (s, n) = (self.field.at(i, j - 1), self.field.at(i, j + 1));
                // Ridge detector: second differences blow up where the
                // distance cone folds (curvature radius near the grid
                // scale), so the smoothness check is meaningless there.
                if (w + e - 2.0 * v).abs() > 0.1 * h || (s + n - 2.0 * v).abs() > 0.1 * h {
                    continue;
                }
                let gx = (self.field.at(i + 1, j) - self.field.at(i - 1, j)) / (2.0 * h);
                let gy = (self.field.at(i, j + 1) - self.field.at(i, j - 1)) / (2.0 * h);
                worst = worst.max(((gx * gx + gy * gy).sqrt() - 1.0).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(half: f64, h: f64) -> Grid2D {
        Grid2D::centered(Vec2::ZERO, half, h).unwrap()
    }

    fn unit_disc_phi(h: f64) -> LevelSetFn {
        LevelSetFn::from_shape(&Shape::Disc { center: Vec2::ZERO, radius: 1.0 }, grid(2.0, h)).unwrap()
    }

    #[test]
    fn from_shape_disc_values() {
        let phi = unit_disc_phi(0.5);
        assert!((phi.field.interpolate(Vec2::new(2.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((phi.field.interpolate(Vec2::ZERO).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_shape_union_min() {
        let shape = Shape::Union(vec![
            Shape::Disc { center: Vec2::new(-2.0, 0.0), radius: 1.0 },
            Shape::Disc { center: Vec2::new(2.0, 0.0), radius: 1.0 },
        ]);
        let phi = LevelSetFn::from_shape(&shape, grid(3.5, 0.5)).unwrap();
        assert!((phi.field.interpolate(Vec2::ZERO).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_shape_rejects_shape_outside() {
        let shape = Shape::Disc { center: Vec2::new(1.9, 0.0), radius: 0.5 };
        assert!(LevelSetFn::from_shape(&shape, grid(2.0, 0.1)).is_err());
    }

    #[test]
    fn reinitialize_is_near_fixed_point_on_exact_sdf() {
        let h = 0.05;
        let phi = unit_disc_phi(h);
        let re = phi.reinitialize().unwrap();
        // Interface anchored: values near the interface move less than h/2.
        for k in 0..re.field.values.len() {
            if phi.field.values[k].abs() < 2.0 * h {
                assert!(
                    (re.field.values[k] - phi.field.values[k]).abs() <= 0.5 * h,
                    "moved {} at phi {}",
                    (re.field.values[k] - phi.field.values[k]).abs(),
                    phi.field.values[k]
                );
            }
        }
        assert!(re.distance_residual() <= 0.1, "residual {}", re.distance_residual());
    }

    #[test]
    fn reinitialize_restores_unit_gradient() {
        let h = 0.05;
        let mut phi = unit_disc_phi(h);
        for v in &mut phi.field.values {
            *v *= 5.0;
        }
        assert!(phi.distance_residual() > 3.0);
        let re = phi.reinitialize().unwrap();
        assert!(re.distance_residual() <= 0.1, "residual {}", re.distance_residual());
    }

    #[test]
    fn reinitialize_idempotent_within_quarter_cell() {
        let h = 0.05;
        let mut phi = unit_disc_phi(h);
        for v in &mut phi.field.values {
            *v *= 3.0; // distorted input
        }
        let once = phi.reinitialize().unwrap();
        let twice = once.reinitialize().unwrap();
        let max_change = once
            .field
            .values
            .iter()
            .zip(twice.field.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_change <= 0.25 * h, "second pass changed {max_change}");
    }

    #[test]
    fn reinitialize_preserves_dumbbell_topology() {
        let h = 0.05;
        let shape = Shape::Union(vec![
            Shape::Disc { center: Vec2::new(-0.6, 0.0), radius: 0.8 },
            Shape::Disc { center: Vec2::new(0.6, 0.0), radius: 0.8 },
        ]);
        let phi = LevelSetFn::from_shape(&shape, grid(2.2, h)).unwrap();
        let before = phi.contours().len();
        let after = phi.reinitialize().unwrap().contours().len();
        assert_eq!(before, 1);
        assert_eq!(after, 1);
    }

    #[test]
    fn reinitialize_requires_interface() {
        let f = ScalarField::constant(grid(1.0, 0.1), 1.0);
        assert!(matches!(LevelSetFn::from_field(f).reinitialize(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn advance_zero_velocity_is_stationary() {
        let h = 0.05;
        let phi = unit_disc_phi(h);
        let v = ScalarField::zeros(phi.grid());
        let next = phi.advance(&v, 1.0).unwrap();
        for k in 0..next.field.values.len() {
            if phi.field.values[k].abs() < 2.0 * h {
                assert!((next.field.values[k] - phi.field.values[k]).abs() <= 0.5 * h);
            }
        }
    }

    #[test]
    fn advance_uniform_speed_moves_circle_outward() {
        let h = 0.02;
        let phi = unit_disc_phi(h);
        let v = ScalarField::constant(phi.grid(), 0.2);
        let next = phi.advance(&v, 1.0).unwrap();
        let curves = next.contours();
        assert_eq!(curves.len(), 1);
        let (lo, hi) = curves[0].radial_extent(Vec2::ZERO);
        assert!((lo - 1.2).abs() <= h && (hi - 1.2).abs() <= h, "radii [{lo}, {hi}]");
    }

    #[test]
    fn advance_merges_two_discs() {
        let h = 0.04;
        let shape = Shape::Union(vec![
            Shape::Disc { center: Vec2::new(-1.0, 0.0), radius: 0.8 },
            Shape::Disc { center: Vec2::new(1.0, 0.0), radius: 0.8 },
        ]);
        let phi = LevelSetFn::from_shape(&shape, grid(2.8, h)).unwrap();
        assert_eq!(phi.contours().len(), 2);
        let v = ScalarField::constant(phi.grid(), 0.4);
        let next = phi.advance(&v, 1.0).unwrap();
        assert_eq!(next.contours().len(), 1, "components did not merge");
    }

    #[test]
    fn advance_nonnegative_speed_grows_area() {
        let h = 0.05;
        let phi = unit_disc_phi(h);
        let v = ScalarField::from_fn(phi.grid(), |p| if p.x > 0.0 { 0.15 } else { 0.0 });
        let next = phi.advance(&v, 1.0).unwrap();
        assert!(next.area() >= phi.area() - h * h);
    }

    #[test]
    fn advance_rejects_bad_tau() {
        let phi = unit_disc_phi(0.1);
        let v = ScalarField::zeros(phi.grid());
        assert!(phi.advance(&v, 0.0).is_err());
        assert!(phi.advance(&v, 1.2).is_err());
    }
}
