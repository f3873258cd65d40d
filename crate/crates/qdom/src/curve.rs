//! Closed polygonal curves: the explicit free-boundary representation.

use crate::error::{Error, Result};
use crate::geom::{point_segment_distance, segments_intersect, Vec2};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Simple closed polygon, counterclockwise, last vertex distinct from first.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerCurve {
    pub vertices: Vec<Vec2>,
}

impl MarkerCurve {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry(format!(
                "marker curve needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        Ok(MarkerCurve { vertices })
    }

    /// Regular n-gon approximating a circle, counterclockwise.
    pub fn circle(center: Vec2, radius: f64, n: usize) -> Self {
        let vertices = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Vec2::new(center.x + radius * t.cos(), center.y + radius * t.sin())
            })
            .collect();
        MarkerCurve { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace area; positive for counterclockwise orientation.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut a = 0.0;
        for k in 0..n {
            let p = self.vertices[k];
            let q = self.vertices[(k + 1) % n];
            a += p.cross(q);
        }
        a / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|k| self.vertices[k].dist(self.vertices[(k + 1) % n])).sum()
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len() as f64;
        let mut c = Vec2::ZERO;
        for v in &self.vertices {
            c = c + *v;
        }
        c * (1.0 / n)
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for k in 0..n {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Outward unit normal at vertex `k` (mean of the two edge normals),
    /// assuming counterclockwise orientation.
    pub fn outward_normal(&self, k: usize) -> Vec2 {
        let n = self.vertices.len();
        let prev = self.vertices[(k + n - 1) % n];
        let here = self.vertices[k];
        let next = self.vertices[(k + 1) % n];
        let n1 = (here - prev).normalized().rot_cw();
        let n2 = (next - here).normalized().rot_cw();
        (n1 + n2).normalized()
    }

    /// Trapezoidal arc-length weight of vertex `k`: half the length of its
    /// two adjacent edges.
    pub fn vertex_weight(&self, k: usize) -> f64 {
        let n = self.vertices.len();
        let prev = self.vertices[(k + n - 1) % n];
        let here = self.vertices[k];
        let next = self.vertices[(k + 1) % n];
        0.5 * (here.dist(prev) + here.dist(next))
    }

    /// True if some pair of non-adjacent edges properly crosses.
    pub fn is_self_intersecting(&self) -> bool {
        let n = self.vertices.len();
        for a in 0..n {
            let a2 = (a + 1) % n;
            for b in (a + 1)..n {
                let b2 = (b + 1) % n;
                // Skip adjacent edges (share a vertex).
                if a == b || a2 == b || b2 == a {
                    continue;
                }
                if segments_intersect(
                    self.vertices[a],
                    self.vertices[a2],
                    self.vertices[b],
                    self.vertices[b2],
                ) {
                    return true;
                }
            }
        }
        false
    }

    /// Redistribute vertices at (near) uniform spacing `s0` along the
    /// polygon; new vertices lie on the old edges, so the enclosed area is
    /// preserved up to chord slivers.
    pub fn resample(&self, s0: f64) -> Result<MarkerCurve> {
        if !(s0 > 0.0) {
            return Err(Error::Parameter("marker spacing must be positive".into()));
        }
        let per = self.perimeter();
        let count = ((per / s0).round() as usize).max(8);
        let step = per / count as f64;
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(count);
        let mut edge = 0usize;
        let mut along = 0.0; // distance already consumed on the current edge
        let mut target = 0.0;
        let mut walked = 0.0;
        for _ in 0..count {
            // Advance to the edge containing arclength `target`.
            loop {
                let a = self.vertices[edge % n];
                let b = self.vertices[(edge + 1) % n];
                let elen = a.dist(b);
                if walked + (elen - along) >= target - 1e-12 || edge >= 2 * n {
                    let t = (along + (target - walked)).min(elen);
                    let frac = if elen > 0.0 { t / elen } else { 0.0 };
                    out.push(a + (b - a) * frac);
                    along = t;
                    walked = target;
                    break;
                }
                walked += elen - along;
                along = 0.0;
                edge += 1;
            }
            target += step;
        }
        MarkerCurve::new(out)
    }

    /// Min over vertices of |v - center| and max over vertices, as radii.
    pub fn radial_extent(&self, center: Vec2) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for v in &self.vertices {
            let r = v.dist(center);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }

    /// Distance from a point to the curve (as a closed polyline).
    pub fn distance_to(&self, p: Vec2) -> f64 {
        let n = self.vertices.len();
        let mut d = f64::INFINITY;
        for k in 0..n {
            d = d.min(point_segment_distance(p, self.vertices[k], self.vertices[(k + 1) % n]));
        }
        d
    }

    /// CSV rows `x,y`; the closing edge is implicit.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(w, "{},{}", v.x, v.y)?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut vertices = Vec::new();
        for line in BufReader::new(r).lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(',');
            let x: f64 = it
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad curve row `{line}`")))?;
            let y: f64 = it
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad curve row `{line}`")))?;
            vertices.push(Vec2::new(x, y));
        }
        MarkerCurve::new(vertices)
    }
}

/// Symmetric Hausdorff distance between two closed polylines
/// (vertex-to-segment, both directions).
pub fn hausdorff_distance(a: &MarkerCurve, b: &MarkerCurve) -> f64 {
    let one_way = |p: &MarkerCurve, q: &MarkerCurve| {
        p.vertices.iter().map(|&v| q.distance_to(v)).fold(0.0f64, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}
