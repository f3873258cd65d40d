//! Marching-squares extraction of the zero level set.
//!
//! Cells are scanned row-major; crossings are placed on cell edges by linear
//! interpolation and segments are oriented so the negative region lies on
//! the left of the travel direction. Closed loops therefore come out
//! counterclockwise around `{phi < 0}`. The saddle cases (two opposite
//! corners negative) are resolved by the sign of the cell-center average.

use crate::curve::MarkerCurve;
use crate::geom::Vec2;
use crate::grid::ScalarField;
use std::collections::HashMap;

/// Edge identifier: horizontal edges first, then vertical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct EdgeKey {
    horizontal: bool,
    i: usize,
    j: usize,
}

struct Segment {
    from: EdgeKey,
    to: EdgeKey,
}

/// Extract all zero contours of `phi` as polygonal curves.
/// Returns an empty list when `phi` has no sign change.
pub fn extract_contour(phi: &ScalarField) -> Vec<MarkerCurve> {
    let g = &phi.grid;
    let inside = |v: f64| v < 0.0;

    let mut crossings: HashMap<EdgeKey, Vec2> = HashMap::new();
    let mut segments: Vec<Segment> = Vec::new();
    let mut from_index: HashMap<EdgeKey, usize> = HashMap::new();

    let mut cross_point = |key: EdgeKey, va: f64, vb: f64, pa: Vec2, pb: Vec2| -> Vec2 {
        *crossings.entry(key).or_insert_with(|| {
            let t = (va / (va - vb)).clamp(0.0, 1.0);
            pa + (pb - pa) * t
        })
    };

    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let v0 = phi.at(i, j); // SW
            let v1 = phi.at(i + 1, j); // SE
            let v2 = phi.at(i + 1, j + 1); // NE
            let v3 = phi.at(i, j + 1); // NW
            let mask = (inside(v0) as usize)
                | (inside(v1) as usize) << 1
                | (inside(v2) as usize) << 2
                | (inside(v3) as usize) << 3;
            if mask == 0 || mask == 15 {
                continue;
            }

            let s_key = EdgeKey { horizontal: true, i, j };
            let n_key = EdgeKey { horizontal: true, i, j: j + 1 };
            let w_key = EdgeKey { horizontal: false, i, j };
            let e_key = EdgeKey { horizontal: false, i: i + 1, j };

            let p00 = g.pos(i, j);
            let p10 = g.pos(i + 1, j);
            let p11 = g.pos(i + 1, j + 1);
            let p01 = g.pos(i, j + 1);

            let mut pt = |which: EdgeKey| -> Vec2 {
                if which == s_key {
                    cross_point(s_key, v0, v1, p00, p10)
                } else if which == n_key {
                    cross_point(n_key, v3, v2, p01, p11)
                } else if which == w_key {
                    cross_point(w_key, v0, v3, p00, p01)
                } else {
                    cross_point(e_key, v1, v2, p10, p11)
                }
            };

            // Directed (from, to) pairs keeping {phi < 0} on the left.
            let pairs: &[(EdgeKey, EdgeKey)] = match mask {
                1 => &[(s_key, w_key)],
                2 => &[(e_key, s_key)],
                3 => &[(e_key, w_key)],
                4 => &[(n_key, e_key)],
                5 => {
                    if (v0 + v1 + v2 + v3) * 0.25 < 0.0 {
                        &[(s_key, e_key), (n_key, w_key)]
                    } else {
                        &[(s_key, w_key), (n_key, e_key)]
                    }
                }
                6 => &[(n_key, s_key)],
                7 => &[(n_key, w_key)],
                8 => &[(w_key, n_key)],
                9 => &[(s_key, n_key)],
                10 => {
                    if (v0 + v1 + v2 + v3) * 0.25 < 0.0 {
                        &[(w_key, s_key), (e_key, n_key)]
                    } else {
                        &[(e_key, s_key), (w_key, n_key)]
                    }
                }
                11 => &[(e_key, n_key)],
                12 => &[(w_key, e_key)],
                13 => &[(s_key, e_key)],
                14 => &[(w_key, s_key)],
                _ => unreachable!(),
            };
            for &(a, b) in pairs {
                pt(a);
                pt(b);
                from_index.insert(a, segments.len());
                segments.push(Segment { from: a, to: b });
            }
        }
    }

    // Stitch directed segments into chains. Seeds can land mid-chain, so
    // rewind to the chain head first; for closed loops any head works.
    let to_index: HashMap<EdgeKey, usize> =
        segments.iter().enumerate().map(|(i, s)| (s.to, i)).collect();
    let mut used = vec![false; segments.len()];
    let mut curves = Vec::new();
    for seed in 0..segments.len() {
        if used[seed] {
            continue;
        }
        let mut head = seed;
        while let Some(&prev) = to_index.get(&segments[head].from) {
            if used[prev] || prev == seed {
                break; // consumed junction, or came around a closed loop
            }
            head = prev;
        }
        let mut verts = Vec::new();
        let mut cur = head;
        loop {
            used[cur] = true;
            verts.push(crossings[&segments[cur].from]);
            match from_index.get(&segments[cur].to) {
                Some(&next) if next == head => break, // closed
                Some(&next) if !used[next] => cur = next,
                _ => {
                    // Open chain (interface leaves the grid); keep endpoint.
                    verts.push(crossings[&segments[cur].to]);
                    break;
                }
            }
        }
        if verts.len() >= 3 {
            curves.push(MarkerCurve { vertices: verts });
        }
    }
    curves
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_perimeter() {
        let h = 0.02;
        let grid = Grid2D::centered(Vec2::ZERO, 1.5, h).unwrap();
        let phi = ScalarField::from_fn(grid, |p| p.norm() - 1.0);
        let curves = extract_contour(&phi);
        assert_eq!(curves.len(), 1);
        let per = curves[0].perimeter();
        assert!(per >= 2.0 * PI - h && per <= 2.0 * PI + h, "perimeter {per}");
        // Counterclockwise around the negative region.
        assert!(curves[0].signed_area() > 0.0);
    }

    #[test]
    fn no_interface_gives_empty_list() {
        let grid = Grid2D::centered(Vec2::ZERO, 1.0, 0.1).unwrap();
        let phi = ScalarField::constant(grid, 1.0);
        assert!(extract_contour(&phi).is_empty());
    }

    #[test]
    fn two_discs_give_two_components() {
        let h = 0.05;
        let grid = Grid2D::centered(Vec2::ZERO, 3.5, h).unwrap();
        let phi = ScalarField::from_fn(grid, |p| {
            let d1 = p.dist(Vec2::new(-2.0, 0.0));
            let d2 = p.dist(Vec2::new(2.0, 0.0));
            d1.min(d2) - 1.0
        });
        let curves = extract_contour(&phi);
        assert_eq!(curves.len(), 2);
        for c in &curves {
            assert!(c.signed_area() > 0.0);
            assert!((c.area() - PI).abs() < 0.05);
        }
    }

    #[test]
    fn interface_reaching_the_border_yields_open_chain() {
        // phi = y: the zero line crosses the whole grid; the stitcher must
        // return it as a single open polyline without panicking.
        let grid = Grid2D::centered(Vec2::ZERO, 1.0, 0.1).unwrap();
        let phi = ScalarField::from_fn(grid, |p| p.y + 0.05);
        let curves = extract_contour(&phi);
        assert_eq!(curves.len(), 1);
        assert!(curves[0].len() >= grid.nx - 1);
        for v in &curves[0].vertices {
            assert!((v.y + 0.05).abs() < 1e-12);
        }
    }

    #[test]
    fn union_midpoint_is_outside() {
        // min of distances to two separated discs: positive at the origin.
        let d1 = Vec2::ZERO.dist(Vec2::new(-2.0, 0.0)) - 1.0;
        let d2 = Vec2::ZERO.dist(Vec2::new(2.0, 0.0)) - 1.0;
        assert_eq!(d1.min(d2), 1.0);
    }

    proptest! {
        /// Every returned vertex sits on the discrete zero set up to the
        /// linear interpolation residual.
        #[test]
        fn vertices_lie_on_zero_set(cx in -0.3f64..0.3, cy in -0.3f64..0.3, r in 0.4f64..1.2) {
            let h = 0.04;
            let grid = Grid2D::centered(Vec2::ZERO, 1.8, h).unwrap();
            let phi = ScalarField::from_fn(grid, |p| p.dist(Vec2::new(cx, cy)) - r);
            for c in extract_contour(&phi) {
                for &v in &c.vertices {
                    let res = phi.interpolate(v).unwrap().abs();
                    prop_assert!(res <= h, "residual {} at {:?}", res, v);
                }
            }
        }
    }
}
