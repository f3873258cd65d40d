//! Finite-difference elliptic solves on irregular subdomains of the grid:
//! Dirichlet, Robin, and the two-region velocity-extension problem.
//!
//! Discretization: five-point Laplacian with ghost-value elimination at the
//! edges cut by the interface. For Dirichlet data the ghost value is the
//! linear extrapolation through the interface value at the cut fraction,
//! which keeps the matrix symmetric positive definite and the solve
//! second-order accurate on curved boundaries. The Robin condition
//! `du/dn + theta u = 0` is imposed along each cut edge through the normal
//! projection of the edge direction; this is first-order at the boundary,
//! which is all the fixed-point iteration needs (the fixed point has
//! `u -> 0` there).
//!
//! Linear systems are solved with Jacobi-preconditioned conjugate
//! gradients, relative tolerance 1e-10, at most `20 (nx + ny)` iterations.
//! Everything is deterministic.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::grid::{Grid2D, ScalarField};
use crate::levelset::LevelSetFn;
use std::collections::HashMap;

const CG_TOL: f64 = 1e-10;
const MIN_CUT_FRACTION: f64 = 1e-2;
const MIN_NORMAL_COMPONENT: f64 = 0.1;

/// Direction of a grid edge from a node: +x, -x, +y, -y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    East,
    West,
    North,
    South,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::East, Dir::West, Dir::North, Dir::South];

    fn offset(self) -> (isize, isize) {
        match self {
            Dir::East => (1, 0),
            Dir::West => (-1, 0),
            Dir::North => (0, 1),
            Dir::South => (0, -1),
        }
    }

    fn unit(self) -> Vec2 {
        let (dx, dy) = self.offset();
        Vec2::new(dx as f64, dy as f64)
    }
}

/// An inside node whose neighbor across `dir` lies outside; the interface
/// crosses the edge at `frac * h` from the inside node.
#[derive(Debug, Clone, Copy)]
pub struct Cut {
    pub node: usize,
    pub dir: Dir,
    /// Fractional distance to the interface along the edge, in (0, 1].
    pub frac: f64,
    /// Outward normal component along the edge direction, in (0, 1].
    pub normal_component: f64,
    /// Crossing position in physical coordinates.
    pub point: Vec2,
}

/// Discrete domain: inside nodes of `{phi < 0}` with their cut edges.
/// Isolated inside nodes (no inside neighbor) are pruned.
#[derive(Debug, Clone)]
pub struct DomainMask {
    pub grid: Grid2D,
    pub inside: Vec<bool>,
    pub cuts: Vec<Cut>,
    /// node -> row in the linear system, or -1.
    pub unknown_index: Vec<i64>,
    /// row -> node.
    pub nodes: Vec<usize>,
    /// Number of isolated nodes removed during construction.
    pub pruned: usize,
}

impl DomainMask {
    pub fn from_levelset(phi: &LevelSetFn) -> Result<DomainMask> {
        let g = phi.grid();
        let (nx, ny) = (g.nx, g.ny);
        let vals = &phi.field.values;
        let mut inside: Vec<bool> = vals.iter().map(|&v| v < 0.0).collect();

        if phi.touches_border() {
            return Err(Error::Geometry("domain touches the computational box boundary".into()));
        }

        // Prune nodes with no inside neighbor; removal can cascade.
        let mut pruned = 0usize;
        loop {
            let mut changed = false;
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    let k = g.idx(i, j);
                    if !inside[k] {
                        continue;
                    }
                    let any = inside[k - 1] || inside[k + 1] || inside[k - nx] || inside[k + nx];
                    if !any {
                        inside[k] = false;
                        pruned += 1;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if inside.iter().all(|&b| !b) {
            return Err(Error::Degenerate("no inside nodes left after pruning".into()));
        }

        let mut unknown_index = vec![-1i64; vals.len()];
        let mut nodes = Vec::new();
        for k in 0..vals.len() {
            if inside[k] {
                unknown_index[k] = nodes.len() as i64;
                nodes.push(k);
            }
        }

        let mut cuts = Vec::new();
        for &k in &nodes {
            let i = k % nx;
            let j = k / nx;
            // Interface normal from the level-set gradient at the node.
            let gx = (vals[k + 1] - vals[k - 1]) / (2.0 * g.h);
            let gy = (vals[k + nx] - vals[k - nx]) / (2.0 * g.h);
            let normal = Vec2::new(gx, gy).normalized();
            for dir in Dir::ALL {
                let (di, dj) = dir.offset();
                let kn = ((j as isize + dj) * nx as isize + (i as isize + di)) as usize;
                if inside[kn] {
                    continue;
                }
                // Fraction from the raw level set; pruned neighbors may
                // still carry phi < 0, then the edge is a full cell.
                let (pa, pb) = (vals[k], vals[kn]);
                let frac = if pb >= 0.0 {
                    (pa / (pa - pb)).clamp(MIN_CUT_FRACTION, 1.0)
                } else {
                    1.0
                };
                let nd = normal.dot(dir.unit()).clamp(MIN_NORMAL_COMPONENT, 1.0);
                cuts.push(Cut {
                    node: k,
                    dir,
                    frac,
                    normal_component: nd,
                    point: g.pos(i, j) + dir.unit() * (frac * g.h),
                });
            }
        }

        Ok(DomainMask { grid: g, inside, cuts, unknown_index, nodes, pruned })
    }

    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

}

// ---- sparse matrix and conjugate gradients ----

pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for t in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[t] * x[self.cols[t]];
            }
            *out = acc;
        }
    }

    fn entry(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&c) {
            Ok(t) => self.vals[lo + t],
            Err(_) => 0.0,
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.entry(r, r)).collect()
    }

    pub fn assert_symmetric(&self) -> Result<()> {
        let scale = self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for r in 0..self.n {
            for t in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[t];
                if (self.vals[t] - self.entry(c, r)).abs() > 1e-12 * scale {
                    return Err(Error::InvariantViolation(format!(
                        "assembled matrix not symmetric at ({r}, {c})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Jacobi-preconditioned conjugate gradients. Deterministic; converges for
/// any symmetric positive definite system.
fn pcg(a: &Csr, b: &[f64], x0: Option<Vec<f64>>, max_iters: usize) -> Result<Vec<f64>> {
    let n = a.n;
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| 1.0 / d).collect();
    let mut x = x0.unwrap_or_else(|| vec![0.0; n]);
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    for k in 0..n {
        r[k] = b[k] - r[k];
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut history = Vec::new();
    for _ in 0..max_iters {
        let res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / norm_b;
        history.push(res);
        if res <= CG_TOL {
            return Ok(x);
        }
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    let final_residual = *history.last().unwrap_or(&f64::NAN);
    Err(Error::SolverFailure { iterations: max_iters, final_residual, residual_history: history })
}

fn max_cg_iters(grid: &Grid2D) -> usize {
    20 * (grid.nx + grid.ny)
}

// ---- assembly ----

struct System {
    csr: Csr,
    rhs: Vec<f64>,
    /// Per-row Dirichlet ghost values folded into the rhs (for the
    /// maximum-principle check).
    ghost_vals: Vec<Vec<f64>>,
    /// Per-row forcing `f` (sign as in `lap u = f`).
    forcing: Vec<f64>,
}

/// Boundary handling of one cut edge, h^2-scaled.
enum CutScheme {
    /// u = g at the crossing.
    Dirichlet { g: f64 },
    /// du/dn = -theta u at the crossing, projected on the edge direction.
    Robin { theta: f64 },
}

fn assemble(
    mask: &DomainMask,
    f: &ScalarField,
    scheme: impl Fn(&Cut) -> CutScheme,
) -> System {
    let g = mask.grid;
    let nx = g.nx;
    let n = mask.unknowns();
    let h = g.h;
    let mut diag = vec![4.0; n];
    let mut rhs = vec![0.0; n];
    let mut ghost_vals = vec![Vec::new(); n];
    let mut forcing = vec![0.0; n];
    let mut off: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];

    for (row, &k) in mask.nodes.iter().enumerate() {
        forcing[row] = f.values[k];
        rhs[row] = -h * h * f.values[k];
        for dir in Dir::ALL {
            let (di, dj) = dir.offset();
            let kn = (k as isize + di + dj * nx as isize) as usize;
            if mask.inside[kn] {
                off[row].push((mask.unknown_index[kn] as usize, -1.0));
            }
        }
    }

    for cut in &mask.cuts {
        let row = mask.unknown_index[cut.node] as usize;
        let frac = cut.frac.max(MIN_CUT_FRACTION);
        match scheme(cut) {
            CutScheme::Dirichlet { g } => {
                diag[row] += (1.0 - frac) / frac;
                rhs[row] += g / frac;
                ghost_vals[row].push(g);
            }
            CutScheme::Robin { theta } => {
                let beta = 1.0 / (1.0 + theta * frac * h * cut.normal_component);
                diag[row] += (1.0 - frac - beta) / frac;
                ghost_vals[row].push(0.0);
            }
        }
    }

    // CSR with sorted columns per row.
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for row in 0..n {
        let mut entries = off[row].clone();
        entries.push((row, diag[row]));
        entries.sort_by_key(|e| e.0);
        for (c, v) in entries {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    System { csr: Csr { n, row_ptr, cols, vals }, rhs, ghost_vals, forcing }
}

/// Discrete maximum principle: where the forcing is signed, the solution
/// has no interior extremum beyond its neighbors and boundary data.
/// Active in debug builds only.
fn debug_check_max_principle(mask: &DomainMask, sys: &System, x: &[f64]) {
    if !cfg!(debug_assertions) {
        return;
    }
    let nx = mask.grid.nx;
    for (row, &k) in mask.nodes.iter().enumerate() {
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for dir in Dir::ALL {
            let (di, dj) = dir.offset();
            let kn = (k as isize + di + dj * nx as isize) as usize;
            if mask.inside[kn] {
                let v = x[mask.unknown_index[kn] as usize];
                hi = hi.max(v);
                lo = lo.min(v);
            }
        }
        for &g in &sys.ghost_vals[row] {
            hi = hi.max(g);
            lo = lo.min(g);
        }
        let tol = 1e-8 * (1.0 + x[row].abs());
        if sys.forcing[row] >= 0.0 {
            debug_assert!(
                x[row] <= hi.max(0.0) + tol,
                "max principle violated at node {k}: {} > {}",
                x[row],
                hi
            );
        }
        if sys.forcing[row] <= 0.0 {
            debug_assert!(
                x[row] >= lo.min(0.0) - tol,
                "min principle violated at node {k}: {} < {}",
                x[row],
                lo
            );
        }
    }
}

fn field_from_rows(mask: &DomainMask, x: &[f64]) -> ScalarField {
    let mut out = ScalarField::zeros(mask.grid);
    for (row, &k) in mask.nodes.iter().enumerate() {
        out.values[k] = x[row];
    }
    out
}

fn restrict_to_rows(mask: &DomainMask, guess: &ScalarField) -> Vec<f64> {
    mask.nodes.iter().map(|&k| guess.values[k]).collect()
}

/// Solve `lap u = f` on the masked domain with `u = 0` at the interface.
pub fn solve_dirichlet(mask: &DomainMask, f: &ScalarField) -> Result<ScalarField> {
    solve_dirichlet_warm(mask, f, None)
}

pub fn solve_dirichlet_warm(
    mask: &DomainMask,
    f: &ScalarField,
    guess: Option<&ScalarField>,
) -> Result<ScalarField> {
    if mask.unknowns() == 0 {
        return Err(Error::Degenerate("empty domain mask".into()));
    }
    let sys = assemble(mask, f, |_| CutScheme::Dirichlet { g: 0.0 });
    sys.csr.assert_symmetric()?;
    let x0 = guess.map(|u| restrict_to_rows(mask, u));
    let x = pcg(&sys.csr, &sys.rhs, x0, max_cg_iters(&mask.grid))?;
    debug_check_max_principle(mask, &sys, &x);
    Ok(field_from_rows(mask, &x))
}

/// Solve `lap u = f` with `du/dn + theta u = 0` on the interface.
/// The system stays symmetric positive definite for every `theta > 0`.
pub fn solve_robin(mask: &DomainMask, f: &ScalarField, theta: f64) -> Result<ScalarField> {
    solve_robin_warm(mask, f, theta, None)
}

pub fn solve_robin_warm(
    mask: &DomainMask,
    f: &ScalarField,
    theta: f64,
    guess: Option<&ScalarField>,
) -> Result<ScalarField> {
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!("Robin coefficient theta = {theta} must be positive")));
    }
    if mask.unknowns() == 0 {
        return Err(Error::Degenerate("empty domain mask".into()));
    }
    let sys = assemble(mask, f, |_| CutScheme::Robin { theta });
    sys.csr.assert_symmetric()?;
    let x0 = guess.map(|u| restrict_to_rows(mask, u));
    let x = pcg(&sys.csr, &sys.rhs, x0, max_cg_iters(&mask.grid))?;
    debug_check_max_principle(mask, &sys, &x);
    Ok(field_from_rows(mask, &x))
}

/// Interface value of the Robin solution at each cut, from the ghost
/// relation `u_c = u_i / (1 + theta * frac * h * n_d)`.
pub fn robin_interface_values(u: &ScalarField, mask: &DomainMask, theta: f64) -> Vec<f64> {
    let h = mask.grid.h;
    mask.cuts
        .iter()
        .map(|cut| {
            let beta = 1.0 / (1.0 + theta * cut.frac * h * cut.normal_component);
            beta * u.values[cut.node]
        })
        .collect()
}

/// Forcing of the inside region in the velocity extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtensionForcing {
    One,
    Zero,
}

/// Extend interface speeds to the whole box: `lap v = forcing` inside the
/// domain (minus the measure support), `lap v = 0` outside, `v = 0` on the
/// support nodes and the box boundary, `v = speeds` on the interface.
/// `speeds` is aligned with `mask.cuts`.
pub fn solve_extension(
    mask: &DomainMask,
    support: &[bool],
    speeds: &[f64],
    forcing: ExtensionForcing,
) -> Result<ScalarField> {
    solve_extension_warm(mask, support, speeds, forcing, None)
}

pub fn solve_extension_warm(
    mask: &DomainMask,
    support: &[bool],
    speeds: &[f64],
    forcing: ExtensionForcing,
    guess: Option<&ScalarField>,
) -> Result<ScalarField> {
    let g = mask.grid;
    let (nx, ny) = (g.nx, g.ny);
    let h = g.h;
    if speeds.len() != mask.cuts.len() {
        return Err(Error::Parameter("speeds not aligned with mask cuts".into()));
    }
    // The support must sit strictly inside the domain: every support node
    // inside, and not adjacent to the interface.
    for (k, &s) in support.iter().enumerate() {
        if !s {
            continue;
        }
        if !mask.inside[k] {
            return Err(Error::Geometry(
                "measure support outside the current domain (initial domain too small)".into(),
            ));
        }
    }
    for cut in &mask.cuts {
        if support[cut.node] {
            return Err(Error::Geometry(
                "measure support touches the free boundary (initial domain too small)".into(),
            ));
        }
    }

    // Crossing speeds keyed by undirected edge.
    let mut edge_speed: HashMap<(usize, bool), (f64, f64)> = HashMap::new();
    for (cut, &s) in mask.cuts.iter().zip(speeds) {
        let horizontal = matches!(cut.dir, Dir::East | Dir::West);
        let base = match cut.dir {
            Dir::East | Dir::North => cut.node,
            Dir::West => cut.node - 1,
            Dir::South => cut.node - nx,
        };
        // Fraction measured from the lower-index endpoint.
        let frac_from_base = match cut.dir {
            Dir::East | Dir::North => cut.frac,
            _ => 1.0 - cut.frac,
        };
        edge_speed.insert((base, horizontal), (frac_from_base, s));
    }

    // Unknowns: every node that is not a support node and not on the border.
    let mut index = vec![-1i64; g.node_count()];
    let mut nodes = Vec::new();
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let k = g.idx(i, j);
            if !support[k] {
                index[k] = nodes.len() as i64;
                nodes.push(k);
            }
        }
    }
    let n = nodes.len();
    let mut diag = vec![4.0; n];
    let mut rhs = vec![0.0; n];
    let mut off: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];

    let f_inside = match forcing {
        ExtensionForcing::One => 1.0,
        ExtensionForcing::Zero => 0.0,
    };

    for (row, &k) in nodes.iter().enumerate() {
        if mask.inside[k] {
            rhs[row] = -h * h * f_inside;
        }
        for dir in Dir::ALL {
            let (di, dj) = dir.offset();
            let kn = (k as isize + di + dj * nx as isize) as usize;
            if mask.inside[k] != mask.inside[kn] {
                // Edge crosses the interface: Dirichlet ghost with the
                // recorded crossing speed. Every such edge carries a cut.
                let horizontal = matches!(dir, Dir::East | Dir::West);
                let base = match dir {
                    Dir::East | Dir::North => k,
                    Dir::West => k - 1,
                    Dir::South => k - nx,
                };
                let &(frac_from_base, s) = edge_speed
                    .get(&(base, horizontal))
                    .ok_or_else(|| Error::Geometry("crossing edge without a cut record".into()))?;
                let frac_from_k = match dir {
                    Dir::East | Dir::North => frac_from_base,
                    _ => 1.0 - frac_from_base,
                };
                let frac = frac_from_k.clamp(MIN_CUT_FRACTION, 1.0);
                diag[row] += (1.0 - frac) / frac;
                rhs[row] += s / frac;
            } else if index[kn] >= 0 {
                off[row].push((index[kn] as usize, -1.0));
            }
            // Support or border neighbor: Dirichlet zero, nothing to add.
        }
    }

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for row in 0..n {
        let mut entries = off[row].clone();
        entries.push((row, diag[row]));
        entries.sort_by_key(|e| e.0);
        for (c, v) in entries {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    let csr = Csr { n, row_ptr, cols, vals };
    csr.assert_symmetric()?;
    let x0 = guess.map(|u| nodes.iter().map(|&k| u.values[k]).collect());
    let x = pcg(&csr, &rhs, x0, max_cg_iters(&g))?;

    let mut out = ScalarField::zeros(g);
    for (row, &k) in nodes.iter().enumerate() {
        out.values[k] = x[row];
    }
    Ok(out)
}
