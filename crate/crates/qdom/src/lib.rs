//! One-phase quadrature domains: find the region `Omega` and potential `u`
//! with `laplace(u) = chi_Omega - mu`, `u >= 0`, and `u = 0` off `Omega`,
//! for a given compactly supported positive measure `mu`.
//!
//! Two solvers are provided:
//!
//! * [`method_one`] — a level-set fixed-point iteration: solve a Robin
//!   problem on the current domain, extend the boundary speed
//!   `zeta * sqrt(2u)` to the whole box, and advect the signed-distance
//!   function. Handles topology changes (merging components).
//! * [`method_two`] — a shape quasi-Newton iteration on an explicit marker
//!   polygon: solve a Dirichlet problem, move every vertex by the sampled
//!   gradient, repeat until the boundary gradient norm is small.
//!
//! [`oracle`] carries closed-form radial solutions used as ground truth,
//! and [`heleshaw`] drives a time sequence of quadrature-domain solves for
//! an injection flow between parallel plates.
//!
//! See the `examples/` directory for one runnable program per capability,
//! and the `qdom` binary for config-file driven runs.

// Validation guards are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`
// they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod contour;
pub mod curve;
pub mod driver;
pub mod error;
pub mod geom;
pub mod grid;
pub mod heleshaw;
pub mod levelset;
pub mod measure;
pub mod method_one;
pub mod method_two;
pub mod oracle;
pub mod poisson;

pub use contour::extract_contour;
pub use curve::{hausdorff_distance, MarkerCurve};
pub use error::{Error, Result};
pub use geom::Vec2;
pub use grid::{Grid2D, ScalarField};
pub use levelset::{LevelSetFn, Shape};
pub use measure::{Density, Measure, MeasureComponent, Poly2, SakaiRadii};
pub use poisson::DomainMask;
