//! Condenser capacities: radial closed forms, a grid solver for general
//! condensers, and comparison estimates between them.

pub mod estimates;
pub mod grid;
pub mod radial;
pub mod solver;

pub use estimates::{
    annulus_split_bound, linear_shell_profile, linear_shell_profile_integral, duality_check, sandwich_constant, excision_sandwich,
    poincare_constant_estimate, DualityReport, PoincareEstimate, SandwichReport, SplitBound,
};
pub use grid::Grid;
pub use radial::{radial_capacity_exact, radial_set_capacity, shell_capacity};
pub use solver::{DiscreteProblem, Init, SolveOptions};

use crate::error::{Error, Result};
use crate::model::{Condenser, Exponents, SetDescriptor};

/// How a capacity value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    Exact,
    UpperBound,
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    pub grid: Option<Grid>,
    pub iterations: usize,
    pub converged: bool,
    /// Value on this grid over the value on the grid of twice the spacing.
    pub refinement_ratio: Option<f64>,
    pub analytic_bounds: Option<(f64, f64)>,
}

impl CapacityEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            kind: EstimateKind::Exact,
            grid: None,
            iterations: 0,
            converged: true,
            refinement_ratio: None,
            analytic_bounds: Some((value, value)),
        }
    }

    pub fn upper_bound(value: f64) -> Self {
        Self { kind: EstimateKind::UpperBound, analytic_bounds: Some((0.0, value)), ..Self::exact(value) }
    }
}

/// Number of sequence terms realized for grid membership.
pub const GRID_TRUNCATION: usize = 64;

/// Smallest coarse level used by the nested solve, in nodes per axis.
const COARSEST: usize = 9;

/// Discretizes `(K, G)` on `grid`: nodes in `K` are fixed to 1; a node is
/// free when its whole `3^n` neighbourhood lies in `G`, otherwise fixed to 0.
/// With `natural_faces`, neighbours beyond the grid count as inside `G`,
/// which puts a natural boundary condition on the faces of the box.
pub fn discretize(k: &SetDescriptor, g: &SetDescriptor, c: &Condenser, p: f64, grid: &Grid, natural_faces: bool) -> Result<DiscreteProblem> {
    let n = grid.n();
    let nn = grid.node_count();
    let mut in_g = vec![false; nn];
    let mut in_k = vec![false; nn];
    let mut x = vec![0.0; n];
    for i in 0..nn {
        grid.coords(i, &mut x);
        in_k[i] = k.contains(&x, GRID_TRUNCATION)?;
        in_g[i] = in_k[i] || g.contains(&x, GRID_TRUNCATION)?;
    }
    let strides = grid.strides();
    let mut mi = vec![0usize; n];
    let mut free = vec![false; nn];
    let mut values = vec![0.0; nn];
    for i in 0..nn {
        grid.multi_index(i, &mut mi);
        let mut interior = true;
        for code in 0..3usize.pow(n as u32) {
            let mut idx = i as isize;
            let mut rest = code;
            let mut outside_box = false;
            for k in 0..n {
                let step = (rest % 3) as isize - 1;
                rest /= 3;
                let at = mi[k] as isize + step;
                if at < 0 || at >= grid.dims[k] as isize {
                    outside_box = true;
                }
                idx += step * strides[k] as isize;
            }
            let ok = if outside_box { natural_faces } else { in_g[idx as usize] };
            if !ok {
                interior = false;
                break;
            }
        }
        if in_k[i] {
            if !interior {
                return Err(Error::Geometry("K touches the boundary of G at grid resolution".into()));
            }
            values[i] = 1.0;
        } else {
            free[i] = interior;
        }
    }
    Ok(DiscreteProblem { grid: grid.clone(), free, values, weight: c.weight, p, rhs: None })
}

/// Minimal discrete energy of `c` on `grid`.
pub fn grid_capacity(c: &Condenser, exp: Exponents, grid: &Grid, opts: &SolveOptions) -> Result<CapacityEstimate> {
    grid_capacity_with_faces(c, exp, grid, opts, false)
}

fn grid_capacity_with_faces(c: &Condenser, exp: Exponents, grid: &Grid, opts: &SolveOptions, natural: bool) -> Result<CapacityEstimate> {
    if grid.n() != exp.n() {
        return Err(Error::DimensionMismatch { expected: exp.n(), got: grid.n() });
    }
    let k = c.k.realize(GRID_TRUNCATION)?;
    let g = c.g.realize(GRID_TRUNCATION)?;
    let build = |gr: &Grid| discretize(&k, &g, c, exp.p(), gr, natural);
    let (sol, coarse) = solver::minimize_nested(&build, grid, opts, COARSEST)?;
    Ok(CapacityEstimate {
        value: sol.energy,
        kind: EstimateKind::Grid,
        grid: Some(grid.clone()),
        iterations: sol.iterations,
        converged: true,
        refinement_ratio: coarse.map(|e| if e > 0.0 { sol.energy / e } else { f64::NAN }),
        analytic_bounds: None,
    })
}

/// Grid capacity at spacing `h` on a box fitted to `G`. An unbounded `G` is
/// truncated to a box about `K` whose size doubles until the value changes by
/// less than 1%; for `p ≥ n` the truncation faces carry a natural boundary
/// condition, otherwise `u = 0`.
pub fn grid_capacity_auto(c: &Condenser, exp: Exponents, h: f64, opts: &SolveOptions) -> Result<CapacityEstimate> {
    let n = exp.n();
    if let Some((lo, hi)) = c.g.bounding_box(n) {
        let grid = Grid::covering(&lo, &hi, h)?;
        return grid_capacity(c, exp, &grid, opts);
    }
    grid_capacity_truncated(c, exp, h, opts)
}

/// Grid capacity on boxes about `K` that double in size until the value
/// changes by less than 1%, ignoring any bounding box of `G`. Faces carry a
/// natural boundary condition for `p ≥ n` and `u = 0` otherwise.
pub fn grid_capacity_truncated(c: &Condenser, exp: Exponents, h: f64, opts: &SolveOptions) -> Result<CapacityEstimate> {
    let n = exp.n();
    let (klo, khi) = match c.k.bounding_box(n) {
        Some(b) => b,
        None if c.k.is_empty_union() => return Ok(CapacityEstimate::exact(0.0)),
        None => return Err(Error::Geometry("compact set K has no computable bounding box".into())),
    };
    let mid: Vec<f64> = klo.iter().zip(&khi).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut half = klo.iter().zip(&khi).map(|(a, b)| b - a).fold(h, f64::max);
    let natural = exp.p() >= n as f64;
    let mut last: Option<CapacityEstimate> = None;
    loop {
        let lo: Vec<f64> = mid.iter().map(|m| m - half).collect();
        let hi: Vec<f64> = mid.iter().map(|m| m + half).collect();
        let grid = match Grid::covering(&lo, &hi, h) {
            Ok(g) => g,
            Err(Error::Unsupported(_)) if last.is_some() => {
                let mut est = last.expect("checked");
                est.converged = false;
                return Ok(est);
            }
            Err(e) => return Err(e),
        };
        let est = grid_capacity_with_faces(c, exp, &grid, opts, natural)?;
        if let Some(prev) = &last {
            if (est.value - prev.value).abs() <= 0.01 * prev.value.max(est.value) {
                return Ok(est);
            }
        }
        last = Some(est);
        half *= 2.0;
    }
}
