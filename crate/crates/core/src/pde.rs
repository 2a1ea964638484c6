//! Weighted p-harmonic Dirichlet problems on planar grids, solved by energy
//! minimization, and numerical probes of boundary behaviour.
//!
//! Probes never decide regularity: their outcomes read "consistent with
//! regular" or "consistent with irregular".

use std::collections::VecDeque;

use crate::capacity::grid::Grid;
use crate::capacity::solver::{energy_of, minimize_nested, DiscreteProblem, Init, SolveOptions};
use crate::capacity::GRID_TRUNCATION;
use crate::error::{Error, Result};
use crate::inversion::invert;
use crate::model::{dist, Exponents, SetDescriptor, Weight};

/// Nodes per axis of the coarsest level of the nested solve.
const COARSEST: usize = 9;

/// A Dirichlet problem on grid nodes. `inside` marks the unknowns; every
/// other node keeps its entry of `boundary`.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub grid: Grid,
    pub inside: Vec<bool>,
    pub boundary: Vec<f64>,
    pub exp: Exponents,
    pub weight: Weight,
}

impl DirichletProblem {
    /// Nodes of `grid` in `domain` become unknowns, all other nodes take
    /// `data`. Nodes on the edge of the grid are always boundary nodes.
    pub fn on_domain<F>(domain: &SetDescriptor, grid: Grid, exp: Exponents, weight: Weight, data: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let n = grid.n();
        let mut inside = vec![false; grid.node_count()];
        let mut boundary = vec![0.0; grid.node_count()];
        let (mut x, mut mi) = (vec![0.0; n], vec![0; n]);
        for i in 0..grid.node_count() {
            grid.coords(i, &mut x);
            grid.multi_index(i, &mut mi);
            let edge = mi.iter().zip(&grid.dims).any(|(&a, &d)| a == 0 || a + 1 == d);
            inside[i] = !edge && domain.contains(&x, GRID_TRUNCATION)?;
            if !inside[i] {
                boundary[i] = data(&x);
            }
        }
        let prob = Self { grid, inside, boundary, exp, weight };
        prob.validate()?;
        Ok(prob)
    }

    /// Checks dimension, finiteness of the data, that the grid edge is
    /// boundary, and that the unknowns form one connected set.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.n() != 2 || self.exp.n() != 2 {
            return Err(Error::Unsupported("grid Dirichlet problems are planar; use radial_dirichlet for n ≥ 3".into()));
        }
        let nn = g.node_count();
        if self.inside.len() != nn || self.boundary.len() != nn {
            return Err(Error::DimensionMismatch { expected: nn, got: self.inside.len().min(self.boundary.len()) });
        }
        if self.exp.p() < 2.0 {
            return Err(Error::Unsupported(format!("the energy solver needs p ≥ 2 (got {})", self.exp.p())));
        }
        let mut mi = [0usize; 2];
        for i in 0..nn {
            g.multi_index(i, &mut mi);
            let edge = mi.iter().zip(&g.dims).any(|(&a, &d)| a == 0 || a + 1 == d);
            if self.inside[i] && edge {
                return Err(Error::Geometry("unknowns reach the edge of the grid".into()));
            }
            if !self.inside[i] && !self.boundary[i].is_finite() {
                return Err(Error::Domain(format!("boundary data at node {i} is not finite")));
            }
        }
        let Some(start) = self.inside.iter().position(|&b| b) else {
            return Err(Error::Geometry("the domain contains no grid node".into()));
        };
        let s = g.strides();
        let mut seen = vec![false; nn];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for j in [i - s[0], i + s[0], i - s[1], i + s[1]] {
                if self.inside[j] && !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        if count != self.inside.iter().filter(|&&b| b).count() {
            return Err(Error::Geometry("the unknowns are not connected on the grid".into()));
        }
        Ok(())
    }

    fn data_range(&self) -> (f64, f64) {
        self.boundary_values().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    }

    /// Data at boundary nodes next to an unknown.
    fn boundary_values(&self) -> impl Iterator<Item = f64> + '_ {
        let s = self.grid.strides();
        (0..self.inside.len()).filter_map(move |i| {
            if self.inside[i] {
                return None;
            }
            let touches = [s[0], s[1]].iter().any(|&d| {
                (i >= d && self.inside[i - d]) || (i + d < self.inside.len() && self.inside[i + d])
            });
            touches.then_some(self.boundary[i])
        })
    }

    /// The problem restricted to the nodes of a coarsening of its grid.
    fn restrict(&self, coarse: &Grid) -> DiscreteProblem {
        let f = (coarse.h / self.grid.h).round() as usize;
        let mut free = vec![false; coarse.node_count()];
        let mut values = vec![0.0; coarse.node_count()];
        let mut mi = [0usize; 2];
        for i in 0..coarse.node_count() {
            coarse.multi_index(i, &mut mi);
            let j = self.grid.index_of(&[mi[0] * f, mi[1] * f]);
            free[i] = self.inside[j];
            values[i] = self.boundary[j];
        }
        DiscreteProblem { grid: coarse.clone(), free, values, weight: self.weight, p: self.exp.p(), rhs: None }
    }
}

/// A solution on the grid of its problem.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub inside: Vec<bool>,
    pub energy: f64,
    /// Energy after each iteration of the finest level.
    pub history: Vec<f64>,
    pub iterations: usize,
}

impl GridFunction {
    /// Bilinear interpolation at `x`, or `None` outside the grid.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        let g = &self.grid;
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        for k in 0..2 {
            let t = (x[k] - g.lo[k]) / g.h;
            if !(t >= 0.0 && t <= (g.dims[k] - 1) as f64) {
                return None;
            }
            let i = (t.floor() as usize).min(g.dims[k] - 2);
            base[k] = i;
            frac[k] = t - i as f64;
        }
        let at = |a: usize, b: usize| self.u[g.index_of(&[base[0] + a, base[1] + b])];
        let (fx, fy) = (frac[0], frac[1]);
        Some(
            (1.0 - fx) * (1.0 - fy) * at(0, 0) + fx * (1.0 - fy) * at(1, 0) + (1.0 - fx) * fy * at(0, 1) + fx * fy * at(1, 1),
        )
    }

    /// Inside nodes with their coordinates and values.
    pub fn inside_nodes(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        (0..self.u.len()).filter(|&i| self.inside[i]).map(|i| {
            let mut x = [0.0; 2];
            self.grid.coords(i, &mut x);
            (x, self.u[i])
        })
    }
}

/// Discrete energy minimizer with the given boundary values. Unknowns start
/// from the mean boundary value on the coarsest level.
pub fn solve_dirichlet(prob: &DirichletProblem, tol: f64, max_iter: usize) -> Result<GridFunction> {
    prob.validate()?;
    let boundary: Vec<f64> = prob.boundary_values().collect();
    let mean = boundary.iter().sum::<f64>() / boundary.len().max(1) as f64;
    let build = |g: &Grid| {
        let mut d = prob.restrict(g);
        for (v, &f) in d.values.iter_mut().zip(&d.free) {
            if f {
                *v = mean;
            }
        }
        Ok(d)
    };
    let opts = SolveOptions { tol, max_iter, init: Init::Given };
    let (sol, _) = minimize_nested(&build, &prob.grid, &opts, COARSEST)?;
    Ok(GridFunction {
        grid: prob.grid.clone(),
        u: sol.u,
        inside: prob.inside.clone(),
        energy: sol.energy,
        history: sol.history,
        iterations: sol.iterations,
    })
}

/// Discrete energy of `u` under the problem's weight and exponent.
pub fn discrete_energy(prob: &DirichletProblem, u: &[f64]) -> Result<f64> {
    let d = DiscreteProblem {
        grid: prob.grid.clone(),
        free: prob.inside.clone(),
        values: u.to_vec(),
        weight: prob.weight,
        p: prob.exp.p(),
        rhs: None,
    };
    Ok(energy_of(&d, u))
}

/// Thresholds used to word a probe outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeThresholds {
    /// Deviation at the smallest radius, relative to the data range, below
    /// which the fine probe reads as regular.
    pub relative_deviation: f64,
    /// Spacing ratio between the two probed grids.
    pub refinement: f64,
}

impl Default for ProbeThresholds {
    fn default() -> Self {
        Self { relative_deviation: 0.02, refinement: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityProbe {
    pub point: Vec<f64>,
    /// Strictly decreasing.
    pub radii: Vec<f64>,
    /// `sup u - inf u` over inside nodes within each radius.
    pub oscillations: Vec<f64>,
    /// `sup |u - f(x0)|` over inside nodes within each radius.
    pub deviations: Vec<f64>,
    pub data_value: f64,
    pub data_range: f64,
    /// Spacing of the probed grid.
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeOutcome {
    ConsistentWithRegular,
    ConsistentWithIrregular,
}

impl ProbeOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            ProbeOutcome::ConsistentWithRegular => "consistent with regular",
            ProbeOutcome::ConsistentWithIrregular => "consistent with irregular",
        }
    }
}

/// Records how far `u` strays from the data value at the boundary node `x0`
/// on shrinking neighbourhoods.
pub fn probe_regularity(prob: &DirichletProblem, u: &GridFunction, x0: &[f64], radii: &[f64]) -> Result<RegularityProbe> {
    let g = &u.grid;
    let mut idx = 0;
    for k in (0..2).rev() {
        let t = (x0[k] - g.lo[k]) / g.h;
        let i = t.round();
        if (t - i).abs() > 1e-9 || i < 0.0 || i >= g.dims[k] as f64 {
            return Err(Error::Domain(format!("{x0:?} is not a grid node")));
        }
        idx = idx * g.dims[k] + i as usize;
    }
    if u.inside[idx] {
        return Err(Error::Domain(format!("{x0:?} is an unknown, not a boundary node")));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidParameter("radii must be positive and strictly decreasing".into()));
    }
    let data_value = u.u[idx];
    let (lo, hi) = prob.data_range();
    let mut oscillations = Vec::with_capacity(radii.len());
    let mut deviations = Vec::with_capacity(radii.len());
    for &r in radii {
        let (mut a, mut b, mut dev) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for (x, v) in u.inside_nodes() {
            if dist(&x, x0) <= r {
                a = a.min(v);
                b = b.max(v);
                dev = dev.max((v - data_value).abs());
            }
        }
        oscillations.push(if b >= a { b - a } else { 0.0 });
        deviations.push(dev);
    }
    Ok(RegularityProbe {
        point: x0.to_vec(),
        radii: radii.to_vec(),
        oscillations,
        deviations,
        data_value,
        data_range: (hi - lo).max(0.0),
        h: g.h,
    })
}

/// Words two probes of the same point on grids `h` and `h / refinement`:
/// deviations that shrink with the radius on the fine grid and sit below
/// the threshold at the smallest radius on both grids read as regular,
/// anything else as irregular.
pub fn assess_probes(coarse: &RegularityProbe, fine: &RegularityProbe, t: ProbeThresholds) -> ProbeOutcome {
    let small = |p: &RegularityProbe| *p.deviations.last().unwrap_or(&0.0) < t.relative_deviation * p.data_range.max(f64::MIN_POSITIVE);
    let shrinking = fine.deviations.windows(2).all(|w| w[1] <= w[0]);
    if shrinking && small(coarse) && small(fine) {
        ProbeOutcome::ConsistentWithRegular
    } else {
        ProbeOutcome::ConsistentWithIrregular
    }
}

/// Solution of the radial problem on `a < |x| < b` in `R^n` with values `ua`
/// at `|x| = a` and `ub` at `|x| = b`, evaluated at radius `r`: the
/// one-dimensional reduction `(t^{n-1} w(t) |u'|^{p-2} u')' = 0`.
pub fn radial_dirichlet(exp: Exponents, weight: Weight, a: f64, b: f64, ua: f64, ub: f64, r: f64) -> Result<f64> {
    if !(0.0 < a && a < b && a <= r && r <= b) {
        return Err(Error::Domain(format!("need 0 < a ≤ r ≤ b and a < b (got {a}, {r}, {b})")));
    }
    // u' ∝ (t^{n-1} w(t))^{-1/(p-1)}
    let m = (exp.n() as f64 - 1.0 + weight.delta()) / (exp.p() - 1.0);
    let prim = |t: f64| if (m - 1.0).abs() < 1e-12 { t.ln() } else { t.powf(1.0 - m) / (1.0 - m) };
    let frac = (prim(r) - prim(a)) / (prim(b) - prim(a));
    Ok(ua + (ub - ua) * frac)
}

/// `u ∘ T` sampled on the nodes of `target`: the pull-back of a solution
/// through the inversion. Nodes whose image leaves `u`'s grid get `None`.
pub fn pull_back(u: &GridFunction, target: &Grid) -> Vec<Option<f64>> {
    let mut x = [0.0; 2];
    (0..target.node_count())
        .map(|i| {
            target.coords(i, &mut x);
            invert(&x).ok().and_then(|y| u.interpolate(&y))
        })
        .collect()
}
