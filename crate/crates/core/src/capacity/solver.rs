//! Minimizer of the discrete weighted p-energy on a uniform grid.
//!
//! Each cell contributes `(h^n/2) w(center) (|g_lo|^p + |g_hi|^p)`, where
//! `g_lo` is the forward-difference gradient taken at the cell's lowest
//! corner and `g_hi` the backward-difference gradient at its highest corner.
//! In two dimensions this is exactly the energy of the piecewise-linear
//! interpolant on the two triangles of the cell. An optional linear term
//! `-Σ f_i u_i` is subtracted.
//!
//! The energy is convex and, for `p ≥ 2`, continuously differentiable. It is
//! minimized by Jacobi-preconditioned nonlinear conjugate gradients
//! (Polak–Ribière+) with a safeguarded Newton line search, which keeps the
//! objective non-increasing from one iteration to the next.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::capacity::grid::Grid;
use crate::error::{Error, Result};
use crate::model::Weight;

/// A discrete Dirichlet-type problem: nodes flagged `free` are unknowns,
/// the others keep their entry of `values`.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub grid: Grid,
    pub free: Vec<bool>,
    pub values: Vec<f64>,
    pub weight: Weight,
    pub p: f64,
    pub rhs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Start from `values` as given.
    Given,
    /// Uniform random values in `[0, 1]` at free nodes.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub init: Init,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50_000, init: Init::Given }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Vec<f64>,
    /// The p-energy part of the objective at `u`.
    pub energy: f64,
    /// Objective values after each iteration, starting with the initial one.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub last_decrease: f64,
}

impl Solution {
    pub fn objective(&self) -> f64 {
        *self.history.last().expect("history starts with the initial value")
    }
}

/// Window of the stopping test: relative decrease over this many iterations.
const WINDOW: usize = 10;

struct Cells {
    n: usize,
    inv_h: f64,
    p: f64,
    strides: [usize; 3],
    diag_offset: usize,
    corner: Vec<u32>,
    coef: Vec<f64>,
}

#[inline]
fn powp(sq: f64, p: f64) -> f64 {
    if p == 2.0 {
        sq
    } else {
        sq.powf(0.5 * p)
    }
}

#[inline]
fn powpm2(sq: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if sq == 0.0 {
        0.0
    } else {
        sq.powf(0.5 * (p - 2.0))
    }
}

impl Cells {
    fn new(prob: &DiscreteProblem) -> Self {
        let g = &prob.grid;
        let n = g.n();
        let s = g.strides();
        let mut strides = [0; 3];
        strides[..n].copy_from_slice(&s);
        let diag_offset: usize = s.iter().sum();
        let cell_volume = g.h.powi(n as i32);
        let mut corner = Vec::new();
        let mut coef = Vec::new();
        let mut mi = vec![0; n];
        let mut x = vec![0.0; n];
        for idx in 0..g.node_count() {
            g.multi_index(idx, &mut mi);
            if mi.iter().zip(&g.dims).any(|(i, d)| i + 1 >= *d) {
                continue;
            }
            let any_free = (0..1usize << n).any(|c| {
                let off: usize = (0..n).filter(|k| c >> k & 1 == 1).map(|k| s[k]).sum();
                prob.free[idx + off]
            });
            if !any_free {
                continue;
            }
            for k in 0..n {
                x[k] = g.lo[k] + (mi[k] as f64 + 0.5) * g.h;
            }
            let w = prob.weight.value(&x);
            corner.push(idx as u32);
            coef.push(0.5 * cell_volume * w);
        }
        Self { n, inv_h: 1.0 / g.h, p: prob.p, strides, diag_offset, corner, coef }
    }

    #[inline]
    fn grads(&self, u: &[f64], c: usize, lo: &mut [f64; 3], hi: &mut [f64; 3]) {
        let m = c + self.diag_offset;
        let (u0, um) = (u[c], u[m]);
        for k in 0..self.n {
            lo[k] = (u[c + self.strides[k]] - u0) * self.inv_h;
            hi[k] = (um - u[m - self.strides[k]]) * self.inv_h;
        }
    }

    /// Energy, and its gradient accumulated into `grad` when given.
    fn energy(&self, u: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let n = self.n;
        let p = self.p;
        let mut e = 0.0;
        let (mut lo, mut hi) = ([0.0; 3], [0.0; 3]);
        for (&c, &cw) in self.corner.iter().zip(&self.coef) {
            let c = c as usize;
            self.grads(u, c, &mut lo, &mut hi);
            let sl: f64 = lo[..n].iter().map(|g| g * g).sum();
            let sh: f64 = hi[..n].iter().map(|g| g * g).sum();
            e += cw * (powp(sl, p) + powp(sh, p));
            if let Some(gr) = grad.as_deref_mut() {
                let a = cw * p * powpm2(sl, p) * self.inv_h;
                let b = cw * p * powpm2(sh, p) * self.inv_h;
                let m = c + self.diag_offset;
                for k in 0..n {
                    gr[c] -= a * lo[k];
                    gr[c + self.strides[k]] += a * lo[k];
                    gr[m] += b * hi[k];
                    gr[m - self.strides[k]] -= b * hi[k];
                }
            }
        }
        e
    }

    /// `φ(t)`, `φ'(t)`, `φ''(t)` of the energy along `u + t d`.
    fn along(&self, u: &[f64], d: &[f64], t: f64) -> (f64, f64, f64) {
        let n = self.n;
        let p = self.p;
        let (mut f0, mut f1, mut f2) = (0.0, 0.0, 0.0);
        let (mut lo, mut hi, mut dlo, mut dhi) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 3]);
        for (&c, &cw) in self.corner.iter().zip(&self.coef) {
            let c = c as usize;
            self.grads(u, c, &mut lo, &mut hi);
            self.grads(d, c, &mut dlo, &mut dhi);
            for (g, dg) in [(&lo, &dlo), (&hi, &dhi)] {
                let (mut sq, mut gd, mut dd) = (0.0, 0.0, 0.0);
                for k in 0..n {
                    let gt = g[k] + t * dg[k];
                    sq += gt * gt;
                    gd += gt * dg[k];
                    dd += dg[k] * dg[k];
                }
                let q = powpm2(sq, p);
                f0 += cw * powp(sq, p);
                f1 += cw * p * q * gd;
                f2 += if p == 2.0 {
                    cw * 2.0 * dd
                } else if sq > 0.0 {
                    cw * p * q * (dd + (p - 2.0) * gd * gd / sq)
                } else {
                    0.0
                };
            }
        }
        (f0, f1, f2)
    }

    /// Diagonal of the energy Hessian at `u`, with the gradient magnitude
    /// floored so the preconditioner stays positive where `∇u = 0`.
    fn diagonal(&self, u: &[f64], free: &[bool], out: &mut [f64]) {
        let n = self.n;
        let p = self.p;
        out.iter_mut().for_each(|v| *v = 0.0);
        let (mut lo, mut hi) = ([0.0; 3], [0.0; 3]);
        let mut mean = 0.0;
        if p != 2.0 {
            for &c in &self.corner {
                self.grads(u, c as usize, &mut lo, &mut hi);
                mean += lo[..n].iter().map(|g| g * g).sum::<f64>().sqrt();
            }
            mean /= self.corner.len().max(1) as f64;
        }
        let floor = (1e-3 * mean).max(1e-12);
        let h2 = self.inv_h * self.inv_h;
        for (&c, &cw) in self.corner.iter().zip(&self.coef) {
            let c = c as usize;
            let (a, b) = if p == 2.0 {
                (2.0 * cw * h2, 2.0 * cw * h2)
            } else {
                self.grads(u, c, &mut lo, &mut hi);
                let nl = lo[..n].iter().map(|g| g * g).sum::<f64>().sqrt().max(floor);
                let nh = hi[..n].iter().map(|g| g * g).sum::<f64>().sqrt().max(floor);
                (cw * p * (p - 1.0) * nl.powf(p - 2.0) * h2, cw * p * (p - 1.0) * nh.powf(p - 2.0) * h2)
            };
            let m = c + self.diag_offset;
            out[c] += a * n as f64;
            out[m] += b * n as f64;
            for k in 0..n {
                out[c + self.strides[k]] += a;
                out[m - self.strides[k]] += b;
            }
        }
        for (v, &f) in out.iter_mut().zip(free) {
            *v = if f && *v > 0.0 { 1.0 / *v } else { 0.0 };
        }
    }
}

fn linear(rhs: Option<&Vec<f64>>, u: &[f64]) -> f64 {
    rhs.map_or(0.0, |f| f.iter().zip(u).map(|(a, b)| a * b).sum())
}

/// Minimizes the objective of `prob`. Fails with `NotConverged` when
/// `max_iter` iterations do not meet the stopping rule.
pub fn minimize(prob: &DiscreteProblem, opts: &SolveOptions) -> Result<Solution> {
    if prob.p < 2.0 {
        return Err(Error::Unsupported(format!("energy minimization needs p ≥ 2 (got {})", prob.p)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let nn = prob.grid.node_count();
    if prob.free.len() != nn || prob.values.len() != nn {
        return Err(Error::DimensionMismatch { expected: nn, got: prob.free.len().min(prob.values.len()) });
    }
    let cells = Cells::new(prob);
    let rhs = prob.rhs.as_ref();
    let mut u = prob.values.clone();
    if let Init::Random(seed) = opts.init {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (v, &f) in u.iter_mut().zip(&prob.free) {
            if f {
                *v = rng.gen_range(0.0..=1.0);
            }
        }
    }
    let free = &prob.free;
    let mut grad = vec![0.0; nn];
    let mut energy = cells.energy(&u, Some(&mut grad));
    let project = |g: &mut [f64]| {
        for (v, &f) in g.iter_mut().zip(free) {
            if !f {
                *v = 0.0;
            }
        }
    };
    if let Some(f) = rhs {
        grad.iter_mut().zip(f).for_each(|(g, fi)| *g -= fi);
    }
    project(&mut grad);
    let mut obj = energy - linear(rhs, &u);
    let mut history = vec![obj];

    let mut pinv = vec![0.0; nn];
    cells.diagonal(&u, free, &mut pinv);
    let mut z: Vec<f64> = grad.iter().zip(&pinv).map(|(g, m)| -g * m).collect();
    let mut rz: f64 = -grad.iter().zip(&z).map(|(g, zi)| g * zi).sum::<f64>();
    let mut d = z.clone();
    let mut trial = vec![0.0; nn];
    let mut last_decrease = f64::INFINITY;

    for it in 1..=opts.max_iter {
        if energy == 0.0 && rhs.is_none() || rz <= 0.0 {
            return Ok(Solution { u, energy, history, iterations: it - 1, last_decrease: 0.0 });
        }
        let slope: f64 = grad.iter().zip(&d).map(|(g, di)| g * di).sum();
        if slope >= 0.0 {
            d.copy_from_slice(&z);
            continue;
        }
        // safeguarded Newton iteration on φ(t) = objective(u + t d)
        let lin_d = linear(rhs, &d);
        let (_, _, c0) = cells.along(&u, &d, 0.0);
        let mut t = if c0 > 0.0 { -slope / c0 } else { 1.0 };
        let mut best: Option<(f64, f64)> = None;
        for _ in 0..30 {
            let (e, e1, e2) = cells.along(&u, &d, t);
            let phi = e - linear(rhs, &u) - t * lin_d;
            if phi <= obj {
                if best.map_or(true, |(_, b)| phi <= b) {
                    best = Some((t, phi));
                }
                let d1 = e1 - lin_d;
                if prob.p == 2.0 || d1.abs() <= 1e-3 * slope.abs() || e2 <= 0.0 {
                    break;
                }
                let next = t - d1 / e2;
                if !(next > 0.0) || (next - t).abs() <= 1e-12 * t {
                    break;
                }
                t = next;
            } else if best.is_some() {
                break;
            } else {
                t *= 0.5;
                if t < 1e-300 {
                    break;
                }
            }
        }
        let Some((t, _)) = best else {
            // no decrease even for tiny steps: at the floating point floor
            return Ok(Solution { u, energy, history, iterations: it - 1, last_decrease: 0.0 });
        };
        trial.iter_mut().zip(u.iter().zip(&d)).for_each(|(x, (a, b))| *x = a + t * b);
        std::mem::swap(&mut u, &mut trial);
        grad.iter_mut().for_each(|g| *g = 0.0);
        energy = cells.energy(&u, Some(&mut grad));
        if let Some(f) = rhs {
            grad.iter_mut().zip(f).for_each(|(g, fi)| *g -= fi);
        }
        project(&mut grad);
        let new_obj = energy - linear(rhs, &u);
        // rounding can leave the recomputed value a hair above the old one
        obj = new_obj.min(obj);
        history.push(obj);

        if it >= WINDOW {
            let old = history[it - WINDOW];
            last_decrease = (old - obj) / obj.abs().max(f64::MIN_POSITIVE);
            if last_decrease < opts.tol {
                return Ok(Solution { u, energy, history, iterations: it, last_decrease });
            }
        }

        if it % 50 == 0 && prob.p != 2.0 {
            cells.diagonal(&u, free, &mut pinv);
        }
        let z_new: Vec<f64> = grad.iter().zip(&pinv).map(|(g, m)| -g * m).collect();
        let rz_new: f64 = -grad.iter().zip(&z_new).map(|(g, zi)| g * zi).sum::<f64>();
        let cross: f64 = -grad.iter().zip(&z).map(|(g, zi)| g * zi).sum::<f64>();
        let beta = ((rz_new - cross) / rz).max(0.0);
        for (di, zi) in d.iter_mut().zip(&z_new) {
            *di = zi + beta * *di;
        }
        z = z_new;
        rz = rz_new;
    }
    Err(Error::NotConverged { iterations: opts.max_iter, last_decrease })
}

/// The p-energy of `u` for the cells of `prob` that touch a free node.
pub fn energy_of(prob: &DiscreteProblem, u: &[f64]) -> f64 {
    Cells::new(prob).energy(u, None)
}

/// Solves on a hierarchy of grids, each level starting from the prolonged
/// solution of the next coarser one. `build` discretizes the problem on a
/// given grid. Returns the finest solution and, when a coarser level was
/// solved, its objective.
pub fn minimize_nested<F>(build: &F, grid: &Grid, opts: &SolveOptions, min_nodes: usize) -> Result<(Solution, Option<f64>)>
where
    F: Fn(&Grid) -> Result<DiscreteProblem>,
{
    let mut prob = build(grid)?;
    if matches!(opts.init, Init::Random(_)) {
        return Ok((minimize(&prob, opts)?, None));
    }
    let Some(coarse) = grid.coarsen(min_nodes) else {
        return Ok((minimize(&prob, opts)?, None));
    };
    // a level too coarse to separate the fixed sets ends the hierarchy
    let (cs, _) = match minimize_nested(build, &coarse, opts, min_nodes) {
        Ok(r) => r,
        Err(Error::Geometry(_)) => return Ok((minimize(&prob, opts)?, None)),
        Err(e) => return Err(e),
    };
    let start = grid.prolong(&coarse, &cs.u);
    for ((v, &f), s) in prob.values.iter_mut().zip(&prob.free).zip(start) {
        if f {
            *v = s;
        }
    }
    let fine = minimize(&prob, opts)?;
    let coarse_obj = cs.objective();
    Ok((fine, Some(coarse_obj)))
}
