use crate::error::{Error, Result};

/// Upper limit on the number of grid nodes of a single solve.
pub const NODE_BUDGET: usize = 1 << 23;

/// Uniform Cartesian grid: node `i` sits at `lo + i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub h: f64,
    pub dims: Vec<usize>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, h: f64, dims: Vec<usize>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacing {h} must be positive")));
        }
        if lo.len() != dims.len() || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidParameter("grid needs at least two nodes per axis".into()));
        }
        let g = Self { lo, h, dims };
        if g.node_count() > NODE_BUDGET {
            return Err(Error::Unsupported(format!(
                "grid with {} nodes exceeds the budget of {NODE_BUDGET}",
                g.node_count()
            )));
        }
        Ok(g)
    }

    /// Smallest grid of spacing `h` covering `[lo, hi]` with one spare node on
    /// every side.
    pub fn covering(lo: &[f64], hi: &[f64], h: f64) -> Result<Self> {
        let dims = lo.iter().zip(hi).map(|(a, b)| ((b - a) / h).ceil() as usize + 3).collect();
        Self::new(lo.iter().map(|a| a - h).collect(), h, dims)
    }

    /// The box `[-half, half]^n` with `m` cells per axis.
    pub fn centered(n: usize, half: f64, m: usize) -> Result<Self> {
        Self::new(vec![-half; n], 2.0 * half / m as f64, vec![m + 1; n])
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.n()];
        for k in 1..self.n() {
            s[k] = s[k - 1] * self.dims[k - 1];
        }
        s
    }

    pub fn index_of(&self, multi: &[usize]) -> usize {
        self.strides().iter().zip(multi).map(|(s, i)| s * i).sum()
    }

    pub fn multi_index(&self, mut idx: usize, out: &mut [usize]) {
        for (k, d) in self.dims.iter().enumerate() {
            out[k] = idx % d;
            idx /= d;
        }
    }

    pub fn coords(&self, idx: usize, out: &mut [f64]) {
        let mut rest = idx;
        for (k, d) in self.dims.iter().enumerate() {
            out[k] = self.lo[k] + (rest % d) as f64 * self.h;
            rest /= d;
        }
    }

    /// Every other node of this grid, or `None` when too coarse to halve.
    pub fn coarsen(&self, min_nodes: usize) -> Option<Grid> {
        let dims: Vec<usize> = self.dims.iter().map(|d| (d - 1) / 2 + 1).collect();
        if dims.iter().any(|&d| d < min_nodes) {
            return None;
        }
        Some(Grid { lo: self.lo.clone(), h: 2.0 * self.h, dims })
    }

    /// Multilinear interpolation of a function on `coarse` (from
    /// [`Grid::coarsen`]) onto this grid.
    pub fn prolong(&self, coarse: &Grid, uc: &[f64]) -> Vec<f64> {
        let n = self.n();
        let cs = coarse.strides();
        let mut out = vec![0.0; self.node_count()];
        let mut mi = vec![0; n];
        for (idx, o) in out.iter_mut().enumerate() {
            self.multi_index(idx, &mut mi);
            let mut acc = 0.0;
            for corner in 0..(1usize << n) {
                let mut weight = 1.0;
                let mut cidx = 0;
                for k in 0..n {
                    let lo = (mi[k] / 2).min(coarse.dims[k] - 1);
                    let odd = mi[k] % 2 == 1 && lo + 1 < coarse.dims[k];
                    let upper = corner >> k & 1 == 1;
                    if upper && !odd {
                        weight = 0.0;
                        break;
                    }
                    if odd {
                        weight *= 0.5;
                    }
                    cidx += cs[k] * if upper { lo + 1 } else { lo };
                }
                if weight > 0.0 {
                    acc += weight * uc[cidx];
                }
            }
            *o = acc;
        }
        out
    }
}
