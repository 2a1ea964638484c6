use std::collections::HashMap;
use std::sync::Mutex;

use crate::capacity::{
    grid_capacity_auto, grid_capacity_truncated, radial_set_capacity, shell_capacity, CapacityEstimate, SolveOptions,
    GRID_TRUNCATION,
};
use crate::error::{Error, Result};
use crate::model::{norm, Condenser, Endpoint, Exponents, RadialSet, SetDescriptor, Weight};

/// Evaluates condenser capacities for the Wiener sampler, trying in turn:
/// exact radial formulas, a ball-cover upper bound, the grid solver, and the
/// radial hull of `K` as a last upper bound.
///
/// Grid values are cached per condenser shape after rescaling `K` to unit
/// size, so self-similar samples cost one solve.
#[derive(Debug)]
pub struct CapacityBackend {
    /// Grid spacings across the diameter of the rescaled `K`.
    pub cells: usize,
    pub opts: SolveOptions,
    /// Whether the grid solver may be used at all.
    pub allow_grid: bool,
    cache: Mutex<HashMap<String, f64>>,
}

impl Default for CapacityBackend {
    fn default() -> Self {
        Self::new(32, SolveOptions::default())
    }
}

impl Clone for CapacityBackend {
    fn clone(&self) -> Self {
        Self { cells: self.cells, opts: self.opts, allow_grid: self.allow_grid, cache: Mutex::new(HashMap::new()) }
    }
}

fn center_of(s: &SetDescriptor) -> Option<Vec<f64>> {
    match s {
        SetDescriptor::Ball(b) | SetDescriptor::ClosedBall(b) => Some(b.center.clone()),
        SetDescriptor::Annulus { center, .. } => Some(center.clone()),
        SetDescriptor::Complement(c) => center_of(c),
        _ => None,
    }
}

impl CapacityBackend {
    pub fn new(cells: usize, opts: SolveOptions) -> Self {
        Self { cells, opts, allow_grid: true, cache: Mutex::new(HashMap::new()) }
    }

    pub fn without_grid() -> Self {
        Self { allow_grid: false, ..Self::default() }
    }

    /// `cap_{p,w}(K, G)`, with the estimate kind recording how it was found.
    pub fn capacity(&self, k: &SetDescriptor, g: &SetDescriptor, exp: Exponents, w: Weight) -> Result<CapacityEstimate> {
        let mut k = normalize(k, false);
        let mut g = normalize(g, false);
        // constant weights are translation invariant: move a shared centre to the origin
        if w == Weight::Constant {
            if let (Some(a), Some(b)) = (center_of(&k), center_of(&g)) {
                if a == b && a.iter().any(|&c| c != 0.0) {
                    let back: Vec<f64> = a.iter().map(|c| -c).collect();
                    k = k.translated(&back);
                    g = g.translated(&back);
                }
            }
        }
        let g_radial = g.radial();
        if let (Some(kr), Some(gr)) = (k.radial(), &g_radial) {
            return Ok(CapacityEstimate::exact(radial_set_capacity(&kr, gr, exp, w)?));
        }
        let split = split_region(&k);
        if let (Some((region, Some(pieces))), Some(gr)) = (&split, &g_radial) {
            if let Some(est) = ball_cover(region, pieces, gr, exp, w)? {
                return Ok(est);
            }
        }
        let mut grid_err = None;
        // sequence balls shrink below any grid resolution
        if self.allow_grid && !has_sequence(&k) && !has_sequence(&g) {
            match self.grid(&k, &g, exp, w) {
                Ok(est) => return Ok(est),
                Err(e @ (Error::Unsupported(_) | Error::Geometry(_))) => grid_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        if let (Some(kr), Some(inner)) = (k.radial(), inner_radial(&g)?) {
            if let Ok(v) = radial_set_capacity(&kr, &inner, exp, w) {
                return Ok(CapacityEstimate::upper_bound(v));
            }
        }
        if let (Some((region, _)), Some(gr)) = (&split, &g_radial) {
            if !region.is_empty() {
                if let Some((_, hi)) = region.hull() {
                    if hi.at.is_finite() {
                        let closed = closure(region);
                        if let Ok(v) = radial_set_capacity(&closed, gr, exp, w) {
                            return Ok(CapacityEstimate::upper_bound(v));
                        }
                    }
                }
            }
        }
        Err(grid_err.unwrap_or_else(|| Error::Unsupported("no capacity backend applies to this condenser".into())))
    }

    fn grid(&self, k: &SetDescriptor, g: &SetDescriptor, exp: Exponents, w: Weight) -> Result<CapacityEstimate> {
        let s = k
            .bounding_radius()
            .filter(|r| *r > 0.0 && r.is_finite())
            .ok_or_else(|| Error::Unsupported("K has no finite positive bounding radius".into()))?;
        let (k1, g1) = (k.scaled(1.0 / s), g.scaled(1.0 / s));
        let scale = s.powf(exp.n() as f64 + w.delta() - exp.p());
        let key = format!("{k1:?}|{g1:?}|{}|{}|{w:?}|{}", exp.n(), exp.p(), self.cells);
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            let mut est = CapacityEstimate::exact(v * scale);
            est.kind = crate::capacity::EstimateKind::Grid;
            est.analytic_bounds = None;
            return Ok(est);
        }
        let h = 2.0 / self.cells as f64;
        let c = Condenser::new(k1, g1.clone(), w);
        // a far outer boundary is left to the box-doubling truncation
        let est = match g1.bounding_radius() {
            Some(r) if r <= 8.0 => grid_capacity_auto(&c, exp, h, &self.opts)?,
            _ => grid_capacity_truncated(&c, exp, h, &self.opts)?,
        };
        self.cache.lock().expect("cache lock").insert(key, est.value);
        Ok(CapacityEstimate { value: est.value * scale, ..est })
    }
}

/// Pushes complements down to the leaves and flattens nested unions and
/// intersections.
pub(crate) fn normalize(s: &SetDescriptor, negate: bool) -> SetDescriptor {
    use SetDescriptor as S;
    match s {
        S::Complement(inner) => normalize(inner, !negate),
        S::Union(cs) | S::Intersection(cs) => {
            let is_union = matches!(s, S::Union(_)) != negate;
            let mut out = Vec::new();
            for c in cs {
                match normalize(c, negate) {
                    S::Union(sub) if is_union => out.extend(sub),
                    S::Intersection(sub) if !is_union => out.extend(sub),
                    other => out.push(other),
                }
            }
            if out.len() == 1 {
                out.pop().expect("one element")
            } else if is_union {
                S::Union(out)
            } else {
                S::Intersection(out)
            }
        }
        other if negate => other.clone().complement(),
        other => other.clone(),
    }
}

fn has_sequence(s: &SetDescriptor) -> bool {
    use SetDescriptor as S;
    match s {
        S::SequenceUnion { .. } => true,
        S::Complement(c) => has_sequence(c),
        S::Union(cs) | S::Intersection(cs) => cs.iter().any(has_sequence),
        _ => false,
    }
}

/// Radii `[t - ρ, t + ρ]` met by the balls of a cover. Sequence terms past
/// the last realized one are assumed to fill every radius beyond it (or, for
/// centers moving inwards, below it).
fn shadow(pieces: &[Piece]) -> Result<RadialSet> {
    let mut out = RadialSet::default();
    let band = |t: f64, r: f64| RadialSet::interval((t - r).max(0.0), true, t + r, true);
    for p in pieces {
        match p {
            Piece::Origin => out = out.union(&RadialSet::interval(0.0, true, 0.0, true)),
            Piece::Ball(c, r) => out = out.union(&band(norm(c), *r)),
            Piece::Sequence(seq) => {
                let terms: Vec<(f64, f64)> = seq.realize(GRID_TRUNCATION)?.iter().map(|(c, r)| (norm(c), *r)).collect();
                for &(t, r) in &terms {
                    out = out.union(&band(t, r));
                }
                let decreasing = terms.len() > 1 && terms.windows(2).all(|w| w[1].0 <= w[0].0);
                out = out.union(&if decreasing {
                    let near = terms.iter().map(|(t, r)| t - r).fold(f64::INFINITY, f64::min).max(0.0);
                    RadialSet::interval(0.0, true, near, true)
                } else {
                    let far = terms.iter().map(|(t, r)| t + r).fold(0.0, f64::max);
                    RadialSet::interval(far, true, f64::INFINITY, false)
                });
            }
        }
    }
    Ok(out)
}

/// A radial set contained in the normalized set `s`, when one can be found.
fn inner_radial(s: &SetDescriptor) -> Result<Option<RadialSet>> {
    use SetDescriptor as S;
    if let Some(r) = s.radial() {
        return Ok(Some(r));
    }
    Ok(match s {
        S::Union(cs) => {
            let mut acc: Option<RadialSet> = None;
            for c in cs {
                if let Some(r) = inner_radial(c)? {
                    acc = Some(acc.map_or(r.clone(), |a| a.union(&r)));
                }
            }
            acc
        }
        S::Intersection(cs) => {
            let mut acc = RadialSet::interval(0.0, true, f64::INFINITY, false);
            for c in cs {
                match inner_radial(c)? {
                    Some(r) => acc = acc.intersect(&r),
                    None => return Ok(None),
                }
            }
            Some(acc)
        }
        S::Complement(c) => {
            let mut pieces = Vec::new();
            if cover_pieces(c, &mut pieces) {
                Some(shadow(&pieces)?.complement())
            } else {
                None
            }
        }
        _ => None,
    })
}

/// A closed piece of a ball cover.
#[derive(Debug, Clone, PartialEq)]
enum Piece {
    Ball(Vec<f64>, f64),
    Sequence(crate::model::BallSequence),
    Origin,
}

fn cover_pieces(s: &SetDescriptor, out: &mut Vec<Piece>) -> bool {
    use SetDescriptor as S;
    match s {
        S::Ball(b) | S::ClosedBall(b) => out.push(Piece::Ball(b.center.clone(), b.radius)),
        S::SequenceUnion { seq, .. } => out.push(Piece::Sequence(seq.clone())),
        S::Origin => out.push(Piece::Origin),
        S::Union(cs) => return cs.iter().all(|c| cover_pieces(c, out)),
        _ => return false,
    }
    true
}

/// Splits a normalized `K` into its radial factors and, when the remaining
/// factors form one union of balls, that cover.
fn split_region(k: &SetDescriptor) -> Option<(RadialSet, Option<Vec<Piece>>)> {
    let factors: Vec<&SetDescriptor> = match k {
        SetDescriptor::Intersection(cs) => cs.iter().collect(),
        other => vec![other],
    };
    let mut region = RadialSet::interval(0.0, true, f64::INFINITY, false);
    let mut others = Vec::new();
    for f in factors {
        match f.radial() {
            Some(r) => region = region.intersect(&r),
            None => others.push(f),
        }
    }
    let pieces = match others.as_slice() {
        [] => None,
        [one] => {
            let mut v = Vec::new();
            cover_pieces(one, &mut v).then_some(v)
        }
        _ => None,
    };
    if others.is_empty() || pieces.is_some() || !region.is_empty() {
        Some((region, pieces))
    } else {
        None
    }
}

fn closure(r: &RadialSet) -> RadialSet {
    RadialSet {
        intervals: r
            .intervals
            .iter()
            .map(|(a, b)| (Endpoint { at: a.at, closed: true }, Endpoint { at: b.at, closed: b.at.is_finite() }))
            .collect(),
    }
}

fn meets(region: &RadialSet, t: f64, rho: f64) -> bool {
    // the ball B̄(c, ρ) with |c| = t covers the radii [t - ρ, t + ρ]
    let lo = (t - rho).max(0.0);
    let hi = t + rho;
    !region.intersect(&RadialSet::interval(lo, true, hi, true)).is_empty()
}

/// Balls of the cover that meet the region, or `None` when the cover cannot
/// be shown complete with the realized terms.
fn relevant_balls(region: &RadialSet, pieces: &[Piece]) -> Result<Option<(Vec<(f64, f64)>, bool)>> {
    let (lo, hi) = match region.hull() {
        Some((a, b)) => (a.at, b.at),
        None => return Ok(Some((Vec::new(), false))),
    };
    let mut balls = Vec::new();
    let mut origin = false;
    for p in pieces {
        match p {
            Piece::Origin => origin |= region.contains(0.0),
            Piece::Ball(c, r) => {
                if meets(region, norm(c), *r) {
                    balls.push((norm(c), *r));
                }
            }
            Piece::Sequence(seq) => {
                let terms = seq.realize(GRID_TRUNCATION)?;
                if terms.is_empty() {
                    return Ok(None);
                }
                let t: Vec<(f64, f64)> = terms.iter().map(|(c, r)| (norm(c), *r)).collect();
                let increasing = t.windows(2).all(|w| w[1].0 >= w[0].0);
                let decreasing = t.windows(2).all(|w| w[1].0 <= w[0].0);
                let (tl, rl) = *t.last().expect("nonempty");
                // later terms move further out (or in), past the region
                let complete = (increasing && tl - rl > hi) || (decreasing && tl + rl < lo);
                if !complete {
                    return Ok(None);
                }
                balls.extend(t.into_iter().filter(|(c, r)| meets(region, *c, *r)));
            }
        }
    }
    Ok(Some((balls, origin)))
}

/// Subadditive upper bound `Σ cap(B̄(c_j, ρ_j), B(c_j, d_j))` over the cover
/// balls meeting the region, with `B(c_j, d_j)` the largest ball about `c_j`
/// inside its radial component of `G`. A power weight is bounded by its
/// maximum on that ball.
fn ball_cover(region: &RadialSet, pieces: &[Piece], g: &RadialSet, exp: Exponents, w: Weight) -> Result<Option<CapacityEstimate>> {
    let Some((balls, origin)) = relevant_balls(region, pieces)? else {
        return Ok(None);
    };
    if balls.is_empty() && !origin {
        return Ok(Some(CapacityEstimate::exact(0.0)));
    }
    let component = |t: f64| g.intervals.iter().find(|(a, b)| (a.at < t || (a.closed && a.at == t)) && t < b.at).copied();
    let mut total = 0.0;
    if origin {
        let Some((a, b)) = component(0.0) else { return Ok(None) };
        if a.at != 0.0 {
            return Ok(None);
        }
        total += shell_capacity(0.0, b.at, exp, w);
    }
    for (t, rho) in balls {
        let Some((a, b)) = component(t) else { return Ok(None) };
        let d = if a.at == 0.0 && a.closed { b.at - t } else { (t - a.at).min(b.at - t) };
        if !(rho < d) {
            return Ok(None);
        }
        let sup_w = if w.delta() > 0.0 { (t + d).powf(w.delta()) } else { 1.0 };
        total += sup_w * shell_capacity(rho, d, exp, Weight::Constant);
    }
    Ok(Some(CapacityEstimate::upper_bound(total)))
}
