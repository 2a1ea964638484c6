use crate::error::{Error, Result};
use crate::model::expr::{BinOp, Expr, ExprError, Func, Limit};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Geometry(format!("ball radius {radius} must be positive and finite")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Geometry("ball center must be finite".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// `j ↦ B(center(j), radius(j))` for `j = start, start+1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSequence {
    pub center: Vec<Expr>,
    pub radius: Expr,
    pub start: i64,
}

impl BallSequence {
    pub fn center_at(&self, j: i64) -> Result<Vec<f64>, ExprError> {
        self.center.iter().map(|e| e.eval(j as f64)).collect()
    }

    pub fn radius_at(&self, j: i64) -> Result<f64, ExprError> {
        self.radius.eval(j as f64)
    }

    /// Balls for `j` in `start..start + trunc`. Terms whose center overflows
    /// lie beyond every representable point and are skipped; a radius that
    /// underflows to zero is kept (a point for closed sequences).
    pub fn realize(&self, trunc: usize) -> Result<Vec<(Vec<f64>, f64)>> {
        let mut out = Vec::with_capacity(trunc);
        for j in self.start..self.start + trunc as i64 {
            let c = match self.center_at(j) {
                Ok(c) => c,
                Err(ExprError::Overflow { .. }) => continue,
                Err(e) => return Err(e.into()),
            };
            let r = self.radius_at(j)?;
            if r < 0.0 {
                return Err(Error::Geometry(format!("negative radius {r} at j = {j}")));
            }
            out.push((c, r));
        }
        Ok(out)
    }

    /// Smallest `J` such that every term with index `≥ J` among the first
    /// `trunc` has `|center| - radius > reach`, assuming increasing centers.
    /// Returns the number of terms that may meet `B(0, reach)`. Errors if the
    /// evaluated centers are not monotone.
    pub fn terms_within(&self, reach: f64, trunc: usize) -> Result<usize> {
        let mut last = f64::NEG_INFINITY;
        for (k, j) in (self.start..self.start + trunc as i64).enumerate() {
            let c = match self.center_at(j) {
                Ok(c) => norm(&c),
                Err(ExprError::Overflow { .. }) => return Ok(k),
                Err(e) => return Err(e.into()),
            };
            if c < last {
                return Err(Error::Geometry(format!("ball sequence centers are not increasing at j = {j}")));
            }
            last = c;
            if c - self.radius_at(j)? > reach {
                return Ok(k);
            }
        }
        Ok(trunc)
    }
}

/// Symbolic description of a subset of `R^n`.
///
/// `HalfSpace` is the open set `{x : normal·x > offset}`. An `Annulus` is
/// `{inner < |x - center| < outer}` when open and `{inner ≤ |x - center| ≤ outer}`
/// when closed; `outer` may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub enum SetDescriptor {
    Ball(Ball),
    ClosedBall(Ball),
    Annulus { center: Vec<f64>, inner: f64, outer: f64, closed: bool },
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Complement(Box<SetDescriptor>),
    Union(Vec<SetDescriptor>),
    Intersection(Vec<SetDescriptor>),
    SequenceUnion { seq: BallSequence, closed: bool },
    WholeSpace,
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryExtent {
    Unbounded,
    Bounded,
    Unknown,
}

impl SetDescriptor {
    pub fn empty() -> Self {
        SetDescriptor::Union(Vec::new())
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ok(SetDescriptor::Ball(Ball::new(center, radius)?))
    }

    pub fn closed_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ok(SetDescriptor::ClosedBall(Ball::new(center, radius)?))
    }

    /// Origin-centred annulus.
    pub fn annulus(n: usize, inner: f64, outer: f64, closed: bool) -> Self {
        SetDescriptor::Annulus { center: vec![0.0; n], inner, outer, closed }
    }

    /// The complement, collapsing a double complement.
    pub fn complement(self) -> Self {
        match self {
            SetDescriptor::Complement(s) => *s,
            s => SetDescriptor::Complement(Box::new(s)),
        }
    }

    pub fn is_empty_union(&self) -> bool {
        matches!(self, SetDescriptor::Union(c) if c.is_empty())
    }

    /// Membership in the realization truncated to `trunc` sequence terms.
    pub fn contains(&self, x: &[f64], trunc: usize) -> Result<bool> {
        use SetDescriptor::*;
        Ok(match self {
            Ball(b) => dist(x, &b.center) < b.radius,
            ClosedBall(b) => dist(x, &b.center) <= b.radius,
            Annulus { center, inner, outer, closed } => {
                let d = dist(x, center);
                if *closed {
                    *inner <= d && d <= *outer
                } else {
                    *inner < d && d < *outer
                }
            }
            HalfSpace { normal, offset } => dot(normal, x) > *offset,
            Complement(s) => !s.contains(x, trunc)?,
            Union(cs) => {
                for c in cs {
                    if c.contains(x, trunc)? {
                        return Ok(true);
                    }
                }
                false
            }
            Intersection(cs) => {
                for c in cs {
                    if !c.contains(x, trunc)? {
                        return Ok(false);
                    }
                }
                true
            }
            SequenceUnion { seq, closed } => {
                for j in seq.start..seq.start + trunc as i64 {
                    let c = match seq.center_at(j) {
                        Ok(c) => c,
                        Err(ExprError::Overflow { .. }) => continue,
                        Err(e) => return Err(e.into()),
                    };
                    let r = seq.radius_at(j)?;
                    let d = dist(x, &c);
                    if d < r || (*closed && d <= r) {
                        return Ok(true);
                    }
                }
                false
            }
            WholeSpace => true,
            Origin => x.iter().all(|&c| c == 0.0),
        })
    }

    /// Replaces every sequence by the union of its first `trunc` balls.
    pub fn realize(&self, trunc: usize) -> Result<SetDescriptor> {
        use SetDescriptor::*;
        Ok(match self {
            SequenceUnion { seq, closed } => {
                let mut parts = Vec::new();
                for (c, r) in seq.realize(trunc)? {
                    let b = crate::model::geometry::Ball { center: c.clone(), radius: r };
                    if *closed {
                        parts.push(ClosedBall(b));
                    } else if r > 0.0 {
                        parts.push(Ball(b));
                    }
                }
                Union(parts)
            }
            Complement(s) => Complement(Box::new(s.realize(trunc)?)),
            Union(cs) => Union(cs.iter().map(|c| c.realize(trunc)).collect::<Result<_>>()?),
            Intersection(cs) => Intersection(cs.iter().map(|c| c.realize(trunc)).collect::<Result<_>>()?),
            other => other.clone(),
        })
    }

    /// Some `R` with the set inside `B̄(0, R)`, when the structure proves it.
    pub fn bounding_radius(&self) -> Option<f64> {
        use SetDescriptor::*;
        match self {
            Ball(b) | ClosedBall(b) => Some(norm(&b.center) + b.radius),
            Annulus { center, outer, .. } => outer.is_finite().then(|| norm(center) + outer),
            HalfSpace { .. } | WholeSpace | SequenceUnion { .. } => None,
            Origin => Some(0.0),
            Complement(s) => s.cobounding_radius(),
            Union(cs) => cs.iter().try_fold(0.0f64, |acc, c| c.bounding_radius().map(|r| acc.max(r))),
            Intersection(cs) => cs.iter().filter_map(|c| c.bounding_radius()).reduce(f64::min),
        }
    }

    /// Axis-aligned box containing the set, when the structure proves one.
    pub fn bounding_box(&self, n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        use SetDescriptor::*;
        let around = |c: &[f64], r: f64| Some((c.iter().map(|v| v - r).collect(), c.iter().map(|v| v + r).collect()));
        match self {
            Ball(b) | ClosedBall(b) => around(&b.center, b.radius),
            Annulus { center, outer, .. } if outer.is_finite() => around(center, *outer),
            Origin => Some((vec![0.0; n], vec![0.0; n])),
            Union(cs) if !cs.is_empty() => {
                let boxes: Option<Vec<_>> = cs.iter().map(|c| c.bounding_box(n)).collect();
                boxes?.into_iter().reduce(|(l1, h1), (l2, h2)| {
                    (
                        l1.iter().zip(&l2).map(|(a, b)| a.min(*b)).collect(),
                        h1.iter().zip(&h2).map(|(a, b)| a.max(*b)).collect(),
                    )
                })
            }
            Intersection(cs) => cs.iter().filter_map(|c| c.bounding_box(n)).reduce(|(l1, h1), (l2, h2)| {
                (
                    l1.iter().zip(&l2).map(|(a, b)| a.max(*b)).collect(),
                    h1.iter().zip(&h2).map(|(a, b)| a.min(*b)).collect(),
                )
            }),
            _ => None,
        }
    }

    /// Some `R` with the complement inside `B̄(0, R)`.
    pub fn cobounding_radius(&self) -> Option<f64> {
        use SetDescriptor::*;
        match self {
            WholeSpace => Some(0.0),
            Annulus { center, inner, outer, .. } => (!outer.is_finite()).then(|| norm(center) + inner),
            Complement(s) => s.bounding_radius(),
            Union(cs) => cs.iter().filter_map(|c| c.cobounding_radius()).reduce(f64::min),
            Intersection(cs) => cs.iter().try_fold(0.0f64, |acc, c| c.cobounding_radius().map(|r| acc.max(r))),
            _ => None,
        }
    }

    pub fn is_cobounded(&self) -> bool {
        self.cobounding_radius().is_some()
    }

    /// Decides whether the boundary is unbounded from the structure alone.
    pub fn boundary_unbounded(&self) -> BoundaryExtent {
        use BoundaryExtent as B;
        use SetDescriptor::*;
        match self {
            Ball(_) | ClosedBall(_) | Annulus { .. } | Origin | WholeSpace => B::Bounded,
            HalfSpace { normal, .. } => {
                if normal.iter().any(|&c| c != 0.0) {
                    B::Unbounded
                } else {
                    // degenerate: empty set or whole space
                    B::Bounded
                }
            }
            Complement(s) => s.boundary_unbounded(),
            Union(cs) | Intersection(cs) => {
                let extents: Vec<_> = cs.iter().map(|c| c.boundary_unbounded()).collect();
                if extents.iter().all(|e| *e == B::Bounded) {
                    return B::Bounded;
                }
                // Far out, a union agrees with any child whose companions are
                // bounded sets; an intersection with any child whose companions
                // are cobounded.
                let union = matches!(self, Union(_));
                for (i, e) in extents.iter().enumerate() {
                    if *e != B::Unbounded {
                        continue;
                    }
                    let others_vanish = cs.iter().enumerate().filter(|(k, _)| *k != i).all(|(_, c)| {
                        if union {
                            c.bounding_radius().is_some()
                        } else {
                            c.is_cobounded()
                        }
                    });
                    if others_vanish {
                        return B::Unbounded;
                    }
                }
                B::Unknown
            }
            SequenceUnion { seq, closed } => sequence_boundary(seq, *closed),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        use SetDescriptor::*;
        match self {
            Ball(b) | ClosedBall(b) => Some(b.dim()),
            Annulus { center, .. } => Some(center.len()),
            HalfSpace { normal, .. } => Some(normal.len()),
            SequenceUnion { seq, .. } => Some(seq.center.len()),
            Complement(s) => s.dim(),
            Union(cs) | Intersection(cs) => cs.iter().find_map(|c| c.dim()),
            WholeSpace | Origin => None,
        }
    }

    /// The image under `x ↦ x + v`. `Origin` becomes the closed ball of
    /// radius 0 at `v`.
    pub fn translated(&self, v: &[f64]) -> SetDescriptor {
        use SetDescriptor::*;
        if v.iter().all(|&c| c == 0.0) {
            return self.clone();
        }
        let sh = |c: &[f64]| c.iter().zip(v).map(|(a, b)| a + b).collect::<Vec<_>>();
        match self {
            Ball(b) => Ball(crate::model::geometry::Ball { center: sh(&b.center), radius: b.radius }),
            ClosedBall(b) => ClosedBall(crate::model::geometry::Ball { center: sh(&b.center), radius: b.radius }),
            Annulus { center, inner, outer, closed } => Annulus { center: sh(center), inner: *inner, outer: *outer, closed: *closed },
            HalfSpace { normal, offset } => HalfSpace { normal: normal.clone(), offset: offset + dot(normal, v) },
            Complement(s) => Complement(Box::new(s.translated(v))),
            Union(cs) => Union(cs.iter().map(|c| c.translated(v)).collect()),
            Intersection(cs) => Intersection(cs.iter().map(|c| c.translated(v)).collect()),
            SequenceUnion { seq, closed } => SequenceUnion {
                seq: BallSequence {
                    center: seq
                        .center
                        .iter()
                        .zip(v)
                        .map(|(e, &s)| if s == 0.0 { e.clone() } else { e.clone().add(Expr::lit(s)) })
                        .collect(),
                    radius: seq.radius.clone(),
                    start: seq.start,
                },
                closed: *closed,
            },
            WholeSpace => WholeSpace,
            Origin => ClosedBall(crate::model::geometry::Ball { center: v.to_vec(), radius: 0.0 }),
        }
    }

    /// The image under `x ↦ λx`.
    pub fn scaled(&self, lambda: f64) -> SetDescriptor {
        use SetDescriptor::*;
        let sc = |v: &[f64]| v.iter().map(|c| c * lambda).collect::<Vec<_>>();
        match self {
            Ball(b) => Ball(crate::model::geometry::Ball { center: sc(&b.center), radius: b.radius * lambda }),
            ClosedBall(b) => ClosedBall(crate::model::geometry::Ball { center: sc(&b.center), radius: b.radius * lambda }),
            Annulus { center, inner, outer, closed } => Annulus {
                center: sc(center),
                inner: inner * lambda,
                outer: outer * lambda,
                closed: *closed,
            },
            HalfSpace { normal, offset } => HalfSpace { normal: normal.clone(), offset: offset * lambda },
            Complement(s) => Complement(Box::new(s.scaled(lambda))),
            Union(cs) => Union(cs.iter().map(|c| c.scaled(lambda)).collect()),
            Intersection(cs) => Intersection(cs.iter().map(|c| c.scaled(lambda)).collect()),
            SequenceUnion { seq, closed } => SequenceUnion {
                seq: BallSequence {
                    center: seq.center.iter().map(|e| Expr::lit(lambda).mul(e.clone())).collect(),
                    radius: Expr::lit(lambda).mul(seq.radius.clone()),
                    start: seq.start,
                },
                closed: *closed,
            },
            WholeSpace => WholeSpace,
            Origin => Origin,
        }
    }

    /// Radial profile of an origin-centred set, if the tree is built only from
    /// origin-centred balls, annuli and the origin.
    pub fn radial(&self) -> Option<RadialSet> {
        use SetDescriptor::*;
        let centred = |c: &[f64]| c.iter().all(|&v| v == 0.0);
        match self {
            Ball(b) if centred(&b.center) => Some(RadialSet::interval(0.0, true, b.radius, false)),
            ClosedBall(b) if centred(&b.center) => Some(RadialSet::interval(0.0, true, b.radius, true)),
            Annulus { center, inner, outer, closed } if centred(center) => {
                Some(RadialSet::interval(*inner, *closed, *outer, *closed && outer.is_finite()))
            }
            Origin => Some(RadialSet::interval(0.0, true, 0.0, true)),
            WholeSpace => Some(RadialSet::interval(0.0, true, f64::INFINITY, false)),
            Complement(s) => Some(s.radial()?.complement()),
            Union(cs) => cs.iter().try_fold(RadialSet::default(), |acc, c| Some(acc.union(&c.radial()?))),
            Intersection(cs) => cs
                .iter()
                .try_fold(RadialSet::interval(0.0, true, f64::INFINITY, false), |acc, c| Some(acc.intersect(&c.radial()?))),
            _ => None,
        }
    }
}

fn symbolically_positive(e: &Expr) -> bool {
    match e {
        Expr::Lit(v) => *v > 0.0,
        Expr::Call(Func::Exp | Func::Pow2, _) => true,
        Expr::Bin(BinOp::Add | BinOp::Mul | BinOp::Div, a, b) => symbolically_positive(a) && symbolically_positive(b),
        Expr::Bin(BinOp::Pow, a, _) => symbolically_positive(a),
        _ => false,
    }
}

/// Centers on a coordinate line escaping to infinity, with radii that stay
/// bounded, force an unbounded boundary.
fn sequence_boundary(seq: &BallSequence, closed: bool) -> BoundaryExtent {
    let Some((first, rest)) = seq.center.split_first() else {
        return BoundaryExtent::Unknown;
    };
    let on_line = rest.iter().all(|e| matches!(e, Expr::Lit(_)));
    let escapes = matches!(first.limit(), Limit::PlusInfinity | Limit::MinusInfinity);
    let radius_bounded = matches!(seq.radius.limit(), Limit::Finite(_));
    let nonempty = closed || symbolically_positive(&seq.radius);
    if on_line && escapes && radius_bounded && nonempty {
        BoundaryExtent::Unbounded
    } else if radius_bounded && seq.center.iter().all(|e| matches!(e.limit(), Limit::Finite(_))) {
        // convergent centers and radii: every term is a finite ball, so the union is bounded
        BoundaryExtent::Bounded
    } else {
        BoundaryExtent::Unknown
    }
}

/// An endpoint of a radial interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub at: f64,
    pub closed: bool,
}

/// A finite union of disjoint radial intervals, sorted by position.
/// A set containing the origin starts with a closed endpoint at 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadialSet {
    pub intervals: Vec<(Endpoint, Endpoint)>,
}

impl RadialSet {
    pub fn interval(a: f64, a_closed: bool, b: f64, b_closed: bool) -> Self {
        let mut s = RadialSet::default();
        if a < b || (a == b && a_closed && b_closed) {
            s.intervals.push((Endpoint { at: a, closed: a_closed }, Endpoint { at: b, closed: b_closed }));
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|(a, b)| {
            (a.at < t || (a.closed && a.at == t)) && (t < b.at || (b.closed && b.at == t))
        })
    }

    pub fn complement(&self) -> Self {
        let mut out = RadialSet::default();
        let mut cursor = Endpoint { at: 0.0, closed: true };
        for (a, b) in &self.intervals {
            let upto = Endpoint { at: a.at, closed: !a.closed };
            out.push(cursor, upto);
            cursor = Endpoint { at: b.at, closed: !b.closed };
        }
        if cursor.at.is_finite() {
            out.push(cursor, Endpoint { at: f64::INFINITY, closed: false });
        }
        out
    }

    fn push(&mut self, a: Endpoint, b: Endpoint) {
        if a.at < b.at || (a.at == b.at && a.closed && b.closed) {
            self.intervals.push((a, b));
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.complement().intersect(&other.complement()).complement()
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = RadialSet::default();
        for (a1, b1) in &self.intervals {
            for (a2, b2) in &other.intervals {
                let lo = if a1.at > a2.at {
                    *a1
                } else if a2.at > a1.at {
                    *a2
                } else {
                    Endpoint { at: a1.at, closed: a1.closed && a2.closed }
                };
                let hi = if b1.at < b2.at {
                    *b1
                } else if b2.at < b1.at {
                    *b2
                } else {
                    Endpoint { at: b1.at, closed: b1.closed && b2.closed }
                };
                out.push(lo, hi);
            }
        }
        out.intervals.sort_by(|x, y| x.0.at.total_cmp(&y.0.at));
        out
    }

    /// Interval hull `(first, last)` endpoints.
    pub fn hull(&self) -> Option<(Endpoint, Endpoint)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::parse_expr;
    use proptest::prelude::*;

    fn sparse_balls_domain() -> SetDescriptor {
        SetDescriptor::SequenceUnion {
            seq: BallSequence {
                center: vec![parse_expr("0.75*pow2(4^j)").unwrap(), Expr::lit(0.0)],
                radius: parse_expr("pow2(-(8^j))").unwrap(),
                start: 1,
            },
            closed: true,
        }
        .complement()
    }

    fn clustered_set() -> SetDescriptor {
        SetDescriptor::Union(vec![
            SetDescriptor::Origin,
            SetDescriptor::SequenceUnion {
                seq: BallSequence {
                    center: vec![parse_expr("exp(-(2^j))").unwrap(), Expr::lit(0.0)],
                    radius: parse_expr("exp(-(2^(j+1)))").unwrap(),
                    start: 1,
                },
                closed: true,
            },
        ])
    }

    #[test]
    fn ball_membership() {
        let b = SetDescriptor::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(b.contains(&[0.5, 0.0], 1).unwrap());
        assert!(!b.contains(&[1.0, 0.0], 1).unwrap());
        let cb = SetDescriptor::closed_ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(cb.contains(&[1.0, 0.0], 1).unwrap());
    }

    #[test]
    fn sequence_membership() {
        let f = clustered_set();
        let a1 = (-2f64).exp();
        assert!(f.contains(&[a1, 0.0], 5).unwrap());
        assert!(f.contains(&[0.0, 0.0], 5).unwrap());
        assert!(!f.contains(&[0.3, 0.0], 5).unwrap());
    }

    #[test]
    fn boundary_extent() {
        let cb = SetDescriptor::closed_ball(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(cb.clone().complement().boundary_unbounded(), BoundaryExtent::Bounded);
        assert_eq!(sparse_balls_domain().boundary_unbounded(), BoundaryExtent::Unbounded);
        let h = SetDescriptor::HalfSpace { normal: vec![1.0, 0.0], offset: 0.0 };
        assert_eq!(h.boundary_unbounded(), BoundaryExtent::Unbounded);
        // half-plane minus a disk far away still has an unbounded boundary
        let cut = SetDescriptor::Intersection(vec![h.clone(), cb.clone().complement()]);
        assert_eq!(cut.boundary_unbounded(), BoundaryExtent::Unbounded);
        // two half-planes can cancel; no guess
        let two = SetDescriptor::Union(vec![h.clone(), h.clone().complement()]);
        assert_eq!(two.boundary_unbounded(), BoundaryExtent::Unknown);
        // balls shrinking onto the origin
        assert_eq!(clustered_set().boundary_unbounded(), BoundaryExtent::Bounded);
    }

    #[test]
    fn sparse_ball_generator_is_monotone() {
        let SetDescriptor::Complement(s) = sparse_balls_domain() else { unreachable!() };
        let SetDescriptor::SequenceUnion { seq, .. } = *s else { unreachable!() };
        let mut last_c = 0.0;
        let mut last_r = f64::INFINITY;
        for j in 1..=10 {
            // compare in log2 to stay finite
            let log_c = (0.75f64).log2() + 4f64.powi(j);
            let log_r = -(8f64.powi(j));
            assert!(log_c > last_c && log_r < last_r);
            last_c = log_c;
            last_r = log_r;
            if j <= 3 {
                let c = seq.center_at(j as i64).unwrap();
                assert!((c[0].log2() - log_c).abs() < 1e-9 * log_c);
            }
        }
        assert_eq!(seq.terms_within(1e6, 10).unwrap(), 2);
    }

    #[test]
    fn radial_profiles() {
        let shell = SetDescriptor::Intersection(vec![
            SetDescriptor::closed_ball(vec![0.0, 0.0], 4.0).unwrap(),
            SetDescriptor::ball(vec![0.0, 0.0], 2.0).unwrap().complement(),
        ]);
        let r = shell.radial().unwrap();
        assert_eq!(r, RadialSet::interval(2.0, true, 4.0, true));
        assert!(r.contains(2.0) && r.contains(4.0) && !r.contains(1.9));
        let outside = SetDescriptor::annulus(2, 0.5, f64::INFINITY, false).radial().unwrap();
        assert!(!outside.contains(0.5) && outside.contains(1e9));
        assert!(SetDescriptor::Origin.complement().radial().unwrap().contains(1e-300));
    }

    #[test]
    fn bounds() {
        let cb = SetDescriptor::closed_ball(vec![3.0, 4.0], 1.0).unwrap();
        assert_eq!(cb.bounding_radius(), Some(6.0));
        assert_eq!(cb.clone().complement().cobounding_radius(), Some(6.0));
        assert!(SetDescriptor::empty().bounding_radius() == Some(0.0));
        assert!(sparse_balls_domain().bounding_radius().is_none());
    }

    fn arb_set() -> impl Strategy<Value = SetDescriptor> {
        let leaf = prop_oneof![
            ((-2.0f64..2.0), (-2.0f64..2.0), (0.1f64..2.0))
                .prop_map(|(a, b, r)| SetDescriptor::ball(vec![a, b], r).unwrap()),
            ((-2.0f64..2.0), (-2.0f64..2.0), (0.1f64..2.0))
                .prop_map(|(a, b, r)| SetDescriptor::closed_ball(vec![a, b], r).unwrap()),
            ((-1.0f64..1.0), (-1.0f64..1.0), (-1.0f64..1.0))
                .prop_map(|(a, b, o)| SetDescriptor::HalfSpace { normal: vec![a, b], offset: o }),
            (0.1f64..1.0, 1.0f64..3.0, any::<bool>()).prop_map(|(i, o, c)| SetDescriptor::annulus(2, i, o, c)),
            Just(SetDescriptor::Origin),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(SetDescriptor::complement),
                prop::collection::vec(inner.clone(), 0..3).prop_map(SetDescriptor::Union),
                prop::collection::vec(inner, 0..3).prop_map(SetDescriptor::Intersection),
            ]
        })
    }

    proptest! {
        #[test]
        fn complement_negates_membership(s in arb_set(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let inside = s.contains(&[x, y], 4).unwrap();
            prop_assert_eq!(s.clone().complement().contains(&[x, y], 4).unwrap(), !inside);
        }

        #[test]
        fn radial_profile_agrees_with_membership(i in 0.1f64..1.0, o in 1.0f64..3.0, c in any::<bool>(), t in 0.0f64..4.0) {
            let s = SetDescriptor::Union(vec![
                SetDescriptor::annulus(2, i, o, c),
                SetDescriptor::Origin,
            ]).complement();
            let r = s.radial().unwrap();
            prop_assert_eq!(r.contains(t), s.contains(&[t, 0.0], 1).unwrap());
        }

        #[test]
        fn translation_moves_membership(s in arb_set(), x in -3.0f64..3.0, y in -3.0f64..3.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            // exact shifts keep the comparison free of rounding
            let (a, b) = ((a * 8.0).round() / 8.0, (b * 8.0).round() / 8.0);
            let moved = s.translated(&[a, b]);
            prop_assert_eq!(moved.contains(&[x + a, y + b], 4).unwrap(), s.contains(&[x, y], 4).unwrap());
        }

        #[test]
        fn bounding_radius_is_sound(s in arb_set(), x in -30.0f64..30.0, y in -30.0f64..30.0) {
            let p = [x, y];
            if let Some(r) = s.bounding_radius() {
                if norm(&p) > r + 1e-9 {
                    prop_assert!(!s.contains(&p, 4).unwrap());
                }
            }
            if let Some(r) = s.cobounding_radius() {
                if norm(&p) > r + 1e-9 {
                    prop_assert!(s.contains(&p, 4).unwrap());
                }
            }
        }
    }
}
