//! The circular inversion `T(x) = x/|x|^2` and what it does to points, sets
//! and operators of p-Laplace type.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::expr::{BinOp, Expr};
use crate::model::geometry::{dot, norm, Ball, BallSequence, SetDescriptor};
use crate::model::{Exponents, Weight};

/// A point of `R^n ∪ {∞}`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtendedPoint {
    Finite(Vec<f64>),
    Infinity,
}

pub fn invert_point(x: &ExtendedPoint) -> ExtendedPoint {
    match x {
        ExtendedPoint::Infinity => ExtendedPoint::Finite(Vec::new()),
        ExtendedPoint::Finite(v) => {
            let s = dot(v, v);
            if s == 0.0 {
                ExtendedPoint::Infinity
            } else {
                ExtendedPoint::Finite(v.iter().map(|c| c / s).collect())
            }
        }
    }
}

/// `T(x)` for a finite nonzero point.
pub fn invert(x: &[f64]) -> Result<Vec<f64>> {
    let s = dot(x, x);
    if s == 0.0 {
        return Err(Error::SingularPoint);
    }
    Ok(x.iter().map(|c| c / s).collect())
}

/// Image of a ball not containing the origin in its closure. The open or
/// closed kind is the caller's to keep.
pub fn invert_ball(b: &Ball) -> Result<Ball> {
    let a = norm(&b.center);
    if a <= b.radius {
        return Err(Error::OriginInsideBall { center_norm: a, radius: b.radius });
    }
    let d = a * a - b.radius * b.radius;
    Ok(Ball { center: b.center.iter().map(|c| c / d).collect(), radius: b.radius / d })
}

/// `dT(x) q = (q - 2 (x·q) x / |x|^2) / |x|^2`.
pub fn dt_apply(x: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    let s = dot(x, x);
    if s == 0.0 {
        return Err(Error::SingularPoint);
    }
    let k = 2.0 * dot(x, q) / s;
    Ok(q.iter().zip(x).map(|(qi, xi)| (qi - k * xi) / s).collect())
}

/// `|det dT(x)| = |x|^{-2n}`.
pub fn jacobian_det_abs(x: &[f64], n: usize) -> Result<f64> {
    let s = dot(x, x);
    if s == 0.0 {
        return Err(Error::SingularPoint);
    }
    Ok(s.powi(-(n as i32)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    PLaplace,
    /// `a(x) |q|^{p-2} q`, where the expression variable stands for `|x|`.
    ScalarAnisotropic(Expr),
}

/// A map `A(x, q)` of p-Laplace type with structure constants `alpha1 ≤ alpha2`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMap {
    pub kind: OperatorKind,
    pub exponents: Exponents,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl OperatorMap {
    pub fn p_laplace(exponents: Exponents) -> Self {
        Self { kind: OperatorKind::PLaplace, exponents, alpha1: 1.0, alpha2: 1.0 }
    }

    pub fn scalar(a: Expr, exponents: Exponents, alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha1 > 0.0 && alpha2 >= alpha1) {
            return Err(Error::InvalidParameter(format!(
                "structure constants must satisfy 0 < alpha1 ≤ alpha2 (got {alpha1}, {alpha2})"
            )));
        }
        Ok(Self { kind: OperatorKind::ScalarAnisotropic(a), exponents, alpha1, alpha2 })
    }

    pub fn coefficient(&self, x: &[f64]) -> Result<f64> {
        match &self.kind {
            OperatorKind::PLaplace => Ok(1.0),
            OperatorKind::ScalarAnisotropic(a) => Ok(a.eval(norm(x))?),
        }
    }

    pub fn eval(&self, x: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        let a = self.coefficient(x)?;
        let p = self.exponents.p();
        let nq = norm(q);
        let s = if nq == 0.0 { 0.0 } else { a * nq.powf(p - 2.0) };
        Ok(q.iter().map(|c| s * c).collect())
    }
}

/// `B(ξ, q) = |J_T(x)|^{-1} dT(x) A(x, dT(x) q)` with `x = T(ξ)`, and `B(0, q) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardMap {
    pub source: OperatorMap,
    pub weight: Weight,
}

impl PushforwardMap {
    pub fn new(source: OperatorMap) -> Self {
        let weight = Weight::power(source.exponents.delta());
        Self { source, weight }
    }

    pub fn eval(&self, xi: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        pushforward_eval(self, xi, q)
    }
}

pub fn pushforward_eval(b: &PushforwardMap, xi: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    if xi.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: xi.len(), got: q.len() });
    }
    if xi.iter().all(|&c| c == 0.0) {
        return Ok(vec![0.0; q.len()]);
    }
    let x = invert(xi)?;
    let n = b.source.exponents.n();
    let dq = dt_apply(&x, q)?;
    let a = b.source.eval(&x, &dq)?;
    let out = dt_apply(&x, &a)?;
    let inv_j = jacobian_det_abs(&x, n)?.recip();
    Ok(out.into_iter().map(|c| c * inv_j).collect())
}

/// Worst observed margins of the four structure conditions; positive means
/// satisfied with room to spare.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityReport {
    pub samples: usize,
    pub coercivity_margin: f64,
    pub growth_margin: f64,
    pub homogeneity_error: f64,
    pub monotonicity_margin: f64,
}

const RELATIVE_SLACK: f64 = 1e-10;
pub const MONOTONICITY_FLOOR: f64 = 1e-14;

/// Samples `(ξ, q, q', λ)` and checks coercivity, growth, homogeneity and
/// strict monotonicity of `B` with respect to the weight `|ξ|^δ`.
pub fn verify_ellipticity(b: &PushforwardMap, samples: usize, seed: u64) -> Result<EllipticityReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let n = b.source.exponents.n();
    let p = b.source.exponents.p();
    let (a1, a2) = (b.source.alpha1, b.source.alpha2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EllipticityReport {
        samples,
        coercivity_margin: f64::INFINITY,
        growth_margin: f64::INFINITY,
        homogeneity_error: 0.0,
        monotonicity_margin: f64::INFINITY,
    };
    let draw = |rng: &mut ChaCha8Rng, scale: f64| -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let l = norm(&v);
            if l > 1e-3 {
                return v.into_iter().map(|c| c * scale / l).collect();
            }
        }
    };
    for i in 0..samples {
        let s_xi = 10f64.powf(rng.gen_range(-2.0..2.0));
        let xi = draw(&mut rng, s_xi);
        let s_q = 10f64.powf(rng.gen_range(-1.0..1.0));
        let q = draw(&mut rng, s_q);
        let s_q2 = 10f64.powf(rng.gen_range(-1.0..1.0));
        let q2 = draw(&mut rng, s_q2);
        let lambda = loop {
            let l: f64 = rng.gen_range(-3.0..3.0);
            if l.abs() > 1e-2 {
                break l;
            }
        };
        let w = b.weight.value(&xi);
        let bq = b.eval(&xi, &q)?;
        let nq = norm(&q);

        let coerc = dot(&bq, &q) / (a1 * w * nq.powf(p)) - 1.0;
        report.coercivity_margin = report.coercivity_margin.min(coerc);
        if coerc < -RELATIVE_SLACK {
            return Err(Error::EllipticityViolation { condition: "coercivity", sample: i, margin: coerc });
        }

        let growth = 1.0 - norm(&bq) / (a2 * w * nq.powf(p - 1.0));
        report.growth_margin = report.growth_margin.min(growth);
        if growth < -RELATIVE_SLACK {
            return Err(Error::EllipticityViolation { condition: "growth", sample: i, margin: growth });
        }

        let lq: Vec<f64> = q.iter().map(|c| lambda * c).collect();
        let blq = b.eval(&xi, &lq)?;
        let factor = lambda * lambda.abs().powf(p - 2.0);
        let diff: Vec<f64> = blq.iter().zip(&bq).map(|(x, y)| x - factor * y).collect();
        let hom = norm(&diff) / (factor.abs() * norm(&bq));
        report.homogeneity_error = report.homogeneity_error.max(hom);
        if hom > RELATIVE_SLACK {
            return Err(Error::EllipticityViolation { condition: "homogeneity", sample: i, margin: -hom });
        }

        let bq2 = b.eval(&xi, &q2)?;
        let dq: Vec<f64> = q.iter().zip(&q2).map(|(x, y)| x - y).collect();
        let db: Vec<f64> = bq.iter().zip(&bq2).map(|(x, y)| x - y).collect();
        let nd = norm(&dq);
        let scale = w * nd * nd * (nq + norm(&q2)).powf(p - 2.0);
        let mono = dot(&db, &dq) / scale;
        report.monotonicity_margin = report.monotonicity_margin.min(mono);
        if !(mono > MONOTONICITY_FLOOR) {
            return Err(Error::EllipticityViolation { condition: "monotonicity", sample: i, margin: mono });
        }
    }
    Ok(report)
}

/// Image of a set under `T`, as a subset of `R^n`. The origin belongs to the
/// image exactly when the set is provably cobounded (a neighbourhood of ∞).
pub fn invert_set(s: &SetDescriptor) -> Result<SetDescriptor> {
    let core = invert_core(s)?;
    let n = s.dim().unwrap_or(2);
    let zero = vec![0.0; n];
    let want = s.is_cobounded();
    if core.contains(&zero, 1)? == want {
        return Ok(core);
    }
    Ok(if want {
        SetDescriptor::Union(vec![core, SetDescriptor::Origin])
    } else {
        SetDescriptor::Intersection(vec![core, SetDescriptor::Origin.complement()])
    })
}

fn ball_image(b: &Ball, closed: bool) -> Result<SetDescriptor> {
    use SetDescriptor as S;
    let a = norm(&b.center);
    let rho = b.radius;
    if a > rho {
        let img = invert_ball(b)?;
        return Ok(if closed { S::ClosedBall(img) } else { S::Ball(img) });
    }
    if a == rho {
        // the boundary sphere passes through the origin: the image is bounded
        // by the hyperplane {y·c = 1/2}
        let normal = b.center.clone();
        return Ok(if closed {
            S::HalfSpace { normal: normal.iter().map(|c| -c).collect(), offset: -0.5 }.complement()
        } else {
            S::HalfSpace { normal, offset: 0.5 }
        });
    }
    let d = rho * rho - a * a;
    let hole = Ball { center: b.center.iter().map(|c| -c / d).collect(), radius: rho / d };
    Ok(if closed { S::Ball(hole).complement() } else { S::ClosedBall(hole).complement() })
}

fn invert_core(s: &SetDescriptor) -> Result<SetDescriptor> {
    use SetDescriptor as S;
    Ok(match s {
        S::Ball(b) => ball_image(b, false)?,
        S::ClosedBall(b) => ball_image(b, true)?,
        S::Annulus { center, inner, outer, closed } => {
            let hole = if *inner > 0.0 {
                let b = Ball { center: center.clone(), radius: *inner };
                let h = if *closed { S::Ball(b) } else { S::ClosedBall(b) };
                Some(invert_set(&h)?.complement())
            } else if *closed {
                None
            } else if center.iter().all(|&c| c == 0.0) {
                Some(S::Origin.complement())
            } else {
                let point = S::ClosedBall(Ball { center: center.clone(), radius: 0.0 });
                Some(invert_set(&point)?.complement())
            };
            let cap = if outer.is_finite() {
                let b = Ball { center: center.clone(), radius: *outer };
                Some(invert_set(&if *closed { S::ClosedBall(b) } else { S::Ball(b) })?)
            } else {
                None
            };
            S::Intersection(hole.into_iter().chain(cap).collect())
        }
        S::HalfSpace { normal, offset } => {
            let l = norm(normal);
            if l == 0.0 || *offset == 0.0 {
                s.clone()
            } else {
                let unit: Vec<f64> = normal.iter().map(|c| c / l).collect();
                let d = offset / l;
                let ball = Ball { center: unit.iter().map(|c| c / (2.0 * d)).collect(), radius: 1.0 / (2.0 * d.abs()) };
                if d > 0.0 {
                    S::Ball(ball)
                } else {
                    S::ClosedBall(ball).complement()
                }
            }
        }
        S::Complement(inner) => S::Complement(Box::new(invert_set(inner)?)),
        S::Union(cs) => S::Union(cs.iter().map(invert_set).collect::<Result<_>>()?),
        S::Intersection(cs) => S::Intersection(cs.iter().map(invert_set).collect::<Result<_>>()?),
        S::SequenceUnion { seq, closed } => S::SequenceUnion { seq: invert_sequence(seq)?, closed: *closed },
        S::WholeSpace => S::WholeSpace,
        S::Origin => S::empty(),
    })
}

/// Inverts each ball of a sequence symbolically: center `c/(|c|^2 - ρ^2)`,
/// radius `ρ/(|c|^2 - ρ^2)`. The first terms are checked to avoid the origin.
pub fn invert_sequence(seq: &BallSequence) -> Result<BallSequence> {
    for (c, r) in seq.realize(8)? {
        if norm(&c) <= r {
            return Err(Error::OriginInsideBall { center_norm: norm(&c), radius: r });
        }
    }
    let sq = |e: &Expr| Expr::bin(BinOp::Mul, e.clone(), e.clone());
    let mut c2 = sq(&seq.center[0]);
    for c in &seq.center[1..] {
        if *c != Expr::Lit(0.0) {
            c2 = c2.add(sq(c));
        }
    }
    let denom = c2.sub(sq(&seq.radius));
    let center = seq
        .center
        .iter()
        .map(|c| if *c == Expr::Lit(0.0) { c.clone() } else { c.clone().div(denom.clone()) })
        .collect();
    Ok(BallSequence { center, radius: seq.radius.clone().div(denom), start: seq.start })
}
