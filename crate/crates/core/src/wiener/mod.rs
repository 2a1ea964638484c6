//! Wiener-type integrals at infinity and at finite points, their sampled
//! partial sums, and the regularity classifier for the point at infinity.
//!
//! Every integrand has the form `(cap / normalization)^{1/(p-1)}` against
//! `dr/r`. For the criteria at infinity `r` runs over `[1, ∞)`; for those at
//! a finite point over `(0, 1]`, accumulated from `r = 1` downwards.

pub mod backend;
pub mod verdict;

pub use backend::CapacityBackend;
pub use verdict::{certificate, classify_infinity, divergence_verdict, Classification, Regularity, Verdict};

use crate::capacity::EstimateKind;
use crate::error::{Error, Result};
use crate::families::Family;
use crate::inversion::invert_set;
use crate::model::{weight_ball_mass, Exponents, SetDescriptor, Weight};

/// Inner radius profile of a shell criterion at infinity, `B̄_{f(r)} \ B_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerShell {
    /// `f(r) = r²`
    Square,
    /// `f(r) = 2^r`
    Exponential,
    /// `f(r) = M r`; not a criterion for `p = n`.
    Linear(f64),
}

/// Outer set of a shell criterion at infinity, `B_{g(r)} \ B̄_{r/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterSet {
    /// `g(r) = 4^r`
    Exponential,
    /// `R^n \ B̄_{r/2}`
    Exterior,
    /// `g(r) = N r`; not a criterion for `p = n`.
    Linear(f64),
}

/// Which integral to sample.
#[derive(Debug, Clone, PartialEq)]
pub enum CriterionVariant {
    /// `cap_p(B̄_r, Ω ∪ B_{2r})` at infinity.
    BallInDomain,
    /// `cap_p(Ω^c ∩ (B̄_{f(r)} \ B_r), outer(r))` at infinity.
    Shell { inner: InnerShell, outer: OuterSet },
    /// The image of `Shell` under inversion: at `ρ = 1/r`, the weighted
    /// capacity `cap_{p,w}` of the inverted condenser with `w = |ξ|^{2(p-n)}`.
    TransformedOrigin { inner: InnerShell, outer: OuterSet },
    /// `cap_{p,w}(Ω^c ∩ A(x0, r), B(x0, 2r)) / (r^{-p} w(B(x0, r)))` at the
    /// finite point `x0`, where `A` is the closed ball `B̄(x0, r)` or, with
    /// `shell = Some(k)`, the shell `B̄(x0, r) \ B(x0, r/k)` (not a criterion).
    AtPoint { x0: Vec<f64>, weight: Weight, shell: Option<f64> },
}

impl CriterionVariant {
    pub fn square_shell() -> Self {
        Self::Shell { inner: InnerShell::Square, outer: OuterSet::Exponential }
    }

    pub fn exponential_shell() -> Self {
        Self::Shell { inner: InnerShell::Exponential, outer: OuterSet::Exponential }
    }

    pub fn classic(x0: Vec<f64>, weight: Weight) -> Self {
        Self::AtPoint { x0, weight, shell: None }
    }

    /// Whether the variant characterizes regularity (for `p ≥ n`).
    pub fn is_criterion(&self) -> bool {
        match self {
            Self::BallInDomain => true,
            Self::Shell { inner, outer } | Self::TransformedOrigin { inner, outer } => {
                !matches!(inner, InnerShell::Linear(_)) && !matches!(outer, OuterSet::Linear(_))
            }
            Self::AtPoint { shell, .. } => shell.is_none(),
        }
    }

    /// Whether `r` runs over `[1, ∞)`.
    pub fn at_infinity(&self) -> bool {
        matches!(self, Self::BallInDomain | Self::Shell { .. })
    }

    /// Short name used in reports and on the command line.
    pub fn name(&self) -> String {
        let inner = |i: &InnerShell| match i {
            InnerShell::Square => "square".to_string(),
            InnerShell::Exponential => "exp".to_string(),
            InnerShell::Linear(m) => format!("linear({m})"),
        };
        let outer = |o: &OuterSet| match o {
            OuterSet::Exponential => String::new(),
            OuterSet::Exterior => "-exterior".to_string(),
            OuterSet::Linear(n) => format!("-outer({n})"),
        };
        match self {
            Self::BallInDomain => "ball".into(),
            Self::Shell { inner: i, outer: o } => format!("{}-shell{}", inner(i), outer(o)),
            Self::TransformedOrigin { inner: i, outer: o } => format!("transformed-{}-shell{}", inner(i), outer(o)),
            Self::AtPoint { shell: None, .. } => "classic".into(),
            Self::AtPoint { shell: Some(k), .. } => format!("point-shell({k})"),
        }
    }
}

/// A domain `Ω`, optionally tagged with the registered family it was built
/// from. `inverted` marks the image `T(Ω)` of the family's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub set: SetDescriptor,
    pub family: Option<Family>,
    pub inverted: bool,
}

impl DomainSpec {
    pub fn new(set: SetDescriptor) -> Self {
        Self { set, family: None, inverted: false }
    }

    pub fn dim(&self) -> Option<usize> {
        self.set.dim()
    }

    /// `T(Ω)`, keeping the family tag.
    pub fn inverted(&self) -> Result<Self> {
        Ok(Self { set: invert_set(&self.set)?, family: self.family.clone(), inverted: !self.inverted })
    }

    pub fn is_whole_space(&self) -> bool {
        let norm = backend::normalize(&self.set, false);
        matches!(norm, SetDescriptor::WholeSpace)
            || matches!(&norm, SetDescriptor::Complement(c) if c.is_empty_union())
            || matches!(&norm, SetDescriptor::Intersection(cs) if cs.is_empty())
    }
}

/// One sampled node of a Wiener integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub r: f64,
    pub capacity: f64,
    pub kind: EstimateKind,
    /// Value of the integrand against `dr/r`.
    pub integrand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WienerReport {
    pub variant: CriterionVariant,
    /// In order of accumulation.
    pub samples: Vec<Sample>,
    pub partial_sums: Vec<f64>,
    /// Least-squares slope of the partial sums against `|log r|` over the
    /// last decade of accumulation.
    pub trend: f64,
    pub verdict: Verdict,
}

fn shell_radii(inner: InnerShell, outer: OuterSet, r: f64) -> (f64, f64) {
    let hi = match inner {
        InnerShell::Square => r * r,
        InnerShell::Exponential => 2f64.powf(r),
        InnerShell::Linear(m) => m * r,
    };
    let out = match outer {
        OuterSet::Exponential => 4f64.powf(r),
        OuterSet::Exterior => f64::INFINITY,
        OuterSet::Linear(n) => n * r,
    };
    (hi, out)
}

/// The condenser `(K, G)`, its weight, and the normalization of the
/// integrand at `r`.
pub fn variant_condenser(
    r: f64,
    v: &CriterionVariant,
    dom: &DomainSpec,
    exp: Exponents,
) -> Result<(SetDescriptor, SetDescriptor, Weight, f64)> {
    let n = exp.n();
    if let Some(d) = dom.dim() {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, got: d });
        }
    }
    let p = exp.p();
    let omega_c = || dom.set.clone().complement();
    let origin = vec![0.0; n];
    if v.at_infinity() && !(r >= 1.0) {
        return Err(Error::Domain(format!("criteria at infinity need r ≥ 1 (got {r})")));
    }
    if !v.at_infinity() && !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("criteria at a point need 0 < r ≤ 1 (got {r})")));
    }
    Ok(match v {
        CriterionVariant::BallInDomain => (
            SetDescriptor::closed_ball(origin.clone(), r)?,
            SetDescriptor::Union(vec![dom.set.clone(), SetDescriptor::ball(origin, 2.0 * r)?]),
            Weight::Constant,
            r.powf(n as f64 - p),
        ),
        CriterionVariant::Shell { inner, outer } => {
            let (hi, out) = shell_radii(*inner, *outer, r);
            if !(hi >= r && out > hi) {
                return Err(Error::Domain(format!("shell radii r = {r}, {hi}, {out} are not nested")));
            }
            (
                SetDescriptor::Intersection(vec![omega_c(), SetDescriptor::annulus(n, r, hi, true)]),
                SetDescriptor::annulus(n, r / 2.0, out, false),
                Weight::Constant,
                r.powf(n as f64 - p),
            )
        }
        CriterionVariant::TransformedOrigin { inner, outer } => {
            let (hi, out) = shell_radii(*inner, *outer, 1.0 / r);
            let t_c = invert_set(&dom.set)?.complement();
            (
                SetDescriptor::Intersection(vec![t_c, SetDescriptor::annulus(n, 1.0 / hi, r, true)]),
                SetDescriptor::annulus(n, if out.is_finite() { 1.0 / out } else { 0.0 }, 2.0 * r, false),
                Weight::power(exp.delta()),
                r.powf(p - n as f64),
            )
        }
        CriterionVariant::AtPoint { x0, weight, shell } => {
            if x0.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
            }
            let centred = x0.iter().all(|&c| c == 0.0);
            if !centred && *weight != Weight::Constant && weight.delta() != 0.0 {
                return Err(Error::Unsupported("a power weight is only supported at the origin".into()));
            }
            let shift: Vec<f64> = x0.iter().map(|c| -c).collect();
            let moved = dom.set.translated(&shift).complement();
            let piece = match shell {
                None => SetDescriptor::closed_ball(origin.clone(), r)?,
                Some(k) => SetDescriptor::annulus(n, r / k, r, true),
            };
            let mass = weight_ball_mass(*weight, r, n)?;
            (
                SetDescriptor::Intersection(vec![moved, piece]),
                SetDescriptor::ball(origin, 2.0 * r)?,
                *weight,
                r.powf(-p) * mass,
            )
        }
    })
}

/// Capacity and integrand of `v` at `r`.
pub fn integrand_at(r: f64, v: &CriterionVariant, dom: &DomainSpec, exp: Exponents, caps: &CapacityBackend) -> Result<Sample> {
    let (k, g, w, norm) = variant_condenser(r, v, dom, exp)?;
    let est = caps.capacity(&k, &g, exp, w)?;
    let value = est.value.max(0.0);
    let integrand = if value == 0.0 { 0.0 } else { (value / norm).powf(exp.wiener_power()) };
    Ok(Sample { r, capacity: value, kind: est.kind, integrand })
}

/// Log-uniform nodes from `start` to `end` (either order) with
/// `per_decade` nodes per decade.
pub fn log_nodes(start: f64, end: f64, per_decade: usize) -> Vec<f64> {
    let decades = (end / start).log10().abs();
    let m = ((decades * per_decade as f64).ceil() as usize).max(1);
    let ratio = (end / start).ln() / m as f64;
    (0..=m).map(|i| if i == m { end } else { start * (ratio * i as f64).exp() }).collect()
}

/// Samples `v` log-uniformly over `[r_min, r_max]` and accumulates the
/// trapezoid rule in `log r`.
pub fn wiener_partial_sum(
    v: &CriterionVariant,
    dom: &DomainSpec,
    exp: Exponents,
    r_min: f64,
    r_max: f64,
    samples_per_decade: usize,
    caps: &CapacityBackend,
) -> Result<WienerReport> {
    if !(r_min > 0.0 && r_min < r_max) {
        return Err(Error::InvalidParameter(format!("need 0 < r_min < r_max (got {r_min}, {r_max})")));
    }
    if samples_per_decade < 4 {
        return Err(Error::InvalidParameter(format!("samples_per_decade = {samples_per_decade} must be at least 4")));
    }
    let nodes = if v.at_infinity() {
        log_nodes(r_min, r_max, samples_per_decade)
    } else {
        log_nodes(r_max, r_min, samples_per_decade)
    };
    let samples = nodes.iter().map(|&r| integrand_at(r, v, dom, exp, caps)).collect::<Result<Vec<_>>>()?;
    let mut partial_sums = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    for (i, s) in samples.iter().enumerate() {
        if i > 0 {
            let prev = &samples[i - 1];
            acc += 0.5 * (prev.integrand + s.integrand) * (s.r / prev.r).ln().abs();
        }
        partial_sums.push(acc);
    }
    let trend = last_decade_slope(&samples, &partial_sums);
    let mut report = WienerReport { variant: v.clone(), samples, partial_sums, trend, verdict: Verdict::NumericTrend(trend) };
    report.verdict = divergence_verdict(&report, dom, exp);
    Ok(report)
}

fn last_decade_slope(samples: &[Sample], sums: &[f64]) -> f64 {
    let Some(last) = samples.last() else { return 0.0 };
    let x0 = samples[0].r.ln();
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .zip(sums)
        .filter(|(s, _)| (s.r / last.r).log10().abs() <= 1.0)
        .map(|(s, &v)| ((s.r.ln() - x0).abs(), v))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// The classic integral at the boundary point `x0` over `r ∈ [r_min, 1]`.
pub fn classic_wiener_at(
    x0: &[f64],
    dom: &DomainSpec,
    exp: Exponents,
    w: Weight,
    r_min: f64,
    samples_per_decade: usize,
    caps: &CapacityBackend,
) -> Result<WienerReport> {
    wiener_partial_sum(&CriterionVariant::classic(x0.to_vec(), w), dom, exp, r_min, 1.0, samples_per_decade, caps)
}

#[cfg(test)]
mod tests;
