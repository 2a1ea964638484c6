use crate::error::{Error, Result};
use crate::families::{self, Family};
use crate::model::{BoundaryExtent, Exponents};
use crate::wiener::{wiener_partial_sum, CapacityBackend, CriterionVariant, DomainSpec, InnerShell, OuterSet, WienerReport};

/// Three-valued assessment of a Wiener integral. The provable cases carry a
/// description of the argument used.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    ProvablyDivergent(String),
    ProvablyConvergent(String),
    /// Fitted slope of the partial sums; never upgraded to a proof.
    NumericTrend(f64),
}

impl Verdict {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Verdict::ProvablyDivergent(_))
    }

    pub fn is_convergent(&self) -> bool {
        matches!(self, Verdict::ProvablyConvergent(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::ProvablyDivergent(_) => "divergent",
            Verdict::ProvablyConvergent(_) => "convergent",
            Verdict::NumericTrend(_) => "numeric-trend",
        }
    }

    pub fn certificate(&self) -> String {
        match self {
            Verdict::ProvablyDivergent(c) | Verdict::ProvablyConvergent(c) => c.clone(),
            Verdict::NumericTrend(s) => format!("no certificate; partial-sum slope {s:.6e} over the last decade"),
        }
    }
}

/// Certificate for the criteria at infinity, from the boundary structure.
fn structural(dom: &DomainSpec, exp: Exponents) -> Option<Verdict> {
    if exp.p() < exp.n() as f64 {
        return None;
    }
    match dom.set.boundary_unbounded() {
        BoundaryExtent::Unbounded if exp.p() > exp.n() as f64 => Some(Verdict::ProvablyDivergent(
            "p > n and the boundary is unbounded: every shell meets the complement, with capacity ≳ r^{n-p}".into(),
        )),
        BoundaryExtent::Bounded => Some(Verdict::ProvablyConvergent(
            "p ≥ n and the boundary is bounded: the integrand vanishes for all large r".into(),
        )),
        _ => None,
    }
}

/// Certificate for a registered family, if the family has a series bound
/// matching `v`.
fn family_certificate(v: &CriterionVariant, dom: &DomainSpec, exp: Exponents) -> Option<Verdict> {
    let fam = dom.family.as_ref()?;
    if !exp.is_conformal() {
        return None;
    }
    let at_origin = |x0: &[f64]| x0.iter().all(|&c| c == 0.0);
    match (fam, dom.inverted, v) {
        (Family::SparseBalls, false, v) if v.is_criterion() && !matches!(v, CriterionVariant::AtPoint { .. }) => {
            Some(Verdict::ProvablyConvergent(format!(
                "sparse balls, p = n: ball-in-ball bounds on each dyadic band give the series Σ (3/4) 4^j/8^j = {:.6}",
                families::sparse_balls_upper_series(60, exp.n()).ok()?
            )))
        }
        (Family::SparseBalls, true, CriterionVariant::AtPoint { x0, shell: None, .. }) if at_origin(x0) => {
            Some(Verdict::ProvablyConvergent(
                "inverted sparse balls, p = n: the integral at the origin is the image of the convergent series Σ (3/4) 4^j/8^j"
                    .into(),
            ))
        }
        (Family::ClusteredBalls, false, CriterionVariant::AtPoint { x0, shell: None, .. }) if at_origin(x0) => {
            Some(Verdict::ProvablyDivergent(format!(
                "clustered balls, p = n: lower bounds Σ 2π 2^(j-1)/(ln 5 + 3·2^(j-1)) grow without bound (partial sum {:.4} at J = 30)",
                families::clustered_ball_lower(30)
            )))
        }
        (Family::ClusteredBalls, false, CriterionVariant::AtPoint { x0, shell: Some(k), .. }) if at_origin(x0) && *k == 2.0 => {
            Some(Verdict::ProvablyConvergent(format!(
                "clustered balls, p = n: half-shell bounds Σ ln(10/3) 2π/(2^j - ln 2) converge (partial sum {:.4} at J = 60)",
                families::clustered_shell_bound(60)
            )))
        }
        (Family::ClusteredBalls, true, v) if v.is_criterion() && !matches!(v, CriterionVariant::AtPoint { .. }) => {
            Some(Verdict::ProvablyDivergent(
                "image of clustered balls, p = n: the integral equals the divergent ball integral at the origin".into(),
            ))
        }
        (
            Family::ClusteredBalls,
            true,
            CriterionVariant::Shell { inner: InnerShell::Linear(_), .. } | CriterionVariant::Shell { outer: OuterSet::Linear(_), .. },
        ) => Some(Verdict::ProvablyConvergent(
            "image of clustered balls, p = n: linear shells reduce to the convergent half-shell series at the origin".into(),
        )),
        _ => None,
    }
}

/// Attaches a certificate to a report when one applies, else the numeric
/// trend.
pub fn divergence_verdict(report: &WienerReport, dom: &DomainSpec, exp: Exponents) -> Verdict {
    certificate(&report.variant, dom, exp).unwrap_or(Verdict::NumericTrend(report.trend))
}

/// Certificate for `v` on `dom`, independent of any sampling.
pub fn certificate(v: &CriterionVariant, dom: &DomainSpec, exp: Exponents) -> Option<Verdict> {
    if let Some(c) = family_certificate(v, dom, exp) {
        return Some(c);
    }
    let at_infinity = matches!(v, CriterionVariant::BallInDomain | CriterionVariant::Shell { .. } | CriterionVariant::TransformedOrigin { .. });
    if at_infinity && v.is_criterion() {
        return structural(dom, exp);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    Regular,
    Irregular,
    Inconclusive,
}

impl Regularity {
    pub fn label(&self) -> &'static str {
        match self {
            Regularity::Regular => "regular",
            Regularity::Irregular => "irregular",
            Regularity::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: Regularity,
    pub variant: CriterionVariant,
    pub certificate: String,
    /// Sampled report, computed only when no certificate applies.
    pub report: Option<WienerReport>,
}

/// Sampling range used when the classifier falls back to numerics.
pub const CLASSIFY_R_MAX: f64 = 1e6;
pub const CLASSIFY_PER_DECADE: usize = 16;

/// Classifies the point at infinity for `dom` with the squared-shell
/// criterion (bounded condensers). Requires `p ≥ n` and refuses `R^n`.
pub fn classify_infinity(dom: &DomainSpec, exp: Exponents, caps: &CapacityBackend) -> Result<Classification> {
    exp.require_p_ge_n()?;
    if dom.is_whole_space() {
        return Err(Error::WholeSpaceRefused);
    }
    let variant = CriterionVariant::square_shell();
    if let Some(c) = certificate(&variant, dom, exp) {
        let class = if c.is_divergent() { Regularity::Regular } else { Regularity::Irregular };
        return Ok(Classification { class, variant, certificate: c.certificate(), report: None });
    }
    match wiener_partial_sum(&variant, dom, exp, 1.0, CLASSIFY_R_MAX, CLASSIFY_PER_DECADE, caps) {
        Ok(report) => {
            let certificate = report.verdict.certificate();
            Ok(Classification { class: Regularity::Inconclusive, variant, certificate, report: Some(report) })
        }
        Err(e) => Ok(Classification {
            class: Regularity::Inconclusive,
            variant,
            certificate: format!("no certificate; sampling failed: {e}"),
            report: None,
        }),
    }
}
