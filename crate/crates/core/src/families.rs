//! Registered domain families with exactly known Wiener series.
//!
//! * `SparseBalls`: `Ω = R^n \ ∪_j B̄(x_j, r_j)` with `|x_j| = (3/4) 2^{4^j}` and
//!   `r_j = 2^{-8^j}`. The boundary is unbounded, yet for `p = n` the point at
//!   infinity is irregular.
//! * `ClusteredBalls`: `Ω = R^n \ F` with `F = {0} ∪ ∪_j B̄(x_j, α_{j+1})`,
//!   `α_j = e^{-2^j}`, `x_j = (α_j, 0, ..., 0)`. For `p = n` the origin is
//!   regular, while the integral over half-shells `B̄_r \ B_{r/2}` converges.
//!
//! The series are evaluated from exponents in log form, since the radii
//! themselves leave the range of `f64` after a few terms.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::model::{dist, parse_expr, BallSequence, Expr, Exponents, SetDescriptor};
use crate::wiener::{certificate, classify_infinity, CapacityBackend, CriterionVariant, DomainSpec, Regularity};
use crate::model::Weight;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    SparseBalls,
    ClusteredBalls,
    /// `R^n \ B̄(0, radius)`
    ExcludedBall { radius: f64 },
    /// `{x_1 > 0}`
    HalfSpace,
    /// `R^n \ ∪_{j≥1} B̄((center(j), 0, ..., 0), radius(j))`
    BallChain { center: Expr, radius: Expr },
}

fn axis_sequence(center: Expr, radius: Expr, n: usize) -> SetDescriptor {
    let mut c = vec![Expr::lit(0.0); n];
    c[0] = center;
    SetDescriptor::SequenceUnion { seq: BallSequence { center: c, radius, start: 1 }, closed: true }
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::SparseBalls => "sparse-balls",
            Family::ClusteredBalls => "clustered-balls",
            Family::ExcludedBall { .. } => "excluded-ball",
            Family::HalfSpace => "half-space",
            Family::BallChain { .. } => "ball-chain",
        }
    }

    /// The family's domain in `R^n`.
    pub fn set(&self, n: usize) -> Result<SetDescriptor> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension {n} must be at least 2")));
        }
        let expr = |s: &str| parse_expr(s).map_err(|e| Error::InvalidParameter(e.to_string()));
        Ok(match self {
            Family::SparseBalls => axis_sequence(expr("0.75*pow2(4^j)")?, expr("pow2(-(8^j))")?, n).complement(),
            Family::ClusteredBalls => SetDescriptor::Union(vec![
                SetDescriptor::Origin,
                axis_sequence(expr("exp(-(2^j))")?, expr("exp(-(2^(j+1)))")?, n),
            ])
            .complement(),
            Family::ExcludedBall { radius } => SetDescriptor::closed_ball(vec![0.0; n], *radius)?.complement(),
            Family::HalfSpace => {
                let mut normal = vec![0.0; n];
                normal[0] = 1.0;
                SetDescriptor::HalfSpace { normal, offset: 0.0 }
            }
            Family::BallChain { center, radius } => axis_sequence(center.clone(), radius.clone(), n).complement(),
        })
    }

    pub fn domain(&self, n: usize) -> Result<DomainSpec> {
        Ok(DomainSpec { set: self.set(n)?, family: Some(self.clone()), inverted: false })
    }

    /// Membership from the defining formulas, without the set language.
    /// Sequence terms are checked for `j ≤ terms`.
    pub fn contains_direct(&self, x: &[f64], terms: i32) -> bool {
        let axis = |c: f64| {
            let mut v = vec![0.0; x.len()];
            v[0] = c;
            v
        };
        match self {
            Family::SparseBalls => (1..=terms).all(|j| {
                let c = 0.75 * 2f64.powf(4f64.powi(j));
                let r = 2f64.powf(-(8f64.powi(j)));
                !c.is_finite() || dist(x, &axis(c)) > r
            }),
            Family::ClusteredBalls => {
                x.iter().any(|&c| c != 0.0)
                    && (1..=terms).all(|j| {
                        let a = (-(2f64.powi(j))).exp();
                        let r = (-(2f64.powi(j + 1))).exp();
                        dist(x, &axis(a)) > r
                    })
            }
            Family::ExcludedBall { radius } => crate::model::norm(x) > *radius,
            Family::HalfSpace => x[0] > 0.0,
            Family::BallChain { center, radius } => (1..=terms).all(|j| {
                match (center.eval(j as f64), radius.eval(j as f64)) {
                    (Ok(c), Ok(r)) => dist(x, &axis(c)) > r,
                    _ => true,
                }
            }),
        }
    }

    /// Per-term `(lower, upper)` bounds of the family's Wiener series for
    /// `p = n = 2`, where one exists.
    pub fn per_term_bounds(&self, j: u32) -> Option<(f64, f64)> {
        match self {
            Family::SparseBalls if j >= 1 => Some((0.0, sparse_balls_term(j))),
            Family::ClusteredBalls if j >= 2 => Some((clustered_ball_lower_term(j), f64::INFINITY)),
            _ => None,
        }
    }
}

/// `j`-th term `(3/4) 4^j / 8^j`: the log-length `(4^j - 4^{j-1}) ln 2` of
/// the band `(2^{4^{j-1}}, 2^{4^j})` over `ln(1/r_j) = 8^j ln 2`.
fn sparse_balls_term(j: u32) -> f64 {
    let j = j as f64;
    let log_band = (0.75f64).ln() + j * 4f64.ln() + LN_2.ln();
    let log_denominator = j * 8f64.ln() + LN_2.ln();
    (log_band - log_denominator).exp()
}

/// Partial sum over `j ≤ big_j` of the sparse-ball series, in units of
/// `ω_{n-1}^{1/(n-1)}`: equals `(3/4)(1 - 2^{-J})`.
pub fn sparse_balls_upper_series(big_j: u32, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension {n} must be at least 2")));
    }
    Ok((1..=big_j).map(sparse_balls_term).fold(0.0, |a, t| a + t))
}

/// `j`-th half-shell term `ln(10/3) · 2π/(2^j - ln 2)`: the band
/// `[3α_j/4, 5α_j/2]` times `cap_2(B̄(x_j, α_{j+1}), B(x_j, α_j/2))`.
pub fn clustered_shell_term(j: u32) -> f64 {
    let j = j as f64;
    // 2π ln(10/3) 2^{-j} / (1 - ln 2 · 2^{-j})
    let s = (-j * LN_2).exp();
    (10.0f64 / 3.0).ln() * 2.0 * PI * s / (1.0 - LN_2 * s)
}

/// Upper bound for the half-shell integral of the clustered balls, `n = 2`.
pub fn clustered_shell_bound(big_j: u32) -> f64 {
    (1..=big_j).map(clustered_shell_term).fold(0.0, |a, t| a + t)
}

/// `j`-th ball term `2π 2^{j-1}/(ln 5 + 3·2^{j-1})`, `j ≥ 2`: the band
/// `[2α_j, 2α_{j-1}]` (log-length `2^{j-1}`) times
/// `cap_2(B̄(x_j, α_{j+1}), B(x_j, 5α_{j-1}))`.
pub fn clustered_ball_lower_term(j: u32) -> f64 {
    let s = (-(j as f64 - 1.0) * LN_2).exp();
    2.0 * PI / (3.0 + 5f64.ln() * s)
}

/// Lower bound for the ball integral of the clustered balls, `n = 2`.
pub fn clustered_ball_lower(big_j: u32) -> f64 {
    (2..=big_j).map(clustered_ball_lower_term).fold(0.0, |a, t| a + t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleCheck {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

/// Runs the classifier and series certificates on the registered families
/// and compares them with the known answers.
pub fn verify_example_verdicts() -> Result<Vec<ExampleCheck>> {
    let caps = CapacityBackend::without_grid();
    let mut out = Vec::new();
    let mut classify = |name: &str, fam: Family, n: usize, p: f64, want: Regularity| -> Result<()> {
        let exp = Exponents::new(n, p)?;
        let c = classify_infinity(&fam.domain(n)?, exp, &caps)?;
        out.push(ExampleCheck {
            name: format!("{name}, n = {n}, p = {p}"),
            expected: want.label().into(),
            got: format!("{} ({})", c.class.label(), c.certificate),
            pass: c.class == want,
        });
        Ok(())
    };
    classify("sparse balls", Family::SparseBalls, 2, 2.0, Regularity::Irregular)?;
    classify("excluded ball", Family::ExcludedBall { radius: 1.0 }, 2, 2.0, Regularity::Irregular)?;
    classify("excluded ball", Family::ExcludedBall { radius: 1.0 }, 2, 3.0, Regularity::Irregular)?;
    classify("half-space", Family::HalfSpace, 2, 3.0, Regularity::Regular)?;
    classify("sparse balls", Family::SparseBalls, 2, 3.0, Regularity::Regular)?;

    let exp = Exponents::new(2, 2.0)?;
    let dom = Family::ClusteredBalls.domain(2)?;
    let origin = vec![0.0, 0.0];
    let half = certificate(&CriterionVariant::AtPoint { x0: origin.clone(), weight: Weight::Constant, shell: Some(2.0) }, &dom, exp);
    let full = certificate(&CriterionVariant::classic(origin, Weight::Constant), &dom, exp);
    let pass = half.as_ref().is_some_and(|v| v.is_convergent()) && full.as_ref().is_some_and(|v| v.is_divergent());
    out.push(ExampleCheck {
        name: "clustered balls at the origin, half-shells vs balls".into(),
        expected: "half-shell integral convergent, ball integral divergent".into(),
        got: format!(
            "half-shell {}, ball {}",
            half.map_or("none", |v| v.label()),
            full.map_or("none", |v| v.label())
        ),
        pass,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sparse_series_closed_form() {
        assert_eq!(sparse_balls_upper_series(0, 2).unwrap(), 0.0);
        assert!((sparse_balls_upper_series(1, 2).unwrap() - 0.375).abs() < 1e-15);
        for big_j in 1..=40 {
            let want = 0.75 * (1.0 - 2f64.powi(-(big_j as i32)));
            assert!((sparse_balls_upper_series(big_j, 2).unwrap() - want).abs() < 1e-14);
        }
        assert!((sparse_balls_upper_series(20, 2).unwrap() - 0.75).abs() < 1e-6);
    }

    #[test]
    fn clustered_series() {
        // j = 2 ball term: 4π/(ln 5 + 6)
        assert!((clustered_ball_lower_term(2) - 4.0 * PI / (5f64.ln() + 6.0)).abs() < 1e-14);
        assert!((clustered_ball_lower_term(2) - 1.651).abs() < 1e-3);
        assert!(clustered_ball_lower(3) >= 1.0);
        let c = clustered_ball_lower_term(2);
        for big_j in 2..=30 {
            assert!(clustered_ball_lower(big_j) >= c * (big_j as f64 - 1.0) - 1e-12);
        }
        // the shell terms shrink geometrically with ratio tending to 1/2
        for j in 1..60 {
            let ratio = clustered_shell_term(j + 1) / clustered_shell_term(j);
            assert!(ratio <= 0.51, "{j}: {ratio}");
        }
        let c1 = clustered_shell_term(1) / 2f64.powi(-1);
        for big_j in 1..50 {
            let gap = clustered_shell_bound(200) - clustered_shell_bound(big_j);
            assert!(gap < 2f64.powi(-(big_j as i32)) * c1 * 1.01);
        }
    }

    #[test]
    fn band_geometry_of_clustered_balls() {
        // B̄(x_j, α_{j+1}) ⊂ B_{r/2} whenever r/2 > (5/4) α_j
        for j in 1..6 {
            let a = (-(2f64.powi(j))).exp();
            let a1 = a * a;
            assert!(1.25 * a > a + a1);
            assert!(0.75 * a < a - a1);
        }
    }

    #[test]
    fn registered_verdicts() {
        for check in verify_example_verdicts().unwrap() {
            assert!(check.pass, "{check:?}");
        }
    }

    #[test]
    fn membership_agrees_with_the_set_language() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fams = [
            (Family::SparseBalls, 20.0),
            (Family::ClusteredBalls, 0.2),
            (Family::ExcludedBall { radius: 1.0 }, 2.0),
            (Family::HalfSpace, 2.0),
        ];
        for (fam, scale) in fams {
            let s = fam.set(2).unwrap();
            let mut focus = vec![vec![0.0, 0.0]];
            if let Family::SparseBalls = fam {
                focus.push(vec![12.0, 0.0]);
            }
            if let Family::ClusteredBalls = fam {
                focus.push(vec![(-2f64).exp(), 0.0]);
                focus.push(vec![(-4f64).exp(), 0.0]);
            }
            for i in 0..1000 {
                let c = &focus[i % focus.len()];
                let spread = if i % 2 == 0 { scale } else { scale * 1e-3 };
                let x = [c[0] + spread * rng.gen_range(-1.0..1.0), c[1] + spread * rng.gen_range(-1.0..1.0)];
                assert_eq!(s.contains(&x, 8).unwrap(), fam.contains_direct(&x, 8), "{fam:?} at {x:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn sparse_partial_sums_stay_below_three_quarters(big_j in 0u32..200) {
            // up to rounding in the summation
            prop_assert!(sparse_balls_upper_series(big_j, 2).unwrap() <= 0.75 + 4.0 * f64::EPSILON);
        }
    }
}
