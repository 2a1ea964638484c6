use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Dimension `n` and integrability exponent `p`, with the derived weight
/// exponent `delta = 2(p - n)` of the inverted problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    n: usize,
    p: f64,
}

impl Exponents {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} must be at least 2")));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParameter(format!("exponent p = {p} must be finite and > 1")));
        }
        Ok(Self { n, p })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Weight exponent of the inverted problem, `2(p - n)`.
    #[inline]
    pub fn delta(&self) -> f64 {
        2.0 * (self.p - self.n as f64)
    }

    /// The standing assumption for questions about the point at infinity.
    pub fn require_p_ge_n(&self) -> Result<()> {
        if self.p < self.n as f64 {
            Err(Error::InvalidParameter(format!(
                "requires p ≥ n (got p = {}, n = {})",
                self.p, self.n
            )))
        } else {
            Ok(())
        }
    }

    /// True when `p == n` exactly (the borderline conformal case).
    #[inline]
    pub fn is_conformal(&self) -> bool {
        self.p == self.n as f64
    }

    /// `1/(p-1)`, the power applied to Wiener integrands.
    #[inline]
    pub fn wiener_power(&self) -> f64 {
        1.0 / (self.p - 1.0)
    }
}

/// Surface area of the unit sphere in `R^n`, i.e. `ω_{n-1} = 2 π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    // Γ(n/2) by the half-integer recurrence; n ≥ 1 only.
    let half_gamma = |n: usize| -> f64 {
        if n % 2 == 0 {
            (1..n / 2).map(|k| k as f64).product::<f64>()
        } else {
            let mut g = PI.sqrt();
            let mut x = 0.5;
            while x < n as f64 / 2.0 - 0.25 {
                g *= x;
                x += 1.0;
            }
            g
        }
    };
    2.0 * PI.powf(n as f64 / 2.0) / half_gamma(n)
}

/// Lebesgue volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_sphere_area(n) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_is_derived() {
        let e = Exponents::new(2, 3.0).unwrap();
        assert_eq!(e.delta(), 2.0);
        let e = Exponents::new(3, 3.0).unwrap();
        assert_eq!(e.delta(), 0.0);
        assert!(e.is_conformal());
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(Exponents::new(1, 3.0).is_err());
        assert!(Exponents::new(2, 1.0).is_err());
        assert!(Exponents::new(2, f64::NAN).is_err());
        assert!(Exponents::new(2, 1.5).unwrap().require_p_ge_n().is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_ball_volume(5) - 8.0 * PI * PI / 15.0).abs() < 1e-13);
    }
}
