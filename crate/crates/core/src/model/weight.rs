use crate::error::{Error, Result};
use crate::model::exponents::unit_sphere_area;
use crate::model::geometry::norm;

/// Weight of the measure `w(x) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Constant,
    /// `|x|^delta`, radial about the origin.
    PowerAtOrigin { delta: f64 },
}

/// Value of a weight at a point; the origin is singular for negative powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightValue {
    Finite(f64),
    Singular,
}

impl Weight {
    pub fn power(delta: f64) -> Self {
        Weight::PowerAtOrigin { delta }
    }

    pub fn delta(&self) -> f64 {
        match self {
            Weight::Constant => 0.0,
            Weight::PowerAtOrigin { delta } => *delta,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> WeightValue {
        match *self {
            Weight::Constant => WeightValue::Finite(1.0),
            Weight::PowerAtOrigin { .. } => self.radial_value(norm(x)).map_or(WeightValue::Singular, WeightValue::Finite),
        }
    }

    /// `w` as a function of `|x|`; `None` at a singular origin.
    pub fn radial_value(&self, t: f64) -> Option<f64> {
        match *self {
            Weight::Constant => Some(1.0),
            Weight::PowerAtOrigin { delta } => {
                if delta == 0.0 {
                    Some(1.0)
                } else if t == 0.0 {
                    (delta > 0.0).then_some(0.0)
                } else {
                    Some(t.powf(delta))
                }
            }
        }
    }

    /// Finite value at `x`, replacing a singular origin by `+∞`.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        match self.evaluate(x) {
            WeightValue::Finite(v) => v,
            WeightValue::Singular => f64::INFINITY,
        }
    }
}

/// `w(B_r)` for the origin-centred ball: `ω_{n-1} r^{n+δ}/(n+δ)`.
pub fn weight_ball_mass(w: Weight, r: f64, n: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    let m = n as f64 + w.delta();
    if m <= 0.0 {
        return Err(Error::Domain(format!("n + δ = {m} ≤ 0: weight not locally integrable")));
    }
    Ok(unit_sphere_area(n) * r.powf(m) / m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_mass_is_disk_area() {
        assert!((weight_ball_mass(Weight::Constant, 1.0, 2).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn power_mass_matches_polar_quadrature() {
        // oracle: midpoint rule in polar coordinates of ∫_{B_1} |x|^2 dx
        let m = 20_000;
        let dt = 1.0 / m as f64;
        let quad: f64 = (0..m)
            .map(|i| {
                let t = (i as f64 + 0.5) * dt;
                2.0 * PI * t * t * t * dt
            })
            .sum();
        let exact = weight_ball_mass(Weight::power(2.0), 1.0, 2).unwrap();
        assert!((exact - PI / 2.0).abs() < 1e-15);
        assert!((quad - exact).abs() < 1e-8);
    }

    #[test]
    fn zero_power_degenerates_to_lebesgue() {
        for n in 2..6 {
            for r in [0.3, 1.0, 2.5] {
                let a = weight_ball_mass(Weight::power(0.0), r, n).unwrap();
                let b = weight_ball_mass(Weight::Constant, r, n).unwrap();
                assert!((a - b).abs() <= 1e-14 * b);
            }
        }
    }

    #[test]
    fn singular_origin() {
        assert_eq!(Weight::power(2.0).evaluate(&[0.0, 0.0]), WeightValue::Finite(0.0));
        assert_eq!(Weight::power(-1.0).evaluate(&[0.0, 0.0]), WeightValue::Singular);
        assert!(weight_ball_mass(Weight::power(-3.0), 1.0, 2).is_err());
    }
}
