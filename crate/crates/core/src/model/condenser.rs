use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::geometry::{dist, SetDescriptor};
use crate::model::weight::Weight;

/// A compact set `K` inside an open set `G`, with the weight of the energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Condenser {
    pub k: SetDescriptor,
    pub g: SetDescriptor,
    pub weight: Weight,
}

impl Condenser {
    pub fn new(k: SetDescriptor, g: SetDescriptor, weight: Weight) -> Self {
        Self { k, g, weight }
    }

    /// Radius of a ball about the origin containing `K`.
    pub fn k_radius(&self) -> Result<f64> {
        self.k
            .bounding_radius()
            .ok_or_else(|| Error::Geometry("compact set K has no computable bounding radius".into()))
    }

    /// Checks `K ⊂ G`: exactly for a ball inside a ball, otherwise by sampling
    /// `samples` points of the bounding box of `K`.
    pub fn check_containment(&self, n: usize, samples: usize, seed: u64, trunc: usize) -> Result<()> {
        use SetDescriptor::*;
        if let (Ball(k) | ClosedBall(k), Ball(g)) = (&self.k, &self.g) {
            return if dist(&k.center, &g.center) + k.radius < g.radius {
                Ok(())
            } else {
                Err(Error::Geometry("K is not contained in G".into()))
            };
        }
        let r = self.k_radius()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = vec![0.0; n];
        for _ in 0..samples {
            for c in x.iter_mut() {
                *c = rng.gen_range(-r..=r);
            }
            if self.k.contains(&x, trunc)? && !self.g.contains(&x, trunc)? {
                return Err(Error::Geometry(format!("sample {x:?} lies in K but not in G")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_pair_containment() {
        let k = SetDescriptor::closed_ball(vec![3.0, 0.0], 0.5).unwrap();
        let g = SetDescriptor::ball(vec![3.0, 0.0], 1.0).unwrap();
        assert!(Condenser::new(k.clone(), g.clone(), Weight::Constant).check_containment(2, 100, 0, 1).is_ok());
        assert!(Condenser::new(g, k, Weight::Constant).check_containment(2, 100, 0, 1).is_err());
    }

    #[test]
    fn sampled_containment() {
        let k = SetDescriptor::annulus(2, 1.0, 2.0, true);
        let g = SetDescriptor::annulus(2, 0.5, 4.0, false);
        let c = Condenser::new(k.clone(), g, Weight::Constant);
        assert!(c.check_containment(2, 2000, 7, 1).is_ok());
        let bad = Condenser::new(k, SetDescriptor::ball(vec![0.0, 0.0], 1.5).unwrap(), Weight::Constant);
        assert!(bad.check_containment(2, 2000, 7, 1).is_err());
    }
}
