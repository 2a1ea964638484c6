//! Fixtures shared by the benchmarks in `benches/`.

use infreg_core::capacity::Grid;
use infreg_core::pde::DirichletProblem;
use infreg_core::{Condenser, Exponents, Result, SetDescriptor, Weight};

/// `(B̄_1, B_2)` in the plane.
pub fn disk_condenser() -> Condenser {
    Condenser::new(
        SetDescriptor::closed_ball(vec![0.0, 0.0], 1.0).expect("valid ball"),
        SetDescriptor::ball(vec![0.0, 0.0], 2.0).expect("valid ball"),
        Weight::Constant,
    )
}

/// Data 1 on `|x| = 1/4`, 0 on `|x| = 1`, on a `cells × cells` grid over `[-1, 1]²`.
pub fn annulus_problem(p: f64, cells: usize) -> Result<DirichletProblem> {
    let ring = SetDescriptor::annulus(2, 0.25, 1.0, false);
    let exp = Exponents::new(2, p)?;
    DirichletProblem::on_domain(&ring, Grid::centered(2, 1.0, cells)?, exp, Weight::Constant, |x| {
        f64::from(x[0].hypot(x[1]) <= 0.25)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert!(disk_condenser().k_radius().is_ok());
        assert!(annulus_problem(2.0, 16).is_ok());
    }
}
