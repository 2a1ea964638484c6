use crate::capacity::grid::Grid;
use crate::capacity::radial::shell_capacity;
use crate::capacity::solver::{minimize, DiscreteProblem, SolveOptions};
use crate::capacity::{grid_capacity_auto, CapacityEstimate};
use crate::error::{Error, Result};
use crate::inversion::invert_set;
use crate::model::{Condenser, Exponents, SetDescriptor, Weight};

/// Allowed numerical slack when comparing two grid capacities.
pub const COMPARISON_SLACK: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Both sides of `cap(K, B_{2r} \ B̄_s) ≤ cap(K, B_{2r}) + cap(B̄_s, B_t)`
/// for `0 < s < t < r` and `K ⊂ B̄_r \ B_t`.
#[allow(clippy::too_many_arguments)]
pub fn annulus_split_bound(
    k: &SetDescriptor,
    s: f64,
    t: f64,
    r: f64,
    exp: Exponents,
    w: Weight,
    h: f64,
    opts: &SolveOptions,
) -> Result<SplitBound> {
    if !(0.0 < s && s < t && t < r) {
        return Err(Error::Domain(format!("need 0 < s < t < r (got {s}, {t}, {r})")));
    }
    let n = exp.n();
    let gap = shell_capacity(s, t, exp, w);
    if k.is_empty_union() {
        return Ok(SplitBound { lhs: 0.0, rhs: gap, holds: true });
    }
    let outer = SetDescriptor::ball(vec![0.0; n], 2.0 * r)?;
    let holed = SetDescriptor::annulus(n, s, 2.0 * r, false);
    let lhs = grid_capacity_auto(&Condenser::new(k.clone(), holed, w), exp, h, opts)?.value;
    let first = grid_capacity_auto(&Condenser::new(k.clone(), outer, w), exp, h, opts)?.value;
    let rhs = first + gap;
    Ok(SplitBound { lhs, rhs, holds: lhs <= rhs * (1.0 + COMPARISON_SLACK) })
}

/// `r^{n-1}` for `p = n` and `2^{(n-p)/r}` for `p > n`.
pub fn linear_shell_profile(r: f64, exp: Exponents) -> Result<f64> {
    exp.require_p_ge_n()?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("r = {r} must lie in (0, 1]")));
    }
    let n = exp.n() as f64;
    Ok(if exp.is_conformal() { r.powf(n - 1.0) } else { 2f64.powf((n - exp.p()) / r) })
}

/// `∫_0^1 (f(r)/r^{p-n})^{1/(p-1)} dr/r` by Simpson's rule in `log r` on
/// `[ε, 1]`, with a rigorous bound for the omitted piece `(0, ε)`.
/// Returns `(quadrature, tail_bound)`.
pub fn linear_shell_profile_integral(exp: Exponents) -> Result<(f64, f64)> {
    exp.require_p_ge_n()?;
    let (n, p) = (exp.n() as f64, exp.p());
    let phi = |r: f64| -> Result<f64> { Ok((linear_shell_profile(r, exp)? / r.powf(p - n)).powf(1.0 / (p - 1.0)) / r) };
    let (eps, tail) = if exp.is_conformal() {
        let eps = 1e-6;
        (eps, eps)
    } else {
        // r ↦ 2^{-a/r} r^{-a-1} increases on (0, a ln2/(a+1)]
        let a = (p - n) / (p - 1.0);
        let eps = (a * std::f64::consts::LN_2 / (a + 1.0)).min(1e-2);
        (eps, eps * phi(eps)?)
    };
    let m = 4000;
    let (t0, t1) = (eps.ln(), 0.0);
    let dt = (t1 - t0) / m as f64;
    let mut sum = 0.0;
    for i in 0..=m {
        let t = t0 + i as f64 * dt;
        let r = t.exp().min(1.0);
        let c = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += c * phi(r)? * r;
    }
    Ok((sum * dt / 3.0, tail))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub side_a: CapacityEstimate,
    pub side_b: CapacityEstimate,
    pub ratio: f64,
}

fn diameter(s: &SetDescriptor, n: usize) -> Result<f64> {
    let (lo, hi) = s.bounding_box(n).ok_or_else(|| Error::Geometry("set has no bounding box".into()))?;
    Ok(lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max))
}

/// Unweighted `cap_p(K, G)` against `cap_{p,w}(T(K), T(G))` with
/// `w = |ξ|^{2(p-n)}`, each on a grid with `cells` spacings across its outer set.
pub fn duality_check(k: &SetDescriptor, g: &SetDescriptor, exp: Exponents, cells: usize, opts: &SolveOptions) -> Result<DualityReport> {
    let n = exp.n();
    let tk = invert_set(k)?;
    let tg = invert_set(g)?;
    let w = Weight::power(exp.delta());
    let side_a = if k.is_empty_union() {
        CapacityEstimate::exact(0.0)
    } else {
        grid_capacity_auto(&Condenser::new(k.clone(), g.clone(), Weight::Constant), exp, diameter(g, n)? / cells as f64, opts)?
    };
    let side_b = if k.is_empty_union() {
        CapacityEstimate::exact(0.0)
    } else {
        grid_capacity_auto(&Condenser::new(tk, tg.clone(), w), exp, diameter(&tg, n)? / cells as f64, opts)?
    };
    let ratio = if side_a.value == 0.0 && side_b.value == 0.0 { 1.0 } else { side_a.value / side_b.value };
    Ok(DualityReport { side_a, side_b, ratio })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareEstimate {
    /// Candidate for the best constant `c` in `∫|u|^p w ≤ c r^p ∫|∇u|^p w`.
    pub constant: f64,
    /// Smallest Rayleigh quotient found.
    pub quotient: f64,
    pub outer_iterations: usize,
}

/// Best Poincaré constant on the ball inscribed in `[-r, r]^n`, from inverse
/// power iteration on the discrete p-Laplacian with `cells` spacings across
/// the box.
pub fn poincare_constant_estimate(exp: Exponents, w: Weight, r: f64, cells: usize, opts: &SolveOptions) -> Result<PoincareEstimate> {
    let n = exp.n();
    let p = exp.p();
    let grid = Grid::centered(n, r, cells)?;
    let nn = grid.node_count();
    let mut x = vec![0.0; n];
    let mut free = vec![false; nn];
    let mut mass = vec![0.0; nn];
    let mut u = vec![0.0; nn];
    let vol = grid.h.powi(n as i32);
    for i in 0..nn {
        grid.coords(i, &mut x);
        let s: f64 = x.iter().map(|c| c * c).sum();
        if s < r * r {
            free[i] = true;
            mass[i] = vol * w.value(&x).min(f64::MAX);
            u[i] = r * r - s;
        }
    }
    let norm_p = |u: &[f64]| -> f64 { u.iter().zip(&mass).map(|(a, m)| m * a.abs().powf(p)).sum() };
    let mut prob = DiscreteProblem { grid, free, values: u.clone(), weight: w, p, rhs: None };
    let mut quotient = f64::INFINITY;
    for it in 1..=200 {
        let s = norm_p(&u).powf(1.0 / p);
        u.iter_mut().for_each(|v| *v /= s);
        let rhs: Vec<f64> = u.iter().zip(&mass).map(|(a, m)| p * m * a.abs().powf(p - 2.0) * a).collect();
        prob.rhs = Some(rhs);
        // the solution is close to u / λ^{1/(p-1)}; start there
        let guess = if quotient.is_finite() { quotient.powf(-1.0 / (p - 1.0)) } else { 1.0 };
        prob.values = u.iter().map(|a| a * guess).collect();
        let sol = minimize(&prob, opts)?;
        let q = sol.energy / norm_p(&sol.u);
        u = sol.u;
        let settled = (quotient - q).abs() <= 1e-7 * q;
        quotient = quotient.min(q);
        if settled {
            return Ok(PoincareEstimate { constant: 1.0 / (r.powf(p) * quotient), quotient, outer_iterations: it });
        }
    }
    Err(Error::NotConverged { iterations: 200, last_decrease: f64::NAN })
}

/// `2^p + 4^p c_{p,w}/(b-a)^p`.
pub fn sandwich_constant(a: f64, b: f64, exp: Exponents, c_pw: f64) -> Result<f64> {
    if !(0.0 < a && a < b && b <= 1.0) {
        return Err(Error::Domain(format!("need 0 < a < b ≤ 1 (got a = {a}, b = {b})")));
    }
    if !(c_pw > 0.0) {
        return Err(Error::Domain(format!("Poincaré constant {c_pw} must be positive")));
    }
    let p = exp.p();
    Ok(2f64.powf(p) + 4f64.powf(p) * c_pw / (b - a).powf(p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    /// `cap(K, B_{2r})`
    pub low: f64,
    /// `cap(K, B_{2r} \ B̄_{ar})`
    pub mid: f64,
    /// `c · cap(K, B_{2r})`
    pub high: f64,
    pub holds: bool,
}

/// Checks `cap(K, B_{2r}) ≤ cap(K, B_{2r} \ B̄_{ar}) ≤ c cap(K, B_{2r})` for
/// `K = E ∩ (B̄_r \ B_{br})`.
#[allow(clippy::too_many_arguments)]
pub fn excision_sandwich(
    e: &SetDescriptor,
    r: f64,
    a: f64,
    b: f64,
    exp: Exponents,
    w: Weight,
    c_pw: f64,
    h: f64,
    opts: &SolveOptions,
) -> Result<SandwichReport> {
    let c = sandwich_constant(a, b, exp, c_pw)?;
    let n = exp.n();
    let k = SetDescriptor::Intersection(vec![e.clone(), SetDescriptor::annulus(n, b * r, r, true)]);
    let outer = SetDescriptor::ball(vec![0.0; n], 2.0 * r)?;
    let holed = SetDescriptor::annulus(n, a * r, 2.0 * r, false);
    let low = grid_capacity_auto(&Condenser::new(k.clone(), outer, w), exp, h, opts)?.value;
    let mid = grid_capacity_auto(&Condenser::new(k, holed, w), exp, h, opts)?.value;
    let high = c * low;
    let slack = 1.0 + COMPARISON_SLACK;
    Ok(SandwichReport { low, mid, high, holds: low <= mid * slack && mid <= high * slack })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_shell_profile_values() {
        let e = Exponents::new(2, 2.0).unwrap();
        assert_eq!(linear_shell_profile(0.5, e).unwrap(), 0.5);
        let e3 = Exponents::new(2, 3.0).unwrap();
        assert_eq!(linear_shell_profile(0.5, e3).unwrap(), 0.25);
        assert!(linear_shell_profile(0.0, e).is_err());
        assert!(linear_shell_profile(0.5, Exponents::new(3, 2.0).unwrap()).is_err());
        // for p = n, f(r)/r^{p-n} = r^{n-1} vanishes at 0
        let e4 = Exponents::new(4, 4.0).unwrap();
        assert!(linear_shell_profile(1e-3, e4).unwrap() < 1e-8);
    }

    #[test]
    fn linear_shell_integral_is_finite() {
        let (v, tail) = linear_shell_profile_integral(Exponents::new(2, 2.0).unwrap()).unwrap();
        assert!((v + tail - 1.0).abs() < 1e-9);
        let (v, tail) = linear_shell_profile_integral(Exponents::new(2, 3.0).unwrap()).unwrap();
        assert!(v.is_finite() && v > 0.0 && tail < 1e-6 * v);
    }

    #[test]
    fn sandwich_constant_values() {
        let e = Exponents::new(2, 2.0).unwrap();
        assert!((sandwich_constant(0.25, 0.5, e, 0.2).unwrap() - 55.2).abs() < 1e-12);
        assert!(sandwich_constant(0.5, 0.5, e, 0.2).is_err());
        assert!(sandwich_constant(0.5 - 1e-12, 0.5, e, 0.2).unwrap() > 1e20);
    }

    #[test]
    fn split_bound_degenerate_cases() {
        let e = Exponents::new(2, 2.0).unwrap();
        let opts = SolveOptions::default();
        let empty = annulus_split_bound(&SetDescriptor::empty(), 0.25, 0.5, 1.0, e, Weight::Constant, 0.05, &opts).unwrap();
        assert!(empty.holds && empty.lhs == 0.0);
        // as s approaches t the gap term blows up like (log(t/s))^{1-n}
        let g1 = shell_capacity(0.49, 0.5, e, Weight::Constant);
        let g2 = shell_capacity(0.499, 0.5, e, Weight::Constant);
        assert!(g2 > 9.0 * g1);
    }

    #[test]
    fn poincare_scale_invariance() {
        let e = Exponents::new(2, 2.0).unwrap();
        let opts = SolveOptions::default();
        let a = poincare_constant_estimate(e, Weight::Constant, 1.0, 24, &opts).unwrap();
        let b = poincare_constant_estimate(e, Weight::Constant, 2.0, 24, &opts).unwrap();
        assert!((a.constant / b.constant - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_duality() {
        let e = Exponents::new(2, 2.0).unwrap();
        let g = SetDescriptor::ball(vec![3.0, 0.0], 1.0).unwrap();
        let r = duality_check(&SetDescriptor::empty(), &g, e, 64, &SolveOptions::default()).unwrap();
        assert_eq!((r.side_a.value, r.side_b.value, r.ratio), (0.0, 0.0, 1.0));
    }
}
