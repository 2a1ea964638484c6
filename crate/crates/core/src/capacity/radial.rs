use crate::error::{Error, Result};
use crate::model::geometry::RadialSet;
use crate::model::{unit_sphere_area, Exponents, Weight};

/// `∫_a^b t^{-m/(p-1)} dt` with `m = n - 1 + δ`; infinite when the integral
/// diverges at either end.
pub fn radial_resistance(a: f64, b: f64, exp: Exponents, w: Weight) -> f64 {
    let p = exp.p();
    let m = exp.n() as f64 - 1.0 + w.delta();
    let beta = 1.0 - m / (p - 1.0);
    if a >= b {
        return 0.0;
    }
    if beta == 0.0 {
        return if a == 0.0 || b.is_infinite() { f64::INFINITY } else { (b / a).ln() };
    }
    if b.is_infinite() {
        return if beta > 0.0 { f64::INFINITY } else { -a.powf(beta) / beta };
    }
    if a == 0.0 {
        return if beta > 0.0 { b.powf(beta) / beta } else { f64::INFINITY };
    }
    // a^β (exp(β log(b/a)) - 1)/β, free of cancellation for small β
    a.powf(beta) * (beta * (b / a).ln()).exp_m1() / beta
}

/// Capacity of the radial condenser `(B̄_a, B_b)`, also valid for the shell
/// `{a < |x| < b}` with `u = 0` on the inner side, from the one-dimensional
/// Euler–Lagrange reduction: `ω_{n-1} (∫_a^b t^{-m/(p-1)} dt)^{1-p}`.
pub fn shell_capacity(a: f64, b: f64, exp: Exponents, w: Weight) -> f64 {
    let res = radial_resistance(a, b, exp, w);
    if res.is_infinite() {
        0.0
    } else {
        unit_sphere_area(exp.n()) * res.powf(1.0 - exp.p())
    }
}

/// `cap_{p,w}(B̄_r, B_R)` in closed form. `r = 0` (a point) and `R = ∞` are allowed.
pub fn radial_capacity_exact(r: f64, big_r: f64, exp: Exponents, w: Weight) -> Result<f64> {
    if !(r >= 0.0 && r < big_r) {
        return Err(Error::Domain(format!("radial condenser needs 0 ≤ r < R (got r = {r}, R = {big_r})")));
    }
    Ok(shell_capacity(r, big_r, exp, w))
}

/// Exact capacity of `(K, G)` for origin-centred radial sets. `K` must be
/// compact and contained in `G`.
pub fn radial_set_capacity(k: &RadialSet, g: &RadialSet, exp: Exponents, w: Weight) -> Result<f64> {
    if k.is_empty() {
        return Ok(0.0);
    }
    let (_, last) = k.hull().expect("nonempty");
    if !last.at.is_finite() || k.intervals.iter().any(|(a, b)| !a.closed || !b.closed) {
        return Err(Error::Geometry("K is not compact".into()));
    }
    let mut total = 0.0;
    let mut covered = 0;
    for (s, big_r) in &g.intervals {
        let inside: Vec<_> = k
            .intervals
            .iter()
            .filter(|(a, b)| {
                let lo_ok = a.at > s.at || (s.closed && a.at == s.at);
                let hi_ok = b.at < big_r.at || (big_r.closed && b.at == big_r.at);
                lo_ok && hi_ok
            })
            .collect();
        if inside.is_empty() {
            continue;
        }
        covered += inside.len();
        let a = inside.first().unwrap().0.at;
        let b = inside.last().unwrap().1.at;
        total += shell_capacity(b, big_r.at, exp, w);
        let contains_origin = s.at == 0.0 && s.closed;
        if !contains_origin {
            total += shell_capacity(s.at, a, exp, w);
        }
    }
    if covered != k.intervals.len() {
        return Err(Error::Geometry("K is not contained in G".into()));
    }
    Ok(total)
}
