use super::*;
use crate::families::Family;
use crate::model::unit_sphere_area;
use proptest::prelude::*;

fn caps() -> CapacityBackend {
    CapacityBackend::without_grid()
}

fn half_plane() -> DomainSpec {
    Family::HalfSpace.domain(2).unwrap()
}

#[test]
fn whole_space_has_zero_integrand() {
    let dom = DomainSpec::new(SetDescriptor::WholeSpace);
    let exp = Exponents::new(2, 2.0).unwrap();
    let rep = wiener_partial_sum(&CriterionVariant::square_shell(), &dom, exp, 1.0, 100.0, 8, &caps()).unwrap();
    assert!(rep.samples.iter().all(|s| s.integrand == 0.0));
    assert_eq!(*rep.partial_sums.last().unwrap(), 0.0);
    assert!(dom.is_whole_space());
}

#[test]
fn whole_space_is_refused_by_the_classifier() {
    let dom = DomainSpec::new(SetDescriptor::WholeSpace);
    let exp = Exponents::new(2, 2.0).unwrap();
    assert!(matches!(classify_infinity(&dom, exp, &caps()), Err(Error::WholeSpaceRefused)));
}

#[test]
fn classifier_needs_p_at_least_n() {
    let exp = Exponents::new(3, 2.0).unwrap();
    assert!(classify_infinity(&Family::HalfSpace.domain(3).unwrap(), exp, &caps()).is_err());
}

#[test]
fn bounded_complement_gives_a_convergent_integral() {
    let dom = Family::ExcludedBall { radius: 1.0 }.domain(2).unwrap();
    let exp = Exponents::new(2, 2.0).unwrap();
    let rep = wiener_partial_sum(&CriterionVariant::square_shell(), &dom, exp, 1.0, 1e3, 8, &caps()).unwrap();
    assert!(rep.verdict.is_convergent());
    assert!(rep.samples[1..].iter().all(|s| s.integrand == 0.0));
    let c = classify_infinity(&dom, exp, &caps()).unwrap();
    assert_eq!(c.class, Regularity::Irregular);
    assert!(c.report.is_none());
}

#[test]
fn half_space_is_regular_for_p_above_n() {
    let exp = Exponents::new(2, 3.0).unwrap();
    let c = classify_infinity(&half_plane(), exp, &caps()).unwrap();
    assert_eq!(c.class, Regularity::Regular);
    assert!(c.certificate.contains("unbounded"));
}

#[test]
fn half_space_for_p_equal_n_stays_inconclusive() {
    let exp = Exponents::new(2, 2.0).unwrap();
    let c = classify_infinity(&half_plane(), exp, &caps()).unwrap();
    assert_eq!(c.class, Regularity::Inconclusive);
    let rep = c.report.unwrap();
    assert!(matches!(rep.verdict, Verdict::NumericTrend(_)));
    // the integrand is scale invariant, so the sums grow linearly in log r
    assert!(rep.trend > 0.1, "{}", rep.trend);
}

#[test]
fn sparse_ball_sums_stay_below_the_series_bound() {
    let dom = Family::SparseBalls.domain(2).unwrap();
    let exp = Exponents::new(2, 2.0).unwrap();
    let rep = wiener_partial_sum(&CriterionVariant::square_shell(), &dom, exp, 1.0, 1e3, 16, &caps()).unwrap();
    let last = *rep.partial_sums.last().unwrap();
    assert!(last > 0.0);
    assert!(last / (2.0 * std::f64::consts::PI) <= 0.75, "{last}");
    assert!(rep.verdict.is_convergent());
}

#[test]
fn isolated_point_has_zero_integrand() {
    let dom = DomainSpec::new(SetDescriptor::Origin.complement());
    let exp = Exponents::new(2, 2.0).unwrap();
    let rep = classic_wiener_at(&[0.0, 0.0], &dom, exp, Weight::Constant, 1e-3, 8, &caps()).unwrap();
    assert!(rep.samples.iter().all(|s| s.integrand == 0.0));
}

#[test]
fn half_plane_integrand_is_constant_in_r() {
    let exp = Exponents::new(2, 2.0).unwrap();
    let rep = classic_wiener_at(&[0.0, 0.0], &half_plane(), exp, Weight::Constant, 1e-4, 8, &caps()).unwrap();
    let first = rep.samples[0].integrand;
    assert!(first > 0.0);
    for s in &rep.samples {
        assert!((s.integrand - first).abs() <= 1e-9 * first, "{} vs {first}", s.integrand);
    }
}

#[test]
fn classic_integral_accepts_points_off_the_origin() {
    let dom = DomainSpec::new(SetDescriptor::ball(vec![0.0, 0.0], 1.0).unwrap());
    let exp = Exponents::new(2, 2.0).unwrap();
    let rep = classic_wiener_at(&[1.0, 0.0], &dom, exp, Weight::Constant, 1e-2, 8, &caps()).unwrap();
    assert!(rep.samples.iter().all(|s| s.integrand > 0.0));
    let weighted = classic_wiener_at(&[1.0, 0.0], &dom, exp, Weight::power(1.0), 1e-2, 8, &caps());
    assert!(matches!(weighted, Err(Error::Unsupported(_))));
}

#[test]
fn transformed_integrand_matches_the_shell_for_radial_domains() {
    let dom = Family::ExcludedBall { radius: 3.0 }.domain(2).unwrap();
    for p in [2.0, 3.0, 4.5] {
        let exp = Exponents::new(2, p).unwrap();
        for r in [1.0, 1.3, 1.7, 2.5] {
            for (inner, outer) in [(InnerShell::Square, OuterSet::Exponential), (InnerShell::Exponential, OuterSet::Exterior)] {
                let a = integrand_at(r, &CriterionVariant::Shell { inner, outer }, &dom, exp, &caps()).unwrap();
                let b = integrand_at(1.0 / r, &CriterionVariant::TransformedOrigin { inner, outer }, &dom, exp, &caps()).unwrap();
                assert_eq!(a.kind, EstimateKind::Exact);
                assert!((a.integrand - b.integrand).abs() <= 1e-9 * a.integrand.max(1e-300), "p {p} r {r}: {} vs {}", a.integrand, b.integrand);
            }
        }
    }
}

#[test]
fn ball_in_domain_is_exact_for_radial_domains() {
    // Ω = R^2 \ B̄_3, p = 3: for 2r < 3 the component of B_{2r} ∪ Ω holding B̄_r is B_{2r}
    let dom = Family::ExcludedBall { radius: 3.0 }.domain(2).unwrap();
    let exp = Exponents::new(2, 3.0).unwrap();
    let r: f64 = 1.2;
    let s = integrand_at(r, &CriterionVariant::BallInDomain, &dom, exp, &caps()).unwrap();
    assert_eq!(s.kind, EstimateKind::Exact);
    // radial oracle: ω (∫_r^{2r} t^{-1/2} dt)^{-2} = 2π / (2(√(2r) - √r))^2
    let want = unit_sphere_area(2) / (2.0 * ((2.0 * r).sqrt() - r.sqrt())).powi(2);
    assert!((s.capacity - want).abs() < 1e-9 * want, "{} vs {want}", s.capacity);
    // once B_{2r} swallows the complement, G = R^2 and cap(B̄_r, R^2) = 0 for 2 < 3
    let far = integrand_at(5.0, &CriterionVariant::BallInDomain, &dom, exp, &caps()).unwrap();
    assert_eq!(far.capacity, 0.0);
}

#[test]
fn invalid_sampling_parameters_are_rejected() {
    let exp = Exponents::new(2, 2.0).unwrap();
    let v = CriterionVariant::square_shell();
    assert!(matches!(wiener_partial_sum(&v, &half_plane(), exp, 1.0, 10.0, 3, &caps()), Err(Error::InvalidParameter(_))));
    assert!(matches!(wiener_partial_sum(&v, &half_plane(), exp, 10.0, 1.0, 8, &caps()), Err(Error::InvalidParameter(_))));
    assert!(variant_condenser(0.5, &v, &half_plane(), exp).is_err());
    assert!(variant_condenser(2.0, &CriterionVariant::classic(vec![0.0, 0.0], Weight::Constant), &half_plane(), exp).is_err());
    let wrong_dim = Family::HalfSpace.domain(3).unwrap();
    assert!(matches!(variant_condenser(2.0, &v, &wrong_dim, exp), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn log_nodes_cover_the_range() {
    let nodes = log_nodes(1.0, 1e3, 4);
    assert_eq!(nodes.len(), 13);
    assert_eq!(nodes[0], 1.0);
    assert_eq!(*nodes.last().unwrap(), 1e3);
    let down = log_nodes(1.0, 1e-2, 4);
    assert!(down.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn names_and_criteria() {
    assert_eq!(CriterionVariant::square_shell().name(), "square-shell");
    assert!(CriterionVariant::exponential_shell().is_criterion());
    assert!(!CriterionVariant::Shell { inner: InnerShell::Linear(2.0), outer: OuterSet::Exponential }.is_criterion());
    assert!(!CriterionVariant::AtPoint { x0: vec![0.0; 2], weight: Weight::Constant, shell: Some(2.0) }.is_criterion());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn partial_sums_are_monotone(radius in 0.5f64..20.0, p in 2.0f64..4.0, spd in 4usize..12) {
        let doms = [Family::ExcludedBall { radius }.domain(2).unwrap(), half_plane()];
        let exp = Exponents::new(2, p).unwrap();
        for dom in doms {
            let rep = wiener_partial_sum(&CriterionVariant::square_shell(), &dom, exp, 1.0, 1e3, spd, &caps()).unwrap();
            prop_assert!(rep.partial_sums.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(rep.samples.iter().all(|s| s.integrand >= 0.0 && s.integrand.is_finite()));
        }
    }
}
