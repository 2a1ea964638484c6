use proptest::prelude::*;

use infreg_cli::config::{BoundaryData, DomainConfig, ExampleName, Params, VariantName};
use infreg_cli::{parse_config, print_config, Command, JobConfig};
use infreg_core::{parse_expr, BallSequence, Exponents, Family, SetDescriptor, Weight};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3f64..1e3, (-300i32..300).prop_map(|e| 1.5 * 10f64.powi(e)), Just(0.0)]
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![1e-6f64..1e3, Just(0.5), Just(1e-300)]
}

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![Just("j".to_string()), (0u32..50).prop_map(|v| v.to_string()), Just("0.75".to_string())];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"])).prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            (inner.clone(), prop::sample::select(vec!["exp", "log", "pow2"])).prop_map(|(a, f)| format!("{f}({a})")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

fn set() -> impl Strategy<Value = SetDescriptor> {
    let v2 = || (finite(), finite()).prop_map(|(a, b)| vec![a, b]);
    let leaf = prop_oneof![
        Just(SetDescriptor::Origin),
        Just(SetDescriptor::WholeSpace),
        (v2(), positive()).prop_map(|(c, r)| SetDescriptor::ball(c, r).unwrap()),
        (v2(), positive()).prop_map(|(c, r)| SetDescriptor::closed_ball(c, r).unwrap()),
        (v2(), positive(), 1e-3f64..1e3, any::<bool>(), any::<bool>()).prop_map(|(center, a, b, inf, closed)| SetDescriptor::Annulus {
            center,
            inner: a,
            outer: if inf { f64::INFINITY } else { a + b },
            closed
        }),
        (v2(), finite()).prop_map(|(normal, offset)| SetDescriptor::HalfSpace { normal, offset }),
        (expr(), expr(), expr(), -3i64..3, any::<bool>()).prop_map(|(c1, c2, r, start, closed)| SetDescriptor::SequenceUnion {
            seq: BallSequence { center: vec![parse_expr(&c1).unwrap(), parse_expr(&c2).unwrap()], radius: parse_expr(&r).unwrap(), start },
            closed
        }),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(SetDescriptor::complement),
            prop::collection::vec(inner.clone(), 0..3).prop_map(SetDescriptor::Union),
            prop::collection::vec(inner, 0..3).prop_map(SetDescriptor::Intersection),
        ]
    })
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::SparseBalls),
        Just(Family::ClusteredBalls),
        Just(Family::HalfSpace),
        positive().prop_map(|radius| Family::ExcludedBall { radius }),
        (expr(), expr()).prop_map(|(c, r)| Family::BallChain { center: parse_expr(&c).unwrap(), radius: parse_expr(&r).unwrap() }),
    ]
}

fn params() -> impl Strategy<Value = Params> {
    let data = prop_oneof![
        finite().prop_map(BoundaryData::Constant),
        Just(BoundaryData::Coordinate(1)),
        positive().prop_map(BoundaryData::Step),
        positive().prop_map(BoundaryData::Bump),
    ];
    (
        (
            prop::option::of(prop::sample::select(vec![VariantName::Ball, VariantName::SquareShell, VariantName::ExpShell])),
            prop::option::of(positive()),
            prop::option::of(positive()),
            prop::option::of(4usize..64),
            prop::option::of(positive()),
            prop::option::of(positive()),
            prop::option::of(1usize..100_000),
            prop::option::of(any::<u64>()),
        ),
        (
            prop::option::of(positive()),
            prop::option::of(prop::sample::select(vec![ExampleName::SparseBalls, ExampleName::ClusteredBalls])),
            prop::option::of(0u32..100),
            prop::option::of(data),
            prop::option::of(positive()),
            prop::option::of(prop::collection::vec(positive(), 1..5)),
        ),
    )
        .prop_map(|((variant, r_min, r_max, spd, grid_h, tol, max_iter, seed), (radius, which, terms, data, half_width, probe_radii))| Params {
            variant,
            r_min,
            r_max,
            samples_per_decade: spd,
            grid_h,
            tol,
            max_iter,
            seed,
            point: None,
            radius,
            which,
            terms,
            data,
            half_width,
            probe_radii,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_configs_parse_back_to_themselves(
        p in 2.0f64..6.0,
        delta in finite(),
        domain in prop_oneof![set().prop_map(DomainConfig::Set), (family(), any::<bool>()).prop_map(|(family, inverted)| DomainConfig::Family { family, inverted })],
        k in set(),
        g in set(),
        params in params(),
    ) {
        // capacity needs no particular domain and skips the command-specific gates
        let cfg = JobConfig {
            command: Command::Capacity,
            exponents: Exponents::new(2, p).unwrap(),
            weight: Weight::power(delta),
            domain: Some(domain),
            k: Some(k),
            g: Some(g),
            params,
        };
        let text = print_config(&cfg);
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, cfg);
    }
}
