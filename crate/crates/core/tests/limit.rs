use proptest::prelude::*;

use concentra::laplace::tube_masses;
use concentra::limit::{build_limit_measure, check_from_below, compute_point_weights, default_u_grid, LimitKind};
use concentra::problem::{builtin, Component, Domain, MinimalSetSpec, ScalarField};
use concentra::quadrature::integrate;
use concentra::GibbsFamily;

/// Zero on the unit circle and at (3, 0).
fn circle_and_point() -> GibbsFamily {
    let ell = ScalarField::new(2, "circle and point", |x: &[f64]| {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let q = (x[0] - 3.0).powi(2) + x[1] * x[1];
        0.5 * (r - 1.0).powi(2) * q
    });
    GibbsFamily::new(
        "circle_and_point",
        ell,
        ScalarField::constant(2, 1.0),
        MinimalSetSpec::new(vec![Component::sphere(vec![0.0, 0.0], 1.0), Component::point(vec![3.0, 0.0])]),
        0.4,
        Domain::new(vec![-2.5, -2.5], vec![4.0, 2.5]),
    )
    .unwrap()
}

/// `c(x − a)²(x − b)²` with reference `exp(s·x)`.
fn quartic_pair(a: f64, b: f64, c: f64, s: f64) -> GibbsFamily {
    let ell = ScalarField::new(1, "pair", move |x: &[f64]| c * (x[0] - a).powi(2) * (x[0] - b).powi(2));
    let eps = 0.25 * (b - a);
    GibbsFamily::new(
        "pair",
        ell,
        ScalarField::new(1, "tilt", move |x: &[f64]| (s * x[0]).exp()),
        MinimalSetSpec::new(vec![Component::point(vec![a]), Component::point(vec![b])]),
        eps,
        Domain::new(vec![a - 2.0], vec![b + 2.0]),
    )
    .unwrap()
}

#[test]
fn lower_dimensional_components_drop_out_of_the_limit() {
    let fam = circle_and_point();
    let limit = build_limit_measure(&fam).unwrap();
    assert!(matches!(limit.kind, LimitKind::SphereUniformLike(_)));
    assert_eq!(limit.kept, vec![0]);
    assert_eq!(limit.dropped, vec![1]);
    let ratio = |n: u64| {
        let m = tube_masses(&fam, n).unwrap();
        m.per_component[1] / m.per_component[0]
    };
    // the point carries n^{-1} mass against the circle's n^{-1/2}
    let (r2, r4) = (ratio(100), ratio(10_000));
    assert!(r4 < r2 / 5.0 && r4 < 0.01, "{r2} {r4}");
}

#[test]
fn symmetric_wells_hold_at_most_half_the_mass_each() {
    let fam = builtin::double_well_sym::<f64>();
    let f = |n: f64| move |x: f64| (-n * 0.5 * (x * x - 1.0).powi(2)).exp();
    for n in [10u64, 100, 1000] {
        let nf = n as f64;
        let total = integrate(f(nf), -8.0, 8.0, &[-1.0, 1.0]).unwrap();
        let ball = integrate(f(nf), 0.5, 1.5, &[1.0]).unwrap();
        assert!(ball / total <= 0.5 + 1e-12, "n={n}: {}", ball / total);
        let report = check_from_below(&fam, n, &default_u_grid(&fam)).unwrap();
        assert!(report.holds, "n={n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn point_weights_follow_reference_and_curvature(
        a in -1.0..0.0f64,
        gap in 0.5..2.0f64,
        c in 0.5..3.0f64,
        s in -1.0..1.0f64,
    ) {
        let b = a + gap;
        let fam = quartic_pair(a, b, c, s);
        let w = compute_point_weights(&fam).unwrap();
        let total: f64 = w.iter().map(|(_, v)| v).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        // equal curvatures 2c(b − a)², so the ratio is π₀(a)/π₀(b)
        prop_assert!((w[0].1 / w[1].1 - (s * (a - b)).exp()).abs() < 1e-6);
    }
}
