use concentra::experiments::fit_loglog;
use concentra::laplace::{
    intermediate_density, laplace_error_scan, normalizer_zn, psi_n, tubular_integral_check, zeta_n, IntermediateDensity,
    TubularFrame,
};
use concentra::limit::{build_limit_measure, default_u_grid};
use concentra::problem::{builtin, Component, Domain, MinimalSetSpec, ScalarField};
use concentra::GibbsFamily;
use concentra::quadrature::SphereRule;

fn quartic_point() -> GibbsFamily {
    let ell = ScalarField::new(1, "x^2/2+x^4", |x: &[f64]| 0.5 * x[0] * x[0] + x[0].powi(4));
    GibbsFamily::new(
        "quartic",
        ell,
        ScalarField::constant(1, 1.0),
        MinimalSetSpec::new(vec![Component::point(vec![0.0])]),
        0.5,
        Domain::cube(1, 3.0),
    )
    .unwrap()
}

fn tilted_volcano() -> GibbsFamily {
    builtin::volcano::<f64>(2)
        .unwrap()
        .with_reference(ScalarField::new(2, "tilt", |x: &[f64]| (0.8 * x[0]).exp()))
        .unwrap()
}

#[test]
fn second_slice_moment_of_a_quadratic_point() {
    let fam = builtin::normal1d::<f64>();
    let frame = TubularFrame::for_component(&fam, 0).unwrap();
    for n in [64u64, 256, 1024] {
        let want = std::f64::consts::TAU.sqrt() * (n as f64).powf(-1.5);
        let got = psi_n(&frame, &fam, n, 2, &[0.0]).unwrap();
        assert!((got / want - 1.0).abs() < 1e-9, "n={n}: {got} vs {want}");
    }
}

#[test]
fn scaled_slice_moments_decay_like_half_the_order() {
    let fam = builtin::volcano::<f64>(2).unwrap();
    let frame = TubularFrame::for_component(&fam, 0).unwrap();
    let u = [0.6, 0.8];
    for p in [2u32, 4] {
        let scaled: Vec<f64> = (0..6)
            .map(|k| {
                let n = 32u64 << k;
                let nf = n as f64;
                nf.sqrt() * psi_n(&frame, &fam, n, p, &u).unwrap() * nf.powf(p as f64 / 2.0)
            })
            .collect();
        let hi = scaled.iter().copied().fold(0.0, f64::max);
        let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 1.5, "p={p}: {scaled:?}");
    }
}

#[test]
fn tube_width_only_changes_the_exponentially_small_tail() {
    let wide = builtin::volcano::<f64>(2).unwrap();
    let narrow = wide.with_epsilon(0.25).unwrap();
    let n = 400u64;
    let a = tubular_integral_check(&TubularFrame::for_component(&wide, 0).unwrap(), &wide, n).unwrap();
    let b = tubular_integral_check(&TubularFrame::for_component(&narrow, 0).unwrap(), &narrow, n).unwrap();
    assert!(a.rel_diff <= 1e-6 && b.rel_diff <= 1e-6);
    let gap = (a.ambient - b.ambient) / a.ambient;
    let tail = (-(n as f64) * 0.25f64.powi(2) / 2.0).exp();
    assert!(gap > 0.0 && gap < tail, "{gap} vs {tail}");
}

#[test]
fn normalizer_scales_with_the_reference() {
    let fam = builtin::volcano::<f64>(2).unwrap();
    let tripled = fam.with_reference(ScalarField::constant(2, 3.0)).unwrap();
    let z = normalizer_zn(&fam, 100).unwrap().value;
    let z3 = normalizer_zn(&tripled, 100).unwrap().value;
    assert!((z3 / z - 3.0).abs() < 1e-8, "{}", z3 / z);
}

#[test]
fn scaled_normalizer_is_bounded_below() {
    let fam = builtin::volcano::<f64>(2).unwrap();
    // √n Zₙ → 2π √(2π)
    let limit = std::f64::consts::TAU * std::f64::consts::TAU.sqrt();
    for k in 0..7 {
        let n = 16u64 << k;
        let scaled = (n as f64).sqrt() * normalizer_zn(&fam, n).unwrap().value;
        assert!(scaled > 0.9 * limit, "n={n}: {scaled}");
    }
}

#[test]
fn intermediate_density_converges_at_the_laplace_rate() {
    let fam = tilted_volcano();
    let limit = build_limit_measure(&fam).unwrap();
    let grid = default_u_grid(&fam);
    let mut pairs = Vec::new();
    for k in 0..7 {
        let n = 10u64 << k;
        let g = IntermediateDensity::new(&fam, n).unwrap();
        let sup = grid
            .iter()
            .map(|u| (g.eval(&fam, u).unwrap() - limit.density_at(u).unwrap()).abs())
            .fold(0.0, f64::max);
        pairs.push((n as f64, sup));
    }
    assert!(pairs.windows(2).all(|w| w[1].1 < w[0].1), "{pairs:?}");
    let fit = fit_loglog(&pairs).unwrap();
    assert!(fit.slope <= -0.5, "slope {}", fit.slope);
    let tail = fit_loglog(&pairs[2..]).unwrap();
    assert!((tail.slope + 1.0).abs() < 0.1, "tail slope {}", tail.slope);
}

#[test]
fn intermediate_density_is_a_probability_density_on_the_circle() {
    let fam = tilted_volcano();
    let rule = SphereRule::new(&[0.0, 0.0], 1.0).unwrap();
    for n in [10u64, 1000] {
        let total: f64 = rule.integrate(|u| intermediate_density(&fam, n, u).unwrap());
        assert!((total - 1.0).abs() < 1e-8, "n={n}: {total}");
    }
}

#[test]
fn quartic_perturbation_has_first_order_laplace_error() {
    let fam = quartic_point();
    let frame = TubularFrame::for_component(&fam, 0).unwrap();
    let grid: Vec<u64> = (0..7).map(|k| 32u64 << k).collect();
    let scan = laplace_error_scan(&frame, &fam, &[0.0], &grid).unwrap();
    let last = *scan.ratios.last().unwrap();
    assert!((last - 0.5).abs() < 0.02, "{:?}", scan.ratios);
}

#[test]
fn volcano_in_three_dimensions_has_first_order_laplace_error() {
    // the Jacobian (1 + t)² carries an even t² term
    let fam = builtin::volcano::<f64>(3).unwrap();
    let frame = TubularFrame::for_component(&fam, 0).unwrap();
    let grid: Vec<u64> = (0..7).map(|k| 32u64 << k).collect();
    let scan = laplace_error_scan(&frame, &fam, &[0.0, 0.0, 1.0], &grid).unwrap();
    for r in &scan.ratios[2..] {
        assert!((0.35..=0.65).contains(r), "{:?}", scan.ratios);
    }
}

#[test]
fn antipodal_slices_of_the_volcano_agree() {
    let fam = builtin::volcano::<f64>(2).unwrap();
    let frame = TubularFrame::for_component(&fam, 0).unwrap();
    let a = zeta_n(&frame, &fam, 10, &[0.6, 0.8]).unwrap();
    let b = zeta_n(&frame, &fam, 10, &[-0.6, -0.8]).unwrap();
    assert!((a / b - 1.0).abs() <= 1e-10);
}
