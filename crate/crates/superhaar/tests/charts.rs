use num_complex::Complex64;
use proptest::prelude::*;
use superhaar::charts::*;
use superhaar::grassmann::{Coefficient, Gauss, GrassmannElement};
use superhaar::groups::{exact_sample, sample, sample_rng, torus_point, ClassicalPoint, GroupSpec};
use superhaar::matrix::Matrix;
use superhaar::supermatrix::{GMatrix, SuperMatrix};

fn exact_specs() -> Vec<GroupSpec> {
    vec![
        GroupSpec::osp(1, 1).unwrap(),
        GroupSpec::osp(2, 1).unwrap(),
        GroupSpec::osp(3, 1).unwrap(),
        GroupSpec::osp(1, 2).unwrap(),
        GroupSpec::unitary(1, 1).unwrap(),
        GroupSpec::unitary(2, 1).unwrap(),
        GroupSpec::unitary(1, 2).unwrap(),
        GroupSpec::uosp(1, 1).unwrap(),
        GroupSpec::uosp(2, 1).unwrap(),
    ]
}

fn exact_point(spec: &GroupSpec, index: u64) -> ClassicalPoint<Gauss> {
    exact_sample(spec, &mut sample_rng(17, index))
}

#[test]
fn zero_odd_part_gives_block_diagonal() {
    let spec = GroupSpec::osp(2, 1).unwrap();
    let g = exact_point(&spec, 0);
    let p = SuperPoint {
        x: GMatrix::from_scalars(&g.x, spec.generators),
        y: GMatrix::from_scalars(&g.y, spec.generators),
        odd: GMatrix::zeros(2, 2, spec.generators),
    };
    assert_eq!(embed(&spec, &p).unwrap(), classical_matrix(&g, spec.generators));
}

#[test]
fn embedded_points_satisfy_relations_exactly() {
    for spec in exact_specs() {
        for index in 0..3 {
            let p = SuperPoint::universal(&spec, &exact_point(&spec, index));
            let x = embed(&spec, &p).unwrap();
            let report = check_defining_relations(&spec, &x).unwrap();
            assert_eq!(report.max(), 0.0, "{spec}: {:?}", report.entries);
        }
    }
}

#[test]
fn torus_point_relations_hold_in_phase_ring() {
    let spec = GroupSpec::unitary(1, 1).unwrap();
    let p = SuperPoint::universal(&spec, &torus_point());
    let x = embed(&spec, &p).unwrap();
    assert_eq!(check_defining_relations(&spec, &x).unwrap().max(), 0.0);
    assert_eq!(check_antipode(&spec, &x).unwrap().max(), 0.0);
}

#[test]
fn unitary_one_one_chart_has_expected_entries() {
    let spec = GroupSpec::unitary(1, 1).unwrap();
    let p = SuperPoint::universal(&spec, &ClassicalPoint::<Gauss>::identity(&spec));
    let x = embed(&spec, &p).unwrap();
    let n = spec.generators;
    let i = GrassmannElement::scalar(n, Gauss::imag_unit());
    let psi =
        &GrassmannElement::<Gauss>::generator(n, 1).unwrap() + &(&i * &GrassmannElement::generator(n, 2).unwrap());
    let psi_bar =
        &GrassmannElement::<Gauss>::generator(n, 1).unwrap() - &(&i * &GrassmannElement::generator(n, 2).unwrap());
    let product = &(&i * &psi_bar) * &psi;
    let one = GrassmannElement::one(n);
    assert_eq!(x.get(0, 0), &(&one - &product.scale(&Gauss::ratio(1, 2))));
    assert_eq!(x.get(0, 1), &(&i * &psi_bar));
    assert_eq!(x.get(1, 0), &psi);
    assert_eq!(x.get(1, 1), &(&one + &product.scale(&Gauss::ratio(1, 2))));
}

#[test]
fn perturbation_is_detected() {
    let spec = GroupSpec::osp(1, 1).unwrap();
    let p = SuperPoint::universal(&spec, &ClassicalPoint::<Gauss>::identity(&spec));
    let x = embed(&spec, &p).unwrap();
    let mut entries = x.entries().clone();
    let theta = GrassmannElement::generator(2, 1).unwrap();
    entries.set(0, 1, &entries.get(0, 1).clone() + &theta);
    let bad = SuperMatrix::new(1, 2, entries).unwrap();
    assert!(check_defining_relations(&spec, &bad).unwrap().max() > 0.0);
    assert!(matches!(decompose(&spec, &bad, 1e-12), Err(ChartError::RelationsViolated(_))));
}

#[test]
fn decompose_round_trips_exactly() {
    for spec in exact_specs() {
        let p = SuperPoint::universal(&spec, &exact_point(&spec, 5));
        let x = embed(&spec, &p).unwrap();
        assert_eq!(decompose(&spec, &x, 0.0).unwrap(), p, "{spec}");
    }
}

#[test]
fn decompose_identity() {
    let spec = GroupSpec::uosp(2, 1).unwrap();
    let id = SuperMatrix::<Gauss>::identity(2, 2, spec.generators);
    let p = decompose(&spec, &id, 0.0).unwrap();
    assert_eq!(p.x, GMatrix::identity(2, spec.generators));
    assert_eq!(p.y, GMatrix::identity(2, spec.generators));
    assert_eq!(p.odd, GMatrix::zeros(2, 2, spec.generators));
}

#[test]
fn wrong_shapes_are_rejected() {
    let spec = GroupSpec::osp(2, 1).unwrap();
    let other = GroupSpec::osp(1, 1).unwrap();
    let p = SuperPoint::universal(&other, &ClassicalPoint::<Gauss>::identity(&other));
    assert!(matches!(embed(&spec, &p), Err(ChartError::Dimensions(_))));
}

#[test]
fn group_law_closes_exactly_over_doubled_algebra() {
    for spec in exact_specs().into_iter().filter(|s| s.generators <= 4) {
        let total = 2 * spec.generators;
        let p1 = SuperPoint::universal_in(&spec, &exact_point(&spec, 1), total, 0);
        let p2 = SuperPoint::universal_in(&spec, &exact_point(&spec, 2), total, spec.generators);
        let product = group_product(&embed(&spec, &p1).unwrap(), &embed(&spec, &p2).unwrap()).unwrap();
        assert_eq!(check_defining_relations(&spec, &product).unwrap().max(), 0.0, "{spec}");
        let point = decompose(&spec, &product, 0.0).unwrap();
        assert_eq!(embed(&spec, &point).unwrap(), product);
    }
}

#[test]
fn ungraded_product_violates_relations() {
    let spec = GroupSpec::osp(1, 1).unwrap();
    let id = ClassicalPoint::<Gauss>::identity(&spec);
    let p1 = SuperPoint::universal_in(&spec, &id, 4, 0);
    let p2 = SuperPoint::universal_in(&spec, &id, 4, 2);
    let plain = embed(&spec, &p1).unwrap().matmul(&embed(&spec, &p2).unwrap()).unwrap();
    assert!(check_defining_relations(&spec, &plain).unwrap().max() > 0.0);
}

#[test]
fn antipode_is_two_sided_inverse_and_involution() {
    for spec in exact_specs() {
        let x = embed(&spec, &SuperPoint::universal(&spec, &exact_point(&spec, 3))).unwrap();
        let report = check_antipode(&spec, &x).unwrap();
        assert_eq!(report.max(), 0.0, "{spec}: {:?}", report.entries);
        let id = SuperMatrix::<Gauss>::identity(spec.even_dim, spec.odd_dim, spec.generators);
        assert_eq!(antipode(&spec, &id).unwrap(), id);
    }
}

#[test]
fn left_translation_matches_block_product() {
    for spec in exact_specs() {
        let g = exact_point(&spec, 7);
        let p = SuperPoint::universal(&spec, &exact_point(&spec, 8));
        let moved = embed(&spec, &left_translate(&g, &p)).unwrap();
        let expected = classical_matrix(&g, spec.generators).matmul(&embed(&spec, &p).unwrap()).unwrap();
        assert_eq!(moved, expected, "{spec}");
        let id = ClassicalPoint::identity(&spec);
        assert_eq!(left_translate(&id, &p), p);
    }
}

#[test]
fn theta_hat_theta_is_invariant() {
    for spec in [GroupSpec::osp(2, 1).unwrap(), GroupSpec::osp(1, 2).unwrap(), GroupSpec::uosp(2, 1).unwrap()] {
        let p = SuperPoint::universal(&spec, &ClassicalPoint::<Gauss>::identity(&spec));
        let g = exact_point(&spec, 11);
        assert_eq!(theta_hat_theta(&left_translate(&g, &p).odd), theta_hat_theta(&p.odd));
    }
}

#[test]
fn uosp_coordinates_satisfy_reality_condition() {
    for spec in [GroupSpec::uosp(1, 1).unwrap(), GroupSpec::uosp(2, 2).unwrap()] {
        let theta = odd_coordinates::<Gauss>(&spec, spec.generators, 0);
        assert_eq!(uosp_reality_residual(&spec, &theta).unwrap(), 0.0);
    }
    let osp = GroupSpec::osp(1, 1).unwrap();
    let real_theta = odd_coordinates::<Gauss>(&osp, 2, 0);
    assert!(uosp_reality_residual(&GroupSpec::uosp(1, 1).unwrap(), &real_theta).unwrap() > 0.0);
}

#[test]
fn odd_coordinates_are_odd() {
    for spec in exact_specs() {
        let odd = odd_coordinates::<Gauss>(&spec, spec.generators, 0);
        assert!(odd.entries().iter().all(|e| e.is_odd() && !e.is_zero()));
    }
}

fn numeric_check(spec: &GroupSpec, seed: u64) {
    let g = sample(spec, &mut sample_rng(seed, 0));
    let h = sample(spec, &mut sample_rng(seed, 1));
    let total = 2 * spec.generators;
    let x1 = embed(spec, &SuperPoint::universal_in(spec, &g, total, 0)).unwrap();
    let x2 = embed(spec, &SuperPoint::universal_in(spec, &h, total, spec.generators)).unwrap();
    assert!(check_defining_relations(spec, &x1).unwrap().max() < 1e-10);
    assert!(check_antipode(spec, &x1).unwrap().max() < 1e-10);
    let product = group_product(&x1, &x2).unwrap();
    let point = decompose(spec, &product, 1e-10).unwrap();
    let back = embed(spec, &point).unwrap();
    assert!(back.sub(&product).unwrap().max_norm() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampled_points_satisfy_structure(seed in any::<u64>(), which in 0usize..6) {
        let specs = [
            GroupSpec::osp(1, 1).unwrap(),
            GroupSpec::osp(2, 1).unwrap(),
            GroupSpec::osp(3, 1).unwrap(),
            GroupSpec::unitary(1, 1).unwrap(),
            GroupSpec::unitary(2, 1).unwrap(),
            GroupSpec::uosp(2, 1).unwrap(),
        ];
        numeric_check(&specs[which], seed);
    }

    #[test]
    fn exact_round_trip_under_translation(seed in any::<u64>(), which in 0usize..9) {
        let spec = &exact_specs()[which];
        let g = exact_sample(spec, &mut sample_rng(seed, 0));
        let p = SuperPoint::universal(spec, &exact_sample(spec, &mut sample_rng(seed, 1)));
        let moved = left_translate(&g, &p);
        let x = embed(spec, &moved).unwrap();
        prop_assert_eq!(decompose(spec, &x, 0.0).unwrap(), moved);
    }
}

#[test]
fn float_chart_body_is_classical_point() {
    let spec = GroupSpec::unitary(2, 1).unwrap();
    let g = sample(&spec, &mut sample_rng(4, 0));
    let x = embed(&spec, &SuperPoint::universal(&spec, &g)).unwrap();
    let body: Matrix<Complex64> = x.entries().map(|e| e.body());
    for i in 0..2 {
        for j in 0..2 {
            assert!((body.get(i, j) - g.x.get(i, j)).norm() < 1e-14);
        }
    }
    assert!((body.get(2, 2) - g.y.get(0, 0)).norm() < 1e-14);
    assert!(body.get(0, 2).is_zero());
}

#[test]
fn random_algebra_points_close_under_group_law() {
    use superhaar::groups::GroupSpec as G;
    for spec in [G::osp(3, 2).unwrap(), G::osp(2, 2).unwrap(), G::unitary(2, 1).unwrap(), G::uosp(2, 2).unwrap()] {
        let mut rng = sample_rng(23, 0);
        let g = sample(&spec, &mut rng);
        let h = sample(&spec, &mut rng);
        let depth =
            if matches!(spec.kind, superhaar::groups::GroupKind::UnitaryOrthosymplectic { .. }) { 4 } else { 6 };
        let p1 = random_point(&spec, &g, depth, &mut rng);
        let p2 = random_point(&spec, &h, depth, &mut rng);
        if let superhaar::groups::GroupKind::UnitaryOrthosymplectic { .. } = spec.kind {
            assert!(uosp_reality_residual(&spec, &p1.odd).unwrap() < 1e-14);
        }
        let x1 = embed(&spec, &p1).unwrap();
        let x2 = embed(&spec, &p2).unwrap();
        assert!(check_defining_relations(&spec, &x1).unwrap().max() < 1e-10, "{spec}");
        assert!(check_antipode(&spec, &x1).unwrap().max() < 1e-10, "{spec}");
        let product = group_product(&x1, &x2).unwrap();
        let point = decompose(&spec, &product, 1e-10).unwrap();
        assert!(embed(&spec, &point).unwrap().sub(&product).unwrap().max_norm() < 1e-10);
    }
}
