use num_complex::Complex64;
use proptest::prelude::*;
use superhaar::grassmann::{
    Coefficient, Conjugation, ExactElement, Gauss, GrassmannElement, GrassmannError, Parity, Series,
};

fn theta(n: usize, i: usize) -> ExactElement {
    GrassmannElement::generator(n, i).unwrap()
}

fn int(v: i64) -> Gauss {
    Gauss::from_i64(v)
}

fn constant(n: usize, v: i64) -> ExactElement {
    GrassmannElement::scalar(n, int(v))
}

/// Blade product via explicit index lists and a bubble-sort transposition count.
fn oracle_blade_product(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut seq: Vec<usize> = a.iter().chain(b).copied().collect();
    let mut sign = 1;
    for i in 0..seq.len() {
        for j in 0..seq.len() - 1 - i {
            if seq[j] == seq[j + 1] {
                return None;
            }
            if seq[j] > seq[j + 1] {
                seq.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if seq.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((seq, sign))
}

fn indices(blade: u64) -> Vec<usize> {
    (0..64).filter(|k| blade >> k & 1 == 1).map(|k| k + 1).collect()
}

fn blade_element(n: usize, blade: u64) -> ExactElement {
    GrassmannElement::monomial(n, blade, Gauss::one())
}

#[test]
fn generator_products() {
    let (t1, t2) = (theta(2, 1), theta(2, 2));
    assert_eq!((&t1 * &t2).terms(), &[(0b11, int(1))]);
    assert_eq!((&t2 * &t1).terms(), &[(0b11, int(-1))]);
    assert!((&t1 * &t1).is_zero());
}

#[test]
fn generator_index_errors() {
    assert!(matches!(ExactElement::generator(2, 3), Err(GrassmannError::IndexOutOfRange { .. })));
    assert!(ExactElement::generator(2, 0).is_err());
}

#[test]
fn mixed_generator_counts_are_rejected() {
    let a = theta(2, 1);
    let b = theta(3, 1);
    assert!(matches!(a.try_mul(&b), Err(GrassmannError::MismatchedGenerators { .. })));
}

#[test]
fn product_examples() {
    let n = 4;
    let one = constant(n, 1);
    let lhs = &(&one + &theta(n, 1)) * &(&one + &theta(n, 2));
    let expected = &(&(&one + &theta(n, 1)) + &theta(n, 2)) + &(&theta(n, 1) * &theta(n, 2));
    assert_eq!(lhs, expected);

    let t12 = &theta(n, 1) * &theta(n, 2);
    let t34 = &theta(n, 3) * &theta(n, 4);
    assert_eq!((&t12 * &t34).terms(), &[(0b1111, int(1))]);

    let t23 = &theta(n, 2) * &theta(n, 3);
    assert_eq!((&theta(n, 1) * &t23).terms(), &[(0b111, int(1))]);
    assert_eq!((&t23 * &theta(n, 1)).terms(), &[(0b111, int(1))]);
}

#[test]
fn blade_products_match_transposition_oracle_exhaustively() {
    for n in 0..=4usize {
        let blades = 1u64 << n;
        for a in 0..blades {
            for b in 0..blades {
                let product = &blade_element(n, a) * &blade_element(n, b);
                match oracle_blade_product(&indices(a), &indices(b)) {
                    None => assert!(product.is_zero()),
                    Some((seq, sign)) => {
                        let blade: u64 = seq.iter().map(|i| 1u64 << (i - 1)).sum();
                        assert_eq!(product.terms(), &[(blade, int(sign))]);
                    }
                }
            }
        }
    }
}

#[test]
fn associativity_and_supercommutativity_exhaustive() {
    for n in 0..=4usize {
        let blades = 1u64 << n;
        for a in 0..blades {
            let ea = blade_element(n, a);
            for b in 0..blades {
                let eb = blade_element(n, b);
                let sign = if a.count_ones() % 2 == 1 && b.count_ones() % 2 == 1 { -1 } else { 1 };
                assert_eq!(&ea * &eb, (&eb * &ea).scale(&int(sign)));
                for c in 0..blades {
                    let ec = blade_element(n, c);
                    assert_eq!(&(&ea * &eb) * &ec, &ea * &(&eb * &ec));
                }
            }
        }
    }
}

#[test]
fn partial_examples() {
    let t12 = &theta(2, 1) * &theta(2, 2);
    assert_eq!(t12.partial(1).unwrap(), theta(2, 2));
    assert_eq!(t12.partial(2).unwrap(), -&theta(2, 1));
    assert!(theta(2, 1).partial(2).unwrap().is_zero());
    assert!(t12.partial(3).is_err());
}

#[test]
fn body_examples() {
    let n = 2;
    let f = &constant(n, 3) + &(&theta(n, 1) * &theta(n, 2));
    assert_eq!(f.body(), int(3));
    assert_eq!(theta(n, 1).body(), int(0));
}

#[test]
fn parity_classification() {
    let n = 3;
    assert_eq!(theta(n, 1).parity(), Parity::Odd);
    assert_eq!(constant(n, 2).parity(), Parity::Even);
    assert_eq!((&constant(n, 1) + &theta(n, 2)).parity(), Parity::Mixed);
}

#[test]
fn series_examples() {
    let n = 2;
    let t12 = &theta(n, 1) * &theta(n, 2);
    let f = &constant(n, 1) + &t12;
    let half = Gauss::ratio(1, 2);
    assert_eq!(f.sqrt().unwrap(), &constant(n, 1) + &t12.scale(&half));
    let g = &constant(n, 1) - &t12;
    assert_eq!(g.inverse().unwrap(), f);
    assert_eq!(theta(n, 1).sqrt(), Err(GrassmannError::NotEven));
    assert_eq!(t12.inverse(), Err(GrassmannError::NonInvertibleBody));
    assert_eq!(constant(n, -4).sqrt(), Err(GrassmannError::NegativeBody));
}

#[test]
fn berezin_examples() {
    let t12 = &theta(2, 1) * &theta(2, 2);
    assert_eq!(t12.berezin(&[2, 1]).unwrap(), int(1));
    assert_eq!(t12.berezin(&[1, 2]).unwrap(), int(-1));
    assert_eq!(constant(2, 1).berezin(&[1, 2]).unwrap(), int(0));
    assert_eq!(t12.berezin(&[1, 1]), Err(GrassmannError::NotAPermutation));
}

#[test]
fn berezin_of_osp12_density_kernel() {
    // θ² = 2θ₁θ₂; (1 − θ²)^{−1/2} = 1 + θ₁θ₂, whose top coefficient under ∂₂∂₁ is 1.
    let n = 2;
    let theta_sq = (&theta(n, 1) * &theta(n, 2)).scale(&int(2));
    let base = &constant(n, 1) - &theta_sq;
    let density = base.sqrt().unwrap().inverse().unwrap();
    assert_eq!(density, &constant(n, 1) + &(&theta(n, 1) * &theta(n, 2)));
    assert_eq!(density.berezin(&[2, 1]).unwrap(), int(1));
}

#[test]
fn conjugation_examples() {
    let n = 2;
    let i = Gauss::imag_unit();
    let f = theta(n, 1).scale(&i);
    assert_eq!(f.conjugate(&Conjugation::RealGenerators).unwrap(), theta(n, 1).scale(&-i.clone()));

    let psi = &theta(n, 1) + &theta(n, 2).scale(&i);
    let psi_bar = psi.conjugate(&Conjugation::RealGenerators).unwrap();
    let value = (&psi_bar * &psi).scale(&i);
    assert_eq!(value, (&theta(n, 1) * &theta(n, 2)).scale(&int(-2)));

    let second = Conjugation::adjacent_pairs(2);
    let alpha = theta(n, 1);
    let alpha_bar = alpha.conjugate(&second).unwrap();
    assert_eq!(alpha_bar, theta(n, 2));
    assert_eq!(alpha_bar.conjugate(&second).unwrap(), -&alpha);
    let product = &alpha * &alpha_bar;
    assert_eq!(product.conjugate(&second).unwrap(), product);
}

#[test]
fn second_kind_requires_pairs() {
    let conv = Conjugation::SecondKind(vec![(1, 2)]);
    assert_eq!(theta(3, 1).conjugate(&conv), Err(GrassmannError::UnpairedConjugation(3)));
}

#[test]
fn json_round_trip_exact_and_float() {
    let n = 5;
    let f = &(&constant(n, 7) + &(&theta(n, 2) * &theta(n, 5)).scale(&Gauss::ratio(-3, 11)))
        + &theta(n, 4).scale(&Gauss::imag_unit());
    let text = serde_json::to_string(&f.to_json()).unwrap();
    let back = ExactElement::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, f);
    assert!(text.contains("\"blade\":[2,5]"));

    let g = f.map_coefficients(|c| c.to_c64() * Complex64::new(0.1, 1.0 / 3.0));
    let text = serde_json::to_string(&g.to_json()).unwrap();
    let back = GrassmannElement::<Complex64>::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, g);
}

#[test]
fn dense_tables_are_bounded() {
    let f = ExactElement::zero(25);
    assert_eq!(f.to_dense(), Err(GrassmannError::DenseTooLarge(25)));
    let g = &constant(3, 2) + &theta(3, 3);
    assert_eq!(ExactElement::from_dense(3, &g.to_dense().unwrap()).unwrap(), g);
}

fn small_int() -> impl Strategy<Value = i64> {
    -3i64..=3
}

fn element(n: usize, parity: Option<bool>) -> impl Strategy<Value = ExactElement> {
    let blades = 1u64 << n;
    prop::collection::vec((0..blades, small_int()), 0..8).prop_map(move |terms| {
        let terms = terms
            .into_iter()
            .filter(|(b, _)| parity.is_none_or(|odd| (b.count_ones() % 2 == 1) == odd))
            .map(|(b, v)| (b, Gauss::from_i64(v)));
        GrassmannElement::from_terms(n, terms.collect::<Vec<_>>()).unwrap()
    })
}

fn even_with_unit_body(n: usize) -> impl Strategy<Value = ExactElement> {
    element(n, Some(false)).prop_map(move |f| &f.soul() + &GrassmannElement::one(n))
}

fn even_with_body(n: usize) -> impl Strategy<Value = ExactElement> {
    (element(n, Some(false)), 1i64..5, -2i64..3).prop_map(move |(f, num, im)| {
        let body = Gauss::ratio(num, 1) + Gauss::imag_unit() * Gauss::ratio(im, 1);
        &f.soul() + &GrassmannElement::scalar(n, body)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn leibniz_rule(
        (f, g, odd_f) in (1usize..=12).prop_flat_map(|n| any::<bool>()
            .prop_flat_map(move |odd| (element(n, Some(odd)), element(n, None), Just(odd))))
    ) {
        let n = f.num_generators();
        let sign = if odd_f { int(-1) } else { int(1) };
        for i in 1..=n {
            let lhs = (&f * &g).partial(i).unwrap();
            let rhs = &(&f.partial(i).unwrap() * &g) + &(&f * &g.partial(i).unwrap()).scale(&sign);
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn partial_derivatives_anticommute(f in (1usize..=8).prop_flat_map(|n| element(n, None))) {
        let n = f.num_generators();
        for i in 1..=n {
            for j in 1..=n {
                let ij = f.partial(j).unwrap().partial(i).unwrap();
                let ji = f.partial(i).unwrap().partial(j).unwrap();
                prop_assert_eq!(ij, -&ji);
            }
        }
    }

    #[test]
    fn berezin_kills_derivatives(f in (1usize..=8).prop_flat_map(|n| element(n, None)), rev in any::<bool>()) {
        let n = f.num_generators();
        let order: Vec<usize> = if rev { (1..=n).rev().collect() } else { (1..=n).collect() };
        for i in 1..=n {
            prop_assert!(f.partial(i).unwrap().berezin(&order).unwrap().is_zero());
        }
    }

    #[test]
    fn associativity_random(
        (a, b, c) in (5usize..=12).prop_flat_map(|n| (element(n, None), element(n, None), element(n, None)))
    ) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn supercommutativity_random(
        (a, b, pa, pb) in (5usize..=12).prop_flat_map(|n| (any::<bool>(), any::<bool>())
            .prop_flat_map(move |(pa, pb)| (element(n, Some(pa)), element(n, Some(pb)), Just(pa), Just(pb))))
    ) {
        let sign = if pa && pb { int(-1) } else { int(1) };
        prop_assert_eq!(&a * &b, (&b * &a).scale(&sign));
    }

    #[test]
    fn sqrt_squares_back(f in (1usize..=12).prop_flat_map(even_with_unit_body)) {
        let root = f.sqrt().unwrap();
        prop_assert_eq!(&root * &root, f);
    }

    #[test]
    fn inverse_round_trip(f in (1usize..=12).prop_flat_map(even_with_body)) {
        let inv = f.inverse().unwrap();
        prop_assert_eq!(&inv * &f, GrassmannElement::one(f.num_generators()));
    }

    #[test]
    fn exp_log_round_trip(f in (1usize..=8).prop_flat_map(even_with_unit_body)) {
        prop_assert_eq!(f.log().unwrap().exp().unwrap(), f.clone());
        prop_assert_eq!(f.nilpotent_series(Series::Log).unwrap().nilpotent_series(Series::Exp).unwrap(), f);
    }

    #[test]
    fn body_is_a_ring_morphism(
        (f, g) in (1usize..=8).prop_flat_map(|n| (element(n, None), element(n, None)))
    ) {
        prop_assert_eq!((&f + &g).body(), f.body() + g.body());
        prop_assert_eq!((&f * &g).body(), f.body() * g.body());
    }

    #[test]
    fn real_generator_conjugation_is_involutive_morphism(
        (f, g) in (1usize..=6).prop_flat_map(|n| (element(n, None), element(n, None)))
    ) {
        let c = Conjugation::RealGenerators;
        let fi = f.scale(&Gauss::imag_unit());
        prop_assert_eq!(fi.conjugate(&c).unwrap().conjugate(&c).unwrap(), fi.clone());
        prop_assert_eq!(
            (&fi * &g).conjugate(&c).unwrap(),
            &fi.conjugate(&c).unwrap() * &g.conjugate(&c).unwrap()
        );
    }

    #[test]
    fn second_kind_conjugation_is_multiplicative(
        (f, g) in (1usize..=3).prop_flat_map(|k| (element(2 * k, None), element(2 * k, None)))
    ) {
        let c = Conjugation::adjacent_pairs(f.num_generators());
        prop_assert_eq!(
            (&f * &g).conjugate(&c).unwrap(),
            &f.conjugate(&c).unwrap() * &g.conjugate(&c).unwrap()
        );
        let even = f.graded_part(false);
        prop_assert_eq!(even.conjugate(&c).unwrap().conjugate(&c).unwrap(), even);
        let odd = f.graded_part(true);
        prop_assert_eq!(odd.conjugate(&c).unwrap().conjugate(&c).unwrap(), -&odd);
    }
}
