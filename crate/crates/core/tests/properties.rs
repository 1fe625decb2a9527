use planarlab_core::{binom_mod_p, is_planar, predicted_delta_degree, EquivTransform, Field, Poly};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_field() -> impl Strategy<Value = Field> {
    prop_oneof![
        Just((3u64, 1u32)),
        Just((5, 1)),
        Just((3, 2)),
        Just((7, 1)),
        Just((5, 2)),
        Just((3, 3)),
    ]
    .prop_map(|(p, r)| Field::new(p, r).unwrap())
}

fn poly_in(field: Field) -> impl Strategy<Value = Poly> {
    let q = field.q();
    proptest::collection::vec((0u64..3 * q as u64, 0..q), 0..6)
        .prop_map(move |terms| Poly::from_terms(&field, terms))
}

fn field_and_two_polys() -> impl Strategy<Value = (Field, Poly, Poly, u32)> {
    small_field().prop_flat_map(|f| {
        let q = f.q();
        (Just(f.clone()), poly_in(f.clone()), poly_in(f), 0..q)
    })
}

proptest! {
    #[test]
    fn delta_is_linear_in_f((field, f, g, a) in field_and_two_polys()) {
        let lhs = f.add(&g).unwrap().delta_enc(a);
        let rhs = f.delta_enc(a).add(&g.delta_enc(a)).unwrap();
        let (lhs, rhs) = (lhs.value_table(), rhs.value_table());
        prop_assert_eq!(lhs.values(), rhs.values());
        prop_assert_eq!(field.q(), f.field().q());
    }

    #[test]
    fn formal_delta_matches_value_delta((_field, f, _g, a) in field_and_two_polys()) {
        let formal = f.delta_enc(a).value_table();
        let pointwise = f.value_table().delta(a);
        prop_assert_eq!(formal.values(), pointwise.values());
    }

    #[test]
    fn reduction_preserves_function((_field, f, _g, _a) in field_and_two_polys()) {
        let r = f.reduce();
        prop_assert!(r.is_reduced());
        let (rt, ft) = (r.value_table(), f.value_table());
        prop_assert_eq!(rt.values(), ft.values());
    }

    #[test]
    fn display_round_trips((field, f, _g, _a) in field_and_two_polys()) {
        let back = Poly::parse(&f.to_string(), &field).unwrap();
        prop_assert_eq!(back.to_string(), f.to_string());
    }

    #[test]
    fn monomial_delta_degree(n in 1u64..125, a in 1u32..125) {
        let field = Field::new(5, 3).unwrap();
        let d = Poly::monomial(&field, 1, n).delta_enc(a);
        prop_assert_eq!(d.degree(), Some(predicted_delta_degree(n, 5)));
    }

    #[test]
    fn pascal_mod_p(n in 1u64..5000, k in 1u64..5000, pi in 0usize..4) {
        let p = [3u64, 5, 7, 11][pi];
        prop_assume!(k <= n);
        let lhs = binom_mod_p(n, k, p);
        let rhs = (binom_mod_p(n - 1, k - 1, p) + binom_mod_p(n - 1, k, p)) % p;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn transforms_keep_do_monomials_planar(seed in any::<u64>(), k in 0u32..2) {
        // x^2 and x^(3^2+1) = x^10 over GF(27): 3/gcd(3,k) odd for k ∈ {0, 2}
        let field = Field::new(3, 3).unwrap();
        let n = if k == 0 { 2 } else { 10 };
        let pi = Poly::monomial(&field, 1, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = EquivTransform::random(&field, &mut rng);
        prop_assert!(is_planar(&t.apply(&pi).unwrap()));
    }
}
