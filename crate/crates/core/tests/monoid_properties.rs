use blue_core::arith::{Coeff, CoeffDomain};
use blue_core::monoid::{Monomial, MonoidPresentation};
use blue_core::verdict::{SearchBounds, Verdict};
use proptest::prelude::*;

fn bounds() -> SearchBounds {
    SearchBounds::default()
}

/// `F1[x,y,z]` with `x^2 = y^2` and `x*z = y*z`.
fn presentation() -> MonoidPresentation {
    let atoms = ["x", "y", "z"].map(String::from).to_vec();
    let free = MonoidPresentation::free(atoms.clone(), CoeffDomain::f1()).unwrap();
    let rels = [("x^2", "y^2"), ("x*z", "y*z")]
        .iter()
        .map(|(l, r)| (free.parse(l).unwrap(), free.parse(r).unwrap()))
        .collect();
    MonoidPresentation::new(atoms, rels, CoeffDomain::f1()).unwrap()
}

fn monomial() -> impl Strategy<Value = Monomial> {
    (0u32..3, 0u32..3, 0u32..3).prop_map(|(a, b, c)| {
        Monomial::from_exps([(0, a), (1, b), (2, c)].into_iter().filter(|(_, k)| *k > 0).collect())
    })
}

/// Pairs that are equal by construction: `u*x^2 ~ u*y^2` or `u*x*z ~ u*y*z`.
fn equal_pair() -> impl Strategy<Value = (Monomial, Monomial)> {
    (monomial(), any::<bool>()).prop_map(|(u, which)| {
        let p = presentation();
        let (l, r) = if which { ("x^2", "y^2") } else { ("x*z", "y*z") };
        (p.mul(&u, &p.parse(l).unwrap()), p.mul(&u, &p.parse(r).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equality_is_reflexive(a in monomial()) {
        let p = presentation();
        prop_assert!(p.eq(&a, &a, &bounds()).unwrap().is_proved());
    }

    #[test]
    fn equality_is_symmetric(a in monomial(), b in monomial()) {
        let p = presentation();
        prop_assert_eq!(p.equal(&a, &b, &bounds()), p.equal(&b, &a, &bounds()));
    }

    #[test]
    fn equality_is_transitive((a, b) in equal_pair(), c in monomial()) {
        let p = presentation();
        prop_assert_eq!(p.equal(&a, &b, &bounds()), Some(true));
        if p.equal(&b, &c, &bounds()) == Some(true) {
            prop_assert_eq!(p.equal(&a, &c, &bounds()), Some(true));
        }
        if p.equal(&a, &c, &bounds()) == Some(true) {
            prop_assert_eq!(p.equal(&b, &c, &bounds()), Some(true));
        }
    }

    #[test]
    fn equality_is_a_congruence((a, b) in equal_pair(), c in monomial()) {
        let p = presentation();
        let v = p.eq(&p.mul(&a, &c), &p.mul(&b, &c), &bounds()).unwrap();
        prop_assert!(matches!(v, Verdict::Proved(_)));
    }

    #[test]
    fn normalization_is_idempotent(a in monomial()) {
        let p = presentation();
        let n = p.normalize(&a);
        prop_assert_eq!(p.normalize(&n), n);
    }

    #[test]
    fn builtin_nat_matches_integer_arithmetic(a in 0u64..1000, b in 0u64..1000) {
        let nat = CoeffDomain::nat();
        let (ca, cb) = (Coeff::from_integer(a as i128), Coeff::from_integer(b as i128));
        prop_assert_eq!(nat.mul(&ca, &cb), nat.normalize(Coeff::from_integer((a * b) as i128)));
        prop_assert_eq!(nat.add(&ca, &cb), Some(Coeff::from_integer((a + b) as i128)));
        let p = MonoidPresentation::free(vec![], nat.clone()).unwrap();
        let product = p.mul(&Monomial::scalar(ca), &Monomial::scalar(cb));
        let expected = if a * b == 0 { Monomial::Zero } else { Monomial::scalar(Coeff::from_integer((a * b) as i128)) };
        prop_assert_eq!(p.normalize(&product), expected);
    }

    #[test]
    fn builtin_residues_match_integer_arithmetic(a in 0i128..500, b in 0i128..500, n in 2u64..30) {
        let dom = CoeffDomain::int_mod(n).unwrap();
        let prod = dom.mul(&Coeff::from_integer(a), &Coeff::from_integer(b));
        let expected = dom.normalize(Coeff::from_integer((a * b) % n as i128));
        prop_assert_eq!(prod, expected);
    }
}
