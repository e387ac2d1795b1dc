use std::sync::Arc;

use blue_core::arith::{Coeff, CoeffDomain};
use blue_core::blueprint::{blueprint_from_text, localize, Blueprint, BpRef};
use blue_core::conservativity::{check_conservative, check_witness, conservativity, ConservativeCertificate, WitnessKind};
use blue_core::module::{
    check_adjunction, free_module, is_module_iso, localize_module, module_from_text, split_tensor_element, tensor_modules,
    BlueModule,
};
use blue_core::monoid::Monomial;
use blue_core::verdict::{SearchBounds, Verdict};
use num_integer::Integer;
use proptest::prelude::*;

fn bounds() -> SearchBounds {
    SearchBounds::default()
}

fn scalar(n: i128) -> Monomial {
    Monomial::scalar(Coeff::from_integer(n))
}

fn nilpotent(k: u32) -> BpRef {
    Arc::new(blueprint_from_text(CoeffDomain::f1(), &["x"], &[&format!("x^{k} = 0")], &bounds()).unwrap())
}

/// Small modules over `F1[x]/(x^k = 0)`.
fn small_module(b: &BpRef, which: usize, tag: &str) -> BlueModule {
    let (p, q) = (format!("{tag}p"), format!("{tag}q"));
    match which {
        0 => free_module(b, &[&p]).unwrap(),
        1 => module_from_text(b, &[&p], &[&format!("x*{p} = *")], &bounds()).unwrap(),
        2 => module_from_text(b, &[&p, &q], &[&format!("x*{p} = {q}")], &bounds()).unwrap(),
        _ => module_from_text(b, &[&p, &q], &[&format!("x*{p} = x*{q}")], &bounds()).unwrap(),
    }
}

fn smooth_over(n: i128, primes: &[i128]) -> bool {
    let mut n = n;
    for p in primes {
        while n % p == 0 {
            n /= p;
        }
    }
    n == 1
}

/// Brute-force `h^n = x*a + y*b` over the naturals with `n <= 4`.
fn partition_exists(h: i128, a: i128, b: i128) -> bool {
    (0..=4u32).any(|n| {
        let t = h.pow(n);
        (0..=t / a).any(|x| (t - x * a) % b == 0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hom_tensor_adjunction(k in 2u32..4, i in 0usize..4, j in 0usize..4, l in 0usize..4) {
        let b = nilpotent(k);
        let (m, n, p) = (small_module(&b, i, "m"), small_module(&b, j, "n"), small_module(&b, l, "r"));
        let r = check_adjunction(&m, &n, &p, &bounds()).unwrap();
        prop_assert!(r.curry_is_bijective);
        prop_assert_eq!(r.tensor_homs, r.curried_homs);
    }

    #[test]
    fn tensor_elements_are_simple_tensors(k in 2u32..4, i in 0usize..4, j in 0usize..4) {
        let b = nilpotent(k);
        let (m, n) = (small_module(&b, i, "m"), small_module(&b, j, "n"));
        let mn = tensor_modules(&m, &n, &bounds()).unwrap();
        for e in mn.elements(500).unwrap().iter().filter(|e| !e.is_zero()) {
            let (a, c) = split_tensor_element(&m, &n, &mn, e).unwrap();
            let gen = a.exps().iter().find(|(x, _)| *x >= m.offset()).unwrap().0 - m.offset();
            let jdx = c.exps()[0].0 - n.offset();
            let coeff = Monomial::from_exps(a.exps().iter().filter(|(x, _)| *x < m.offset()).cloned().collect());
            let rebuilt = mn.act(&coeff, &mn.generator(gen as usize * n.rank() + jdx as usize));
            prop_assert_eq!(mn.eq_elements(&rebuilt, e, &bounds()), Some(true));
        }
    }

    #[test]
    fn nat_covers_have_replayable_scaling_witnesses(a in 2i128..=50, b in 2i128..=50) {
        prop_assume!(a != b && a.gcd(&b) == 1);
        let nat: BpRef = Arc::new(Blueprint::builtin(CoeffDomain::nat()));
        let hs = [scalar(a), scalar(b)];
        let w = conservativity(&nat, &hs, &bounds()).refuted().unwrap();
        prop_assert_eq!(w.kind, WitnessKind::Scaling);
        prop_assert!(check_witness(&nat, &w, &bounds()));
        let (_, _, f) = w.instantiate(&nat, &bounds()).unwrap();
        prop_assert!(f.validate(&bounds()).is_proved());
        prop_assert!(is_module_iso(&f, &bounds()).is_refuted());
        for h in &hs {
            let (ms, phi) = localize_module(&f.source, std::slice::from_ref(h), &bounds()).unwrap();
            let (mt, _) = localize_module(&f.target, std::slice::from_ref(h), &bounds()).unwrap();
            let fh = blue_core::module::base_change_morphism(&f, &phi, &ms, &mt).unwrap();
            prop_assert!(is_module_iso(&fh, &bounds()).is_proved());
        }
    }

    #[test]
    fn nat_sixth_covers_match_partitions(a in 2i128..=50, b in 2i128..=50) {
        let nat: BpRef = Arc::new(Blueprint::builtin(CoeffDomain::nat()));
        let (base, _) = localize(&nat, &[scalar(6)], &bounds()).unwrap();
        let hs = [scalar(a), scalar(b)];
        match conservativity(&base, &hs, &bounds()) {
            Verdict::Proved(cert) => {
                prop_assert!(check_conservative(&base, &hs, &cert, &bounds()));
                if let ConservativeCertificate::Partition(p) = &cert {
                    let h: i128 = p.h.parse().unwrap();
                    let c: Vec<i128> = p.coefficients.iter().map(|s| s.parse().unwrap()).collect();
                    prop_assert_eq!(h.pow(p.n), c[0] * a + c[1] * b);
                }
            }
            Verdict::Refuted(w) => {
                prop_assert!(!smooth_over(a, &[2, 3]) && !smooth_over(b, &[2, 3]));
                prop_assert!(!partition_exists(6, a, b));
                prop_assert!(check_witness(&base, &w, &bounds()));
            }
            Verdict::Unknown(e) => prop_assert!(false, "unknown: {}", e.detail),
        }
        if smooth_over(a, &[2, 3]) || smooth_over(b, &[2, 3]) || partition_exists(6, a, b) {
            prop_assert!(conservativity(&base, &hs, &bounds()).is_proved());
        }
    }
}
