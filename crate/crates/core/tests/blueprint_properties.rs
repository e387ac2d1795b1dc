use std::sync::Arc;

use blue_core::arith::CoeffDomain;
use blue_core::blueprint::{
    blueprint_from_text, localization_map, localize, make_blueprint, related, tensor_blueprints, tensor_universal_map,
    unit_inverse, BlueprintMorphism, BpRef,
};
use blue_core::corpus::{bex, nat};
use blue_core::monoid::Monomial;
use blue_core::sum::FormalSum;
use blue_core::verdict::SearchBounds;
use proptest::prelude::*;

fn bounds() -> SearchBounds {
    SearchBounds::default()
}

fn bp(atoms: &[&str], rels: &[&str]) -> BpRef {
    Arc::new(blueprint_from_text(CoeffDomain::f1(), atoms, rels, &bounds()).unwrap())
}

fn bex_monomial() -> impl Strategy<Value = Monomial> {
    prop::sample::select(vec!["1", "a", "b", "g", "h", "a*b", "a*g", "b*h", "g*h", "a^2"])
        .prop_map(|s| bex().parse(s).unwrap())
}

fn sum_of(b: &BpRef, terms: &[Monomial]) -> FormalSum {
    FormalSum::new(terms.to_vec()).normalize(&b.monoid)
}

/// `c*(g+h) + u` and `c + u`, related through `g + h = 1`.
fn related_pair() -> impl Strategy<Value = (Monomial, Option<Monomial>)> {
    (bex_monomial(), prop::option::of(bex_monomial()))
}

fn build(b: &BpRef, c: &Monomial, u: &Option<Monomial>, times: usize) -> FormalSum {
    let (g, h) = (b.parse("g").unwrap(), b.parse("h").unwrap());
    let mut s = FormalSum::single(c.clone());
    for _ in 0..times {
        let mut next = Vec::new();
        for t in s.terms() {
            next.push(b.mul(t, &g));
            next.push(b.mul(t, &h));
        }
        s = sum_of(b, &next);
    }
    match u {
        Some(u) => s.plus(&FormalSum::single(u.clone()), &b.monoid),
        None => s,
    }
}

/// Distinct elements of a finite blueprint.
fn elements(t: &BpRef) -> Vec<Monomial> {
    let mut out = vec![Monomial::Zero];
    for m in t.monoid.enumerate(&t.monoid.all_atoms(), 8) {
        let m = t.normalize(&m);
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

/// Every assignment of atoms to elements that is a morphism.
fn all_morphisms(s: &BpRef, t: &BpRef) -> Vec<BlueprintMorphism> {
    let elems = elements(t);
    let n = s.atoms().len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let images = idx.iter().map(|i| elems[*i].clone()).collect();
        if let Ok(f) = BlueprintMorphism::new(s.clone(), t.clone(), images) {
            if f.validate(&bounds()).is_proved() {
                out.push(f);
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            idx[k] += 1;
            if idx[k] < elems.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Finite targets with at most eight elements.
fn finite_target(kind: usize, n: u32) -> BpRef {
    match kind {
        0 => bp(&["u"], &[&format!("u^{n} = 1")]),
        1 => bp(&["u"], &[&format!("u^{n} = 0")]),
        _ => bp(&["u", "v"], &["u*v = 1", &format!("u^{} = 1", n.min(3))]),
    }
}

/// Algebras over `D = F1[x]` for the tensor tests.
fn algebra(k: usize) -> (BpRef, BlueprintMorphism) {
    let d = bp(&["x"], &[]);
    let b = match k {
        0 => bp(&["x", "y"], &[]),
        1 => return localize(&d, &[d.parse("x").unwrap()], &bounds()).unwrap(),
        2 => bp(&["x", "z"], &["x*z = x"]),
        _ => bp(&["x", "w"], &["x + w = 1"]),
    };
    let f = BlueprintMorphism::new(d, b.clone(), vec![b.parse("x").unwrap()]).unwrap();
    (b, f)
}

fn assert_iso(f: &BlueprintMorphism, g: &BlueprintMorphism) -> Result<(), TestCaseError> {
    prop_assert!(f.validate(&bounds()).is_proved());
    prop_assert!(g.validate(&bounds()).is_proved());
    prop_assert_eq!(f.then(g).is_identity_on_atoms(&bounds()), Some(true));
    prop_assert_eq!(g.then(f).is_identity_on_atoms(&bounds()), Some(true));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn related_is_an_equivalence_and_a_congruence((c, u) in related_pair(), v in bex_monomial(), d in bex_monomial()) {
        let b = bex();
        let s = build(&b, &c, &u, 1);
        let t = build(&b, &c, &u, 0);
        let w = build(&b, &c, &u, 2);
        prop_assert!(related(&b, &s, &s, &bounds()).is_proved());
        prop_assert!(related(&b, &s, &t, &bounds()).is_proved());
        prop_assert!(related(&b, &t, &s, &bounds()).is_proved());
        prop_assert!(related(&b, &s, &w, &bounds()).is_proved());
        prop_assert!(related(&b, &t, &w, &bounds()).is_proved());
        let v = FormalSum::single(v);
        prop_assert!(related(&b, &s.plus(&v, &b.monoid), &t.plus(&v, &b.monoid), &bounds()).is_proved());
        prop_assert!(related(&b, &s.scale(&d, &b.monoid), &t.scale(&d, &b.monoid), &bounds()).is_proved());
    }

    #[test]
    fn proper_quotient_is_idempotent(k in 0usize..5) {
        let b = match k {
            0 => bex(),
            1 => bp(&["x"], &["x^3 = 0"]),
            2 => bp(&["x", "y", "z"], &["x + y = 1", "x + y = z"]),
            3 => localize(&nat(), &[nat().parse("6").unwrap()], &bounds()).unwrap().0,
            _ => localize(&bex(), &[bex().parse("g").unwrap()], &bounds()).unwrap().0,
        };
        let again = make_blueprint(b.monoid.clone(), b.generators.clone(), &bounds()).unwrap();
        prop_assert_eq!(&again.monoid.relations, &b.monoid.relations);
        prop_assert_eq!(&again.generators, &b.generators);
    }

    #[test]
    fn localization_factors_uniquely(kind in 0usize..3, n in 1u32..8, pick in 0usize..8) {
        let x = bp(&["x"], &[]);
        let (l, canon) = localize(&x, &[x.parse("x").unwrap()], &bounds()).unwrap();
        let t = finite_target(kind, n);
        let elems = elements(&t);
        prop_assume!(elems.len() <= 8);
        let image = elems[pick % elems.len()].clone();
        let f = BlueprintMorphism::new(x.clone(), t.clone(), vec![image.clone()]).unwrap();
        let factors: Vec<BlueprintMorphism> = all_morphisms(&l, &t)
            .into_iter()
            .filter(|h| canon.then(h).agrees_with(&f, &bounds()) == Some(true))
            .collect();
        if unit_inverse(&t, &image, &bounds()).is_some() {
            let fact = localization_map(&l, &f, &bounds()).unwrap();
            prop_assert!(fact.validate(&bounds()).is_proved());
            prop_assert_eq!(canon.then(&fact).agrees_with(&f, &bounds()), Some(true));
            prop_assert_eq!(factors.len(), 1);
            prop_assert_eq!(factors[0].agrees_with(&fact, &bounds()), Some(true));
        } else {
            prop_assert!(factors.is_empty());
        }
    }

    #[test]
    fn localizations_are_epimorphisms(kind in 0usize..3, n in 1u32..8) {
        let b = bp(&["x", "y"], &[]);
        let (l, canon) = localize(&b, &[b.parse("x").unwrap()], &bounds()).unwrap();
        let t = finite_target(kind, n);
        prop_assume!(elements(&t).len() <= 8);
        let homs = all_morphisms(&l, &t);
        for (i, p) in homs.iter().enumerate() {
            for q in &homs[i + 1..] {
                if canon.then(p).agrees_with(&canon.then(q), &bounds()) == Some(true) {
                    prop_assert_eq!(p.agrees_with(q, &bounds()), Some(true));
                }
            }
        }
    }

    #[test]
    fn tensor_is_commutative(i in 0usize..4, j in 0usize..4) {
        let ((_, fb), (_, fc)) = (algebra(i), algebra(j));
        let bc = tensor_blueprints(&fb, &fc, &bounds()).unwrap();
        let cb = tensor_blueprints(&fc, &fb, &bounds()).unwrap();
        let there = tensor_universal_map(&bc, &cb.right, &cb.left, &bounds()).unwrap().proved().unwrap();
        let back = tensor_universal_map(&cb, &bc.right, &bc.left, &bounds()).unwrap().proved().unwrap();
        assert_iso(&there, &back)?;
    }

    #[test]
    fn tensor_is_associative(i in 0usize..4, j in 0usize..4, k in 0usize..4) {
        let ((_, fb), (_, fc), (_, fe)) = (algebra(i), algebra(j), algebra(k));
        let bc = tensor_blueprints(&fb, &fc, &bounds()).unwrap();
        let left = tensor_blueprints(&fb.then(&bc.left), &fe, &bounds()).unwrap();
        let ce = tensor_blueprints(&fc, &fe, &bounds()).unwrap();
        let right = tensor_blueprints(&fb, &fc.then(&ce.left), &bounds()).unwrap();
        let into_right = tensor_universal_map(&bc, &right.left, &ce.left.then(&right.right), &bounds()).unwrap().proved().unwrap();
        let there = tensor_universal_map(&left, &into_right, &ce.right.then(&right.right), &bounds()).unwrap().proved().unwrap();
        let into_left = tensor_universal_map(&ce, &bc.right.then(&left.left), &left.right, &bounds()).unwrap().proved().unwrap();
        let back = tensor_universal_map(&right, &bc.left.then(&left.left), &into_left, &bounds()).unwrap().proved().unwrap();
        assert_iso(&there, &back)?;
    }
}
