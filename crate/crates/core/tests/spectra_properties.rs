use std::collections::BTreeSet;
use std::sync::Arc;

use blue_core::arith::CoeffDomain;
use blue_core::blueprint::{blueprint_from_text, BlueprintMorphism, BpRef};
use blue_core::corpus::{bex, nat};
use blue_core::monoid::Monomial;
use blue_core::sections::{factor_through_sigma, global_sections, is_global};
use blue_core::spectra::{basic_open, prime_ideals, spec_morphism, PrimeIdeal};
use blue_core::verdict::SearchBounds;
use proptest::prelude::*;

fn bounds() -> SearchBounds {
    SearchBounds::default()
}

fn bp(atoms: &[&str], rels: &[String]) -> BpRef {
    let rels: Vec<&str> = rels.iter().map(|s| s.as_str()).collect();
    Arc::new(blueprint_from_text(CoeffDomain::f1(), atoms, &rels, &bounds()).unwrap())
}

const ATOMS: [&str; 3] = ["x", "y", "z"];

/// A relation `lhs = rhs` with each side a sum of at most two monomials or zero.
fn relation() -> impl Strategy<Value = (Side, Side)> {
    let mono = prop::collection::vec(0usize..3, 0..3);
    let side = prop::collection::vec(mono, 0..3);
    (side.clone(), side).prop_filter("nonempty", |(l, r)| !l.is_empty() || !r.is_empty())
}

fn show_side(side: &[Vec<usize>]) -> String {
    if side.is_empty() {
        return "0".into();
    }
    side.iter()
        .map(|m| if m.is_empty() { "1".to_string() } else { m.iter().map(|i| ATOMS[*i]).collect::<Vec<_>>().join("*") })
        .collect::<Vec<_>>()
        .join(" + ")
}

type Side = Vec<Vec<usize>>;

/// Per atom subset: `Some(true)` when its indicator is a morphism to the
/// Boolean blueprint (every relation has outside terms on both sides or on
/// neither), `Some(false)` when some relation has exactly one outside term,
/// `None` otherwise.
fn oracle_primes(rels: &[(Side, Side)]) -> Vec<(BTreeSet<u32>, Option<bool>)> {
    (0u32..8)
        .map(|mask| {
            let inside = |m: &Vec<usize>| m.iter().any(|i| mask & (1 << i) != 0);
            let outside = |s: &Side| s.iter().filter(|m| !inside(m)).count();
            let verdict = if rels.iter().any(|(l, r)| outside(l) + outside(r) == 1) {
                Some(false)
            } else if rels.iter().all(|(l, r)| (outside(l) == 0) == (outside(r) == 0)) {
                Some(true)
            } else {
                None
            };
            ((0..3).filter(|i| mask & (1 << i) != 0).collect(), verdict)
        })
        .collect()
}

fn global_cases() -> Vec<BpRef> {
    vec![bex(), bp(&["x", "y"], &[]), bp(&["x", "y"], &["x + y = 1".into()]), bp(&["x"], &["x^2 = x".into()])]
}

fn elements(t: &BpRef) -> Vec<Monomial> {
    let mut out = vec![Monomial::Zero];
    for m in t.monoid.enumerate(&t.monoid.all_atoms(), 6) {
        let m = t.normalize(&m);
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn primes_match_brute_force(rels in prop::collection::vec(relation(), 0..3)) {
        let text: Vec<String> = rels.iter().map(|(l, r)| format!("{} = {}", show_side(l), show_side(r))).collect();
        let b = bp(&ATOMS, &text);
        let spec = prime_ideals(&b).unwrap();
        let got: Vec<BTreeSet<u32>> = spec.points.iter().map(|p| p.atoms.iter().copied().collect()).collect();
        let oracle = oracle_primes(&rels);
        for (p, verdict) in &oracle {
            match verdict {
                Some(true) => prop_assert!(got.contains(p)),
                Some(false) => prop_assert!(!got.contains(p)),
                None => {}
            }
        }
        if oracle.iter().all(|(_, v)| v.is_some()) {
            prop_assert!(spec.complete);
        }
    }

    #[test]
    fn basic_opens_intersect_multiplicatively(k in 0usize..4, g in prop::collection::vec(0u32..3, 0..3), h in prop::collection::vec(0u32..3, 0..3)) {
        let b = &global_cases()[k];
        let pts = prime_ideals(b).unwrap().points;
        let n = b.atoms().len() as u32;
        let mono = |v: &Vec<u32>| b.normalize(&Monomial::from_exps(v.iter().filter(|a| **a < n).map(|a| (*a, 1)).collect()));
        let (g, h) = (mono(&g), mono(&h));
        let ug: BTreeSet<PrimeIdeal> = basic_open(b, &pts, &g).into_iter().collect();
        let uh: BTreeSet<PrimeIdeal> = basic_open(b, &pts, &h).into_iter().collect();
        let ugh: BTreeSet<PrimeIdeal> = basic_open(b, &pts, &b.mul(&g, &h)).into_iter().collect();
        prop_assert_eq!(ug.intersection(&uh).cloned().collect::<BTreeSet<_>>(), ugh);
    }

    #[test]
    fn nat_basic_opens_intersect_multiplicatively(g in 1i128..60, h in 1i128..60) {
        let n = nat();
        let pts = prime_ideals(&n).unwrap().materialize(&n, 60);
        let s = |k: i128| Monomial::scalar(blue_core::arith::Coeff::from_integer(k));
        let u = |k: i128| basic_open(&n, &pts, &s(k)).into_iter().collect::<BTreeSet<_>>();
        prop_assert_eq!(u(g).intersection(&u(h)).cloned().collect::<BTreeSet<_>>(), u(g * h));
    }

    #[test]
    fn sigma_is_a_homeomorphism_on_spectra(k in 0usize..4, g in prop::collection::vec(0u32..4, 0..3)) {
        let b = &global_cases()[k];
        let gs = global_sections(b, &bounds()).unwrap();
        let bp_points = prime_ideals(b).unwrap().points;
        let gp_points = prime_ideals(&gs.gamma).unwrap().points;
        let m = spec_morphism(&gs.sigma, &gp_points);
        prop_assert!(m.injective && m.continuous);
        let image: BTreeSet<PrimeIdeal> = m.pairs.iter().map(|(_, p)| p.clone()).collect();
        prop_assert_eq!(image, bp_points.iter().cloned().collect::<BTreeSet<_>>());
        let n = b.atoms().len() as u32;
        let h = b.normalize(&Monomial::from_exps(g.iter().filter(|a| **a < n).map(|a| (*a, 1)).collect()));
        let open: BTreeSet<PrimeIdeal> = basic_open(b, &bp_points, &h).into_iter().collect();
        let pre: BTreeSet<PrimeIdeal> = m.pairs.iter().filter(|(_, p)| open.contains(p)).map(|(q, _)| q.clone()).collect();
        let image_open: BTreeSet<PrimeIdeal> = basic_open(&gs.gamma, &gp_points, &gs.sigma.apply(&h)).into_iter().collect();
        prop_assert_eq!(pre, image_open);
    }
}

#[test]
fn global_sections_are_global() {
    for b in global_cases() {
        let gs = global_sections(&b, &bounds()).unwrap();
        assert!(is_global(&gs.gamma, &bounds()).is_proved(), "{:?}", b.atoms());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn morphisms_factor_uniquely_through_sigma(kind in 0usize..2, n in 1u32..4) {
        let b = bex();
        let t = match kind {
            0 => bp(&["u"], &[format!("u^{n} = 1")]),
            _ => bp(&["u"], &[format!("u^{n} = 0")]),
        };
        let gs = global_sections(&b, &bounds()).unwrap();
        let lifts = all_morphisms(&gs.gamma, &t);
        for f in all_morphisms(&b, &t) {
            let fact = factor_through_sigma(&gs, &f, &bounds()).unwrap();
            prop_assert!(fact.validate(&bounds()).is_proved());
            prop_assert_eq!(gs.sigma.then(&fact).agrees_with(&f, &bounds()), Some(true));
            let through: Vec<&BlueprintMorphism> =
                lifts.iter().filter(|l| gs.sigma.then(l).agrees_with(&f, &bounds()) == Some(true)).collect();
            prop_assert_eq!(through.len(), 1);
            prop_assert_eq!(through[0].agrees_with(&fact, &bounds()), Some(true));
        }
    }
}
