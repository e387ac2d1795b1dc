use super::*;
use crate::arith::CoeffDomain;
use crate::blueprint::{blueprint_from_text, related, Blueprint};

fn bounds() -> SearchBounds {
    SearchBounds::default()
}

fn bex() -> BpRef {
    Arc::new(blueprint_from_text(CoeffDomain::f1(), &["a", "b", "g", "h"], &["a*h = b*g", "g + h = 1"], &bounds()).unwrap())
}

#[test]
fn canonical_cover_of_bex_is_ug_uh() {
    let b = bex();
    let cover = canonical_cover(&b, &bounds()).unwrap();
    let mut hs = cover.describe();
    hs.sort();
    assert_eq!(hs, vec!["g", "h"]);
    assert_eq!(cover.overlaps.len(), 1);
}

#[test]
fn bex_has_the_glued_section() {
    let b = bex();
    let g = global_sections(&b, &bounds()).unwrap();
    assert!(g.complete);
    assert!(g.collisions.is_empty());
    assert_eq!(g.new_sections.len(), 1);
    let s = &g.new_sections[0];
    assert_eq!(s.name, "s");
    let gm = &g.gamma;
    let rel = |l: &str, r: &str| related(gm, &gm.parse_sum(l).unwrap(), &gm.parse_sum(r).unwrap(), &bounds()).is_proved();
    assert!(rel("g*s", "a"));
    assert!(rel("h*s", "b"));
    assert!(rel("s", "a + b"));
    assert!(g.sigma.validate(&bounds()).is_proved());
    let cover = canonical_cover(&b, &bounds()).unwrap();
    assert!(check_non_image(&cover, &s.tuple, &s.certificate));
}

#[test]
fn bex_is_not_global() {
    let Verdict::Refuted(NotGlobal::NonImageSection { section }) = is_global(&bex(), &bounds()) else {
        panic!("expected refutation")
    };
    let mut shown = section.tuple.shown.clone();
    shown.sort();
    assert_eq!(shown.len(), 2);
    assert!(shown.iter().all(|c| c.contains("_inv")));
}

#[test]
fn tampered_certificate_is_rejected() {
    let b = bex();
    let g = global_sections(&b, &bounds()).unwrap();
    let cover = canonical_cover(&b, &bounds()).unwrap();
    let mut cert = g.new_sections[0].certificate.clone();
    cert.weight += 1;
    assert!(!check_non_image(&cover, &g.new_sections[0].tuple, &cert));
    let image = cover.tuple(cover.sigma_tuple(&b.parse("a").unwrap()));
    assert!(non_image_certificate(&cover, &image).is_none());
}

#[test]
fn monoid_blueprints_are_global() {
    let x = Arc::new(blueprint_from_text(CoeffDomain::f1(), &["x"], &[], &bounds()).unwrap());
    assert!(is_global(&x, &bounds()).is_proved());
    let f1 = Arc::new(Blueprint::f1());
    assert!(is_global(&f1, &bounds()).is_proved());
    let g = global_sections(&x, &bounds()).unwrap();
    assert!(g.new_sections.is_empty() && g.complete);
}

#[test]
fn nat_is_global() {
    let n = Arc::new(Blueprint::builtin(CoeffDomain::nat()));
    assert!(is_global(&n, &bounds()).is_proved());
}

#[test]
fn bex_charts_are_global() {
    let b = bex();
    for h in ["g", "h", "g*h"] {
        let (c, _) = localize(&b, &[b.parse(h).unwrap()], &bounds()).unwrap();
        assert!(is_global(&c, &bounds()).is_proved(), "chart {h}");
    }
}

#[test]
fn sections_of_two_chart_cover() {
    let b = bex();
    let cover = BasicCover::new(&b, &[b.parse("g").unwrap(), b.parse("h").unwrap()], &bounds()).unwrap();
    let ts = sections(&cover, 2);
    assert!(ts.iter().all(|t| cover.is_compatible(&t.components)));
    let a = cover.sigma_tuple(&b.parse("a").unwrap());
    assert!(ts.iter().any(|t| t.components == a));
}

#[test]
fn missing_prime_is_not_a_cover() {
    let b = bex();
    let r = BasicCover::new(&b, &[b.parse("g").unwrap()], &bounds());
    assert!(matches!(r, Err(Error::NotACover(_))));
    let n = Arc::new(Blueprint::builtin(CoeffDomain::nat()));
    let six = Monomial::scalar(crate::arith::Coeff::from_integer(6));
    assert!(matches!(BasicCover::new(&n, &[six], &bounds()), Err(Error::NotACover(_))));
}

#[test]
fn globalization_is_idempotent_on_bex() {
    let g = global_sections(&bex(), &bounds()).unwrap();
    let gg = global_sections(&g.gamma, &bounds()).unwrap();
    assert!(gg.new_sections.is_empty());
    assert!(gg.collisions.is_empty());
}

#[test]
fn morphisms_to_global_targets_factor_through_sigma() {
    let b = bex();
    let g = global_sections(&b, &bounds()).unwrap();
    let s = g.gamma.parse(&g.new_sections[0].name).unwrap();
    let f1 = Arc::new(Blueprint::f1());
    let t = Arc::new(blueprint_from_text(CoeffDomain::f1(), &["t"], &[], &bounds()).unwrap());
    let (_, canon) = localize(&b, &[b.parse("g").unwrap()], &bounds()).unwrap();
    let cases = [
        (BlueprintMorphism::new(b.clone(), f1.clone(), vec![Monomial::one(), Monomial::Zero, Monomial::one(), Monomial::Zero]).unwrap(), "1"),
        (BlueprintMorphism::new(b.clone(), t.clone(), vec![t.parse("t").unwrap(), Monomial::Zero, Monomial::one(), Monomial::Zero]).unwrap(), "t"),
        (canon, "a*g_inv"),
    ];
    for (f, expected) in cases {
        assert!(f.validate(&bounds()).is_proved());
        assert!(is_global(&f.target, &bounds()).is_proved());
        let phi = factor_through_sigma(&g, &f, &bounds()).unwrap();
        assert_eq!(g.sigma.then(&phi).agrees_with(&f, &bounds()), Some(true));
        let want = f.target.parse(expected).unwrap();
        assert_eq!(f.target.eq_elements(&phi.apply(&s), &want, &bounds()), Some(true));
    }
}
