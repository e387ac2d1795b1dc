use std::sync::Arc;

use blue_core::arith::CoeffDomain;
use blue_core::blueprint::{blueprint_from_text, BlueprintMorphism, BpRef};
use blue_core::corpus::{affine_line, basic_presentation};
use blue_core::functors::{compare_gf, functor_f, functor_f_mor, relative_equal, CoverBudget};
use blue_core::monoid::Monomial;
use blue_core::presentation::{AffinePresentation, PresentationMorphism, Site};
use blue_core::verdict::{SearchBounds, Verdict};
use proptest::prelude::*;

fn bounds() -> SearchBounds {
    SearchBounds::default()
}

fn plane() -> BpRef {
    Arc::new(blueprint_from_text(CoeffDomain::f1(), &["x", "y"], &[], &bounds()).unwrap())
}

const PLANE_OPENS: [&str; 4] = ["x", "y", "x*y", "x^2"];

/// Covers of the plane: the closed point `(x,y)` forces the chart `U_1`.
fn plane_cover(mask: u32) -> Vec<&'static str> {
    let mut hs = vec!["1"];
    hs.extend(PLANE_OPENS.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, s)| *s));
    hs
}

/// The endomorphism `x -> x^k` of the affine line as a presentation map.
fn power_map(u: &AffinePresentation, k: u32) -> PresentationMorphism {
    let b = &u.objects[0];
    let image = if k == 0 { Monomial::one() } else { Monomial::from_exps(vec![(0, k)]) };
    let f = BlueprintMorphism::new(b.clone(), b.clone(), vec![image]).unwrap();
    PresentationMorphism::new(u, u, vec![0], vec![f]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn f_does_not_depend_on_the_cover(mask in 0u32..16) {
        let b = plane();
        let (u, _) = basic_presentation(&b, &plane_cover(mask), Site::Blue, &bounds()).unwrap();
        let whole = AffinePresentation::affine(Site::Blue, "P", b);
        let fu = functor_f(&u, &CoverBudget::default(), &bounds()).unwrap();
        let fw = functor_f(&whole, &CoverBudget::default(), &bounds()).unwrap();
        prop_assert_eq!(fu.representative.site, Site::Relative);
        prop_assert!(relative_equal(&fu, &fw, &bounds()).is_proved());
        prop_assert!(relative_equal(&fw, &fu, &bounds()).is_proved());
    }

    #[test]
    fn g_after_f_recovers_the_plane(mask in 0u32..16) {
        let (u, _) = basic_presentation(&plane(), &plane_cover(mask), Site::Blue, &bounds()).unwrap();
        let v = compare_gf(&u, &CoverBudget::default(), &bounds());
        let Verdict::Proved(p) = v else { return Err(TestCaseError::fail(format!("{v:?}"))) };
        prop_assert_eq!(p.charts.len(), u.objects.len());
    }

    #[test]
    fn f_respects_composition(j in 0u32..4, k in 0u32..4) {
        let u = AffinePresentation::affine(Site::Blue, "A", affine_line("x"));
        let (f, g) = (power_map(&u, j), power_map(&u, k));
        let lhs = functor_f_mor(&f.then(&g), &bounds()).unwrap();
        let rhs = functor_f_mor(&f, &bounds()).unwrap().then(&functor_f_mor(&g, &bounds()).unwrap());
        prop_assert_eq!(lhs.agrees_with(&rhs, &bounds()), Some(true));
        let id = functor_f_mor(&PresentationMorphism::identity(&u), &bounds()).unwrap();
        prop_assert_eq!(id.then(&lhs).agrees_with(&lhs, &bounds()), Some(true));
    }

    #[test]
    fn f_is_faithful_on_powers(j in 0u32..5, k in 0u32..5) {
        let u = AffinePresentation::affine(Site::Blue, "A", affine_line("x"));
        let (f, g) = (power_map(&u, j), power_map(&u, k));
        let (ff, fg) = (functor_f_mor(&f, &bounds()).unwrap(), functor_f_mor(&g, &bounds()).unwrap());
        prop_assert_eq!(ff.agrees_with(&fg, &bounds()), Some(j == k));
    }
}
