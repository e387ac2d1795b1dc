use super::*;
use crate::blueprint::{is_localization, localize};
use crate::corpus::{affine_line, basic_presentation, bex, f1, projective_line, projective_line_pair};

fn bounds() -> SearchBounds {
    SearchBounds::default()
}

/// Three affine lines glued pairwise along tori; the overlap of charts 2
/// and 3 uses `x -> x⁻¹` when `twisted`.
fn three_lines(twisted: bool) -> AffinePresentation {
    let mut u = AffinePresentation::new(Site::Blue);
    let lines: Vec<BpRef> = (0..3).map(|_| affine_line("x")).collect();
    for (k, l) in lines.iter().enumerate() {
        u.add_object(&format!("X{}", k + 1), l.clone());
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let (t, canon) = localize(&lines[i], &[lines[i].parse("x").unwrap()], &bounds()).unwrap();
        let k = u.add_object(&format!("X{}{}", i + 1, j + 1), t.clone());
        u.add_arrow(k, i, canon.clone()).unwrap();
        let other = if twisted && (i, j) == (1, 2) {
            BlueprintMorphism::new(lines[j].clone(), t.clone(), vec![t.parse("x_inv").unwrap()]).unwrap()
        } else {
            BlueprintMorphism::by_names(lines[j].clone(), t.clone()).unwrap()
        };
        u.add_arrow(k, j, other).unwrap();
    }
    u
}

#[test]
fn projective_line_is_a_presentation() {
    let u = projective_line(Site::Blue);
    let r = check_affine_presentation(&u, &bounds()).proved().unwrap();
    assert_eq!(r.maximal, vec!["X", "Y"]);
    assert_eq!(r.triples_checked, 0);
    assert!(r.axioms.iter().all(|a| a.verdict == VerdictKind::Proved));
}

#[test]
fn non_localization_arrow_is_not_open() {
    let mut u = AffinePresentation::new(Site::Blue);
    let x = affine_line("x");
    let pt = f1();
    u.add_object("A", x.clone());
    u.add_object("P", pt.clone());
    u.add_arrow(0, 1, BlueprintMorphism::new(pt, x, vec![]).unwrap()).unwrap();
    let d = check_affine_presentation(&u, &bounds()).refuted().unwrap();
    assert!(matches!(d, PresentationDefect::NotOpen { .. }));
}

#[test]
fn twisted_overlap_breaks_the_cocycle() {
    assert!(check_affine_presentation(&three_lines(false), &bounds()).is_proved());
    let d = check_affine_presentation(&three_lines(true), &bounds()).refuted().unwrap();
    assert!(matches!(d, PresentationDefect::Cocycle { .. }), "{d:?}");
}

#[test]
fn atlas_examples() {
    let p1 = projective_line(Site::Blue);
    let (a, phi) = atlas(&p1);
    assert!(presentations_isomorphic(&a, &p1, &bounds()).is_some());
    assert!(check_refinement(&phi, &bounds()).is_proved());
    let one = AffinePresentation::affine(Site::Blue, "B", bex());
    let (a1, _) = atlas(&one);
    assert!(presentations_isomorphic(&a1, &one, &bounds()).is_some());
    let (_, v, _) = projective_line_pair(Site::Blue);
    let (av, phi_v) = atlas(&v);
    let (aav, _) = atlas(&av);
    assert!(presentations_isomorphic(&aav, &av, &bounds()).is_some());
    assert!(check_refinement(&phi_v, &bounds()).is_proved());
}

#[test]
fn bex_cover_refines_topologically_but_not_conservatively() {
    let b = bex();
    let (u, phi) = basic_presentation(&b, &["g", "h"], Site::Blue, &bounds()).unwrap();
    assert!(check_affine_presentation(&u, &bounds()).is_proved());
    let proof = check_refinement(&phi, &bounds()).proved().unwrap();
    assert_eq!(proof.families.len(), 1);
    let (_, phi_rel) = basic_presentation(&b, &["g", "h"], Site::Relative, &bounds()).unwrap();
    let v = check_refinement(&phi_rel, &bounds());
    let Verdict::Refuted(failure) = v else { panic!("{v:?}") };
    assert!(matches!(failure, RefinementFailure::NotConservative { .. }), "{failure:?}");
}

#[test]
fn missing_point_is_not_a_refinement() {
    let b = bex();
    let (_, phi) = basic_presentation(&b, &["g"], Site::Blue, &bounds()).unwrap();
    let failure = check_refinement(&phi, &bounds()).refuted().unwrap();
    let RefinementFailure::NotCovering { witness, .. } = failure else { panic!("expected a gap") };
    assert!(witness.is_some());
}

#[test]
fn chart_fibre_product_is_the_overlap() {
    let b = bex();
    let (_, phi_g) = basic_presentation(&b, &["g"], Site::Blue, &bounds()).unwrap();
    let (_, phi_h) = basic_presentation(&b, &["h"], Site::Blue, &bounds()).unwrap();
    let fp = fibre_product_presentations(&phi_g, &phi_h, &bounds()).unwrap();
    assert_eq!(fp.presentation.objects.len(), 1);
    // Oracle: B[(gh)⁻¹] built directly, with the map induced by both charts.
    let (_, phi_gh) = basic_presentation(&b, &["g*h"], Site::Blue, &bounds()).unwrap();
    let gh = phi_gh.source.objects[0].clone();
    let to_g = crate::blueprint::localization_map(&phi_g.source.objects[0], &phi_gh.components[0], &bounds()).unwrap();
    let to_h = crate::blueprint::localization_map(&phi_h.source.objects[0], &phi_gh.components[0], &bounds()).unwrap();
    let m = tensor_universal_map(&fp.tensors[0], &to_g, &to_h, &bounds()).unwrap().proved().unwrap();
    assert!(Arc::ptr_eq(&m.target, &gh));
    let tb = &fp.tensors[0].blueprint;
    let back_images = ["a", "b", "g", "h", "g_inv*h_inv"].iter().map(|s| tb.parse(s).unwrap()).collect();
    let back = BlueprintMorphism::new(gh.clone(), tb.clone(), back_images).unwrap();
    assert!(back.validate(&bounds()).is_proved());
    assert_eq!(m.then(&back).is_identity_on_atoms(&bounds()), Some(true));
    assert_eq!(back.then(&m).is_identity_on_atoms(&bounds()), Some(true));
    let t = AffinePresentation::affine(Site::Blue, "T", gh.clone());
    let alpha = PresentationMorphism::new(&t, &phi_g.source, vec![0], vec![to_g]).unwrap();
    let beta = PresentationMorphism::new(&t, &phi_h.source, vec![0], vec![to_h]).unwrap();
    assert_eq!(check_universal_property(&fp, &phi_g, &phi_h, &[(alpha, beta)], &bounds()), Verdict::Proved(1));
}

#[test]
fn fibre_product_with_identity_is_a_copy() {
    let b = bex();
    let (u, phi) = basic_presentation(&b, &["g", "h"], Site::Blue, &bounds()).unwrap();
    let id = PresentationMorphism::identity(&phi.target);
    let fp = fibre_product_presentations(&phi, &id, &bounds()).unwrap();
    assert_eq!(fp.presentation.objects.len(), u.objects.len());
    assert_eq!(fp.presentation.arrows.len(), u.arrows.len());
    for c in &fp.to_left.components {
        assert!(is_localization(c, &bounds()).proved().unwrap().s_generators.is_empty());
    }
    assert!(check_affine_presentation(&fp.presentation, &bounds()).is_proved());
}

#[test]
fn base_change_of_atlas_refinement_is_a_refinement() {
    let b = bex();
    let (u, phi) = basic_presentation(&b, &["g", "h"], Site::Blue, &bounds()).unwrap();
    let (_, at) = atlas(&u);
    let fp = fibre_product_presentations(&at, &PresentationMorphism::identity(&u), &bounds()).unwrap();
    assert!(check_refinement(&fp.to_right, &bounds()).is_proved());
    let _ = phi;
}

#[test]
fn projective_line_glues_to_three_points() {
    let x = glue(&projective_line(Site::Blue), &bounds()).unwrap();
    assert_eq!(x.len(), 3);
    assert_eq!(x.closed_points().len(), 2);
    assert!(x.complete);
    let (_, v, _) = projective_line_pair(Site::Blue);
    assert_eq!(glue(&v, &bounds()).unwrap().len(), 3);
}

#[test]
fn single_chart_glues_to_its_spectrum() {
    let b = bex();
    let x = glue(&AffinePresentation::affine(Site::Blue, "B", b.clone()), &bounds()).unwrap();
    assert_eq!(x.len(), prime_ideals(&b).unwrap().points.len());
}

#[test]
fn bex_charts_glue_to_spec_bex() {
    let b = bex();
    let (u, phi) = basic_presentation(&b, &["g", "h"], Site::Blue, &bounds()).unwrap();
    let x = glue(&u, &bounds()).unwrap();
    // Oracle: send each point to its pullback along the canonical chart map.
    let primes = prime_ideals(&b).unwrap().points;
    let rename: Vec<usize> = (0..x.len())
        .map(|k| {
            let (c, i) = x.points[k][0];
            let p = pull_back(&phi.components[c], &x.chart_points[c][i]);
            primes.iter().position(|q| *q == p).unwrap()
        })
        .collect();
    let mut order = BTreeSet::new();
    for (i, p) in primes.iter().enumerate() {
        for (j, q) in primes.iter().enumerate() {
            if p.is_contained_in(q) {
                order.insert((i, j));
            }
        }
    }
    assert_eq!(rename.iter().collect::<BTreeSet<_>>().len(), primes.len());
    assert_eq!(x.relabelled(&rename), order);
}

#[test]
fn glue_rejects_relative_site() {
    assert!(matches!(glue(&projective_line(Site::Relative), &bounds()), Err(Error::InvalidPresentation(_))));
}

#[test]
fn spanned_category_adds_composites() {
    let (_, v, _) = projective_line_pair(Site::Blue);
    let (s, emb) = spanned_category(&v);
    assert_eq!(s.arrows.len(), v.arrows.len());
    assert!(emb.validate(&bounds()).is_proved());
}
