//! Standard blueprints and presentations shared by tests and the command line.

use std::sync::Arc;

use crate::arith::CoeffDomain;
use crate::blueprint::{blueprint_from_text, localization_map, localize, Blueprint, BlueprintMorphism, BpRef};
use crate::error::Result;
use crate::presentation::{AffinePresentation, PresentationMorphism, Site};
use crate::verdict::SearchBounds;

pub fn f1() -> BpRef {
    Arc::new(Blueprint::f1())
}

pub fn nat() -> BpRef {
    Arc::new(Blueprint::builtin(CoeffDomain::nat()))
}

pub fn int() -> BpRef {
    Arc::new(Blueprint::builtin(CoeffDomain::int()))
}

/// `F1[var]`.
pub fn affine_line(var: &str) -> BpRef {
    Arc::new(blueprint_from_text(CoeffDomain::f1(), &[var], &[], &SearchBounds::default()).expect("free blueprint"))
}

/// `F1[a,b,g,h]/(ah = bg, g + h = 1)`.
pub fn bex() -> BpRef {
    Arc::new(
        blueprint_from_text(CoeffDomain::f1(), &["a", "b", "g", "h"], &["a*h = b*g", "g + h = 1"], &SearchBounds::default())
            .expect("relations parse"),
    )
}

/// Charts `U_h` for each `h`, their pairwise overlaps, and the morphism to
/// the one-chart presentation of `Spec B`.
pub fn basic_presentation(
    b: &BpRef,
    hs: &[&str],
    site: Site,
    bounds: &SearchBounds,
) -> Result<(AffinePresentation, PresentationMorphism)> {
    let base = AffinePresentation::affine(site, "B", b.clone());
    let mut p = AffinePresentation::new(site);
    let mut components = Vec::new();
    let mut charts = Vec::new();
    for h in hs {
        let (c, f) = localize(b, &[b.parse(h)?], bounds)?;
        charts.push(c.clone());
        p.add_object(&format!("U_{h}"), c);
        components.push(f);
    }
    for i in 0..hs.len() {
        for j in (i + 1)..hs.len() {
            let (o, f) = localize(b, &[b.parse(hs[i])?, b.parse(hs[j])?], bounds)?;
            let k = p.add_object(&format!("U_{}{}", hs[i], hs[j]), o);
            p.add_arrow(k, i, localization_map(&charts[i], &f, bounds)?)?;
            p.add_arrow(k, j, localization_map(&charts[j], &f, bounds)?)?;
            components.push(f);
        }
    }
    let phi = PresentationMorphism::new(&p, &base, vec![0; p.objects.len()], components)?;
    Ok((p, phi))
}

/// `{U_g, U_h, U_gh}` for the non-global example.
pub fn bex_presentation(site: Site) -> AffinePresentation {
    basic_presentation(&bex(), &["g", "h"], site, &SearchBounds::default()).expect("cover").0
}

/// `Spec N` covered by `U_10` and `U_21`.
pub fn nat_presentation(site: Site) -> AffinePresentation {
    basic_presentation(&nat(), &["10", "21"], site, &SearchBounds::default()).expect("cover").0
}

/// The projective line `{F1[x] <- F1[x,x⁻¹] -> F1[y]}` with `y -> x⁻¹`.
pub fn projective_line(site: Site) -> AffinePresentation {
    projective_line_pair(site).0
}

/// The projective line, a three-chart refinement with the torus as an extra
/// maximal chart, and the refinement morphism.
pub fn projective_line_pair(site: Site) -> (AffinePresentation, AffinePresentation, PresentationMorphism) {
    let bounds = SearchBounds::default();
    let x = affine_line("x");
    let y = affine_line("y");
    let (t, canon) = localize(&x, &[x.parse("x").expect("atom")], &bounds).expect("torus");
    let twist = BlueprintMorphism::new(y.clone(), t.clone(), vec![t.parse("x_inv").expect("atom")]).expect("map");
    let id = BlueprintMorphism::identity(&t);
    let mut u = AffinePresentation::new(site);
    u.add_object("X", x.clone());
    u.add_object("Y", y.clone());
    u.add_object("XY", t.clone());
    u.add_arrow(2, 0, canon.clone()).expect("arrow");
    u.add_arrow(2, 1, twist.clone()).expect("arrow");
    let mut v = AffinePresentation::new(site);
    for (n, b) in [("X", &x), ("Y", &y), ("C", &t), ("XC", &t), ("YC", &t), ("XY", &t)] {
        v.add_object(n, b.clone());
    }
    for (from, to, m) in [(3, 0, &canon), (3, 2, &id), (4, 1, &twist), (4, 2, &id), (5, 0, &canon), (5, 1, &twist)] {
        v.add_arrow(from, to, m.clone()).expect("arrow");
    }
    let components = v.objects.iter().map(BlueprintMorphism::identity).collect();
    let psi = PresentationMorphism::new(&v, &u, vec![0, 1, 2, 2, 2, 2], components).expect("morphism");
    (u, v, psi)
}
