//! Algebraic bases and presentations, common refinements, and the functors
//! between blue schemes and relative schemes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::blueprint::{
    is_finite_localization, localization_map, localize, BlueprintMorphism, BpRef, LocalizationFailure,
};
use crate::conservativity::{check_conservative, conservativity, ConservativeCertificate, Witness};
use crate::error::{Error, Result};
use crate::monoid::Monomial;
use crate::presentation::{
    check_affine_presentation, check_refinement, fibre_product_presentations, glue, homeomorphic_by, AffinePresentation,
    BlueScheme, PresentationDefect, PresentationMorphism, PresentationReport, RefinementProof, Site,
};
use crate::sections::global_sections;
use crate::spectra::{minimal_open_generator, prime_ideals, pull_back};
use crate::verdict::{Exhausted, SearchBounds, Verdict};

/// Limits of the basic-open cover enumeration behind an algebraic basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverBudget {
    /// Degree of monomial generators `h`.
    pub max_degree: u32,
    pub max_cover_size: usize,
    /// Largest integer tried as `h` over builtin coefficients.
    pub max_scalar: u64,
}

impl Default for CoverBudget {
    fn default() -> Self {
        CoverBudget { max_degree: 2, max_cover_size: 3, max_scalar: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverEvidence {
    pub cover: Vec<String>,
    pub certificate: ConservativeCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicBasisEvidence {
    pub budget: CoverBudget,
    /// Distinct basic opens among the candidates.
    pub opens: usize,
    /// Every minimal cover by candidate opens, each certified conservative.
    pub covers: Vec<CoverEvidence>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonConservativeCover {
    pub cover: Vec<String>,
    pub witness: Witness,
}

fn candidates(b: &BpRef, budget: &CoverBudget) -> Vec<Monomial> {
    let mut out: Vec<Monomial> = b.monoid.enumerate(&b.monoid.all_atoms(), budget.max_degree);
    if !b.domain().is_f1() {
        for n in 2..=budget.max_scalar {
            out.push(Monomial::scalar(crate::arith::Coeff::from_integer(n as i128)));
        }
    }
    out.into_iter().map(|m| b.normalize(&m)).filter(|m| !m.is_zero()).collect()
}

fn minimal_covers(opens: &[BTreeSet<usize>], all: usize, max_size: usize) -> Vec<Vec<usize>> {
    let covers = |set: &[usize]| {
        let mut u = BTreeSet::new();
        for i in set {
            u.extend(opens[*i].iter().copied());
        }
        u.len() == all
    };
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..opens.len()).map(|i| vec![i]).collect();
    stack.reverse();
    let mut by_size: Vec<Vec<usize>> = Vec::new();
    while let Some(s) = stack.pop() {
        by_size.push(s.clone());
        if s.len() < max_size {
            for j in (s[s.len() - 1] + 1..opens.len()).rev() {
                let mut t = s.clone();
                t.push(j);
                stack.push(t);
            }
        }
    }
    by_size.sort_by_key(|s| s.len());
    for s in by_size {
        if covers(&s) && (0..s.len()).all(|k| !covers(&[&s[..k], &s[k + 1..]].concat())) {
            out.push(s);
        }
    }
    out
}

/// Every minimal cover by candidate basic opens is conservative.
pub fn has_algebraic_basis(
    b: &BpRef,
    budget: &CoverBudget,
    bounds: &SearchBounds,
) -> Verdict<AlgebraicBasisEvidence, NonConservativeCover> {
    let spec = match prime_ideals(b) {
        Ok(s) => s,
        Err(e) => return Verdict::Unknown(Exhausted::new("prime_enumeration", e.to_string())),
    };
    let points = spec.materialize(b, budget.max_scalar);
    let mut reps: Vec<Monomial> = Vec::new();
    let mut opens: Vec<BTreeSet<usize>> = Vec::new();
    for h in candidates(b, budget) {
        let open: BTreeSet<usize> = (0..points.len()).filter(|i| !points[*i].contains(b, &h)).collect();
        if !open.is_empty() && !opens.contains(&open) {
            opens.push(open);
            reps.push(h);
        }
    }
    let mut unknown = (!spec.complete).then(|| Exhausted::new("prime_enumeration", "incomplete spectrum"));
    let mut covers = Vec::new();
    for cover in minimal_covers(&opens, points.len(), budget.max_cover_size) {
        let hs: Vec<Monomial> = cover.iter().map(|i| reps[*i].clone()).collect();
        let shown: Vec<String> = hs.iter().map(|h| b.show(h)).collect();
        match conservativity(b, &hs, bounds) {
            Verdict::Proved(certificate) => covers.push(CoverEvidence { cover: shown, certificate }),
            Verdict::Refuted(witness) => return Verdict::Refuted(NonConservativeCover { cover: shown, witness }),
            Verdict::Unknown(e) => unknown = Some(e),
        }
    }
    match unknown {
        None => Verdict::Proved(AlgebraicBasisEvidence { budget: *budget, opens: opens.len(), covers }),
        Some(e) => Verdict::Unknown(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrowEvidence {
    pub from: String,
    pub to: String,
    pub inverted: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicPresentationCertificate {
    pub objects: Vec<(String, AlgebraicBasisEvidence)>,
    pub arrows: Vec<ArrowEvidence>,
    pub report: PresentationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NotAlgebraic {
    NotAPresentation { defect: PresentationDefect },
    NoAlgebraicBasis { object: String, cover: NonConservativeCover },
    NotFiniteLocalization { from: String, to: String, failure: LocalizationFailure },
}

pub fn check_algebraic_presentation(
    u: &AffinePresentation,
    budget: &CoverBudget,
    bounds: &SearchBounds,
) -> Verdict<AlgebraicPresentationCertificate, NotAlgebraic> {
    let report = match check_affine_presentation(u, bounds) {
        Verdict::Proved(r) => r,
        Verdict::Refuted(defect) => return Verdict::Refuted(NotAlgebraic::NotAPresentation { defect }),
        Verdict::Unknown(e) => return Verdict::Unknown(e),
    };
    let mut unknown = None;
    let mut arrows = Vec::new();
    for a in &u.arrows {
        let (from, to) = (u.names[a.from].clone(), u.names[a.to].clone());
        match is_finite_localization(&a.map, bounds) {
            Verdict::Proved(p) => {
                arrows.push(ArrowEvidence { from, to, inverted: p.s_generators.iter().map(|m| a.map.source.show(m)).collect() })
            }
            Verdict::Refuted(failure) => return Verdict::Refuted(NotAlgebraic::NotFiniteLocalization { from, to, failure }),
            Verdict::Unknown(e) => unknown = Some(e),
        }
    }
    let mut objects = Vec::new();
    for (i, b) in u.objects.iter().enumerate() {
        match has_algebraic_basis(b, budget, bounds) {
            Verdict::Proved(ev) => objects.push((u.names[i].clone(), ev)),
            Verdict::Refuted(cover) => {
                return Verdict::Refuted(NotAlgebraic::NoAlgebraicBasis { object: u.names[i].clone(), cover })
            }
            Verdict::Unknown(e) => unknown = Some(e),
        }
    }
    match unknown {
        None => Verdict::Proved(AlgebraicPresentationCertificate { objects, arrows, report }),
        Some(e) => Verdict::Unknown(e),
    }
}

/// Re-check every cover certificate and every arrow's inverted elements.
pub fn replay_algebraic_certificate(
    u: &AffinePresentation,
    cert: &AlgebraicPresentationCertificate,
    bounds: &SearchBounds,
) -> bool {
    if cert.objects.len() != u.objects.len() || cert.arrows.len() != u.arrows.len() {
        return false;
    }
    for ((name, ev), b) in cert.objects.iter().zip(&u.objects) {
        if u.index(name).is_none() {
            return false;
        }
        for c in &ev.covers {
            let Ok(hs) = c.cover.iter().map(|h| b.parse(h)).collect::<Result<Vec<_>>>() else { return false };
            if !check_conservative(b, &hs, &c.certificate, bounds) {
                return false;
            }
        }
    }
    u.arrows.iter().zip(&cert.arrows).all(|(a, ev)| match is_finite_localization(&a.map, bounds) {
        Verdict::Proved(p) => p.s_generators.iter().map(|m| a.map.source.show(m)).collect::<Vec<_>>() == ev.inverted,
        _ => false,
    })
}

/// The map `B_w -> L` extending `target: B_c -> L` along the open
/// `r: B_c -> B_w`.
fn extend_along(r: &BlueprintMorphism, target: &BlueprintMorphism, bounds: &SearchBounds) -> Result<BlueprintMorphism> {
    let proof = is_finite_localization(r, bounds)
        .proved()
        .ok_or_else(|| Error::InvalidPresentation("chart arrow is not a localization".into()))?;
    let out = if Arc::ptr_eq(&proof.localized, &r.source) {
        target.clone()
    } else {
        localization_map(&proof.localized, target, bounds)?
    };
    Ok(proof.inverse.then(&out))
}

/// Minimal opens `U_x` of every point with all inclusions between them.
pub fn canonical_locally_finite_presentation(x: &BlueScheme, bounds: &SearchBounds) -> Result<AffinePresentation> {
    if !x.complete {
        return Err(Error::NotLocallyFinite);
    }
    let u = &x.presentation;
    let maximal = u.maximal();
    struct Local {
        chart: usize,
        blueprint: BpRef,
        canon: BlueprintMorphism,
    }
    let mut locals = Vec::new();
    let mut p = AffinePresentation::new(Site::Blue);
    for k in 0..x.len() {
        let (c, i) = *x.points[k].iter().find(|(c, _)| maximal.contains(c)).unwrap_or(&x.points[k][0]);
        let b = &u.objects[c];
        let spec = prime_ideals(b)?;
        let h = minimal_open_generator(b, &spec, &x.chart_points[c][i])?;
        let (l, canon) = localize(b, &[h], bounds)?;
        p.add_object(&format!("U{}", x.show_point(k)), l.clone());
        locals.push(Local { chart: c, blueprint: l, canon });
    }
    for xk in 0..x.len() {
        for yk in x.minimal_open(xk) {
            if yk == xk {
                continue;
            }
            let (lx, ly) = (&locals[xk], &locals[yk]);
            let w = (0..u.objects.len())
                .find(|w| {
                    x.points[yk].iter().any(|(c, _)| c == w) && u.reaches(*w, lx.chart) && u.reaches(*w, ly.chart)
                })
                .ok_or_else(|| Error::InvalidPresentation(format!("no chart relates {} and {}", x.show_point(xk), x.show_point(yk))))?;
            let to_y = extend_along(&u.composite(w, ly.chart).expect("reaches"), &ly.canon, bounds)?;
            let rho = u.composite(w, lx.chart).expect("reaches").then(&to_y);
            let map = if Arc::ptr_eq(&lx.blueprint, &u.objects[lx.chart]) {
                rho
            } else {
                localization_map(&lx.blueprint, &rho, bounds)?
            };
            p.add_arrow(yk, xk, map)?;
        }
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegCertificate {
    pub object: String,
    pub target: String,
    pub inverted: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CommonRefinement {
    pub presentation: AffinePresentation,
    pub to_left: PresentationMorphism,
    pub to_right: PresentationMorphism,
    pub legs: Vec<LegCertificate>,
    pub certificate: AlgebraicPresentationCertificate,
    pub refinements: [RefinementProof; 2],
}

fn leg_certificates(phi: &PresentationMorphism, bounds: &SearchBounds) -> Result<Vec<LegCertificate>> {
    let mut out = Vec::new();
    for (i, c) in phi.components.iter().enumerate() {
        let object = phi.source.names[i].clone();
        let target = phi.target.names[phi.object_map[i]].clone();
        match is_finite_localization(c, bounds) {
            Verdict::Proved(p) => {
                out.push(LegCertificate { object, target, inverted: p.s_generators.iter().map(|m| c.source.show(m)).collect() })
            }
            _ => return Err(Error::RefinementNotFound(format!("leg {object} -> {target} is not certified"))),
        }
    }
    Ok(out)
}

/// Re-run the localization check behind every leg.
pub fn replay_legs(phi: &PresentationMorphism, legs: &[LegCertificate], bounds: &SearchBounds) -> bool {
    leg_certificates(phi, bounds).map(|l| l == legs).unwrap_or(false)
}

/// A common refinement of `U` and `V` over the shared presentation `Z` they
/// both map to, built from pairwise fibre products of charts.
pub fn common_refinement(
    phi: &PresentationMorphism,
    psi: &PresentationMorphism,
    budget: &CoverBudget,
    bounds: &SearchBounds,
) -> Result<CommonRefinement> {
    let (w, to_left, to_right) = if phi.source.objects.len() == psi.source.objects.len()
        && phi.object_map == psi.object_map
        && phi.agrees_with(psi, bounds) == Some(true)
    {
        let id = PresentationMorphism::identity(&phi.source);
        (phi.source.clone(), id.clone(), id)
    } else {
        let fp = fibre_product_presentations(phi, psi, bounds)?;
        (fp.presentation, fp.to_left, fp.to_right)
    };
    let mut legs = leg_certificates(&to_left, bounds)?;
    legs.extend(leg_certificates(&to_right, bounds)?);
    let certificate = match check_algebraic_presentation(&w, budget, bounds) {
        Verdict::Proved(c) => c,
        other => return Err(Error::RefinementNotFound(format!("fibre product is not algebraic: {:?}", other.kind()))),
    };
    let refine = |m: &PresentationMorphism| match check_refinement(m, bounds) {
        Verdict::Proved(p) => Ok(p),
        Verdict::Refuted(f) => Err(Error::RefinementNotFound(serde_json::to_string(&f).unwrap_or_default())),
        Verdict::Unknown(e) => Err(Error::RefinementNotFound(format!("{}: {}", e.bound, e.detail))),
    };
    let refinements = [refine(&to_left)?, refine(&to_right)?];
    Ok(CommonRefinement { presentation: w, to_left, to_right, legs, certificate, refinements })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaEvidence {
    pub object: String,
    /// `ΓB = B` on the nose.
    pub identity: bool,
    pub degree: u32,
}

/// A relative scheme, represented by an affine presentation in the relative
/// site.
#[derive(Clone, Debug)]
pub struct RelativeScheme {
    pub representative: AffinePresentation,
    pub certificate: AlgebraicPresentationCertificate,
    pub gamma: Vec<GammaEvidence>,
    pub report: PresentationReport,
}

struct GammaChart {
    gamma: BpRef,
    sigma: BlueprintMorphism,
}

fn gamma_chart(b: &BpRef, bounds: &SearchBounds) -> Result<(GammaChart, GammaEvidence)> {
    let g = global_sections(b, bounds)?;
    if !g.complete {
        return Err(Error::GammaFixpointNotReached(format!("degree {}", g.degree + 1)));
    }
    if !g.new_sections.is_empty() || !g.collisions.is_empty() || g.gamma.atoms() != b.atoms() {
        return Err(Error::Unsupported("Γ on arrows needs global charts".into()));
    }
    let identity = Arc::ptr_eq(&g.gamma, b);
    Ok((GammaChart { gamma: g.gamma, sigma: g.sigma }, GammaEvidence { object: String::new(), identity, degree: g.degree }))
}

/// `Γf: ΓB_t -> ΓB_s` for `f: B_t -> B_s` between global charts.
fn gamma_map(f: &BlueprintMorphism, t: &GammaChart, s: &GammaChart) -> Result<BlueprintMorphism> {
    let images = f.images.iter().map(|m| s.sigma.apply(m)).collect();
    BlueprintMorphism::new(t.gamma.clone(), s.gamma.clone(), images)
}

fn gamma_charts(u: &AffinePresentation, bounds: &SearchBounds) -> Result<(Vec<GammaChart>, Vec<GammaEvidence>)> {
    let mut charts = Vec::new();
    let mut evidence = Vec::new();
    for (i, b) in u.objects.iter().enumerate() {
        let (c, mut ev) = gamma_chart(b, bounds)?;
        ev.object = u.names[i].clone();
        charts.push(c);
        evidence.push(ev);
    }
    Ok((charts, evidence))
}

/// `F(X) = colim spec ΓU` for an algebraic presentation `U` of `X`.
pub fn functor_f(u: &AffinePresentation, budget: &CoverBudget, bounds: &SearchBounds) -> Result<RelativeScheme> {
    let certificate = match check_algebraic_presentation(u, budget, bounds) {
        Verdict::Proved(c) => c,
        Verdict::Refuted(r) => return Err(Error::NotAlgebraicallyPresented(serde_json::to_string(&r).unwrap_or_default())),
        Verdict::Unknown(e) => return Err(Error::NotAlgebraicallyPresented(format!("undecided: {}", e.detail))),
    };
    let (charts, gamma) = gamma_charts(u, bounds)?;
    let mut rep = AffinePresentation::new(Site::Relative);
    for (i, c) in charts.iter().enumerate() {
        rep.add_object(&u.names[i], c.gamma.clone());
    }
    for a in &u.arrows {
        rep.add_arrow(a.from, a.to, gamma_map(&a.map, &charts[a.to], &charts[a.from])?)?;
    }
    let report = match check_affine_presentation(&rep, bounds) {
        Verdict::Proved(r) => r,
        _ => return Err(Error::InvalidPresentation("Γ of the presentation is not a relative presentation".into())),
    };
    Ok(RelativeScheme { representative: rep, certificate, gamma, report })
}

/// `F(Φ)` for a morphism between algebraic presentations.
pub fn functor_f_mor(phi: &PresentationMorphism, bounds: &SearchBounds) -> Result<PresentationMorphism> {
    let (sc, _) = gamma_charts(&phi.source, bounds)?;
    let (tc, _) = gamma_charts(&phi.target, bounds)?;
    let gamma_of = |u: &AffinePresentation, charts: &[GammaChart]| -> Result<AffinePresentation> {
        let mut rep = AffinePresentation::new(Site::Relative);
        for (i, c) in charts.iter().enumerate() {
            rep.add_object(&u.names[i], c.gamma.clone());
        }
        for a in &u.arrows {
            rep.add_arrow(a.from, a.to, gamma_map(&a.map, &charts[a.to], &charts[a.from])?)?;
        }
        Ok(rep)
    };
    let (s, t) = (gamma_of(&phi.source, &sc)?, gamma_of(&phi.target, &tc)?);
    let components = phi
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| gamma_map(c, &tc[phi.object_map[i]], &sc[i]))
        .collect::<Result<Vec<_>>>()?;
    PresentationMorphism::new(&s, &t, phi.object_map.clone(), components)
}

/// `G(Y)`: the representative read in the blue site and glued.
pub fn functor_g(y: &RelativeScheme, bounds: &SearchBounds) -> Result<BlueScheme> {
    glue(&y.representative.with_site(Site::Blue), bounds)
}

/// `G(Φ)`: the same diagram data read in the blue site.
pub fn functor_g_mor(phi: &PresentationMorphism) -> Result<PresentationMorphism> {
    PresentationMorphism::new(
        &phi.source.with_site(Site::Blue),
        &phi.target.with_site(Site::Blue),
        phi.object_map.clone(),
        phi.components.clone(),
    )
}

/// Candidate ring maps `B_j -> B_i`: by atom names, or through a common base
/// of two localizations.
fn candidate_map(bj: &BpRef, bi: &BpRef, bounds: &SearchBounds) -> Option<BlueprintMorphism> {
    if Arc::ptr_eq(bj, bi) {
        return Some(BlueprintMorphism::identity(bi));
    }
    let mut cands = Vec::new();
    if let Ok(m) = BlueprintMorphism::by_names(bj.clone(), bi.clone()) {
        cands.push(m);
    }
    if let (Some(lj), Some(li)) = (&bj.localization, &bi.localization) {
        if *lj.base == *li.base {
            if let Ok(canon) = BlueprintMorphism::by_names(lj.base.clone(), bi.clone()) {
                if let Ok(m) = localization_map(bj, &canon, bounds) {
                    cands.push(m);
                }
            }
        }
    }
    if let Some(lj) = &bj.localization {
        if *lj.base == **bi {
            if let Ok(m) = localization_map(bj, &BlueprintMorphism::identity(bi), bounds) {
                cands.push(m);
            }
        }
    }
    cands.into_iter().find(|m| m.validate(bounds).is_proved() && is_finite_localization(m, bounds).is_proved())
}

const REFINEMENT_SEARCH_NODES: usize = 20_000;

/// A refinement `U -> V` found by searching object maps whose components
/// come from `candidate_map`.
pub fn find_refinement(
    u: &AffinePresentation,
    v: &AffinePresentation,
    bounds: &SearchBounds,
) -> Option<(PresentationMorphism, RefinementProof)> {
    let mut options: Vec<Vec<(usize, BlueprintMorphism)>> = Vec::new();
    for bi in &u.objects {
        let mut row = Vec::new();
        for (j, bj) in v.objects.iter().enumerate() {
            if let Some(m) = candidate_map(bj, bi, bounds) {
                row.push((j, m));
            }
        }
        if row.is_empty() {
            return None;
        }
        options.push(row);
    }
    let mut choice: Vec<usize> = Vec::new();
    let mut nodes = 0;
    loop {
        nodes += 1;
        if nodes > REFINEMENT_SEARCH_NODES {
            return None;
        }
        let i = choice.len();
        if i == u.objects.len() {
            let object_map: Vec<usize> = choice.iter().enumerate().map(|(k, c)| options[k][*c].0).collect();
            let components = choice.iter().enumerate().map(|(k, c)| options[k][*c].1.clone()).collect();
            if let Ok(phi) = PresentationMorphism::new(u, v, object_map, components) {
                if let Verdict::Proved(p) = check_refinement(&phi, bounds) {
                    return Some((phi, p));
                }
            }
        } else {
            choice.push(0);
        }
        // advance to the next consistent partial choice
        loop {
            let last = choice.len().checked_sub(1)?;
            if choice[last] >= options[last].len() {
                choice.pop();
                {
                    let c = choice.last_mut()?;
                    *c += 1
                }
                continue;
            }
            let consistent = u.arrows.iter().all(|a| {
                if a.from > last || a.to > last {
                    return true;
                }
                let (x, y) = (options[a.from][choice[a.from]].0, options[a.to][choice[a.to]].0);
                v.reaches(x, y)
            });
            if consistent {
                break;
            }
            choice[last] += 1;
        }
        if choice.len() == u.objects.len() && nodes > 1 {
            // a complete candidate was already tried at this position
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeEquality {
    /// `left`, `right`, or `same`: which representative refines the other.
    pub refining: String,
    pub object_map: Vec<usize>,
    pub refinement: Option<RefinementProof>,
}

/// Inequality is never certified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NeverRefuted {}

pub fn relative_equal(y1: &RelativeScheme, y2: &RelativeScheme, bounds: &SearchBounds) -> Verdict<RelativeEquality, NeverRefuted> {
    let (u, v) = (&y1.representative, &y2.representative);
    if u.objects.len() == v.objects.len() && u.objects.iter().zip(&v.objects).all(|(a, b)| Arc::ptr_eq(a, b) || **a == **b) {
        let id = PresentationMorphism::identity(u);
        if id.validate(bounds).is_proved() && u.arrows.len() == v.arrows.len() {
            return Verdict::Proved(RelativeEquality {
                refining: "same".into(),
                object_map: (0..u.objects.len()).collect(),
                refinement: None,
            });
        }
    }
    if let Some((phi, p)) = find_refinement(u, v, bounds) {
        return Verdict::Proved(RelativeEquality { refining: "left".into(), object_map: phi.object_map, refinement: Some(p) });
    }
    if let Some((phi, p)) = find_refinement(v, u, bounds) {
        return Verdict::Proved(RelativeEquality { refining: "right".into(), object_map: phi.object_map, refinement: Some(p) });
    }
    Verdict::Unknown(Exhausted::new("refinement_search", "no refinement between the representatives"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonProof {
    pub points: usize,
    pub charts: Vec<GammaEvidence>,
    pub basic_opens_checked: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComparisonFailure {
    NotAlgebraic { detail: String },
    ChartNotIsomorphic { chart: String },
    PointMismatch { detail: String },
}

/// `G(F(X)) ≅ X`: chartwise section isomorphisms, a point bijection matching
/// specializations, and matching basic opens.
pub fn compare_gf(u: &AffinePresentation, budget: &CoverBudget, bounds: &SearchBounds) -> Verdict<ComparisonProof, ComparisonFailure> {
    let u = u.with_site(Site::Blue);
    let run = || -> Result<Verdict<ComparisonProof, ComparisonFailure>> {
        let x = glue(&u, bounds)?;
        let y = match functor_f(&u, budget, bounds) {
            Ok(y) => y,
            Err(Error::NotAlgebraicallyPresented(detail)) => {
                return Ok(Verdict::Refuted(ComparisonFailure::NotAlgebraic { detail }))
            }
            Err(e) => return Err(e),
        };
        let gx = functor_g(&y, bounds)?;
        let mut sigmas = Vec::new();
        for (i, b) in u.objects.iter().enumerate() {
            let gb = &y.representative.objects[i];
            let sigma = BlueprintMorphism::by_names(b.clone(), gb.clone())?;
            let back = BlueprintMorphism::by_names(gb.clone(), b.clone())?;
            let iso = sigma.validate(bounds).is_proved()
                && back.validate(bounds).is_proved()
                && sigma.then(&back).is_identity_on_atoms(bounds) == Some(true)
                && back.then(&sigma).is_identity_on_atoms(bounds) == Some(true);
            if !iso {
                return Ok(Verdict::Refuted(ComparisonFailure::ChartNotIsomorphic { chart: u.names[i].clone() }));
            }
            sigmas.push(sigma);
        }
        let mut rename: BTreeMap<usize, usize> = BTreeMap::new();
        for k in 0..x.len() {
            for &(c, i) in &x.points[k] {
                let p = &x.chart_points[c][i];
                let j = gx.chart_points[c].iter().position(|q| pull_back(&sigmas[c], q) == *p);
                let Some(j) = j else {
                    return Ok(Verdict::Refuted(ComparisonFailure::PointMismatch { detail: format!("{} has no image", x.show_point(k)) }));
                };
                let image = gx.class_of[c][j];
                if *rename.entry(k).or_insert(image) != image {
                    return Ok(Verdict::Refuted(ComparisonFailure::PointMismatch { detail: format!("{} splits", x.show_point(k)) }));
                }
            }
        }
        let rename: Vec<usize> = (0..x.len()).map(|k| rename[&k]).collect();
        if !homeomorphic_by(&x, &gx, &rename) {
            return Ok(Verdict::Refuted(ComparisonFailure::PointMismatch { detail: "specializations differ".into() }));
        }
        let mut checked = 0;
        for (c, b) in u.objects.iter().enumerate() {
            for a in b.monoid.all_atoms() {
                let h = Monomial::atom(a);
                let lhs: BTreeSet<usize> = x.basic_open(c, &h).into_iter().map(|k| rename[k]).collect();
                if lhs != gx.basic_open(c, &sigmas[c].apply(&h)) {
                    return Ok(Verdict::Refuted(ComparisonFailure::PointMismatch {
                        detail: format!("basic open of {} in {}", b.show(&h), u.names[c]),
                    }));
                }
                checked += 1;
            }
        }
        Ok(Verdict::Proved(ComparisonProof { points: x.len(), charts: y.gamma, basic_opens_checked: checked }))
    };
    run().unwrap_or_else(|e| Verdict::Unknown(Exhausted::new("comparison", e.to_string())))
}
