//! Localization, units, and the recognizers for localizations and finite
//! presentations.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::invariants::valid_evaluations;
use super::morphism::BlueprintMorphism;
use super::{proper_quotient, Blueprint, BpRef, Relation};
use crate::arith::{integer_nullspace, Builtin, Coeff, Inversion};
use crate::error::{Error, Result};
use crate::monoid::{Monomial, MonoidPresentation, Term};
use crate::verdict::{Exhausted, SearchBounds, Verdict};

#[derive(Clone, Debug)]
pub struct LocalizationInfo {
    pub base: BpRef,
    /// The inverted elements, as base monomials.
    pub elements: Vec<Monomial>,
    /// Adjoined atoms `u` with `e * u = 1`.
    pub inverse_atoms: Vec<(Monomial, u32)>,
    pub primes: BTreeSet<u64>,
}

fn inverse_name(b: &Blueprint, e: &Monomial, taken: &[String]) -> String {
    let mut stem = String::new();
    for (a, k) in e.exps() {
        stem.push_str(&b.atoms()[*a as usize]);
        if *k > 1 {
            stem.push_str(&k.to_string());
        }
    }
    let mut name = format!("{stem}_inv");
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// `S⁻¹B` for the multiplicative set generated by `gens`, with the canonical
/// morphism `B -> S⁻¹B`.
pub fn localize(b: &BpRef, gens: &[Monomial], bounds: &SearchBounds) -> Result<(BpRef, BlueprintMorphism)> {
    let dom = b.domain().clone();
    let mut primes = BTreeSet::new();
    let mut exps_parts: Vec<Monomial> = Vec::new();
    for g in gens {
        let g = b.normalize(&b.monoid.check(g)?);
        if g.is_zero() || b.eq_elements(&g, &Monomial::Zero, bounds) == Some(true) {
            return Err(Error::ZeroInverted(b.show(&g)));
        }
        let t = g.term().expect("nonzero");
        if !dom.is_f1() {
            primes.extend(dom.core_primes(&t.coeff));
        }
        if t.exps.is_empty() {
            continue;
        }
        let e = Monomial::Term(Term { coeff: Coeff::from_integer(1), exps: t.exps.clone() });
        if b.known_inverse(&e).is_some() || exps_parts.contains(&e) {
            continue;
        }
        exps_parts.push(e);
    }
    if primes.is_empty() && exps_parts.is_empty() {
        return Ok((b.clone(), BlueprintMorphism::identity(b)));
    }
    let new_dom = dom.invert(&primes).map_err(|_| Error::ZeroInverted(format!("{primes:?}")))?;
    let mut atoms = b.atoms().to_vec();
    let mut rels = b.monoid.relations.clone();
    let mut inverses = b.inverses.clone();
    let mut inverse_atoms = Vec::new();
    for e in &exps_parts {
        let name = inverse_name(b, e, &atoms);
        let u = atoms.len() as u32;
        atoms.push(name);
        let um = Monomial::atom(u);
        rels.push((e.mul_raw(&um, &new_dom), Monomial::one()));
        for (a, _) in e.exps() {
            if inverses.contains_key(a) {
                continue;
            }
            let rest = crate::monoid::exps_div(e.exps(), &[(*a, 1)]).expect("divides");
            let inv = Monomial::from_exps(rest).mul_raw(&um, &new_dom);
            inverses.insert(*a, inv);
        }
        inverses.insert(u, e.clone());
        inverse_atoms.push((e.clone(), u));
    }
    let rels = rels
        .into_iter()
        .map(|(x, y)| (retag(&x, &new_dom), retag(&y, &new_dom)))
        .collect();
    let monoid = MonoidPresentation::new(atoms, rels, new_dom.clone())?;
    let gens_rel: Vec<Relation> = b
        .generators
        .iter()
        .map(|(l, r)| {
            (
                crate::sum::normalize_terms(&monoid, l.terms().iter().map(|m| retag(m, &new_dom)).collect()),
                crate::sum::normalize_terms(&monoid, r.terms().iter().map(|m| retag(m, &new_dom)).collect()),
            )
        })
        .collect();
    let info = LocalizationInfo { base: b.clone(), elements: gens.to_vec(), inverse_atoms, primes };
    let loc = proper_quotient(monoid, gens_rel, inverses, Some(info), bounds)?;
    if loc.eq_elements(&Monomial::one(), &Monomial::Zero, bounds) == Some(true) {
        return Err(Error::ZeroInverted(gens.iter().map(|g| b.show(g)).collect::<Vec<_>>().join(", ")));
    }
    let loc = Arc::new(loc);
    let images = (0..b.atoms().len() as u32).map(|i| loc.normalize(&Monomial::atom(i))).collect();
    let f = BlueprintMorphism { source: b.clone(), target: loc.clone(), images };
    Ok((loc, f))
}

fn retag(m: &Monomial, dom: &crate::arith::CoeffDomain) -> Monomial {
    match m {
        Monomial::Zero => Monomial::Zero,
        Monomial::Term(t) => match dom.normalize(t.coeff) {
            None => Monomial::Zero,
            Some(c) => Monomial::Term(Term { coeff: c, exps: t.exps.clone() }),
        },
    }
}

/// Inverse of `m` in `b`, from known inverses or a bounded search.
pub fn unit_inverse(b: &Blueprint, m: &Monomial, bounds: &SearchBounds) -> Option<Monomial> {
    let m = b.normalize(m);
    let t = m.term()?;
    if let Some(inv) = b.known_inverse(&m) {
        return Some(inv);
    }
    let cinv = b.domain().inverse(&t.coeff)?;
    if !b.domain().is_unit(&t.coeff) {
        return None;
    }
    let mut acc = Monomial::scalar(cinv);
    for (a, k) in &t.exps {
        let ai = atom_inverse(b, *a, bounds)?;
        acc = acc.mul_raw(&ai.pow_raw(*k, b.domain()), b.domain());
    }
    let acc = b.normalize(&acc);
    if b.eq_elements(&b.mul(&m, &acc), &Monomial::one(), bounds) == Some(true) {
        Some(acc)
    } else {
        None
    }
}

fn atom_inverse(b: &Blueprint, a: u32, bounds: &SearchBounds) -> Option<Monomial> {
    if let Some(inv) = b.inverses.get(&a) {
        return Some(inv.clone());
    }
    let x = Monomial::atom(a);
    let mut power = Monomial::one();
    for _ in 0..bounds.max_degree {
        let next = b.mul(&power, &x);
        if b.eq_elements(&next, &Monomial::one(), bounds) == Some(true) {
            return Some(power);
        }
        power = next;
    }
    for q in b.monoid.enumerate(&b.monoid.all_atoms(), bounds.max_degree.min(3)) {
        if q.is_zero() {
            continue;
        }
        if b.eq_elements(&b.mul(&x, &q), &Monomial::one(), bounds) == Some(true) {
            return Some(q);
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitsReport {
    /// Unit atoms with their inverses.
    pub unit_atoms: Vec<(u32, Monomial)>,
    pub coefficient_generators: Vec<Coeff>,
    /// Units up to the degree bound.
    pub elements: Vec<Monomial>,
    /// True when every other atom is certified a non-unit.
    pub complete: bool,
}

pub fn units(b: &Blueprint, bounds: &SearchBounds) -> UnitsReport {
    let mut unit_atoms = Vec::new();
    let mut complete = true;
    let evals = valid_evaluations(b, 20_000);
    for a in b.monoid.all_atoms() {
        match atom_inverse(b, a, bounds) {
            Some(inv) => unit_atoms.push((a, inv)),
            None => {
                let killed = evals.iter().any(|(_, v)| v[a as usize] == 0);
                if !killed {
                    complete = false;
                }
            }
        }
    }
    let ua: Vec<u32> = unit_atoms.iter().map(|(a, _)| *a).collect();
    let deg = bounds.max_degree.min(4);
    let mut elements = b.monoid.enumerate(&ua, deg);
    let cg = b.domain().unit_generators();
    if matches!(b.domain().builtin, Builtin::IntModN(_)) || !cg.is_empty() {
        let extra: Vec<Monomial> = cg.iter().map(|c| Monomial::scalar(*c)).collect();
        for c in extra {
            if !elements.contains(&c) {
                elements.push(c);
            }
        }
    }
    if matches!(b.domain().inverted, Inversion::AllExcept(_)) {
        complete = false;
    }
    UnitsReport { unit_atoms, coefficient_generators: cg, elements, complete }
}

#[derive(Clone, Debug)]
pub struct LocalizationProof {
    /// Generators of S, as source monomials (coefficient primes as scalars).
    pub s_generators: Vec<Monomial>,
    /// `S⁻¹B` and the induced map to the target.
    pub localized: BpRef,
    pub f_s: BlueprintMorphism,
    /// The inverse of `f_s`.
    pub inverse: BlueprintMorphism,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalizationFailure {
    /// A target atom outside the image: every image atom has weight >= 0 while
    /// the atom has negative weight (or images have weight 0 and it does not).
    NoPreimage { atom: String, weights: Vec<i64> },
    /// A target atom missing from the finite image set.
    NotInFiniteImage { atom: String, image_size: usize },
    /// Target coefficients not reached from the source coefficients.
    CoefficientsNotReached { source: String, target: String },
    /// Two distinct elements of `S⁻¹B` with equal images.
    NotInjective { left: String, right: String },
}

pub(crate) fn weight_obstruction(c: &Blueprint, images: &[Monomial], atom: u32) -> Option<Vec<i64>> {
    let n = c.atoms().len();
    let vec_of = |m: &Monomial| {
        let mut v = vec![0i64; n];
        for (a, k) in m.exps() {
            v[*a as usize] += *k as i64;
        }
        v
    };
    let mut rows = Vec::new();
    for (x, y) in &c.monoid.relations {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        let (vx, vy) = (vec_of(x), vec_of(y));
        rows.push(vx.iter().zip(&vy).map(|(a, b)| a - b).collect::<Vec<_>>());
    }
    let basis = integer_nullspace(&rows, n);
    if basis.is_empty() {
        return None;
    }
    let k = basis.len().min(4);
    let range: Vec<i64> = vec![-2, -1, 0, 1, 2];
    let total = range.len().pow(k as u32);
    for idx in 0..total {
        let mut w = vec![0i64; n];
        let mut r = idx;
        for bv in basis.iter().take(k) {
            let coef = range[r % range.len()];
            r /= range.len();
            for (wi, bi) in w.iter_mut().zip(bv) {
                *wi += coef * bi;
            }
        }
        let weight = |m: &Monomial| -> i64 { m.exps().iter().map(|(a, e)| w[*a as usize] * *e as i64).sum() };
        let target = weight(&Monomial::atom(atom));
        let ws: Vec<i64> = images.iter().filter(|m| !m.is_zero()).map(weight).collect();
        let nonneg = ws.iter().all(|x| *x >= 0) && target < 0;
        let nonpos = ws.iter().all(|x| *x <= 0) && target > 0;
        if nonneg || nonpos {
            return Some(w);
        }
    }
    None
}

/// Enumerate all elements of a blueprint whose monoid is finite.
pub(crate) fn finite_elements(b: &Blueprint, cap: usize) -> Option<Vec<Monomial>> {
    if !b.monoid.is_complete() {
        return None;
    }
    let dom = b.domain();
    let mut start = vec![Monomial::one()];
    match dom.builtin {
        Builtin::None => {}
        Builtin::IntModN(n) => start = (1..n as i128).map(|v| Monomial::scalar(Coeff::from_integer(v))).collect(),
        _ => return None,
    }
    let mut seen: BTreeSet<Monomial> = start.iter().cloned().collect();
    let mut frontier = start;
    seen.insert(Monomial::Zero);
    while let Some(m) = frontier.pop() {
        for a in b.monoid.all_atoms() {
            let n = b.mul(&m, &Monomial::atom(a));
            if seen.insert(n.clone()) {
                if seen.len() > cap {
                    return None;
                }
                frontier.push(n);
            }
        }
    }
    Some(seen.into_iter().collect())
}

/// Search an inverse for `f` by preimages of the target atoms; validates the
/// inverse and both composites.
pub(crate) fn invert_by_preimages(
    f: &BlueprintMorphism,
    bounds: &SearchBounds,
) -> Verdict<BlueprintMorphism, LocalizationFailure> {
    let src = &f.source;
    let tgt = &f.target;
    let deg = bounds.max_degree.min(4);
    let cands = src.monoid.enumerate(&src.monoid.all_atoms(), deg);
    let mut pre = Vec::new();
    for y in tgt.monoid.all_atoms() {
        let ym = tgt.normalize(&Monomial::atom(y));
        let found = cands.iter().find(|m| tgt.eq_elements(&f.apply(m), &ym, bounds) == Some(true));
        match found {
            Some(m) => pre.push(m.clone()),
            None => {
                if let Some(w) = weight_obstruction(tgt, &f.images, y) {
                    return Verdict::Refuted(LocalizationFailure::NoPreimage { atom: tgt.atoms()[y as usize].clone(), weights: w });
                }
                if let Some(elems) = finite_elements(src, 5000) {
                    let hit = elems.iter().any(|m| tgt.eq_elements(&f.apply(m), &ym, bounds) == Some(true));
                    if !hit {
                        return Verdict::Refuted(LocalizationFailure::NotInFiniteImage {
                            atom: tgt.atoms()[y as usize].clone(),
                            image_size: elems.len(),
                        });
                    }
                }
                return Verdict::Unknown(Exhausted::new(
                    "max_degree",
                    format!("no preimage of {} up to degree {deg}", tgt.atoms()[y as usize]),
                ));
            }
        }
    }
    if !f.coefficients_surjective() {
        return Verdict::Refuted(LocalizationFailure::CoefficientsNotReached {
            source: src.domain().describe(),
            target: tgt.domain().describe(),
        });
    }
    let g = match BlueprintMorphism::new(tgt.clone(), src.clone(), pre) {
        Ok(g) => g,
        Err(e) => return Verdict::Unknown(Exhausted::new("inverse", e.to_string())),
    };
    for (i, x) in src.monoid.all_atoms().into_iter().enumerate() {
        let back = g.apply(&f.images[i]);
        let xm = src.normalize(&Monomial::atom(x));
        match src.eq_elements(&back, &xm, bounds) {
            Some(true) => {}
            Some(false) => {
                return Verdict::Refuted(LocalizationFailure::NotInjective { left: src.show(&xm), right: src.show(&back) })
            }
            None => return Verdict::Unknown(Exhausted::new("max_steps", "composite identity undecided")),
        }
    }
    match g.validate(bounds) {
        Verdict::Proved(()) => Verdict::Proved(g),
        Verdict::Refuted(_) => Verdict::Unknown(Exhausted::new("reflection", "candidate inverse does not preserve relations")),
        Verdict::Unknown(e) => Verdict::Unknown(e),
    }
}

/// Canonical map `S⁻¹B -> X` induced by `base_map: B -> X` sending S to units.
pub fn localization_map(loc: &BpRef, base_map: &BlueprintMorphism, bounds: &SearchBounds) -> Result<BlueprintMorphism> {
    // `localize` returns its input when nothing needs inverting
    if loc.localization.is_none() && (Arc::ptr_eq(loc, &base_map.source) || **loc == *base_map.source) {
        return Ok(base_map.clone());
    }
    let info = loc
        .localization
        .as_ref()
        .ok_or_else(|| Error::InvalidMorphism("source is not a localization".into()))?;
    let x = &base_map.target;
    let mut images = base_map.images.clone();
    images.resize(loc.atoms().len(), Monomial::one());
    for (e, u) in &info.inverse_atoms {
        let fe = base_map.apply(e);
        let inv = unit_inverse(x, &fe, bounds)
            .ok_or_else(|| Error::InvalidMorphism(format!("{} is not a unit in the target", x.show(&fe))))?;
        images[*u as usize] = inv;
    }
    for p in &info.primes {
        let c = Coeff::from_integer(*p as i128);
        if !x.domain().is_unit(&c) {
            return Err(Error::InvalidMorphism(format!("{p} is not a unit in the target")));
        }
    }
    BlueprintMorphism::new(loc.clone(), x.clone(), images)
}

/// Decide whether `f` is (isomorphic to) a localization of its source.
pub fn is_localization(f: &BlueprintMorphism, bounds: &SearchBounds) -> Verdict<LocalizationProof, LocalizationFailure> {
    let src = &f.source;
    let tgt = &f.target;
    if let (Builtin::Nat | Builtin::Int, Builtin::IntModN(n)) = (src.domain().builtin, tgt.domain().builtin) {
        return Verdict::Refuted(LocalizationFailure::NotInjective { left: n.to_string(), right: "0".into() });
    }
    let mut s_gens: Vec<Monomial> = Vec::new();
    for a in src.monoid.all_atoms() {
        if src.is_unit_atom(a) {
            continue;
        }
        let fa = &f.images[a as usize];
        if !fa.is_zero() && unit_inverse(tgt, fa, bounds).is_some() {
            s_gens.push(Monomial::atom(a));
        }
    }
    if let (Inversion::Primes(ts), false) = (&tgt.domain().inverted, src.domain().is_f1()) {
        for p in ts {
            if !src.domain().inverted.contains(*p) {
                s_gens.push(Monomial::scalar(Coeff::from_integer(*p as i128)));
            }
        }
    }
    let (loc, canon) = match localize(src, &s_gens, bounds) {
        Ok(x) => x,
        Err(e) => return Verdict::Unknown(Exhausted::new("localize", e.to_string())),
    };
    let f_s = if Arc::ptr_eq(&loc, src) {
        f.clone()
    } else {
        match localization_map(&loc, f, bounds) {
            Ok(m) => m,
            Err(e) => return Verdict::Unknown(Exhausted::new("localize", e.to_string())),
        }
    };
    let _ = canon;
    match invert_by_preimages(&f_s, bounds) {
        Verdict::Proved(inverse) => Verdict::Proved(LocalizationProof { s_generators: s_gens, localized: loc, f_s, inverse }),
        Verdict::Refuted(r) => Verdict::Refuted(r),
        Verdict::Unknown(e) => Verdict::Unknown(e),
    }
}

/// A localization proof always lists finitely many generators here.
pub fn is_finite_localization(f: &BlueprintMorphism, bounds: &SearchBounds) -> Verdict<LocalizationProof, LocalizationFailure> {
    is_localization(f, bounds)
}

#[derive(Clone, Debug)]
pub struct PresentationProof {
    pub presented: BpRef,
    pub comparison: BlueprintMorphism,
    pub inverse: BlueprintMorphism,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PresentationFailure {
    NotGenerated(LocalizationFailure),
    InvalidComparison(String),
}

/// Check that `C` is presented over `B` by generators `gens` (images of fresh
/// variables `T1..Tn`) and relations `rels` over `B[T1..Tn]`.
pub fn verify_presentation(
    f: &BlueprintMorphism,
    vars: &[String],
    gens: &[Monomial],
    rels: Vec<Relation>,
    bounds: &SearchBounds,
) -> Result<Verdict<PresentationProof, PresentationFailure>> {
    let free = super::free_blueprint(&f.source, vars)?;
    let mut all_rels: Vec<Relation> = free.generators.clone();
    all_rels.extend(rels);
    let presented = Arc::new(proper_quotient(
        free.monoid.clone(),
        all_rels,
        f.source.inverses.clone(),
        None,
        bounds,
    )?);
    let mut images = f.images.clone();
    images.extend(gens.iter().cloned());
    let cmp = BlueprintMorphism::new(presented.clone(), f.target.clone(), images)?;
    match cmp.validate(bounds) {
        Verdict::Proved(()) => {}
        Verdict::Refuted(v) => return Ok(Verdict::Refuted(PresentationFailure::InvalidComparison(format!("{v:?}")))),
        Verdict::Unknown(e) => return Ok(Verdict::Unknown(e)),
    }
    Ok(match invert_by_preimages(&cmp, bounds) {
        Verdict::Proved(inverse) => Verdict::Proved(PresentationProof { presented, comparison: cmp, inverse }),
        Verdict::Refuted(r) => Verdict::Refuted(PresentationFailure::NotGenerated(r)),
        Verdict::Unknown(e) => Verdict::Unknown(e),
    })
}
