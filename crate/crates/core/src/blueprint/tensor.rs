//! Tensor products (pushouts) and colimits of finite directed diagrams.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::morphism::BlueprintMorphism;
use super::{proper_quotient, BpRef, Relation};
use crate::arith::CoeffDomain;
use crate::error::{Error, Result};
use crate::monoid::{Monomial, MonoidPresentation, Term};
use crate::sum::{normalize_terms, FormalSum};
use crate::verdict::{SearchBounds, Verdict};

/// `B ⊗_D C` with its two canonical morphisms.
#[derive(Clone, Debug)]
pub struct Tensor {
    pub blueprint: BpRef,
    pub left: BlueprintMorphism,
    pub right: BlueprintMorphism,
}

fn retag(m: &Monomial, dom: &CoeffDomain) -> Monomial {
    match m {
        Monomial::Zero => Monomial::Zero,
        Monomial::Term(t) => match dom.normalize(t.coeff) {
            None => Monomial::Zero,
            Some(c) => Monomial::Term(Term { coeff: c, exps: t.exps.clone() }),
        },
    }
}

pub fn tensor_blueprints(f: &BlueprintMorphism, g: &BlueprintMorphism, bounds: &SearchBounds) -> Result<Tensor> {
    if *f.source != *g.source {
        return Err(Error::BaseMismatch);
    }
    let (b, c) = (&f.target, &g.target);
    let dom = b.domain().join(c.domain())?;
    let offset = b.atoms().len() as u32;
    let mut atoms = b.atoms().to_vec();
    for a in c.atoms() {
        let mut name = a.clone();
        while atoms.contains(&name) {
            name.push('\'');
        }
        atoms.push(name);
    }
    let shift = |m: &Monomial| retag(&m.reindex(&|i| i + offset), &dom);
    let mut rels: Vec<(Monomial, Monomial)> = b.monoid.relations.iter().map(|(x, y)| (retag(x, &dom), retag(y, &dom))).collect();
    rels.extend(c.monoid.relations.iter().map(|(x, y)| (shift(x), shift(y))));
    for (fd, gd) in f.images.iter().zip(&g.images) {
        rels.push((retag(fd, &dom), shift(gd)));
    }
    let monoid = MonoidPresentation::new(atoms, rels, dom.clone())?;
    let lift = |s: &FormalSum, sh: bool| {
        let terms = s.terms().iter().map(|m| if sh { shift(m) } else { retag(m, &dom) }).collect();
        normalize_terms(&monoid, terms)
    };
    let mut gens: Vec<Relation> = b.generators.iter().map(|(l, r)| (lift(l, false), lift(r, false))).collect();
    gens.extend(c.generators.iter().map(|(l, r)| (lift(l, true), lift(r, true))));
    let mut inverses: BTreeMap<u32, Monomial> = b.inverses.iter().map(|(k, v)| (*k, retag(v, &dom))).collect();
    inverses.extend(c.inverses.iter().map(|(k, v)| (k + offset, shift(v))));
    let t = Arc::new(proper_quotient(monoid, gens, inverses, None, bounds)?);
    let left = BlueprintMorphism::new(b.clone(), t.clone(), (0..offset).map(Monomial::atom).collect())?;
    let right = BlueprintMorphism::new(
        c.clone(),
        t.clone(),
        (0..c.atoms().len() as u32).map(|i| Monomial::atom(i + offset)).collect(),
    )?;
    Ok(Tensor { blueprint: t, left, right })
}

/// The map `B ⊗_D C -> X` induced by `h1: B -> X` and `h2: C -> X`.
pub fn tensor_universal_map(
    t: &Tensor,
    h1: &BlueprintMorphism,
    h2: &BlueprintMorphism,
    bounds: &SearchBounds,
) -> Result<Verdict<BlueprintMorphism, super::MorphismViolation>> {
    if !Arc::ptr_eq(&h1.target, &h2.target) && *h1.target != *h2.target {
        return Err(Error::InvalidMorphism("legs have different targets".into()));
    }
    let mut images = h1.images.clone();
    images.extend(h2.images.iter().cloned());
    BlueprintMorphism::make(t.blueprint.clone(), h1.target.clone(), images, bounds)
}

/// A finite diagram: objects and arrows `(from, to, morphism)`.
#[derive(Clone, Debug, Default)]
pub struct Diagram {
    pub objects: Vec<BpRef>,
    pub arrows: Vec<(usize, usize, BlueprintMorphism)>,
}

#[derive(Clone, Debug)]
pub struct Colimit {
    pub blueprint: BpRef,
    /// Index of the terminal object representing the colimit.
    pub terminal: usize,
    pub injections: Vec<BlueprintMorphism>,
}

/// All composites from `i` to `target` along arrows of the diagram.
fn paths_to(d: &Diagram, i: usize, target: usize, depth: usize, out: &mut Vec<BlueprintMorphism>, acc: BlueprintMorphism) {
    if out.len() > 64 {
        return;
    }
    if i == target {
        out.push(acc.clone());
    }
    if depth == 0 {
        return;
    }
    for (from, to, m) in &d.arrows {
        if *from == i && *to != i {
            paths_to(d, *to, target, depth - 1, out, acc.then(m));
        }
    }
}

/// Colimit of a finite directed commutative diagram. Such a diagram has a
/// terminal object, which represents the colimit.
pub fn directed_colimit(d: &Diagram, bounds: &SearchBounds) -> Result<Colimit> {
    if d.objects.is_empty() {
        return Err(Error::NotDirected("empty diagram".into()));
    }
    for (from, to, m) in &d.arrows {
        if *from >= d.objects.len() || *to >= d.objects.len() {
            return Err(Error::NotDirected(format!("arrow {from} -> {to} leaves the diagram")));
        }
        if *m.source != *d.objects[*from] || *m.target != *d.objects[*to] {
            return Err(Error::InvalidMorphism(format!("arrow {from} -> {to} does not match its objects")));
        }
    }
    let depth = d.objects.len();
    'outer: for t in 0..d.objects.len() {
        let mut injections = Vec::new();
        for i in 0..d.objects.len() {
            let mut ps = Vec::new();
            paths_to(d, i, t, depth, &mut ps, BlueprintMorphism::identity(&d.objects[i]));
            if ps.is_empty() {
                continue 'outer;
            }
            for p in &ps[1..] {
                if ps[0].agrees_with(p, bounds) != Some(true) {
                    return Err(Error::NotDirected(format!("two paths from object {i} to object {t} disagree")));
                }
            }
            injections.push(ps.swap_remove(0));
        }
        return Ok(Colimit { blueprint: d.objects[t].clone(), terminal: t, injections });
    }
    Err(Error::NotDirected("no object receives arrows from every object".into()))
}
