//! Affine presentations: finite commutative diagrams of opens, their atlases,
//! refinements, fibre products and gluing into blue schemes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::factorize;
use crate::blueprint::{
    is_finite_localization, localization_map, localize, tensor_blueprints, tensor_universal_map, BlueprintMorphism, BpRef,
    LocalizationFailure, LocalizationProof, Tensor,
};
use crate::conservativity::{conservativity, torsion_point_witness, ConservativeCertificate, TorsionOutcome, Witness};
use crate::error::{Error, Result};
use crate::monoid::{divide_term, Monomial};
use crate::spectra::{prime_ideals, pull_back, PrimeIdeal};
use crate::verdict::{Exhausted, SearchBounds, Verdict, VerdictKind};

/// Largest characteristic materialized for symbolic chart spectra.
pub const GLUE_PRIME_BOUND: u64 = 50;

const MAX_PATHS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    Blue,
    Relative,
}

/// The geometric arrow `objects[from] -> objects[to]`, given by its ring map
/// `objects[to] -> objects[from]`.
#[derive(Clone, Debug)]
pub struct Arrow {
    pub from: usize,
    pub to: usize,
    pub map: BlueprintMorphism,
}

#[derive(Clone, Debug)]
pub struct AffinePresentation {
    pub site: Site,
    pub names: Vec<String>,
    pub objects: Vec<BpRef>,
    pub arrows: Vec<Arrow>,
}

fn same(a: &BpRef, b: &BpRef) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl AffinePresentation {
    pub fn new(site: Site) -> Self {
        AffinePresentation { site, names: vec![], objects: vec![], arrows: vec![] }
    }

    /// One chart and no arrows.
    pub fn affine(site: Site, name: &str, b: BpRef) -> Self {
        let mut p = Self::new(site);
        p.add_object(name, b);
        p
    }

    pub fn add_object(&mut self, name: &str, b: BpRef) -> usize {
        self.names.push(name.to_string());
        self.objects.push(b);
        self.objects.len() - 1
    }

    pub fn add_arrow(&mut self, from: usize, to: usize, map: BlueprintMorphism) -> Result<()> {
        let n = self.objects.len();
        if from >= n || to >= n {
            return Err(Error::InvalidPresentation(format!("arrow {from} -> {to} leaves the diagram")));
        }
        if !same(&map.source, &self.objects[to]) || !same(&map.target, &self.objects[from]) {
            return Err(Error::InvalidPresentation(format!(
                "arrow {} -> {} does not match its objects",
                self.names[from], self.names[to]
            )));
        }
        self.arrows.push(Arrow { from, to, map });
        Ok(())
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// The same diagram read in the other site.
    pub fn with_site(&self, site: Site) -> Self {
        AffinePresentation { site, ..self.clone() }
    }

    /// Ring maps of all simple paths from `from` to `to` (the identity when
    /// equal).
    pub fn paths(&self, from: usize, to: usize) -> Vec<BlueprintMorphism> {
        let mut out = Vec::new();
        let mut visited = vec![false; self.objects.len()];
        self.walk(from, to, &mut visited, BlueprintMorphism::identity(&self.objects[from]), &mut out);
        out
    }

    fn walk(&self, at: usize, to: usize, visited: &mut [bool], acc: BlueprintMorphism, out: &mut Vec<BlueprintMorphism>) {
        if out.len() >= MAX_PATHS {
            return;
        }
        if at == to {
            out.push(acc);
            return;
        }
        visited[at] = true;
        for a in &self.arrows {
            if a.from == at && !visited[a.to] {
                self.walk(a.to, to, visited, a.map.then(&acc), out);
            }
        }
        visited[at] = false;
    }

    /// The ring map of the composite `from -> to`, if there is one.
    pub fn composite(&self, from: usize, to: usize) -> Option<BlueprintMorphism> {
        let mut prev: Vec<Option<usize>> = vec![None; self.objects.len()];
        let mut seen = vec![false; self.objects.len()];
        let mut queue = std::collections::VecDeque::from([from]);
        seen[from] = true;
        while let Some(i) = queue.pop_front() {
            if i == to {
                let mut acc = BlueprintMorphism::identity(&self.objects[to]);
                let mut at = to;
                while let Some(k) = prev[at] {
                    acc = acc.then(&self.arrows[k].map);
                    at = self.arrows[k].from;
                }
                return Some(acc);
            }
            for (k, a) in self.arrows.iter().enumerate() {
                if a.from == i && !seen[a.to] {
                    seen[a.to] = true;
                    prev[a.to] = Some(k);
                    queue.push_back(a.to);
                }
            }
        }
        None
    }

    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.composite(from, to).is_some()
    }

    /// Objects whose only arrows out return to themselves.
    pub fn maximal(&self) -> Vec<usize> {
        (0..self.objects.len()).filter(|i| self.arrows.iter().all(|a| a.from != *i || a.to == *i)).collect()
    }

    /// `U_{U,V}`: objects with arrows to both `u` and `v`.
    pub fn common(&self, u: usize, v: usize) -> Vec<usize> {
        (0..self.objects.len()).filter(|w| self.reaches(*w, u) && self.reaches(*w, v)).collect()
    }

    /// Objects of the atlas: maximal elements and the members of `U_{U,V}`
    /// for distinct maximal `U, V`.
    pub fn atlas_objects(&self) -> Vec<usize> {
        let max = self.maximal();
        let mut out: BTreeSet<usize> = max.iter().copied().collect();
        for (k, a) in max.iter().enumerate() {
            for b in &max[k + 1..] {
                out.extend(self.common(*a, *b));
            }
        }
        out.into_iter().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PresentationDefect {
    NotThin { from: String, to: String },
    NoMaximalElement { object: String },
    NotOpen { from: String, to: String, failure: LocalizationFailure },
    Cocycle { charts: [String; 3], overlaps: [String; 3], image: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub verdict: VerdictKind,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresentationReport {
    pub axioms: Vec<AxiomCheck>,
    pub maximal: Vec<String>,
    /// Inverted elements of each arrow, shown in the target chart.
    pub localizations: Vec<Vec<String>>,
    pub triples_checked: usize,
}

type Step = std::result::Result<Option<Exhausted>, PresentationDefect>;

fn thinness(u: &AffinePresentation, bounds: &SearchBounds) -> Step {
    let mut unknown = None;
    for i in 0..u.objects.len() {
        for j in 0..u.objects.len() {
            let ps = u.paths(i, j);
            for p in ps.iter().skip(1) {
                match ps[0].agrees_with(p, bounds) {
                    Some(true) => {}
                    Some(false) => {
                        return Err(PresentationDefect::NotThin { from: u.names[i].clone(), to: u.names[j].clone() })
                    }
                    None => unknown = Some(Exhausted::new("max_steps", "path comparison undecided")),
                }
            }
        }
    }
    Ok(unknown)
}

fn maxima(u: &AffinePresentation) -> Step {
    let max = u.maximal();
    for i in 0..u.objects.len() {
        if !max.iter().any(|m| u.reaches(i, *m)) {
            return Err(PresentationDefect::NoMaximalElement { object: u.names[i].clone() });
        }
    }
    Ok(None)
}

fn openness(u: &AffinePresentation, bounds: &SearchBounds, gens: &mut Vec<Vec<String>>) -> Step {
    let mut unknown = None;
    for a in &u.arrows {
        match is_finite_localization(&a.map, bounds) {
            Verdict::Proved(p) => gens.push(p.s_generators.iter().map(|m| a.map.source.show(m)).collect()),
            Verdict::Refuted(failure) => {
                return Err(PresentationDefect::NotOpen { from: u.names[a.from].clone(), to: u.names[a.to].clone(), failure })
            }
            Verdict::Unknown(e) => {
                gens.push(vec![]);
                unknown = Some(e);
            }
        }
    }
    Ok(unknown)
}

/// `C ⊗_B L` for `f: B -> C` and an open `l: B -> L`, computed as a
/// localization of `C` when `l` is certified, else as a tensor product.
fn pushout(
    f: &BlueprintMorphism,
    l: &BlueprintMorphism,
    proof: Option<&LocalizationProof>,
    bounds: &SearchBounds,
) -> Result<Tensor> {
    let Some(p) = proof else { return tensor_blueprints(f, l, bounds) };
    let gens: Vec<Monomial> = p.s_generators.iter().map(|s| f.apply(s)).collect();
    let Ok((t, canon)) = localize(&f.target, &gens, bounds) else { return tensor_blueprints(f, l, bounds) };
    let base = f.then(&canon);
    let from_loc = if Arc::ptr_eq(&p.localized, &l.source) { base } else { localization_map(&p.localized, &base, bounds)? };
    Ok(Tensor { blueprint: t, left: canon, right: p.inverse.then(&from_loc) })
}

/// Check the cocycle condition on the universal test object
/// `W = (U12 ×_{U1} U13) ×_{U2} U23`, through which every `W` with the first
/// two squares commuting factors.
fn cocycle_triple(
    u: &AffinePresentation,
    [c1, c2, c3]: [usize; 3],
    [u12, u13, u23]: [usize; 3],
    proofs: &mut BTreeMap<(usize, usize), Option<LocalizationProof>>,
    bounds: &SearchBounds,
) -> Result<Option<bool>> {
    let arrow = |w: usize, c: usize| u.composite(w, c).expect("member of a common subdiagram");
    let mut proof = |w: usize, c: usize| {
        proofs.entry((w, c)).or_insert_with(|| is_finite_localization(&arrow(w, c), bounds).proved()).clone()
    };
    let (p13, p23) = (proof(u13, c1), proof(u23, c2));
    let t1 = pushout(&arrow(u12, c1), &arrow(u13, c1), p13.as_ref(), bounds)?;
    let g = arrow(u12, c2).then(&t1.left);
    let t2 = pushout(&g, &arrow(u23, c2), p23.as_ref(), bounds)?;
    let psi13 = t1.right.then(&t2.left);
    let lhs = arrow(u13, c3).then(&psi13);
    let rhs = arrow(u23, c3).then(&t2.right);
    Ok(lhs.agrees_with(&rhs, bounds))
}

/// Members of `U_{U,V}` with no arrow to another member. Given thinness the
/// condition pulls back along arrows, so these suffice.
fn top_common(u: &AffinePresentation, a: usize, b: usize) -> Vec<usize> {
    let common = u.common(a, b);
    common.iter().copied().filter(|w| !common.iter().any(|v| v != w && u.reaches(*w, *v))).collect()
}

fn cocycle(u: &AffinePresentation, bounds: &SearchBounds, count: &mut usize) -> Step {
    let max = u.maximal();
    let mut unknown = None;
    let mut proofs = BTreeMap::new();
    for (x, &c1) in max.iter().enumerate() {
        for &c2 in &max[x + 1..] {
            for &c3 in &max {
                if c3 == c1 || c3 == c2 {
                    continue;
                }
                for &u12 in &top_common(u, c1, c2) {
                    for &u13 in &top_common(u, c1, c3) {
                        for &u23 in &top_common(u, c2, c3) {
                            *count += 1;
                            match cocycle_triple(u, [c1, c2, c3], [u12, u13, u23], &mut proofs, bounds) {
                                Ok(Some(true)) => {}
                                Ok(Some(false)) => {
                                    return Err(PresentationDefect::Cocycle {
                                        charts: [c1, c2, c3].map(|i| u.names[i].clone()),
                                        overlaps: [u12, u13, u23].map(|i| u.names[i].clone()),
                                        image: u.names[c3].clone(),
                                    })
                                }
                                Ok(None) => unknown = Some(Exhausted::new("max_steps", "cocycle comparison undecided")),
                                Err(e) => unknown = Some(Exhausted::new("tensor", e.to_string())),
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(unknown)
}

/// Validate thinness, maximal elements, open arrows and the cocycle condition.
pub fn check_affine_presentation(u: &AffinePresentation, bounds: &SearchBounds) -> Verdict<PresentationReport, PresentationDefect> {
    let mut report = PresentationReport {
        axioms: vec![],
        maximal: u.maximal().iter().map(|i| u.names[*i].clone()).collect(),
        localizations: vec![],
        triples_checked: 0,
    };
    if u.objects.is_empty() {
        return Verdict::Refuted(PresentationDefect::NoMaximalElement { object: "(empty diagram)".into() });
    }
    let mut first_defect = None;
    let mut unknown = None;
    let mut gens = Vec::new();
    let mut count = 0;
    let steps: [(&str, Step); 4] = [
        ("thin", thinness(u, bounds)),
        ("maximal_elements", maxima(u)),
        ("open_arrows", openness(u, bounds, &mut gens)),
        ("cocycle", cocycle(u, bounds, &mut count)),
    ];
    for (name, step) in steps {
        let (verdict, detail) = match step {
            Ok(None) => (VerdictKind::Proved, String::new()),
            Ok(Some(e)) => {
                let d = format!("{}: {}", e.bound, e.detail);
                unknown.get_or_insert(e);
                (VerdictKind::Unknown, d)
            }
            Err(d) => {
                let text = serde_json::to_string(&d).unwrap_or_default();
                first_defect.get_or_insert(d);
                (VerdictKind::Refuted, text)
            }
        };
        report.axioms.push(AxiomCheck { axiom: name.into(), verdict, detail });
    }
    report.localizations = gens;
    report.triples_checked = count;
    match (first_defect, unknown) {
        (Some(d), _) => Verdict::Refuted(d),
        (None, Some(e)) => Verdict::Unknown(e),
        (None, None) => Verdict::Proved(report),
    }
}

/// `⟨U⟩` with every composite as an arrow, and the embedding `U -> ⟨U⟩`.
pub fn spanned_category(u: &AffinePresentation) -> (AffinePresentation, PresentationMorphism) {
    let mut s = AffinePresentation { arrows: vec![], ..u.clone() };
    for i in 0..u.objects.len() {
        for j in 0..u.objects.len() {
            if i != j {
                if let Some(m) = u.composite(i, j) {
                    s.arrows.push(Arrow { from: i, to: j, map: m });
                }
            }
        }
    }
    let phi = PresentationMorphism::identity_between(u, &s);
    (s, phi)
}

/// `Φ: U -> V` with components `Φ_U: U -> Φ(U)`, stored as ring maps
/// `objects_V[Φ(U)] -> objects_U[U]`.
#[derive(Clone, Debug)]
pub struct PresentationMorphism {
    pub source: AffinePresentation,
    pub target: AffinePresentation,
    pub object_map: Vec<usize>,
    pub components: Vec<BlueprintMorphism>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorphismDefect {
    NotFunctorial { from: String, to: String },
    NotNatural { from: String, to: String },
    Malformed { detail: String },
}

impl PresentationMorphism {
    pub fn new(
        source: &AffinePresentation,
        target: &AffinePresentation,
        object_map: Vec<usize>,
        components: Vec<BlueprintMorphism>,
    ) -> Result<Self> {
        if object_map.len() != source.objects.len() || components.len() != source.objects.len() {
            return Err(Error::InvalidPresentation("object map and components must cover every object".into()));
        }
        for (i, (&t, c)) in object_map.iter().zip(&components).enumerate() {
            if t >= target.objects.len() || !same(&c.source, &target.objects[t]) || !same(&c.target, &source.objects[i]) {
                return Err(Error::InvalidPresentation(format!("component at {} does not match its objects", source.names[i])));
            }
        }
        Ok(PresentationMorphism { source: source.clone(), target: target.clone(), object_map, components })
    }

    pub fn identity(u: &AffinePresentation) -> Self {
        Self::identity_between(u, u)
    }

    fn identity_between(u: &AffinePresentation, v: &AffinePresentation) -> Self {
        PresentationMorphism {
            source: u.clone(),
            target: v.clone(),
            object_map: (0..u.objects.len()).collect(),
            components: u.objects.iter().map(BlueprintMorphism::identity).collect(),
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &PresentationMorphism) -> PresentationMorphism {
        let object_map = self.object_map.iter().map(|t| other.object_map[*t]).collect();
        let components =
            self.components.iter().zip(&self.object_map).map(|(c, t)| other.components[*t].then(c)).collect();
        PresentationMorphism { source: self.source.clone(), target: other.target.clone(), object_map, components }
    }

    pub fn agrees_with(&self, other: &PresentationMorphism, bounds: &SearchBounds) -> Option<bool> {
        if self.object_map != other.object_map {
            return Some(false);
        }
        let mut all = true;
        for (a, b) in self.components.iter().zip(&other.components) {
            match a.agrees_with(b, bounds) {
                Some(true) => {}
                Some(false) => return Some(false),
                None => all = false,
            }
        }
        all.then_some(true)
    }

    /// Functoriality on arrows and commutativity of naturality squares.
    pub fn validate(&self, bounds: &SearchBounds) -> Verdict<(), MorphismDefect> {
        let (u, v) = (&self.source, &self.target);
        let mut unknown = None;
        for a in &u.arrows {
            let (fi, fj) = (self.object_map[a.from], self.object_map[a.to]);
            let Some(image) = v.composite(fi, fj) else {
                return Verdict::Refuted(MorphismDefect::NotFunctorial {
                    from: u.names[a.from].clone(),
                    to: u.names[a.to].clone(),
                });
            };
            let lhs = image.then(&self.components[a.from]);
            let rhs = self.components[a.to].then(&a.map);
            match lhs.agrees_with(&rhs, bounds) {
                Some(true) => {}
                Some(false) => {
                    return Verdict::Refuted(MorphismDefect::NotNatural {
                        from: u.names[a.from].clone(),
                        to: u.names[a.to].clone(),
                    })
                }
                None => unknown = Some(Exhausted::new("max_steps", "naturality square undecided")),
            }
        }
        match unknown {
            None => Verdict::Proved(()),
            Some(e) => Verdict::Unknown(e),
        }
    }
}

/// `Atlas(U)` and the refinement `Atlas(U) -> U`.
pub fn atlas(u: &AffinePresentation) -> (AffinePresentation, PresentationMorphism) {
    let max = u.maximal();
    let mut a = AffinePresentation::new(u.site);
    let mut object_map = Vec::new();
    for m in &max {
        a.add_object(&u.names[*m], u.objects[*m].clone());
        object_map.push(*m);
    }
    let mut pairs = Vec::new();
    for (k, x) in max.iter().enumerate() {
        for y in &max[k + 1..] {
            pairs.push((*x, *y, u.common(*x, *y)));
        }
    }
    let mut uses: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, _, ws) in &pairs {
        for w in ws {
            *uses.entry(*w).or_default() += 1;
        }
    }
    let max_pos = |m: usize| max.iter().position(|x| *x == m).expect("maximal");
    for (x, y, ws) in &pairs {
        let mut copy = BTreeMap::new();
        for w in ws {
            let name = if uses[w] == 1 {
                u.names[*w].clone()
            } else {
                format!("{}[{},{}]", u.names[*w], u.names[*x], u.names[*y])
            };
            copy.insert(*w, a.add_object(&name, u.objects[*w].clone()));
            object_map.push(*w);
        }
        for w in ws {
            let c = copy[w];
            a.arrows.push(Arrow { from: c, to: max_pos(*x), map: u.composite(*w, *x).expect("reaches") });
            a.arrows.push(Arrow { from: c, to: max_pos(*y), map: u.composite(*w, *y).expect("reaches") });
        }
        for arr in &u.arrows {
            if let (Some(&f), Some(&t)) = (copy.get(&arr.from), copy.get(&arr.to)) {
                if f != t {
                    a.arrows.push(Arrow { from: f, to: t, map: arr.map.clone() });
                }
            }
        }
    }
    let components = a.objects.iter().map(BlueprintMorphism::identity).collect();
    let phi = PresentationMorphism { source: a.clone(), target: u.clone(), object_map, components };
    (a, phi)
}

/// An object bijection matching blueprints and arrows.
pub fn presentations_isomorphic(u: &AffinePresentation, v: &AffinePresentation, bounds: &SearchBounds) -> Option<Vec<usize>> {
    if u.objects.len() != v.objects.len() || u.arrows.len() != v.arrows.len() || u.site != v.site {
        return None;
    }
    fn extend(u: &AffinePresentation, v: &AffinePresentation, map: &mut Vec<usize>, used: &mut Vec<bool>, b: &SearchBounds) -> bool {
        let i = map.len();
        if i == u.objects.len() {
            return u.arrows.iter().all(|a| {
                v.arrows.iter().any(|c| {
                    c.from == map[a.from] && c.to == map[a.to] && a.map.images == c.map.images
                        || c.from == map[a.from] && c.to == map[a.to] && a.map.agrees_with(&c.map, b) == Some(true)
                })
            });
        }
        for j in 0..v.objects.len() {
            if !used[j] && same(&u.objects[i], &v.objects[j]) {
                used[j] = true;
                map.push(j);
                if extend(u, v, map, used, b) {
                    return true;
                }
                map.pop();
                used[j] = false;
            }
        }
        false
    }
    let mut map = Vec::new();
    let mut used = vec![false; v.objects.len()];
    extend(u, v, &mut map, &mut used, bounds).then_some(map)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyEvidence {
    pub object: String,
    pub members: Vec<String>,
    /// Basic opens `U_h` of the members inside the object, without members
    /// contained in another.
    pub hs: Vec<String>,
    pub certificate: Option<ConservativeCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementProof {
    pub site: Site,
    pub families: Vec<FamilyEvidence>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RefinementFailure {
    NotAMorphism { defect: MorphismDefect },
    NotOpen { object: String, failure: LocalizationFailure },
    /// A point of an atlas object outside every member of its family.
    NotCovering { object: String, point: String, witness: Option<Witness> },
    NotConservative { object: String, witness: Witness },
}

fn product(b: &BpRef, ms: &[Monomial]) -> Monomial {
    b.normalize(&b.monoid.product(ms.iter()))
}

/// Members `h_i ∈ h_j B` of another member's open are redundant for
/// conservativity, since `B[h_i⁻¹]` is a base change of `B[h_j⁻¹]`.
fn prune(b: &BpRef, hs: &[Monomial]) -> Vec<Monomial> {
    let divides = |big: &Monomial, small: &Monomial| match big {
        Monomial::Term(t) => divide_term(b.domain(), t, small).is_some(),
        Monomial::Zero => true,
    };
    let mut out: Vec<Monomial> = Vec::new();
    for (i, h) in hs.iter().enumerate() {
        let redundant = hs.iter().enumerate().any(|(j, k)| j != i && divides(h, k) && (!divides(k, h) || j < i));
        if !redundant {
            out.push(h.clone());
        }
    }
    out
}

/// Points of `b` outside every `U_h`.
fn uncovered(b: &BpRef, hs: &[Monomial]) -> Result<(Vec<PrimeIdeal>, bool)> {
    let spec = prime_ideals(b)?;
    let max_q = hs
        .iter()
        .filter_map(|h| h.coeff())
        .flat_map(|c| factorize(b.domain().core(c)))
        .map(|(p, _)| p as u64)
        .max()
        .unwrap_or(2);
    let points = spec.materialize(b, max_q);
    let gaps = points.into_iter().filter(|p| hs.iter().all(|h| p.contains(b, h))).collect();
    Ok((gaps, spec.complete))
}

/// Opens on every component, and covering families over every atlas object
/// of the target: topologically on the blue site, by conservativity on the
/// relative site.
pub fn check_refinement(phi: &PresentationMorphism, bounds: &SearchBounds) -> Verdict<RefinementProof, RefinementFailure> {
    let (u, v) = (&phi.source, &phi.target);
    let mut unknown = match phi.validate(bounds) {
        Verdict::Proved(()) => None,
        Verdict::Refuted(defect) => return Verdict::Refuted(RefinementFailure::NotAMorphism { defect }),
        Verdict::Unknown(e) => Some(e),
    };
    let mut hs: Vec<Monomial> = Vec::new();
    for (i, c) in phi.components.iter().enumerate() {
        match is_finite_localization(c, bounds) {
            Verdict::Proved(p) => hs.push(product(&c.source, &p.s_generators)),
            Verdict::Refuted(failure) => {
                return Verdict::Refuted(RefinementFailure::NotOpen { object: u.names[i].clone(), failure })
            }
            Verdict::Unknown(e) => {
                hs.push(Monomial::one());
                unknown = Some(e);
            }
        }
    }
    let mut families = Vec::new();
    for t in v.atlas_objects() {
        let b = &v.objects[t];
        let members: Vec<usize> = (0..u.objects.len()).filter(|i| phi.object_map[*i] == t).collect();
        let fam_hs: Vec<Monomial> = members.iter().map(|i| hs[*i].clone()).collect();
        let mut ev = FamilyEvidence {
            object: v.names[t].clone(),
            members: members.iter().map(|i| u.names[*i].clone()).collect(),
            hs: fam_hs.iter().map(|h| b.show(h)).collect(),
            certificate: None,
        };
        match v.site {
            Site::Blue => {
                let (gaps, complete) = match uncovered(b, &fam_hs) {
                    Ok(x) => x,
                    Err(e) => {
                        unknown = Some(Exhausted::new("prime_enumeration", e.to_string()));
                        continue;
                    }
                };
                if let Some(x) = gaps.first() {
                    let witness = match torsion_point_witness(b, &fam_hs, x, bounds) {
                        Ok(TorsionOutcome::Witness { witness }) => Some(witness),
                        _ => None,
                    };
                    return Verdict::Refuted(RefinementFailure::NotCovering { object: ev.object, point: x.show(b), witness });
                }
                if !complete {
                    unknown = Some(Exhausted::new("prime_enumeration", format!("spectrum of {} incomplete", ev.object)));
                }
            }
            Site::Relative => {
                if fam_hs.is_empty() {
                    return Verdict::Refuted(RefinementFailure::NotCovering { object: ev.object, point: "(0)".into(), witness: None });
                }
                let pruned = prune(b, &fam_hs);
                ev.hs = pruned.iter().map(|h| b.show(h)).collect();
                match conservativity(b, &pruned, bounds) {
                    Verdict::Proved(c) => ev.certificate = Some(c),
                    Verdict::Refuted(witness) => {
                        return Verdict::Refuted(RefinementFailure::NotConservative { object: ev.object, witness })
                    }
                    Verdict::Unknown(e) => unknown = Some(e),
                }
            }
        }
        families.push(ev);
    }
    match unknown {
        None => Verdict::Proved(RefinementProof { site: v.site, families }),
        Some(e) => Verdict::Unknown(e),
    }
}

/// `U ×_V V'` with both projections.
#[derive(Clone, Debug)]
pub struct FibreProduct {
    pub presentation: AffinePresentation,
    /// The pair `(U, V')` behind each object.
    pub pairs: Vec<(usize, usize)>,
    pub tensors: Vec<Tensor>,
    pub to_left: PresentationMorphism,
    pub to_right: PresentationMorphism,
}

fn arrow_or_identity(u: &AffinePresentation, i: usize, j: usize) -> Option<BlueprintMorphism> {
    if i == j {
        return Some(BlueprintMorphism::identity(&u.objects[i]));
    }
    u.arrows.iter().find(|a| a.from == i && a.to == j).map(|a| a.map.clone())
}

fn same_presentation(a: &AffinePresentation, b: &AffinePresentation) -> bool {
    a.objects.len() == b.objects.len() && a.objects.iter().zip(&b.objects).all(|(x, y)| same(x, y))
}

pub fn fibre_product_presentations(
    phi: &PresentationMorphism,
    psi: &PresentationMorphism,
    bounds: &SearchBounds,
) -> Result<FibreProduct> {
    if !same_presentation(&phi.target, &psi.target) {
        return Err(Error::InvalidPresentation("the two morphisms have different targets".into()));
    }
    let (u, w) = (&phi.source, &psi.source);
    let mut p = AffinePresentation::new(u.site);
    let mut pairs = Vec::new();
    let mut tensors = Vec::new();
    for i in 0..u.objects.len() {
        for j in 0..w.objects.len() {
            if phi.object_map[i] == psi.object_map[j] {
                let t = tensor_blueprints(&phi.components[i], &psi.components[j], bounds)?;
                p.add_object(&format!("{}x{}", u.names[i], w.names[j]), t.blueprint.clone());
                pairs.push((i, j));
                tensors.push(t);
            }
        }
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        for (l, &(i2, j2)) in pairs.iter().enumerate() {
            if k == l {
                continue;
            }
            let (Some(a), Some(b)) = (arrow_or_identity(u, i, i2), arrow_or_identity(w, j, j2)) else { continue };
            let h1 = a.then(&tensors[k].left);
            let h2 = b.then(&tensors[k].right);
            match tensor_universal_map(&tensors[l], &h1, &h2, bounds)? {
                Verdict::Proved(m) => p.arrows.push(Arrow { from: k, to: l, map: m }),
                _ => {
                    return Err(Error::InvalidPresentation(format!(
                        "no induced arrow {} -> {}",
                        p.names[k], p.names[l]
                    )))
                }
            }
        }
    }
    let to_left = PresentationMorphism {
        source: p.clone(),
        target: u.clone(),
        object_map: pairs.iter().map(|(i, _)| *i).collect(),
        components: tensors.iter().map(|t| t.left.clone()).collect(),
    };
    let to_right = PresentationMorphism {
        source: p.clone(),
        target: w.clone(),
        object_map: pairs.iter().map(|(_, j)| *j).collect(),
        components: tensors.iter().map(|t| t.right.clone()).collect(),
    };
    Ok(FibreProduct { presentation: p, pairs, tensors, to_left, to_right })
}

/// The map into `U ×_V V'` induced by a cone `α: T -> U`, `β: T -> V'`.
pub fn induced_map(
    fp: &FibreProduct,
    alpha: &PresentationMorphism,
    beta: &PresentationMorphism,
    bounds: &SearchBounds,
) -> Result<PresentationMorphism> {
    let t = &alpha.source;
    let mut object_map = Vec::new();
    let mut components = Vec::new();
    for x in 0..t.objects.len() {
        let pair = (alpha.object_map[x], beta.object_map[x]);
        let k = fp
            .pairs
            .iter()
            .position(|p| *p == pair)
            .ok_or_else(|| Error::InvalidPresentation(format!("cone at {} does not lie over a common object", t.names[x])))?;
        match tensor_universal_map(&fp.tensors[k], &alpha.components[x], &beta.components[x], bounds)? {
            Verdict::Proved(m) => components.push(m),
            _ => return Err(Error::InvalidPresentation(format!("cone at {} does not commute", t.names[x]))),
        }
        object_map.push(k);
    }
    PresentationMorphism::new(t, &fp.presentation, object_map, components)
}

/// The square commutes, and each cone factors through the fibre product with
/// both projections recovering its legs.
pub fn check_universal_property(
    fp: &FibreProduct,
    phi: &PresentationMorphism,
    psi: &PresentationMorphism,
    cones: &[(PresentationMorphism, PresentationMorphism)],
    bounds: &SearchBounds,
) -> Verdict<usize, String> {
    if fp.to_left.then(phi).agrees_with(&fp.to_right.then(psi), bounds) != Some(true) {
        return Verdict::Refuted("the fibre square does not commute".into());
    }
    for (n, (alpha, beta)) in cones.iter().enumerate() {
        let gamma = match induced_map(fp, alpha, beta, bounds) {
            Ok(g) => g,
            Err(e) => return Verdict::Refuted(format!("cone {n}: {e}")),
        };
        if gamma.validate(bounds).is_refuted() {
            return Verdict::Refuted(format!("cone {n}: induced map is not a morphism"));
        }
        let left = gamma.then(&fp.to_left).agrees_with(alpha, bounds);
        let right = gamma.then(&fp.to_right).agrees_with(beta, bounds);
        match (left, right) {
            (Some(true), Some(true)) => {}
            (Some(false), _) | (_, Some(false)) => return Verdict::Refuted(format!("cone {n}: projections differ")),
            _ => return Verdict::Unknown(Exhausted::new("max_steps", format!("cone {n} undecided"))),
        }
    }
    Verdict::Proved(cones.len())
}

/// A space glued from chart spectra.
#[derive(Clone, Debug)]
pub struct BlueScheme {
    pub presentation: AffinePresentation,
    pub chart_points: Vec<Vec<PrimeIdeal>>,
    /// Class of each chart point.
    pub class_of: Vec<Vec<usize>>,
    /// Members `(chart, index)` of each point.
    pub points: Vec<Vec<(usize, usize)>>,
    /// `(x, y)` with `y` in the closure of `x`.
    pub specialization: BTreeSet<(usize, usize)>,
    /// False when a chart spectrum was truncated or incomplete.
    pub complete: bool,
}

impl BlueScheme {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn show_point(&self, x: usize) -> String {
        let (c, i) = self.points[x][0];
        format!("{}:{}", self.presentation.names[c], self.chart_points[c][i].show(&self.presentation.objects[c]))
    }

    pub fn closed_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|x| !self.specialization.iter().any(|(a, b)| a == x && b != x)).collect()
    }

    /// Points in the image of a chart.
    pub fn chart_image(&self, chart: usize) -> BTreeSet<usize> {
        self.class_of[chart].iter().copied().collect()
    }

    /// The basic open `U_h` of a chart, as points of the scheme.
    pub fn basic_open(&self, chart: usize, h: &Monomial) -> BTreeSet<usize> {
        let b = &self.presentation.objects[chart];
        self.chart_points[chart]
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.contains(b, h))
            .map(|(i, _)| self.class_of[chart][i])
            .collect()
    }

    /// The smallest open containing `x`: all generizations.
    pub fn minimal_open(&self, x: usize) -> BTreeSet<usize> {
        (0..self.len()).filter(|y| self.specialization.contains(&(*y, x))).collect()
    }

    /// Specialization pairs with points renamed by `rename`.
    pub fn relabelled(&self, rename: &[usize]) -> BTreeSet<(usize, usize)> {
        self.specialization.iter().map(|(a, b)| (rename[*a], rename[*b])).collect()
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// The colimit of a blue-site presentation, computed on points.
pub fn glue(u: &AffinePresentation, bounds: &SearchBounds) -> Result<BlueScheme> {
    if u.site != Site::Blue {
        return Err(Error::InvalidPresentation("gluing needs a presentation in the blue site".into()));
    }
    match check_affine_presentation(u, bounds) {
        Verdict::Proved(_) => {}
        Verdict::Refuted(d) => return Err(Error::InvalidPresentation(serde_json::to_string(&d).unwrap_or_default())),
        Verdict::Unknown(e) => return Err(Error::InvalidPresentation(format!("undecided: {}", e.detail))),
    }
    let mut complete = true;
    let mut chart_points = Vec::new();
    for b in &u.objects {
        let spec = prime_ideals(b)?;
        complete &= spec.complete && spec.is_finite();
        chart_points.push(spec.materialize(b, GLUE_PRIME_BOUND));
    }
    let mut offsets = Vec::new();
    let mut total = 0;
    for ps in &chart_points {
        offsets.push(total);
        total += ps.len();
    }
    let mut parent: Vec<usize> = (0..total).collect();
    for a in &u.arrows {
        for (i, p) in chart_points[a.from].iter().enumerate() {
            let q = pull_back(&a.map, p);
            let j = chart_points[a.to].iter().position(|x| *x == q).ok_or_else(|| {
                Error::InvalidPresentation(format!("{} has no image in {}", p.show(&u.objects[a.from]), u.names[a.to]))
            })?;
            let (x, y) = (find(&mut parent, offsets[a.from] + i), find(&mut parent, offsets[a.to] + j));
            parent[x] = y;
        }
    }
    let mut class_ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut points: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut class_of = Vec::new();
    for (c, ps) in chart_points.iter().enumerate() {
        let mut row = Vec::new();
        for i in 0..ps.len() {
            let r = find(&mut parent, offsets[c] + i);
            let id = *class_ids.entry(r).or_insert_with(|| {
                points.push(vec![]);
                points.len() - 1
            });
            points[id].push((c, i));
            row.push(id);
        }
        class_of.push(row);
    }
    let mut spec_rel = BTreeSet::new();
    for (c, ps) in chart_points.iter().enumerate() {
        for (i, p) in ps.iter().enumerate() {
            for (j, q) in ps.iter().enumerate() {
                if p.is_contained_in(q) {
                    spec_rel.insert((class_of[c][i], class_of[c][j]));
                }
            }
        }
    }
    loop {
        let extra: Vec<(usize, usize)> = spec_rel
            .iter()
            .flat_map(|(a, b)| spec_rel.iter().filter(move |(c, _)| c == b).map(move |(_, d)| (*a, *d)))
            .filter(|e| !spec_rel.contains(e))
            .collect();
        if extra.is_empty() {
            break;
        }
        spec_rel.extend(extra);
    }
    for m in u.maximal() {
        let ps = &chart_points[m];
        for i in 0..ps.len() {
            for j in 0..ps.len() {
                let (x, y) = (class_of[m][i], class_of[m][j]);
                if (i != j && x == y) || (ps[i].is_contained_in(&ps[j]) != spec_rel.contains(&(x, y))) {
                    return Err(Error::InvalidPresentation(format!("chart {} does not embed", u.names[m])));
                }
            }
        }
    }
    Ok(BlueScheme { presentation: u.clone(), chart_points, class_of, points, specialization: spec_rel, complete })
}

/// A point bijection between two glued schemes matching specializations and
/// chart images, if the chart-wise identification `rename` provides one.
pub fn homeomorphic_by(x: &BlueScheme, y: &BlueScheme, rename: &[usize]) -> bool {
    let image: BTreeSet<usize> = rename.iter().copied().collect();
    rename.len() == x.len() && image.len() == y.len() && x.relabelled(rename) == y.specialization
}

#[cfg(test)]
mod tests;
