//! Sections over basic-open covers, global sections and the globalization map.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, Builtin};
use crate::blueprint::{
    evaluate_monomial, grading_weights, is_homogeneous, is_valid_evaluation, localization_map, localize, make_blueprint,
    valid_evaluations, BlueprintMorphism, BpRef, EvalTarget, Relation,
};
use crate::error::{Error, Result};
use crate::monoid::{Monomial, MonoidPresentation};
use crate::spectra::{basic_open, closed_points, minimal_open_generator, prime_ideals};
use crate::sum::{normalize_terms, FormalSum};
use crate::verdict::{Exhausted, SearchBounds, Verdict};

/// Numerator degree of enumerated chart elements; the fixpoint is checked one
/// degree higher.
pub const SECTION_DEGREE: u32 = 2;
/// Degree of words in the generators of `ΓB` used for its relations.
const WORD_DEGREE: u32 = 3;

/// `B -> B[h⁻¹]`.
#[derive(Clone, Debug)]
pub struct Chart {
    pub h: Monomial,
    pub blueprint: BpRef,
    pub map: BlueprintMorphism,
}

/// The overlap of charts `i < j` with the maps from both charts.
#[derive(Clone, Debug)]
pub struct Overlap {
    pub i: usize,
    pub j: usize,
    pub blueprint: BpRef,
    pub left: BlueprintMorphism,
    pub right: BlueprintMorphism,
}

#[derive(Clone, Debug)]
pub struct BasicCover {
    pub base: BpRef,
    pub charts: Vec<Chart>,
    pub overlaps: Vec<Overlap>,
}

impl BasicCover {
    /// The cover `{U_h}` of `Spec B`; fails with `NotACover` when a prime is
    /// missed.
    pub fn new(b: &BpRef, hs: &[Monomial], bounds: &SearchBounds) -> Result<BasicCover> {
        let spec = prime_ideals(b)?;
        let max_q = hs
            .iter()
            .filter_map(|h| h.coeff())
            .flat_map(|c| factorize(b.domain().core(c)))
            .map(|(p, _)| p as u64)
            .max()
            .unwrap_or(2);
        let points = spec.materialize(b, max_q);
        let hs: Vec<Monomial> = hs.iter().map(|h| b.normalize(h)).collect();
        for p in &points {
            if hs.iter().all(|h| p.contains(b, h)) {
                return Err(Error::NotACover(format!("{} is in no chart", p.show(b))));
            }
        }
        let mut charts = Vec::new();
        for h in &hs {
            let (c, map) = localize(b, std::slice::from_ref(h), bounds)?;
            charts.push(Chart { h: h.clone(), blueprint: c, map });
        }
        let mut overlaps = Vec::new();
        for i in 0..charts.len() {
            for j in (i + 1)..charts.len() {
                let (o, f) = localize(b, &[hs[i].clone(), hs[j].clone()], bounds)?;
                let left = localization_map(&charts[i].blueprint, &f, bounds)?;
                let right = localization_map(&charts[j].blueprint, &f, bounds)?;
                overlaps.push(Overlap { i, j, blueprint: o, left, right });
            }
        }
        Ok(BasicCover { base: b.clone(), charts, overlaps })
    }

    pub fn describe(&self) -> Vec<String> {
        self.charts.iter().map(|c| self.base.show(&c.h)).collect()
    }

    fn overlap(&self, i: usize, j: usize) -> &Overlap {
        self.overlaps.iter().find(|o| o.i == i && o.j == j).expect("overlap exists")
    }

    /// The tuple `σ(m)`.
    pub fn sigma_tuple(&self, m: &Monomial) -> Vec<Monomial> {
        self.charts.iter().map(|c| c.blueprint.normalize(&c.map.apply(m))).collect()
    }

    pub fn is_compatible(&self, comps: &[Monomial]) -> bool {
        comps.len() == self.charts.len()
            && self.overlaps.iter().all(|o| {
                let x = o.blueprint.normalize(&o.left.apply(&comps[o.i]));
                let y = o.blueprint.normalize(&o.right.apply(&comps[o.j]));
                x == y
            })
    }

    fn multiply(&self, x: &[Monomial], y: &[Monomial]) -> Vec<Monomial> {
        self.charts.iter().enumerate().map(|(i, c)| c.blueprint.mul(&x[i], &y[i])).collect()
    }

    fn tuple(&self, comps: Vec<Monomial>) -> SectionTuple {
        let shown = comps.iter().zip(&self.charts).map(|(m, c)| c.blueprint.show(m)).collect();
        SectionTuple { cover: self.describe(), components: comps, shown }
    }
}

/// The cover by minimal opens of closed points, each validated as basic.
pub fn canonical_cover(b: &BpRef, bounds: &SearchBounds) -> Result<BasicCover> {
    if b.domain().builtin != Builtin::None {
        return Err(Error::CanonicalCoverUnavailable("builtin coefficients with atoms".into()));
    }
    let spec = prime_ideals(b)?;
    if !spec.complete {
        return Err(Error::CanonicalCoverUnavailable("prime enumeration is incomplete".into()));
    }
    let mut hs = Vec::new();
    for x in closed_points(&spec) {
        hs.push(minimal_open_generator(b, &spec, &x)?);
    }
    BasicCover::new(b, &hs, bounds)
}

/// A compatible family of chart elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionTuple {
    pub cover: Vec<String>,
    pub components: Vec<Monomial>,
    pub shown: Vec<String>,
}

fn chart_elements(c: &crate::blueprint::Blueprint, degree: u32) -> Vec<Monomial> {
    let mut v = c.monoid.enumerate(&c.monoid.all_atoms(), degree);
    if !v.contains(&Monomial::Zero) {
        v.push(Monomial::Zero);
    }
    v
}

/// All compatible tuples whose components have degree at most `degree`.
pub fn sections(cover: &BasicCover, degree: u32) -> Vec<SectionTuple> {
    let elems: Vec<Vec<Monomial>> = cover.charts.iter().map(|c| chart_elements(&c.blueprint, degree)).collect();
    let Some(first) = elems.first() else { return vec![] };
    let mut partial: Vec<Vec<usize>> = (0..first.len()).map(|i| vec![i]).collect();
    for j in 1..elems.len() {
        let mut lookups = Vec::new();
        for i in 0..j {
            let o = cover.overlap(i, j);
            let mut index: HashMap<Monomial, Vec<usize>> = HashMap::new();
            for (k, y) in elems[j].iter().enumerate() {
                index.entry(o.blueprint.normalize(&o.right.apply(y))).or_default().push(k);
            }
            let left: Vec<Monomial> = elems[i].iter().map(|x| o.blueprint.normalize(&o.left.apply(x))).collect();
            lookups.push((index, left));
        }
        let mut next = Vec::new();
        for p in &partial {
            let mut cands: Option<BTreeSet<usize>> = None;
            for (i, (index, left)) in lookups.iter().enumerate() {
                let hit: BTreeSet<usize> = index.get(&left[p[i]]).into_iter().flatten().copied().collect();
                cands = Some(match cands {
                    None => hit,
                    Some(c) => c.intersection(&hit).copied().collect(),
                });
            }
            for k in cands.unwrap_or_default() {
                let mut q = p.clone();
                q.push(k);
                next.push(q);
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|p| cover.tuple(p.iter().enumerate().map(|(i, k)| elems[i][*k].clone()).collect()))
        .collect()
}

/// A Boolean evaluation of `B` nonvanishing on the chart's `h`, with its value
/// on the chart component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartEvaluation {
    pub chart: usize,
    pub values: Vec<i64>,
    pub value: i64,
}

/// Why a section tuple is not `σ(m)` for any `m`: every such `m` would take the
/// listed evaluation values and have the given weight, and no monomial does.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonImageCertificate {
    pub evaluations: Vec<ChartEvaluation>,
    pub weights: Vec<i64>,
    pub weight: i64,
}

fn extend_values(cover: &BasicCover, chart: usize, values: &[i64]) -> Vec<i64> {
    let c = &cover.charts[chart].blueprint;
    let mut ext = values.to_vec();
    ext.resize(c.atoms().len(), 1);
    ext
}

fn extend_weights(cover: &BasicCover, chart: usize, w: &[i64]) -> Vec<i64> {
    let c = &cover.charts[chart].blueprint;
    let mut ext = w.to_vec();
    ext.resize(c.atoms().len(), 0);
    if let Some(info) = &c.localization {
        for (e, u) in &info.inverse_atoms {
            ext[*u as usize] = -e.exps().iter().map(|(a, k)| w[*a as usize] * *k as i64).sum::<i64>();
        }
    }
    ext
}

fn weight_of(m: &Monomial, w: &[i64]) -> i64 {
    m.exps().iter().map(|(a, k)| w[*a as usize] * *k as i64).sum()
}

/// Whether some monomial of `B` satisfies the evaluation and weight constraints.
fn constraints_satisfiable(n: usize, evals: &[ChartEvaluation], w: &[i64], target: i64) -> bool {
    let allowed: Vec<usize> = (0..n).filter(|a| evals.iter().all(|e| e.value != 1 || e.values[*a] == 1)).collect();
    let zero_evals: Vec<&ChartEvaluation> = evals.iter().filter(|e| e.value == 0).collect();
    let sign = if allowed.iter().all(|a| w[*a] > 0) {
        1
    } else if allowed.iter().all(|a| w[*a] < 0) {
        -1
    } else {
        return true;
    };
    let (w, target): (Vec<i64>, i64) = (w.iter().map(|x| x * sign).collect(), target * sign);
    if target < 0 {
        return false;
    }
    // Exponent vectors over the allowed atoms with the exact weight.
    fn rec(i: usize, left: i64, allowed: &[usize], w: &[i64], used: &mut Vec<usize>, ok: &dyn Fn(&[usize]) -> bool) -> bool {
        if i == allowed.len() {
            return left == 0 && ok(used);
        }
        let a = allowed[i];
        let mut k = 0;
        while k * w[a] <= left {
            if k > 0 {
                used.push(a);
            }
            if rec(i + 1, left - k * w[a], allowed, w, used, ok) {
                return true;
            }
            if k > 0 {
                used.pop();
            }
            k += 1;
            if w[a] == 0 {
                break;
            }
        }
        false
    }
    let ok = |used: &[usize]| zero_evals.iter().all(|e| used.iter().any(|a| e.values[*a] == 0));
    rec(0, target, &allowed, &w, &mut Vec::new(), &ok)
}

/// Search a certificate that the tuple lies outside the image of `σ`.
pub fn non_image_certificate(cover: &BasicCover, tuple: &SectionTuple) -> Option<NonImageCertificate> {
    let b = &cover.base;
    let n = b.atoms().len();
    let mut evals = Vec::new();
    for (t, values) in valid_evaluations(b, 1 << 12) {
        if t != EvalTarget::Boolean {
            continue;
        }
        for (ci, c) in cover.charts.iter().enumerate() {
            if evaluate_monomial(b, t, &values, &c.h) != Some(1) {
                continue;
            }
            let ext = extend_values(cover, ci, &values);
            if let Some(v) = evaluate_monomial(&c.blueprint, t, &ext, &tuple.components[ci]) {
                evals.push(ChartEvaluation { chart: ci, values: values.clone(), value: v });
                break;
            }
        }
    }
    let mut weights = grading_weights(b);
    weights.insert(0, vec![0; n]);
    for w in weights {
        let ext = extend_weights(cover, 0, &w);
        let target = weight_of(&tuple.components[0], &ext);
        if tuple.components.iter().any(|m| m.is_zero()) {
            continue;
        }
        if !constraints_satisfiable(n, &evals, &w, target) {
            return Some(NonImageCertificate { evaluations: evals, weights: w, weight: target });
        }
    }
    None
}

/// Re-check a non-image certificate against the cover.
pub fn check_non_image(cover: &BasicCover, tuple: &SectionTuple, cert: &NonImageCertificate) -> bool {
    let b = &cover.base;
    let n = b.atoms().len();
    if !cover.is_compatible(&tuple.components) || tuple.components.iter().any(|m| m.is_zero()) {
        return false;
    }
    if cert.weights.len() != n || (cert.weights.iter().any(|x| *x != 0) && !is_homogeneous(b, &cert.weights)) {
        return false;
    }
    let t = EvalTarget::Boolean;
    for e in &cert.evaluations {
        let Some(c) = cover.charts.get(e.chart) else { return false };
        let ext = extend_values(cover, e.chart, &e.values);
        if e.values.len() != n
            || !is_valid_evaluation(b, t, &e.values)
            || evaluate_monomial(b, t, &e.values, &c.h) != Some(1)
            || !is_valid_evaluation(&c.blueprint, t, &ext)
            || evaluate_monomial(&c.blueprint, t, &ext, &tuple.components[e.chart]) != Some(e.value)
        {
            return false;
        }
    }
    let ext = extend_weights(cover, 0, &cert.weights);
    weight_of(&tuple.components[0], &ext) == cert.weight
        && !constraints_satisfiable(n, &cert.evaluations, &cert.weights, cert.weight)
}

/// A section of `ΓB` outside the image of `σ`, adjoined as a new atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewSection {
    pub name: String,
    pub tuple: SectionTuple,
    pub certificate: NonImageCertificate,
}

#[derive(Clone, Debug)]
pub struct GlobalSections {
    pub gamma: BpRef,
    pub sigma: BlueprintMorphism,
    pub cover: Vec<String>,
    pub new_sections: Vec<NewSection>,
    /// Distinct elements of `B` with equal sections.
    pub collisions: Vec<(String, String)>,
    /// All sections one degree beyond the enumeration are generated.
    pub complete: bool,
    pub degree: u32,
}

impl GlobalSections {
    fn identity(b: &BpRef, cover: Vec<String>) -> Self {
        GlobalSections {
            gamma: b.clone(),
            sigma: BlueprintMorphism::identity(b),
            cover,
            new_sections: vec![],
            collisions: vec![],
            complete: true,
            degree: SECTION_DEGREE,
        }
    }
}

type Word = Vec<(usize, u32)>;

/// Products of the generator tuples up to `WORD_DEGREE`, keyed by their
/// tuple; the first word per tuple uses the fewest new generators.
fn words(cover: &BasicCover, gens: &[Vec<Monomial>], base_count: usize) -> HashMap<Vec<Monomial>, Word> {
    let mut all: Vec<Word> = vec![vec![]];
    let mut frontier: Vec<Word> = vec![vec![]];
    for _ in 0..WORD_DEGREE {
        let mut next = Vec::new();
        for w in &frontier {
            let start = w.last().map(|(g, _)| *g).unwrap_or(0);
            for g in start..gens.len() {
                let mut v = w.clone();
                match v.last_mut() {
                    Some((last, k)) if *last == g => *k += 1,
                    _ => v.push((g, 1)),
                }
                next.push(v);
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    let new_count = |w: &Word| w.iter().filter(|(g, _)| *g >= base_count).map(|(_, k)| *k).sum::<u32>();
    let degree = |w: &Word| w.iter().map(|(_, k)| *k).sum::<u32>();
    all.sort_by_key(|w| (new_count(w), degree(w), w.clone()));
    let one: Vec<Monomial> = cover.charts.iter().map(|_| Monomial::one()).collect();
    let mut out = HashMap::new();
    out.insert(cover.charts.iter().map(|_| Monomial::Zero).collect(), vec![(usize::MAX, 1)]);
    for w in all {
        let mut t = one.clone();
        for (g, k) in &w {
            for _ in 0..*k {
                t = cover.multiply(&t, &gens[*g]);
            }
        }
        out.entry(t).or_insert(w);
    }
    out
}

fn word_monomial(w: &Word) -> Monomial {
    if w.first().map(|(g, _)| *g) == Some(usize::MAX) {
        return Monomial::Zero;
    }
    Monomial::from_exps(w.iter().map(|(g, k)| (*g as u32, *k)).collect())
}

fn new_name(taken: &[String], k: usize) -> String {
    let mut name = if k == 0 { "s".to_string() } else { format!("s{}", k + 1) };
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// `ΓB` with `σ: B -> ΓB`, computed over the canonical cover.
pub fn global_sections(b: &BpRef, bounds: &SearchBounds) -> Result<GlobalSections> {
    if b.is_pure_builtin() || b.atoms().is_empty() {
        return Ok(GlobalSections::identity(b, vec!["1".into()]));
    }
    let cover = canonical_cover(b, bounds)?;
    if cover.charts.len() == 1 && cover.charts[0].h.is_one() {
        return Ok(GlobalSections::identity(b, cover.describe()));
    }
    gamma_over(&cover, bounds)
}

/// `ΓB` computed from sections over the given cover.
pub fn gamma_over(cover: &BasicCover, bounds: &SearchBounds) -> Result<GlobalSections> {
    let b = &cover.base;
    let n = b.atoms().len();
    let mut gens: Vec<Vec<Monomial>> = (0..n as u32).map(|a| cover.sigma_tuple(&Monomial::atom(a))).collect();
    let mut image: HashMap<Vec<Monomial>, Monomial> = HashMap::new();
    let mut collisions = Vec::new();
    for m in b.monoid.enumerate(&b.monoid.all_atoms(), WORD_DEGREE + 1) {
        let t = cover.sigma_tuple(&m);
        match image.get(&t) {
            Some(prev) if b.monoid.is_complete() && *prev != m => collisions.push((b.show(prev), b.show(&m))),
            Some(_) => {}
            None => {
                image.insert(t, m);
            }
        }
    }
    let mut new_sections: Vec<NewSection> = Vec::new();
    let mut table = words(cover, &gens, n);
    let mut complete = true;
    let mut tuples = sections(cover, SECTION_DEGREE);
    tuples.sort_by_key(|t| (t.components.iter().map(|m| m.degree()).sum::<u32>(), t.components.clone()));
    for t in tuples {
        if table.contains_key(&t.components) || image.contains_key(&t.components) {
            continue;
        }
        match non_image_certificate(cover, &t) {
            Some(certificate) => {
                let mut taken = b.atoms().to_vec();
                taken.extend(new_sections.iter().map(|s| s.name.clone()));
                let name = new_name(&taken, new_sections.len());
                gens.push(t.components.clone());
                new_sections.push(NewSection { name, tuple: t, certificate });
                table = words(cover, &gens, n);
            }
            None => complete = false,
        }
    }
    for t in sections(cover, SECTION_DEGREE + 1) {
        if !table.contains_key(&t.components) && !image.contains_key(&t.components) {
            complete = false;
        }
    }
    let mut atoms = b.atoms().to_vec();
    atoms.extend(new_sections.iter().map(|s| s.name.clone()));
    let mut rels = b.monoid.relations.clone();
    let all_words = all_words_with_new(cover, &gens, n);
    for (w, t) in &all_words {
        if let Some(c) = table.get(t) {
            if c != w {
                rels.push((word_monomial(w), word_monomial(c)));
            }
        }
    }
    let monoid = MonoidPresentation::new(atoms, rels, b.domain().clone())?;
    let canonical = |m: &Monomial| -> Monomial {
        let tuple = tuple_of_word(cover, &gens, m);
        match table.get(&tuple) {
            Some(c) => word_monomial(c),
            None => m.clone(),
        }
    };
    let mut relations: Vec<Relation> = b.generators.clone();
    for k in 0..new_sections.len() {
        let t = Monomial::atom((n + k) as u32);
        for (l, r) in &b.generators {
            let lift = |s: &FormalSum| -> FormalSum {
                normalize_terms(&monoid, s.terms().iter().map(|m| canonical(&t.mul_raw(m, b.domain()))).collect())
            };
            relations.push((lift(l), lift(r)));
        }
    }
    let gamma = Arc::new(make_blueprint(monoid, relations, bounds)?);
    let sigma = BlueprintMorphism::new(b.clone(), gamma.clone(), (0..n as u32).map(|a| gamma.normalize(&Monomial::atom(a))).collect())?;
    Ok(GlobalSections { gamma, sigma, cover: cover.describe(), new_sections, collisions, complete, degree: SECTION_DEGREE })
}

fn tuple_of_word(cover: &BasicCover, gens: &[Vec<Monomial>], m: &Monomial) -> Vec<Monomial> {
    let mut t: Vec<Monomial> = cover.charts.iter().map(|_| Monomial::one()).collect();
    if m.is_zero() {
        return cover.charts.iter().map(|_| Monomial::Zero).collect();
    }
    for (g, k) in m.exps() {
        for _ in 0..*k {
            t = cover.multiply(&t, &gens[*g as usize]);
        }
    }
    t
}

/// Every word up to `WORD_DEGREE` involving a new generator, with its tuple.
fn all_words_with_new(cover: &BasicCover, gens: &[Vec<Monomial>], base_count: usize) -> Vec<(Word, Vec<Monomial>)> {
    let mut out = Vec::new();
    let mut frontier: Vec<Word> = vec![vec![]];
    for _ in 0..WORD_DEGREE {
        let mut next = Vec::new();
        for w in &frontier {
            let start = w.last().map(|(g, _)| *g).unwrap_or(0);
            for g in start..gens.len() {
                let mut v = w.clone();
                match v.last_mut() {
                    Some((last, k)) if *last == g => *k += 1,
                    _ => v.push((g, 1)),
                }
                next.push(v);
            }
        }
        for w in &next {
            if w.iter().any(|(g, _)| *g >= base_count) {
                out.push((w.clone(), tuple_of_word(cover, gens, &word_monomial(w))));
            }
        }
        frontier = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalProof {
    pub method: String,
    pub cover: Vec<String>,
    pub degree: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NotGlobal {
    /// A global section outside the image of `σ`.
    NonImageSection { section: NewSection },
    /// Distinct elements of `B` with equal global sections.
    NotInjective { left: String, right: String },
}

/// Whether `σ: B -> ΓB` is an isomorphism.
pub fn is_global(b: &BpRef, bounds: &SearchBounds) -> Verdict<GlobalProof, NotGlobal> {
    let g = match global_sections(b, bounds) {
        Ok(g) => g,
        Err(e) => return Verdict::Unknown(Exhausted::new("canonical_cover", e.to_string())),
    };
    if let Some(s) = g.new_sections.first() {
        return Verdict::Refuted(NotGlobal::NonImageSection { section: s.clone() });
    }
    if let Some((l, r)) = g.collisions.first() {
        return Verdict::Refuted(NotGlobal::NotInjective { left: l.clone(), right: r.clone() });
    }
    if g.complete {
        let method = if g.sigma.is_identity_on_atoms(bounds) == Some(true) && Arc::ptr_eq(&g.gamma, b) {
            "identity"
        } else {
            "section_enumeration"
        };
        Verdict::Proved(GlobalProof { method: method.into(), cover: g.cover, degree: g.degree })
    } else {
        Verdict::Unknown(Exhausted::new("section_degree", format!("no fixpoint at degree {}", g.degree + 1)))
    }
}

/// Degree of candidate images searched when factoring through `σ`.
const FACTOR_DEGREE: u32 = 3;

/// The unique `ΓB -> C` through which `f: B -> C` factors, for global `C`.
/// Each new section goes to the element of `C` matching its chart
/// components after localizing `C` at the images of the cover.
pub fn factor_through_sigma(g: &GlobalSections, f: &BlueprintMorphism, bounds: &SearchBounds) -> Result<BlueprintMorphism> {
    let (b, c) = (&f.source, &f.target);
    if g.new_sections.is_empty() && Arc::ptr_eq(&g.gamma, b) {
        return Ok(f.clone());
    }
    let hs = g.cover.iter().map(|h| b.parse(h)).collect::<Result<Vec<_>>>()?;
    let cover = BasicCover::new(b, &hs, bounds)?;
    let mut charts = Vec::new();
    for chart in &cover.charts {
        let fh = c.normalize(&f.apply(&chart.h));
        if fh.is_zero() {
            continue;
        }
        let (ci, canon) = localize(c, &[fh], bounds)?;
        let fi = localization_map(&chart.blueprint, &f.then(&canon), bounds)?;
        charts.push((ci, canon, fi));
    }
    let mut candidates = c.monoid.enumerate(&c.monoid.all_atoms(), FACTOR_DEGREE);
    candidates.push(Monomial::Zero);
    let mut images = f.images.clone();
    for s in &g.new_sections {
        let k = cover.describe().len();
        let comps: Vec<&Monomial> = s.tuple.components.iter().collect();
        if comps.len() != k {
            return Err(Error::InvalidMorphism(format!("section {} does not match the cover", s.name)));
        }
        let matches: Vec<&Monomial> = candidates
            .iter()
            .filter(|x| {
                let mut i = 0;
                cover.charts.iter().zip(&comps).all(|(chart, comp)| {
                    if c.normalize(&f.apply(&chart.h)).is_zero() {
                        return true;
                    }
                    let (ci, canon, fi) = &charts[i];
                    i += 1;
                    ci.eq_elements(&canon.apply(x), &fi.apply(comp), bounds) == Some(true)
                })
            })
            .collect();
        let mut distinct: Vec<&Monomial> = Vec::new();
        for m in matches {
            if !distinct.iter().any(|d| c.eq_elements(d, m, bounds) == Some(true)) {
                distinct.push(m);
            }
        }
        match distinct.as_slice() {
            [x] => images.push(c.normalize(x)),
            [] => return Err(Error::InvalidMorphism(format!("no image for {} up to degree {FACTOR_DEGREE}", s.name))),
            _ => return Err(Error::InvalidMorphism(format!("{} has {} candidate images", s.name, distinct.len()))),
        }
    }
    let phi = BlueprintMorphism::new(g.gamma.clone(), c.clone(), images)?;
    match phi.validate(bounds) {
        Verdict::Proved(()) => Ok(phi),
        _ => Err(Error::InvalidMorphism("the factorization does not preserve relations".into())),
    }
}

/// Points of `Spec B` in the chart `U_h`.
pub fn chart_points(cover: &BasicCover, chart: usize) -> Result<Vec<crate::spectra::PrimeIdeal>> {
    let b = &cover.base;
    let spec = prime_ideals(b)?;
    Ok(basic_open(b, &spec.points, &cover.charts[chart].h))
}

#[cfg(test)]
mod tests;
