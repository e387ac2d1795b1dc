//! Finitely presented blue modules.
//!
//! A module `M = B<X1..Xn> / R` is stored as the blueprint
//! `B[X1..Xn] / (Xi*Xj = 0, R)`; its elements are the zero monomial (the base
//! point) and the monomials of degree one in the generators.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::blueprint::{proper_quotient, Blueprint, BlueprintMorphism, BpRef, Relation};
use crate::error::{Error, Result};
use crate::monoid::{divide_term, Monomial, MonoidError, MonoidPresentation, Term};
use crate::sum::{normalize_terms, parse_sum, FormalSum};
use crate::verdict::{Exhausted, SearchBounds, Verdict};

#[derive(Clone, Debug)]
pub struct BlueModule {
    pub base: BpRef,
    pub generators: Vec<String>,
    /// Defining relations over the free algebra on base atoms and generators.
    pub relations: Vec<Relation>,
    pub algebra: BpRef,
}

impl PartialEq for BlueModule {
    fn eq(&self, other: &Self) -> bool {
        *self.base == *other.base && self.generators == other.generators && *self.algebra == *other.algebra
    }
}

fn free_algebra(base: &Blueprint, gens: &[String]) -> Result<MonoidPresentation> {
    let mut atoms = base.atoms().to_vec();
    for g in gens {
        if atoms.contains(g) {
            return Err(MonoidError::DuplicateAtom(g.clone()).into());
        }
        atoms.push(g.clone());
    }
    Ok(MonoidPresentation::new(atoms, base.monoid.relations.clone(), base.domain().clone())?)
}

fn gen_degree(offset: u32, m: &Monomial) -> u32 {
    m.exps().iter().filter(|(a, _)| *a >= offset).map(|(_, k)| *k).sum()
}

impl BlueModule {
    pub fn offset(&self) -> u32 {
        self.base.atoms().len() as u32
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generator(&self, i: usize) -> Monomial {
        Monomial::atom(self.offset() + i as u32)
    }

    pub fn parse(&self, s: &str) -> Result<Monomial> {
        let s = s.trim();
        if s == "*" {
            return Ok(Monomial::Zero);
        }
        let m = self.algebra.normalize(&self.algebra.parse(s)?);
        if !m.is_zero() && gen_degree(self.offset(), &m) != 1 {
            return Err(Error::InvalidPresentation(format!("`{s}` is not a module element")));
        }
        Ok(m)
    }

    pub fn show(&self, m: &Monomial) -> String {
        if m.is_zero() {
            "*".into()
        } else {
            self.algebra.show(m)
        }
    }

    pub fn normalize(&self, m: &Monomial) -> Monomial {
        self.algebra.normalize(m)
    }

    pub fn eq_elements(&self, a: &Monomial, b: &Monomial, bounds: &SearchBounds) -> Option<bool> {
        self.algebra.eq_elements(a, b, bounds)
    }

    /// `c . m` for a base monomial `c`.
    pub fn act(&self, c: &Monomial, m: &Monomial) -> Monomial {
        self.algebra.mul(c, m)
    }

    /// Whether every relation in the module algebra comes from the base
    /// (no module relations survive).
    pub fn is_free(&self) -> bool {
        self.algebra.generators.len() == self.base.generators.len()
            && self.algebra.monoid.relations.iter().all(|(x, y)| {
                gen_degree(self.offset(), x) != 1 && gen_degree(self.offset(), y) != 1
            })
    }

    /// All elements, when the module is finite.
    pub fn elements(&self, cap: usize) -> Option<Vec<Monomial>> {
        let all = crate::blueprint::finite_elements(&self.algebra, cap)?;
        Some(all.into_iter().filter(|m| m.is_zero() || gen_degree(self.offset(), m) == 1).collect())
    }
}

/// `B<gens> / relations`.
pub fn make_module(base: &BpRef, gens: &[String], relations: Vec<Relation>, bounds: &SearchBounds) -> Result<BlueModule> {
    let free = free_algebra(base, gens)?;
    let offset = base.atoms().len() as u32;
    for (l, r) in &relations {
        for m in l.terms().iter().chain(r.terms()) {
            free.check(m)?;
            if !m.is_zero() && gen_degree(offset, m) != 1 {
                return Err(Error::InvalidPresentation(format!(
                    "relation term `{}` must contain exactly one generator",
                    free.show(m)
                )));
            }
        }
    }
    let mut mrels = free.relations.clone();
    for i in 0..gens.len() as u32 {
        for j in i..gens.len() as u32 {
            mrels.push((Monomial::atom(offset + i).mul_raw(&Monomial::atom(offset + j), &free.domain), Monomial::Zero));
        }
    }
    let monoid = MonoidPresentation::new(free.atoms.clone(), mrels, free.domain.clone())?;
    let mut all = base.generators.clone();
    all.extend(relations.iter().cloned());
    let mut alg = proper_quotient(monoid, all, base.inverses.clone(), None, bounds)?;
    alg.square_zero = (offset..offset + gens.len() as u32).collect();
    Ok(BlueModule { base: base.clone(), generators: gens.to_vec(), relations, algebra: Arc::new(alg) })
}

pub fn free_module(base: &BpRef, gens: &[&str]) -> Result<BlueModule> {
    let gens: Vec<String> = gens.iter().map(|s| s.to_string()).collect();
    make_module(base, &gens, vec![], &SearchBounds::default())
}

pub fn trivial_module(base: &BpRef) -> BlueModule {
    free_module(base, &[]).expect("no generators")
}

/// Parse relations such as `2*X2 = 3*X1` over `base<gens>`.
pub fn module_from_text(base: &BpRef, gens: &[&str], relations: &[&str], bounds: &SearchBounds) -> Result<BlueModule> {
    let names: Vec<String> = gens.iter().map(|s| s.to_string()).collect();
    let free = free_algebra(base, &names)?;
    let mut rels = Vec::new();
    for r in relations {
        let (l, rhs) = r
            .split_once('=')
            .ok_or_else(|| MonoidError::Parse(r.to_string(), "expected `=`".into()))?;
        rels.push((parse_module_sum(l, &free)?, parse_module_sum(rhs, &free)?));
    }
    make_module(base, &names, rels, bounds)
}

fn parse_module_sum(s: &str, p: &MonoidPresentation) -> Result<FormalSum> {
    let s = s.trim();
    if s == "*" {
        return Ok(FormalSum::empty());
    }
    Ok(parse_sum(s, p)?)
}

#[derive(Clone, Debug)]
pub struct ModuleMorphism {
    pub source: BlueModule,
    pub target: BlueModule,
    /// Images of the source generators.
    pub images: Vec<Monomial>,
    /// The induced map of module algebras.
    pub algebra_map: BlueprintMorphism,
}

impl ModuleMorphism {
    pub fn new(source: &BlueModule, target: &BlueModule, images: Vec<Monomial>) -> Result<Self> {
        if *source.base != *target.base {
            return Err(Error::BaseMismatch);
        }
        if images.len() != source.rank() {
            return Err(Error::InvalidMorphism(format!("expected {} generator images", source.rank())));
        }
        let mut all: Vec<Monomial> = (0..source.offset()).map(Monomial::atom).collect();
        for m in &images {
            let m = target.algebra.monoid.check(m)?;
            if !m.is_zero() && gen_degree(target.offset(), &m) != 1 {
                return Err(Error::InvalidMorphism(format!("`{}` is not a module element", target.show(&m))));
            }
            all.push(m);
        }
        let algebra_map = BlueprintMorphism::new(source.algebra.clone(), target.algebra.clone(), all)?;
        let images = algebra_map.images[source.offset() as usize..].to_vec();
        Ok(ModuleMorphism { source: source.clone(), target: target.clone(), images, algebra_map })
    }

    pub fn make(
        source: &BlueModule,
        target: &BlueModule,
        images: Vec<Monomial>,
        bounds: &SearchBounds,
    ) -> Result<Verdict<ModuleMorphism, crate::blueprint::MorphismViolation>> {
        let f = Self::new(source, target, images)?;
        Ok(match f.validate(bounds) {
            Verdict::Proved(()) => Verdict::Proved(f),
            Verdict::Refuted(v) => Verdict::Refuted(v),
            Verdict::Unknown(e) => Verdict::Unknown(e),
        })
    }

    pub fn identity(m: &BlueModule) -> ModuleMorphism {
        let images = (0..m.rank()).map(|i| m.generator(i)).collect();
        ModuleMorphism::new(m, m, images).expect("identity")
    }

    pub fn validate(&self, bounds: &SearchBounds) -> Verdict<(), crate::blueprint::MorphismViolation> {
        self.algebra_map.validate(bounds)
    }

    pub fn apply(&self, m: &Monomial) -> Monomial {
        self.algebra_map.apply(m)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &ModuleMorphism) -> ModuleMorphism {
        let images = self.images.iter().map(|m| other.apply(m)).collect();
        ModuleMorphism::new(&self.source, &other.target, images).expect("composable")
    }

    pub fn is_identity(&self, bounds: &SearchBounds) -> Option<bool> {
        if self.source != self.target {
            return Some(false);
        }
        let mut all = true;
        for (i, m) in self.images.iter().enumerate() {
            match self.target.eq_elements(m, &self.target.generator(i), bounds) {
                Some(true) => {}
                Some(false) => return Some(false),
                None => all = false,
            }
        }
        all.then_some(true)
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        self.source.generators.iter().cloned().zip(self.images.iter().map(|m| self.target.show(m))).collect()
    }
}

/// Push a monomial of `src` layout (base atoms then generators) along a base
/// morphism into the layout of a module over the target base.
fn push(phi: &BlueprintMorphism, offset_src: u32, offset_dst: u32, dom: &crate::arith::CoeffDomain, m: &Monomial) -> Monomial {
    let Monomial::Term(t) = m else { return Monomial::Zero };
    let mut acc = phi.map_coeff(t);
    for (a, k) in &t.exps {
        let img = if *a < offset_src { phi.images[*a as usize].clone() } else { Monomial::atom(*a - offset_src + offset_dst) };
        acc = acc.mul_raw(&img.pow_raw(*k, dom), dom);
    }
    acc
}

/// `M ⊗_B C` along `phi: B -> C`.
pub fn base_change(m: &BlueModule, phi: &BlueprintMorphism, bounds: &SearchBounds) -> Result<BlueModule> {
    if *phi.source != *m.base {
        return Err(Error::BaseMismatch);
    }
    let c = &phi.target;
    let free = free_algebra(c, &m.generators)?;
    let (os, od) = (m.offset(), c.atoms().len() as u32);
    let rels = m
        .relations
        .iter()
        .map(|(l, r)| {
            let f = |s: &FormalSum| normalize_terms(&free, s.terms().iter().map(|x| push(phi, os, od, c.domain(), x)).collect());
            (f(l), f(r))
        })
        .collect();
    make_module(c, &m.generators, rels, bounds)
}

/// `f ⊗_B C` between the base-changed modules.
pub fn base_change_morphism(
    f: &ModuleMorphism,
    phi: &BlueprintMorphism,
    source: &BlueModule,
    target: &BlueModule,
) -> Result<ModuleMorphism> {
    let (os, od) = (f.target.offset(), target.offset());
    let images = f.images.iter().map(|x| push(phi, os, od, phi.target.domain(), x)).collect();
    ModuleMorphism::new(source, target, images)
}

/// `S⁻¹M` for base monomials `s`.
pub fn localize_module(m: &BlueModule, s: &[Monomial], bounds: &SearchBounds) -> Result<(BlueModule, BlueprintMorphism)> {
    let (_, phi) = crate::blueprint::localize(&m.base, s, bounds)?;
    Ok((base_change(m, &phi, bounds)?, phi))
}

/// `M ⊗_B N`, generated by the `x.y` for generators `x` of `M` and `y` of `N`.
pub fn tensor_modules(m: &BlueModule, n: &BlueModule, bounds: &SearchBounds) -> Result<BlueModule> {
    if *m.base != *n.base {
        return Err(Error::BaseMismatch);
    }
    let base = &m.base;
    let mut names: Vec<String> = Vec::new();
    for x in &m.generators {
        for y in &n.generators {
            let mut name = format!("{x}.{y}");
            while names.contains(&name) || base.atoms().contains(&name) {
                name.push('\'');
            }
            names.push(name);
        }
    }
    let free = free_algebra(base, &names)?;
    let off = base.atoms().len() as u32;
    let (rm, rn) = (m.rank() as u32, n.rank() as u32);
    // Send generator i of one factor to generator (i, j) or (j, i).
    let subst = |src_off: u32, s: &FormalSum, fixed: u32, left: bool| {
        let terms = s
            .terms()
            .iter()
            .map(|t| {
                t.reindex(&|a| {
                    if a < src_off {
                        a
                    } else {
                        let i = a - src_off;
                        off + if left { i * rn + fixed } else { fixed * rn + i }
                    }
                })
            })
            .collect();
        normalize_terms(&free, terms)
    };
    let mut rels = Vec::new();
    for (l, r) in module_relations(m) {
        for j in 0..rn {
            rels.push((subst(m.offset(), &l, j, true), subst(m.offset(), &r, j, true)));
        }
    }
    for (l, r) in module_relations(n) {
        for i in 0..rm {
            rels.push((subst(n.offset(), &l, i, false), subst(n.offset(), &r, i, false)));
        }
    }
    make_module(base, &names, rels, bounds)
}

/// All relations of degree one in the generators, including identifications
/// found by the proper quotient.
pub fn module_relations(m: &BlueModule) -> Vec<Relation> {
    let off = m.offset();
    let mut out: Vec<Relation> = m.relations.clone();
    for (x, y) in &m.algebra.monoid.relations {
        let dx = if x.is_zero() { 1 } else { gen_degree(off, x) };
        let dy = if y.is_zero() { 1 } else { gen_degree(off, y) };
        if dx == 1 && dy == 1 && !(x.is_zero() && y.is_zero()) {
            out.push((sum_of(x), sum_of(y)));
        }
    }
    out
}

fn sum_of(m: &Monomial) -> FormalSum {
    if m.is_zero() {
        FormalSum::empty()
    } else {
        FormalSum::single(m.clone())
    }
}

#[derive(Clone, Debug)]
pub struct ModuleIsoProof {
    pub inverse: ModuleMorphism,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenerationFailure {
    /// Over a builtin base, `y` is hit only through `h.y` with no `h` a unit,
    /// and `1` is no nonnegative combination of the `h` when given.
    Scalars { scalars: Vec<String>, combination_exists: Option<bool> },
    /// A weight making all images nonnegative and the generator negative.
    Weights { weights: Vec<i64> },
    /// The image of the finite source misses the generator.
    FiniteImage { image_size: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModuleIsoFailure {
    NoPreimage { generator: String, certificate: GenerationFailure },
    NotInjective { left: String, right: String },
}

fn scalar_certificate(f: &ModuleMorphism, k: usize) -> Option<GenerationFailure> {
    let t = &f.target;
    if !t.base.is_pure_builtin() || !t.is_free() {
        return None;
    }
    let y = t.generator(k);
    let dom = t.base.domain();
    let mut hs = Vec::new();
    for img in &f.images {
        let Monomial::Term(it) = img else { continue };
        if it.exps == y.exps() {
            if dom.is_unit(&it.coeff) {
                return None;
            }
            hs.push(it.coeff);
        }
    }
    let combination_exists = if dom.builtin == crate::arith::Builtin::Nat && dom.inverted.is_empty() {
        let gens: Option<Vec<u128>> = hs.iter().map(crate::arith::coeff_as_u128).collect();
        gens.map(|g| crate::arith::semigroup_represent(1, &g).is_some())
    } else {
        None
    };
    Some(GenerationFailure::Scalars {
        scalars: hs.iter().map(crate::arith::coeff_to_string).collect(),
        combination_exists,
    })
}

fn find_preimage(f: &ModuleMorphism, k: usize, bounds: &SearchBounds) -> Option<Monomial> {
    let (s, t) = (&f.source, &f.target);
    let y = t.normalize(&t.generator(k));
    let Monomial::Term(yt) = &y else { return None };
    let off = t.offset();
    for (i, img) in f.images.iter().enumerate() {
        if img.is_zero() {
            continue;
        }
        if let Some(q) = divide_term(t.base.domain(), yt, img) {
            if gen_degree(off, &q) == 0 {
                let cand = s.act(&q, &s.generator(i));
                if t.eq_elements(&f.apply(&cand), &y, bounds) == Some(true) {
                    return Some(cand);
                }
            }
        }
    }
    let base_atoms: Vec<u32> = (0..s.offset()).collect();
    let cs = s.base.monoid.enumerate(&base_atoms, bounds.max_degree.min(3));
    for i in 0..s.rank() {
        for c in &cs {
            let cand = s.act(c, &s.generator(i));
            if t.eq_elements(&f.apply(&cand), &y, bounds) == Some(true) {
                return Some(cand);
            }
        }
    }
    None
}

/// Decide whether a module morphism is an isomorphism.
pub fn is_module_iso(f: &ModuleMorphism, bounds: &SearchBounds) -> Verdict<ModuleIsoProof, ModuleIsoFailure> {
    let (s, t) = (&f.source, &f.target);
    let mut pre = Vec::new();
    for k in 0..t.rank() {
        match find_preimage(f, k, bounds) {
            Some(m) => pre.push(m),
            None => {
                let generator = t.generators[k].clone();
                if let Some(certificate) = scalar_certificate(f, k) {
                    return Verdict::Refuted(ModuleIsoFailure::NoPreimage { generator, certificate });
                }
                let atom = t.offset() + k as u32;
                if let Some(weights) = crate::blueprint::weight_obstruction(&t.algebra, &f.algebra_map.images, atom) {
                    return Verdict::Refuted(ModuleIsoFailure::NoPreimage {
                        generator,
                        certificate: GenerationFailure::Weights { weights },
                    });
                }
                if let Some(elems) = s.elements(5000) {
                    let y = t.generator(k);
                    if !elems.iter().any(|m| t.eq_elements(&f.apply(m), &y, bounds) == Some(true)) {
                        return Verdict::Refuted(ModuleIsoFailure::NoPreimage {
                            generator,
                            certificate: GenerationFailure::FiniteImage { image_size: elems.len() },
                        });
                    }
                }
                return Verdict::Unknown(Exhausted::new("max_degree", format!("no preimage found for {generator}")));
            }
        }
    }
    let g = match ModuleMorphism::new(t, s, pre) {
        Ok(g) => g,
        Err(e) => return Verdict::Unknown(Exhausted::new("inverse", e.to_string())),
    };
    match g.validate(bounds) {
        Verdict::Proved(()) => {}
        Verdict::Refuted(_) => {
            return Verdict::Unknown(Exhausted::new("inverse", "candidate inverse does not preserve relations"))
        }
        Verdict::Unknown(e) => return Verdict::Unknown(e),
    }
    for i in 0..s.rank() {
        let x = s.normalize(&s.generator(i));
        let back = g.apply(&f.images[i]);
        match s.eq_elements(&back, &x, bounds) {
            Some(true) => {}
            Some(false) => {
                return Verdict::Refuted(ModuleIsoFailure::NotInjective { left: s.show(&x), right: s.show(&back) })
            }
            None => return Verdict::Unknown(Exhausted::new("max_steps", "composite identity undecided")),
        }
    }
    Verdict::Proved(ModuleIsoProof { inverse: g })
}

/// All morphisms between finite modules.
pub fn hom_set(m: &BlueModule, n: &BlueModule, bounds: &SearchBounds) -> Result<Vec<ModuleMorphism>> {
    let targets = n
        .elements(2000)
        .ok_or_else(|| Error::Unsupported("hom sets need a finite target module".into()))?;
    let k = m.rank();
    let total = (targets.len() as f64).powi(k as i32);
    if total > 50_000.0 {
        return Err(Error::Unsupported(format!("{total} candidate assignments")));
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        let images = idx.iter().map(|i| targets[*i].clone()).collect();
        let f = ModuleMorphism::new(m, n, images)?;
        match f.validate(bounds) {
            Verdict::Proved(()) => out.push(f),
            Verdict::Refuted(_) => {}
            Verdict::Unknown(e) => return Err(Error::BoundExhausted(e.detail)),
        }
        let mut i = 0;
        while i < k {
            idx[i] += 1;
            if idx[i] < targets.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == k {
            break;
        }
    }
    Ok(out)
}

/// The internal hom `Hom(N, P)` of finite modules, as its set of elements.
pub fn internal_hom(n: &BlueModule, p: &BlueModule, bounds: &SearchBounds) -> Result<Vec<ModuleMorphism>> {
    hom_set(n, p, bounds)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjunctionReport {
    pub tensor_homs: usize,
    pub curried_homs: usize,
    pub curry_is_bijective: bool,
}

/// Compare `Hom(M ⊗ N, P)` with `Hom(M, Hom(N, P))` by enumeration.
pub fn check_adjunction(m: &BlueModule, n: &BlueModule, p: &BlueModule, bounds: &SearchBounds) -> Result<AdjunctionReport> {
    let mn = tensor_modules(m, n, bounds)?;
    let left = hom_set(&mn, p, bounds)?;
    let inner = internal_hom(n, p, bounds)?;
    let rn = n.rank();
    // Tuples (phi_i) in Hom(N, P)^rank(M) with X_i -> phi_i(Y_j) a morphism for every j.
    let mut right: BTreeSet<Vec<Monomial>> = BTreeSet::new();
    let k = m.rank();
    let total = (inner.len() as f64).powi(k as i32);
    if total > 50_000.0 {
        return Err(Error::Unsupported(format!("{total} candidate tuples")));
    }
    let mut idx = vec![0usize; k];
    if !inner.is_empty() || k == 0 {
        loop {
            let mut ok = true;
            for j in 0..rn {
                let images = idx.iter().map(|i| inner[*i].images[j].clone()).collect();
                let f = ModuleMorphism::new(m, p, images)?;
                match f.validate(bounds) {
                    Verdict::Proved(()) => {}
                    Verdict::Refuted(_) => {
                        ok = false;
                        break;
                    }
                    Verdict::Unknown(e) => return Err(Error::BoundExhausted(e.detail)),
                }
            }
            if ok {
                right.insert(idx.iter().flat_map(|i| inner[*i].images.clone()).collect());
            }
            let mut i = 0;
            while i < k {
                idx[i] += 1;
                if idx[i] < inner.len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    let curried: BTreeSet<Vec<Monomial>> = left.iter().map(|f| f.images.clone()).collect();
    let bijective = curried.len() == left.len() && curried == right;
    Ok(AdjunctionReport { tensor_homs: left.len(), curried_homs: right.len(), curry_is_bijective: bijective })
}

/// Every element of `M ⊗ N` as `x ⊗ y`: returns the pair of generators and
/// the base scalar.
pub fn split_tensor_element(m: &BlueModule, n: &BlueModule, mn: &BlueModule, e: &Monomial) -> Option<(Monomial, Monomial)> {
    let Monomial::Term(t) = e else { return Some((Monomial::Zero, Monomial::Zero)) };
    let off = mn.offset();
    let (gen, _) = t.exps.iter().find(|(a, _)| *a >= off)?;
    let idx = (gen - off) as usize;
    let (i, j) = (idx / n.rank(), idx % n.rank());
    let scalar = Monomial::Term(Term {
        coeff: t.coeff,
        exps: t.exps.iter().filter(|(a, _)| *a < off).cloned().collect(),
    });
    Some((m.act(&scalar, &m.generator(i)), n.generator(j)))
}
