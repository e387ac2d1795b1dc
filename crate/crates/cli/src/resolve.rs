//! Turns declarations into library objects, on demand and memoized.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use blue_core::arith::CoeffDomain;
use blue_core::blueprint::{blueprint_from_text, localize, Blueprint, BlueprintMorphism, BpRef};
use blue_core::corpus::basic_presentation;
use blue_core::module::{module_from_text, BlueModule};
use blue_core::presentation::{atlas, AffinePresentation, PresentationMorphism, Site};
use blue_core::verdict::SearchBounds;

use crate::dsl::{self, BlueprintExpr, Coefficients, Decl, DeclBody, Document, DslError, Ident, PresentationExpr, Span, Sum, Term};
use crate::prelude::PRELUDE;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scope {
    Prelude,
    User,
}

/// A presentation with its structure morphism: the cover map for `cover`,
/// the atlas map for `atlas`, the identity otherwise.
#[derive(Clone, Debug)]
pub struct PresentationItem {
    pub presentation: AffinePresentation,
    pub structure: PresentationMorphism,
}

#[derive(Clone, Debug)]
pub enum Item {
    Blueprint(BpRef),
    Module(Arc<BlueModule>),
    Morphism(BlueprintMorphism),
    Presentation(Arc<PresentationItem>),
}

impl Item {
    pub fn kind(&self) -> &'static str {
        match self {
            Item::Blueprint(_) => "blueprint",
            Item::Module(_) => "module",
            Item::Morphism(_) => "morphism",
            Item::Presentation(_) => "presentation",
        }
    }
}

/// A diagnostic located in one of the two documents.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{error}")]
pub struct Located {
    pub scope: Option<Scope>,
    pub error: DslError,
}

pub struct Source {
    pub origin: String,
    pub text: String,
    pub doc: Document,
}

impl Source {
    pub fn parse(origin: &str, text: &str) -> Result<Source, DslError> {
        Ok(Source { origin: origin.to_string(), text: text.to_string(), doc: dsl::parse(text)? })
    }
}

pub struct Env {
    pub prelude: Source,
    pub user: Option<Source>,
    bounds: SearchBounds,
    cache: RefCell<HashMap<(Scope, usize), Item>>,
    notices: RefCell<Vec<String>>,
}

fn domain_of(c: Coefficients) -> Result<CoeffDomain, String> {
    match c {
        Coefficients::F1 => Ok(CoeffDomain::f1()),
        Coefficients::Nat => Ok(CoeffDomain::nat()),
        Coefficients::Int => Ok(CoeffDomain::int()),
        Coefficients::IntMod(n) => CoeffDomain::int_mod(n).map_err(|e| e.to_string()),
    }
}

fn keyword(name: &str) -> Option<Coefficients> {
    match name {
        "F1" => Some(Coefficients::F1),
        "N" => Some(Coefficients::Nat),
        "Z" => Some(Coefficients::Int),
        _ => None,
    }
}

fn invalid(decl: &Decl, message: impl ToString) -> DslError {
    DslError::Invalid { name: decl.name.text.clone(), message: message.to_string(), span: decl.span }
}

fn check_atoms(term: &Term, known: &[String]) -> Result<(), DslError> {
    for (f, _) in &term.factors {
        if !known.contains(&f.text) {
            return Err(DslError::UnresolvedName { name: f.text.clone(), span: f.span });
        }
    }
    Ok(())
}

fn check_sum(sum: &Sum, known: &[String]) -> Result<(), DslError> {
    sum.terms.iter().try_for_each(|t| check_atoms(t, known))
}

fn unique(ids: &[Ident]) -> Result<(), DslError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.text.as_str()) {
            return Err(DslError::DuplicateName { name: id.text.clone(), span: id.span });
        }
    }
    Ok(())
}

/// Module relation text, with `*` for the empty side.
fn module_side(s: &Sum) -> String {
    if s.terms.is_empty() {
        "*".into()
    } else {
        s.to_string()
    }
}

impl Env {
    /// Parse the prelude and an optional user document and check names.
    pub fn new(user: Option<(&str, &str)>, bounds: SearchBounds) -> Result<Env, Located> {
        let prelude = Source::parse("<prelude>", PRELUDE).map_err(|error| Located { scope: Some(Scope::Prelude), error })?;
        let user = match user {
            Some((origin, text)) => Some(Source::parse(origin, text).map_err(|error| Located { scope: Some(Scope::User), error })?),
            None => None,
        };
        let env = Env { prelude, user, bounds, cache: RefCell::new(HashMap::new()), notices: RefCell::new(vec![]) };
        env.check_names(Scope::Prelude).map_err(|error| Located { scope: Some(Scope::Prelude), error })?;
        if env.user.is_some() {
            env.check_names(Scope::User).map_err(|error| Located { scope: Some(Scope::User), error })?;
        }
        Ok(env)
    }

    pub fn bounds(&self) -> &SearchBounds {
        &self.bounds
    }

    pub fn source(&self, scope: Scope) -> &Source {
        match scope {
            Scope::Prelude => &self.prelude,
            Scope::User => self.user.as_ref().unwrap_or(&self.prelude),
        }
    }

    pub fn notices(&self) -> Vec<String> {
        self.notices.borrow().clone()
    }

    /// `origin:line:col: message`, or the bare message for command-line names.
    pub fn render(&self, e: &Located) -> String {
        match e.scope {
            Some(s) => {
                let src = self.source(s);
                e.error.render(&src.origin, &src.text)
            }
            None => e.error.to_string(),
        }
    }

    fn decls(&self, scope: Scope) -> &[Decl] {
        &self.source(scope).doc.decls
    }

    /// The declaration visible as `name` from position `pos` of `scope`.
    fn lookup(&self, scope: Scope, pos: usize, name: &str) -> Option<(Scope, usize)> {
        if let Some(i) = self.decls(scope)[..pos].iter().rposition(|d| d.name.text == name) {
            return Some((scope, i));
        }
        if scope == Scope::User {
            if let Some(i) = self.prelude.doc.decls.iter().rposition(|d| d.name.text == name) {
                return Some((Scope::Prelude, i));
            }
        }
        None
    }

    /// The declaration a command-line name refers to.
    pub fn find(&self, name: &str) -> Option<(Scope, usize)> {
        match &self.user {
            Some(u) => self.lookup(Scope::User, u.doc.decls.len(), name),
            None => self.lookup(Scope::Prelude, self.prelude.doc.decls.len(), name),
        }
    }

    pub fn decl(&self, at: (Scope, usize)) -> &Decl {
        &self.decls(at.0)[at.1]
    }

    pub fn user_decls(&self) -> Vec<(Scope, usize)> {
        let scope = if self.user.is_some() { Scope::User } else { Scope::Prelude };
        (0..self.decls(scope).len()).map(|i| (scope, i)).collect()
    }

    fn check_ref(&self, scope: Scope, pos: usize, id: &Ident, expected: &'static str) -> Result<(), DslError> {
        match self.lookup(scope, pos, &id.text) {
            Some(at) => {
                let found = self.decl(at).body.kind();
                if found == expected {
                    Ok(())
                } else {
                    Err(DslError::WrongKind { name: id.text.clone(), expected, found, span: id.span })
                }
            }
            None if expected == "blueprint" && keyword(&id.text).is_some() => Ok(()),
            None => Err(DslError::UnresolvedName { name: id.text.clone(), span: id.span }),
        }
    }

    /// Unique names and references to earlier declarations of the right kind.
    fn check_names(&self, scope: Scope) -> Result<(), DslError> {
        let decls = self.decls(scope);
        let mut seen = HashSet::new();
        for (pos, d) in decls.iter().enumerate() {
            if !seen.insert(d.name.text.as_str()) {
                return Err(DslError::DuplicateName { name: d.name.text.clone(), span: d.name.span });
            }
            let r = |id: &Ident, kind| self.check_ref(scope, pos, id, kind);
            match &d.body {
                DeclBody::Builtin(_) => {}
                DeclBody::Blueprint(BlueprintExpr::Free { head, coefficients, .. }) => {
                    if coefficients.is_none() {
                        r(head, "blueprint")?;
                    }
                }
                DeclBody::Blueprint(BlueprintExpr::Localize { base, .. }) => r(base, "blueprint")?,
                DeclBody::Module { base, .. } => r(base, "blueprint")?,
                DeclBody::Morphism { source, target, .. } => {
                    r(source, "blueprint")?;
                    r(target, "blueprint")?;
                }
                DeclBody::Presentation(PresentationExpr::Diagram { charts, arrows }) => {
                    let names: Vec<Ident> = charts.iter().map(|(n, _)| n.clone()).collect();
                    unique(&names)?;
                    for (_, b) in charts {
                        r(b, "blueprint")?;
                    }
                    for (from, to, m) in arrows {
                        for end in [from, to] {
                            if !names.iter().any(|n| n.text == end.text) {
                                return Err(DslError::UnresolvedName { name: end.text.clone(), span: end.span });
                            }
                        }
                        r(m, "morphism")?;
                    }
                }
                DeclBody::Presentation(PresentationExpr::Cover { base, .. } | PresentationExpr::Spec { base }) => r(base, "blueprint")?,
                DeclBody::Presentation(PresentationExpr::Atlas { of }) => r(of, "presentation")?,
            }
        }
        Ok(())
    }

    fn reference(&self, scope: Scope, pos: usize, id: &Ident) -> Result<Item, Located> {
        match self.lookup(scope, pos, &id.text) {
            Some(at) => self.build(at),
            None => match keyword(&id.text) {
                Some(c) => Ok(Item::Blueprint(Blueprint::builtin(domain_of(c).expect("keyword domain")).into_ref())),
                None => Err(Located { scope: Some(scope), error: DslError::UnresolvedName { name: id.text.clone(), span: id.span } }),
            },
        }
    }

    fn blueprint_ref(&self, scope: Scope, pos: usize, id: &Ident) -> Result<BpRef, Located> {
        match self.reference(scope, pos, id)? {
            Item::Blueprint(b) => Ok(b),
            other => Err(Located {
                scope: Some(scope),
                error: DslError::WrongKind { name: id.text.clone(), expected: "blueprint", found: other.kind(), span: id.span },
            }),
        }
    }

    /// Build (or fetch) the object a declaration denotes.
    pub fn build(&self, at: (Scope, usize)) -> Result<Item, Located> {
        if let Some(item) = self.cache.borrow().get(&at) {
            return Ok(item.clone());
        }
        let item = self.build_uncached(at)?;
        self.cache.borrow_mut().insert(at, item.clone());
        Ok(item)
    }

    fn build_uncached(&self, (scope, pos): (Scope, usize)) -> Result<Item, Located> {
        let d = &self.decls(scope)[pos];
        let here = |error: DslError| Located { scope: Some(scope), error };
        let bounds = &self.bounds;
        let item = match &d.body {
            DeclBody::Builtin(c) => Item::Blueprint(Blueprint::builtin(domain_of(*c).map_err(|m| here(invalid(d, m)))?).into_ref()),
            DeclBody::Blueprint(BlueprintExpr::Free { head, coefficients, atoms, relations }) => {
                let domain = match coefficients {
                    Some(c) => domain_of(*c).map_err(|m| here(invalid(d, m)))?,
                    None => {
                        let b = self.blueprint_ref(scope, pos, head)?;
                        if atoms.is_empty() && relations.is_empty() {
                            return Ok(Item::Blueprint(b));
                        }
                        if !b.is_pure_builtin() {
                            return Err(here(invalid(d, format!("`{}` has atoms and cannot be a coefficient head", head.text))));
                        }
                        b.domain().clone()
                    }
                };
                unique(atoms).map_err(here)?;
                let names: Vec<String> = atoms.iter().map(|a| a.text.clone()).collect();
                for rel in relations {
                    check_sum(&rel.lhs, &names).map_err(here)?;
                    check_sum(&rel.rhs, &names).map_err(here)?;
                    if scope == Scope::User && rel.lhs.terms.len() <= 1 && rel.rhs.terms.len() <= 1 {
                        self.notices
                            .borrow_mut()
                            .push(format!("{}: `{rel}` is a single-term equation and holds in the monoid", d.name.text));
                    }
                }
                let atom_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                let rels: Vec<String> = relations.iter().map(|r| r.to_string()).collect();
                let rel_refs: Vec<&str> = rels.iter().map(|s| s.as_str()).collect();
                let b = blueprint_from_text(domain, &atom_refs, &rel_refs, bounds).map_err(|e| here(invalid(d, e)))?;
                Item::Blueprint(b.into_ref())
            }
            DeclBody::Blueprint(BlueprintExpr::Localize { base, at }) => {
                let b = self.blueprint_ref(scope, pos, base)?;
                let mut gens = Vec::new();
                for t in at {
                    check_atoms(t, b.atoms()).map_err(here)?;
                    gens.push(b.parse(&t.to_string()).map_err(|e| here(invalid(d, e)))?);
                }
                Item::Blueprint(localize(&b, &gens, bounds).map_err(|e| here(invalid(d, e)))?.0)
            }
            DeclBody::Module { base, generators, relations } => {
                let b = self.blueprint_ref(scope, pos, base)?;
                unique(generators).map_err(here)?;
                let mut known = b.atoms().to_vec();
                known.extend(generators.iter().map(|g| g.text.clone()));
                for rel in relations {
                    check_sum(&rel.lhs, &known).map_err(here)?;
                    check_sum(&rel.rhs, &known).map_err(here)?;
                }
                let gens: Vec<&str> = generators.iter().map(|g| g.text.as_str()).collect();
                let rels: Vec<String> = relations.iter().map(|r| format!("{} = {}", module_side(&r.lhs), module_side(&r.rhs))).collect();
                let rel_refs: Vec<&str> = rels.iter().map(|s| s.as_str()).collect();
                let m = module_from_text(&b, &gens, &rel_refs, bounds).map_err(|e| here(invalid(d, e)))?;
                Item::Module(Arc::new(m))
            }
            DeclBody::Morphism { source, target, assignments } => {
                let s = self.blueprint_ref(scope, pos, source)?;
                let t = self.blueprint_ref(scope, pos, target)?;
                let names: Vec<Ident> = assignments.iter().map(|(a, _)| a.clone()).collect();
                unique(&names).map_err(here)?;
                for (a, term) in assignments {
                    if !s.atoms().contains(&a.text) {
                        return Err(here(DslError::UnresolvedName { name: a.text.clone(), span: a.span }));
                    }
                    check_atoms(term, t.atoms()).map_err(here)?;
                }
                let mut images = Vec::new();
                for atom in s.atoms() {
                    let image = match assignments.iter().find(|(a, _)| &a.text == atom) {
                        Some((_, term)) => t.parse(&term.to_string()),
                        None if t.atoms().contains(atom) => t.atom(atom),
                        None => return Err(here(invalid(d, format!("atom `{atom}` has no image and `{}` has no atom of that name", target.text)))),
                    };
                    images.push(image.map_err(|e| here(invalid(d, e)))?);
                }
                Item::Morphism(BlueprintMorphism::new(s, t, images).map_err(|e| here(invalid(d, e)))?)
            }
            DeclBody::Presentation(expr) => {
                let (presentation, structure) = match expr {
                    PresentationExpr::Diagram { charts, arrows } => {
                        let mut p = AffinePresentation::new(Site::Blue);
                        for (n, b) in charts {
                            let b = self.blueprint_ref(scope, pos, b)?;
                            p.add_object(&n.text, b);
                        }
                        for (from, to, m) in arrows {
                            let map = match self.reference(scope, pos, m)? {
                                Item::Morphism(f) => f,
                                other => {
                                    return Err(here(DslError::WrongKind {
                                        name: m.text.clone(),
                                        expected: "morphism",
                                        found: other.kind(),
                                        span: m.span,
                                    }))
                                }
                            };
                            let (i, j) = (p.index(&from.text).expect("checked"), p.index(&to.text).expect("checked"));
                            p.add_arrow(i, j, map).map_err(|e| here(invalid(d, format!("arrow {} -> {}: {e}", from.text, to.text))))?;
                        }
                        let id = PresentationMorphism::identity(&p);
                        (p, id)
                    }
                    PresentationExpr::Cover { base, by } => {
                        let b = self.blueprint_ref(scope, pos, base)?;
                        for t in by {
                            check_atoms(t, b.atoms()).map_err(here)?;
                        }
                        let hs: Vec<String> = by.iter().map(|t| t.to_string()).collect();
                        let refs: Vec<&str> = hs.iter().map(|s| s.as_str()).collect();
                        basic_presentation(&b, &refs, Site::Blue, bounds).map_err(|e| here(invalid(d, e)))?
                    }
                    PresentationExpr::Spec { base } => {
                        let b = self.blueprint_ref(scope, pos, base)?;
                        let p = AffinePresentation::affine(Site::Blue, &base.text, b);
                        let id = PresentationMorphism::identity(&p);
                        (p, id)
                    }
                    PresentationExpr::Atlas { of } => {
                        let inner = match self.reference(scope, pos, of)? {
                            Item::Presentation(p) => p,
                            other => {
                                return Err(here(DslError::WrongKind {
                                    name: of.text.clone(),
                                    expected: "presentation",
                                    found: other.kind(),
                                    span: of.span,
                                }))
                            }
                        };
                        let (a, m) = atlas(&inner.presentation);
                        let s = m.then(&inner.structure);
                        (a, s)
                    }
                };
                Item::Presentation(Arc::new(PresentationItem { presentation, structure }))
            }
        };
        Ok(item)
    }

    /// Resolve a command-line name to an object of the given kind.
    pub fn get(&self, name: &str, expected: &'static str) -> Result<Item, Located> {
        let at = self.find(name).map(Ok).unwrap_or_else(|| match keyword(name) {
            Some(_) => Err(None),
            None => Err(Some(Located {
                scope: None,
                error: DslError::UnresolvedName { name: name.to_string(), span: Span::default() },
            })),
        });
        let item = match at {
            Ok(at) => self.build(at)?,
            Err(None) => Item::Blueprint(Blueprint::builtin(domain_of(keyword(name).expect("keyword")).expect("domain")).into_ref()),
            Err(Some(e)) => return Err(e),
        };
        if item.kind() != expected {
            return Err(Located {
                scope: None,
                error: DslError::WrongKind { name: name.to_string(), expected, found: item.kind(), span: Span::default() },
            });
        }
        Ok(item)
    }

    pub fn blueprint(&self, name: &str) -> Result<BpRef, Located> {
        match self.get(name, "blueprint")? {
            Item::Blueprint(b) => Ok(b),
            _ => unreachable!("kind checked"),
        }
    }

    pub fn module(&self, name: &str) -> Result<Arc<BlueModule>, Located> {
        match self.get(name, "module")? {
            Item::Module(m) => Ok(m),
            _ => unreachable!("kind checked"),
        }
    }

    pub fn morphism(&self, name: &str) -> Result<BlueprintMorphism, Located> {
        match self.get(name, "morphism")? {
            Item::Morphism(f) => Ok(f),
            _ => unreachable!("kind checked"),
        }
    }

    pub fn presentation(&self, name: &str) -> Result<Arc<PresentationItem>, Located> {
        match self.get(name, "presentation")? {
            Item::Presentation(p) => Ok(p),
            _ => unreachable!("kind checked"),
        }
    }

    /// Kind of a command-line name without building it.
    pub fn kind_of(&self, name: &str) -> Option<&'static str> {
        match self.find(name) {
            Some(at) => Some(self.decl(at).body.kind()),
            None => keyword(name).map(|_| "blueprint"),
        }
    }

    /// Canonical text of the declaration a name refers to.
    pub fn canonical(&self, name: &str) -> Option<String> {
        self.find(name).map(|at| self.decl(at).to_string())
    }
}
