//! Morphisms of blueprints, given by images of atoms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::invariants::Separation;
use super::related::related;
use super::{Blueprint, BpRef};
use crate::arith::Builtin;
use crate::error::{Error, Result};
use crate::monoid::{Monomial, Term};
use crate::sum::{normalize_terms, FormalSum};
use crate::verdict::{Exhausted, SearchBounds, Verdict};

#[derive(Clone, Debug)]
pub struct BlueprintMorphism {
    pub source: BpRef,
    pub target: BpRef,
    /// Image of each source atom, in target normal form.
    pub images: Vec<Monomial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorphismViolation {
    /// A monoid relation whose sides have distinct images.
    Monoid { index: usize, left: Monomial, right: Monomial },
    /// An additive relation whose image is separated in the target.
    Additive { index: usize, left: FormalSum, right: FormalSum, separation: Separation },
}

impl BlueprintMorphism {
    /// Assemble a morphism without validating relations.
    pub fn new(source: BpRef, target: BpRef, images: Vec<Monomial>) -> Result<Self> {
        if images.len() != source.atoms().len() {
            return Err(Error::InvalidMorphism(format!(
                "expected {} atom images, got {}",
                source.atoms().len(),
                images.len()
            )));
        }
        if !source.domain().maps_into(target.domain()) {
            return Err(Error::InvalidMorphism(format!(
                "coefficients of {} do not map into {}",
                source.domain(),
                target.domain()
            )));
        }
        let images = images
            .iter()
            .map(|m| target.monoid.check(m).map(|m| target.normalize(&m)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(BlueprintMorphism { source, target, images })
    }

    /// Assemble and validate.
    pub fn make(
        source: BpRef,
        target: BpRef,
        images: Vec<Monomial>,
        bounds: &SearchBounds,
    ) -> Result<Verdict<BlueprintMorphism, MorphismViolation>> {
        let f = Self::new(source, target, images)?;
        Ok(match f.validate(bounds) {
            Verdict::Proved(()) => Verdict::Proved(f),
            Verdict::Refuted(v) => Verdict::Refuted(v),
            Verdict::Unknown(e) => Verdict::Unknown(e),
        })
    }

    pub fn identity(b: &BpRef) -> BlueprintMorphism {
        let images = (0..b.atoms().len() as u32).map(Monomial::atom).map(|m| b.normalize(&m)).collect();
        BlueprintMorphism { source: b.clone(), target: b.clone(), images }
    }

    /// Atom-by-name map between blueprints sharing atom names.
    pub fn by_names(source: BpRef, target: BpRef) -> Result<Self> {
        let mut images = Vec::new();
        for a in source.atoms() {
            images.push(target.atom(a)?);
        }
        Self::new(source, target, images)
    }

    pub fn map_coeff(&self, t: &Term) -> Monomial {
        let td = self.target.domain();
        if self.source.domain().is_f1() || td.is_f1() {
            return Monomial::one();
        }
        match td.normalize(t.coeff) {
            None => Monomial::Zero,
            Some(c) => Monomial::scalar(c),
        }
    }

    pub fn apply(&self, m: &Monomial) -> Monomial {
        let Monomial::Term(t) = m else { return Monomial::Zero };
        let dom = self.target.domain();
        let mut acc = self.map_coeff(t);
        for (a, k) in &t.exps {
            acc = acc.mul_raw(&self.images[*a as usize].pow_raw(*k, dom), dom);
        }
        self.target.normalize(&acc)
    }

    pub fn apply_sum(&self, s: &FormalSum) -> FormalSum {
        normalize_terms(&self.target.monoid, s.terms().iter().map(|m| self.apply(m)).collect())
    }

    pub fn validate(&self, bounds: &SearchBounds) -> Verdict<(), MorphismViolation> {
        let mut unknown = None;
        for (i, (x, y)) in self.source.monoid.relations.iter().enumerate() {
            let (fx, fy) = (self.apply(x), self.apply(y));
            match self.target.monoid.eq(&fx, &fy, bounds) {
                Ok(Verdict::Proved(_)) => {}
                Ok(Verdict::Refuted(_)) => return Verdict::Refuted(MorphismViolation::Monoid { index: i, left: fx, right: fy }),
                Ok(Verdict::Unknown(e)) => unknown = Some(e),
                Err(e) => unknown = Some(Exhausted::new("input", e.to_string())),
            }
        }
        for (i, (l, r)) in self.source.generators.iter().enumerate() {
            let (fl, fr) = (self.apply_sum(l), self.apply_sum(r));
            match related(&self.target, &fl, &fr, bounds) {
                Verdict::Proved(_) => {}
                Verdict::Refuted(sep) => {
                    return Verdict::Refuted(MorphismViolation::Additive { index: i, left: fl, right: fr, separation: sep })
                }
                Verdict::Unknown(e) => unknown = Some(e),
            }
        }
        match unknown {
            None => Verdict::Proved(()),
            Some(e) => Verdict::Unknown(e),
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &BlueprintMorphism) -> BlueprintMorphism {
        let images = self.images.iter().map(|m| other.apply(m)).collect();
        BlueprintMorphism { source: self.source.clone(), target: other.target.clone(), images }
    }

    /// Compare on atoms; `None` when some equality is undecided.
    pub fn agrees_with(&self, other: &BlueprintMorphism, bounds: &SearchBounds) -> Option<bool> {
        let mut all = true;
        for (x, y) in self.images.iter().zip(&other.images) {
            match self.target.eq_elements(x, y, bounds) {
                Some(true) => {}
                Some(false) => return Some(false),
                None => all = false,
            }
        }
        if all {
            Some(true)
        } else {
            None
        }
    }

    pub fn is_identity_on_atoms(&self, bounds: &SearchBounds) -> Option<bool> {
        if !Arc::ptr_eq(&self.source, &self.target) && *self.source != *self.target {
            return Some(false);
        }
        self.agrees_with(&BlueprintMorphism::identity(&self.source), bounds)
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        self.source
            .atoms()
            .iter()
            .zip(&self.images)
            .map(|(a, m)| (a.clone(), self.target.show(m)))
            .collect()
    }

    /// Whether builtin coefficients strictly grow (for example `N -> Z`).
    pub(crate) fn coefficients_surjective(&self) -> bool {
        let s = self.source.domain();
        let t = self.target.domain();
        match (s.builtin, t.builtin) {
            (Builtin::None, Builtin::None) => true,
            (Builtin::None, _) => false,
            (Builtin::Nat, Builtin::Int) => false,
            (Builtin::Nat | Builtin::Int, Builtin::IntModN(_)) => true,
            _ => t.inverted.is_subset(&s.inverted),
        }
    }
}

impl Blueprint {
    pub fn into_ref(self) -> BpRef {
        Arc::new(self)
    }
}
