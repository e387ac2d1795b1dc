//! Blueprints: a monoid with zero together with a pre-addition generated by
//! finitely many relations between formal sums.

mod invariants;
mod localize;
mod morphism;
mod related;
mod tensor;

pub use invariants::{check_separation, evaluate_monomial, evaluate_sum, is_valid_evaluation, EvalTarget, Separation};
pub use localize::{
    unit_inverse, is_finite_localization, is_localization, localization_map, localize, units, verify_presentation,
    LocalizationFailure, LocalizationInfo, LocalizationProof, PresentationFailure, PresentationProof, UnitsReport,
};
pub(crate) use invariants::{grading_weights, is_homogeneous, valid_evaluations};
pub(crate) use localize::{finite_elements, weight_obstruction};
pub use morphism::{BlueprintMorphism, MorphismViolation};
pub use related::{related, replay_derivation, Derivation};
pub use tensor::{directed_colimit, tensor_blueprints, tensor_universal_map, Colimit, Diagram, Tensor};

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::CoeffDomain;
use crate::error::{Error, Result};
use crate::monoid::{Monomial, MonoidError, MonoidPresentation};
use crate::sum::FormalSum;
use crate::verdict::SearchBounds;

pub type Relation = (FormalSum, FormalSum);

/// Record of the identifications made while computing the proper quotient.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProperCertificate {
    pub rounds: usize,
    pub identified: Vec<(Monomial, Monomial)>,
    pub explored_states: usize,
}

#[derive(Clone, Debug)]
pub struct Blueprint {
    pub monoid: MonoidPresentation,
    pub generators: Vec<Relation>,
    pub certificate: ProperCertificate,
    pub localization: Option<LocalizationInfo>,
    /// Known inverses of unit atoms.
    pub inverses: BTreeMap<u32, Monomial>,
    /// Atoms any two of which multiply to zero (module generators).
    pub square_zero: BTreeSet<u32>,
}

impl PartialEq for Blueprint {
    fn eq(&self, other: &Self) -> bool {
        self.monoid == other.monoid && self.generators == other.generators
    }
}

pub type BpRef = Arc<Blueprint>;

impl Blueprint {
    pub fn atoms(&self) -> &[String] {
        &self.monoid.atoms
    }

    pub fn domain(&self) -> &CoeffDomain {
        &self.monoid.domain
    }

    pub fn atom(&self, name: &str) -> Result<Monomial> {
        Ok(self.monoid.atom(name)?)
    }

    pub fn parse(&self, s: &str) -> Result<Monomial> {
        Ok(self.monoid.parse(s)?)
    }

    pub fn parse_sum(&self, s: &str) -> Result<FormalSum> {
        Ok(crate::sum::parse_sum(s, &self.monoid)?)
    }

    pub fn show(&self, m: &Monomial) -> String {
        self.monoid.show(m)
    }

    pub fn show_sum(&self, s: &FormalSum) -> String {
        s.show(&self.monoid)
    }

    pub fn normalize(&self, m: &Monomial) -> Monomial {
        self.monoid.normalize(m)
    }

    pub fn mul(&self, a: &Monomial, b: &Monomial) -> Monomial {
        self.monoid.mul(a, b)
    }

    /// Builtin blueprint without atoms, such as `N` or `Z[1/6]`.
    pub fn is_pure_builtin(&self) -> bool {
        !self.domain().is_f1() && self.monoid.atoms.is_empty()
    }

    pub fn f1() -> Blueprint {
        Blueprint::plain(MonoidPresentation::default())
    }

    pub fn builtin(domain: CoeffDomain) -> Blueprint {
        Blueprint::plain(MonoidPresentation::free(vec![], domain).expect("no atoms"))
    }

    fn plain(monoid: MonoidPresentation) -> Blueprint {
        Blueprint {
            monoid,
            generators: vec![],
            certificate: ProperCertificate::default(),
            localization: None,
            inverses: BTreeMap::new(),
            square_zero: BTreeSet::new(),
        }
    }

    /// Equality of monoid elements.
    pub fn eq_elements(&self, a: &Monomial, b: &Monomial, bounds: &SearchBounds) -> Option<bool> {
        self.monoid.equal(a, b, bounds)
    }

    pub fn is_unit_atom(&self, i: u32) -> bool {
        self.inverses.contains_key(&i)
    }

    /// Inverse of a monomial built from known unit atoms and unit coefficients.
    pub fn known_inverse(&self, m: &Monomial) -> Option<Monomial> {
        let t = m.term()?;
        let c = self.domain().inverse(&t.coeff)?;
        if !self.domain().is_unit(&t.coeff) {
            return None;
        }
        let mut acc = Monomial::scalar(c);
        for (a, k) in &t.exps {
            let inv = self.inverses.get(a)?;
            acc = acc.mul_raw(&inv.pow_raw(*k, self.domain()), self.domain());
        }
        Some(self.normalize(&acc))
    }
}

/// Build the proper blueprint generated by `relations` over `monoid`.
pub fn make_blueprint(monoid: MonoidPresentation, relations: Vec<Relation>, bounds: &SearchBounds) -> Result<Blueprint> {
    proper_quotient(monoid, relations, BTreeMap::new(), None, bounds)
}

pub(crate) fn proper_quotient(
    mut monoid: MonoidPresentation,
    relations: Vec<Relation>,
    inverses: BTreeMap<u32, Monomial>,
    localization: Option<LocalizationInfo>,
    bounds: &SearchBounds,
) -> Result<Blueprint> {
    for (l, r) in &relations {
        for m in l.terms().iter().chain(r.terms()) {
            monoid.check(m)?;
        }
    }
    let mut cert = ProperCertificate::default();
    let max_rounds = 12;
    loop {
        if cert.rounds >= max_rounds {
            return Err(Error::BoundExhausted(format!(
                "proper quotient did not stabilise within {max_rounds} rounds"
            )));
        }
        cert.rounds += 1;
        let mut gens: Vec<Relation> = Vec::new();
        let mut new_rels: Vec<(Monomial, Monomial)> = Vec::new();
        for (l, r) in &relations {
            let l = l.normalize(&monoid);
            let r = r.normalize(&monoid);
            if l == r {
                continue;
            }
            if l.len() <= 1 && r.len() <= 1 {
                let a = l.terms().first().cloned().unwrap_or(Monomial::Zero);
                let b = r.terms().first().cloned().unwrap_or(Monomial::Zero);
                new_rels.push((a, b));
                continue;
            }
            let key = if l <= r { (l, r) } else { (r, l) };
            if !gens.contains(&key) {
                gens.push(key);
            }
        }
        if new_rels.is_empty() {
            let bp = Blueprint {
                monoid: monoid.clone(),
                generators: gens.clone(),
                certificate: cert.clone(),
                localization: localization.clone(),
                inverses: inverses.clone(),
                square_zero: BTreeSet::new(),
            };
            let (found, explored) = related::single_term_consequences(&bp, bounds);
            cert.explored_states += explored;
            if found.is_empty() {
                let mut bp = bp;
                bp.certificate = cert;
                return Ok(bp);
            }
            new_rels = found;
        }
        let mut rels = monoid.relations.clone();
        for (a, b) in new_rels {
            if monoid.equal(&a, &b, bounds) == Some(true) {
                continue;
            }
            cert.identified.push((a.clone(), b.clone()));
            rels.push((a, b));
        }
        monoid = MonoidPresentation::new(monoid.atoms.clone(), rels, monoid.domain.clone())?;
    }
}

/// `B[T1, ..., Tn]`: fresh atoms, relations carried over.
pub fn free_blueprint(b: &Blueprint, vars: &[String]) -> Result<Blueprint> {
    let mut atoms = b.monoid.atoms.clone();
    for v in vars {
        if atoms.contains(v) {
            return Err(MonoidError::DuplicateAtom(v.clone()).into());
        }
        atoms.push(v.clone());
    }
    let monoid = MonoidPresentation::new(atoms, b.monoid.relations.clone(), b.domain().clone())?;
    Ok(Blueprint {
        monoid,
        generators: b.generators.clone(),
        certificate: b.certificate.clone(),
        localization: None,
        inverses: b.inverses.clone(),
        square_zero: b.square_zero.clone(),
    })
}

/// Parse a blueprint from atom names and textual relations, e.g.
/// `blueprint_from_text(F1, ["a","b","g","h"], ["a*h = b*g", "g + h = 1"])`.
pub fn blueprint_from_text(domain: CoeffDomain, atoms: &[&str], relations: &[&str], bounds: &SearchBounds) -> Result<Blueprint> {
    let monoid = MonoidPresentation::free(atoms.iter().map(|s| s.to_string()).collect(), domain)?;
    let mut rels = Vec::new();
    for r in relations {
        let (l, rhs) = r
            .split_once('=')
            .ok_or_else(|| MonoidError::Parse(r.to_string(), "expected `=`".into()))?;
        rels.push((crate::sum::parse_sum(l, &monoid)?, crate::sum::parse_sum(rhs, &monoid)?));
    }
    make_blueprint(monoid, rels, bounds)
}
