//! Finite formal sums of monoid elements.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::Coeff;
use crate::monoid::{Exps, Monomial, MonoidPresentation, Term};

/// A multiset of nonzero monomials, kept sorted. For builtin coefficient
/// domains like terms are collected.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FormalSum(pub Vec<Monomial>);

impl FormalSum {
    pub fn empty() -> Self {
        FormalSum(vec![])
    }

    pub fn single(m: Monomial) -> Self {
        FormalSum(vec![m])
    }

    pub fn new(terms: Vec<Monomial>) -> Self {
        FormalSum(terms)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.0
    }

    pub fn max_degree(&self) -> u32 {
        self.0.iter().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn normalize(&self, p: &MonoidPresentation) -> FormalSum {
        normalize_terms(p, self.0.iter().map(|m| p.normalize(m)).collect())
    }

    pub fn scale(&self, c: &Monomial, p: &MonoidPresentation) -> FormalSum {
        normalize_terms(p, self.0.iter().map(|m| p.mul(c, m)).collect())
    }

    pub fn plus(&self, other: &FormalSum, p: &MonoidPresentation) -> FormalSum {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        normalize_terms(p, v)
    }

    pub fn show(&self, p: &MonoidPresentation) -> String {
        show_sum(&p.atoms, self)
    }
}

pub fn show_sum(atoms: &[String], s: &FormalSum) -> String {
    if s.0.is_empty() {
        return "0".to_string();
    }
    s.0.iter().map(|m| crate::monoid::show_monomial(atoms, m)).collect::<Vec<_>>().join(" + ")
}

/// Sort, drop zeros, and collect like terms when coefficients can be added.
pub fn normalize_terms(p: &MonoidPresentation, terms: Vec<Monomial>) -> FormalSum {
    let dom = &p.domain;
    let mut terms: Vec<Monomial> = terms.into_iter().filter(|m| !m.is_zero()).collect();
    if !dom.is_f1() {
        let mut acc: BTreeMap<Exps, Coeff> = BTreeMap::new();
        let mut zeroed: Vec<Exps> = Vec::new();
        for m in terms {
            if let Monomial::Term(t) = m {
                match acc.remove(&t.exps) {
                    None => {
                        acc.insert(t.exps, t.coeff);
                    }
                    Some(c) => match dom.add(&c, &t.coeff) {
                        Some(s) => {
                            acc.insert(t.exps, s);
                        }
                        None => zeroed.push(t.exps),
                    },
                }
            }
        }
        terms = acc.into_iter().map(|(exps, coeff)| Monomial::Term(Term { coeff, exps })).collect();
    }
    terms.sort();
    FormalSum(terms)
}

pub fn parse_sum(s: &str, p: &MonoidPresentation) -> Result<FormalSum, crate::monoid::MonoidError> {
    let s = s.trim();
    if s.is_empty() || s == "0" {
        return Ok(FormalSum::empty());
    }
    let mut terms = Vec::new();
    for part in s.split('+') {
        terms.push(p.parse(part)?);
    }
    Ok(normalize_terms(p, terms.iter().map(|m| p.normalize(m)).collect()))
}
