//! Prime ideals, Zariski topology, stalks and induced maps of spectra.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, primes_up_to, Builtin, Coeff, Inversion};
use crate::blueprint::{localize, proper_quotient, Blueprint, BlueprintMorphism, BpRef};
use crate::error::{Error, Result};
use crate::monoid::{Monomial, MonoidPresentation};
use crate::sum::normalize_terms;
use crate::verdict::SearchBounds;


/// The ideal generated by a set of atoms and, over builtin coefficients, a
/// rational prime.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeIdeal {
    pub atoms: BTreeSet<u32>,
    pub characteristic: Option<u64>,
}

impl PrimeIdeal {
    pub fn new(atoms: impl IntoIterator<Item = u32>, characteristic: Option<u64>) -> Self {
        PrimeIdeal { atoms: atoms.into_iter().collect(), characteristic }
    }

    pub fn zero() -> Self {
        PrimeIdeal::default()
    }

    pub fn contains(&self, b: &Blueprint, m: &Monomial) -> bool {
        let Monomial::Term(t) = m else { return true };
        if t.exps.iter().any(|(a, _)| self.atoms.contains(a)) {
            return true;
        }
        match self.characteristic {
            Some(q) if !b.domain().is_f1() => b.domain().core(&t.coeff).is_multiple_of(q as u128),
            _ => false,
        }
    }

    /// `p ⊆ q`, that is `q` lies in the closure of `p`.
    pub fn is_contained_in(&self, other: &PrimeIdeal) -> bool {
        self.atoms.is_subset(&other.atoms)
            && match (self.characteristic, other.characteristic) {
                (None, _) => true,
                (Some(a), Some(b)) => a == b,
                (Some(_), None) => false,
            }
    }

    pub fn show(&self, b: &Blueprint) -> String {
        let mut parts: Vec<String> = self.characteristic.iter().map(|q| q.to_string()).collect();
        parts.extend(self.atoms.iter().map(|a| b.atoms()[*a as usize].clone()));
        if parts.is_empty() {
            "(0)".into()
        } else {
            format!("({})", parts.join(","))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeCheck {
    Prime,
    NotPrime,
    Undecided,
}

/// Check the prime axioms for an atom-generated candidate.
pub fn check_prime(b: &Blueprint, p: &PrimeIdeal) -> PrimeCheck {
    let dom = b.domain();
    if let Some(q) = p.characteristic {
        if dom.is_f1() || !is_prime(q) || dom.is_unit(&Coeff::from_integer(q as i128)) {
            return PrimeCheck::NotPrime;
        }
    } else if let Builtin::IntModN(n) = dom.builtin {
        if !is_prime(n) {
            return PrimeCheck::NotPrime;
        }
    }
    if p.contains(b, &Monomial::one()) {
        return PrimeCheck::NotPrime;
    }
    for (x, y) in &b.monoid.relations {
        if p.contains(b, x) != p.contains(b, y) {
            return PrimeCheck::NotPrime;
        }
    }
    for (l, r) in &b.generators {
        let outside = |s: &crate::sum::FormalSum| -> Vec<Monomial> { s.terms().iter().filter(|m| !p.contains(b, m)).cloned().collect() };
        let (ol, or) = (outside(l), outside(r));
        if (ol.len() == 1 && or.is_empty()) || (or.len() == 1 && ol.is_empty()) {
            return PrimeCheck::NotPrime;
        }
        let ok = match (dom.builtin, p.characteristic) {
            (Builtin::None | Builtin::Nat, None) => ol.is_empty() == or.is_empty(),
            _ => residue(b, p, &ol) == residue(b, p, &or),
        };
        if !ok {
            return PrimeCheck::Undecided;
        }
    }
    if !b.generators.is_empty() && !matches!(dom.builtin, Builtin::None | Builtin::Nat) && !b.monoid.is_complete() {
        return PrimeCheck::Undecided;
    }
    PrimeCheck::Prime
}

/// Image of the outside terms in the residue group algebra.
fn residue(b: &Blueprint, p: &PrimeIdeal, terms: &[Monomial]) -> BTreeMap<Vec<(u32, u32)>, Coeff> {
    let mut out: BTreeMap<Vec<(u32, u32)>, Coeff> = BTreeMap::new();
    let q = p.characteristic.map(|q| q as i128);
    for m in terms {
        let n = b.normalize(m);
        let Monomial::Term(t) = n else { continue };
        let c = match q {
            Some(q) => {
                let num = t.coeff.numer().rem_euclid(q);
                let den = crate::arith::mod_inverse(t.coeff.denom().rem_euclid(q), q).unwrap_or(0);
                Coeff::from_integer((num * den).rem_euclid(q))
            }
            None => t.coeff,
        };
        let e = out.entry(t.exps.clone()).or_insert_with(|| Coeff::from_integer(0));
        *e += c;
        if let Some(q) = q {
            *e = Coeff::from_integer(e.to_integer().rem_euclid(q));
        }
    }
    out.retain(|_, v| *v != Coeff::from_integer(0));
    out
}

/// Infinitely many points `(P, q)` for every rational prime `q` not inverted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicFamily {
    pub atom_parts: Vec<BTreeSet<u32>>,
    pub inverted: Inversion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub points: Vec<PrimeIdeal>,
    pub symbolic: Option<SymbolicFamily>,
    /// False when some candidate could not be decided.
    pub complete: bool,
}

impl Spectrum {
    pub fn is_finite(&self) -> bool {
        self.symbolic.is_none()
    }

    /// Points with characteristic at most `max_q`.
    pub fn materialize(&self, b: &Blueprint, max_q: u64) -> Vec<PrimeIdeal> {
        let mut out = self.points.clone();
        if let Some(fam) = &self.symbolic {
            for q in primes_up_to(max_q) {
                if fam.inverted.contains(q) {
                    continue;
                }
                for part in &fam.atom_parts {
                    let p = PrimeIdeal { atoms: part.clone(), characteristic: Some(q) };
                    if check_prime(b, &p) == PrimeCheck::Prime {
                        out.push(p);
                    }
                }
            }
        }
        out
    }
}

const MAX_ATOMS: usize = 14;

fn atom_subsets(b: &Blueprint) -> Result<Vec<BTreeSet<u32>>> {
    let atoms: Vec<u32> = b.monoid.all_atoms().into_iter().filter(|a| !b.is_unit_atom(*a)).collect();
    if atoms.len() > MAX_ATOMS {
        return Err(Error::Unsupported(format!("{} non-unit atoms exceed the prime enumeration limit", atoms.len())));
    }
    Ok((0u32..1 << atoms.len())
        .map(|mask| atoms.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, a)| *a).collect())
        .collect())
}

/// All prime ideals generated by atoms (and a rational prime over builtin
/// coefficients).
pub fn prime_ideals(b: &Blueprint) -> Result<Spectrum> {
    let dom = b.domain();
    let subsets = atom_subsets(b)?;
    let mut points = Vec::new();
    let mut complete = true;
    let push = |p: PrimeIdeal, points: &mut Vec<PrimeIdeal>, complete: &mut bool| match check_prime(b, &p) {
        PrimeCheck::Prime => points.push(p),
        PrimeCheck::NotPrime => {}
        PrimeCheck::Undecided => *complete = false,
    };
    match dom.builtin {
        Builtin::None => {
            for s in subsets {
                push(PrimeIdeal { atoms: s, characteristic: None }, &mut points, &mut complete);
            }
            points.sort();
            Ok(Spectrum { points, symbolic: None, complete })
        }
        Builtin::IntModN(n) => {
            let qs: Vec<u64> = crate::arith::factorize(n as u128).into_iter().map(|(p, _)| p as u64).collect();
            for s in &subsets {
                push(PrimeIdeal { atoms: s.clone(), characteristic: None }, &mut points, &mut complete);
                for q in &qs {
                    push(PrimeIdeal { atoms: s.clone(), characteristic: Some(*q) }, &mut points, &mut complete);
                }
            }
            points.sort();
            Ok(Spectrum { points, symbolic: None, complete })
        }
        Builtin::Nat | Builtin::Int => {
            let mut parts = Vec::new();
            for s in subsets {
                push(PrimeIdeal { atoms: s.clone(), characteristic: None }, &mut points, &mut complete);
                parts.push(s);
            }
            if matches!(dom.inverted, Inversion::AllExcept(_)) {
                // Stalks: only the listed primes survive.
                let Inversion::AllExcept(keep) = &dom.inverted else { unreachable!() };
                let mut finite = points;
                for q in keep {
                    for s in &parts {
                        push(PrimeIdeal { atoms: s.clone(), characteristic: Some(*q) }, &mut finite, &mut complete);
                    }
                }
                finite.sort();
                return Ok(Spectrum { points: finite, symbolic: None, complete });
            }
            points.sort();
            Ok(Spectrum {
                points,
                symbolic: Some(SymbolicFamily { atom_parts: parts, inverted: dom.inverted.clone() }),
                complete: complete && b.generators.is_empty(),
            })
        }
    }
}

/// The basic open `U_h` restricted to the given points.
pub fn basic_open(b: &Blueprint, points: &[PrimeIdeal], h: &Monomial) -> Vec<PrimeIdeal> {
    let h = b.normalize(h);
    points.iter().filter(|p| !p.contains(b, &h)).cloned().collect()
}

/// `{z : x ∈ closure(z)}`.
pub fn minimal_open(spec: &Spectrum, x: &PrimeIdeal) -> Result<Vec<PrimeIdeal>> {
    if !spec.is_finite() {
        return Err(Error::NotLocallyFinite);
    }
    Ok(spec.points.iter().filter(|z| z.is_contained_in(x)).cloned().collect())
}

/// Points maximal for inclusion.
pub fn closed_points(spec: &Spectrum) -> Vec<PrimeIdeal> {
    spec.points
        .iter()
        .filter(|p| !spec.points.iter().any(|q| q != *p && p.is_contained_in(q)))
        .cloned()
        .collect()
}

/// A monomial `h` with `U_h` equal to the minimal open of `x`, if one exists.
pub fn minimal_open_generator(b: &Blueprint, spec: &Spectrum, x: &PrimeIdeal) -> Result<Monomial> {
    let target = minimal_open(spec, x)?;
    let mut h = Monomial::one();
    for a in b.monoid.all_atoms() {
        if !x.atoms.contains(&a) && !b.is_unit_atom(a) {
            h = h.mul_raw(&Monomial::atom(a), b.domain());
        }
    }
    let h = b.normalize(&h);
    if basic_open(b, &spec.points, &h) == target {
        Ok(h)
    } else {
        Err(Error::CanonicalCoverUnavailable(format!("minimal open of {} is not basic", x.show(b))))
    }
}

/// Specialization pairs `(p, q)` with `p ⊊ q`.
pub fn specializations(spec: &Spectrum) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, p) in spec.points.iter().enumerate() {
        for (j, q) in spec.points.iter().enumerate() {
            if i != j && p.is_contained_in(q) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Rebuild a blueprint over a different coefficient inversion.
fn with_inversion(b: &Blueprint, inv: Inversion, bounds: &SearchBounds) -> Result<Blueprint> {
    let dom = b.domain().with_inversion(inv);
    let retag = |m: &Monomial| match m {
        Monomial::Term(t) => match dom.normalize(t.coeff) {
            Some(c) => m.with_coeff(c),
            None => Monomial::Zero,
        },
        Monomial::Zero => Monomial::Zero,
    };
    let rels = b.monoid.relations.iter().map(|(x, y)| (retag(x), retag(y))).collect();
    let monoid = MonoidPresentation::new(b.atoms().to_vec(), rels, dom.clone())?;
    let gens = b
        .generators
        .iter()
        .map(|(l, r)| {
            (
                normalize_terms(&monoid, l.terms().iter().map(retag).collect()),
                normalize_terms(&monoid, r.terms().iter().map(retag).collect()),
            )
        })
        .collect();
    proper_quotient(monoid, gens, b.inverses.clone(), None, bounds)
}

/// The stalk at `p`: invert every atom outside `p` and, over builtin
/// coefficients, every rational prime other than its characteristic.
pub fn stalk(b: &BpRef, p: &PrimeIdeal, bounds: &SearchBounds) -> Result<BpRef> {
    let outside: Vec<Monomial> = b
        .monoid
        .all_atoms()
        .into_iter()
        .filter(|a| !p.atoms.contains(a) && !b.is_unit_atom(*a))
        .map(Monomial::atom)
        .collect();
    let (loc, _) = localize(b, &outside, bounds)?;
    match b.domain().builtin {
        Builtin::Nat | Builtin::Int => {
            let keep: BTreeSet<u64> = p.characteristic.into_iter().collect();
            Ok(Arc::new(with_inversion(&loc, Inversion::AllExcept(keep), bounds)?))
        }
        Builtin::IntModN(n) => {
            let others: Vec<Monomial> = crate::arith::factorize(n as u128)
                .into_iter()
                .map(|(q, _)| q as u64)
                .filter(|q| Some(*q) != p.characteristic)
                .map(|q| Monomial::scalar(Coeff::from_integer(q as i128)))
                .collect();
            Ok(localize(&loc, &others, bounds)?.0)
        }
        Builtin::None => Ok(loc),
    }
}

/// The map `Spec C -> Spec B` induced by `f: B -> C` on the given points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecMorphism {
    pub pairs: Vec<(PrimeIdeal, PrimeIdeal)>,
    pub injective: bool,
    /// Preimages of basic opens `U_a` for source atoms are the opens `U_f(a)`.
    pub continuous: bool,
}

pub fn pull_back(f: &BlueprintMorphism, q: &PrimeIdeal) -> PrimeIdeal {
    let atoms = (0..f.source.atoms().len() as u32).filter(|a| q.contains(&f.target, &f.images[*a as usize])).collect();
    let characteristic = if f.source.domain().is_f1() { None } else { q.characteristic };
    PrimeIdeal { atoms, characteristic }
}

pub fn spec_morphism(f: &BlueprintMorphism, target_points: &[PrimeIdeal]) -> SpecMorphism {
    let pairs: Vec<(PrimeIdeal, PrimeIdeal)> = target_points.iter().map(|q| (q.clone(), pull_back(f, q))).collect();
    let images: BTreeSet<&PrimeIdeal> = pairs.iter().map(|(_, p)| p).collect();
    let injective = images.len() == pairs.len();
    let continuous = (0..f.source.atoms().len() as u32).all(|a| {
        let pre: Vec<&PrimeIdeal> = pairs.iter().filter(|(_, p)| !p.atoms.contains(&a)).map(|(q, _)| q).collect();
        let open = basic_open(&f.target, target_points, &f.images[a as usize]);
        pre.len() == open.len() && pre.iter().all(|q| open.contains(q))
    });
    SpecMorphism { pairs, injective, continuous }
}

#[cfg(test)]
mod tests;
