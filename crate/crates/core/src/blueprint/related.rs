//! The pre-addition congruence: bounded saturation plus separating invariants.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::invariants::{evaluation_separation, grading_separation, Separation};
use super::Blueprint;
use crate::arith::{Builtin, Coeff};
use crate::monoid::{bidirectional, divide_term, Exps, Monomial, Term};
use crate::sum::{normalize_terms, FormalSum};
use crate::verdict::{Exhausted, SearchBounds, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Derivation {
    /// Successive sums, each obtained from the previous one by one move.
    pub chain: Vec<FormalSum>,
}

/// Decide `s ≡ t` in the pre-addition of `b`.
pub fn related(b: &Blueprint, s: &FormalSum, t: &FormalSum, bounds: &SearchBounds) -> Verdict<Derivation, Separation> {
    let s = s.normalize(&b.monoid);
    let t = t.normalize(&b.monoid);
    if s == t {
        return Verdict::Proved(Derivation { chain: vec![s] });
    }
    if b.generators.is_empty() && b.monoid.is_complete() {
        return Verdict::Refuted(Separation::FreePreaddition { left: s, right: t });
    }
    if let Some(sep) = grading_separation(b, &s, &t) {
        return Verdict::Refuted(sep);
    }
    if let Some(sep) = evaluation_separation(b, &s, &t) {
        return Verdict::Refuted(sep);
    }
    let cap = bounds.max_steps;
    match bidirectional(s.clone(), t.clone(), cap, |st| moves(b, st, bounds)) {
        Some(path) => {
            let mut chain = vec![s];
            chain.extend(path);
            Verdict::Proved(Derivation { chain })
        }
        None => Verdict::Unknown(Exhausted::new(
            "max_steps",
            format!("no derivation within {cap} sums and no separating invariant"),
        )),
    }
}

/// Check that consecutive sums of a derivation differ by a single move.
pub fn replay_derivation(b: &Blueprint, d: &Derivation, bounds: &SearchBounds) -> bool {
    d.chain.windows(2).all(|w| {
        let next = w[1].normalize(&b.monoid);
        moves(b, &w[0], bounds).contains(&next) || moves(b, &next, bounds).contains(&w[0])
    })
}

fn representatives(b: &Blueprint, t: &Term) -> Vec<Term> {
    let mut out = vec![t.clone()];
    let sys = b.monoid.rewrite_system();
    for r in &sys.rules {
        if let Some(Monomial::Term(q)) = divide_term(b.domain(), t, &r.rhs) {
            if let Monomial::Term(x) = Monomial::Term(q).mul_raw(&Monomial::Term(r.lhs.clone()), b.domain()) {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        if out.len() > 8 {
            break;
        }
    }
    out
}

/// All sums reachable from `s` by replacing `c·l` with `c·r` for a generator.
pub(crate) fn moves(b: &Blueprint, s: &FormalSum, bounds: &SearchBounds) -> Vec<FormalSum> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let dom = b.domain();
    for (l, r) in &b.generators {
        for (from, to) in [(l, r), (r, l)] {
            for anchor in from.terms() {
                for st in s.terms() {
                    let Monomial::Term(stt) = st else { continue };
                    for rep in representatives(b, stt) {
                        let Some(c) = divide_term(dom, &rep, anchor) else { continue };
                        let mut cands = vec![c.clone()];
                        if !dom.is_f1() {
                            let c1 = c.with_coeff(Coeff::from_integer(1));
                            if c1 != c {
                                cands.push(c1);
                            }
                        }
                        for c in cands {
                            if let Some(n) = apply_move(b, s, &c, from, to) {
                                if n.len() <= bounds.max_sum_length
                                    && n.max_degree() <= bounds.max_degree
                                    && &n != s
                                    && seen.insert(n.clone())
                                {
                                    out.push(n);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn apply_move(b: &Blueprint, s: &FormalSum, c: &Monomial, from: &FormalSum, to: &FormalSum) -> Option<FormalSum> {
    let p = &b.monoid;
    let dom = b.domain();
    let consumed: Vec<Monomial> = from.terms().iter().map(|m| p.mul(c, m)).filter(|m| !m.is_zero()).collect();
    if consumed.is_empty() {
        return None;
    }
    let added: Vec<Monomial> = to.terms().iter().map(|m| p.mul(c, m)).collect();
    if dom.is_f1() {
        let mut rest = s.0.clone();
        for x in &consumed {
            let i = rest.iter().position(|y| y == x)?;
            rest.remove(i);
        }
        rest.extend(added);
        return Some(normalize_terms(p, rest));
    }
    let mut acc: BTreeMap<Exps, Coeff> = BTreeMap::new();
    for m in s.terms() {
        if let Monomial::Term(t) = m {
            acc.insert(t.exps.clone(), t.coeff);
        }
    }
    for x in &consumed {
        let Monomial::Term(xt) = x else { continue };
        let cur = acc.get(&xt.exps).copied();
        match dom.builtin {
            Builtin::Nat => {
                let cur = cur?;
                if cur < xt.coeff {
                    return None;
                }
                let rem = cur - xt.coeff;
                if rem == Coeff::from_integer(0) {
                    acc.remove(&xt.exps);
                } else {
                    acc.insert(xt.exps.clone(), rem);
                }
            }
            _ => {
                let cur = cur.unwrap_or(Coeff::from_integer(0));
                match dom.normalize(cur - xt.coeff) {
                    None => {
                        acc.remove(&xt.exps);
                    }
                    Some(v) => {
                        acc.insert(xt.exps.clone(), v);
                    }
                }
            }
        }
    }
    let mut terms: Vec<Monomial> = acc.into_iter().map(|(exps, coeff)| Monomial::Term(Term { coeff, exps })).collect();
    terms.extend(added);
    Some(normalize_terms(p, terms))
}

/// Explore the classes of the generator sides (and their multiples by atoms)
/// and report distinct single-term members of a common class.
pub(crate) fn single_term_consequences(b: &Blueprint, bounds: &SearchBounds) -> (Vec<(Monomial, Monomial)>, usize) {
    let p = &b.monoid;
    let mut multipliers = vec![Monomial::one()];
    // a unit multiple of a class is the bijective image of the class itself
    for m in p.all_atoms().into_iter().filter(|i| !b.is_unit_atom(*i)).map(|i| p.normalize(&Monomial::atom(i))) {
        if !multipliers.contains(&m) {
            multipliers.push(m);
        }
    }
    let cap = bounds.max_steps.min(300);
    let mut found = Vec::new();
    let mut explored = 0;
    // states of classes that were explored without hitting the cap
    let mut closed: HashSet<FormalSum> = HashSet::new();
    for (l, r) in &b.generators {
        for c in &multipliers {
            let a = l.scale(c, p);
            let z = r.scale(c, p);
            if closed.contains(&a) && closed.contains(&z) {
                continue;
            }
            let mut seen: HashSet<FormalSum> = HashSet::new();
            let mut queue = VecDeque::new();
            for st in [a, z] {
                if seen.insert(st.clone()) {
                    queue.push_back(st);
                }
            }
            let mut complete = true;
            while let Some(st) = queue.pop_front() {
                if seen.len() > cap {
                    complete = false;
                    break;
                }
                for n in moves(b, &st, bounds) {
                    if seen.insert(n.clone()) {
                        queue.push_back(n);
                    }
                }
            }
            explored += seen.len();
            let mut singles: Vec<Monomial> = seen
                .iter()
                .filter(|st| st.len() <= 1)
                .map(|st| st.terms().first().cloned().unwrap_or(Monomial::Zero))
                .collect();
            singles.sort();
            singles.dedup();
            for w in singles.windows(2) {
                found.push((w[1].clone(), w[0].clone()));
            }
            if complete {
                closed.extend(seen);
            }
        }
    }
    (found, explored)
}
