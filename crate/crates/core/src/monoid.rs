//! Commutative monoids with zero, given by generators and relations.
//!
//! Equality is decided by completing the relations into a rewriting system
//! over a degree-lexicographic order (ties broken by the coefficient core).
//! When completion does not finish within the rule budget, a bidirectional
//! search over relation applications takes over.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{coeff_to_string, Builtin, Coeff, CoeffDomain};
use crate::verdict::{Exhausted, SearchBounds, Verdict};

pub type Exps = Vec<(u32, u32)>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "crate::arith::coeff_text")]
    pub coeff: Coeff,
    pub exps: Exps,
}

/// A monoid element: zero or a coefficient times a product of atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Monomial {
    Zero,
    Term(Term),
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::Term(Term { coeff: Coeff::one(), exps: vec![] })
    }

    pub fn atom(i: u32) -> Self {
        Monomial::Term(Term { coeff: Coeff::one(), exps: vec![(i, 1)] })
    }

    pub fn from_exps(exps: Exps) -> Self {
        let mut e: Exps = exps.into_iter().filter(|(_, k)| *k > 0).collect();
        e.sort();
        let mut merged: Exps = Vec::with_capacity(e.len());
        for (a, k) in e {
            match merged.last_mut() {
                Some((b, m)) if *b == a => *m += k,
                _ => merged.push((a, k)),
            }
        }
        Monomial::Term(Term { coeff: Coeff::one(), exps: merged })
    }

    pub fn scalar(c: Coeff) -> Self {
        Monomial::Term(Term { coeff: c, exps: vec![] })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Monomial::Zero)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Monomial::Term(t) if t.exps.is_empty() && t.coeff.is_one())
    }

    pub fn term(&self) -> Option<&Term> {
        match self {
            Monomial::Zero => None,
            Monomial::Term(t) => Some(t),
        }
    }

    pub fn exps(&self) -> &[(u32, u32)] {
        match self {
            Monomial::Zero => &[],
            Monomial::Term(t) => &t.exps,
        }
    }

    pub fn coeff(&self) -> Option<&Coeff> {
        self.term().map(|t| &t.coeff)
    }

    pub fn degree(&self) -> u32 {
        self.exps().iter().map(|(_, k)| *k).sum()
    }

    pub fn exponent(&self, atom: u32) -> u32 {
        self.exps().iter().find(|(a, _)| *a == atom).map_or(0, |(_, k)| *k)
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.exps().iter().map(|(a, _)| *a)
    }

    /// Multiply without reducing modulo relations.
    pub fn mul_raw(&self, other: &Monomial, dom: &CoeffDomain) -> Monomial {
        match (self, other) {
            (Monomial::Term(a), Monomial::Term(b)) => match dom.mul(&a.coeff, &b.coeff) {
                None => Monomial::Zero,
                Some(c) => Monomial::Term(Term { coeff: c, exps: exps_mul(&a.exps, &b.exps) }),
            },
            _ => Monomial::Zero,
        }
    }

    pub fn pow_raw(&self, k: u32, dom: &CoeffDomain) -> Monomial {
        let mut acc = Monomial::one();
        for _ in 0..k {
            acc = acc.mul_raw(self, dom);
        }
        acc
    }

    /// Rename atoms through `map` (old index to new index).
    pub fn reindex(&self, map: &dyn Fn(u32) -> u32) -> Monomial {
        match self {
            Monomial::Zero => Monomial::Zero,
            Monomial::Term(t) => {
                let m = Monomial::from_exps(t.exps.iter().map(|(a, k)| (map(*a), *k)).collect());
                match m {
                    Monomial::Term(mut u) => {
                        u.coeff = t.coeff;
                        Monomial::Term(u)
                    }
                    z => z,
                }
            }
        }
    }

    pub fn with_coeff(&self, c: Coeff) -> Monomial {
        match self {
            Monomial::Zero => Monomial::Zero,
            Monomial::Term(t) => Monomial::Term(Term { coeff: c, exps: t.exps.clone() }),
        }
    }
}

pub fn exps_mul(a: &[(u32, u32)], b: &[(u32, u32)]) -> Exps {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 + b[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

/// `a / b` when `b` divides `a`.
pub fn exps_div(a: &[(u32, u32)], b: &[(u32, u32)]) -> Option<Exps> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &(x, k) in a {
        if j < b.len() && b[j].0 < x {
            return None;
        }
        if j < b.len() && b[j].0 == x {
            if b[j].1 > k {
                return None;
            }
            if k > b[j].1 {
                out.push((x, k - b[j].1));
            }
            j += 1;
        } else {
            out.push((x, k));
        }
    }
    if j < b.len() {
        return None;
    }
    Some(out)
}

pub fn exps_lcm(a: &[(u32, u32)], b: &[(u32, u32)]) -> Exps {
    let mut m: BTreeMap<u32, u32> = BTreeMap::new();
    for &(x, k) in a.iter().chain(b.iter()) {
        let e = m.entry(x).or_insert(0);
        *e = (*e).max(k);
    }
    m.into_iter().collect()
}

fn exps_disjoint(a: &[(u32, u32)], b: &[(u32, u32)]) -> bool {
    a.iter().all(|(x, _)| b.iter().all(|(y, _)| x != y))
}

fn exps_degree(a: &[(u32, u32)]) -> u32 {
    a.iter().map(|(_, k)| *k).sum()
}

/// Degree first, then lexicographic with the highest atom index most
/// significant.
fn cmp_exps(a: &[(u32, u32)], b: &[(u32, u32)]) -> Ordering {
    let d = exps_degree(a).cmp(&exps_degree(b));
    if d != Ordering::Equal {
        return d;
    }
    let (mut i, mut j) = (a.len(), b.len());
    while i > 0 && j > 0 {
        let (x, k) = a[i - 1];
        let (y, m) = b[j - 1];
        if x != y {
            return x.cmp(&y);
        }
        if k != m {
            return k.cmp(&m);
        }
        i -= 1;
        j -= 1;
    }
    (i > 0).cmp(&(j > 0))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    /// Left side, with its coefficient equal to its core.
    pub lhs: Term,
    pub rhs: Monomial,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RewriteSystem {
    pub rules: Vec<Rule>,
    /// True when the rules are confluent, so normal forms are canonical.
    pub complete: bool,
    /// Relations that could not be oriented.
    pub equations: Vec<(Monomial, Monomial)>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MonoidError {
    #[error("undeclared atom `{0}`")]
    UndeclaredAtom(String),
    #[error("atom index {0} out of range")]
    AtomOutOfRange(u32),
    #[error("duplicate atom `{0}`")]
    DuplicateAtom(String),
    #[error("coefficient {0} is not in {1}")]
    BadCoefficient(String, String),
    #[error("cannot parse `{0}`: {1}")]
    Parse(String, String),
}

/// Generators, relations and a coefficient domain.
#[derive(Clone, Debug, Default)]
pub struct MonoidPresentation {
    pub atoms: Vec<String>,
    pub relations: Vec<(Monomial, Monomial)>,
    pub domain: CoeffDomain,
    cache: OnceLock<Arc<RewriteSystem>>,
}

impl PartialEq for MonoidPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.relations == other.relations && self.domain == other.domain
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqProof {
    pub normal_form: Monomial,
    pub left_chain: Vec<Monomial>,
    pub right_chain: Vec<Monomial>,
    pub by_search: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqRefutation {
    pub left_normal_form: Monomial,
    pub right_normal_form: Monomial,
}

impl MonoidPresentation {
    pub fn new(
        atoms: Vec<String>,
        relations: Vec<(Monomial, Monomial)>,
        domain: CoeffDomain,
    ) -> Result<Self, MonoidError> {
        let mut seen = std::collections::HashSet::new();
        for a in &atoms {
            if !seen.insert(a.as_str()) {
                return Err(MonoidError::DuplicateAtom(a.clone()));
            }
        }
        let p = MonoidPresentation { atoms, relations: vec![], domain, cache: OnceLock::new() };
        let mut rels = Vec::with_capacity(relations.len());
        for (a, b) in relations {
            rels.push((p.check(&a)?, p.check(&b)?));
        }
        Ok(MonoidPresentation { relations: rels, ..p })
    }

    pub fn free(atoms: Vec<String>, domain: CoeffDomain) -> Result<Self, MonoidError> {
        Self::new(atoms, vec![], domain)
    }

    pub fn atom_index(&self, name: &str) -> Option<u32> {
        self.atoms.iter().position(|a| a == name).map(|i| i as u32)
    }

    pub fn atom(&self, name: &str) -> Result<Monomial, MonoidError> {
        self.atom_index(name).map(Monomial::atom).ok_or_else(|| MonoidError::UndeclaredAtom(name.into()))
    }

    /// Validate atom indices and bring the coefficient into canonical form.
    pub fn check(&self, m: &Monomial) -> Result<Monomial, MonoidError> {
        match m {
            Monomial::Zero => Ok(Monomial::Zero),
            Monomial::Term(t) => {
                for (a, _) in &t.exps {
                    if *a as usize >= self.atoms.len() {
                        return Err(MonoidError::AtomOutOfRange(*a));
                    }
                }
                let c = if self.domain.builtin == Builtin::None { Coeff::one() } else { t.coeff };
                match self.domain.normalize(c) {
                    None => Ok(Monomial::Zero),
                    Some(c) => {
                        if !self.domain.contains(&c) {
                            return Err(MonoidError::BadCoefficient(coeff_to_string(&c), self.domain.describe()));
                        }
                        Ok(Monomial::Term(Term { coeff: c, exps: t.exps.clone() }))
                    }
                }
            }
        }
    }

    pub fn mul(&self, a: &Monomial, b: &Monomial) -> Monomial {
        self.normalize(&a.mul_raw(b, &self.domain))
    }

    pub fn product<'a>(&self, items: impl IntoIterator<Item = &'a Monomial>) -> Monomial {
        let mut acc = Monomial::one();
        for m in items {
            acc = acc.mul_raw(m, &self.domain);
        }
        self.normalize(&acc)
    }

    pub fn rewrite_system(&self) -> Arc<RewriteSystem> {
        self.cache.get_or_init(|| Arc::new(complete(self, SearchBounds::default().max_rules))).clone()
    }

    pub fn is_complete(&self) -> bool {
        self.rewrite_system().complete
    }

    pub fn normalize(&self, m: &Monomial) -> Monomial {
        let sys = self.rewrite_system();
        let m = match self.check(m) {
            Ok(m) => m,
            Err(_) => return m.clone(),
        };
        normal_form(&self.domain, &sys.rules, m, None)
    }

    fn normalize_traced(&self, m: &Monomial) -> (Monomial, Vec<Monomial>) {
        let sys = self.rewrite_system();
        let mut chain = Vec::new();
        let m = self.check(m).unwrap_or_else(|_| m.clone());
        let nf = normal_form(&self.domain, &sys.rules, m, Some(&mut chain));
        (nf, chain)
    }

    /// Decide `a = b` in the monoid.
    pub fn eq(&self, a: &Monomial, b: &Monomial, bounds: &SearchBounds) -> Result<Verdict<EqProof, EqRefutation>, MonoidError> {
        let a = self.check(a)?;
        let b = self.check(b)?;
        let (na, ca) = self.normalize_traced(&a);
        let (nb, cb) = self.normalize_traced(&b);
        if na == nb {
            return Ok(Verdict::Proved(EqProof { normal_form: na, left_chain: ca, right_chain: cb, by_search: false }));
        }
        let sys = self.rewrite_system();
        if sys.complete {
            return Ok(Verdict::Refuted(EqRefutation { left_normal_form: na, right_normal_form: nb }));
        }
        match self.search_eq(&na, &nb, bounds) {
            Some(path) => Ok(Verdict::Proved(EqProof {
                normal_form: nb.clone(),
                left_chain: ca.into_iter().chain(path).collect(),
                right_chain: cb,
                by_search: true,
            })),
            None => Ok(Verdict::Unknown(Exhausted::new(
                "max_steps",
                format!("rewriting incomplete and no connecting chain within {} states", bounds.max_steps),
            ))),
        }
    }

    /// Shorthand returning `Some(bool)` for decided equalities.
    pub fn equal(&self, a: &Monomial, b: &Monomial, bounds: &SearchBounds) -> Option<bool> {
        match self.eq(a, b, bounds) {
            Ok(Verdict::Proved(_)) => Some(true),
            Ok(Verdict::Refuted(_)) => Some(false),
            _ => None,
        }
    }

    fn all_equations(&self) -> Vec<(Monomial, Monomial)> {
        let sys = self.rewrite_system();
        let mut eqs: Vec<(Monomial, Monomial)> = self.relations.clone();
        eqs.extend(sys.rules.iter().map(|r| (Monomial::Term(r.lhs.clone()), r.rhs.clone())));
        eqs.extend(sys.equations.iter().cloned());
        let mut both = Vec::with_capacity(eqs.len() * 2);
        for (l, r) in eqs {
            both.push((l.clone(), r.clone()));
            both.push((r, l));
        }
        both
    }

    fn search_eq(&self, a: &Monomial, b: &Monomial, bounds: &SearchBounds) -> Option<Vec<Monomial>> {
        let eqs = self.all_equations();
        let neighbours = |t: &Monomial| -> Vec<Monomial> {
            let mut out = Vec::new();
            let Monomial::Term(tt) = t else { return out };
            for (l, r) in &eqs {
                if let Some(q) = divide_term(&self.domain, tt, l) {
                    let n = self.normalize(&q.mul_raw(r, &self.domain));
                    if n.degree() <= bounds.max_degree {
                        out.push(n);
                    }
                }
            }
            out
        };
        bidirectional(a.clone(), b.clone(), bounds.max_steps, neighbours)
    }

    /// Normal-form monomials over the given atoms up to a total degree.
    pub fn enumerate(&self, atoms: &[u32], max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut cur = vec![0u32; atoms.len()];
        fn rec(
            p: &MonoidPresentation,
            atoms: &[u32],
            i: usize,
            left: u32,
            cur: &mut Vec<u32>,
            out: &mut Vec<Monomial>,
            seen: &mut std::collections::HashSet<Monomial>,
        ) {
            if i == atoms.len() {
                let m = Monomial::from_exps(atoms.iter().zip(cur.iter()).map(|(a, k)| (*a, *k)).collect());
                let n = p.normalize(&m);
                if seen.insert(n.clone()) {
                    out.push(n);
                }
                return;
            }
            for k in 0..=left {
                cur[i] = k;
                rec(p, atoms, i + 1, left - k, cur, out, seen);
            }
            cur[i] = 0;
        }
        rec(self, atoms, 0, max_degree, &mut cur, &mut out, &mut seen);
        out.sort_by(|x, y| x.degree().cmp(&y.degree()).then_with(|| x.cmp(y)));
        out
    }

    pub fn all_atoms(&self) -> Vec<u32> {
        (0..self.atoms.len() as u32).collect()
    }

    pub fn show(&self, m: &Monomial) -> String {
        show_monomial(&self.atoms, m)
    }

    pub fn parse(&self, s: &str) -> Result<Monomial, MonoidError> {
        let m = parse_monomial(s, &|name| self.atom_index(name))?;
        self.check(&m)
    }
}

pub fn show_monomial(atoms: &[String], m: &Monomial) -> String {
    match m {
        Monomial::Zero => "0".to_string(),
        Monomial::Term(t) => {
            let mut parts = Vec::new();
            if !t.coeff.is_one() || t.exps.is_empty() {
                let c = coeff_to_string(&t.coeff);
                parts.push(if c.contains('/') || c.starts_with('-') { format!("({c})") } else { c });
            }
            for (a, k) in &t.exps {
                let name = atoms.get(*a as usize).cloned().unwrap_or_else(|| format!("#{a}"));
                if *k == 1 {
                    parts.push(name);
                } else {
                    parts.push(format!("{name}^{k}"));
                }
            }
            parts.join("*")
        }
    }
}

/// Parse `2*a*h^2`, `(1/6)*x`, `1` or `0`.
pub fn parse_monomial(s: &str, lookup: &dyn Fn(&str) -> Option<u32>) -> Result<Monomial, MonoidError> {
    let err = |m: &str| MonoidError::Parse(s.to_string(), m.to_string());
    let s = s.trim();
    if s == "0" {
        return Ok(Monomial::Zero);
    }
    let mut coeff = Coeff::one();
    let mut exps = Vec::new();
    for factor in s.split('*') {
        let f = factor.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if f.is_empty() {
            return Err(err("empty factor"));
        }
        let first = f.chars().next().unwrap();
        if first.is_ascii_digit() || first == '-' {
            let c = if let Some((n, d)) = f.split_once('/') {
                let n: i128 = n.trim().parse().map_err(|_| err("bad numerator"))?;
                let d: i128 = d.trim().parse().map_err(|_| err("bad denominator"))?;
                if d == 0 {
                    return Err(err("zero denominator"));
                }
                Coeff::new(n, d)
            } else {
                Coeff::from_integer(f.parse().map_err(|_| err("bad integer"))?)
            };
            coeff *= c;
        } else {
            let (name, k) = match f.split_once('^') {
                Some((n, k)) => (n.trim(), k.trim().parse::<u32>().map_err(|_| err("bad exponent"))?),
                None => (f, 1),
            };
            let i = lookup(name).ok_or_else(|| MonoidError::UndeclaredAtom(name.to_string()))?;
            exps.push((i, k));
        }
    }
    if coeff == Coeff::from_integer(0) {
        return Ok(Monomial::Zero);
    }
    match Monomial::from_exps(exps) {
        Monomial::Term(mut t) => {
            t.coeff = coeff;
            Ok(Monomial::Term(t))
        }
        z => Ok(z),
    }
}

/// `t = q * l` for some monomial `q`, computed on the given representatives.
pub fn divide_term(dom: &CoeffDomain, t: &Term, l: &Monomial) -> Option<Monomial> {
    let Monomial::Term(lt) = l else { return None };
    let e = exps_div(&t.exps, &lt.exps)?;
    let c = dom.divide(&t.coeff, &lt.coeff)?;
    Some(Monomial::Term(Term { coeff: c, exps: e }))
}

fn core_divides(dom: &CoeffDomain, d: u128, n: u128) -> bool {
    match dom.builtin {
        Builtin::None => true,
        _ => n.is_multiple_of(d),
    }
}

fn apply_rule(dom: &CoeffDomain, rule: &Rule, t: &Term) -> Option<Monomial> {
    let e = exps_div(&t.exps, &rule.lhs.exps)?;
    if !dom.is_f1() {
        let ct = dom.core(&t.coeff);
        let cl = dom.core(&rule.lhs.coeff);
        if !core_divides(dom, cl, ct) {
            return None;
        }
    }
    let q = dom.divide(&t.coeff, &rule.lhs.coeff)?;
    let qm = Monomial::Term(Term { coeff: q, exps: e });
    Some(qm.mul_raw(&rule.rhs, dom))
}

fn normal_form(dom: &CoeffDomain, rules: &[Rule], mut m: Monomial, mut chain: Option<&mut Vec<Monomial>>) -> Monomial {
    let mut steps = 0usize;
    'outer: loop {
        let Monomial::Term(t) = &m else { return m };
        if steps > 100_000 {
            return m;
        }
        for r in rules {
            if let Some(n) = apply_rule(dom, r, t) {
                if let Some(c) = chain.as_deref_mut() {
                    c.push(n.clone());
                }
                m = n;
                steps += 1;
                continue 'outer;
            }
        }
        return m;
    }
}

fn key_cmp(dom: &CoeffDomain, a: &Term, b: &Term) -> Ordering {
    cmp_exps(&a.exps, &b.exps).then_with(|| dom.core(&a.coeff).cmp(&dom.core(&b.coeff)))
}

fn orient(dom: &CoeffDomain, a: Monomial, b: Monomial) -> Option<Rule> {
    let (big, small) = match (&a, &b) {
        (Monomial::Zero, Monomial::Zero) => return None,
        (Monomial::Term(_), Monomial::Zero) => (a, b),
        (Monomial::Zero, Monomial::Term(_)) => (b, a),
        (Monomial::Term(x), Monomial::Term(y)) => match key_cmp(dom, x, y) {
            Ordering::Greater => (a, b),
            Ordering::Less => (b, a),
            Ordering::Equal => return None,
        },
    };
    let Monomial::Term(bt) = big else { unreachable!() };
    let (unit, core) = dom.decompose(&bt.coeff);
    let inv = dom.inverse(&unit)?;
    let lhs = Term { coeff: Coeff::from_integer(core as i128), exps: bt.exps };
    let rhs = small.mul_raw(&Monomial::scalar(inv), dom);
    Some(Rule { lhs, rhs })
}

fn critical_pair(dom: &CoeffDomain, r1: &Rule, r2: &Rule) -> Option<(Monomial, Monomial)> {
    let c1 = dom.core(&r1.lhs.coeff);
    let c2 = dom.core(&r2.lhs.coeff);
    if exps_disjoint(&r1.lhs.exps, &r2.lhs.exps) && c1.gcd(&c2) == 1 {
        return None;
    }
    let l = c1.lcm(&c2);
    let lc = dom.normalize(Coeff::from_integer(l as i128))?;
    let lt = Term { coeff: lc, exps: exps_lcm(&r1.lhs.exps, &r2.lhs.exps) };
    let p1 = apply_rule(dom, r1, &lt)?;
    let p2 = apply_rule(dom, r2, &lt)?;
    Some((p1, p2))
}

fn complete(p: &MonoidPresentation, max_rules: usize) -> RewriteSystem {
    let dom = &p.domain;
    let mut rules: Vec<Rule> = Vec::new();
    let mut equations = Vec::new();
    let mut queue: VecDeque<(Monomial, Monomial)> = p.relations.iter().cloned().collect();
    let mut complete = true;
    let mut processed = 0usize;
    let limit = max_rules * 60;
    while let Some((a, b)) = queue.pop_front() {
        processed += 1;
        if processed > limit {
            complete = false;
            break;
        }
        let a = normal_form(dom, &rules, a, None);
        let b = normal_form(dom, &rules, b, None);
        if a == b {
            continue;
        }
        let Some(rule) = orient(dom, a.clone(), b.clone()) else {
            complete = false;
            equations.push((a, b));
            continue;
        };
        let mut kept = Vec::with_capacity(rules.len() + 1);
        for r in rules.drain(..) {
            if apply_rule(dom, &rule, &r.lhs).is_some() {
                queue.push_back((Monomial::Term(r.lhs), r.rhs));
            } else {
                kept.push(r);
            }
        }
        rules = kept;
        for r in &rules {
            if let Some(cp) = critical_pair(dom, &rule, r) {
                queue.push_back(cp);
            }
        }
        rules.push(rule);
        for i in 0..rules.len() {
            let rhs = rules[i].rhs.clone();
            let n = normal_form(dom, &rules, rhs, None);
            rules[i].rhs = n;
        }
        if rules.len() > max_rules {
            complete = false;
            break;
        }
    }
    if let Builtin::IntModN(_) = dom.builtin {
        if rules.iter().any(|r| dom.core(&r.lhs.coeff) != 1) {
            complete = false;
        }
    }
    rules.sort_by(|x, y| key_cmp(dom, &x.lhs, &y.lhs));
    RewriteSystem { rules, complete: complete && equations.is_empty(), equations }
}

/// Meet-in-the-middle breadth-first search; returns the path from `a` to `b`
/// (excluding `a`).
pub(crate) fn bidirectional<S, F>(a: S, b: S, max_states: usize, neighbours: F) -> Option<Vec<S>>
where
    S: Clone + Eq + std::hash::Hash,
    F: Fn(&S) -> Vec<S>,
{
    if a == b {
        return Some(vec![]);
    }
    let mut parent_a: HashMap<S, Option<S>> = HashMap::new();
    let mut parent_b: HashMap<S, Option<S>> = HashMap::new();
    parent_a.insert(a.clone(), None);
    parent_b.insert(b.clone(), None);
    let mut fa = VecDeque::from([a]);
    let mut fb = VecDeque::from([b]);
    let path = |meet: S, pa: &HashMap<S, Option<S>>, pb: &HashMap<S, Option<S>>| {
        let mut left = vec![meet.clone()];
        let mut cur = meet.clone();
        while let Some(Some(p)) = pa.get(&cur) {
            left.push(p.clone());
            cur = p.clone();
        }
        left.reverse();
        let mut cur = meet;
        while let Some(Some(p)) = pb.get(&cur) {
            left.push(p.clone());
            cur = p.clone();
        }
        left.remove(0);
        left
    };
    while !fa.is_empty() || !fb.is_empty() {
        if parent_a.len() + parent_b.len() > max_states {
            return None;
        }
        let expand_a = !fa.is_empty() && (fb.is_empty() || fa.len() <= fb.len());
        if expand_a {
            let n = fa.len();
            for _ in 0..n {
                let s = fa.pop_front().unwrap();
                for t in neighbours(&s) {
                    if parent_a.contains_key(&t) {
                        continue;
                    }
                    parent_a.insert(t.clone(), Some(s.clone()));
                    if parent_b.contains_key(&t) {
                        return Some(path(t, &parent_a, &parent_b));
                    }
                    fa.push_back(t);
                }
            }
        } else {
            let n = fb.len();
            for _ in 0..n {
                let s = fb.pop_front().unwrap();
                for t in neighbours(&s) {
                    if parent_b.contains_key(&t) {
                        continue;
                    }
                    parent_b.insert(t.clone(), Some(s.clone()));
                    if parent_a.contains_key(&t) {
                        return Some(path(t, &parent_a, &parent_b));
                    }
                    fb.push_back(t);
                }
            }
        }
    }
    None
}

impl fmt::Display for MonoidPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.domain, self.atoms.join(","))?;
        if !self.relations.is_empty() {
            let rels: Vec<String> =
                self.relations.iter().map(|(a, b)| format!("{} = {}", self.show(a), self.show(b))).collect();
            write!(f, " / {{ {} }}", rels.join(", "))?;
        }
        Ok(())
    }
}

/// Decide membership `m ∈ (gens)` and return a factorization `m = g * q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealMembership {
    pub generator: Monomial,
    pub cofactor: Monomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealExclusion {
    /// Atoms hit by every generator but by no representative of `m`.
    pub blocking_atoms: Vec<u32>,
}

pub fn divisors_in_ideal(
    p: &MonoidPresentation,
    m: &Monomial,
    gens: &[Monomial],
    bounds: &SearchBounds,
) -> Result<Verdict<IdealMembership, IdealExclusion>, MonoidError> {
    let m = p.normalize(&p.check(m)?);
    let gens: Vec<Monomial> = gens.iter().map(|g| p.check(g).map(|g| p.normalize(&g))).collect::<Result<_, _>>()?;
    if m.is_zero() {
        if let Some(g) = gens.first() {
            return Ok(Verdict::Proved(IdealMembership { generator: g.clone(), cofactor: Monomial::Zero }));
        }
    }
    let Monomial::Term(mt) = &m else {
        return Ok(Verdict::Refuted(IdealExclusion { blocking_atoms: vec![] }));
    };
    for g in &gens {
        if let Some(q) = divide_term(&p.domain, mt, g) {
            if p.equal(&p.mul(g, &q), &m, bounds) == Some(true) {
                return Ok(Verdict::Proved(IdealMembership { generator: g.clone(), cofactor: p.normalize(&q) }));
            }
        }
    }
    let deg = m.degree() + 2;
    let cands = p.enumerate(&p.all_atoms(), deg.min(bounds.max_degree));
    for g in &gens {
        for q in &cands {
            if q.is_one() {
                continue;
            }
            let scaled = match (m.coeff(), g.coeff()) {
                (Some(cm), Some(cg)) => match p.domain.divide(cm, cg) {
                    Some(c) => q.with_coeff(c),
                    None => continue,
                },
                _ => continue,
            };
            if p.equal(&p.mul(g, &scaled), &m, bounds) == Some(true) {
                return Ok(Verdict::Proved(IdealMembership { generator: g.clone(), cofactor: scaled }));
            }
        }
    }
    // Support test: the ideal generated by the atoms occurring in the
    // generators, provided membership in it is invariant under relations.
    if p.domain.is_f1() && gens.iter().all(|g| !g.is_zero() && g.degree() > 0) {
        let block: Vec<u32> = {
            let mut s: Vec<u32> = gens.iter().flat_map(|g| g.support().collect::<Vec<_>>()).collect();
            s.sort();
            s.dedup();
            s
        };
        let hits = |x: &Monomial| x.is_zero() || x.support().any(|a| block.contains(&a));
        let invariant = p.relations.iter().all(|(a, b)| hits(a) == hits(b));
        if invariant && !hits(&m) {
            return Ok(Verdict::Refuted(IdealExclusion { blocking_atoms: block }));
        }
    }
    Ok(Verdict::Unknown(Exhausted::new("max_degree", "no factorization found and no blocking support")))
}
