//! Invariants that separate non-related sums.

use std::collections::BTreeSet;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Blueprint;
use crate::arith::{integer_nullspace, mod_inverse, Builtin, Coeff, Inversion};
use crate::monoid::Monomial;
use crate::sum::FormalSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalTarget {
    /// The Boolean semiring, where `1 + 1 = 1`.
    Boolean,
    Natural,
    Modular(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Separation {
    /// No additive generators: the pre-addition only relates equal sums.
    FreePreaddition { left: FormalSum, right: FormalSum },
    /// Every generator is homogeneous for `weights`, and the sums occupy
    /// different sets of degrees.
    Grading { weights: Vec<i64>, left_degrees: Vec<i64>, right_degrees: Vec<i64> },
    /// A morphism into a small semiring separating the sums.
    Evaluation { target: EvalTarget, values: Vec<i64>, left: i64, right: i64 },
}

fn weight_of(m: &Monomial, w: &[i64]) -> i64 {
    m.exps().iter().map(|(a, k)| w[*a as usize] * *k as i64).sum()
}

fn degrees(s: &FormalSum, w: &[i64]) -> Vec<i64> {
    let set: BTreeSet<i64> = s.terms().iter().map(|m| weight_of(m, w)).collect();
    set.into_iter().collect()
}

fn grading_applies(b: &Blueprint) -> bool {
    if b.atoms().is_empty() || !matches!(b.domain().builtin, Builtin::None | Builtin::Nat) {
        return false;
    }
    let sys = b.monoid.rewrite_system();
    let sz = |m: &Monomial| m.exps().iter().filter(|(a, _)| b.square_zero.contains(a)).map(|(_, k)| *k).sum::<u32>();
    let killed = |m: &Monomial| sz(m) >= 2;
    if b.monoid.relations.iter().any(|(x, y)| (x.is_zero() && !killed(y)) || (y.is_zero() && !killed(x)))
        || sys.rules.iter().any(|r| r.rhs.is_zero() && !killed(&Monomial::Term(r.lhs.clone())))
    {
        return false;
    }
    // Zero products of square-zero atoms only respect gradings when every
    // relation is homogeneous in those atoms.
    if !b.square_zero.is_empty() {
        let homogeneous = |ms: &mut dyn Iterator<Item = &Monomial>| {
            let ds: BTreeSet<u32> = ms.filter(|m| !m.is_zero()).map(sz).collect();
            ds.len() <= 1
        };
        if !b.monoid.relations.iter().all(|(x, y)| x.is_zero() || y.is_zero() || homogeneous(&mut [x, y].into_iter()))
            || !b.generators.iter().all(|(l, r)| homogeneous(&mut l.terms().iter().chain(r.terms())))
        {
            return false;
        }
    }
    !b.generators.iter().any(|(l, r)| l.is_empty() || r.is_empty())
}

pub(crate) fn is_homogeneous(b: &Blueprint, w: &[i64]) -> bool {
    w.len() == b.atoms().len()
        && b.monoid.relations.iter().all(|(x, y)| x.is_zero() || y.is_zero() || weight_of(x, w) == weight_of(y, w))
        && b.generators.iter().all(|(l, r)| {
            let mut ws = l.terms().iter().chain(r.terms()).map(|m| weight_of(m, w));
            let first = ws.next();
            ws.all(|x| Some(x) == first)
        })
}

/// Weight vectors making all relations homogeneous, when the degree-set
/// invariant applies.
pub(crate) fn grading_weights(b: &Blueprint) -> Vec<Vec<i64>> {
    let n = b.atoms().len();
    if !grading_applies(b) {
        return vec![];
    }
    let vec_of = |m: &Monomial| {
        let mut v = vec![0i64; n];
        for (a, k) in m.exps() {
            v[*a as usize] += *k as i64;
        }
        v
    };
    let mut rows = Vec::new();
    for (x, y) in &b.monoid.relations {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        let (vx, vy) = (vec_of(x), vec_of(y));
        rows.push(vx.iter().zip(&vy).map(|(a, c)| a - c).collect::<Vec<_>>());
    }
    for (l, r) in &b.generators {
        let all: Vec<&Monomial> = l.terms().iter().chain(r.terms()).collect();
        let v0 = vec_of(all[0]);
        for m in &all[1..] {
            let vm = vec_of(m);
            rows.push(v0.iter().zip(&vm).map(|(a, c)| a - c).collect());
        }
    }
    let basis = integer_nullspace(&rows, n);
    let mut cands: Vec<Vec<i64>> = basis.clone();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            cands.push(basis[i].iter().zip(&basis[j]).map(|(a, c)| a + c).collect());
            cands.push(basis[i].iter().zip(&basis[j]).map(|(a, c)| a - c).collect());
        }
        if cands.len() > 40 {
            break;
        }
    }
    cands
}

pub(crate) fn grading_separation(b: &Blueprint, s: &FormalSum, t: &FormalSum) -> Option<Separation> {
    for w in grading_weights(b) {
        let ds = degrees(s, &w);
        let dt = degrees(t, &w);
        if ds != dt {
            return Some(Separation::Grading { weights: w, left_degrees: ds, right_degrees: dt });
        }
    }
    None
}

fn targets(b: &Blueprint) -> Vec<EvalTarget> {
    let d = b.domain();
    let inv_ok = |m: u64| match &d.inverted {
        Inversion::Primes(s) => s.iter().all(|p| !m.is_multiple_of(*p)),
        Inversion::AllExcept(_) => false,
    };
    let mut out = Vec::new();
    match d.builtin {
        Builtin::None => {
            out.extend([EvalTarget::Boolean, EvalTarget::Natural, EvalTarget::Modular(2), EvalTarget::Modular(3)]);
        }
        Builtin::Nat => {
            out.push(EvalTarget::Boolean);
            if d.inverted.is_empty() {
                out.push(EvalTarget::Natural);
            }
            out.extend([2, 3, 5].into_iter().filter(|m| inv_ok(*m)).map(EvalTarget::Modular));
        }
        Builtin::Int => out.extend([2, 3, 5].into_iter().filter(|m| inv_ok(*m)).map(EvalTarget::Modular)),
        Builtin::IntModN(n) => out.extend([2, 3, 5].into_iter().filter(|m| n % m == 0).map(EvalTarget::Modular)),
    }
    out
}

fn value_range(t: EvalTarget) -> Vec<i64> {
    match t {
        EvalTarget::Boolean => vec![0, 1],
        EvalTarget::Natural => vec![0, 1, 2],
        EvalTarget::Modular(m) => (0..m as i64).collect(),
    }
}

fn eval_coeff(b: &Blueprint, t: EvalTarget, c: &Coeff) -> Option<i64> {
    if b.domain().is_f1() {
        return Some(1);
    }
    match t {
        EvalTarget::Boolean => Some(if c.is_zero() { 0 } else { 1 }),
        EvalTarget::Natural => c.to_integer().to_i64().filter(|_| c.is_integer()),
        EvalTarget::Modular(m) => {
            let m = m as i128;
            let den = mod_inverse(c.denom().rem_euclid(m), m)?;
            Some((c.numer().rem_euclid(m) * den).rem_euclid(m) as i64)
        }
    }
}

fn combine_mul(t: EvalTarget, a: i64, c: i64) -> Option<i64> {
    match t {
        EvalTarget::Boolean => Some(a & c),
        EvalTarget::Natural => a.checked_mul(c).filter(|v| *v < 1_000_000_000_000),
        EvalTarget::Modular(m) => Some((a * c).rem_euclid(m as i64)),
    }
}

fn combine_add(t: EvalTarget, a: i64, c: i64) -> Option<i64> {
    match t {
        EvalTarget::Boolean => Some(a | c),
        EvalTarget::Natural => a.checked_add(c),
        EvalTarget::Modular(m) => Some((a + c).rem_euclid(m as i64)),
    }
}

pub fn evaluate_monomial(b: &Blueprint, t: EvalTarget, values: &[i64], m: &Monomial) -> Option<i64> {
    let Monomial::Term(tm) = m else { return Some(0) };
    let mut acc = eval_coeff(b, t, &tm.coeff)?;
    for (a, k) in &tm.exps {
        for _ in 0..*k {
            acc = combine_mul(t, acc, values[*a as usize])?;
        }
    }
    Some(acc)
}

pub fn evaluate_sum(b: &Blueprint, t: EvalTarget, values: &[i64], s: &FormalSum) -> Option<i64> {
    let mut acc = 0;
    for m in s.terms() {
        acc = combine_add(t, acc, evaluate_monomial(b, t, values, m)?)?;
    }
    Some(acc)
}

/// Whether the atom assignment defines a morphism from `b` into the target.
pub fn is_valid_evaluation(b: &Blueprint, t: EvalTarget, values: &[i64]) -> bool {
    let ok_m = |x: &Monomial, y: &Monomial| match (evaluate_monomial(b, t, values, x), evaluate_monomial(b, t, values, y)) {
        (Some(p), Some(q)) => p == q,
        _ => false,
    };
    if !b.monoid.relations.iter().all(|(x, y)| ok_m(x, y)) {
        return false;
    }
    b.generators.iter().all(|(l, r)| match (evaluate_sum(b, t, values, l), evaluate_sum(b, t, values, r)) {
        (Some(p), Some(q)) => p == q,
        _ => false,
    })
}

pub(crate) fn valid_evaluations(b: &Blueprint, budget: usize) -> Vec<(EvalTarget, Vec<i64>)> {
    let n = b.atoms().len();
    let mut out = Vec::new();
    for t in targets(b) {
        let range = value_range(t);
        let total = (range.len() as f64).powi(n as i32);
        if total > budget as f64 {
            continue;
        }
        let mut vals = vec![range[0]; n];
        let mut idx = vec![0usize; n];
        loop {
            if is_valid_evaluation(b, t, &vals) {
                out.push((t, vals.clone()));
            }
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                idx[i] += 1;
                if idx[i] < range.len() {
                    vals[i] = range[idx[i]];
                    break;
                }
                idx[i] = 0;
                vals[i] = range[0];
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    out
}

pub(crate) fn evaluation_separation(b: &Blueprint, s: &FormalSum, t: &FormalSum) -> Option<Separation> {
    for (target, values) in valid_evaluations(b, 20_000) {
        let (Some(x), Some(y)) = (evaluate_sum(b, target, &values, s), evaluate_sum(b, target, &values, t)) else {
            continue;
        };
        if x != y {
            return Some(Separation::Evaluation { target, values, left: x, right: y });
        }
    }
    None
}

/// Re-check a separation certificate.
pub fn check_separation(b: &Blueprint, s: &FormalSum, t: &FormalSum, sep: &Separation) -> bool {
    let s = s.normalize(&b.monoid);
    let t = t.normalize(&b.monoid);
    match sep {
        Separation::FreePreaddition { .. } => b.generators.is_empty() && b.monoid.is_complete() && s != t,
        Separation::Grading { weights, .. } => {
            grading_applies(b) && is_homogeneous(b, weights) && degrees(&s, weights) != degrees(&t, weights)
        }
        Separation::Evaluation { target, values, .. } => {
            is_valid_evaluation(b, *target, values)
                && evaluate_sum(b, *target, values, &s) != evaluate_sum(b, *target, values, &t)
        }
    }
}
