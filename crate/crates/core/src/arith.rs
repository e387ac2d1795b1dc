//! Coefficient domains and small number theory.
//!
//! Builtin coefficients are exact rationals whose denominators only involve
//! inverted primes. `N[1/6]` is the domain `Nat` with primes `{2, 3}` inverted.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Coeff = Ratio<i128>;

/// Coefficients as `"n"` or `"n/d"` text, so reports survive JSON readers
/// without 128-bit integers.
pub mod coeff_text {
    use super::Coeff;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &Coeff, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(c)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Coeff, D::Error> {
        let text = String::deserialize(d)?;
        text.parse::<Coeff>().map_err(|e| D::Error::custom(format!("bad coefficient `{text}`: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// Plain monoid coefficients: only the unit `1` (the F1 case).
    None,
    Nat,
    Int,
    IntModN(u64),
}

/// Which primes have been made invertible.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inversion {
    Primes(BTreeSet<u64>),
    /// Every prime except the listed ones; used for stalks.
    AllExcept(BTreeSet<u64>),
}

impl Default for Inversion {
    fn default() -> Self {
        Inversion::Primes(BTreeSet::new())
    }
}

impl Inversion {
    pub fn contains(&self, p: u64) -> bool {
        match self {
            Inversion::Primes(s) => s.contains(&p),
            Inversion::AllExcept(s) => !s.contains(&p),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Inversion::Primes(s) if s.is_empty())
    }

    pub fn union(&self, other: &Inversion) -> Inversion {
        match (self, other) {
            (Inversion::Primes(a), Inversion::Primes(b)) => {
                Inversion::Primes(a.union(b).copied().collect())
            }
            (Inversion::AllExcept(a), Inversion::Primes(b))
            | (Inversion::Primes(b), Inversion::AllExcept(a)) => {
                Inversion::AllExcept(a.difference(b).copied().collect())
            }
            (Inversion::AllExcept(a), Inversion::AllExcept(b)) => {
                Inversion::AllExcept(a.intersection(b).copied().collect())
            }
        }
    }

    pub fn with_primes(&self, primes: &BTreeSet<u64>) -> Inversion {
        self.union(&Inversion::Primes(primes.clone()))
    }

    /// True when every prime inverted by `self` is inverted by `other`.
    pub fn is_subset(&self, other: &Inversion) -> bool {
        match (self, other) {
            (Inversion::Primes(a), _) => a.iter().all(|p| other.contains(*p)),
            (Inversion::AllExcept(a), Inversion::AllExcept(b)) => b.is_subset(a),
            (Inversion::AllExcept(_), Inversion::Primes(_)) => false,
        }
    }
}

/// The coefficient domain of a monoid presentation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoeffDomain {
    pub builtin: Builtin,
    #[serde(default, skip_serializing_if = "Inversion::is_empty")]
    pub inverted: Inversion,
}

impl Default for CoeffDomain {
    fn default() -> Self {
        CoeffDomain::f1()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("inverting {0} collapses the coefficients to the zero ring")]
    ZeroRing(u64),
    #[error("modulus must be at least 2")]
    BadModulus,
    #[error("coefficients of {0} cannot be mapped into {1}")]
    Incompatible(String, String),
}

impl CoeffDomain {
    pub fn f1() -> Self {
        CoeffDomain { builtin: Builtin::None, inverted: Inversion::default() }
    }

    pub fn nat() -> Self {
        CoeffDomain { builtin: Builtin::Nat, inverted: Inversion::default() }
    }

    pub fn int() -> Self {
        CoeffDomain { builtin: Builtin::Int, inverted: Inversion::default() }
    }

    pub fn int_mod(n: u64) -> Result<Self, DomainError> {
        if n < 2 {
            return Err(DomainError::BadModulus);
        }
        Ok(CoeffDomain { builtin: Builtin::IntModN(n), inverted: Inversion::default() })
    }

    pub fn is_f1(&self) -> bool {
        self.builtin == Builtin::None
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.builtin, Builtin::None | Builtin::IntModN(_))
    }

    /// Invert the given primes. For `Z/n` the modulus shrinks instead.
    pub fn invert(&self, primes: &BTreeSet<u64>) -> Result<CoeffDomain, DomainError> {
        match self.builtin {
            Builtin::None => Ok(self.clone()),
            Builtin::IntModN(n) => {
                let mut m = n;
                for &p in primes {
                    while m % p == 0 {
                        m /= p;
                    }
                }
                if m == 1 {
                    return Err(DomainError::ZeroRing(*primes.iter().next().unwrap_or(&1)));
                }
                Ok(CoeffDomain { builtin: Builtin::IntModN(m), inverted: Inversion::default() })
            }
            _ => Ok(CoeffDomain { builtin: self.builtin, inverted: self.inverted.with_primes(primes) }),
        }
    }

    pub fn with_inversion(&self, inv: Inversion) -> CoeffDomain {
        CoeffDomain { builtin: self.builtin, inverted: inv }
    }

    /// The smallest domain receiving both `self` and `other` canonically.
    pub fn join(&self, other: &CoeffDomain) -> Result<CoeffDomain, DomainError> {
        use Builtin::*;
        let inv = self.inverted.union(&other.inverted);
        let b = match (self.builtin, other.builtin) {
            (None, x) | (x, None) => x,
            (Nat, Nat) => Nat,
            (Nat, Int) | (Int, Nat) | (Int, Int) => Int,
            (IntModN(a), IntModN(b)) => IntModN(a.gcd(&b)),
            (IntModN(a), _) | (_, IntModN(a)) => IntModN(a),
        };
        match b {
            IntModN(n) => {
                let d = CoeffDomain { builtin: IntModN(n), inverted: Inversion::default() };
                let ps = match &inv {
                    Inversion::Primes(s) => s.clone(),
                    Inversion::AllExcept(_) => {
                        factorize(n as u128).into_iter().map(|(p, _)| p as u64).filter(|p| inv.contains(*p)).collect()
                    }
                };
                if n < 2 {
                    return Err(DomainError::BadModulus);
                }
                d.invert(&ps)
            }
            _ => Ok(CoeffDomain { builtin: b, inverted: if b == None { Inversion::default() } else { inv } }),
        }
    }

    /// Whether coefficients of `self` map canonically into `target`.
    pub fn maps_into(&self, target: &CoeffDomain) -> bool {
        use Builtin::*;
        let base_ok = match (self.builtin, target.builtin) {
            (None, _) => true,
            (Nat, Nat) | (Nat, Int) | (Int, Int) => true,
            (Nat, IntModN(_)) | (Int, IntModN(_)) => true,
            (IntModN(a), IntModN(b)) => a % b == 0,
            _ => false,
        };
        if !base_ok {
            return false;
        }
        match target.builtin {
            IntModN(n) => match &self.inverted {
                Inversion::Primes(s) => s.iter().all(|p| n % p != 0),
                Inversion::AllExcept(_) => false,
            },
            _ => self.inverted.is_subset(&target.inverted),
        }
    }

    pub fn one(&self) -> Coeff {
        Coeff::one()
    }

    /// Reduce a coefficient into canonical form; `None` means zero.
    pub fn normalize(&self, c: Coeff) -> Option<Coeff> {
        match self.builtin {
            Builtin::None => {
                if c.is_zero() {
                    None
                } else {
                    Some(Coeff::one())
                }
            }
            Builtin::IntModN(n) => {
                let n = n as i128;
                let v = mod_value(&c, n)?;
                if v == 0 {
                    None
                } else {
                    Some(Coeff::from_integer(v))
                }
            }
            _ => {
                if c.is_zero() {
                    None
                } else {
                    Some(c)
                }
            }
        }
    }

    /// Whether `c` is a legal nonzero coefficient of this domain.
    pub fn contains(&self, c: &Coeff) -> bool {
        if c.is_zero() {
            return false;
        }
        match self.builtin {
            Builtin::None => c.is_one(),
            Builtin::IntModN(n) => c.is_integer() && *c.numer() > 0 && *c.numer() < n as i128,
            Builtin::Nat | Builtin::Int => {
                if self.builtin == Builtin::Nat && c.is_negative() {
                    return false;
                }
                factorize(c.denom().unsigned_abs()).iter().all(|(p, _)| self.inverted.contains(*p as u64))
            }
        }
    }

    pub fn mul(&self, a: &Coeff, b: &Coeff) -> Option<Coeff> {
        match self.builtin {
            Builtin::None => Some(Coeff::one()),
            _ => {
                let p = a.checked_mul(b)?;
                self.normalize(p)
            }
        }
    }

    pub fn add(&self, a: &Coeff, b: &Coeff) -> Option<Coeff> {
        match self.builtin {
            Builtin::None => None,
            _ => self.normalize(a.checked_add(b)?),
        }
    }

    /// Split `c = unit * core` where `core` is a positive integer free of
    /// inverted primes (for `Z/n`: the gcd with `n`).
    pub fn decompose(&self, c: &Coeff) -> (Coeff, u128) {
        match self.builtin {
            Builtin::None => (Coeff::one(), 1),
            Builtin::IntModN(n) => {
                let v = c.numer().rem_euclid(n as i128) as u128;
                let d = v.gcd(&(n as u128));
                let cp = v / d;
                let m = n as u128 / d;
                let mut u = cp;
                while u.gcd(&(n as u128)) != 1 {
                    u += m;
                }
                (Coeff::from_integer((u % n as u128) as i128), d)
            }
            Builtin::Nat | Builtin::Int => {
                let mut num = c.numer().unsigned_abs();
                let mut stripped = 1u128;
                for (p, _) in factorize(num) {
                    if self.inverted.contains(p as u64) {
                        while num.is_multiple_of(p) {
                            num /= p;
                            stripped *= p;
                        }
                    }
                }
                let core = num;
                let unit = c / Coeff::from_integer(core as i128);
                let _ = stripped;
                (unit, core)
            }
        }
    }

    pub fn core(&self, c: &Coeff) -> u128 {
        self.decompose(c).1
    }

    pub fn is_unit(&self, c: &Coeff) -> bool {
        self.contains(c) && self.core(c) == 1 && self.inverse(c).is_some()
    }

    pub fn inverse(&self, c: &Coeff) -> Option<Coeff> {
        match self.builtin {
            Builtin::None => Some(Coeff::one()),
            Builtin::IntModN(n) => {
                let v = c.numer().rem_euclid(n as i128);
                mod_inverse(v, n as i128).map(Coeff::from_integer)
            }
            _ => {
                if c.is_zero() {
                    return None;
                }
                let inv = c.recip();
                if self.contains(&inv) {
                    Some(inv)
                } else {
                    None
                }
            }
        }
    }

    /// Solve `q * d = c` in the domain, if possible.
    pub fn divide(&self, c: &Coeff, d: &Coeff) -> Option<Coeff> {
        match self.builtin {
            Builtin::None => Some(Coeff::one()),
            Builtin::IntModN(n) => {
                let n = n as i128;
                let cv = c.numer().rem_euclid(n);
                let dv = d.numer().rem_euclid(n);
                let g = dv.gcd(&n);
                if cv % g != 0 {
                    return None;
                }
                let m = n / g;
                let inv = mod_inverse((dv / g).rem_euclid(m), m)?;
                let q = ((cv / g) % m * inv).rem_euclid(m);
                let q = if q == 0 { m } else { q };
                self.normalize(Coeff::from_integer(q))
            }
            _ => {
                let q = c.checked_div(d)?;
                if self.contains(&q) {
                    Some(q)
                } else {
                    None
                }
            }
        }
    }

    /// Unit primes generating the coefficient unit group (finite cases).
    pub fn unit_generators(&self) -> Vec<Coeff> {
        match self.builtin {
            Builtin::None => vec![],
            Builtin::Nat => match &self.inverted {
                Inversion::Primes(s) => s.iter().map(|p| Coeff::from_integer(*p as i128)).collect(),
                Inversion::AllExcept(_) => vec![],
            },
            Builtin::Int => {
                let mut v = vec![Coeff::from_integer(-1)];
                if let Inversion::Primes(s) = &self.inverted {
                    v.extend(s.iter().map(|p| Coeff::from_integer(*p as i128)));
                }
                v
            }
            Builtin::IntModN(n) => (1..n as i128)
                .filter(|v| v.gcd(&(n as i128)) == 1 && *v != 1)
                .map(Coeff::from_integer)
                .collect(),
        }
    }

    /// Primes that are not inverted and occur in `c`'s core.
    pub fn core_primes(&self, c: &Coeff) -> BTreeSet<u64> {
        factorize(self.core(c)).into_iter().map(|(p, _)| p as u64).collect()
    }

    pub fn describe(&self) -> String {
        let base = match self.builtin {
            Builtin::None => "F1".to_string(),
            Builtin::Nat => "N".to_string(),
            Builtin::Int => "Z".to_string(),
            Builtin::IntModN(n) => format!("Z/{n}"),
        };
        match &self.inverted {
            Inversion::Primes(s) if s.is_empty() => base,
            Inversion::Primes(s) => {
                let h: u128 = s.iter().map(|p| *p as u128).product();
                format!("{base}[1/{h}]")
            }
            Inversion::AllExcept(s) if s.is_empty() => format!("{base}_(0)"),
            Inversion::AllExcept(s) => {
                let ps: Vec<String> = s.iter().map(|p| p.to_string()).collect();
                format!("{base}_({})", ps.join(","))
            }
        }
    }
}

impl fmt::Display for CoeffDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

fn mod_value(c: &Coeff, n: i128) -> Option<i128> {
    let num = c.numer().rem_euclid(n);
    let den = c.denom().rem_euclid(n);
    let inv = mod_inverse(den, n)?;
    Some((num * inv).rem_euclid(n))
}

pub fn mod_inverse(a: i128, n: i128) -> Option<i128> {
    let e = a.extended_gcd(&n);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(n))
}

/// Prime factorization by trial division.
pub fn factorize(mut n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u128;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n as u128).len() == 1 && factorize(n as u128)[0].1 == 1
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| is_prime(k)).collect()
}

pub fn coeff_to_string(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn coeff_as_u128(c: &Coeff) -> Option<u128> {
    if c.is_integer() {
        c.numer().to_u128()
    } else {
        None
    }
}

/// Write `target` as a nonnegative combination of `gens`, using the Apéry set
/// with respect to the smallest generator.
pub fn semigroup_represent(target: u128, gens: &[u128]) -> Option<Vec<u128>> {
    let positive: Vec<(usize, u128)> = gens.iter().copied().enumerate().filter(|(_, g)| *g > 0).collect();
    if target == 0 {
        return Some(vec![0; gens.len()]);
    }
    let &(mi, m) = positive.iter().min_by_key(|(_, g)| *g)?;
    if m > 1_000_000 {
        return None;
    }
    let m_us = m as usize;
    let mut dist: Vec<Option<u128>> = vec![None; m_us];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; m_us];
    dist[0] = Some(0);
    let mut done = vec![false; m_us];
    loop {
        let mut best: Option<(usize, u128)> = None;
        for r in 0..m_us {
            if let (false, Some(d)) = (done[r], dist[r]) {
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((r, d));
                }
            }
        }
        let Some((r, d)) = best else { break };
        done[r] = true;
        for &(gi, g) in &positive {
            if gi == mi {
                continue;
            }
            let nr = ((r as u128 + g) % m) as usize;
            let nd = d + g;
            if dist[nr].is_none_or(|x| nd < x) {
                dist[nr] = Some(nd);
                pred[nr] = Some((r, gi));
            }
        }
    }
    let r = (target % m) as usize;
    let d = dist[r]?;
    if d > target {
        return None;
    }
    let mut coeffs = vec![0u128; gens.len()];
    coeffs[mi] = (target - d) / m;
    let mut cur = r;
    while let Some((prev, gi)) = pred[cur] {
        coeffs[gi] += 1;
        cur = prev;
    }
    Some(coeffs)
}

/// Rational nullspace basis of an integer matrix (rows are constraints),
/// scaled to primitive integer vectors.
pub fn integer_nullspace(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<Coeff>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| Coeff::from_integer(v as i128)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(row, p);
        let pv = m[row][col];
        for c in 0..ncols {
            m[row][c] /= pv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col];
                for c in 0..ncols {
                    let v = m[row][c] * f;
                    m[i][c] -= v;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        let mut v = vec![Coeff::zero(); ncols];
        v[f] = Coeff::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][f];
        }
        let l = v.iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
        let ints: Vec<i128> = v.iter().map(|x| (x * Coeff::from_integer(l)).to_integer()).collect();
        let g = ints.iter().fold(0i128, |acc, x| acc.gcd(x)).max(1);
        basis.push(ints.iter().map(|x| (x / g) as i64).collect());
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i128) -> Coeff {
        Coeff::from_integer(n)
    }

    #[test]
    fn decompose_strips_inverted_primes() {
        let d = CoeffDomain::nat().invert(&[2, 3].into_iter().collect()).unwrap();
        assert_eq!(d.decompose(&c(12)), (c(12), 1));
        assert_eq!(d.decompose(&c(10)), (c(2), 5));
        assert!(d.is_unit(&Coeff::new(1, 6)));
        assert!(!d.contains(&Coeff::new(1, 5)));
    }

    #[test]
    fn int_mod_reduces_modulus_when_inverting() {
        let d = CoeffDomain::int_mod(12).unwrap();
        let e = d.invert(&[2].into_iter().collect()).unwrap();
        assert_eq!(e.builtin, Builtin::IntModN(3));
        assert!(CoeffDomain::int_mod(4).unwrap().invert(&[2].into_iter().collect()).is_err());
    }

    #[test]
    fn mod_division() {
        let d = CoeffDomain::int_mod(12).unwrap();
        let q = d.divide(&c(8), &c(4)).unwrap();
        assert_eq!(d.mul(&q, &c(4)), Some(c(8)));
        assert!(d.divide(&c(3), &c(4)).is_none());
    }

    #[test]
    fn semigroup_partition_for_ten_and_twenty_one() {
        assert_eq!(semigroup_represent(216, &[10, 21]), Some(vec![9, 6]));
        assert_eq!(semigroup_represent(36, &[10, 21]), None);
        assert_eq!(semigroup_represent(1, &[2, 3]), None);
        assert_eq!(semigroup_represent(7, &[2, 3]).map(|v| v[0] * 2 + v[1] * 3), Some(7));
    }

    #[test]
    fn nullspace_of_single_constraint() {
        let ns = integer_nullspace(&[vec![1, -1, 0]], 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert_eq!(v[0] - v[1], 0);
        }
    }

    #[test]
    fn factorization() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert!(is_prime(97));
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }
}
