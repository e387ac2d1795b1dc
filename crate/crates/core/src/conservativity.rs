//! Conservativity of basic-open covers: partition certificates and witness
//! module maps.

use std::collections::HashSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, semigroup_represent, Builtin, Coeff, Inversion};
use crate::blueprint::{related, unit_inverse, BpRef};
use crate::error::{Error, Result};
use crate::module::{
    base_change_morphism, is_module_iso, localize_module, make_module, module_from_text, BlueModule, ModuleIsoFailure,
    ModuleMorphism,
};
use crate::monoid::Monomial;
use crate::sections::{check_non_image, non_image_certificate, sections, BasicCover, NonImageCertificate, SectionTuple, SECTION_DEGREE};
use crate::spectra::{prime_ideals, PrimeIdeal};
use crate::sum::{normalize_terms, FormalSum};
use crate::verdict::{Exhausted, SearchBounds, Verdict};

/// Largest exponent `n` tried in `h^n = Σ aᵢhᵢ`.
const MAX_PARTITION_EXPONENT: u32 = 4;

/// `h^n = Σ aᵢhᵢ` with `h` a unit of the base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub h: String,
    pub n: u32,
    pub coefficients: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConservativeCertificate {
    /// Some `hᵢ` is a unit, so its chart is the whole spectrum.
    UnitInCover { index: usize, inverse: String },
    Partition(PartitionCertificate),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Scaling,
    GluedSection,
    Torsion,
}

/// Generators and relations in module text syntax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub generators: Vec<String>,
    pub relations: Vec<String>,
}

impl ModuleSpec {
    pub fn build(&self, base: &BpRef, bounds: &SearchBounds) -> Result<BlueModule> {
        if self.relations.is_empty() {
            return make_module(base, &self.generators, vec![], bounds);
        }
        let gens: Vec<&str> = self.generators.iter().map(|s| s.as_str()).collect();
        let rels: Vec<&str> = self.relations.iter().map(|s| s.as_str()).collect();
        module_from_text(base, &gens, &rels, bounds)
    }
}

/// The localized map over `U_h` with the inverse that proves it an iso.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartIso {
    pub h: String,
    pub inverse: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GlobalFailure {
    NotIso { failure: ModuleIsoFailure },
    /// `generator` equals `section·unit` on every chart and the section is not
    /// global, so `generator` has no preimage.
    NonImage { generator: String, unit: String, section: SectionTuple, certificate: NonImageCertificate },
}

/// `f: M -> M'` that is an iso over every chart but not globally.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub cover: Vec<String>,
    pub source: ModuleSpec,
    pub target: ModuleSpec,
    pub images: Vec<String>,
    pub charts: Vec<ChartIso>,
    pub global: GlobalFailure,
}

impl Witness {
    pub fn instantiate(&self, b: &BpRef, bounds: &SearchBounds) -> Result<(BlueModule, BlueModule, ModuleMorphism)> {
        let m = self.source.build(b, bounds)?;
        let mp = self.target.build(b, bounds)?;
        let images = self.images.iter().map(|s| mp.parse(s)).collect::<Result<Vec<_>>>()?;
        let f = ModuleMorphism::new(&m, &mp, images)?;
        Ok((m, mp, f))
    }
}

pub type ConservativityResult = Verdict<ConservativeCertificate, Witness>;

fn max_prime(b: &BpRef, hs: &[Monomial]) -> u64 {
    hs.iter()
        .filter_map(|h| h.coeff())
        .flat_map(|c| factorize(b.domain().core(c)))
        .map(|(p, _)| p as u64)
        .max()
        .unwrap_or(2)
        .max(2)
}

fn fresh(b: &BpRef, base: &str) -> String {
    let mut name = base.to_string();
    while b.atoms().contains(&name) {
        name.push('\'');
    }
    name
}

fn times(b: &BpRef, m: &Monomial, g: &str) -> String {
    if m.is_one() {
        g.to_string()
    } else {
        format!("{}*{}", b.show(m), g)
    }
}

/// Localize `f` at `h` and prove the result an iso.
fn chart_iso(f: &ModuleMorphism, b: &BpRef, h: &Monomial, bounds: &SearchBounds) -> Result<ChartIso> {
    let (m2, phi) = localize_module(&f.source, std::slice::from_ref(h), bounds)?;
    let (mp2, _) = localize_module(&f.target, std::slice::from_ref(h), bounds)?;
    let f2 = base_change_morphism(f, &phi, &m2, &mp2)?;
    match is_module_iso(&f2, bounds) {
        Verdict::Proved(p) => Ok(ChartIso { h: b.show(h), inverse: p.inverse.images.iter().map(|x| m2.show(x)).collect() }),
        Verdict::Refuted(r) => Err(Error::InvalidMorphism(format!("not an iso over U_{}: {r:?}", b.show(h)))),
        Verdict::Unknown(e) => Err(Error::BoundExhausted(format!("iso over U_{}: {}", b.show(h), e.detail))),
    }
}

fn charts_and_validation(f: &ModuleMorphism, b: &BpRef, hs: &[Monomial], bounds: &SearchBounds) -> Result<Vec<ChartIso>> {
    if !f.validate(bounds).is_proved() {
        return Err(Error::InvalidMorphism("witness map does not validate".into()));
    }
    hs.iter().map(|h| chart_iso(f, b, h, bounds)).collect()
}

/// `M = B<X_i>/(h_i X_j = h_j X_i)`, `M' = B<s>`, `f(X_j) = h_j s`.
pub fn scaling_witness(b: &BpRef, hs: &[Monomial], bounds: &SearchBounds) -> Result<Witness> {
    if !b.is_pure_builtin() {
        return Err(Error::Unsupported("scaling witnesses need a builtin base".into()));
    }
    let k = hs.len();
    let xs: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
    let mut relations = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            relations.push(format!("{} = {}", times(b, &hs[i], &xs[j]), times(b, &hs[j], &xs[i])));
        }
    }
    let source = ModuleSpec { generators: xs, relations };
    let target = ModuleSpec { generators: vec!["s".into()], relations: vec![] };
    let images = hs.iter().map(|h| times(b, h, "s")).collect();
    let mut w = Witness {
        kind: WitnessKind::Scaling,
        cover: hs.iter().map(|h| b.show(h)).collect(),
        source,
        target,
        images,
        charts: vec![],
        global: GlobalFailure::NotIso { failure: ModuleIsoFailure::NotInjective { left: String::new(), right: String::new() } },
    };
    let (_, _, f) = w.instantiate(b, bounds)?;
    w.charts = charts_and_validation(&f, b, hs, bounds)?;
    match is_module_iso(&f, bounds) {
        Verdict::Refuted(failure) => w.global = GlobalFailure::NotIso { failure },
        _ => return Err(Error::BoundExhausted("no global non-iso certificate".into())),
    }
    Ok(w)
}

/// `M = B<e>`, `M' = B<e,t>/(d_i t = n_i e)` where the section is `n_i/d_i` on
/// chart `i`; `f(e) = e`.
pub fn glued_section_witness(cover: &BasicCover, s: &SectionTuple, bounds: &SearchBounds) -> Result<Witness> {
    let b = &cover.base;
    let certificate = non_image_certificate(cover, s)
        .ok_or_else(|| Error::InvalidMorphism("section is not certified outside the image of σ".into()))?;
    let (e, t) = (fresh(b, "e"), fresh(b, "t"));
    let n = b.atoms().len() as u32;
    let mut relations = Vec::new();
    for (chart, comp) in cover.charts.iter().zip(&s.components) {
        let Monomial::Term(ct) = comp else { return Err(Error::InvalidMorphism("zero section".into())) };
        let numerator = Monomial::from_exps(ct.exps.iter().filter(|(a, _)| *a < n).cloned().collect());
        let mut denominator = Monomial::one();
        for (a, k) in ct.exps.iter().filter(|(a, _)| *a >= n) {
            let info = chart.blueprint.localization.as_ref().expect("chart is a localization");
            let (elem, _) = info.inverse_atoms.iter().find(|(_, u)| u == a).expect("inverse atom");
            denominator = denominator.mul_raw(&elem.pow_raw(*k, b.domain()), b.domain());
        }
        relations.push(format!("{} = {}", times(b, &denominator, &t), times(b, &numerator, &e)));
    }
    relations.sort();
    relations.dedup();
    let mut w = Witness {
        kind: WitnessKind::GluedSection,
        cover: cover.describe(),
        source: ModuleSpec { generators: vec![e.clone()], relations: vec![] },
        target: ModuleSpec { generators: vec![e.clone(), t.clone()], relations },
        images: vec![e.clone()],
        charts: vec![],
        global: GlobalFailure::NonImage { generator: t, unit: e, section: s.clone(), certificate },
    };
    let (_, _, f) = w.instantiate(b, bounds)?;
    let hs: Vec<Monomial> = cover.charts.iter().map(|c| c.h.clone()).collect();
    w.charts = charts_and_validation(&f, b, &hs, bounds)?;
    if !sections_match(b, &w, &hs, bounds)? {
        return Err(Error::InvalidMorphism("generator does not restrict to the section".into()));
    }
    Ok(w)
}

/// On every chart the extra generator equals the section times the unit
/// generator.
fn sections_match(b: &BpRef, w: &Witness, hs: &[Monomial], bounds: &SearchBounds) -> Result<bool> {
    let GlobalFailure::NonImage { generator, unit, section, .. } = &w.global else { return Ok(false) };
    let mp = w.target.build(b, bounds)?;
    for (h, shown) in hs.iter().zip(&section.shown) {
        let (loc, _) = localize_module(&mp, std::slice::from_ref(h), bounds)?;
        let lhs = loc.parse(generator)?;
        let rhs = loc.parse(&format!("{shown}*{unit}"))?;
        if loc.eq_elements(&lhs, &rhs, bounds) != Some(true) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TorsionOutcome {
    Witness { witness: Witness },
    Covered { chart: usize, h: String },
}

/// `M = B<e>/(p.e = *)` for the generators `p` of `x`, mapped to the trivial
/// module; a witness when `x` lies in no chart.
pub fn torsion_point_witness(b: &BpRef, hs: &[Monomial], x: &PrimeIdeal, bounds: &SearchBounds) -> Result<TorsionOutcome> {
    if let Some(i) = hs.iter().position(|h| !x.contains(b, &b.normalize(h))) {
        return Ok(TorsionOutcome::Covered { chart: i, h: b.show(&hs[i]) });
    }
    let e = fresh(b, "e");
    let mut relations: Vec<String> = x.atoms.iter().map(|a| format!("{}*{e} = *", b.atoms()[*a as usize])).collect();
    if let (Some(q), false) = (x.characteristic, b.domain().is_f1()) {
        relations.push(format!("{q}*{e} = *"));
    }
    if relations.is_empty() {
        return Err(Error::InvalidMorphism("the zero prime lies in every chart".into()));
    }
    let mut w = Witness {
        kind: WitnessKind::Torsion,
        cover: hs.iter().map(|h| b.show(h)).collect(),
        source: ModuleSpec { generators: vec![e], relations },
        target: ModuleSpec { generators: vec![], relations: vec![] },
        images: vec!["*".into()],
        charts: vec![],
        global: GlobalFailure::NotIso { failure: ModuleIsoFailure::NotInjective { left: String::new(), right: String::new() } },
    };
    let (_, _, f) = w.instantiate(b, bounds)?;
    w.charts = charts_and_validation(&f, b, hs, bounds)?;
    match is_module_iso(&f, bounds) {
        Verdict::Refuted(failure) => w.global = GlobalFailure::NotIso { failure },
        _ => return Err(Error::BoundExhausted("torsion module not shown nontrivial".into())),
    }
    Ok(TorsionOutcome::Witness { witness: w })
}

/// Re-run every check recorded in a witness.
pub fn check_witness(b: &BpRef, w: &Witness, bounds: &SearchBounds) -> bool {
    let check = || -> Result<bool> {
        let hs = w.cover.iter().map(|h| b.parse(h)).collect::<Result<Vec<_>>>()?;
        let (_, _, f) = w.instantiate(b, bounds)?;
        let charts = charts_and_validation(&f, b, &hs, bounds)?;
        if charts.len() != w.charts.len() {
            return Ok(false);
        }
        Ok(match &w.global {
            GlobalFailure::NotIso { failure } => is_module_iso(&f, bounds).refuted().as_ref() == Some(failure),
            GlobalFailure::NonImage { section, certificate, .. } => {
                let cover = BasicCover::new(b, &hs, bounds)?;
                check_non_image(&cover, section, certificate) && sections_match(b, w, &hs, bounds)?
            }
        })
    };
    check().unwrap_or(false)
}

fn inverted_product(b: &BpRef) -> Option<u128> {
    match &b.domain().inverted {
        Inversion::Primes(ps) => ps.iter().try_fold(1u128, |acc, p| acc.checked_mul(*p as u128)),
        Inversion::AllExcept(_) => None,
    }
}

fn integer_value(c: &Coeff) -> Option<i128> {
    (*c.denom() == 1).then(|| *c.numer())
}

/// Bezout coefficients for `target` over integer generators.
fn integer_combination(target: i128, gens: &[i128]) -> Option<Vec<i128>> {
    let mut g = 0i128;
    let mut coeffs: Vec<i128> = vec![0; gens.len()];
    for (i, h) in gens.iter().enumerate() {
        let ext = g.extended_gcd(h);
        for c in coeffs.iter_mut().take(i) {
            *c *= ext.x;
        }
        coeffs[i] = ext.y;
        g = ext.gcd;
    }
    if g == 0 || target % g != 0 {
        return None;
    }
    let k = target / g;
    Some(coeffs.into_iter().map(|c| c * k).collect())
}

/// Search `h^n = Σ aᵢhᵢ` over a builtin base with `h` the product of the
/// inverted primes.
pub fn partition_certificate(b: &BpRef, hs: &[Monomial]) -> Option<PartitionCertificate> {
    if !b.is_pure_builtin() {
        return None;
    }
    let h = inverted_product(b)?;
    let values: Vec<i128> = hs.iter().map(|m| m.coeff().and_then(integer_value)).collect::<Option<_>>()?;
    let max_n = if h == 1 { 0 } else { MAX_PARTITION_EXPONENT };
    for n in 0..=max_n {
        let target = h.checked_pow(n)? as i128;
        let coeffs: Option<Vec<i128>> = match b.domain().builtin {
            Builtin::Nat => {
                let gens: Option<Vec<u128>> = values.iter().map(|v| u128::try_from(*v).ok()).collect();
                semigroup_represent(target as u128, &gens?).map(|c| c.into_iter().map(|x| x as i128).collect())
            }
            Builtin::Int => integer_combination(target, &values),
            _ => None,
        };
        if let Some(c) = coeffs {
            return Some(PartitionCertificate {
                h: h.to_string(),
                n,
                coefficients: c.iter().map(|x| x.to_string()).collect(),
            });
        }
    }
    None
}

/// Replay a conservativity certificate exactly.
pub fn check_conservative(b: &BpRef, hs: &[Monomial], cert: &ConservativeCertificate, bounds: &SearchBounds) -> bool {
    match cert {
        ConservativeCertificate::UnitInCover { index, inverse } => {
            let (Some(h), Ok(inv)) = (hs.get(*index), b.parse(inverse)) else { return false };
            b.eq_elements(&b.mul(h, &inv), &Monomial::one(), bounds) == Some(true)
        }
        ConservativeCertificate::Partition(p) => {
            let parse = |s: &str| s.parse::<i128>().ok().map(|v| Monomial::scalar(Coeff::from_integer(v)));
            let (Some(h), true) = (parse(&p.h), p.coefficients.len() == hs.len()) else { return false };
            let Some(coeffs) = p.coefficients.iter().map(|c| parse(c)).collect::<Option<Vec<_>>>() else { return false };
            if !h.coeff().is_some_and(|c| b.domain().is_unit(c)) || coeffs.iter().any(|c| b.monoid.check(c).is_err()) {
                return false;
            }
            let lhs = FormalSum::single(b.normalize(&h.pow_raw(p.n, b.domain())));
            let rhs = normalize_terms(&b.monoid, coeffs.iter().zip(hs).map(|(a, h)| b.mul(a, h)).collect());
            related(b, &lhs, &rhs, bounds).is_proved()
        }
    }
}

/// First compatible tuple outside the image of `σ` with a certificate.
fn first_non_image_section(cover: &BasicCover) -> Option<SectionTuple> {
    let b = &cover.base;
    let image: HashSet<Vec<Monomial>> =
        b.monoid.enumerate(&b.monoid.all_atoms(), SECTION_DEGREE + 2).iter().map(|m| cover.sigma_tuple(m)).collect();
    let mut tuples = sections(cover, SECTION_DEGREE);
    tuples.sort_by_key(|t| (t.components.iter().map(|m| m.degree()).sum::<u32>(), t.components.clone()));
    tuples
        .into_iter()
        .filter(|t| !image.contains(&t.components))
        .find(|t| non_image_certificate(cover, t).is_some())
}

/// Decide whether the cover `{U_hᵢ}` of `Spec B` is conservative.
pub fn conservativity(b: &BpRef, hs: &[Monomial], bounds: &SearchBounds) -> ConservativityResult {
    let hs: Vec<Monomial> = hs.iter().map(|h| b.normalize(h)).collect();
    if hs.is_empty() || hs.iter().any(|h| h.is_zero()) {
        return Verdict::Unknown(Exhausted::new("input", "cover elements must be nonzero"));
    }
    for (index, h) in hs.iter().enumerate() {
        if let Some(inv) = unit_inverse(b, h, bounds) {
            return Verdict::Proved(ConservativeCertificate::UnitInCover { index, inverse: b.show(&inv) });
        }
    }
    if let Some(p) = partition_certificate(b, &hs) {
        return Verdict::Proved(ConservativeCertificate::Partition(p));
    }
    if b.is_pure_builtin() {
        if let Ok(w) = scaling_witness(b, &hs, bounds) {
            return Verdict::Refuted(w);
        }
    } else if let Ok(cover) = BasicCover::new(b, &hs, bounds) {
        if let Some(s) = first_non_image_section(&cover) {
            if let Ok(w) = glued_section_witness(&cover, &s, bounds) {
                return Verdict::Refuted(w);
            }
        }
    }
    if let Ok(spec) = prime_ideals(b) {
        for x in spec.materialize(b, max_prime(b, &hs)) {
            if let Ok(TorsionOutcome::Witness { witness }) = torsion_point_witness(b, &hs, &x, bounds) {
                return Verdict::Refuted(witness);
            }
        }
    }
    Verdict::Unknown(Exhausted::new("witnesses", "no partition certificate and no witness found"))
}
