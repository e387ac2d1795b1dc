//! Subcommands and their reports.

use std::path::PathBuf;
use std::sync::Arc;

use blue_core::blueprint::{is_localization, localize, tensor_blueprints, Blueprint, BlueprintMorphism, BpRef};
use blue_core::conservativity::{check_conservative, check_witness, conservativity, ConservativityResult};
use blue_core::error::Error;
use blue_core::functors::{
    check_algebraic_presentation, common_refinement, compare_gf, functor_f, functor_g, relative_equal, replay_algebraic_certificate,
    replay_legs, AlgebraicPresentationCertificate, CoverBudget,
};
use blue_core::module::{module_relations, tensor_modules, BlueModule};
use blue_core::monoid::Monomial;
use blue_core::presentation::{check_affine_presentation, check_refinement, glue, AffinePresentation, BlueScheme, Site};
use blue_core::sections::{check_non_image, global_sections, is_global, BasicCover, NewSection, NotGlobal};
use blue_core::spectra::{closed_points, minimal_open, prime_ideals, specializations, Spectrum};
use blue_core::verdict::{SearchBounds, Verdict};
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::prelude::PRELUDE;
use crate::report::{sha256, Provenance, Report, Status, SCHEMA};
use crate::resolve::{Env, Located, PresentationItem};

/// Largest rational prime listed for symbolic spectra.
const SPEC_PRIME_BOUND: u64 = 50;

#[derive(Debug, Parser)]
#[command(name = "blu", version, about = "Blueprints, spectra and affine presentations over F1")]
pub struct Cli {
    /// Document with declarations; the prelude is always available.
    #[arg(long, global = true)]
    pub file: Option<PathBuf>,
    /// Search limits, e.g. `degree=12,length=8,steps=100000`.
    #[arg(long, global = true, value_parser = parse_bounds)]
    pub bounds: Option<SearchBounds>,
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Parse and validate the document, or replay a saved report.
    Check {
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Prime ideals of a blueprint.
    Primes { blueprint: String },
    /// Points, specializations, closed points and minimal opens.
    Spec { blueprint: String },
    /// Localize a blueprint and certify the canonical map.
    Localize {
        blueprint: String,
        #[arg(long, value_delimiter = ',', required = true)]
        at: Vec<String>,
    },
    /// Global sections of the spectrum.
    Gamma { blueprint: String },
    /// Whether the globalization map is an isomorphism.
    IsGlobal { blueprint: String },
    /// Tensor product of two morphisms with a common source, or of two modules.
    Tensor { left: String, right: String },
    /// Whether a cover by basic opens detects module isomorphisms.
    Conservativity {
        blueprint: String,
        #[arg(long, value_delimiter = ',', conflicts_with = "sample")]
        cover: Vec<String>,
        /// Check this many random covers instead.
        #[arg(long)]
        sample: Option<usize>,
    },
    /// Check the affine presentation axioms.
    CheckPresentation { presentation: String },
    /// Check that a presentation is algebraic.
    CheckAlgebraic { presentation: String },
    /// Check a refinement, or build a common refinement of two presentations.
    Refine { presentation: String, other: Option<String> },
    /// Glue a presentation into a space.
    Glue { presentation: String },
    /// The relative scheme of an algebraic presentation.
    FunctorF {
        presentation: String,
        /// Compare with the relative scheme of another presentation.
        #[arg(long)]
        compare: Option<String>,
    },
    /// The blue scheme of the relative scheme of a presentation.
    FunctorG { presentation: String },
    /// Compare a presentation's space with G(F(.)).
    CompareGf { presentation: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Primes { .. } => "primes",
            Command::Spec { .. } => "spec",
            Command::Localize { .. } => "localize",
            Command::Gamma { .. } => "gamma",
            Command::IsGlobal { .. } => "is-global",
            Command::Tensor { .. } => "tensor",
            Command::Conservativity { .. } => "conservativity",
            Command::CheckPresentation { .. } => "check-presentation",
            Command::CheckAlgebraic { .. } => "check-algebraic",
            Command::Refine { .. } => "refine",
            Command::Glue { .. } => "glue",
            Command::FunctorF { .. } => "functor-f",
            Command::FunctorG { .. } => "functor-g",
            Command::CompareGf { .. } => "compare-gf",
        }
    }

    fn target(&self) -> Option<&str> {
        match self {
            Command::Check { .. } => None,
            Command::Primes { blueprint }
            | Command::Spec { blueprint }
            | Command::Localize { blueprint, .. }
            | Command::Gamma { blueprint }
            | Command::IsGlobal { blueprint }
            | Command::Conservativity { blueprint, .. } => Some(blueprint),
            Command::Tensor { left, .. } => Some(left),
            Command::CheckPresentation { presentation }
            | Command::CheckAlgebraic { presentation }
            | Command::Refine { presentation, .. }
            | Command::Glue { presentation }
            | Command::FunctorF { presentation, .. }
            | Command::FunctorG { presentation }
            | Command::CompareGf { presentation } => Some(presentation),
        }
    }
}

/// `key=value` pairs over `degree`, `length`, `steps`, `exponent`, `rules`.
pub fn parse_bounds(s: &str) -> Result<SearchBounds, String> {
    let mut b = SearchBounds::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, found `{part}`"))?;
        let n: u64 = v.trim().parse().map_err(|_| format!("`{v}` is not a nonnegative integer"))?;
        match k.trim() {
            "degree" => b.max_degree = n as u32,
            "length" => b.max_sum_length = n as usize,
            "steps" => b.max_steps = n as usize,
            "exponent" => b.max_localization_exponent = n as u32,
            "rules" => b.max_rules = n as usize,
            other => return Err(format!("unknown bound `{other}`; expected degree, length, steps, exponent or rules")),
        }
    }
    Ok(b)
}

/// What a command computed.
struct Computed {
    status: Status,
    summary: Vec<String>,
    evidence: Value,
}

enum Failure {
    Input(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Result of one invocation.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub report: Option<Report>,
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("evidence serializes")
}

fn verdict<P: Serialize, R: Serialize>(v: &Verdict<P, R>) -> (Status, Value) {
    (v.kind().into(), to_json(v))
}

pub fn describe_blueprint(b: &Blueprint) -> Value {
    json!({
        "coefficients": b.domain().describe(),
        "atoms": b.atoms(),
        "monoid_relations": b.monoid.relations.iter().map(|(l, r)| format!("{} = {}", b.show(l), b.show(r))).collect::<Vec<_>>(),
        "relations": b.generators.iter().map(|(l, r)| format!("{} = {}", b.show_sum(l), b.show_sum(r))).collect::<Vec<_>>(),
    })
}

fn describe_module(m: &BlueModule) -> Value {
    let a = &m.algebra;
    json!({
        "base_atoms": m.base.atoms(),
        "generators": m.generators,
        "relations": module_relations(m).iter().map(|(l, r)| format!("{} = {}", a.show_sum(l), a.show_sum(r))).collect::<Vec<_>>(),
    })
}

fn describe_morphism(f: &BlueprintMorphism) -> Value {
    Value::Object(f.describe().into_iter().map(|(k, v)| (k, Value::String(v))).collect())
}

pub fn describe_presentation(p: &AffinePresentation) -> Value {
    json!({
        "site": to_json(&p.site),
        "charts": p.names.iter().zip(&p.objects).map(|(n, b)| json!({"name": n, "blueprint": describe_blueprint(b)})).collect::<Vec<_>>(),
        "arrows": p.arrows.iter().map(|a| json!({
            "from": p.names[a.from],
            "to": p.names[a.to],
            "map": describe_morphism(&a.map),
        })).collect::<Vec<_>>(),
        "maximal": p.maximal().iter().map(|i| p.names[*i].clone()).collect::<Vec<_>>(),
    })
}

fn describe_scheme(x: &BlueScheme) -> Value {
    let show = |i: usize| x.show_point(i);
    json!({
        "points": (0..x.len()).map(show).collect::<Vec<_>>(),
        "specializations": x.specialization.iter().filter(|(a, b)| a != b).map(|(a, b)| format!("{} ~> {}", show(*a), show(*b))).collect::<Vec<_>>(),
        "closed_points": x.closed_points().into_iter().map(show).collect::<Vec<_>>(),
        "complete": x.complete,
    })
}

fn parse_elements(b: &BpRef, items: &[String]) -> Result<Vec<Monomial>, Failure> {
    items
        .iter()
        .map(|s| b.parse(s.trim()).map_err(|e| Failure::Input(format!("cannot read `{s}` in the blueprint: {e}"))))
        .collect()
}

fn located(env: &Env) -> impl Fn(Located) -> Failure + '_ {
    move |e| Failure::Input(env.render(&e))
}

fn finite_spectrum(b: &Blueprint, spec: &Spectrum) -> Spectrum {
    Spectrum { points: spec.materialize(b, SPEC_PRIME_BOUND), symbolic: None, complete: spec.complete }
}

fn spectrum_summary(b: &Blueprint, spec: &Spectrum) -> Vec<String> {
    let mut s = vec![format!("{} point(s) listed", spec.materialize(b, SPEC_PRIME_BOUND).len())];
    if let Some(fam) = &spec.symbolic {
        s.push(format!(
            "plus one point (P, q) for each of {} atom part(s) P and every rational prime q not inverted; primes up to {SPEC_PRIME_BOUND} listed",
            fam.atom_parts.len()
        ));
    }
    if !spec.complete {
        s.push("some candidates were undecided; the list may be incomplete".into());
    }
    s
}

fn run_conservativity(b: &BpRef, hs: &[Monomial], bounds: &SearchBounds) -> (ConservativityResult, bool) {
    let r = conservativity(b, hs, bounds);
    let replayed = match &r {
        Verdict::Proved(c) => check_conservative(b, hs, c, bounds),
        Verdict::Refuted(w) => check_witness(b, w, bounds),
        Verdict::Unknown(_) => true,
    };
    (r, replayed)
}

fn sample_cover(b: &BpRef, rng: &mut ChaCha8Rng) -> Vec<Monomial> {
    let size = rng.gen_range(2..=3);
    if b.is_pure_builtin() {
        return (0..size).map(|_| b.parse(&rng.gen_range(2u64..=50).to_string()).expect("integer")).collect();
    }
    let pool: Vec<Monomial> = b
        .monoid
        .enumerate(&b.monoid.all_atoms(), 2)
        .into_iter()
        .map(|m| b.normalize(&m))
        .filter(|m| !m.is_zero() && m.degree() > 0)
        .collect();
    (0..size).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect()
}

fn with_presentation(env: &Env, name: &str) -> Result<Arc<PresentationItem>, Failure> {
    env.presentation(name).map_err(located(env))
}

fn same_presentation(u: &AffinePresentation, v: &AffinePresentation) -> bool {
    u.objects.len() == v.objects.len()
        && u.objects.iter().zip(&v.objects).all(|(a, b)| Arc::ptr_eq(a, b) || **a == **b)
        && u.arrows.len() == v.arrows.len()
        && u.arrows.iter().zip(&v.arrows).all(|(a, b)| a.from == b.from && a.to == b.to)
}

fn execute(cmd: &Command, env: &Env, seed: u64) -> Result<Computed, Failure> {
    let bounds = env.bounds();
    let budget = CoverBudget::default();
    let ok = |summary: Vec<String>, evidence: Value| Ok(Computed { status: Status::Ok, summary, evidence });
    match cmd {
        Command::Check { .. } => {
            let mut decls = Vec::new();
            let mut status = Status::Proved;
            for at in env.user_decls() {
                let d = env.decl(at);
                let item = env.build(at).map_err(located(env))?;
                let mut entry = json!({"name": d.name.text, "kind": item.kind()});
                if let crate::resolve::Item::Morphism(f) = &item {
                    let v = f.validate(bounds);
                    status = match (status, v.kind().into()) {
                        (Status::Refuted, _) | (_, Status::Refuted) => Status::Refuted,
                        (Status::Unknown, _) | (_, Status::Unknown) => Status::Unknown,
                        _ => Status::Proved,
                    };
                    entry["validation"] = to_json(&v);
                }
                decls.push(entry);
            }
            let summary = vec![format!("{} declaration(s) resolved", decls.len())];
            Ok(Computed { status, summary, evidence: json!({"declarations": decls}) })
        }
        Command::Primes { blueprint } => {
            let b = env.blueprint(blueprint).map_err(located(env))?;
            let spec = prime_ideals(&b)?;
            let listed = spec.materialize(&b, SPEC_PRIME_BOUND);
            ok(
                spectrum_summary(&b, &spec),
                json!({
                    "points": listed.iter().map(|p| p.show(&b)).collect::<Vec<_>>(),
                    "symbolic": spec.symbolic.is_some(),
                    "complete": spec.complete,
                }),
            )
        }
        Command::Spec { blueprint } => {
            let b = env.blueprint(blueprint).map_err(located(env))?;
            let spec = prime_ideals(&b)?;
            let fin = finite_spectrum(&b, &spec);
            let show = |i: usize| fin.points[i].show(&b);
            let mut opens = serde_json::Map::new();
            for p in &fin.points {
                let u = minimal_open(&fin, p)?;
                opens.insert(p.show(&b), json!(u.iter().map(|q| q.show(&b)).collect::<Vec<_>>()));
            }
            ok(
                spectrum_summary(&b, &spec),
                json!({
                    "points": (0..fin.points.len()).map(show).collect::<Vec<_>>(),
                    "specializations": specializations(&fin).into_iter().map(|(i, j)| format!("{} ~> {}", show(i), show(j))).collect::<Vec<_>>(),
                    "closed_points": closed_points(&fin).iter().map(|p| p.show(&b)).collect::<Vec<_>>(),
                    "minimal_opens": opens,
                }),
            )
        }
        Command::Localize { blueprint, at } => {
            let b = env.blueprint(blueprint).map_err(located(env))?;
            let gens = parse_elements(&b, at)?;
            let (l, canon) = localize(&b, &gens, bounds)?;
            let v = is_localization(&canon, bounds)
                .map(|p| p.s_generators.iter().map(|m| b.show(m)).collect::<Vec<_>>(), |f| f);
            let (status, result) = verdict(&v);
            Ok(Computed {
                status,
                summary: vec![format!("{} localized at {}", blueprint, at.join(", "))],
                evidence: json!({"localized": describe_blueprint(&l), "canonical_map": describe_morphism(&canon), "is_localization": result}),
            })
        }
        Command::Gamma { blueprint } => {
            let b = env.blueprint(blueprint).map_err(located(env))?;
            let g = global_sections(&b, bounds)?;
            let status = if g.complete { Status::Ok } else { Status::Unknown };
            Ok(Computed {
                status,
                summary: vec![format!("{} new section(s), enumerated to degree {}", g.new_sections.len(), g.degree)],
                evidence: json!({
                    "gamma": describe_blueprint(&g.gamma),
                    "sigma": describe_morphism(&g.sigma),
                    "cover": g.cover,
                    "new_sections": to_json(&g.new_sections),
                    "collisions": g.collisions,
                    "complete": g.complete,
                    "degree": g.degree,
                }),
            })
        }
        Command::IsGlobal { blueprint } => {
            let b = env.blueprint(blueprint).map_err(located(env))?;
            let v = is_global(&b, bounds);
            let (status, result) = verdict(&v);
            let mut evidence = json!({"result": result});
            let mut summary = vec![];
            if let Verdict::Refuted(NotGlobal::NonImageSection { section }) = &v {
                summary.push(format!("section {} = ({}) on ({}) is not in the image", section.name, section.tuple.shown.join(", "), section.tuple.cover.join(", ")));
                if let Ok(g) = global_sections(&b, bounds) {
                    evidence["gamma"] = describe_blueprint(&g.gamma);
                }
            }
            Ok(Computed { status, summary, evidence })
        }
        Command::Tensor { left, right } => match (env.kind_of(left), env.kind_of(right)) {
            (Some("morphism"), Some("morphism")) => {
                let f = env.morphism(left).map_err(located(env))?;
                let g = env.morphism(right).map_err(located(env))?;
                let t = tensor_blueprints(&f, &g, bounds)?;
                ok(
                    vec![format!("{left} (x) {right} over a common source")],
                    json!({"blueprint": describe_blueprint(&t.blueprint), "left": describe_morphism(&t.left), "right": describe_morphism(&t.right)}),
                )
            }
            (Some("module"), Some("module")) => {
                let m = env.module(left).map_err(located(env))?;
                let n = env.module(right).map_err(located(env))?;
                let t = tensor_modules(&m, &n, bounds)?;
                ok(vec![format!("{left} (x) {right}")], json!({"module": describe_module(&t)}))
            }
            _ => Err(Failure::Input("tensor needs two morphisms with a common source or two modules".into())),
        },
        Command::Conservativity { blueprint, cover, sample } => {
            let b = env.blueprint(blueprint).map_err(located(env))?;
            if let Some(k) = sample {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut samples = Vec::new();
                let mut kinds = std::collections::BTreeSet::new();
                let mut all_replayed = true;
                for _ in 0..*k {
                    let hs = sample_cover(&b, &mut rng);
                    let (r, replayed) = run_conservativity(&b, &hs, bounds);
                    all_replayed &= replayed;
                    kinds.insert(Status::from(r.kind()).exit_code());
                    samples.push(json!({"cover": hs.iter().map(|h| b.show(h)).collect::<Vec<_>>(), "result": to_json(&r), "replayed": replayed}));
                }
                let status = match (kinds.len(), kinds.first()) {
                    (1, Some(0)) if all_replayed => Status::Proved,
                    (1, Some(1)) if all_replayed => Status::Refuted,
                    (0, _) => Status::Ok,
                    _ => Status::Unknown,
                };
                return Ok(Computed {
                    status,
                    summary: vec![format!("{k} sampled cover(s) with seed {seed}; every certificate replayed: {all_replayed}")],
                    evidence: json!({"seed": seed, "samples": samples}),
                });
            }
            if cover.is_empty() {
                return Err(Failure::Input("conservativity needs --cover or --sample".into()));
            }
            let hs = parse_elements(&b, cover)?;
            let (r, replayed) = run_conservativity(&b, &hs, bounds);
            let (status, result) = verdict(&r);
            let summary = vec![match &r {
                Verdict::Proved(_) => "conservative".to_string(),
                Verdict::Refuted(w) => format!("not conservative: {} witness", to_json(&w.kind).as_str().unwrap_or_default()),
                Verdict::Unknown(e) => format!("undecided: {}", e.detail),
            }];
            Ok(Computed { status, summary, evidence: json!({"cover": cover, "result": result, "replayed": replayed}) })
        }
        Command::CheckPresentation { presentation } => {
            let p = with_presentation(env, presentation)?;
            let (status, result) = verdict(&check_affine_presentation(&p.presentation, bounds));
            Ok(Computed { status, summary: vec![], evidence: json!({"presentation": describe_presentation(&p.presentation), "result": result}) })
        }
        Command::CheckAlgebraic { presentation } => {
            let p = with_presentation(env, presentation)?;
            let (status, result) = verdict(&check_algebraic_presentation(&p.presentation, &budget, bounds));
            Ok(Computed { status, summary: vec![], evidence: json!({"result": result}) })
        }
        Command::Refine { presentation, other: None } => {
            let p = with_presentation(env, presentation)?;
            let (status, result) = verdict(&check_refinement(&p.structure, bounds));
            let target = &p.structure.target;
            Ok(Computed {
                status,
                summary: vec![format!("structure morphism onto {} chart(s)", target.objects.len())],
                evidence: json!({"target": describe_presentation(target), "result": result}),
            })
        }
        Command::Refine { presentation, other: Some(other) } => {
            let p = with_presentation(env, presentation)?;
            let q = with_presentation(env, other)?;
            if !same_presentation(&p.structure.target, &q.structure.target) {
                return Err(Failure::Input(format!("{presentation} and {other} do not map to a common presentation")));
            }
            let c = common_refinement(&p.structure, &q.structure, &budget, bounds)?;
            let n = c.to_left.components.len();
            let replayed = replay_legs(&c.to_left, &c.legs[..n], bounds) && replay_legs(&c.to_right, &c.legs[n..], bounds);
            Ok(Computed {
                status: Status::Proved,
                summary: vec![format!("common refinement with {} chart(s), {} leg(s) certified", c.presentation.objects.len(), c.legs.len())],
                evidence: json!({
                    "refinement": describe_presentation(&c.presentation),
                    "legs": to_json(&c.legs),
                    "legs_replayed": replayed,
                    "certificate": to_json(&c.certificate),
                    "refinements": to_json(&c.refinements),
                }),
            })
        }
        Command::Glue { presentation } => {
            let p = with_presentation(env, presentation)?;
            let x = glue(&p.presentation, bounds)?;
            ok(vec![format!("{} point(s)", x.len())], describe_scheme(&x))
        }
        Command::FunctorF { presentation, compare } => {
            let p = with_presentation(env, presentation)?;
            let y = functor_f(&p.presentation, &budget, bounds)?;
            let mut evidence = json!({
                "representative": describe_presentation(&y.representative),
                "gamma": to_json(&y.gamma),
                "certificate": to_json(&y.certificate),
            });
            let maximal = y.representative.maximal().len();
            let mut summary = vec![format!("relative scheme with {} chart(s), {maximal} maximal", y.representative.objects.len())];
            let Some(other) = compare else { return ok(summary, evidence) };
            let q = with_presentation(env, other)?;
            let z = functor_f(&q.presentation, &budget, bounds)?;
            let (status, result) = verdict(&relative_equal(&y, &z, bounds));
            summary.push(format!("compared with F({other})"));
            evidence["comparison"] = result;
            Ok(Computed { status, summary, evidence })
        }
        Command::FunctorG { presentation } => {
            let p = with_presentation(env, presentation)?;
            let y = functor_f(&p.presentation, &budget, bounds)?;
            let x = functor_g(&y, bounds)?;
            ok(vec![format!("{} point(s)", x.len())], describe_scheme(&x))
        }
        Command::CompareGf { presentation } => {
            let p = with_presentation(env, presentation)?;
            let (status, result) = verdict(&compare_gf(&p.presentation.with_site(Site::Blue), &budget, bounds));
            Ok(Computed { status, summary: vec![], evidence: json!({"result": result}) })
        }
    }
}

fn core_failure(e: Error) -> (Status, String) {
    match e {
        Error::NotAlgebraicallyPresented(_) => (Status::Refuted, e.to_string()),
        Error::BoundExhausted(_)
        | Error::GammaFixpointNotReached(_)
        | Error::CanonicalCoverUnavailable(_)
        | Error::NotLocallyFinite
        | Error::Unsupported(_)
        | Error::RefinementNotFound(_) => (Status::Unknown, e.to_string()),
        _ => (Status::Error, e.to_string()),
    }
}

/// A document given on the command line or embedded in a report.
struct Document {
    origin: String,
    text: Option<String>,
}

fn provenance(env: &Env, doc: &Document, target: Option<&str>) -> Provenance {
    let decl = target.and_then(|t| env.canonical(t));
    Provenance {
        origin: doc.origin.clone(),
        document: doc.text.clone(),
        document_sha256: sha256(doc.text.as_deref().unwrap_or_default()),
        prelude_sha256: sha256(PRELUDE),
        target_sha256: decl.as_deref().map(sha256),
        target_declaration: decl,
    }
}

fn error_report(cmd: &Command, args: &[String], doc: &Document, bounds: SearchBounds, message: String) -> Report {
    Report {
        schema: SCHEMA.into(),
        command: cmd.name().into(),
        target: cmd.target().map(String::from),
        args: args.to_vec(),
        verdict: Status::Error,
        exit_code: Status::Error.exit_code(),
        summary: vec![message],
        evidence: json!({}),
        bounds,
        provenance: Provenance {
            origin: doc.origin.clone(),
            document: doc.text.clone(),
            document_sha256: sha256(doc.text.as_deref().unwrap_or_default()),
            prelude_sha256: sha256(PRELUDE),
            target_declaration: None,
            target_sha256: None,
        },
        notices: vec![],
    }
}

/// Run a parsed command against a document and build the report.
fn report_for(cli: &Cli, args: &[String], doc: &Document) -> Report {
    let bounds = cli.bounds.unwrap_or_default();
    let env = match Env::new(doc.text.as_deref().map(|t| (doc.origin.as_str(), t)), bounds) {
        Ok(env) => env,
        Err(e) => {
            let message = match e.scope {
                Some(crate::resolve::Scope::User) => {
                    e.error.render(&doc.origin, doc.text.as_deref().unwrap_or_default())
                }
                _ => e.to_string(),
            };
            return error_report(&cli.command, args, doc, bounds, message);
        }
    };
    let (status, summary, evidence) = match execute(&cli.command, &env, cli.seed) {
        Ok(c) => (c.status, c.summary, c.evidence),
        Err(Failure::Input(m)) => (Status::Error, vec![m], json!({})),
        Err(Failure::Core(e)) => {
            let (s, m) = core_failure(e);
            (s, vec![m], json!({}))
        }
    };
    Report {
        schema: SCHEMA.into(),
        command: cli.command.name().into(),
        target: cli.command.target().map(String::from),
        args: args.to_vec(),
        verdict: status,
        exit_code: status.exit_code(),
        summary,
        evidence,
        bounds,
        provenance: provenance(&env, doc, cli.command.target()),
        notices: env.notices(),
    }
}

/// Recompute a saved report and re-check its certificates.
fn replay(saved: &Report) -> Result<Computed, String> {
    if saved.schema != SCHEMA {
        return Err(format!("unsupported report schema `{}`", saved.schema));
    }
    let mut argv = vec!["blu".to_string()];
    argv.extend(saved.args.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| format!("recorded arguments do not parse: {e}"))?;
    if matches!(cli.command, Command::Check { replay: Some(_) }) {
        return Err("a replay report cannot be replayed".into());
    }
    let doc = Document { origin: saved.provenance.origin.clone(), text: saved.provenance.document.clone() };
    let mut mismatches = Vec::new();
    if sha256(doc.text.as_deref().unwrap_or_default()) != saved.provenance.document_sha256 {
        mismatches.push("document hash differs from the embedded document".to_string());
    }
    if sha256(PRELUDE) != saved.provenance.prelude_sha256 {
        mismatches.push("the prelude changed since the report was written".to_string());
    }
    let fresh = report_for(&cli, &saved.args, &doc);
    if fresh.verdict != saved.verdict {
        mismatches.push(format!("verdict {} differs from recorded {}", to_json(&fresh.verdict), to_json(&saved.verdict)));
    }
    if fresh.evidence != saved.evidence {
        mismatches.push("recomputed evidence differs".to_string());
    }
    let certificates = check_certificates(&cli, &doc, saved)?;
    mismatches.extend(certificates.iter().filter(|(_, ok)| !ok).map(|(what, _)| format!("{what} does not replay")));
    let status = if mismatches.is_empty() { Status::Proved } else { Status::Refuted };
    Ok(Computed {
        status,
        summary: vec![format!("replayed `{}` with recorded verdict {}", saved.args.join(" "), to_json(&saved.verdict).as_str().unwrap_or_default())],
        evidence: json!({
            "recorded_verdict": saved.verdict,
            "replayed_verdict": fresh.verdict,
            "certificates_checked": certificates.iter().map(|(w, ok)| json!({"certificate": w, "valid": ok})).collect::<Vec<_>>(),
            "mismatches": mismatches,
        }),
    })
}

fn from_evidence<T: serde::de::DeserializeOwned>(v: &Value) -> Result<T, String> {
    serde_json::from_value(v.clone()).map_err(|e| format!("malformed certificate: {e}"))
}

/// Independent checks of the certificates stored in a report.
fn check_certificates(cli: &Cli, doc: &Document, saved: &Report) -> Result<Vec<(String, bool)>, String> {
    let bounds = saved.bounds;
    let env = Env::new(doc.text.as_deref().map(|t| (doc.origin.as_str(), t)), bounds).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    match &cli.command {
        Command::Conservativity { blueprint, cover, sample: None } => {
            let b = env.blueprint(blueprint).map_err(|e| e.to_string())?;
            let hs = cover.iter().map(|h| b.parse(h.trim())).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
            let r: ConservativityResult = from_evidence(&saved.evidence["result"])?;
            match r {
                Verdict::Proved(c) => out.push(("conservativity certificate".into(), check_conservative(&b, &hs, &c, &bounds))),
                Verdict::Refuted(w) => out.push(("witness".into(), check_witness(&b, &w, &bounds))),
                Verdict::Unknown(_) => {}
            }
        }
        Command::IsGlobal { blueprint } if saved.verdict == Status::Refuted => {
            let b = env.blueprint(blueprint).map_err(|e| e.to_string())?;
            let refuted = &saved.evidence["result"]["evidence"];
            if refuted["kind"] == "non_image_section" {
                let section: NewSection = from_evidence(&refuted["section"])?;
                let hs = section.tuple.cover.iter().map(|h| b.parse(h)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
                let cover = BasicCover::new(&b, &hs, &bounds).map_err(|e| e.to_string())?;
                out.push(("non-image certificate".into(), check_non_image(&cover, &section.tuple, &section.certificate)));
            }
        }
        Command::CheckAlgebraic { presentation } if saved.verdict == Status::Proved => {
            let p = env.presentation(presentation).map_err(|e| e.to_string())?;
            let v: Verdict<AlgebraicPresentationCertificate, Value> =
                from_evidence(&saved.evidence["result"])?;
            if let Verdict::Proved(c) = v {
                out.push(("algebraic presentation certificate".into(), replay_algebraic_certificate(&p.presentation, &c, &bounds)));
            }
        }
        Command::Refine { presentation, other: Some(other) } if saved.verdict == Status::Proved => {
            let p = env.presentation(presentation).map_err(|e| e.to_string())?;
            let q = env.presentation(other).map_err(|e| e.to_string())?;
            let legs: Vec<blue_core::functors::LegCertificate> =
                from_evidence(&saved.evidence["legs"])?;
            let c = common_refinement(&p.structure, &q.structure, &CoverBudget::default(), &bounds).map_err(|e| e.to_string())?;
            let n = c.to_left.components.len();
            let ok = legs.len() == c.legs.len() && replay_legs(&c.to_left, &legs[..n], &bounds) && replay_legs(&c.to_right, &legs[n..], &bounds);
            out.push(("refinement legs".into(), ok));
            let cert: AlgebraicPresentationCertificate =
                from_evidence(&saved.evidence["certificate"])?;
            out.push(("refinement certificate".into(), replay_algebraic_certificate(&c.presentation, &cert, &bounds)));
        }
        _ => {}
    }
    Ok(out)
}

fn read_document(path: &Option<PathBuf>) -> Result<Document, String> {
    match path {
        None => Ok(Document { origin: "<prelude>".into(), text: None }),
        Some(p) => std::fs::read_to_string(p)
            .map(|text| Document { origin: p.display().to_string(), text: Some(text) })
            .map_err(|e| format!("cannot read {}: {e}", p.display())),
    }
}

fn finish(report: Report, json: bool) -> Outcome {
    let mut stderr = String::new();
    for n in &report.notices {
        stderr.push_str(&format!("notice: {n}\n"));
    }
    if report.verdict == Status::Error {
        for m in &report.summary {
            stderr.push_str(&format!("error: {m}\n"));
        }
    }
    let stdout = if json { report.to_json() + "\n" } else { report.render() };
    Outcome { exit_code: report.exit_code, stdout, stderr, report: Some(report) }
}

/// Run the program on an argument list that starts with the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { exit_code: 0, stdout: text, stderr: String::new(), report: None }
            } else {
                Outcome { exit_code: 3, stdout: String::new(), stderr: text, report: None }
            };
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let recorded: Vec<String> = strip_output_flags(&args);
    let doc = match read_document(&cli.file) {
        Ok(d) => d,
        Err(m) => return finish(error_report(&cli.command, &recorded, &Document { origin: String::new(), text: None }, cli.bounds.unwrap_or_default(), m), cli.json),
    };
    if let Command::Check { replay: Some(path) } = &cli.command {
        let bounds = cli.bounds.unwrap_or_default();
        let saved = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))
            .and_then(|t| serde_json::from_str::<Report>(&t).map_err(|e| format!("{} is not a report: {e}", path.display())));
        let computed = saved.and_then(|s| replay(&s));
        let report = match computed {
            Ok(c) => Report {
                schema: SCHEMA.into(),
                command: "check".into(),
                target: None,
                args: recorded,
                verdict: c.status,
                exit_code: c.status.exit_code(),
                summary: c.summary,
                evidence: c.evidence,
                bounds,
                provenance: Provenance {
                    origin: path.display().to_string(),
                    document: None,
                    document_sha256: sha256(""),
                    prelude_sha256: sha256(PRELUDE),
                    target_declaration: None,
                    target_sha256: None,
                },
                notices: vec![],
            },
            Err(m) => error_report(&cli.command, &recorded, &doc, bounds, m),
        };
        return finish(report, cli.json);
    }
    finish(report_for(&cli, &recorded, &doc), cli.json)
}

/// The recorded command line omits `--json` and the document path, which the
/// report embeds.
fn strip_output_flags(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--json" {
            continue;
        }
        if a == "--file" {
            skip = true;
            continue;
        }
        if a.starts_with("--file=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}
