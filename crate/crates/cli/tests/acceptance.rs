//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use blue_cli::report::{Report, Status};
use blue_cli::resolve::Env;
use blue_core::blueprint::{
    blueprint_from_text, is_localization, localization_map, localize, related, tensor_blueprints, tensor_universal_map, BlueprintMorphism,
    BpRef,
};
use blue_core::arith::CoeffDomain;
use blue_core::corpus::{basic_presentation, bex, f1, int, nat, nat_presentation, projective_line_pair};
use blue_core::functors::{common_refinement, functor_f, relative_equal, replay_algebraic_certificate, replay_legs, CoverBudget};
use blue_core::module::{free_module, is_module_iso, tensor_modules, BlueModule, ModuleMorphism};
use blue_core::monoid::Monomial;
use blue_core::presentation::{
    atlas, check_refinement, check_universal_property, fibre_product_presentations, glue, presentations_isomorphic, AffinePresentation,
    PresentationMorphism, Site,
};
use blue_core::sections::global_sections;
use blue_core::spectra::{basic_open, prime_ideals, spec_morphism};
use blue_core::sum::FormalSum;
use blue_core::verdict::{SearchBounds, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn bounds() -> SearchBounds {
    SearchBounds::default()
}

fn temp(name: &str, contents: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("blu-acceptance-{}-{name}", std::process::id()));
    std::fs::write(&p, contents).expect("temp file");
    p
}

/// Run the CLI in-process and return its report.
fn cli(args: &[&str]) -> Result<Report, String> {
    let out = blue_cli::run(std::iter::once("blu").chain(args.iter().copied()));
    out.report.ok_or_else(|| format!("`{}` produced no report: {}", args.join(" "), out.stderr))
}

fn expect(args: &[&str], status: Status) -> Result<Report, String> {
    let r = cli(args)?;
    ensure!(r.verdict == status, "`{}` gave {:?}, expected {:?}: {:?}", args.join(" "), r.verdict, status, r.summary);
    ensure!(r.exit_code == status.exit_code(), "`{}` exit code {}", args.join(" "), r.exit_code);
    Ok(r)
}

/// Feed a report back through `check --replay`.
fn replays(r: &Report, name: &str) -> Result<(), String> {
    let path = temp(name, &r.to_json());
    let back = cli(&["check", "--replay", path.to_str().unwrap()])?;
    ensure!(back.verdict == Status::Proved, "report `{}` did not replay: {}", r.args.join(" "), back.evidence);
    Ok(())
}

fn text(v: &Value) -> String {
    v.as_str().map(String::from).unwrap_or_else(|| v.to_string())
}

fn bp(atoms: &[&str], rels: &[&str]) -> BpRef {
    Arc::new(blueprint_from_text(CoeffDomain::f1(), atoms, rels, &bounds()).expect("blueprint"))
}

fn criterion_1() -> Outcome {
    let r = expect(&["is-global", "B_ex"], Status::Refuted)?;
    let name = text(&r.evidence["result"]["evidence"]["section"]["name"]);
    let b = bex();
    let g = global_sections(&b, &bounds()).map_err(|e| e.to_string())?;
    let gamma = &g.gamma;
    let s = gamma.atom(&name).map_err(|e| e.to_string())?;
    let el = |t: &str| gamma.parse(t).unwrap();
    ensure!(gamma.eq_elements(&gamma.mul(&el("g"), &s), &el("a"), &bounds()) == Some(true), "g*s != a in ΓB");
    ensure!(gamma.eq_elements(&gamma.mul(&el("h"), &s), &el("b"), &bounds()) == Some(true), "h*s != b in ΓB");
    let ab = gamma.parse_sum("a + b").map_err(|e| e.to_string())?;
    ensure!(related(gamma, &FormalSum::single(s), &ab, &bounds()).is_proved(), "s is not related to a + b");
    replays(&r, "c1-global.json")?;
    let c = expect(&["conservativity", "B_ex", "--cover", "g,h"], Status::Refuted)?;
    replays(&c, "c1-cons.json")?;
    let a = expect(&["check-algebraic", "Bex_cover"], Status::Proved)?;
    replays(&a, "c1-alg.json")?;
    Ok(format!("section {name} with g*{name} = a, h*{name} = b, {name} = a + b; cover {{U_g, U_h}} not conservative; {{U_g, U_h, U_gh}} algebraic"))
}

fn criterion_2() -> Outcome {
    let f = BlueprintMorphism::new(nat(), int(), vec![]).map_err(|e| e.to_string())?;
    let zp = prime_ideals(&int()).map_err(|e| e.to_string())?.materialize(&int(), 100);
    let np: BTreeSet<_> = prime_ideals(&nat()).map_err(|e| e.to_string())?.materialize(&nat(), 100).into_iter().collect();
    let m = spec_morphism(&f, &zp);
    let images: BTreeSet<_> = m.pairs.iter().map(|(_, p)| p.clone()).collect();
    ensure!(m.injective && images == np, "Spec Z -> Spec N is not a bijection on points up to 100");
    ensure!(np.len() == 26, "expected (0) and 25 primes, found {} points", np.len());

    let samples = 24;
    let r = expect(&["--seed", "2024", "conservativity", "N", "--sample", &samples.to_string()], Status::Refuted)?;
    for s in r.evidence["samples"].as_array().ok_or("no samples")? {
        let cover: Vec<u64> = s["cover"].as_array().unwrap().iter().map(|h| text(h).parse().unwrap()).collect();
        ensure!(cover.iter().all(|h| (2..=50).contains(h)), "cover {cover:?} outside [2, 50]");
        ensure!(s["result"]["verdict"] == "refuted", "cover {cover:?} not refuted");
        ensure!(s["result"]["evidence"]["kind"] == "scaling", "cover {cover:?} has no scaling witness");
        ensure!(s["replayed"] == true, "witness for {cover:?} does not validate");
    }
    replays(&r, "c2-sample.json")?;

    let c = expect(&["conservativity", "N6", "--cover", "10,21"], Status::Proved)?;
    let cert = &c.evidence["result"]["evidence"];
    let coeffs: Vec<String> = cert["coefficients"].as_array().ok_or("no coefficients")?.iter().map(text).collect();
    ensure!(text(&cert["h"]) == "6" && cert["n"] == 3 && coeffs == ["9", "6"], "certificate {cert}");
    ensure!(6u64.pow(3) == 9 * 10 + 6 * 21, "identity fails");
    replays(&c, "c2-n6.json")?;
    Ok(format!("{} points matched; {samples} sampled covers refuted by scaling witnesses; 6^3 = 9*10 + 6*21 replayed", np.len()))
}

/// Distinct elements of a finite blueprint.
fn elements(t: &BpRef) -> Vec<Monomial> {
    let mut out = vec![Monomial::Zero];
    for m in t.monoid.enumerate(&t.monoid.all_atoms(), 8) {
        let m = t.normalize(&m);
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

fn all_morphisms(s: &BpRef, t: &BpRef) -> Vec<BlueprintMorphism> {
    let elems = elements(t);
    let n = s.atoms().len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let images = idx.iter().map(|i| elems[*i].clone()).collect();
        if let Ok(f) = BlueprintMorphism::new(s.clone(), t.clone(), images) {
            if f.validate(&bounds()).is_proved() {
                out.push(f);
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            idx[k] += 1;
            if idx[k] < elems.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn criterion_3() -> Outcome {
    let plane = bp(&["x", "y"], &[]);
    let corpus: Vec<(BpRef, &str)> = vec![
        (bex(), "g"),
        (bex(), "h"),
        (bex(), "g*h"),
        (bex(), "a"),
        (bp(&["x"], &[]), "x"),
        (plane.clone(), "x*y"),
        (bp(&["x", "y"], &["x + y = 1"]), "x"),
        (bp(&["x"], &["x^2 = x"]), "x"),
        (nat(), "6"),
        (int(), "3"),
    ];
    for (b, h) in &corpus {
        let (_, canon) = localize(b, &[b.parse(h).unwrap()], &bounds()).map_err(|e| e.to_string())?;
        ensure!(is_localization(&canon, &bounds()).is_proved(), "B -> B[1/{h}] not certified");
    }
    let x = bp(&["x"], &[]);
    let free_f1 = BlueprintMorphism::new(f1(), x, vec![]).unwrap();
    ensure!(is_localization(&free_f1, &bounds()).is_refuted(), "F1 -> F1[x] not refuted");
    let nx = Arc::new(blueprint_from_text(CoeffDomain::nat(), &["x"], &[], &bounds()).unwrap());
    let free_n = BlueprintMorphism::new(nat(), nx, vec![]).unwrap();
    ensure!(is_localization(&free_n, &bounds()).is_refuted(), "N -> N[x] not refuted");

    let mut targets = Vec::new();
    for n in 1..8 {
        targets.push(bp(&["u"], &[&format!("u^{n} = 1")]));
        targets.push(bp(&["u"], &[&format!("u^{n} = 0")]));
    }
    targets.push(bp(&["u", "v"], &["u*v = 1", "u^3 = 1"]));
    targets.retain(|t| elements(t).len() <= 8);
    let sources = [(bp(&["x"], &[]), "x"), (plane, "x"), (bp(&["x", "y"], &["x + y = 1"]), "x")];
    let mut pairs = 0;
    for (b, h) in &sources {
        let (l, canon) = localize(b, &[b.parse(h).unwrap()], &bounds()).unwrap();
        for t in &targets {
            let homs = all_morphisms(&l, t);
            for (i, p) in homs.iter().enumerate() {
                for q in &homs[i + 1..] {
                    pairs += 1;
                    if canon.then(p).agrees_with(&canon.then(q), &bounds()) == Some(true) {
                        ensure!(p.agrees_with(q, &bounds()) == Some(true), "two maps out of a localization agree on the base but differ");
                    }
                }
            }
        }
    }
    Ok(format!("10 localizations certified, 2 free extensions refuted, {pairs} morphism pairs into {} finite targets", targets.len()))
}

fn identity_both_ways(f: &BlueprintMorphism, g: &BlueprintMorphism) -> bool {
    f.validate(&bounds()).is_proved()
        && g.validate(&bounds()).is_proved()
        && f.then(g).is_identity_on_atoms(&bounds()) == Some(true)
        && g.then(f).is_identity_on_atoms(&bounds()) == Some(true)
}

fn module_iso(f: &ModuleMorphism) -> bool {
    f.validate(&bounds()).is_proved()
        && match is_module_iso(f, &bounds()) {
            Verdict::Proved(p) => p.inverse.validate(&bounds()).is_proved() && f.then(&p.inverse).is_identity(&bounds()) == Some(true),
            _ => false,
        }
}

const MODULES: &str = "
blueprint Nil = F1[x] / { x^3 = 0 }
module M1 over N = <X>
module M2 over N = <X1, X2> / { 2*X2 = 3*X1 }
module M3 over N = <X> / { 2*X = * }
module M4 over A1 = <X>
module M5 over A1 = <X, Y> / { x*X = x*Y }
module M6 over B_ex = <X>
module M7 over B_ex = <X> / { g*X = * }
module M8 over Z = <X, Y>
module M9 over Nil = <X> / { x^2*X = * }
module M10 over N6 = <X1, X2> / { 2*X2 = 3*X1 }
";

fn criterion_4() -> Outcome {
    let cases: Vec<(BpRef, &str, &str)> =
        vec![(bex(), "g", "h"), (bex(), "a", "g"), (bp(&["x", "y"], &[]), "x", "y"), (nat(), "2", "3"), (int(), "2", "5")];
    for (b, g, h) in &cases {
        let run = || -> blue_core::error::Result<bool> {
            let (lg, cg) = localize(b, &[b.parse(g)?], &bounds())?;
            let (lh, ch) = localize(b, &[b.parse(h)?], &bounds())?;
            let t = tensor_blueprints(&cg, &ch, &bounds())?;
            let (l, cgh) = localize(b, &[b.mul(&b.parse(g)?, &b.parse(h)?)], &bounds())?;
            let into = tensor_universal_map(&t, &localization_map(&lg, &cgh, &bounds())?, &localization_map(&lh, &cgh, &bounds())?, &bounds())?;
            let Verdict::Proved(into) = into else { return Ok(false) };
            let back = localization_map(&l, &cg.then(&t.left), &bounds())?;
            Ok(identity_both_ways(&into, &back))
        };
        ensure!(run().map_err(|e| e.to_string())?, "B[1/{g}] (x) B[1/{h}] is not B[1/{g}{h}]");
    }

    let samplers: Vec<BpRef> = vec![bex(), bp(&["x", "y"], &[]), nat(), bp(&["x", "y"], &["x + y = 1"]), bp(&["x"], &["x^2 = x"])];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..50 {
        let b = &samplers[k % samplers.len()];
        let pick = |rng: &mut ChaCha8Rng| -> Monomial {
            if b.is_pure_builtin() {
                b.parse(&rng.gen_range(2..=50).to_string()).unwrap()
            } else {
                let pool = b.monoid.enumerate(&b.monoid.all_atoms(), 2);
                b.normalize(&pool[rng.gen_range(0..pool.len())])
            }
        };
        let (g, h) = (pick(&mut rng), pick(&mut rng));
        let points = prime_ideals(b).map_err(|e| e.to_string())?.materialize(b, 50);
        let ug: BTreeSet<_> = basic_open(b, &points, &g).into_iter().collect();
        let uh: BTreeSet<_> = basic_open(b, &points, &h).into_iter().collect();
        let ugh: BTreeSet<_> = basic_open(b, &points, &b.mul(&g, &h)).into_iter().collect();
        ensure!(ug.intersection(&uh).cloned().collect::<BTreeSet<_>>() == ugh, "U_g ∩ U_h != U_gh for {} and {}", b.show(&g), b.show(&h));
    }

    let env = Env::new(Some(("modules.blu", MODULES)), bounds()).map_err(|e| e.to_string())?;
    for k in 1..=10 {
        let m = env.module(&format!("M{k}")).map_err(|e| e.to_string())?;
        let unit = free_module(&m.base, &["E"]).map_err(|e| e.to_string())?;
        let me = tensor_modules(&m, &unit, &bounds()).map_err(|e| e.to_string())?;
        let to_m = ModuleMorphism::new(&me, &m, (0..m.rank()).map(|i| m.generator(i)).collect()).map_err(|e| e.to_string())?;
        ensure!(module_iso(&to_m), "M{k} (x) B -> M{k} is not an iso");
        let other: Arc<BlueModule> = Arc::new(free_module(&m.base, &["P", "Q"]).map_err(|e| e.to_string())?);
        let mn = tensor_modules(&m, &other, &bounds()).map_err(|e| e.to_string())?;
        let nm = tensor_modules(&other, &m, &bounds()).map_err(|e| e.to_string())?;
        let (rm, rn) = (m.rank(), other.rank());
        let swap = |src: &BlueModule, dst: &BlueModule, ra: usize, rb: usize| {
            let images = (0..ra * rb).map(|k| dst.generator((k % rb) * ra + k / rb)).collect();
            ModuleMorphism::new(src, dst, images)
        };
        let there = swap(&mn, &nm, rm, rn).map_err(|e| e.to_string())?;
        ensure!(module_iso(&there), "M{k} (x) N -> N (x) M{k} is not an iso");
    }
    Ok("5 tensor/localization isos, 50 basic-open intersections, 10 modules with unit and symmetry isos".into())
}

const COCYCLE: &str = "
morphism flip : A1 -> T { x -> x_inv }
presentation Good { charts X1 = A1, X2 = A1, X3 = A1, X12 = T, X13 = T, X23 = T;
  arrows X12 -> X1 = tx, X12 -> X2 = tx, X13 -> X1 = tx, X13 -> X3 = tx, X23 -> X2 = tx, X23 -> X3 = tx; }
presentation Twisted { charts X1 = A1, X2 = A1, X3 = A1, X12 = T, X13 = T, X23 = T;
  arrows X12 -> X1 = tx, X12 -> X2 = tx, X13 -> X1 = tx, X13 -> X3 = tx, X23 -> X2 = tx, X23 -> X3 = flip; }
presentation Bex3 = cover B_ex by g, h, g*h
presentation A = atlas P1
presentation F1_two = cover F1 by 1, 1
presentation A1_two = cover A1 by 1, x
";

const PLANE_OPENS: [&str; 5] = ["x", "y", "x*y", "x^2", "1"];

fn criterion_5() -> Outcome {
    let env = Env::new(Some(("cocycle.blu", COCYCLE)), bounds()).map_err(|e| e.to_string())?;
    let cases = ["P1", "Bex_cover", "Bex3", "N_cover", "Good"];
    for name in cases {
        let u = env.presentation(name).map_err(|e| e.to_string())?.presentation.clone();
        let (a, phi) = atlas(&u);
        let (aa, _) = atlas(&a);
        ensure!(presentations_isomorphic(&aa, &a, &bounds()).is_some(), "atlas of {name} is not idempotent");
        ensure!(check_refinement(&phi, &bounds()).is_proved(), "atlas morphism of {name} is not a refinement");
    }
    let doc = temp("cocycle.blu", COCYCLE);
    let file = doc.to_str().unwrap();
    expect(&["--file", file, "check-presentation", "Good"], Status::Proved)?;
    let bad = expect(&["--file", file, "check-presentation", "Twisted"], Status::Refuted)?;
    ensure!(bad.evidence["result"]["evidence"]["kind"] == "cocycle", "twisted diagram fails for another reason: {}", bad.evidence);

    let plane = bp(&["x", "y"], &[]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let subset = |rng: &mut ChaCha8Rng| -> Vec<&str> {
        loop {
            let s: Vec<&str> = PLANE_OPENS.iter().filter(|_| rng.gen_bool(0.5)).copied().collect();
            if !s.is_empty() {
                return s;
            }
        }
    };
    for _ in 0..10 {
        let (l, r) = (subset(&mut rng), subset(&mut rng));
        let run = || -> blue_core::error::Result<bool> {
            let (_, phi) = basic_presentation(&plane, &l, Site::Blue, &bounds())?;
            let (_, psi) = basic_presentation(&plane, &r, Site::Blue, &bounds())?;
            let fp = fibre_product_presentations(&phi, &psi, &bounds())?;
            let (ci, cj) = (rng.clone().gen_range(0..l.len()), rng.clone().gen_range(0..r.len()));
            let extra = plane.parse(PLANE_OPENS[rng.clone().gen_range(0..PLANE_OPENS.len())])?;
            let h = plane.mul(&plane.mul(&plane.parse(l[ci])?, &plane.parse(r[cj])?), &extra);
            let (t, canon) = localize(&plane, &[h], &bounds())?;
            let tp = AffinePresentation::affine(Site::Blue, "T", t);
            let alpha = PresentationMorphism::new(&tp, &phi.source, vec![ci], vec![localization_map(&phi.source.objects[ci], &canon, &bounds())?])?;
            let beta = PresentationMorphism::new(&tp, &psi.source, vec![cj], vec![localization_map(&psi.source.objects[cj], &canon, &bounds())?])?;
            Ok(fp.presentation.objects.len() == phi.source.objects.len() * psi.source.objects.len()
                && check_universal_property(&fp, &phi, &psi, &[(alpha, beta)], &bounds()) == Verdict::Proved(1))
        };
        ensure!(run().map_err(|e| e.to_string())?, "fibre product of covers {l:?} and {r:?} is not universal");
        rng.gen::<u64>();
    }
    Ok("atlas idempotent and refining on 5 presentations; twisted overlap refuted by the cocycle check; 10 fibre products universal".into())
}

fn criterion_6() -> Outcome {
    let env = Env::new(Some(("cocycle.blu", COCYCLE)), bounds()).map_err(|e| e.to_string())?;
    let p1 = env.presentation("P1").map_err(|e| e.to_string())?;
    let x = glue(&p1.presentation, &bounds()).map_err(|e| e.to_string())?;
    ensure!(x.len() == 3 && x.closed_points().len() == 2, "P1 glues to {} points, {} closed", x.len(), x.closed_points().len());
    for name in ["SpecF1", "SpecA1", "P1", "Bex_cover"] {
        expect(&["compare-gf", name], Status::Proved)?;
    }
    let (u, v, _) = projective_line_pair(Site::Blue);
    let pairs: Vec<(&str, AffinePresentation, AffinePresentation)> = vec![
        ("Spec F1", env.presentation("SpecF1").unwrap().presentation.clone(), env.presentation("F1_two").unwrap().presentation.clone()),
        ("Spec F1[x]", env.presentation("SpecA1").unwrap().presentation.clone(), env.presentation("A1_two").unwrap().presentation.clone()),
        ("P1", u, v),
        ("B_ex", env.presentation("Bex_cover").unwrap().presentation.clone(), env.presentation("Bex3").unwrap().presentation.clone()),
    ];
    for (name, a, b) in &pairs {
        ensure!(a.objects.len() != b.objects.len(), "the two presentations of {name} coincide");
        let ya = functor_f(a, &CoverBudget::default(), &bounds()).map_err(|e| format!("F on {name}: {e}"))?;
        let yb = functor_f(b, &CoverBudget::default(), &bounds()).map_err(|e| format!("F on {name}: {e}"))?;
        ensure!(relative_equal(&ya, &yb, &bounds()).is_proved(), "F depends on the presentation of {name}");
    }
    Ok("P1 glues to 3 points; G(F(X)) = X for 4 schemes; F independent of the presentation for 4 schemes".into())
}

fn criterion_7() -> Outcome {
    let (u, v, phi) = projective_line_pair(Site::Blue);
    let id = PresentationMorphism::identity(&u);
    let c = common_refinement(&id, &phi, &CoverBudget::default(), &bounds()).map_err(|e| e.to_string())?;
    let n = c.to_left.components.len();
    ensure!(c.legs.len() == 2 * n, "missing leg certificates");
    ensure!(replay_legs(&c.to_left, &c.legs[..n], &bounds()) && replay_legs(&c.to_right, &c.legs[n..], &bounds()), "P1 legs do not replay");
    ensure!(replay_algebraic_certificate(&c.presentation, &c.certificate, &bounds()), "P1 certificate does not replay");
    ensure!(v.objects.len() == 6, "unexpected refinement shape");
    let doc = temp("refine.blu", COCYCLE);
    let file = doc.to_str().unwrap();
    let mut legs = c.legs.len();
    for (l, r) in [("P1", "A"), ("Bex_cover", "Bex3")] {
        let rep = expect(&["--file", file, "refine", l, r], Status::Proved)?;
        ensure!(rep.evidence["legs_replayed"] == true, "legs of {l}, {r} do not replay");
        legs += rep.evidence["legs"].as_array().map_or(0, |a| a.len());
        replays(&rep, &format!("c7-{l}.json"))?;
    }
    Ok(format!("3 common refinements, {legs} legs certified as finite localizations, all certificates replayed"))
}

fn criterion_8() -> Outcome {
    let u = nat_presentation(Site::Blue);
    let y = functor_f(&u, &CoverBudget::default(), &bounds()).map_err(|e| e.to_string())?;
    let rep = &y.representative;
    let maximal = rep.maximal();
    ensure!(maximal.len() >= 2, "only {} maximal chart(s)", maximal.len());
    ensure!(maximal.iter().all(|i| *rep.objects[*i] != *nat()), "a maximal chart is Spec N itself");
    let r = expect(&["check-algebraic", "SpecN"], Status::Refuted)?;
    replays(&r, "c8.json")?;
    let names: Vec<&str> = maximal.iter().map(|i| rep.names[*i].as_str()).collect();
    Ok(format!("maximal charts {names:?}; Spec N has no algebraic basis"))
}

fn main() {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("non-global example", criterion_1),
        ("Spec N analysis", criterion_2),
        ("flat epimorphisms are localizations", criterion_3),
        ("localization and tensor algebra", criterion_4),
        ("presentation calculus", criterion_5),
        ("gluing and comparison", criterion_6),
        ("common refinement", criterion_7),
        ("F(Spec N) is not affine", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
