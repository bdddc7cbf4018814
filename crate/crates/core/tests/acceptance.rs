//! Acceptance gate: runs each criterion and prints one PASS/FAIL line for it.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mvlog::engine::{build_eoptk, build_optk, verify_model, Fixpoint, QueryOutcome};
use mvlog::lp::{self, LinearForm, Status, VarId};
use mvlog::termination::is_weakly_acyclic_ve;
use mvlog::{
    crispify, oblivious_chase, parse, rule_gap, Engine, EngineOptions, GroundAtom, GroundTerm,
    Instance, NullId, Outcome, Rational, TruthAssignment, TruthDegree,
};
use num_traits::Zero;
use rand::Rng;

use common::{random_datalog, random_existential_instance, reference_closure, rng, DatalogShape};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const ORCA: &str = "0.8 :: label(i1, whale). 0.7 :: polar(i1). orca(X) :- label(X, whale), polar(X).";
const KEY_PERSON: &str = "company(acme). 0.8 :: kp(amy, acme). kp(Y, X) :- company(X).";
const NULLS: &str = "0.8 :: s(a). 0.2 :: t(a). p(X, Y) :- s(X). t(X) :- p(X, Y).";
const CLASH: &str = "r(a). 0.5 :: s(a). s(X) :- r(X).";

fn instance(text: &str, k: TruthDegree) -> Instance {
    let (p, db) = parse(text).expect("fixture parses");
    Instance::new(p, db, k).expect("fixture is well formed")
}

fn d(n: i64, m: i64) -> TruthDegree {
    TruthDegree::from_ratio(n, m).unwrap()
}

fn g(p: &str, args: &[&str]) -> GroundAtom {
    GroundAtom::with_constants(p, args)
}

fn no_fast_path() -> Engine {
    Engine::new(EngineOptions {
        fast_path: false,
        ..EngineOptions::default()
    })
}

fn orca() -> Check {
    let start = Instant::now();
    let i = instance(ORCA, TruthDegree::one());
    let engine = Engine::default();
    let session = engine.session(&i);
    let atom = g("orca", &["i1"]);
    let ask = |c: TruthDegree| match session.k_truth(&atom, &c) {
        Ok(QueryOutcome::Answered(r)) => Ok(r),
        other => Err(format!("unexpected query outcome {other:?}")),
    };
    let at_half = ask(d(1, 2))?;
    let above = ask(d(51, 100))?;
    let elapsed = start.elapsed();
    ensure!(at_half.degree == d(1, 2), "orca(i1) = {}", at_half.degree);
    ensure!(at_half.entailed, "threshold 1/2 not entailed");
    ensure!(!above.entailed, "threshold 51/100 entailed");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("orca(i1) = 1/2; 1/2 entailed, 51/100 not; {elapsed:.2?}"))
}

fn key_person() -> Check {
    let i = instance(KEY_PERSON, TruthDegree::one());
    let outcome = Engine::default().preferred_model(&i).map_err(|e| e.to_string())?;
    let m = outcome.model().ok_or("no preferred model")?;
    let n1 = GroundAtom::new("kp", vec![GroundTerm::Null(NullId(1)), GroundTerm::constant("acme")]);
    let nu = &m.assignment;
    ensure!(nu.get(&n1) == d(1, 5), "kp(_n1, acme) = {}", nu.get(&n1));
    ensure!(nu.get(&g("kp", &["amy", "acme"])) == d(4, 5), "kp(amy, acme) changed");
    ensure!(nu.get(&g("company", &["acme"])) == d(1, 1), "company(acme) changed");
    Ok("kp(_n1, acme) = 1/5, kp(amy, acme) = 4/5, company(acme) = 1".into())
}

fn nulls() -> Check {
    let i = instance(NULLS, TruthDegree::one());
    let engine = Engine::default();
    let outcome = engine.solve(&i).map_err(|e| e.to_string())?;
    ensure!(outcome == Outcome::NoObliviousBaseModel, "got {outcome:?}");
    let chase = engine.chase(&i).map_err(|e| e.to_string())?;
    let ground = build_eoptk(&i, &chase);
    let status = lp::solve(&ground.lp).map_err(|e| e.to_string())?.status;
    ensure!(status == Status::Infeasible, "eOpt_1 is {status:?}");

    let mut nu = TruthAssignment::from(i.database());
    for n in 1..=4 {
        let p = GroundAtom::new("p", vec![GroundTerm::constant("a"), GroundTerm::Null(NullId(n))]);
        nu.set(p, d(1, 5));
    }
    let v = verify_model(&i, &chase, &nu);
    ensure!(v.rules_satisfied(), "four-null assignment violates a rule: {:?}", v.violations);
    ensure!(v.agrees_with_database(), "four-null assignment disagrees with the database");
    ensure!(!v.has_oblivious_base(), "four-null assignment passes the oblivious-base check");
    Ok("eOpt_1 infeasible; four-null model satisfies the rules, fails the oblivious base".into())
}

fn inconsistency() -> Check {
    for engine in [Engine::default(), no_fast_path()] {
        let outcome = engine.solve(&instance(CLASH, TruthDegree::one())).map_err(|e| e.to_string())?;
        ensure!(outcome == Outcome::Unsatisfiable, "K = 1 gave {outcome:?}");
    }
    let half = instance(CLASH, d(1, 2));
    let outcome = Engine::default().solve(&half).map_err(|e| e.to_string())?;
    let m = outcome.model().ok_or("K = 1/2 unsatisfiable")?;
    ensure!(m.assignment == TruthAssignment::from(half.database()), "K = 1/2 model differs from the database");
    Ok("unsatisfiable at K = 1, minimal model = database at K = 1/2".into())
}

fn feasible_point(ground: &mvlog::engine::GroundProgram, weights: &[i64]) -> Option<TruthAssignment> {
    let mut lp = ground.lp.clone();
    let mut objective = LinearForm::new();
    for (i, w) in weights.iter().enumerate() {
        objective.add_term(VarId(i), Rational::from_integer((*w).into()));
    }
    lp.set_objective(objective);
    let s = lp::solve(&lp).expect("well formed");
    if !s.is_optimal() {
        return None;
    }
    Some(
        ground
            .atoms
            .iter()
            .zip(&s.assignment)
            .filter(|(_, v)| !v.is_zero())
            .map(|(a, v)| (a.clone(), TruthDegree::new(v.clone()).unwrap()))
            .collect(),
    )
}

fn random_instances(count: usize, seed: u64, shape: &DatalogShape, k_one: bool) -> Vec<Instance> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let k = if k_one { TruthDegree::one() } else { common::random_k(&mut r) };
            random_datalog(&mut r, shape, k)
        })
        .collect()
}

fn minimal_model_suite() -> Check {
    let start = Instant::now();
    let instances = random_instances(600, 5, &DatalogShape::default(), false);
    let engine = Engine::default();
    let mut r = rng(55);
    let (mut satisfiable, mut meets, mut comparisons) = (0, 0, 0);
    for (n, i) in instances.iter().enumerate() {
        let outcome = engine.minimal_model(i).map_err(|e| e.to_string())?;
        let oracle = engine.fixpoint_minimal_model(i).map_err(|e| e.to_string())?;
        match (&outcome, &oracle) {
            (Outcome::Model(m), Fixpoint::Model(f)) => {
                ensure!(m.assignment == *f, "instance {n}: LP and fixpoint disagree");
            }
            (Outcome::Unsatisfiable, Fixpoint::Unsatisfiable) => continue,
            _ => return Err(format!("instance {n}: satisfiability differs: {outcome:?} vs {oracle:?}")),
        }
        satisfiable += 1;
        let mu = &outcome.model().unwrap().assignment;
        let chase = engine.chase(i).map_err(|e| e.to_string())?;
        ensure!(verify_model(i, &chase, mu).is_model(), "instance {n}: minimal model fails verification");
        let ground = build_optk(i, &chase);
        let nvars = ground.atoms.len();
        let mut points = Vec::new();
        for _ in 0..4 {
            let nonneg = points.len() % 2 == 0;
            let weights: Vec<i64> = (0..nvars)
                .map(|_| if nonneg { r.gen_range(0..=3) } else { r.gen_range(-3..=3) })
                .collect();
            let p = feasible_point(&ground, &weights).ok_or(format!("instance {n}: LP became infeasible"))?;
            ensure!(mu.le(&p), "instance {n}: minimal model not below a feasible point");
            comparisons += 1;
            points.push(p);
        }
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                if points[a] != points[b] {
                    let meet = points[a].meet(&points[b]);
                    ensure!(verify_model(i, &chase, &meet).is_model(), "instance {n}: meet of two models is not a model");
                    meets += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(satisfiable >= 100, "only {satisfiable} satisfiable instances");
    ensure!(meets >= 100, "only {meets} distinct model pairs");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "{} instances ({satisfiable} satisfiable): LP = fixpoint; {meets} meets are models; {comparisons} minimality comparisons; {elapsed:.2?}",
        instances.len()
    ))
}

fn certain_knowledge() -> Check {
    let shape = DatalogShape {
        certain_probability: 0.6,
        ..DatalogShape::default()
    };
    let mut seed = 600;
    let mut checked = 0;
    let mut certain_derived = 0;
    while checked < 250 {
        seed += 1;
        let i = random_instances(1, seed, &shape, true).pop().unwrap();
        let off = no_fast_path().minimal_model(&i).map_err(|e| e.to_string())?;
        let Outcome::Model(m) = &off else { continue };
        let on = Engine::default().minimal_model(&i).map_err(|e| e.to_string())?;
        let on = on.model().ok_or(format!("seed {seed}: fast path reports unsatisfiable"))?;
        ensure!(on.assignment == m.assignment, "seed {seed}: fast path changes the model");

        let ones: BTreeSet<GroundAtom> = i.database().iter().filter(|(_, d)| d.is_one()).map(|(a, _)| a.clone()).collect();
        let entailed = reference_closure(i.program(), &ones);
        for a in &entailed {
            ensure!(m.assignment.get(a).is_one(), "seed {seed}: {a} entailed from D1 but below 1");
        }
        for (a, deg) in m.assignment.support() {
            if deg.is_one() {
                ensure!(entailed.contains(a), "seed {seed}: {a} has degree 1 but is not entailed from D1");
                if !i.database().contains(a) {
                    certain_derived += 1;
                }
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} satisfiable instances; {certain_derived} derived degree-1 atoms; fast path transparent"))
}

fn weak_acyclicity() -> Check {
    let (p, _) = parse("p(Y) :- p(X).").unwrap();
    let report = is_weakly_acyclic_ve(&p);
    ensure!(!report.weakly_acyclic, "self-feeding rule accepted");
    let w = report.witness.ok_or("no witness")?;
    let first = (w[0].clone(), w[1 % w.len()].clone());
    ensure!(report.graph.special_edges.contains(&first), "witness does not start with a special edge");
    let (kp, _) = parse(KEY_PERSON).unwrap();
    ensure!(is_weakly_acyclic_ve(&kp).weakly_acyclic, "key person program rejected");

    let mut r = rng(77);
    let (mut accepted, mut max_steps) = (0, 0);
    let budget = 100_000;
    for n in 0..400 {
        let i = random_existential_instance(&mut r);
        if !is_weakly_acyclic_ve(i.program()).weakly_acyclic {
            continue;
        }
        accepted += 1;
        let facts: Vec<&GroundAtom> = i.database().atoms().collect();
        let chase = oblivious_chase(&crispify(i.program()), facts, Some(budget));
        ensure!(!chase.truncated, "accepted program {n} exceeded the chase budget");
        max_steps = max_steps.max(chase.steps);
    }
    ensure!(accepted >= 50, "only {accepted} random programs accepted");
    let shown: Vec<String> = w.iter().map(ToString::to_string).collect();
    Ok(format!("witness {}; {accepted} accepted random programs terminate (max {max_steps} steps)", shown.join(" -> ")))
}

fn tightness() -> Check {
    let instances = random_instances(600, 8, &DatalogShape::default(), false);
    let engine = Engine::default();
    let (mut derived, mut flagged) = (0, 0);
    for (n, i) in instances.iter().enumerate() {
        let Outcome::Model(m) = engine.minimal_model(i).map_err(|e| e.to_string())? else { continue };
        let chase = engine.chase(i).map_err(|e| e.to_string())?;
        for (atom, deg) in m.assignment.support() {
            if deg.is_zero() {
                continue;
            }
            let tight = chase
                .gamma
                .iter()
                .any(|r| r.head == *atom && rule_gap(&m.assignment, r, i.k()).is_zero());
            if i.database().contains(atom) {
                if !tight {
                    flagged += 1;
                }
                continue;
            }
            derived += 1;
            ensure!(tight, "instance {n}: derived atom {atom} heads no tight rule");
        }
    }
    Ok(format!("{derived} derived positive atoms all tight; {flagged} database-only atoms without a tight rule (not required)"))
}

fn chain_program(n: usize, seed: u64) -> String {
    let mut r = rng(seed);
    let mut text = String::new();
    for c in 0..n {
        let a = r.gen_range(1..=10);
        let b = r.gen_range(1..=10);
        text.push_str(&format!("{a}/10 :: p0(c{c}). {b}/10 :: w(c{c}).\n"));
    }
    for k in 0..4 {
        text.push_str(&format!("p{}(X) :- p{k}(X), w(X).\n", k + 1));
    }
    text
}

fn ptime() -> Check {
    let start = Instant::now();
    let sizes = [100usize, 200, 400, 800];
    let mut times = Vec::new();
    for &n in &sizes {
        let text = chain_program(n, n as u64);
        let mut best = Duration::MAX;
        for _ in 0..2 {
            let t = Instant::now();
            let i = instance(&text, d(9, 10));
            let outcome = Engine::default().solve(&i).map_err(|e| e.to_string())?;
            ensure!(outcome.model().is_some(), "chain instance of size {n} unsatisfiable");
            best = best.min(t.elapsed());
        }
        times.push(best.as_secs_f64());
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let total = start.elapsed();
    let shown: Vec<String> = sizes.iter().zip(&times).map(|(n, t)| format!("{n}: {t:.3}s")).collect();
    ensure!(slope < 3.0, "log-log slope {slope:.2} ({})", shown.join(", "));
    ensure!(total < Duration::from_secs(300), "took {total:?}");
    Ok(format!("slope {slope:.2} ({}); total {total:.2?}", shown.join(", ")))
}

fn degeneration() -> Check {
    let shape = DatalogShape {
        certain_probability: 1.0,
        ..DatalogShape::default()
    };
    let instances = random_instances(150, 10, &shape, true);
    for (n, i) in instances.iter().enumerate() {
        for engine in [Engine::default(), no_fast_path()] {
            let outcome = engine.minimal_model(i).map_err(|e| e.to_string())?;
            let m = outcome.model().ok_or(format!("instance {n}: crisp instance unsatisfiable"))?;
            let ones: BTreeSet<GroundAtom> =
                m.assignment.support().filter(|(_, d)| d.is_one()).map(|(a, _)| a.clone()).collect();
            let facts: BTreeSet<GroundAtom> = i.database().atoms().cloned().collect();
            let reference = reference_closure(i.program(), &facts);
            ensure!(ones == reference, "instance {n}: degree-1 atoms differ from the Datalog fixpoint");
            ensure!(
                m.assignment.support().all(|(_, d)| d.is_one()),
                "instance {n}: fractional degree in a crisp instance"
            );
        }
    }
    Ok(format!("{} crisp instances match the reference Datalog fixpoint", instances.len()))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Check); 10] = [
        (1, "orca example", orca),
        (2, "key person preferred model", key_person),
        (3, "no obliviously based model with nulls", nulls),
        (4, "inconsistency", inconsistency),
        (5, "minimal model properties", minimal_model_suite),
        (6, "certain knowledge", certain_knowledge),
        (7, "weak acyclicity of the variable expansion", weak_acyclicity),
        (8, "tight rules", tightness),
        (9, "polynomial scaling", ptime),
        (10, "Datalog degeneration", degeneration),
    ];
    let mut failed = 0;
    for (n, title, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("criterion {n:>2} PASS  {title}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {title}: {why} [{elapsed:.2?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
