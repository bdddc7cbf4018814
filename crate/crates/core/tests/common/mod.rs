//! Random instance generators and a reference Datalog evaluator shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use mvlog::{
    Atom, FuzzyDatabase, GroundAtom, GroundTerm, Instance, Program, Rational, Rule, Term,
    TruthDegree,
};
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const CONSTANTS: [&str; 2] = ["c", "d"];

/// A signature whose ground atoms over two constants number at most 8.
fn signature(rng: &mut ChaCha8Rng) -> Vec<(&'static str, usize)> {
    match rng.gen_range(0..3) {
        0 => vec![("p", 1), ("q", 1), ("r", 1), ("s", 0), ("t", 0)],
        1 => vec![("e", 2), ("p", 1), ("q", 1)],
        _ => vec![("p", 1), ("q", 1), ("s", 0), ("t", 0), ("u", 0)],
    }
}

pub fn random_degree(rng: &mut ChaCha8Rng) -> TruthDegree {
    let d = *[1i64, 2, 3, 4, 5, 10].choose(rng).unwrap();
    let n = rng.gen_range(1..=d);
    TruthDegree::from_ratio(n, d).unwrap()
}

pub fn random_k(rng: &mut ChaCha8Rng) -> TruthDegree {
    let (n, d) = *[(1, 1), (1, 1), (9, 10), (4, 5), (3, 4), (2, 3), (1, 2), (1, 5)]
        .choose(rng)
        .unwrap();
    TruthDegree::from_ratio(n, d).unwrap()
}

fn random_term(rng: &mut ChaCha8Rng, vars: &[&str]) -> Term {
    if rng.gen_bool(0.15) {
        Term::constant(*CONSTANTS.choose(rng).unwrap())
    } else {
        Term::var(*vars.choose(rng).unwrap())
    }
}

fn random_atom(rng: &mut ChaCha8Rng, sig: &[(&'static str, usize)], vars: &[&str]) -> Atom {
    let (p, arity) = *sig.choose(rng).unwrap();
    Atom::new(p, (0..arity).map(|_| random_term(rng, vars)).collect())
}

/// A safe rule: head variables that do not occur in the body are replaced.
fn random_datalog_rule(rng: &mut ChaCha8Rng, sig: &[(&'static str, usize)]) -> Rule {
    let vars = ["X", "Y"];
    let body: Vec<Atom> = (0..rng.gen_range(1..=3)).map(|_| random_atom(rng, sig, &vars)).collect();
    let bound: Vec<String> = body.iter().flat_map(|a| a.vars().map(str::to_string)).collect();
    let mut head = random_atom(rng, sig, &vars);
    for t in &mut head.args {
        if let Term::Var(v) = t {
            if !bound.contains(v) {
                *t = match bound.choose(rng) {
                    Some(b) => Term::var(b.clone()),
                    None => Term::constant(*CONSTANTS.choose(rng).unwrap()),
                };
            }
        }
    }
    Rule::new_safe(head, body).expect("head made safe")
}

fn ground_atoms(sig: &[(&'static str, usize)]) -> Vec<GroundAtom> {
    let mut out = Vec::new();
    for &(p, arity) in sig {
        let mut tuples: Vec<Vec<&str>> = vec![vec![]];
        for _ in 0..arity {
            tuples = tuples
                .into_iter()
                .flat_map(|t| CONSTANTS.iter().map(move |c| [t.clone(), vec![*c]].concat()))
                .collect();
        }
        out.extend(tuples.iter().map(|t| GroundAtom::with_constants(p, t)));
    }
    out
}

pub struct DatalogShape {
    pub fact_probability: f64,
    /// Probability that a fact gets degree 1.
    pub certain_probability: f64,
    pub max_rules: usize,
}

impl Default for DatalogShape {
    fn default() -> Self {
        DatalogShape {
            fact_probability: 0.4,
            certain_probability: 0.2,
            max_rules: 6,
        }
    }
}

/// A random MV-Datalog instance with at most 8 ground atoms and at most
/// `max_rules` rules.
pub fn random_datalog(rng: &mut ChaCha8Rng, shape: &DatalogShape, k: TruthDegree) -> Instance {
    let sig = signature(rng);
    let rules: Vec<Rule> = (0..rng.gen_range(1..=shape.max_rules))
        .map(|_| random_datalog_rule(rng, &sig))
        .collect();
    let mut db = FuzzyDatabase::new();
    for atom in ground_atoms(&sig) {
        if rng.gen_bool(shape.fact_probability) {
            let d = if rng.gen_bool(shape.certain_probability) {
                TruthDegree::one()
            } else {
                random_degree(rng)
            };
            db.insert(atom, d).unwrap();
        }
    }
    Instance::new(Program::new(rules).unwrap(), db, k).unwrap()
}

/// A random program that may contain existential rules.
pub fn random_existential_instance(rng: &mut ChaCha8Rng) -> Instance {
    let sig = [("p", 1), ("q", 1), ("e", 2), ("f", 2)];
    let vars = ["X", "Y", "Z"];
    let rules: Vec<Rule> = (0..rng.gen_range(1..=6))
        .map(|_| {
            let body: Vec<Atom> = (0..rng.gen_range(1..=2)).map(|_| random_atom(rng, &sig, &vars)).collect();
            let head = random_atom(rng, &sig, &vars);
            Rule::new(head, body).unwrap()
        })
        .collect();
    let mut db = FuzzyDatabase::new();
    for atom in ground_atoms(&sig) {
        if rng.gen_bool(0.3) {
            db.insert(atom, random_degree(rng)).unwrap();
        }
    }
    let k = random_k(rng);
    Instance::new(Program::new(rules).unwrap(), db, k).unwrap()
}

/// Naive bottom-up evaluation of `program` over `facts`, enumerating every
/// assignment of constants to rule variables.
pub fn reference_closure(program: &Program, facts: &BTreeSet<GroundAtom>) -> BTreeSet<GroundAtom> {
    let mut constants: BTreeSet<String> = program.constants();
    for f in facts {
        for t in &f.args {
            if let GroundTerm::Const(c) = t {
                constants.insert(c.clone());
            }
        }
    }
    let constants: Vec<String> = constants.into_iter().collect();
    let mut known = facts.clone();
    loop {
        let mut added = Vec::new();
        for rule in program.rules() {
            let vars: Vec<String> = rule.body_vars();
            let mut choice = vec![0usize; vars.len()];
            'assignments: loop {
                if !constants.is_empty() || vars.is_empty() {
                    let binding: BTreeMap<&str, &str> = vars
                        .iter()
                        .zip(&choice)
                        .map(|(v, &i)| (v.as_str(), constants[i].as_str()))
                        .collect();
                    let ground = |a: &Atom| {
                        let args = a
                            .args
                            .iter()
                            .map(|t| match t {
                                Term::Var(v) => GroundTerm::constant(binding[v.as_str()]),
                                Term::Const(c) => GroundTerm::constant(c.clone()),
                                Term::Null(_) => unreachable!(),
                            })
                            .collect();
                        GroundAtom::new(a.predicate.clone(), args)
                    };
                    if rule.body().iter().all(|b| known.contains(&ground(b))) {
                        let h = ground(rule.head());
                        if !known.contains(&h) {
                            added.push(h);
                        }
                    }
                }
                let mut i = 0;
                loop {
                    if i == choice.len() {
                        break 'assignments;
                    }
                    choice[i] += 1;
                    if choice[i] < constants.len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
            }
        }
        if added.is_empty() {
            return known;
        }
        known.extend(added);
    }
}

pub fn one() -> Rational {
    Rational::one()
}
