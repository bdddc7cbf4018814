//! Łukasiewicz semantics of ground rules, and the instance rewritings that
//! sit between the fuzzy and the classical view of a program.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed};

use crate::degree::{Rational, TruthDegree};
use crate::syntax::{
    Atom, FuzzyDatabase, GroundAtom, GroundRule, GroundTerm, Instance, Program, Rule, Term,
    TruthAssignment,
};

/// Truth of the Łukasiewicz conjunction of `body`:
/// `max(0, Σ ν(G_i) − (ℓ − 1))`.
pub fn body_truth(nu: &TruthAssignment, body: &[GroundAtom]) -> TruthDegree {
    debug_assert!(!body.is_empty());
    let sum: Rational = body.iter().map(|g| nu.get(g).into_value()).sum();
    let slack = Rational::from_integer((body.len() as i64 - 1).into());
    TruthDegree::saturating(sum - slack)
}

/// `ν(head) − (ν(body) − 1 + K)`. Non-negative iff the rule is K-satisfied,
/// zero iff it is tight.
pub fn rule_gap(nu: &TruthAssignment, gamma: &GroundRule, k: &TruthDegree) -> Rational {
    let head = nu.get(&gamma.head).into_value();
    let body = body_truth(nu, &gamma.body).into_value();
    head - (body - Rational::one() + k.value())
}

/// Whether `min(1, 1 − ν(body) + ν(head)) ≥ K`.
pub fn k_satisfies(nu: &TruthAssignment, gamma: &GroundRule, k: &TruthDegree) -> bool {
    let body = body_truth(nu, &gamma.body);
    body.implies(&nu.get(&gamma.head)) >= *k
}

/// A program read with classical two-valued semantics (`⊗` read as `∧`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrispProgram(Program);

impl CrispProgram {
    pub fn program(&self) -> &Program {
        &self.0
    }

    pub fn rules(&self) -> &[Rule] {
        self.0.rules()
    }
}

/// The classical reading of `program`. Rule structure is unchanged.
pub fn crispify(program: &Program) -> CrispProgram {
    CrispProgram(program.clone())
}

/// The support of `τ` as a classical fact set `D_τ`.
pub fn crisp_database(tau: &FuzzyDatabase) -> BTreeSet<GroundAtom> {
    tau.iter()
        .filter(|(_, d)| d.value().is_positive())
        .map(|(a, _)| a.clone())
        .collect()
}

/// The members of `universe` grounded over the active domain of `instance`.
pub fn active_atoms<'a, I>(instance: &Instance, universe: I) -> BTreeSet<GroundAtom>
where
    I: IntoIterator<Item = &'a GroundAtom>,
{
    let adom = instance.active_domain();
    universe
        .into_iter()
        .filter(|a| {
            a.args.iter().all(|t| match t {
                GroundTerm::Const(c) => adom.contains(c),
                GroundTerm::Null(_) => false,
            })
        })
        .cloned()
        .collect()
}

/// Picks `base` followed by one or more copies of `mark` that is not in `taken`.
pub(crate) fn fresh_name(base: &str, mark: char, taken: &BTreeSet<String>) -> String {
    let mut name = format!("{base}{mark}");
    while taken.contains(&name) {
        name.push(mark);
    }
    name
}

/// Result of [`relax_rewrite`].
#[derive(Clone, Debug)]
pub struct Relaxed {
    pub instance: Instance,
    /// Database predicate to its primed copy.
    pub primed: BTreeMap<String, String>,
}

impl Relaxed {
    /// The predicate under which the relaxed degree of `predicate` is held.
    pub fn relaxed_predicate<'a>(&'a self, predicate: &'a str) -> &'a str {
        self.primed.get(predicate).map_or(predicate, String::as_str)
    }

    /// Maps a primed predicate back to its original name.
    pub fn original_predicate(&self, predicate: &str) -> Option<&str> {
        self.primed
            .iter()
            .find(|(_, p)| p.as_str() == predicate)
            .map(|(o, _)| o.as_str())
    }
}

/// Rewrites an instance so that its models are exactly the models of the
/// original that may exceed the database degrees (`ν(G) ≥ τ(G)`).
///
/// For each database predicate `R` a fresh `R'` is introduced with the rule
/// `R'(x̄) :- R(x̄)`, and every occurrence of `R` in the program becomes `R'`.
pub fn relax_rewrite(instance: &Instance) -> Relaxed {
    let db = instance.database();
    let mut taken: BTreeSet<String> = instance.program().signature().keys().cloned().collect();
    taken.extend(db.atoms().map(|a| a.predicate.clone()));

    let mut arities = BTreeMap::new();
    for atom in db.atoms() {
        arities.insert(atom.predicate.clone(), atom.arity());
    }

    let mut primed = BTreeMap::new();
    for pred in arities.keys() {
        let name = fresh_name(pred, '\'', &taken);
        taken.insert(name.clone());
        primed.insert(pred.clone(), name);
    }

    let rename = |atom: &Atom| Atom {
        predicate: primed
            .get(&atom.predicate)
            .cloned()
            .unwrap_or_else(|| atom.predicate.clone()),
        args: atom.args.clone(),
    };

    let mut rules = Vec::new();
    for (pred, &arity) in &arities {
        let args: Vec<Term> = (1..=arity).map(|i| Term::var(format!("X{i}"))).collect();
        let head = Atom::new(primed[pred].clone(), args.clone());
        let body = Atom::new(pred.clone(), args);
        rules.push(Rule::new(head, vec![body]).expect("bridging rule is safe"));
    }
    for rule in instance.program().rules() {
        let body = rule.body().iter().map(rename).collect();
        rules.push(Rule::new(rename(rule.head()), body).expect("renaming preserves rule shape"));
    }

    let program = Program::new(rules).expect("renaming preserves arities");
    let instance = Instance::new(program, db.clone(), instance.k().clone())
        .expect("renaming preserves arities");
    Relaxed { instance, primed }
}
