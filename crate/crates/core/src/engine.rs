//! Minimal and preferred models.
//!
//! An instance is grounded with the oblivious chase, turned into a linear
//! program over one variable per atom of the chase limit, and solved exactly.
//! Datalog instances get the unique minimal K-fuzzy model; instances with
//! existential rules get a deterministic preferred model.

use std::cell::OnceCell;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::chase::{enumerate_in, oblivious_chase, AtomIndex, ChaseResult};
use crate::degree::{Rational, TruthDegree};
use crate::lp::{self, LinearForm, LinearProgram, LpError, Status, VarId};
use crate::semantics::{body_truth, crisp_database, crispify, k_satisfies};
use crate::syntax::{GroundAtom, GroundRule, GroundTerm, Instance, NullId, TruthAssignment};
use crate::termination::{is_weakly_acyclic_ve, PositionVertex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineOptions {
    /// Fix classically certain atoms to 1 before solving (K = 1, Datalog only).
    pub fast_path: bool,
    /// Bound on oblivious chase applications.
    pub max_chase_steps: Option<usize>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            fast_path: true,
            max_chase_steps: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("chase stopped after {steps} applications without reaching a fixpoint")]
    TruncatedChase { steps: usize },
    #[error("the program is not weakly acyclic after variable expansion; a chase step limit is required")]
    ChaseLimitRequired { witness: Vec<PositionVertex> },
    #[error("operation requires a program without existential rules")]
    ExistentialRules,
    #[error("no fixpoint after {rounds} rounds")]
    IterationLimit { rounds: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Minimal,
    Preferred,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundModel {
    pub assignment: TruthAssignment,
    pub kind: ModelKind,
    pub k: TruthDegree,
    /// Atoms fixed to 1 by the certain fast path.
    pub certain_atoms: BTreeSet<GroundAtom>,
    /// Number of ground rules produced by the chase.
    pub gamma_size: usize,
    pub variable_count: usize,
    pub constraint_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Model(GroundModel),
    /// No K-fuzzy model exists.
    Unsatisfiable,
    /// No K-fuzzy model with support inside the chase limit exists. Models
    /// using more nulls may still exist.
    NoObliviousBaseModel,
}

impl Outcome {
    pub fn model(&self) -> Option<&GroundModel> {
        match self {
            Outcome::Model(m) => Some(m),
            _ => None,
        }
    }

    pub fn into_model(self) -> Option<GroundModel> {
        match self {
            Outcome::Model(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryResult {
    pub atom: GroundAtom,
    pub threshold: TruthDegree,
    pub entailed: bool,
    pub degree: TruthDegree,
    /// Answered against one preferred model rather than all models.
    pub model_relative: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryOutcome {
    Answered(QueryResult),
    Unsatisfiable,
    NoObliviousBaseModel,
}

/// Result of the fixpoint oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fixpoint {
    Model(TruthAssignment),
    Unsatisfiable,
}

/// A linear program over the atoms of a chase limit.
#[derive(Clone, Debug)]
pub struct GroundProgram {
    pub lp: LinearProgram,
    /// Sum of null-atom variables; empty for Datalog instances.
    pub secondary: LinearForm,
    /// Atom of each variable, by variable index.
    pub atoms: Vec<GroundAtom>,
    pub vars: BTreeMap<GroundAtom, VarId>,
    /// Objective weight of each variable.
    pub weights: Vec<Rational>,
}

impl GroundProgram {
    pub fn var(&self, atom: &GroundAtom) -> Option<VarId> {
        self.vars.get(atom).copied()
    }

    fn assignment(&self, values: &[Rational]) -> TruthAssignment {
        self.atoms
            .iter()
            .zip(values)
            .filter(|(_, v)| !v.is_zero())
            .map(|(a, v)| (a.clone(), TruthDegree::new(v.clone()).expect("bounded by [0, 1]")))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    RuleNotSatisfied { rule: GroundRule, degree: TruthDegree },
    DatabaseMismatch { atom: GroundAtom, expected: TruthDegree, actual: TruthDegree },
    OutsideObliviousBase { atom: GroundAtom, degree: TruthDegree },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verification {
    pub violations: Vec<Violation>,
}

impl Verification {
    pub fn is_model(&self) -> bool {
        self.violations.is_empty()
    }

    /// True if every rule is K-satisfied, whatever else fails.
    pub fn rules_satisfied(&self) -> bool {
        !self.violations.iter().any(|v| matches!(v, Violation::RuleNotSatisfied { .. }))
    }

    pub fn has_oblivious_base(&self) -> bool {
        !self.violations.iter().any(|v| matches!(v, Violation::OutsideObliviousBase { .. }))
    }

    pub fn agrees_with_database(&self) -> bool {
        !self.violations.iter().any(|v| matches!(v, Violation::DatabaseMismatch { .. }))
    }
}

#[derive(Clone, Debug, Default)]
pub struct Engine {
    options: EngineOptions,
}

impl Engine {
    pub fn new(options: EngineOptions) -> Self {
        Engine { options }
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    /// Runs the oblivious chase of the instance on the support of its
    /// database.
    ///
    /// Programs with existential rules that fail the weak acyclicity test
    /// need an explicit step limit. Hitting the limit is an error.
    pub fn chase(&self, instance: &Instance) -> Result<ChaseResult, EngineError> {
        let program = instance.program();
        if program.has_existential_rules() && self.options.max_chase_steps.is_none() {
            let report = is_weakly_acyclic_ve(program);
            if let Some(witness) = report.witness {
                return Err(EngineError::ChaseLimitRequired { witness });
            }
        }
        let facts = crisp_database(instance.database());
        let result = oblivious_chase(&crispify(program), &facts, self.options.max_chase_steps);
        if result.truncated {
            return Err(EngineError::TruncatedChase { steps: result.steps });
        }
        Ok(result)
    }

    /// The classical closure of the truth-1 facts under the program.
    pub fn certain_closure(&self, instance: &Instance) -> Result<BTreeSet<GroundAtom>, EngineError> {
        if instance.program().has_existential_rules() {
            return Err(EngineError::ExistentialRules);
        }
        let ones: Vec<&GroundAtom> = instance
            .database()
            .iter()
            .filter(|(_, d)| d.is_one())
            .map(|(a, _)| a)
            .collect();
        Ok(oblivious_chase(&crispify(instance.program()), ones, None).olim)
    }

    /// The unique minimal K-fuzzy model of a Datalog instance.
    pub fn minimal_model(&self, instance: &Instance) -> Result<Outcome, EngineError> {
        if instance.program().has_existential_rules() {
            return Err(EngineError::ExistentialRules);
        }
        let certain = if self.options.fast_path && instance.k().is_one() {
            let closure = self.certain_closure(instance)?;
            let db = instance.database();
            if closure.iter().any(|a| db.get(a).is_some_and(|d| !d.is_one())) {
                return Ok(Outcome::Unsatisfiable);
            }
            closure
        } else {
            BTreeSet::new()
        };
        let chase = self.chase(instance)?;
        let ground = build_program(instance, &chase, &certain, false);
        let solution = lp::solve(&ground.lp)?;
        match solution.status {
            Status::Optimal => Ok(Outcome::Model(GroundModel {
                assignment: ground.assignment(&solution.assignment),
                kind: ModelKind::Minimal,
                k: instance.k().clone(),
                certain_atoms: certain,
                gamma_size: chase.gamma.len(),
                variable_count: ground.lp.var_count(),
                constraint_count: ground.lp.constraints().len(),
            })),
            Status::Infeasible => Ok(Outcome::Unsatisfiable),
            Status::Unbounded => unreachable!("all variables are bounded"),
        }
    }

    /// A preferred K-fuzzy model: optimal for the active-atom objective, and
    /// among those the one that minimizes the total degree of null atoms.
    pub fn preferred_model(&self, instance: &Instance) -> Result<Outcome, EngineError> {
        let chase = self.chase(instance)?;
        let ground = build_eoptk(instance, &chase);
        let solution = lp::lexicographic_solve(&ground.lp, &ground.secondary)?;
        match solution.status {
            Status::Optimal => Ok(Outcome::Model(GroundModel {
                assignment: ground.assignment(&solution.assignment),
                kind: ModelKind::Preferred,
                k: instance.k().clone(),
                certain_atoms: BTreeSet::new(),
                gamma_size: chase.gamma.len(),
                variable_count: ground.lp.var_count(),
                constraint_count: ground.lp.constraints().len(),
            })),
            Status::Infeasible if instance.program().has_existential_rules() => {
                Ok(Outcome::NoObliviousBaseModel)
            }
            Status::Infeasible => Ok(Outcome::Unsatisfiable),
            Status::Unbounded => unreachable!("all variables are bounded"),
        }
    }

    /// Minimal model for Datalog instances, preferred model otherwise.
    pub fn solve(&self, instance: &Instance) -> Result<Outcome, EngineError> {
        if instance.program().has_existential_rules() {
            self.preferred_model(instance)
        } else {
            self.minimal_model(instance)
        }
    }

    /// Whether `ν(atom) ≥ c` in every K-fuzzy model. With existential rules
    /// the answer refers to the computed preferred model only.
    pub fn k_truth(&self, instance: &Instance, atom: &GroundAtom, c: &TruthDegree) -> Result<QueryOutcome, EngineError> {
        Ok(answer(instance, &self.solve(instance)?, atom, c))
    }

    /// Caches the model of `instance` across queries.
    pub fn session<'a>(&'a self, instance: &'a Instance) -> Session<'a> {
        Session {
            engine: self,
            instance,
            outcome: OnceCell::new(),
        }
    }

    /// Least fixpoint of the K-consequence operator above the database,
    /// computed without linear programming.
    pub fn fixpoint_minimal_model(&self, instance: &Instance) -> Result<Fixpoint, EngineError> {
        if instance.program().has_existential_rules() {
            return Err(EngineError::ExistentialRules);
        }
        let chase = self.chase(instance)?;
        let k = instance.k().value();
        let db = instance.database();
        let mut nu = TruthAssignment::from(db);
        let bound = chase.olim.len() * chase.gamma.len() + 1;
        for _ in 0..bound {
            let mut changed = false;
            for g in &chase.gamma {
                let derived = body_truth(&nu, &g.body).into_value() - Rational::one() + k;
                if derived <= *nu.get(&g.head).value() {
                    continue;
                }
                if db.get(&g.head).is_some() {
                    return Ok(Fixpoint::Unsatisfiable);
                }
                nu.set(g.head.clone(), TruthDegree::new(derived).expect("at most K"));
                changed = true;
            }
            if !changed {
                return Ok(Fixpoint::Model(nu));
            }
        }
        Err(EngineError::IterationLimit { rounds: bound })
    }

    /// Chase plus the linear program the solver would see, without the fast
    /// path. For inspection.
    pub fn ground(&self, instance: &Instance) -> Result<(ChaseResult, GroundProgram), EngineError> {
        let chase = self.chase(instance)?;
        let ground = if instance.program().has_existential_rules() {
            build_eoptk(instance, &chase)
        } else {
            build_optk(instance, &chase)
        };
        Ok((chase, ground))
    }
}

fn answer(instance: &Instance, outcome: &Outcome, atom: &GroundAtom, c: &TruthDegree) -> QueryOutcome {
    match outcome {
        Outcome::Model(m) => {
            let degree = m.assignment.get(atom);
            QueryOutcome::Answered(QueryResult {
                atom: atom.clone(),
                threshold: c.clone(),
                entailed: degree >= *c,
                degree,
                model_relative: instance.program().has_existential_rules(),
            })
        }
        Outcome::Unsatisfiable => QueryOutcome::Unsatisfiable,
        Outcome::NoObliviousBaseModel => QueryOutcome::NoObliviousBaseModel,
    }
}

/// Repeated queries against one instance.
pub struct Session<'a> {
    engine: &'a Engine,
    instance: &'a Instance,
    outcome: OnceCell<Outcome>,
}

impl Session<'_> {
    pub fn outcome(&self) -> Result<&Outcome, EngineError> {
        if let Some(o) = self.outcome.get() {
            return Ok(o);
        }
        let o = self.engine.solve(self.instance)?;
        Ok(self.outcome.get_or_init(|| o))
    }

    pub fn k_truth(&self, atom: &GroundAtom, c: &TruthDegree) -> Result<QueryOutcome, EngineError> {
        Ok(answer(self.instance, self.outcome()?, atom, c))
    }
}

/// `Opt_K`: one variable per atom of the chase limit, one constraint per
/// ground rule, database atoms fixed, objective `Σ x`.
pub fn build_optk(instance: &Instance, chase: &ChaseResult) -> GroundProgram {
    build_program(instance, chase, &BTreeSet::new(), false)
}

/// `eOpt_K`: as [`build_optk`], but the head of an existential ground rule
/// contributes the sum over all matching atoms, and null atoms carry weight
/// 0. The secondary objective sums the null atoms.
pub fn build_eoptk(instance: &Instance, chase: &ChaseResult) -> GroundProgram {
    build_program(instance, chase, &BTreeSet::new(), true)
}

fn build_program(
    instance: &Instance,
    chase: &ChaseResult,
    certain: &BTreeSet<GroundAtom>,
    existential: bool,
) -> GroundProgram {
    let mut lp = LinearProgram::new();
    let mut vars = BTreeMap::new();
    let mut atoms = Vec::new();
    let universe: BTreeSet<&GroundAtom> = chase.olim.iter().chain(certain).collect();
    for atom in universe {
        let v = lp.add_var(atom.to_string(), Rational::zero(), Rational::one());
        if certain.contains(atom) {
            lp.fix(v, Rational::one());
        } else if let Some(d) = instance.database().get(atom) {
            lp.fix(v, d.value().clone());
        }
        vars.insert(atom.clone(), v);
        atoms.push(atom.clone());
    }

    let index = existential.then(|| AtomIndex::from_atoms(&atoms));
    for g in &chase.gamma {
        if certain.contains(&g.head) {
            continue;
        }
        let mut form = LinearForm::constant(Rational::from_integer(g.body.len().into()));
        for b in &g.body {
            form.add_term(vars[b], -Rational::one());
        }
        match &index {
            Some(index) if g.is_existential() => {
                for m in index.matching(&g.head, &g.existential_nulls) {
                    form.add_term(vars[m], Rational::one());
                }
            }
            _ => form.add_term(vars[&g.head], Rational::one()),
        }
        lp.add_constraint(form, instance.k().value().clone());
    }

    let mut objective = LinearForm::new();
    let mut secondary = LinearForm::new();
    let mut weights = Vec::with_capacity(atoms.len());
    for (i, atom) in atoms.iter().enumerate() {
        if existential && atom.has_nulls() {
            secondary.add_term(VarId(i), Rational::one());
            weights.push(Rational::zero());
        } else {
            objective.add_term(VarId(i), Rational::one());
            weights.push(Rational::one());
        }
    }
    lp.set_objective(objective);
    GroundProgram {
        lp,
        secondary,
        atoms,
        vars,
        weights,
    }
}

/// Checks `model` against the instance: every rule K-satisfied (existential
/// heads read as the truncated sum over matching atoms), agreement with the
/// database, and support inside the chase limit.
pub fn verify_model(instance: &Instance, chase: &ChaseResult, model: &TruthAssignment) -> Verification {
    let k = instance.k();
    let support = AtomIndex::from_atoms(model.support().map(|(a, _)| a));
    let max_null = support
        .atoms()
        .iter()
        .flat_map(GroundAtom::nulls)
        .chain(chase.olim.iter().flat_map(GroundAtom::nulls))
        .map(|n| n.0)
        .max()
        .unwrap_or(0);

    let mut violations = Vec::new();
    for rule in instance.program().rules() {
        for hom in enumerate_in(rule, &support) {
            let body: Vec<GroundAtom> = rule
                .body()
                .iter()
                .map(|a| hom.apply(a).expect("body is bound"))
                .collect();
            let mut extended = hom.clone();
            let wildcards: Vec<NullId> = (0..rule.existential_vars().len())
                .map(|i| NullId(max_null + 1 + i as u32))
                .collect();
            for (var, n) in rule.existential_vars().iter().zip(&wildcards) {
                extended.0.insert(var.clone(), GroundTerm::Null(*n));
            }
            let head = extended.apply(rule.head()).expect("head is bound");
            let gamma = GroundRule {
                origin_rule_id: rule.id(),
                body,
                head,
                existential_nulls: wildcards,
            };
            let head_truth = if gamma.is_existential() {
                let sum: Rational = support
                    .matching(&gamma.head, &gamma.existential_nulls)
                    .into_iter()
                    .map(|a| model.get(a).into_value())
                    .sum();
                TruthDegree::saturating(sum)
            } else {
                model.get(&gamma.head)
            };
            let degree = body_truth(model, &gamma.body).implies(&head_truth);
            let satisfied = if gamma.is_existential() {
                degree >= *k
            } else {
                k_satisfies(model, &gamma, k)
            };
            if !satisfied {
                violations.push(Violation::RuleNotSatisfied { rule: gamma, degree });
            }
        }
    }
    for (atom, expected) in instance.database().iter() {
        let actual = model.get(atom);
        if actual != *expected {
            violations.push(Violation::DatabaseMismatch {
                atom: atom.clone(),
                expected: expected.clone(),
                actual,
            });
        }
    }
    for (atom, degree) in model.support() {
        if !chase.olim.contains(atom) {
            violations.push(Violation::OutsideObliviousBase {
                atom: atom.clone(),
                degree: degree.clone(),
            });
        }
    }
    Verification { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::rat;
    use crate::parser::parse;
    use crate::semantics::rule_gap;

    fn instance(text: &str, k: Rational) -> Instance {
        let (p, db) = parse(text).unwrap();
        Instance::new(p, db, TruthDegree::new(k).unwrap()).unwrap()
    }

    fn g(p: &str, args: &[&str]) -> GroundAtom {
        GroundAtom::with_constants(p, args)
    }

    fn d(n: i64, m: i64) -> TruthDegree {
        TruthDegree::from_ratio(n, m).unwrap()
    }

    const ORCA: &str = "0.8 :: label(i1, whale). 0.7 :: polar(i1). orca(X) :- label(X, whale), polar(X).";
    const KEY_PERSON: &str = "company(acme). 0.8 :: kp(amy, acme). kp(Y, X) :- company(X).";
    const NULLS: &str = "0.8 :: s(a). 0.2 :: t(a). p(X, Y) :- s(X). t(X) :- p(X, Y).";
    const CLASH: &str = "r(a). 0.5 :: s(a). s(X) :- r(X).";

    fn model(outcome: Outcome) -> TruthAssignment {
        outcome.into_model().expect("a model").assignment
    }

    #[test]
    fn orca_program_shape() {
        let i = instance(ORCA, rat(1, 1));
        let chase = Engine::default().chase(&i).unwrap();
        let gp = build_optk(&i, &chase);
        assert_eq!(gp.lp.var_count(), 3);
        assert_eq!(gp.lp.constraints().len(), 1);
        assert_eq!(gp.lp.variables().iter().filter(|v| v.fixed.is_some()).count(), 2);
        let c = &gp.lp.constraints()[0];
        let orca = gp.var(&g("orca", &["i1"])).unwrap();
        let label = gp.var(&g("label", &["i1", "whale"])).unwrap();
        assert_eq!(c.form.coefficient(orca), rat(1, 1));
        assert_eq!(c.form.coefficient(label), rat(-1, 1));
        assert_eq!(c.form.constant_term(), &rat(2, 1));
    }

    #[test]
    fn empty_gamma_has_database_variables_only() {
        let i = instance("0.3 :: a(x). 1 :: b(y).", rat(1, 1));
        let gp = build_optk(&i, &Engine::default().chase(&i).unwrap());
        assert_eq!(gp.lp.var_count(), 2);
        assert!(gp.lp.constraints().is_empty());
    }

    #[test]
    fn orca_minimal_models() {
        let e = Engine::default();
        let m = model(e.minimal_model(&instance(ORCA, rat(1, 1))).unwrap());
        assert_eq!(m.get(&g("orca", &["i1"])), d(1, 2));
        assert_eq!(m.get(&g("label", &["i1", "whale"])), d(4, 5));
        let m = model(e.minimal_model(&instance(ORCA, rat(4, 5))).unwrap());
        assert_eq!(m.get(&g("orca", &["i1"])), d(3, 10));
    }

    #[test]
    fn inconsistency() {
        let e = Engine::default();
        assert_eq!(e.minimal_model(&instance(CLASH, rat(1, 1))).unwrap(), Outcome::Unsatisfiable);
        let no_fast = Engine::new(EngineOptions {
            fast_path: false,
            ..EngineOptions::default()
        });
        assert_eq!(no_fast.minimal_model(&instance(CLASH, rat(1, 1))).unwrap(), Outcome::Unsatisfiable);
        let half = instance(CLASH, rat(1, 2));
        let m = model(e.minimal_model(&half).unwrap());
        assert_eq!(m, TruthAssignment::from(half.database()));
    }

    #[test]
    fn key_person_preferred_model() {
        let i = instance(KEY_PERSON, rat(1, 1));
        let chase = Engine::default().chase(&i).unwrap();
        let gp = build_eoptk(&i, &chase);
        let n1 = GroundAtom::new("kp", vec![GroundTerm::Null(NullId(1)), GroundTerm::constant("acme")]);
        let c = &gp.lp.constraints()[0];
        assert_eq!(c.form.coefficient(gp.var(&n1).unwrap()), rat(1, 1));
        assert_eq!(c.form.coefficient(gp.var(&g("kp", &["amy", "acme"])).unwrap()), rat(1, 1));
        assert_eq!(gp.weights[gp.var(&n1).unwrap().0], rat(0, 1));
        assert_eq!(gp.weights[gp.var(&g("company", &["acme"])).unwrap().0], rat(1, 1));

        let m = model(Engine::default().preferred_model(&i).unwrap());
        assert_eq!(m.get(&n1), d(1, 5));
        assert_eq!(m.get(&g("kp", &["amy", "acme"])), d(4, 5));
        assert_eq!(m.get(&g("company", &["acme"])), d(1, 1));
        assert!(verify_model(&i, &chase, &m).is_model());
    }

    #[test]
    fn nulls_example_has_no_based_model() {
        let i = instance(NULLS, rat(1, 1));
        assert_eq!(Engine::default().solve(&i).unwrap(), Outcome::NoObliviousBaseModel);

        let chase = Engine::default().chase(&i).unwrap();
        let mut nu = TruthAssignment::from(i.database());
        for n in 1..=4 {
            let p = GroundAtom::new("p", vec![GroundTerm::constant("a"), GroundTerm::Null(NullId(n))]);
            nu.set(p, d(1, 5));
        }
        let v = verify_model(&i, &chase, &nu);
        assert!(v.rules_satisfied() && v.agrees_with_database());
        assert!(!v.has_oblivious_base());
        assert_eq!(v.violations.len(), 3);
    }

    #[test]
    fn preferred_equals_minimal_without_existentials() {
        let i = instance(ORCA, rat(9, 10));
        let e = Engine::default();
        let a = model(e.minimal_model(&i).unwrap());
        let b = model(e.preferred_model(&i).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn queries() {
        let i = instance(ORCA, rat(1, 1));
        let e = Engine::default();
        let s = e.session(&i);
        let orca = g("orca", &["i1"]);
        let ask = |c| match s.k_truth(&orca, &c).unwrap() {
            QueryOutcome::Answered(r) => r,
            other => panic!("{other:?}"),
        };
        let r = ask(d(1, 2));
        assert!(r.entailed && !r.model_relative);
        assert_eq!(r.degree, d(1, 2));
        assert!(!ask(d(51, 100)).entailed);
        let absent = e.k_truth(&i, &g("nothing", &[]), &TruthDegree::zero()).unwrap();
        assert!(matches!(absent, QueryOutcome::Answered(r) if r.entailed));
    }

    #[test]
    fn certain_closure_examples() {
        let e = Engine::default();
        let i = instance("company(acme). 0.8 :: kp(amy, acme). org(X) :- company(X).", rat(1, 1));
        assert_eq!(e.certain_closure(&i).unwrap(), [g("company", &["acme"]), g("org", &["acme"])].into());
        assert!(e.certain_closure(&instance(ORCA, rat(1, 1))).unwrap().is_empty());
    }

    #[test]
    fn fixpoint_oracle_examples() {
        let e = Engine::default();
        let Fixpoint::Model(m) = e.fixpoint_minimal_model(&instance(ORCA, rat(1, 1))).unwrap() else {
            panic!()
        };
        assert_eq!(m.get(&g("orca", &["i1"])), d(1, 2));
        let Fixpoint::Model(m) = e.fixpoint_minimal_model(&instance("0.9 :: a. b :- a. c :- b.", rat(9, 10))).unwrap()
        else {
            panic!()
        };
        assert_eq!((m.get(&g("b", &[])), m.get(&g("c", &[]))), (d(4, 5), d(7, 10)));
        assert_eq!(e.fixpoint_minimal_model(&instance(CLASH, rat(1, 1))).unwrap(), Fixpoint::Unsatisfiable);
    }

    #[test]
    fn verification_reports_broken_rules() {
        let i = instance(ORCA, rat(1, 1));
        let e = Engine::default();
        let chase = e.chase(&i).unwrap();
        let mut m = model(e.minimal_model(&i).unwrap());
        assert!(verify_model(&i, &chase, &m).is_model());
        m.set(g("orca", &["i1"]), d(2, 5));
        let v = verify_model(&i, &chase, &m);
        assert!(matches!(&v.violations[..], [Violation::RuleNotSatisfied { rule, .. }] if rule.head == g("orca", &["i1"])));
        assert_eq!(rule_gap(&m, &chase.gamma[0], i.k()), rat(-1, 10));

        let plain = instance("0.3 :: a(x).", rat(1, 1));
        let chase = e.chase(&plain).unwrap();
        assert!(verify_model(&plain, &chase, &TruthAssignment::from(plain.database())).is_model());
    }

    #[test]
    fn non_terminating_programs_need_a_limit() {
        let i = instance("p(a). p(Y) :- p(X).", rat(1, 1));
        assert!(matches!(Engine::default().solve(&i), Err(EngineError::ChaseLimitRequired { .. })));
        let limited = Engine::new(EngineOptions {
            max_chase_steps: Some(5),
            ..EngineOptions::default()
        });
        assert_eq!(limited.solve(&i), Err(EngineError::TruncatedChase { steps: 5 }));
    }

    #[test]
    fn existential_instances_are_rejected_by_datalog_operations() {
        let i = instance(KEY_PERSON, rat(1, 1));
        let e = Engine::default();
        assert_eq!(e.minimal_model(&i), Err(EngineError::ExistentialRules));
        assert_eq!(e.fixpoint_minimal_model(&i), Err(EngineError::ExistentialRules));
    }
}
