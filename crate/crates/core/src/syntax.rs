//! Abstract syntax of programs, databases and truth assignments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::degree::TruthDegree;

/// Identifier of a labelled null. Printed as `_n<id>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NullId(pub u32);

impl fmt::Display for NullId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_n{}", self.0)
    }
}

/// A term of a (possibly non-ground) atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
    Null(NullId),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_ground(&self) -> Option<GroundTerm> {
        match self {
            Term::Var(_) => None,
            Term::Const(c) => Some(GroundTerm::Const(c.clone())),
            Term::Null(n) => Some(GroundTerm::Null(*n)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
            Term::Null(n) => n.fmt(f),
        }
    }
}

/// A variable-free term: a constant or a labelled null.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundTerm {
    Const(String),
    Null(NullId),
}

impl GroundTerm {
    pub fn constant(name: impl Into<String>) -> Self {
        GroundTerm::Const(name.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, GroundTerm::Null(_))
    }
}

impl From<GroundTerm> for Term {
    fn from(t: GroundTerm) -> Self {
        match t {
            GroundTerm::Const(c) => Term::Const(c),
            GroundTerm::Null(n) => Term::Null(n),
        }
    }
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundTerm::Const(c) => f.write_str(c),
            GroundTerm::Null(n) => n.fmt(f),
        }
    }
}

fn write_atom<T: fmt::Display>(f: &mut fmt::Formatter<'_>, pred: &str, args: &[T]) -> fmt::Result {
    f.write_str(pred)?;
    if !args.is_empty() {
        f.write_str("(")?;
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            a.fmt(f)?;
        }
        f.write_str(")")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn to_ground(&self) -> Option<GroundAtom> {
        let args = self
            .args
            .iter()
            .map(Term::to_ground)
            .collect::<Option<Vec<_>>>()?;
        Some(GroundAtom {
            predicate: self.predicate.clone(),
            args,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_atom(f, &self.predicate, &self.args)
    }
}

/// A fact. Ordered by predicate, then arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<GroundTerm>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<GroundTerm>) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Builds an atom whose arguments are all constants.
    pub fn with_constants(predicate: impl Into<String>, args: &[&str]) -> Self {
        GroundAtom::new(
            predicate,
            args.iter().map(|c| GroundTerm::constant(*c)).collect(),
        )
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn has_nulls(&self) -> bool {
        self.args.iter().any(GroundTerm::is_null)
    }

    pub fn nulls(&self) -> impl Iterator<Item = NullId> + '_ {
        self.args.iter().filter_map(|t| match t {
            GroundTerm::Null(n) => Some(*n),
            GroundTerm::Const(_) => None,
        })
    }

    pub fn to_atom(&self) -> Atom {
        Atom::new(
            self.predicate.clone(),
            self.args.iter().cloned().map(Term::from).collect(),
        )
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_atom(f, &self.predicate, &self.args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("predicate `{predicate}` used with arity {found}, but it has arity {expected}")]
    Arity {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("rule `{0}` has an empty body")]
    EmptyBody(String),
    #[error("rule `{0}` mentions a labelled null")]
    NullInRule(String),
    #[error("head variable `{var}` of rule `{rule}` does not occur in the body")]
    UnsafeHead { rule: String, var: String },
    #[error("fact `{0}` is not ground")]
    NonGroundFact(String),
    #[error("fact `{0}` mentions a labelled null")]
    NullInDatabase(String),
    #[error("fact `{0}` has degree 0; database degrees must lie in (0, 1]")]
    ZeroDegree(String),
    #[error("fact `{atom}` is given conflicting degrees {first} and {second}")]
    ConflictingDegree {
        atom: String,
        first: String,
        second: String,
    },
    #[error("threshold K must lie in (0, 1], got {0}")]
    Threshold(String),
}

/// A rule `b1, ..., bn -> h`. Head variables absent from the body are
/// existentially quantified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    id: usize,
    body: Vec<Atom>,
    head: Atom,
    existential_vars: BTreeSet<String>,
}

impl Rule {
    /// Builds a rule, registering head-only variables as existential.
    pub fn new(head: Atom, body: Vec<Atom>) -> Result<Self, SyntaxError> {
        let rule = Rule {
            id: 0,
            existential_vars: BTreeSet::new(),
            body,
            head,
        };
        if rule.body.is_empty() {
            return Err(SyntaxError::EmptyBody(rule.to_string()));
        }
        let mentions_null = std::iter::once(&rule.head)
            .chain(&rule.body)
            .flat_map(|a| &a.args)
            .any(|t| matches!(t, Term::Null(_)));
        if mentions_null {
            return Err(SyntaxError::NullInRule(rule.to_string()));
        }
        let body_vars: BTreeSet<&str> = rule.body.iter().flat_map(Atom::vars).collect();
        let existential_vars = rule
            .head
            .vars()
            .filter(|v| !body_vars.contains(v))
            .map(str::to_string)
            .collect();
        Ok(Rule {
            existential_vars,
            ..rule
        })
    }

    /// Like [`Rule::new`] but rejects head-only variables.
    pub fn new_safe(head: Atom, body: Vec<Atom>) -> Result<Self, SyntaxError> {
        let rule = Rule::new(head, body)?;
        if let Some(var) = rule.existential_vars.iter().next() {
            return Err(SyntaxError::UnsafeHead {
                rule: rule.to_string(),
                var: var.clone(),
            });
        }
        Ok(rule)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn head(&self) -> &Atom {
        &self.head
    }

    pub fn existential_vars(&self) -> &BTreeSet<String> {
        &self.existential_vars
    }

    pub fn is_existential(&self) -> bool {
        !self.existential_vars.is_empty()
    }

    /// Body variables in sorted order; the domain of a body homomorphism.
    pub fn body_vars(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.body.iter().flat_map(Atom::vars).collect();
        set.into_iter().map(str::to_string).collect()
    }

    fn atoms(&self) -> impl Iterator<Item = &Atom> {
        std::iter::once(&self.head).chain(&self.body)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :- ", self.head)?;
        for (i, b) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(".")
    }
}

/// Predicate symbol to arity.
pub type Signature = BTreeMap<String, usize>;

fn note_arity(sig: &mut Signature, predicate: &str, arity: usize) -> Result<(), SyntaxError> {
    match sig.get(predicate) {
        Some(&expected) if expected != arity => Err(SyntaxError::Arity {
            predicate: predicate.to_string(),
            expected,
            found: arity,
        }),
        Some(_) => Ok(()),
        None => {
            sig.insert(predicate.to_string(), arity);
            Ok(())
        }
    }
}

/// An ordered set of rules. Rule ids are their positions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    signature: Signature,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Result<Self, SyntaxError> {
        let mut signature = Signature::new();
        let mut rules = rules;
        for (id, rule) in rules.iter_mut().enumerate() {
            rule.id = id;
            for atom in rule.atoms() {
                note_arity(&mut signature, &atom.predicate, atom.arity())?;
            }
        }
        Ok(Program { rules, signature })
    }

    pub fn empty() -> Self {
        Program::default()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> &Rule {
        &self.rules[id]
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn has_existential_rules(&self) -> bool {
        self.rules.iter().any(Rule::is_existential)
    }

    /// Constants mentioned anywhere in the rules.
    pub fn constants(&self) -> BTreeSet<String> {
        self.rules
            .iter()
            .flat_map(Rule::atoms)
            .flat_map(|a| &a.args)
            .filter_map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn into_rules(self) -> Vec<Rule> {
        self.rules
    }
}

/// The partial truth assignment `τ`: finitely many facts with degrees in `(0, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FuzzyDatabase {
    entries: BTreeMap<GroundAtom, TruthDegree>,
}

impl FuzzyDatabase {
    pub fn new() -> Self {
        FuzzyDatabase::default()
    }

    /// Inserts a fact. Re-inserting the same degree is a no-op; a different
    /// degree is an error.
    pub fn insert(&mut self, atom: GroundAtom, degree: TruthDegree) -> Result<(), SyntaxError> {
        if atom.has_nulls() {
            return Err(SyntaxError::NullInDatabase(atom.to_string()));
        }
        if degree.is_zero() {
            return Err(SyntaxError::ZeroDegree(atom.to_string()));
        }
        if let Some(prev) = self.entries.get(&atom) {
            if *prev != degree {
                return Err(SyntaxError::ConflictingDegree {
                    atom: atom.to_string(),
                    first: prev.to_string(),
                    second: degree.to_string(),
                });
            }
            return Ok(());
        }
        self.entries.insert(atom, degree);
        Ok(())
    }

    pub fn get(&self, atom: &GroundAtom) -> Option<&TruthDegree> {
        self.entries.get(atom)
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.entries.contains_key(atom)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroundAtom, &TruthDegree)> {
        self.entries.iter()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &GroundAtom> {
        self.entries.keys()
    }

    pub fn signature(&self) -> Result<Signature, SyntaxError> {
        let mut sig = Signature::new();
        for atom in self.entries.keys() {
            note_arity(&mut sig, &atom.predicate, atom.arity())?;
        }
        Ok(sig)
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.entries
            .keys()
            .flat_map(|a| &a.args)
            .filter_map(|t| match t {
                GroundTerm::Const(c) => Some(c.clone()),
                GroundTerm::Null(_) => None,
            })
            .collect()
    }
}

impl FuzzyDatabase {
    /// Builds a database from facts, rejecting what [`FuzzyDatabase::insert`] rejects.
    pub fn from_facts<I: IntoIterator<Item = (GroundAtom, TruthDegree)>>(iter: I) -> Result<Self, SyntaxError> {
        let mut db = FuzzyDatabase::new();
        for (atom, degree) in iter {
            db.insert(atom, degree)?;
        }
        Ok(db)
    }
}

/// A total truth assignment with finite support; atoms outside the support
/// have degree 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TruthAssignment {
    support: BTreeMap<GroundAtom, TruthDegree>,
}

impl TruthAssignment {
    pub fn new() -> Self {
        TruthAssignment::default()
    }

    pub fn get(&self, atom: &GroundAtom) -> TruthDegree {
        self.support
            .get(atom)
            .cloned()
            .unwrap_or_else(TruthDegree::zero)
    }

    /// Sets the degree of `atom`; degree 0 removes it from the support.
    pub fn set(&mut self, atom: GroundAtom, degree: TruthDegree) {
        if degree.is_zero() {
            self.support.remove(&atom);
        } else {
            self.support.insert(atom, degree);
        }
    }

    pub fn support(&self) -> impl Iterator<Item = (&GroundAtom, &TruthDegree)> {
        self.support.iter()
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    /// Pointwise minimum.
    pub fn meet(&self, other: &TruthAssignment) -> TruthAssignment {
        let support = self
            .support
            .iter()
            .filter_map(|(a, d)| {
                let o = other.support.get(a)?;
                Some((a.clone(), d.clone().min(o.clone())))
            })
            .collect();
        TruthAssignment { support }
    }

    /// `self ≤ other` pointwise.
    pub fn le(&self, other: &TruthAssignment) -> bool {
        self.support.iter().all(|(a, d)| *d <= other.get(a))
    }
}

impl From<&FuzzyDatabase> for TruthAssignment {
    fn from(db: &FuzzyDatabase) -> Self {
        TruthAssignment {
            support: db.entries.clone(),
        }
    }
}

impl FromIterator<(GroundAtom, TruthDegree)> for TruthAssignment {
    fn from_iter<I: IntoIterator<Item = (GroundAtom, TruthDegree)>>(iter: I) -> Self {
        let mut nu = TruthAssignment::new();
        for (a, d) in iter {
            nu.set(a, d);
        }
        nu
    }
}

/// A rule instance with every variable, existential ones included, replaced.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundRule {
    pub origin_rule_id: usize,
    pub body: Vec<GroundAtom>,
    pub head: GroundAtom,
    /// Nulls introduced for the existential variables of the origin rule.
    pub existential_nulls: Vec<NullId>,
}

impl GroundRule {
    pub fn new(origin_rule_id: usize, body: Vec<GroundAtom>, head: GroundAtom) -> Self {
        GroundRule {
            origin_rule_id,
            body,
            head,
            existential_nulls: Vec::new(),
        }
    }

    pub fn is_existential(&self) -> bool {
        !self.existential_nulls.is_empty()
    }
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, " -> {}", self.head)
    }
}

/// A program, a fuzzy database and the satisfaction level `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    program: Program,
    database: FuzzyDatabase,
    k: TruthDegree,
}

impl Instance {
    pub fn new(program: Program, database: FuzzyDatabase, k: TruthDegree) -> Result<Self, SyntaxError> {
        if k.is_zero() {
            return Err(SyntaxError::Threshold(k.to_string()));
        }
        let mut sig = program.signature().clone();
        for atom in database.atoms() {
            note_arity(&mut sig, &atom.predicate, atom.arity())?;
        }
        Ok(Instance {
            program,
            database,
            k,
        })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn database(&self) -> &FuzzyDatabase {
        &self.database
    }

    pub fn k(&self) -> &TruthDegree {
        &self.k
    }

    /// Same program and database at another level `K`.
    pub fn with_k(&self, k: TruthDegree) -> Result<Self, SyntaxError> {
        Instance::new(self.program.clone(), self.database.clone(), k)
    }

    /// Constants of the program and of the defined atoms of the database.
    pub fn active_domain(&self) -> BTreeSet<String> {
        let mut dom = self.program.constants();
        dom.extend(self.database.constants());
        dom
    }
}
