//! The oblivious chase.
//!
//! Every pair of a rule and a homomorphism from its body into the current
//! atom set is applied exactly once, whether or not the head already holds.
//! Existential head variables receive fresh labelled nulls, one tuple per
//! (rule, homomorphism) pair. The chase records the ground rule induced by
//! each application; on termination these are exactly `OGround(Π, D)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::semantics::CrispProgram;
use crate::syntax::{Atom, GroundAtom, GroundRule, GroundTerm, NullId, Rule, Term};

/// A substitution of a rule's body variables. Ordered lexicographically by
/// variable, then term.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Homomorphism(pub BTreeMap<String, GroundTerm>);

impl Homomorphism {
    pub fn get(&self, var: &str) -> Option<&GroundTerm> {
        self.0.get(var)
    }

    /// Applies the substitution; `None` if some variable is unbound.
    pub fn apply(&self, atom: &Atom) -> Option<GroundAtom> {
        let args = atom
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => self.0.get(v).cloned(),
                other => other.to_ground(),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(GroundAtom::new(atom.predicate.clone(), args))
    }
}

/// One null tuple per (rule, body homomorphism) pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NullRegistry {
    entries: BTreeMap<(usize, Homomorphism), Vec<NullId>>,
    next: u32,
}

impl NullRegistry {
    pub fn new() -> Self {
        NullRegistry::default()
    }

    pub fn lookup(&self, rule_id: usize, hom: &Homomorphism) -> Option<&[NullId]> {
        self.entries.get(&(rule_id, hom.clone())).map(Vec::as_slice)
    }

    /// Returns the nulls registered for the pair, creating `count` fresh ones
    /// on first use.
    pub fn get_or_create(&mut self, rule_id: usize, hom: &Homomorphism, count: usize) -> Vec<NullId> {
        let next = &mut self.next;
        self.entries
            .entry((rule_id, hom.clone()))
            .or_insert_with(|| {
                (0..count)
                    .map(|_| {
                        *next += 1;
                        NullId(*next)
                    })
                    .collect()
            })
            .clone()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Homomorphism, &[NullId])> {
        self.entries.iter().map(|((r, h), n)| (*r, h, n.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn null_count(&self) -> usize {
        self.next as usize
    }
}

/// Insertion-ordered atom set with per-predicate and per-position indexes.
#[derive(Clone, Debug, Default)]
pub struct AtomIndex {
    atoms: Vec<GroundAtom>,
    ids: HashMap<GroundAtom, usize>,
    by_predicate: HashMap<String, Vec<usize>>,
    by_position: HashMap<(String, usize, GroundTerm), Vec<usize>>,
}

impl AtomIndex {
    pub fn new() -> Self {
        AtomIndex::default()
    }

    pub fn from_atoms<'a, I: IntoIterator<Item = &'a GroundAtom>>(atoms: I) -> Self {
        let mut index = AtomIndex::new();
        for a in atoms {
            index.insert(a.clone());
        }
        index
    }

    /// Inserts `atom`, returning `false` if it was already present.
    pub fn insert(&mut self, atom: GroundAtom) -> bool {
        if self.ids.contains_key(&atom) {
            return false;
        }
        let id = self.atoms.len();
        self.by_predicate
            .entry(atom.predicate.clone())
            .or_default()
            .push(id);
        for (pos, t) in atom.args.iter().enumerate() {
            self.by_position
                .entry((atom.predicate.clone(), pos, t.clone()))
                .or_default()
                .push(id);
        }
        self.ids.insert(atom.clone(), id);
        self.atoms.push(atom);
        true
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.ids.contains_key(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    /// Ids of atoms that could instantiate `pattern` given the bound values,
    /// using the most selective available index.
    fn candidates(&self, predicate: &str, bound: &[(usize, GroundTerm)]) -> &[usize] {
        let mut best: Option<&Vec<usize>> = None;
        for (pos, t) in bound {
            let list = self.by_position.get(&(predicate.to_string(), *pos, t.clone()));
            match list {
                None => return &[],
                Some(l) if best.is_none_or(|b| l.len() < b.len()) => best = Some(l),
                Some(_) => {}
            }
        }
        match best {
            Some(l) => l,
            None => self.by_predicate.get(predicate).map_or(&[], Vec::as_slice),
        }
    }

    /// All atoms in the index that match `pattern` with `nulls` free.
    pub fn matching(&self, pattern: &GroundAtom, nulls: &[NullId]) -> Vec<&GroundAtom> {
        let fixed: Vec<(usize, GroundTerm)> = pattern
            .args
            .iter()
            .enumerate()
            .filter(|(_, t)| !matches!(t, GroundTerm::Null(n) if nulls.contains(n)))
            .map(|(i, t)| (i, t.clone()))
            .collect();
        self.candidates(&pattern.predicate, &fixed)
            .iter()
            .map(|&i| &self.atoms[i])
            .filter(|a| matches(a, pattern, nulls))
            .collect()
    }
}

/// Id ranges that each body position may draw atoms from.
#[derive(Clone, Copy)]
struct Window {
    lo: usize,
    hi: usize,
}

fn join(
    index: &AtomIndex,
    body: &[Atom],
    windows: &[Window],
    pos: usize,
    binding: &mut BTreeMap<String, GroundTerm>,
    out: &mut Vec<Homomorphism>,
) {
    if pos == body.len() {
        out.push(Homomorphism(binding.clone()));
        return;
    }
    let atom = &body[pos];
    let bound: Vec<(usize, GroundTerm)> = atom
        .args
        .iter()
        .enumerate()
        .filter_map(|(i, t)| match t {
            Term::Var(v) => binding.get(v).map(|g| (i, g.clone())),
            other => other.to_ground().map(|g| (i, g)),
        })
        .collect();
    let Window { lo, hi } = windows[pos];
    for &id in index.candidates(&atom.predicate, &bound) {
        if id < lo || id >= hi {
            continue;
        }
        let fact = &index.atoms[id];
        if fact.args.len() != atom.args.len() {
            continue;
        }
        let mut added = Vec::new();
        let mut ok = true;
        for (t, g) in atom.args.iter().zip(&fact.args) {
            match t {
                Term::Var(v) => match binding.get(v) {
                    Some(b) if b != g => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        binding.insert(v.clone(), g.clone());
                        added.push(v.clone());
                    }
                },
                other => {
                    if other.to_ground().as_ref() != Some(g) {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if ok {
            join(index, body, windows, pos + 1, binding, out);
        }
        for v in added {
            binding.remove(&v);
        }
    }
}

/// Homomorphisms of the body of `rule` into atoms with id below `limit` that
/// use at least one atom with id at or above `delta_start`. Sorted.
fn delta_homomorphisms(rule: &Rule, index: &AtomIndex, delta_start: usize, limit: usize) -> Vec<Homomorphism> {
    let body = rule.body();
    let mut out = Vec::new();
    for pivot in 0..body.len() {
        let windows: Vec<Window> = (0..body.len())
            .map(|i| match i.cmp(&pivot) {
                std::cmp::Ordering::Less => Window { lo: 0, hi: delta_start },
                std::cmp::Ordering::Equal => Window { lo: delta_start, hi: limit },
                std::cmp::Ordering::Greater => Window { lo: 0, hi: limit },
            })
            .collect();
        join(index, body, &windows, 0, &mut BTreeMap::new(), &mut out);
    }
    out.sort();
    out
}

/// All homomorphisms from the body of `rule` into `atoms`, sorted
/// lexicographically by variable then term.
pub fn enumerate_homomorphisms<'a, I>(rule: &Rule, atoms: I) -> Vec<Homomorphism>
where
    I: IntoIterator<Item = &'a GroundAtom>,
{
    let index = AtomIndex::from_atoms(atoms);
    enumerate_in(rule, &index)
}

/// Like [`enumerate_homomorphisms`] over a prebuilt index.
pub fn enumerate_in(rule: &Rule, index: &AtomIndex) -> Vec<Homomorphism> {
    delta_homomorphisms(rule, index, 0, index.len())
}

/// Whether `candidate` is obtained from `pattern` by a consistent
/// substitution of the nulls in `nulls`; all other positions must agree.
pub fn matches(candidate: &GroundAtom, pattern: &GroundAtom, nulls: &[NullId]) -> bool {
    if candidate.predicate != pattern.predicate || candidate.args.len() != pattern.args.len() {
        return false;
    }
    let mut subst: HashMap<NullId, &GroundTerm> = HashMap::new();
    for (c, p) in candidate.args.iter().zip(&pattern.args) {
        match p {
            GroundTerm::Null(n) if nulls.contains(n) => match subst.get(n) {
                Some(prev) if *prev != c => return false,
                Some(_) => {}
                None => {
                    subst.insert(*n, c);
                }
            },
            _ => {
                if c != p {
                    return false;
                }
            }
        }
    }
    true
}

/// Builds the ground rule for `(rule, hom)`, drawing nulls from `registry`.
pub fn ground_rule(rule: &Rule, hom: &Homomorphism, registry: &mut NullRegistry) -> GroundRule {
    let body = rule
        .body()
        .iter()
        .map(|a| hom.apply(a).expect("homomorphism binds every body variable"))
        .collect();
    let mut extended = hom.clone();
    let mut nulls = Vec::new();
    if rule.is_existential() {
        nulls = registry.get_or_create(rule.id(), hom, rule.existential_vars().len());
        for (var, n) in rule.existential_vars().iter().zip(&nulls) {
            extended.0.insert(var.clone(), GroundTerm::Null(*n));
        }
    }
    let head = extended
        .apply(rule.head())
        .expect("existential variables are bound to nulls");
    GroundRule {
        origin_rule_id: rule.id(),
        body,
        head,
        existential_nulls: nulls,
    }
}

#[derive(Clone, Debug)]
pub struct ChaseResult {
    /// The chase limit `OLim`, or the partial result when truncated.
    pub olim: BTreeSet<GroundAtom>,
    /// Ground rules in application order: `OGround` when not truncated.
    pub gamma: Vec<GroundRule>,
    pub registry: NullRegistry,
    pub truncated: bool,
    /// Number of oblivious applications performed.
    pub steps: usize,
    pub rounds: usize,
}

/// Runs the oblivious chase of `program` on `facts` in rounds: each round
/// applies every pair that became applicable in the previous round, rules in
/// id order and homomorphisms in lexicographic order.
///
/// Stops with `truncated = true` once `step_limit` applications have been
/// made and another one is pending.
pub fn oblivious_chase<'a, I>(program: &CrispProgram, facts: I, step_limit: Option<usize>) -> ChaseResult
where
    I: IntoIterator<Item = &'a GroundAtom>,
{
    let mut index = AtomIndex::from_atoms(facts);
    let mut registry = NullRegistry::new();
    let mut gamma = Vec::new();
    let mut steps = 0;
    let mut rounds = 0;
    let mut delta_start = 0;
    let mut truncated = false;

    'outer: while delta_start < index.len() {
        let limit = index.len();
        rounds += 1;
        for rule in program.rules() {
            for hom in delta_homomorphisms(rule, &index, delta_start, limit) {
                if step_limit.is_some_and(|max| steps >= max) {
                    truncated = true;
                    break 'outer;
                }
                let g = ground_rule(rule, &hom, &mut registry);
                index.insert(g.head.clone());
                gamma.push(g);
                steps += 1;
            }
        }
        delta_start = limit;
    }

    ChaseResult {
        olim: index.atoms.iter().cloned().collect(),
        gamma,
        registry,
        truncated,
        steps,
        rounds,
    }
}
