//! Weak acyclicity of the variable expansion: a syntactic guarantee that the
//! oblivious chase terminates.
//!
//! Plain weak acyclicity is tuned to the restricted chase. `p(Y) :- p(X)` has
//! no dependency edges at all, yet its oblivious chase never stops because
//! each new null yields a new body homomorphism. The variable expansion
//! threads body-only variables through a fresh predicate so that such cycles
//! become visible in the dependency graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::semantics::fresh_name;
use crate::syntax::{Atom, Program, Rule, Term};

/// Argument position `(predicate, index)`, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PositionVertex {
    pub predicate: String,
    pub index: usize,
}

impl PositionVertex {
    pub fn new(predicate: impl Into<String>, index: usize) -> Self {
        PositionVertex {
            predicate: predicate.into(),
            index,
        }
    }
}

impl fmt::Display for PositionVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.predicate, self.index)
    }
}

pub type Edge = (PositionVertex, PositionVertex);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub vertices: BTreeSet<PositionVertex>,
    pub normal_edges: BTreeSet<Edge>,
    pub special_edges: BTreeSet<Edge>,
}

/// Replaces every existential rule `φ(x̄) → ∃ȳ R(ȳ, x̄')` by
/// `φ(x̄) → ∃ȳ R*(ȳ, x̄', x̄*)` and `R*(ȳ, x̄', x̄*) → R(ȳ, x̄')`, where `x̄*`
/// are the body-only variables. Other rules are kept.
pub fn variable_expansion(program: &Program) -> Program {
    if !program.has_existential_rules() {
        return program.clone();
    }
    let mut taken: BTreeSet<String> = program.signature().keys().cloned().collect();
    let mut rules = Vec::new();
    for rule in program.rules() {
        if !rule.is_existential() {
            rules.push(rule.clone());
            continue;
        }
        let head = rule.head();
        let head_vars: BTreeSet<&str> = head.vars().collect();
        let mut body_only: Vec<&str> = Vec::new();
        for v in rule.body().iter().flat_map(Atom::vars) {
            if !head_vars.contains(v) && !body_only.contains(&v) {
                body_only.push(v);
            }
        }
        let star = fresh_name(&head.predicate, '*', &taken);
        taken.insert(star.clone());
        let mut star_args = head.args.clone();
        star_args.extend(body_only.iter().map(|v| Term::var(*v)));
        let star_atom = Atom::new(star, star_args);
        rules.push(Rule::new(star_atom.clone(), rule.body().to_vec()).expect("same body"));
        rules.push(Rule::new(head.clone(), vec![star_atom]).expect("head variables are bound"));
    }
    Program::new(rules).expect("fresh predicates have a single arity")
}

pub fn build_dependency_graph(program: &Program) -> DependencyGraph {
    let mut graph = DependencyGraph::default();
    for (pred, &arity) in program.signature() {
        for i in 1..=arity {
            graph.vertices.insert(PositionVertex::new(pred.clone(), i));
        }
    }
    for rule in program.rules() {
        let positions = |atoms: &[Atom]| {
            let mut map: BTreeMap<String, Vec<PositionVertex>> = BTreeMap::new();
            for a in atoms {
                for (i, t) in a.args.iter().enumerate() {
                    if let Term::Var(v) = t {
                        map.entry(v.clone())
                            .or_default()
                            .push(PositionVertex::new(a.predicate.clone(), i + 1));
                    }
                }
            }
            map
        };
        let body = positions(rule.body());
        let head = positions(std::slice::from_ref(rule.head()));
        for (var, head_pos) in &head {
            let Some(body_pos) = body.get(var) else { continue };
            for from in body_pos {
                for to in head_pos {
                    graph.normal_edges.insert((from.clone(), to.clone()));
                }
                for y in rule.existential_vars() {
                    for to in head.get(y).into_iter().flatten() {
                        graph.special_edges.insert((from.clone(), to.clone()));
                    }
                }
            }
        }
    }
    graph
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcyclicityReport {
    pub weakly_acyclic: bool,
    /// A cycle `v0 → v1 → … → v0` whose first edge is special, listed
    /// without repeating `v0` at the end.
    pub witness: Option<Vec<PositionVertex>>,
    pub expanded: Program,
    pub graph: DependencyGraph,
}

/// Tests whether the dependency graph of `ve(program)` has no cycle through
/// a special edge.
pub fn is_weakly_acyclic_ve(program: &Program) -> AcyclicityReport {
    let expanded = variable_expansion(program);
    let graph = build_dependency_graph(&expanded);

    let mut g: DiGraph<PositionVertex, ()> = DiGraph::new();
    let mut node: BTreeMap<&PositionVertex, NodeIndex> = BTreeMap::new();
    for v in &graph.vertices {
        node.insert(v, g.add_node(v.clone()));
    }
    for (a, b) in graph.normal_edges.iter().chain(&graph.special_edges) {
        if !g.contains_edge(node[a], node[b]) {
            g.add_edge(node[a], node[b], ());
        }
    }
    let mut component = vec![usize::MAX; g.node_count()];
    for (c, scc) in tarjan_scc(&g).into_iter().enumerate() {
        for n in scc {
            component[n.index()] = c;
        }
    }

    let witness = graph.special_edges.iter().find_map(|(from, to)| {
        let (a, b) = (node[from], node[to]);
        if component[a.index()] != component[b.index()] {
            return None;
        }
        let mut cycle = vec![from.clone()];
        if a != b {
            cycle.extend(shortest_path(&g, b, a, &component)?);
            cycle.pop();
        }
        Some(cycle)
    });

    AcyclicityReport {
        weakly_acyclic: witness.is_none(),
        witness,
        expanded,
        graph,
    }
}

/// Breadth-first path `from → … → to` inside one strongly connected component.
fn shortest_path(
    g: &DiGraph<PositionVertex, ()>,
    from: NodeIndex,
    to: NodeIndex,
    component: &[usize],
) -> Option<Vec<PositionVertex>> {
    let scc = component[from.index()];
    let mut prev: BTreeMap<NodeIndex, NodeIndex> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(n) = queue.pop_front() {
        if n == to {
            let mut path = vec![g[n].clone()];
            let mut cur = n;
            while let Some(&p) = prev.get(&cur) {
                path.push(g[p].clone());
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        let mut next: Vec<NodeIndex> = g.neighbors(n).collect();
        next.sort_by(|x, y| g[*x].cmp(&g[*y]));
        for m in next {
            if component[m.index()] == scc && seen.insert(m) {
                prev.insert(m, n);
                queue.push_back(m);
            }
        }
    }
    None
}
