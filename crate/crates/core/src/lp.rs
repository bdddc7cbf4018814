//! Exact linear programming over the rationals.
//!
//! Models are small box-bounded programs with `≥` rows. Fixed variables are
//! substituted out, the remaining variables are split into independent
//! connected components, and each component is solved with a dense two-phase
//! simplex using Bland's rule. All arithmetic is exact.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_traits::{One, Signed, Zero};

use crate::degree::{format_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// `Σ coeff·x + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearForm {
    terms: BTreeMap<VarId, Rational>,
    constant: Rational,
}

impl LinearForm {
    pub fn new() -> Self {
        LinearForm::default()
    }

    pub fn constant(value: Rational) -> Self {
        LinearForm {
            terms: BTreeMap::new(),
            constant: value,
        }
    }

    pub fn add_term(&mut self, var: VarId, coeff: Rational) {
        let entry = self.terms.entry(var).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&var);
        }
    }

    pub fn add_constant(&mut self, value: Rational) {
        self.constant += value;
    }

    pub fn with_term(mut self, var: VarId, coeff: Rational) -> Self {
        self.add_term(var, coeff);
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, &Rational)> {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn coefficient(&self, var: VarId) -> Rational {
        self.terms.get(&var).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        let mut total = self.constant.clone();
        for (v, c) in &self.terms {
            total += c * &values[v.0];
        }
        total
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub lo: Rational,
    pub hi: Rational,
    pub fixed: Option<Rational>,
}

/// `form ≥ rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub form: LinearForm,
    pub rhs: Rational,
}

impl Constraint {
    pub fn holds(&self, values: &[Rational]) -> bool {
        self.form.eval(values) >= self.rhs
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearProgram {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: LinearForm,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("malformed model: {0}")]
    MalformedModel(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub status: Status,
    /// Values by variable id; empty unless optimal.
    pub assignment: Vec<Rational>,
    /// Value of the model's own objective; set when optimal.
    pub objective_value: Option<Rational>,
}

impl Solution {
    fn without(status: Status) -> Self {
        Solution {
            status,
            assignment: Vec::new(),
            objective_value: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn value(&self, var: VarId) -> &Rational {
        &self.assignment[var.0]
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        LinearProgram::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lo: Rational, hi: Rational) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lo,
            hi,
            fixed: None,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn fix(&mut self, var: VarId, value: Rational) {
        self.variables[var.0].fixed = Some(value);
    }

    pub fn add_constraint(&mut self, form: LinearForm, rhs: Rational) {
        self.constraints.push(Constraint { form, rhs });
    }

    pub fn set_objective(&mut self, objective: LinearForm) {
        self.objective = objective;
    }

    pub fn objective(&self) -> &LinearForm {
        &self.objective
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, var: VarId) -> &Variable {
        &self.variables[var.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    pub fn free_var_count(&self) -> usize {
        self.variables.iter().filter(|v| v.fixed.is_none()).count()
    }

    fn validate(&self) -> Result<(), LpError> {
        for v in &self.variables {
            if v.lo > v.hi {
                return Err(LpError::MalformedModel(format!(
                    "variable {} has empty bounds [{}, {}]",
                    v.name,
                    format_rational(&v.lo),
                    format_rational(&v.hi)
                )));
            }
            if let Some(f) = &v.fixed {
                if *f < v.lo || *f > v.hi {
                    return Err(LpError::MalformedModel(format!(
                        "variable {} is fixed to {} outside [{}, {}]",
                        v.name,
                        format_rational(f),
                        format_rational(&v.lo),
                        format_rational(&v.hi)
                    )));
                }
            }
        }
        let forms = self.constraints.iter().map(|c| &c.form).chain([&self.objective]);
        for form in forms {
            if let Some((v, _)) = form.terms().find(|(v, _)| v.0 >= self.variables.len()) {
                return Err(LpError::MalformedModel(format!("undeclared variable #{}", v.0)));
            }
        }
        Ok(())
    }

    /// Whether `values` satisfies every bound, fixing and constraint.
    pub fn is_feasible(&self, values: &[Rational]) -> bool {
        values.len() == self.variables.len()
            && self.variables.iter().zip(values).all(|(v, x)| {
                *x >= v.lo && *x <= v.hi && v.fixed.as_ref().is_none_or(|f| f == x)
            })
            && self.constraints.iter().all(|c| c.holds(values))
    }

    /// LP-style text rendering for inspection.
    pub fn to_lp_text(&self) -> String {
        let term_text = |form: &LinearForm| {
            let mut s = String::new();
            for (i, (v, c)) in form.terms().enumerate() {
                let neg = c.is_negative();
                let mag = format_rational(&c.abs());
                let sign = match (i, neg) {
                    (0, false) => "",
                    (0, true) => "-",
                    (_, false) => " + ",
                    (_, true) => " - ",
                };
                let coeff = if mag == "1" { String::new() } else { format!("{mag} ") };
                let _ = write!(s, "{sign}{coeff}{}", self.variables[v.0].name);
            }
            if s.is_empty() {
                s.push('0');
            }
            s
        };
        let mut out = String::new();
        let _ = writeln!(out, "minimize\n  {}", term_text(&self.objective));
        out.push_str("subject to\n");
        for c in &self.constraints {
            let rhs = &c.rhs - c.form.constant_term();
            let _ = writeln!(out, "  {} >= {}", term_text(&c.form), format_rational(&rhs));
        }
        out.push_str("bounds\n");
        for v in &self.variables {
            match &v.fixed {
                Some(f) => writeln!(out, "  {} = {}", v.name, format_rational(f)),
                None => writeln!(
                    out,
                    "  {} <= {} <= {}",
                    format_rational(&v.lo),
                    v.name,
                    format_rational(&v.hi)
                ),
            }
            .expect("writing to a string");
        }
        out
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_lp_text())
    }
}

/// Minimizes the model's objective.
pub fn solve(lp: &LinearProgram) -> Result<Solution, LpError> {
    solve_sequence(lp, std::slice::from_ref(&lp.objective))
}

/// Minimizes the model's objective and, among its optima, `secondary`.
///
/// After the first stage every nonbasic column with a strictly positive
/// reduced cost is held at zero, which restricts the second stage to exactly
/// the optimal face of the first objective.
pub fn lexicographic_solve(lp: &LinearProgram, secondary: &LinearForm) -> Result<Solution, LpError> {
    solve_sequence(lp, &[lp.objective.clone(), secondary.clone()])
}

/// Lexicographic minimization over `objectives` in order.
pub fn solve_sequence(lp: &LinearProgram, objectives: &[LinearForm]) -> Result<Solution, LpError> {
    lp.validate()?;
    for form in objectives {
        if form.terms().any(|(v, _)| v.0 >= lp.variables.len()) {
            return Err(LpError::MalformedModel("objective mentions an undeclared variable".into()));
        }
    }

    let n = lp.variables.len();
    let mut values: Vec<Rational> = lp
        .variables
        .iter()
        .map(|v| v.fixed.clone().unwrap_or_else(|| v.lo.clone()))
        .collect();
    let free: Vec<bool> = lp.variables.iter().map(|v| v.fixed.is_none()).collect();

    // Rows over shifted free variables y = x - lo: Σ a·y ≥ b.
    let mut rows: Vec<(Vec<(usize, Rational)>, Rational)> = Vec::new();
    for c in &lp.constraints {
        let mut b = &c.rhs - c.form.constant_term();
        let mut coeffs = Vec::new();
        for (v, a) in c.form.terms() {
            b -= a * &values[v.0];
            if free[v.0] {
                coeffs.push((v.0, a.clone()));
            }
        }
        if coeffs.is_empty() {
            if b.is_positive() {
                return Ok(Solution::without(Status::Infeasible));
            }
            continue;
        }
        rows.push((coeffs, b));
    }

    // Union-find over free variables linked by a row.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for (coeffs, _) in &rows {
        let first = coeffs[0].0;
        for (v, _) in &coeffs[1..] {
            let (a, b) = (find(&mut parent, first), find(&mut parent, *v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut components: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for v in (0..n).filter(|&v| free[v]) {
        let root = find(&mut parent, v);
        components.entry(root).or_default().0.push(v);
    }
    for (i, (coeffs, _)) in rows.iter().enumerate() {
        let root = find(&mut parent, coeffs[0].0);
        components.get_mut(&root).expect("row variables are free").1.push(i);
    }

    for (vars, row_ids) in components.values() {
        let local: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let upper: Vec<Rational> = vars.iter().map(|&v| &lp.variables[v].hi - &lp.variables[v].lo).collect();
        let comp_rows: Vec<(Vec<(usize, Rational)>, Rational)> = row_ids
            .iter()
            .map(|&r| {
                let (coeffs, b) = &rows[r];
                (coeffs.iter().map(|(v, a)| (local[v], a.clone())).collect(), b.clone())
            })
            .collect();
        let costs: Vec<Vec<Rational>> = objectives
            .iter()
            .map(|form| vars.iter().map(|&v| form.coefficient(VarId(v))).collect())
            .collect();
        match Tableau::solve(vars.len(), &upper, &comp_rows, &costs) {
            Ok(y) => {
                for (i, &v) in vars.iter().enumerate() {
                    values[v] = &lp.variables[v].lo + &y[i];
                }
            }
            Err(status) => return Ok(Solution::without(status)),
        }
    }

    assert!(lp.is_feasible(&values), "simplex returned an infeasible point");
    let objective_value = Some(lp.objective.eval(&values));
    Ok(Solution {
        status: Status::Optimal,
        assignment: values,
        objective_value,
    })
}

/// Dense simplex tableau in equality form with non-negative columns.
struct Tableau {
    /// Constraint rows; the last entry of each row is its right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Columns that may not enter the basis.
    banned: Vec<bool>,
    columns: usize,
}

impl Tableau {
    /// Solves one component. Structural columns `0..n`, then one slack per
    /// row and one artificial per row that needs it. Returns `y`.
    fn solve(
        n: usize,
        upper: &[Rational],
        rows: &[(Vec<(usize, Rational)>, Rational)],
        objectives: &[Vec<Rational>],
    ) -> Result<Vec<Rational>, Status> {
        // Equality rows: Σ a·y - s = b for each ≥ row, y_j + t_j = u_j per bound.
        let m = rows.len() + n;
        let slack_base = n;
        let art_base = n + m;
        let mut art_rows = Vec::new();
        for (coeffs, b) in rows {
            // b > 0 needs an artificial; otherwise negate and start from the slack.
            if b.is_positive() {
                art_rows.push(coeffs.len());
            }
        }
        let columns = art_base + art_rows.len();
        let mut t = Tableau {
            rows: Vec::with_capacity(m),
            basis: Vec::with_capacity(m),
            banned: vec![false; columns],
            columns,
        };
        let mut art = art_base;
        for (i, (coeffs, b)) in rows.iter().enumerate() {
            let mut row = vec![Rational::zero(); columns + 1];
            if b.is_positive() {
                for (j, a) in coeffs {
                    row[*j] = a.clone();
                }
                row[slack_base + i] = -Rational::one();
                row[art] = Rational::one();
                row[columns] = b.clone();
                t.basis.push(art);
                art += 1;
            } else {
                for (j, a) in coeffs {
                    row[*j] = -a.clone();
                }
                row[slack_base + i] = Rational::one();
                row[columns] = -b.clone();
                t.basis.push(slack_base + i);
            }
            t.rows.push(row);
        }
        for (j, u) in upper.iter().enumerate() {
            let mut row = vec![Rational::zero(); columns + 1];
            row[j] = Rational::one();
            row[slack_base + rows.len() + j] = Rational::one();
            row[columns] = u.clone();
            t.basis.push(slack_base + rows.len() + j);
            t.rows.push(row);
        }

        if art > art_base {
            let mut phase1 = vec![Rational::zero(); columns];
            for c in &mut phase1[art_base..] {
                *c = Rational::one();
            }
            let value = t.optimize(&phase1).map_err(|_| Status::Unbounded)?;
            if value.is_positive() {
                return Err(Status::Infeasible);
            }
            t.expel_artificials(art_base);
            for b in &mut t.banned[art_base..] {
                *b = true;
            }
        }

        for obj in objectives {
            let mut cost = vec![Rational::zero(); columns];
            cost[..n].clone_from_slice(obj);
            t.optimize(&cost)?;
            // Keep later stages on this objective's optimal face.
            let reduced = t.reduced_costs(&cost);
            for (j, d) in reduced.iter().enumerate() {
                if d.is_positive() && !t.basis.contains(&j) {
                    t.banned[j] = true;
                }
            }
        }

        let mut y = vec![Rational::zero(); n];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < n {
                y[b] = t.rows[i][columns].clone();
            }
        }
        Ok(y)
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                let a = &self.rows[i][j];
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn objective_value(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, &b)| &cost[b] * &self.rows[i][self.columns])
            .sum()
    }

    /// Primal simplex with Bland's rule. Returns the optimal value.
    fn optimize(&mut self, cost: &[Rational]) -> Result<Rational, Status> {
        let mut d = self.reduced_costs(cost);
        loop {
            let entering = (0..self.columns).find(|&j| !self.banned[j] && d[j].is_negative());
            let Some(e) = entering else {
                return Ok(self.objective_value(cost));
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &row[self.columns] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Err(Status::Unbounded);
            };
            self.pivot(r, e);
            let factor = d[e].clone();
            for (j, dj) in d.iter_mut().enumerate() {
                let a = &self.rows[r][j];
                if !a.is_zero() {
                    *dj -= &factor * a;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e].clone();
        if !p.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &p;
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[e].is_zero() {
                continue;
            }
            let f = row[e].clone();
            for (x, px) in row.iter_mut().zip(&pivot_row) {
                if !px.is_zero() {
                    *x -= &f * px;
                }
            }
        }
        self.basis[r] = e;
    }

    /// Pivots zero-valued artificials out of the basis, dropping rows that
    /// turn out to be redundant.
    fn expel_artificials(&mut self, art_base: usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < art_base {
                i += 1;
                continue;
            }
            match (0..art_base).find(|&j| !self.rows[i][j].is_zero()) {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}
