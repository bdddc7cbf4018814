use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mvlog::degree::{format_rational, parse_rational};
use mvlog::engine::{GroundProgram, QueryOutcome};
use mvlog::parser::{assemble, parse_ground_atom, ParseOptions, SourceFile};
use mvlog::semantics::Relaxed;
use mvlog::termination::is_weakly_acyclic_ve;
use mvlog::{
    relax_rewrite, Engine, EngineError, EngineOptions, GroundAtom, GroundModel, Instance, ModelKind,
    Outcome, TruthDegree,
};

const OK: u8 = 0;
const NOT_ENTAILED: u8 = 1;
const UNSATISFIABLE: u8 = 2;
const INPUT_ERROR: u8 = 3;
const CHASE_LIMIT: u8 = 4;
const NO_BASED_MODEL: u8 = 5;

#[derive(Parser)]
#[command(name = "mvlog", version, about = "Many-valued Datalog reasoner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the minimal (or preferred) model.
    Solve(Common),
    /// Decide whether an atom holds to at least a given degree.
    Query {
        /// Ground atom, e.g. `orca(i1)`.
        atom: String,
        #[arg(long = "at-least", value_name = "RATIONAL")]
        at_least: String,
        #[command(flatten)]
        common: Common,
    },
    /// Report termination, satisfiability and grounding statistics.
    Check(Common),
    /// Dump the chase limit, ground rules, nulls and the linear program.
    Ground(Common),
}

#[derive(Args)]
struct Common {
    /// Input files; facts and rules are merged.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Satisfaction level, a rational in (0, 1].
    #[arg(long = "K", value_name = "RATIONAL", default_value = "1")]
    k: String,
    #[arg(long, value_enum, default_value_t = Mode::Strict)]
    mode: Mode,
    #[arg(long = "max-chase-steps", value_name = "N")]
    max_chase_steps: Option<usize>,
    /// Do not fix classically certain atoms before solving.
    #[arg(long = "no-fast-path")]
    no_fast_path: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Reject rules with head-only variables.
    #[arg(long = "no-existentials")]
    no_existentials: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Strict,
    Relaxed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: INPUT_ERROR,
            message: message.into(),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match e {
            EngineError::TruncatedChase { .. } | EngineError::ChaseLimitRequired { .. } => CHASE_LIMIT,
            _ => INPUT_ERROR,
        };
        let mut message = e.to_string();
        if let EngineError::ChaseLimitRequired { witness } = &e {
            message.push_str(&format!("\nwitness cycle: {}", cycle_text(witness)));
        }
        Failure { code, message }
    }
}

/// The instance the engine sees, plus the rewriting it came from.
struct Loaded {
    original: Instance,
    relaxed: Option<Relaxed>,
}

impl Loaded {
    fn instance(&self) -> &Instance {
        self.relaxed.as_ref().map_or(&self.original, |r| &r.instance)
    }

    /// Maps an atom of the solved instance to what the user sees; `None`
    /// hides the fixed database copy in relaxed mode.
    fn present(&self, atom: &GroundAtom) -> Option<GroundAtom> {
        let Some(r) = &self.relaxed else {
            return Some(atom.clone());
        };
        if let Some(orig) = r.original_predicate(&atom.predicate) {
            return Some(GroundAtom::new(orig, atom.args.clone()));
        }
        if r.primed.contains_key(&atom.predicate) {
            return None;
        }
        Some(atom.clone())
    }

    fn lookup(&self, atom: &GroundAtom) -> GroundAtom {
        match &self.relaxed {
            Some(r) => GroundAtom::new(r.relaxed_predicate(&atom.predicate), atom.args.clone()),
            None => atom.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => OK,
                _ => INPUT_ERROR,
            };
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok((code, out)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("mvlog: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(u8, String), Failure> {
    match cli.command {
        Command::Solve(c) => solve(&c),
        Command::Query { atom, at_least, common } => query(&common, &atom, &at_least),
        Command::Check(c) => check(&c),
        Command::Ground(c) => ground(&c),
    }
}

fn load(c: &Common) -> Result<Loaded, Failure> {
    let options = ParseOptions {
        strict_safety: c.no_existentials,
    };
    let mut files = Vec::new();
    for path in &c.files {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let name = path.display().to_string();
        files.push(SourceFile::parse(Some(&name), &text, options).map_err(|e| Failure::input(e.to_string()))?);
    }
    let (program, db) = assemble(&files).map_err(|e| Failure::input(e.to_string()))?;
    let k = degree(&c.k, "--K")?;
    let original = Instance::new(program, db, k).map_err(|e| Failure::input(e.to_string()))?;
    let relaxed = (c.mode == Mode::Relaxed).then(|| relax_rewrite(&original));
    Ok(Loaded { original, relaxed })
}

fn degree(text: &str, flag: &str) -> Result<TruthDegree, Failure> {
    let value = parse_rational(text).ok_or_else(|| Failure::input(format!("{flag}: `{text}` is not a rational number")))?;
    TruthDegree::new(value).map_err(|e| Failure::input(format!("{flag}: {e}")))
}

fn engine(c: &Common) -> Engine {
    Engine::new(EngineOptions {
        fast_path: !c.no_fast_path,
        max_chase_steps: c.max_chase_steps,
    })
}

fn render(c: &Common, value: Value, text: String) -> String {
    match c.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => text,
    }
}

fn status_name(outcome: &Outcome) -> &'static str {
    match outcome {
        Outcome::Model(_) => "model",
        Outcome::Unsatisfiable => "unsatisfiable",
        Outcome::NoObliviousBaseModel => "no_oblivious_base_model",
    }
}

fn status_code(outcome: &Outcome) -> u8 {
    match outcome {
        Outcome::Model(_) => OK,
        Outcome::Unsatisfiable => UNSATISFIABLE,
        Outcome::NoObliviousBaseModel => NO_BASED_MODEL,
    }
}

fn model_entries(loaded: &Loaded, model: &GroundModel) -> Vec<(String, String, &'static str)> {
    let db = loaded.original.database();
    let mut entries = Vec::new();
    for (atom, d) in model.assignment.support() {
        let Some(shown) = loaded.present(atom) else { continue };
        let source = if db.get(&shown) == Some(d) {
            "given"
        } else if model.certain_atoms.contains(atom) {
            "certain"
        } else {
            "derived"
        };
        entries.push((shown.to_string(), d.to_string(), source));
    }
    entries.sort();
    entries
}

fn solve(c: &Common) -> Result<(u8, String), Failure> {
    let loaded = load(c)?;
    let outcome = engine(c).solve(loaded.instance())?;
    let mut value = json!({ "status": status_name(&outcome), "K": loaded.original.k().to_string() });
    let mut text = String::new();
    match &outcome {
        Outcome::Model(m) => {
            let entries = model_entries(&loaded, m);
            value["kind"] = json!(match m.kind {
                ModelKind::Minimal => "minimal",
                ModelKind::Preferred => "preferred",
            });
            value["model"] = entries
                .iter()
                .map(|(a, d, s)| json!({ "atom": a, "degree": d, "source": s }))
                .collect();
            for (a, d, s) in &entries {
                text.push_str(&format!("{d} :: {a}.  % {s}\n"));
            }
        }
        other => text.push_str(&format!("{}\n", status_name(other).replace('_', " "))),
    }
    Ok((status_code(&outcome), render(c, value, text)))
}

fn query(c: &Common, atom: &str, at_least: &str) -> Result<(u8, String), Failure> {
    let loaded = load(c)?;
    let atom = parse_ground_atom(atom).map_err(|e| Failure::input(e.to_string()))?;
    let threshold = degree(at_least, "--at-least")?;
    let engine = engine(c);
    let answer = engine.k_truth(loaded.instance(), &loaded.lookup(&atom), &threshold)?;
    let (code, value, text) = match answer {
        QueryOutcome::Answered(r) => {
            let value = json!({
                "atom": atom.to_string(),
                "threshold": r.threshold.to_string(),
                "entailed": r.entailed,
                "degree": r.degree.to_string(),
                "model_relative": r.model_relative,
            });
            let verdict = if r.entailed { "entailed" } else { "not entailed" };
            let text = format!("{verdict}: {atom} has degree {} (threshold {})\n", r.degree, r.threshold);
            (if r.entailed { OK } else { NOT_ENTAILED }, value, text)
        }
        QueryOutcome::Unsatisfiable => (UNSATISFIABLE, json!({ "status": "unsatisfiable" }), "unsatisfiable\n".into()),
        QueryOutcome::NoObliviousBaseModel => (
            NO_BASED_MODEL,
            json!({ "status": "no_oblivious_base_model" }),
            "no oblivious base model\n".into(),
        ),
    };
    Ok((code, render(c, value, text)))
}

fn cycle_text(cycle: &[mvlog::termination::PositionVertex]) -> String {
    let mut parts: Vec<String> = cycle.iter().map(ToString::to_string).collect();
    if let Some(first) = parts.first().cloned() {
        parts.push(first);
    }
    parts.join(" -> ")
}

fn check(c: &Common) -> Result<(u8, String), Failure> {
    let loaded = load(c)?;
    let instance = loaded.instance();
    let report = is_weakly_acyclic_ve(instance.program());
    let existential = instance.program().has_existential_rules();
    let mut value = json!({
        "weakly_acyclic": report.weakly_acyclic,
        "witness": report.witness.as_ref().map(|w| w.iter().map(ToString::to_string).collect::<Vec<_>>()),
        "existential_rules": existential,
        "rules": instance.program().rules().len(),
        "facts": instance.database().len(),
    });
    let mut text = match &report.witness {
        None => "weakly acyclic\n".to_string(),
        Some(w) => format!("not weakly acyclic\nwitness cycle: {}\n", cycle_text(w)),
    };
    if existential && !report.weakly_acyclic && c.max_chase_steps.is_none() {
        value["satisfiability"] = Value::Null;
        text.push_str("chase may not terminate; pass --max-chase-steps\n");
        return Ok((CHASE_LIMIT, render(c, value, text)));
    }

    let engine = engine(c);
    let (chase, ground) = engine.ground(instance)?;
    let outcome = engine.solve(instance)?;
    value["satisfiability"] = json!(match &outcome {
        Outcome::Model(_) => "satisfiable",
        other => status_name(other),
    });
    value["stats"] = json!({
        "olim": chase.olim.len(),
        "gamma": chase.gamma.len(),
        "nulls": chase.registry.null_count(),
        "chase_steps": chase.steps,
        "lp_variables": ground.lp.var_count(),
        "lp_free_variables": ground.lp.free_var_count(),
        "lp_constraints": ground.lp.constraints().len(),
    });
    text.push_str(&format!(
        "{}\n|OLim| = {}, |Gamma| = {}, nulls = {}, LP: {} variables ({} free), {} constraints\n",
        match &outcome {
            Outcome::Model(_) => "satisfiable".to_string(),
            other => status_name(other).replace('_', " "),
        },
        chase.olim.len(),
        chase.gamma.len(),
        chase.registry.null_count(),
        ground.lp.var_count(),
        ground.lp.free_var_count(),
        ground.lp.constraints().len(),
    ));
    Ok((status_code(&outcome), render(c, value, text)))
}

fn lp_json(ground: &GroundProgram) -> Value {
    let lp = &ground.lp;
    let terms = |form: &mvlog::lp::LinearForm| -> Vec<Value> {
        form.terms()
            .map(|(v, c)| json!({ "var": lp.variable(v).name, "coeff": format_rational(c) }))
            .collect()
    };
    let variables: Vec<Value> = lp
        .variables()
        .iter()
        .zip(&ground.weights)
        .map(|(v, w)| {
            json!({
                "name": v.name,
                "lo": format_rational(&v.lo),
                "hi": format_rational(&v.hi),
                "fixed": v.fixed.as_ref().map(format_rational),
                "weight": format_rational(w),
            })
        })
        .collect();
    let constraints: Vec<Value> = lp
        .constraints()
        .iter()
        .map(|c| {
            json!({
                "terms": terms(&c.form),
                "constant": format_rational(c.form.constant_term()),
                "rhs": format_rational(&c.rhs),
            })
        })
        .collect();
    json!({
        "variables": variables,
        "constraints": constraints,
        "objective": terms(lp.objective()),
        "secondary": terms(&ground.secondary),
    })
}

fn ground(c: &Common) -> Result<(u8, String), Failure> {
    let loaded = load(c)?;
    let (chase, ground) = engine(c).ground(loaded.instance())?;
    let nulls: Vec<Value> = chase
        .registry
        .iter()
        .map(|(rule, hom, ids)| {
            let binding: BTreeMap<&String, String> = hom.0.iter().map(|(k, v)| (k, v.to_string())).collect();
            json!({
                "rule": rule,
                "homomorphism": binding,
                "nulls": ids.iter().map(ToString::to_string).collect::<Vec<_>>(),
            })
        })
        .collect();
    let gamma: Vec<Value> = chase
        .gamma
        .iter()
        .map(|g| {
            json!({
                "rule": g.origin_rule_id,
                "body": g.body.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "head": g.head.to_string(),
                "nulls": g.existential_nulls.iter().map(ToString::to_string).collect::<Vec<_>>(),
            })
        })
        .collect();
    let value = json!({
        "olim": chase.olim.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "gamma": gamma,
        "nulls": nulls,
        "lp": lp_json(&ground),
    });

    let mut text = String::from("% chase limit\n");
    for a in &chase.olim {
        text.push_str(&format!("{a}\n"));
    }
    text.push_str("% ground rules\n");
    for g in &chase.gamma {
        text.push_str(&format!("[{}] {g}\n", g.origin_rule_id));
    }
    text.push_str("% nulls\n");
    for (rule, hom, ids) in chase.registry.iter() {
        let binding: Vec<String> = hom.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let ids: Vec<String> = ids.iter().map(ToString::to_string).collect();
        text.push_str(&format!("{} <- rule {rule} [{}]\n", ids.join(", "), binding.join(", ")));
    }
    text.push_str("% linear program\n");
    text.push_str(&ground.lp.to_lp_text());
    Ok((OK, render(c, value, text)))
}
