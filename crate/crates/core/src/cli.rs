//! Command-line front end. [`run`] is the whole program minus process exit,
//! so it can be driven from tests with in-memory writers.
//!
//! Exit codes: 0 success / holds, 1 violation / counterexample / failure,
//! 2 usage, parse or I/O error.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::diagram::ClassDiagram;
use crate::finder::{check_refinement, find_instance, Bounds, RefinementVerdict, Strategy};
use crate::fuzz::{fuzz_rule_soundness, GeneratorConfig, RuleId};
use crate::names::{ClassifierId, NameId};
use crate::snapshot::{satisfies, Snapshot, Verdict};
use crate::textio::{
    self, parse_diagram_with_spans, parse_script, parse_snapshot, print_diagram, print_snapshot, print_step,
};
use crate::transform::{run_proof_script, ProofFailure};
use crate::wellformed::{well_formed, ValidationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "classcalc", version, about = "Check, interpret and transform class diagrams")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a diagram for well-formedness.
    Check { diagram: PathBuf },
    /// Check whether a snapshot is a model of a diagram.
    Satisfies { diagram: PathBuf, snapshot: PathBuf },
    /// Search for an instance of a diagram within a bound.
    Sat {
        diagram: PathBuf,
        #[arg(long, default_value_t = 2)]
        bound: usize,
        /// Classifiers whose extension must be non-empty (comma separated).
        #[arg(long, value_delimiter = ',')]
        nonempty: Vec<String>,
        #[arg(long, default_value_t = Strategy::Pruned)]
        strategy: Strategy,
    },
    /// Check that every model of D1 within the bound is a model of D2.
    Refine {
        d1: PathBuf,
        d2: PathBuf,
        #[arg(long, default_value_t = 2)]
        bound: usize,
        #[arg(long, default_value_t = Strategy::Pruned)]
        strategy: Strategy,
    },
    /// Replay a proof script, optionally checking each step within a bound.
    Prove {
        script: PathBuf,
        #[arg(long)]
        verify_bound: Option<usize>,
        #[arg(long, default_value_t = Strategy::Pruned)]
        strategy: Strategy,
    },
    /// Apply a rule to random diagrams and check each application.
    Fuzz {
        #[arg(long)]
        rule: RuleId,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        bound: usize,
        #[arg(long, default_value_t = Strategy::Pruned)]
        strategy: Strategy,
    },
}

/// Failure that aborts a command with exit code 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

type CmdResult = Result<i32, Fatal>;

struct Output<'a> {
    format: Format,
    out: &'a mut dyn Write,
}

impl Output<'_> {
    fn emit(&mut self, text: &str, value: Value) -> std::io::Result<()> {
        match self.format {
            Format::Text => self.out.write_all(text.as_bytes()),
            Format::Json => {
                writeln!(self.out, "{}", serde_json::to_string_pretty(&value).expect("serializable"))
            }
        }
    }
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    let mut output = Output { format: cli.format, out };
    let result = match cli.command {
        Command::Check { diagram } => cmd_check(&diagram, &mut output),
        Command::Satisfies { diagram, snapshot } => cmd_satisfies(&diagram, &snapshot, &mut output),
        Command::Sat { diagram, bound, nonempty, strategy } => {
            cmd_sat(&diagram, bound, &nonempty, strategy, &mut output)
        }
        Command::Refine { d1, d2, bound, strategy } => cmd_refine(&d1, &d2, bound, strategy, &mut output),
        Command::Prove { script, verify_bound, strategy } => {
            cmd_prove(&script, verify_bound, strategy, &mut output)
        }
        Command::Fuzz { rule, iters, seed, bound, strategy } => {
            cmd_fuzz(rule, iters, seed, bound, strategy, &mut output)
        }
    };
    match result {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn load_diagram(path: &Path) -> Result<(ClassDiagram, textio::DiagramSpans), Fatal> {
    let text = read(path)?;
    parse_diagram_with_spans(&text).map_err(|e| Fatal(format!("{}:{e}", path.display())))
}

/// Loads a diagram that later stages require to be well formed.
fn load_well_formed(path: &Path) -> Result<ClassDiagram, Fatal> {
    let (d, spans) = load_diagram(path)?;
    let mut report = well_formed(&d);
    if !report.ok {
        spans.annotate(&mut report);
        let lines: Vec<String> = report.errors().map(finding_line).collect();
        return Err(Fatal(format!("{} is not well formed:\n{}", path.display(), lines.join("\n"))));
    }
    Ok(d)
}

fn load_snapshot(path: &Path) -> Result<Snapshot, Fatal> {
    let text = read(path)?;
    parse_snapshot(&text).map_err(|e| Fatal(format!("{}:{e}", path.display())))
}

fn finding_line(f: &crate::wellformed::Finding) -> String {
    match f.span {
        Some(span) => format!("{} {} at {span}: {}", f.severity(), f.code, f.message),
        None => format!("{} {}: {}", f.severity(), f.code, f.message),
    }
}

fn report_json(d: &ClassDiagram, r: &ValidationReport) -> Value {
    json!({
        "command": "check",
        "diagram": d.name.as_str(),
        "ok": r.ok,
        "findings": r.findings.iter().map(|f| json!({
            "code": f.code.as_str(),
            "severity": f.severity().to_string(),
            "message": f.message,
            "subject": f.subject,
            "line": f.span.map(|s| s.line),
            "column": f.span.map(|s| s.column),
        })).collect::<Vec<_>>(),
    })
}

fn cmd_check(path: &Path, out: &mut Output) -> CmdResult {
    let (d, spans) = load_diagram(path)?;
    let mut report = well_formed(&d);
    spans.annotate(&mut report);
    let mut text = String::new();
    for f in &report.findings {
        text.push_str(&finding_line(f));
        text.push('\n');
    }
    text.push_str(&if report.ok {
        format!("{}: well formed\n", d.name)
    } else {
        format!("{}: {} error(s)\n", d.name, report.errors().count())
    });
    out.emit(&text, report_json(&d, &report))?;
    Ok(if report.ok { EXIT_OK } else { EXIT_FAIL })
}

fn verdict_text(v: &Verdict) -> String {
    let mut text = String::new();
    for x in &v.violations {
        text.push_str(&format!("{} [{}]: {}\n", x.axiom, x.subject.join(", "), x.detail));
    }
    text
}

fn verdict_json(v: &Verdict) -> Value {
    json!(v
        .violations
        .iter()
        .map(|x| json!({ "axiom": x.axiom.as_str(), "subject": x.subject, "detail": x.detail }))
        .collect::<Vec<_>>())
}

fn cmd_satisfies(diagram: &Path, snapshot: &Path, out: &mut Output) -> CmdResult {
    let d = load_well_formed(diagram)?;
    let s = load_snapshot(snapshot)?;
    let v = satisfies(&s, &d)?;
    let mut text = verdict_text(&v);
    text.push_str(&format!("{} {} {}\n", s.name, if v.satisfied { "satisfies" } else { "violates" }, d.name));
    let value = json!({
        "command": "satisfies",
        "diagram": d.name.as_str(),
        "snapshot": s.name.as_str(),
        "satisfied": v.satisfied,
        "violations": verdict_json(&v),
    });
    out.emit(&text, value)?;
    Ok(if v.satisfied { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_sat(
    path: &Path,
    bound: usize,
    nonempty: &[String],
    strategy: Strategy,
    out: &mut Output,
) -> CmdResult {
    let d = load_well_formed(path)?;
    let mut required = BTreeSet::new();
    for c in nonempty {
        let c = ClassifierId::new(c.as_str())?;
        if !d.classifiers.contains(&c) {
            return Err(Fatal(format!("--nonempty: {c} is not a classifier of {}", d.name)));
        }
        required.insert(c);
    }
    let bounds = Bounds::covering(bound, &[&d]).with_strategy(strategy);
    let found = find_instance(&d, &bounds, &required)?;
    let found = found.map(|s| renamed(&s, "witness"));
    let (text, code) = match &found {
        Some(s) => (format!("instance of {} within bound {bound}:\n{}", d.name, print_snapshot(s)), EXIT_OK),
        None => (
            format!("no instance of {} within bound {bound} (inconclusive beyond this bound)\n", d.name),
            EXIT_FAIL,
        ),
    };
    let value = json!({
        "command": "sat",
        "diagram": d.name.as_str(),
        "bound": bound,
        "found": found.is_some(),
        "witness": found.as_ref().map(print_snapshot),
    });
    out.emit(&text, value)?;
    Ok(code)
}

fn renamed(s: &Snapshot, name: &str) -> Snapshot {
    s.clone().with_name(NameId::new(name).expect("identifier"))
}

fn refinement_text(v: &RefinementVerdict, d1: &str, d2: &str, check: &ClassDiagram) -> String {
    match &v.witness {
        None => format!(
            "{}: every model of {} with at most {} object(s) is a model of {} ({} model(s) checked)\n",
            v.outcome, d1, v.max_objects, d2, v.checked_count
        ),
        Some(w) => {
            let w = renamed(w, "counterexample");
            let violations = satisfies(&w, check).map(|x| verdict_text(&x)).unwrap_or_default();
            format!(
                "{}: model of {} violating {} at bound {} (after {} model(s)):\n{}{}",
                v.outcome,
                d1,
                d2,
                v.max_objects,
                v.checked_count,
                print_snapshot(&w),
                violations
            )
        }
    }
}

/// `check` is the diagram the witness violates.
fn refinement_json(v: &RefinementVerdict, check: &ClassDiagram) -> Value {
    let witness = v.witness.as_ref().map(|w| renamed(w, "counterexample"));
    let violations = witness.as_ref().and_then(|w| satisfies(w, check).ok()).map(|x| verdict_json(&x));
    json!({
        "outcome": v.outcome.as_str(),
        "bound": v.max_objects,
        "checked_count": v.checked_count,
        "witness": witness.as_ref().map(print_snapshot),
        "violations": violations,
    })
}

fn cmd_refine(p1: &Path, p2: &Path, bound: usize, strategy: Strategy, out: &mut Output) -> CmdResult {
    let d1 = load_well_formed(p1)?;
    let d2 = load_well_formed(p2)?;
    let bounds = Bounds::covering(bound, &[&d1, &d2]).with_strategy(strategy);
    let v = check_refinement(&d1, &d2, &bounds)?;
    let mut value = refinement_json(&v, &d2);
    value["command"] = json!("refine");
    value["d1"] = json!(d1.name.as_str());
    value["d2"] = json!(d2.name.as_str());
    let text = refinement_text(&v, d1.name.as_str(), d2.name.as_str(), &d2);
    out.emit(&text, value)?;
    Ok(if v.holds() { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_prove(path: &Path, verify_bound: Option<usize>, strategy: Strategy, out: &mut Output) -> CmdResult {
    let text = read(path)?;
    let script = parse_script(&text).map_err(|e| Fatal(format!("{}:{e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let script = script.resolve(|rel| load_diagram(&base.join(rel)).map(|(d, _)| d))?;
    let bounds = verify_bound.map(|k| Bounds::covering(k, &[]).with_strategy(strategy));
    let result = run_proof_script(&script, bounds.as_ref());

    let mut text = String::new();
    let mut steps = Vec::new();
    for (i, record) in result.per_step.iter().enumerate() {
        let check = match &record.verdict {
            Some(v) => {
                format!(": {} at bound {} ({} model(s) checked)", v.outcome, v.max_objects, v.checked_count)
            }
            None => String::new(),
        };
        text.push_str(&format!(
            "step {} {} `{}`{check}\n",
            i + 1,
            record.step.kind(),
            print_step(&record.step)
        ));
        steps.push(json!({
            "index": i + 1,
            "kind": record.step.kind().as_str(),
            "step": print_step(&record.step),
            "verdict": record.verdict.as_ref().map(|v| refinement_json(v, &record.result)),
        }));
    }
    match &result.failure {
        None => {
            text.push_str(&format!("proof {} ok: {} step(s)", script.name, result.per_step.len()));
            text.push_str(if script.goal.is_some() { ", final diagram matches the goal\n" } else { "\n" });
        }
        Some(failure) => {
            text.push_str(&format!("proof {} failed: {failure}\n", script.name));
            match failure {
                ProofFailure::Counterexample { index, verdict } => {
                    let after = &result.per_step[*index].result;
                    let before = format!("the diagram before step {}", index + 1);
                    let label = "the diagram after it";
                    text.push_str(&refinement_text(verdict, &before, label, after));
                }
                ProofFailure::GoalMismatch => {
                    if let Some(last) = result.final_diagram() {
                        text.push_str("final diagram:\n");
                        text.push_str(&print_diagram(last));
                    }
                }
                _ => {}
            }
        }
    }
    let value = json!({
        "command": "prove",
        "script": script.name.as_str(),
        "ok": result.ok,
        "verify_bound": verify_bound,
        "steps": steps,
        "failure": result.failure.as_ref().map(|f| f.to_string()),
    });
    out.emit(&text, value)?;
    Ok(if result.ok { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_fuzz(
    rule: RuleId,
    iters: usize,
    seed: u64,
    bound: usize,
    strategy: Strategy,
    out: &mut Output,
) -> CmdResult {
    let bounds = Bounds::covering(bound, &[]).with_strategy(strategy);
    let report = fuzz_rule_soundness(rule, iters, &bounds, seed, &GeneratorConfig::default())?;
    let mut text = String::new();
    for f in &report.failures {
        text.push_str(&format!(
            "failure at iteration {}: `{}` on\n{}counterexample:\n{}",
            f.iteration,
            print_step(&f.step),
            print_diagram(&f.diagram),
            print_snapshot(&f.counterexample)
        ));
    }
    text.push_str(&format!(
        "rule {rule}: {} iteration(s), {} applied, {} failure(s) (seed {seed}, bound {bound})\n",
        report.iterations,
        report.applied,
        report.failures.len()
    ));
    let value = json!({
        "command": "fuzz",
        "rule": rule.as_str(),
        "seed": seed,
        "bound": bound,
        "iterations": report.iterations,
        "applied": report.applied,
        "failures": report.failures.iter().map(|f| json!({
            "iteration": f.iteration,
            "diagram": print_diagram(&f.diagram),
            "step": print_step(&f.step),
            "counterexample": print_snapshot(&f.counterexample),
        })).collect::<Vec<_>>(),
    });
    out.emit(&text, value)?;
    Ok(if report.failures.is_empty() { EXIT_OK } else { EXIT_FAIL })
}
