use std::path::Path;

use ogp_core::expr::Expr;
use ogp_core::frontend::{load, parse_expr, print_program};
use ogp_core::lang::{auto_label, instrument_counters, validate_wellformed, Program, PropertyKind};
use ogp_core::model::Model;
use ogp_core::obligation::{Obligation, Verdict};
use ogp_core::oracle::{build_state_space, raw::isomorphic_to, OracleError, Step, TransitionSystem};
use ogp_core::report::{check_program, CheckRun, PropertyOutcome};
use ogp_core::transformer::{guard_conjunction_split, progress_equivalence, SplitRequest};

use crate::render::{self, Sink};
use crate::{Opts, Status};

/// Runs `f` on every file; the overall status is the worst one.
pub fn each(files: &[std::path::PathBuf], out: &mut Sink, opts: &Opts, mut f: impl FnMut(&Path, &mut Sink, &Opts) -> Status) -> Status {
    if files.is_empty() {
        out.error("no input files");
        return Status::Input;
    }
    files.iter().map(|p| f(p, out, opts)).max().unwrap_or(Status::Ok)
}

fn load_program(path: &Path, out: &mut Sink) -> Result<Program, Status> {
    let program = load(path).map_err(|e| {
        out.error(e);
        Status::Input
    })?;
    let diags = validate_wellformed(&program);
    if !diags.is_empty() {
        for d in diags {
            out.error(format!("{}:{d}", path.display()));
        }
        return Err(Status::Input);
    }
    Ok(program)
}

fn load_model(path: &Path, out: &mut Sink) -> Result<Model, Status> {
    let program = load_program(path, out)?;
    Model::new(&program).map_err(|e| {
        out.error(format!("{}: {e}", path.display()));
        Status::Input
    })
}

fn verdict_status<'a>(obs: impl IntoIterator<Item = &'a Obligation>) -> Status {
    let mut status = Status::Ok;
    for o in obs {
        match o.verdict {
            Verdict::Valid => {}
            Verdict::Capped(_) => status = status.max(Status::Cap),
            _ => return Status::Failed,
        }
    }
    status
}

fn oracle_status(out: &mut Sink, path: &Path, e: OracleError) -> Status {
    out.error(format!("{}: {e}", path.display()));
    if e.is_cap() {
        Status::Cap
    } else {
        Status::Input
    }
}

fn run_checker(path: &Path, out: &mut Sink, opts: &Opts) -> Result<(Model, CheckRun), Status> {
    let model = load_model(path, out)?;
    let run = check_program(&model, opts.property.as_deref(), opts.max_valuations).map_err(|e| {
        out.error(format!("{}: {e}", path.display()));
        Status::Input
    })?;
    Ok((model, run))
}

fn report_run(path: &Path, out: &mut Sink, model: &Model, run: &CheckRun, verbose: bool) {
    let file = path.display().to_string();
    let u = &model.universe;
    out.say(format!("== {} ({file})", model.program.name));
    out.say(format!("  annotation: {}", render::tally(&run.safety.obligations)));
    for o in &run.safety.obligations {
        render::obligation(out, u, &file, "annotation", o, verbose);
    }
    for p in &run.properties {
        let status = match (&p.outcome, p.discharged()) {
            (PropertyOutcome::OracleOnly, _) => "not a checker obligation; see `oracle`".to_string(),
            (_, true) => format!("discharged, {}", render::tally(p.obligations())),
            (_, false) => format!("not discharged, {}", render::tally(p.obligations())),
        };
        out.say(format!("  property {} ({}): {status}", p.name, p.kind));
        match &p.outcome {
            PropertyOutcome::Script(s) => {
                for n in &s.nodes {
                    let failing = n.obligations.iter().any(|o| !o.verdict.is_valid());
                    if verbose || failing {
                        out.say(format!("   {} {}: {} ~> {}", n.path, n.rule, n.from, n.to));
                    }
                    for o in &n.obligations {
                        render::obligation(out, u, &file, &p.name, o, verbose);
                    }
                }
            }
            _ => {
                for o in p.obligations() {
                    render::obligation(out, u, &file, &p.name, o, verbose);
                }
            }
        }
        let verdict = match (&p.outcome, p.discharged()) {
            (PropertyOutcome::OracleOnly, _) => "oracle-only",
            (_, true) => "discharged",
            (_, false) => "not-discharged",
        };
        out.record(&[("file", file.clone()), ("property", p.name.clone()), ("kind", p.kind.into()), ("status", verdict.into())]);
    }
}

pub fn check(path: &Path, out: &mut Sink, opts: &Opts) -> Status {
    let (model, run) = match run_checker(path, out, opts) {
        Ok(r) => r,
        Err(s) => return s,
    };
    report_run(path, out, &model, &run, false);
    let status = verdict_status(run.obligations());
    let word = match status {
        Status::Ok => "verified",
        Status::Cap => "cap-exceeded",
        _ => "failed",
    };
    out.say(format!("  result: {word}"));
    out.record(&[("file", path.display().to_string()), ("result", word.into())]);
    status
}

pub fn obligations(path: &Path, out: &mut Sink, opts: &Opts, id: Option<&str>) -> Status {
    let (model, run) = match run_checker(path, out, opts) {
        Ok(r) => r,
        Err(s) => return s,
    };
    let Some(id) = id else {
        report_run(path, out, &model, &run, true);
        return verdict_status(run.obligations());
    };
    let Some(o) = run.obligations().find(|o| o.id == id) else {
        out.error(format!("{}: no obligation with id {id}", path.display()));
        return Status::Input;
    };
    render::obligation(out, &model.universe, &path.display().to_string(), "selected", o, true);
    verdict_status([o])
}

pub fn instrument(path: &Path, out: &mut Sink) -> Status {
    let program = match load_program(path, out) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match auto_label(&program) {
        Ok(labelled) => {
            out.raw(&print_program(&instrument_counters(&labelled)));
            Status::Ok
        }
        Err(e) => {
            out.error(format!("{}: {e}", path.display()));
            Status::Input
        }
    }
}

/// Semantic verdict of one property and, when it fails, a rendered trace.
fn decide_property(model: &Model, ts: &TransitionSystem, kind: &PropertyKind) -> Result<(bool, Vec<String>), OracleError> {
    let u = &model.universe;
    let trace_to = |s: usize| {
        let path: Vec<Step> = ts.path_to(s);
        let start = path.first().map(|st| st.from).unwrap_or(s);
        ts.render_steps(model, start, &path)
    };
    Ok(match kind {
        PropertyKind::Unless(p, q) => match ts.check_unless(u, p, q)? {
            None => (true, Vec::new()),
            Some(step) => {
                let mut t = trace_to(step.from);
                t.extend(ts.render_steps(model, step.from, std::slice::from_ref(&step)).into_iter().skip(1));
                (false, t)
            }
        },
        PropertyKind::LeadsTo(p, q) => {
            let r = ts.check_leadsto(u, p, q)?;
            (r.holds, r.witness.map(|w| ts.render_lasso(model, &w)).unwrap_or_default())
        }
        PropertyKind::Postcondition(post) => match ts.check_postcondition(u, post)? {
            None => (true, Vec::new()),
            Some(s) => (false, trace_to(s)),
        },
        PropertyKind::Invariant(inv) => match ts.check_invariant(u, inv)? {
            None => (true, Vec::new()),
            Some(s) => (false, trace_to(s)),
        },
        PropertyKind::DeadlockFree => match ts.deadlock() {
            None => (true, Vec::new()),
            Some(s) => {
                let mut t = trace_to(s);
                t.push("then no action is enabled".into());
                (false, t)
            }
        },
    })
}

pub fn oracle(path: &Path, out: &mut Sink, opts: &Opts, raw: bool) -> Status {
    let model = match load_model(path, out) {
        Ok(m) => m,
        Err(s) => return s,
    };
    match oracle_inner(path, out, opts, raw, &model) {
        Ok(s) => s,
        Err(e) => oracle_status(out, path, e),
    }
}

fn oracle_inner(path: &Path, out: &mut Sink, opts: &Opts, raw: bool, model: &Model) -> Result<Status, OracleError> {
    let file = path.display().to_string();
    let ts = build_state_space(model, opts.max_states)?;
    out.say(format!("== {} ({file})", model.program.name));
    out.say(format!("  {} reachable states, {} transitions", ts.len(), ts.transition_count()));
    out.record(&[
        ("file", file.clone()),
        ("program", model.program.name.clone()),
        ("states", ts.len().to_string()),
        ("transitions", ts.transition_count().to_string()),
    ]);
    let mut status = Status::Ok;
    let mut line = |out: &mut Sink, name: &str, kind: &str, holds: bool, trace: &[String]| {
        out.say(format!("  {name} ({kind}): {holds}"));
        for l in trace {
            out.say(format!("      {l}"));
        }
        let mut fields = vec![("file", file.clone()), ("property", name.to_string()), ("kind", kind.to_string()), ("holds", holds.to_string())];
        if !trace.is_empty() {
            fields.push(("trace", trace.join("; ")));
        }
        out.record(&fields);
        if !holds {
            status = Status::Failed;
        }
    };
    if opts.property.is_none() {
        let violations = ts.check_assertions(model)?;
        let trace = match violations.first() {
            Some(v) => {
                let path = ts.path_to(v.state);
                let start = path.first().map(|s| s.from).unwrap_or(v.state);
                let mut t = ts.render_steps(model, start, &path);
                t.push(format!("assertion {} at {} is false", v.index, v.label));
                t
            }
            None => Vec::new(),
        };
        line(out, "annotation", "assertions", violations.is_empty(), &trace);
    }
    for p in &model.program.properties {
        if opts.property.as_deref().is_some_and(|n| n != p.name) {
            continue;
        }
        let (holds, trace) = decide_property(model, &ts, &p.kind)?;
        line(out, &p.name, ogp_core::report::kind_name(&p.kind), holds, &trace);
    }
    if let Some(name) = &opts.property {
        if model.program.property(name).is_none() {
            out.error(format!("{file}: no property named {name}"));
            return Ok(Status::Input);
        }
    }
    if raw {
        let iso = isomorphic_to(model, &ts, opts.max_states)?;
        line(out, "raw-isomorphic", "semantics", iso, &[]);
    }
    Ok(status)
}

pub struct TransformArgs {
    pub split: String,
    pub hoist: String,
    pub fresh: Option<String>,
    pub compare: bool,
}

pub fn transform(path: &Path, out: &mut Sink, opts: &Opts, args: &TransformArgs) -> Status {
    let program = match load_program(path, out) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let hoist: Expr = match parse_expr(&args.hoist) {
        Ok(e) => e,
        Err(e) => {
            out.error(format!("--hoist: {e}"));
            return Status::Input;
        }
    };
    let req = SplitRequest { label: args.split.clone(), hoist, fresh: args.fresh.clone() };
    let split = match guard_conjunction_split(&program, &req, opts.max_valuations) {
        Ok(s) => s,
        Err(e) => {
            out.error(format!("{}: {e}", path.display()));
            return Status::Input;
        }
    };
    let file = path.display().to_string();
    let text = print_program(&split.program);
    out.say(text.trim_end());
    out.record(&[("file", file.clone()), ("fresh-label", split.fresh_label.clone()), ("program", text.trim_end().to_string())]);
    let after = match Model::new(&split.program) {
        Ok(m) => m,
        Err(e) => {
            out.error(e);
            return Status::Input;
        }
    };
    out.say(format!("-- side conditions for {{{}}} at {}: {}", req.hoist, split.fresh_label, render::tally(&split.side_conditions)));
    for o in &split.side_conditions {
        render::obligation(out, &after.universe, &file, "side-condition", o, false);
    }
    let mut status = verdict_status(&split.side_conditions);
    if !args.compare {
        return status;
    }
    let before = match load_model(path, out) {
        Ok(m) => m,
        Err(s) => return s,
    };
    let report = match progress_equivalence(&before, &after, opts.max_states) {
        Ok(r) => r,
        Err(e) => return status.max(oracle_status(out, path, e)),
    };
    let divergent = report.divergences().count();
    out.say(format!("-- oracle comparison: {} verdicts, {divergent} diverge", report.comparisons.len()));
    for c in &report.comparisons {
        let agree = c.before == c.after;
        if !agree {
            out.say(format!("    diverges  {}: before {}, after {}", c.property, c.before, c.after));
        }
        out.record(&[
            ("file", file.clone()),
            ("compare", c.property.clone()),
            ("before", c.before.to_string()),
            ("after", c.after.to_string()),
            ("agree", agree.to_string()),
        ]);
    }
    if divergent > 0 {
        status = status.max(Status::Failed);
    }
    status
}
