use std::fmt::Write;

use crate::expr::{pc_var, Expr};
use crate::lang::{
    extract_actions, ActionKind, Block, Component, ProofNode, ProofScript, Program, PropertyKind, Rule, Scope,
    StmtKind, VarType,
};

const INDENT: &str = "  ";

/// Canonical text of a program. Instrumented programs show every counter
/// update explicitly.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    let _ = write!(out, "program {}", p.name);
    if p.instrumented {
        out.push_str(" instrumented");
    }
    out.push_str("\n\n");
    for d in &p.decls {
        let _ = write!(out, "var {} : ", d.name);
        match d.ty {
            VarType::Bool => out.push_str("bool"),
            VarType::Int { lo, hi } => {
                let _ = write!(out, "int {lo}..{hi}");
            }
        }
        match &d.scope {
            Scope::Shared => {}
            Scope::Local(o) => {
                let _ = write!(out, " local {o}");
            }
            Scope::Private(o) => {
                let _ = write!(out, " private {o}");
            }
        }
        if d.aux {
            out.push_str(" aux");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "pre {}", p.pre);
    for inv in &p.invariants {
        let _ = writeln!(out, "invariant {} : {}", inv.name, inv.pred);
    }
    let targets = if p.instrumented { Some(Targets::new(p)) } else { None };
    for c in &p.components {
        out.push('\n');
        let _ = writeln!(out, "component {}", c.name);
        let ctx = Ctx { comp: c, targets: targets.as_ref() };
        ctx.block(&mut out, &c.body, 1, c.final_label.as_deref(), true);
        out.push_str("end\n");
    }
    if !p.properties.is_empty() {
        out.push('\n');
    }
    for prop in &p.properties {
        let _ = write!(out, "property {} : ", prop.name);
        let _ = match &prop.kind {
            PropertyKind::Unless(a, b) => writeln!(out, "{a} unless {b}"),
            PropertyKind::LeadsTo(a, b) => writeln!(out, "{a} leadsto {b}"),
            PropertyKind::Postcondition(a) => writeln!(out, "postcondition {a}"),
            PropertyKind::Invariant(a) => writeln!(out, "invariant {a}"),
            PropertyKind::DeadlockFree => writeln!(out, "deadlockfree"),
        };
    }
    for s in &p.proofs {
        out.push('\n');
        out.push_str(&print_proof(s));
    }
    out
}

pub fn print_proof(s: &ProofScript) -> String {
    let mut out = format!("proof {}\n", s.property);
    node(&mut out, &s.root, 1);
    out.push_str("end\n");
    out
}

fn pad(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn node(out: &mut String, n: &ProofNode, depth: usize) {
    pad(out, depth);
    let _ = write!(out, "{} leadsto {} by ", n.from, n.to);
    let open = |out: &mut String, head: String| {
        out.push_str(&head);
        out.push_str(" {\n");
    };
    let close = |out: &mut String| {
        pad(out, depth);
        out.push_str("}\n");
    };
    match &n.rule {
        Rule::Immediate(l) => {
            let _ = writeln!(out, "immediate {l}");
        }
        Rule::Implication => out.push_str("implication\n"),
        Rule::Transitivity { mid, first, second } => {
            open(out, format!("transitivity via {mid}"));
            node(out, first, depth + 1);
            node(out, second, depth + 1);
            close(out);
        }
        Rule::Disjunction(cases) => {
            open(out, "disjunction".into());
            for (p, sub) in cases {
                case(out, p, sub, depth + 1);
            }
            close(out);
        }
        Rule::DisjunctionRange { param, lo, hi, template } => {
            open(out, format!("disjunction for {param} in {lo}..{hi}"));
            node(out, template, depth + 1);
            close(out);
        }
        Rule::Impossibility(sub) => {
            open(out, "impossibility".into());
            node(out, sub, depth + 1);
            close(out);
        }
        Rule::DisjunctionTheorem(subs) => {
            open(out, "disjunction_theorem".into());
            subs.iter().for_each(|s| node(out, s, depth + 1));
            close(out);
        }
        Rule::Cancellation { d, first, second } => {
            open(out, format!("cancellation on {d}"));
            node(out, first, depth + 1);
            node(out, second, depth + 1);
            close(out);
        }
        Rule::Psp { r, d, sub } => {
            open(out, format!("psp with {r} unless {d}"));
            node(out, sub, depth + 1);
            close(out);
        }
        Rule::Induction { measure, param, lo, hi, template } => {
            open(out, format!("induction on {measure} for {param} in {lo}..{hi}"));
            node(out, template, depth + 1);
            close(out);
        }
        Rule::Completion { d, cases } => {
            open(out, format!("completion unless {d}"));
            for (q, sub) in cases {
                case(out, q, sub, depth + 1);
            }
            close(out);
        }
    }
}

fn case(out: &mut String, p: &Expr, sub: &ProofNode, depth: usize) {
    pad(out, depth);
    let _ = writeln!(out, "case {p} :");
    node(out, sub, depth + 1);
}

/// Target labels of every action, for rendering counter updates.
struct Targets(std::collections::HashMap<String, ActionKind>);

impl Targets {
    fn new(p: &Program) -> Self {
        Targets(extract_actions(p).into_iter().map(|a| (a.label, a.kind)).collect())
    }
}

struct Ctx<'a> {
    comp: &'a Component,
    targets: Option<&'a Targets>,
}

impl Ctx<'_> {
    fn transfer(&self, label: &str) -> String {
        format!("{} := {label}", pc_var(&self.comp.name))
    }

    fn kind_of(&self, local: Option<&str>) -> Option<&ActionKind> {
        let t = self.targets?;
        t.0.get(&self.comp.full_label(local?))
    }

    fn block(&self, out: &mut String, b: &Block, depth: usize, final_label: Option<&str>, top: bool) {
        let mut items: Vec<String> = Vec::new();
        for s in &b.stmts {
            let mut head = String::new();
            for a in &s.assertions {
                let _ = write!(head, "{{{a}}} ");
            }
            if let Some(l) = &s.label {
                let _ = write!(head, "{l}: ");
            }
            let action = self.kind_of(s.label.as_deref());
            let body = self.stmt(&s.kind, action, depth);
            items.push(format!("{head}{body}"));
        }
        let mut tail = String::new();
        for a in &b.post {
            let _ = write!(tail, "{{{a}}} ");
        }
        if top {
            if let Some(l) = final_label {
                let _ = write!(tail, "{l}:");
            }
        }
        let tail = tail.trim_end().to_string();
        if !tail.is_empty() {
            items.push(tail);
        }
        let n = items.len();
        for (k, item) in items.into_iter().enumerate() {
            pad(out, depth);
            out.push_str(&item);
            if k + 1 < n {
                out.push(';');
            }
            out.push('\n');
        }
    }

    fn stmt(&self, kind: &StmtKind, action: Option<&ActionKind>, depth: usize) -> String {
        match (kind, action) {
            (StmtKind::Skip, Some(ActionKind::Skip { next })) => self.transfer(next),
            (StmtKind::Skip, _) => "skip".into(),
            (StmtKind::Assign(pairs), a) => {
                let mut targets: Vec<String> = pairs.iter().map(|(x, _)| x.clone()).collect();
                let mut values: Vec<String> = pairs.iter().map(|(_, e)| e.to_string()).collect();
                if let Some(ActionKind::Assign { next, .. }) = a {
                    targets.push(pc_var(&self.comp.name));
                    values.push(next.clone());
                }
                format!("{} := {}", targets.join(", "), values.join(", "))
            }
            (StmtKind::Atomic(body), a) => {
                let mut s = String::from("atomic\n");
                let inner = Ctx { comp: self.comp, targets: None };
                let mut body = body.clone();
                if let Some(ActionKind::Atomic { next, .. }) = a {
                    body.stmts.push(crate::lang::Stmt::new(StmtKind::Assign(vec![(
                        pc_var(&self.comp.name),
                        Expr::Label(next.clone()),
                    )])));
                }
                inner.block(&mut s, &body, depth + 1, None, false);
                pad(&mut s, depth);
                s.push_str("end");
                s
            }
            (StmtKind::If(bs), a) | (StmtKind::Do(bs), a) => {
                let is_do = matches!(kind, StmtKind::Do(_));
                let branch_targets: Option<Vec<String>> = match a {
                    Some(ActionKind::IfEval { branches }) | Some(ActionKind::DoEval { branches, .. }) => {
                        Some(branches.iter().map(|(_, t)| t.clone()).collect())
                    }
                    _ => None,
                };
                let mut s = String::from(if is_do { "do\n" } else { "if\n" });
                for (k, br) in bs.iter().enumerate() {
                    pad(&mut s, depth + 1);
                    if k > 0 {
                        s.push_str("[] ");
                    }
                    let _ = writeln!(s, "{} ->", br.guard);
                    let mut body = br.body.clone();
                    if let Some(t) = &branch_targets {
                        body.stmts.insert(
                            0,
                            crate::lang::Stmt::new(StmtKind::Assign(vec![(
                                pc_var(&self.comp.name),
                                Expr::Label(t[k].clone()),
                            )])),
                        );
                    }
                    // counter transfers are unlabelled and printed verbatim
                    let inner = Ctx { comp: self.comp, targets: self.targets };
                    inner.block(&mut s, &body, depth + 2, None, false);
                }
                if let Some(ActionKind::DoEval { exit, .. }) = a {
                    pad(&mut s, depth + 1);
                    let _ = writeln!(s, "[] {} ->", exit.0);
                    pad(&mut s, depth + 2);
                    let _ = writeln!(s, "{}", self.transfer(&exit.1));
                }
                pad(&mut s, depth);
                s.push_str(if is_do { "od" } else { "fi" });
                s
            }
        }
    }
}
