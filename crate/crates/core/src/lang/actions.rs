use crate::expr::Expr;

use super::ast::{Block, Component, Program, StmtKind};

/// What an action does to the data state when it fires.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    None,
    Assign(Vec<(String, Expr)>),
    /// A coarse-grained body executed in one step.
    Atomic(Block),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionKind {
    Skip { next: String },
    Assign { assigns: Vec<(String, Expr)>, next: String },
    Atomic { body: Block, next: String },
    IfEval { branches: Vec<(Expr, String)> },
    /// `exit` is the negated disjunction of the guards and the label after the loop.
    DoEval { branches: Vec<(Expr, String)>, exit: (Expr, String) },
}

/// One way an action can fire: when `guard` holds it applies `effect`
/// and moves its component's counter to `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub guard: Expr,
    pub effect: Effect,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicAction {
    pub component: usize,
    /// Full label, e.g. `X.2`.
    pub label: String,
    /// The component's counter variable, e.g. `pc.X`.
    pub pc: String,
    pub kind: ActionKind,
}

impl AtomicAction {
    pub fn outcomes(&self) -> Vec<Outcome> {
        let plain = |effect: Effect, next: &String| {
            vec![Outcome { guard: crate::expr::TRUE, effect, target: next.clone() }]
        };
        match &self.kind {
            ActionKind::Skip { next } => plain(Effect::None, next),
            ActionKind::Assign { assigns, next } => plain(Effect::Assign(assigns.clone()), next),
            ActionKind::Atomic { body, next } => plain(Effect::Atomic(body.clone()), next),
            ActionKind::IfEval { branches } => branches
                .iter()
                .map(|(g, t)| Outcome { guard: g.clone(), effect: Effect::None, target: t.clone() })
                .collect(),
            ActionKind::DoEval { branches, exit } => branches
                .iter()
                .chain(std::iter::once(exit))
                .map(|(g, t)| Outcome { guard: g.clone(), effect: Effect::None, target: t.clone() })
                .collect(),
        }
    }

    /// Labels control may move to when this action fires.
    pub fn targets(&self) -> Vec<String> {
        self.outcomes().into_iter().map(|o| o.target).collect()
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ActionKind::Skip { .. } => "skip",
            ActionKind::Assign { .. } => "assignment",
            ActionKind::Atomic { .. } => "atomic",
            ActionKind::IfEval { .. } => "if-guard",
            ActionKind::DoEval { .. } => "do-guard",
        }
    }

    /// Data variables the action may write.
    pub fn writes(&self) -> Vec<String> {
        let mut out = Vec::new();
        match &self.kind {
            ActionKind::Assign { assigns, .. } => out.extend(assigns.iter().map(|(x, _)| x.clone())),
            ActionKind::Atomic { body, .. } => block_writes(body, &mut out),
            _ => {}
        }
        out.sort();
        out.dedup();
        out
    }
}

fn block_writes(b: &Block, out: &mut Vec<String>) {
    for s in &b.stmts {
        match &s.kind {
            StmtKind::Assign(a) => out.extend(a.iter().map(|(x, _)| x.clone())),
            StmtKind::Atomic(inner) => block_writes(inner, out),
            StmtKind::If(bs) | StmtKind::Do(bs) => bs.iter().for_each(|br| block_writes(&br.body, out)),
            StmtKind::Skip => {}
        }
    }
}

/// Marks the program as carrying explicit counter updates. Every action of a
/// component then moves `pc.<component>` to its target label; see
/// [`extract_actions`] for the resulting transition relations.
pub fn instrument_counters(program: &Program) -> Program {
    debug_assert!(program.is_labelled(), "instrumentation needs a labelled program");
    Program { instrumented: true, ..program.clone() }
}

/// One action per non-final label, in component order and then textual order.
pub fn extract_actions(program: &Program) -> Vec<AtomicAction> {
    let mut out = Vec::new();
    for (ci, comp) in program.components.iter().enumerate() {
        let Some(fin) = comp.final_full_label() else { continue };
        collect(&comp.body, ci, comp, &fin, &mut out);
    }
    out
}

/// Label of the first action of `b`, or `fallback` when `b` is empty.
fn entry(b: &Block, comp: &Component, fallback: &str) -> String {
    b.stmts
        .first()
        .and_then(|s| s.label.as_ref())
        .map(|l| comp.full_label(l))
        .unwrap_or_else(|| fallback.to_string())
}

fn collect(b: &Block, ci: usize, comp: &Component, fin: &str, out: &mut Vec<AtomicAction>) {
    for (k, s) in b.stmts.iter().enumerate() {
        let here = comp.full_label(s.label.as_deref().expect("labelled program"));
        let next = b.stmts[k + 1..]
            .first()
            .and_then(|n| n.label.as_ref())
            .map(|l| comp.full_label(l))
            .unwrap_or_else(|| fin.to_string());
        let kind = match &s.kind {
            StmtKind::Skip => ActionKind::Skip { next: next.clone() },
            StmtKind::Assign(a) => ActionKind::Assign { assigns: a.clone(), next: next.clone() },
            StmtKind::Atomic(body) => ActionKind::Atomic { body: body.clone(), next: next.clone() },
            StmtKind::If(bs) => {
                let branches = bs.iter().map(|br| (br.guard.clone(), entry(&br.body, comp, &next))).collect();
                ActionKind::IfEval { branches }
            }
            StmtKind::Do(bs) => {
                let branches = bs.iter().map(|br| (br.guard.clone(), entry(&br.body, comp, &here))).collect();
                let exit = Expr::not(Expr::disj(bs.iter().map(|br| br.guard.clone())));
                ActionKind::DoEval { branches, exit: (exit, next.clone()) }
            }
        };
        out.push(AtomicAction { component: ci, label: here.clone(), pc: comp.pc(), kind });
        match &s.kind {
            StmtKind::If(bs) => bs.iter().for_each(|br| collect(&br.body, ci, comp, &next, out)),
            StmtKind::Do(bs) => bs.iter().for_each(|br| collect(&br.body, ci, comp, &here, out)),
            _ => {}
        }
    }
}
