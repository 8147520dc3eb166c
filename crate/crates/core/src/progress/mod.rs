//! Unless properties, immediate progress and leads-to proof scripts.

mod script;

use thiserror::Error;

use crate::expr::Expr;
use crate::lang::{ActionKind, Span};
use crate::model::Model;
use crate::obligation::{ObKind, Obligation, Verdict};
use crate::wlp::{action_wlp, wp_atomic};

pub use script::{check_script, NodeReport, ScriptReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgressError {
    #[error("no action is labelled {0}")]
    UnknownLabel(String),
    #[error("{span}: parameter {param} occurs free in the goal it quantifies over")]
    CapturedParameter { param: String, span: Span },
    #[error("{span}: empty range {lo}..{hi}")]
    EmptyRange { lo: i64, hi: i64, span: Span },
    #[error("no property named {0}")]
    UnknownProperty(String),
    #[error("property {0} is not a leads-to property")]
    NotLeadsTo(String),
    #[error("no proof script for property {0}")]
    NoScript(String),
}

/// `P ∧ ¬Q`, strengthened by what the verified annotation says about every
/// reachable state.
fn moving(model: &Model, p: &Expr, q: &Expr, with_annotation: bool) -> Expr {
    let base = Expr::and(p.clone(), Expr::not(q.clone()));
    if with_annotation && model.has_assumptions() {
        Expr::and(model.assumptions(), base)
    } else {
        base
    }
}

fn failed(id: String, kind: ObKind, provenance: String, msg: String) -> Obligation {
    Obligation { id, kind, formula: crate::expr::FALSE, provenance, verdict: Verdict::Error(msg), assumes: false }
}

/// `P ∧ ¬Q ∧ U ⇒ wlp(S, P ∨ Q)` for every atomic action `{U} S`.
pub fn check_unless(model: &Model, p: &Expr, q: &Expr, cap: u64) -> Vec<Obligation> {
    unless_with_prefix(model, p, q, cap, "")
}

pub(crate) fn unless_with_prefix(model: &Model, p: &Expr, q: &Expr, cap: u64, prefix: &str) -> Vec<Obligation> {
    let base = moving(model, p, q, false);
    let target = Expr::or(p.clone(), q.clone());
    model
        .actions
        .iter()
        .map(|a| {
            let id = format!("{prefix}UN/{}", a.label);
            let prov = format!("unless against {} {}", a.kind_name(), a.label);
            match action_wlp(a, &target) {
                Ok(w) => Obligation::decide(
                    &model.universe,
                    id,
                    ObKind::Unless,
                    Expr::implies(Expr::and(base.clone(), model.precondition(a)), w),
                    prov,
                    model.has_assumptions(),
                    cap,
                ),
                Err(e) => failed(id, ObKind::Unless, prov, e.to_string()),
            }
        })
        .collect()
}

/// The immediate progress rule for `P ⇝ Q` with the action at `label`.
pub fn check_immediate(
    model: &Model,
    p: &Expr,
    q: &Expr,
    label: &str,
    cap: u64,
) -> Result<Vec<Obligation>, ProgressError> {
    immediate_with_prefix(model, p, q, label, cap, "")
}

pub(crate) fn immediate_with_prefix(
    model: &Model,
    p: &Expr,
    q: &Expr,
    label: &str,
    cap: u64,
    prefix: &str,
) -> Result<Vec<Obligation>, ProgressError> {
    let a = model.action(label).ok_or_else(|| ProgressError::UnknownLabel(label.to_string()))?;
    let mut out = unless_with_prefix(model, p, q, cap, prefix);
    let ante = moving(model, p, q, true);
    let assumes = model.has_assumptions();
    let mut push = |tag: &str, what: String, rhs: Result<Expr, String>, extra: Option<&Expr>| {
        let id = format!("{prefix}IMM{tag}/{label}");
        let prov = format!("immediate progress with {label}: {what}");
        match rhs {
            Ok(r) => {
                let lhs = match extra {
                    Some(g) => Expr::and(ante.clone(), g.clone()),
                    None => ante.clone(),
                };
                out.push(Obligation::decide(
                    &model.universe,
                    id,
                    ObKind::Immediate,
                    Expr::implies(lhs, r),
                    prov,
                    assumes,
                    cap,
                ));
            }
            Err(e) => out.push(failed(id, ObKind::Immediate, prov, e)),
        }
    };
    push("1", "control is at the action".into(), Ok(model.at(label)), None);
    let moved = |t: &str| q.subst1(&a.pc, Expr::Label(t.to_string()));
    match &a.kind {
        ActionKind::Skip { .. } | ActionKind::Assign { .. } => {
            push("2", "the action establishes the target".into(), action_wlp(a, q).map_err(|e| e.to_string()), None);
        }
        ActionKind::Atomic { body, next } => {
            push(
                "2",
                "the atomic statement is enabled and establishes the target".into(),
                wp_atomic(body, &moved(next)).map_err(|e| e.to_string()),
                None,
            );
        }
        ActionKind::IfEval { branches } => {
            push("2.0", "some guard holds".into(), Ok(Expr::disj(branches.iter().map(|(g, _)| g.clone()))), None);
            for (k, (g, t)) in branches.iter().enumerate() {
                push(&format!("2.{}", k + 1), format!("branch {} reaches the target", k + 1), Ok(moved(t)), Some(g));
            }
        }
        ActionKind::DoEval { branches, exit } => {
            for (k, (g, t)) in branches.iter().enumerate() {
                push(&format!("2.{}", k + 1), format!("branch {} reaches the target", k + 1), Ok(moved(t)), Some(g));
            }
            push("2.x", "the loop exit reaches the target".into(), Ok(moved(&exit.1)), Some(&exit.0));
        }
    }
    Ok(out)
}
