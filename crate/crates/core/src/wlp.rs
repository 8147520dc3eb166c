//! Predicate transformers over labelled statements with implicit program
//! counters, plus wp for atomic bodies and the loop-invariant rule.

use thiserror::Error;

use crate::expr::{Expr, FALSE, TRUE};
use crate::lang::{AtomicAction, Block, Component, Effect, Span, Stmt, StmtKind};
use crate::predicate::{implies, PredError, Universe, Validity};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WlpError {
    #[error("loop at {0} has no finite wlp; prove it with an invariant")]
    Loop(Span),
    #[error("statement at {0} is not labelled")]
    Unlabelled(Span),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    Wlp(#[from] WlpError),
    #[error(transparent)]
    Pred(#[from] PredError),
}

fn block_rev<F>(b: &Block, post: &Expr, mut step: F) -> Result<Expr, WlpError>
where
    F: FnMut(&Stmt, Expr) -> Result<Expr, WlpError>,
{
    b.stmts.iter().rev().try_fold(post.clone(), |acc, s| step(s, acc))
}

/// wlp of an unlabelled, loop-free statement list such as an atomic body.
pub fn wlp_plain(b: &Block, post: &Expr) -> Result<Expr, WlpError> {
    block_rev(b, post, |s, acc| match &s.kind {
        StmtKind::Skip => Ok(acc),
        StmtKind::Assign(pairs) => Ok(acc.subst(pairs)),
        StmtKind::Atomic(body) => wlp_plain(body, &acc),
        StmtKind::If(bs) => {
            let parts = bs
                .iter()
                .map(|br| Ok(Expr::implies(br.guard.clone(), wlp_plain(&br.body, &acc)?)))
                .collect::<Result<Vec<_>, WlpError>>()?;
            Ok(Expr::conj(parts))
        }
        StmtKind::Do(_) => Err(WlpError::Loop(s.span)),
    })
}

/// Total-correctness transformer for loop-free bodies: a selection whose
/// guards are all false blocks, so it contributes the disjunction of its guards.
pub fn wp_atomic(b: &Block, post: &Expr) -> Result<Expr, WlpError> {
    block_rev(b, post, |s, acc| match &s.kind {
        StmtKind::Skip => Ok(acc),
        StmtKind::Assign(pairs) => Ok(acc.subst(pairs)),
        StmtKind::Atomic(body) => wp_atomic(body, &acc),
        StmtKind::If(bs) => {
            let mut parts = vec![Expr::disj(bs.iter().map(|br| br.guard.clone()))];
            for br in bs {
                parts.push(Expr::implies(br.guard.clone(), wp_atomic(&br.body, &acc)?));
            }
            Ok(Expr::conj(parts))
        }
        StmtKind::Do(_) => Err(WlpError::Loop(s.span)),
    })
}

fn with_counter(post: &Expr, comp: &Component, label: &str) -> Expr {
    post.subst1(&comp.pc(), Expr::Label(label.to_string()))
}

fn full(comp: &Component, s: &Stmt) -> Result<String, WlpError> {
    s.label.as_ref().map(|l| comp.full_label(l)).ok_or(WlpError::Unlabelled(s.span))
}

/// wlp of the labelled statement `stmt` of `comp` whose final label is `next`.
pub fn wlp(comp: &Component, stmt: &Stmt, next: &str, post: &Expr) -> Result<Expr, WlpError> {
    full(comp, stmt)?;
    match &stmt.kind {
        StmtKind::Skip => Ok(with_counter(post, comp, next)),
        StmtKind::Assign(pairs) => {
            let mut all = pairs.clone();
            all.push((comp.pc(), Expr::Label(next.to_string())));
            Ok(post.subst(&all))
        }
        StmtKind::Atomic(body) => wlp_plain(body, &with_counter(post, comp, next)),
        StmtKind::If(bs) => {
            let mut parts = Vec::new();
            for br in bs {
                let entry = match br.body.stmts.first() {
                    Some(s) => full(comp, s)?,
                    None => next.to_string(),
                };
                let inner = wlp_seq(comp, &br.body, next, post)?;
                parts.push(Expr::implies(br.guard.clone(), with_counter(&inner, comp, &entry)));
            }
            Ok(Expr::conj(parts))
        }
        StmtKind::Do(_) => Err(WlpError::Loop(stmt.span)),
    }
}

/// wlp of a labelled statement list ending at `final_label`.
pub fn wlp_seq(comp: &Component, b: &Block, final_label: &str, post: &Expr) -> Result<Expr, WlpError> {
    let mut acc = post.clone();
    for (k, s) in b.stmts.iter().enumerate().rev() {
        let next = match b.stmts.get(k + 1) {
            Some(n) => full(comp, n)?,
            None => final_label.to_string(),
        };
        acc = wlp(comp, s, &next, &acc)?;
    }
    Ok(acc)
}

/// wlp of an effect followed by nothing else.
pub fn effect_wlp(effect: &Effect, post: &Expr) -> Result<Expr, WlpError> {
    match effect {
        Effect::None => Ok(post.clone()),
        Effect::Assign(pairs) => Ok(post.subst(pairs)),
        Effect::Atomic(body) => wlp_plain(body, post),
    }
}

/// wlp of one atomic action including its counter update. A guard
/// evaluation contributes one implication per outcome; when every guard is
/// false nothing happens, which no postcondition can observe.
pub fn action_wlp(action: &AtomicAction, post: &Expr) -> Result<Expr, WlpError> {
    let mut parts = Vec::new();
    for o in action.outcomes() {
        let after = post.subst1(&action.pc, Expr::Label(o.target.clone()));
        let w = effect_wlp(&o.effect, &after)?;
        parts.push(if o.guard == TRUE { w } else { Expr::implies(o.guard, w) });
    }
    Ok(Expr::conj(parts))
}

/// One proof obligation of the loop-invariant rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopObligation {
    /// `branch k` or `exit`.
    pub role: String,
    pub formula: Expr,
    pub verdict: Validity,
}

/// Obligations showing `{invariant} loop {post}` for the `do` statement
/// `stmt` of `comp` whose final label is `next`.
pub fn check_do(
    universe: &Universe,
    comp: &Component,
    stmt: &Stmt,
    next: &str,
    invariant: &Expr,
    post: &Expr,
    cap: u64,
) -> Result<Vec<LoopObligation>, CheckError> {
    let StmtKind::Do(bs) = &stmt.kind else {
        return Err(CheckError::Pred(PredError::Type("check_do needs a loop".into())));
    };
    let head = full(comp, stmt)?;
    let mut out = Vec::new();
    for (k, br) in bs.iter().enumerate() {
        let entry = match br.body.stmts.first() {
            Some(s) => full(comp, s)?,
            None => head.clone(),
        };
        let body = wlp_seq(comp, &br.body, &head, invariant)?;
        let formula = Expr::implies(
            Expr::and(invariant.clone(), br.guard.clone()),
            with_counter(&body, comp, &entry),
        );
        let verdict = crate::predicate::valid(universe, &formula, cap)?;
        out.push(LoopObligation { role: format!("branch {}", k + 1), formula, verdict });
    }
    let none = Expr::not(Expr::disj(bs.iter().map(|br| br.guard.clone())));
    let formula = Expr::implies(Expr::and(invariant.clone(), none), with_counter(post, comp, next));
    let verdict = crate::predicate::valid(universe, &formula, cap)?;
    out.push(LoopObligation { role: "exit".into(), formula, verdict });
    Ok(out)
}

/// `{pre} stmt {post}` for a loop-free labelled statement.
pub fn hoare_holds(
    universe: &Universe,
    comp: &Component,
    stmt: &Stmt,
    next: &str,
    pre: &Expr,
    post: &Expr,
    cap: u64,
) -> Result<Validity, CheckError> {
    if *pre == FALSE {
        return Ok(Validity::Valid);
    }
    let w = wlp(comp, stmt, next, post)?;
    Ok(implies(universe, pre, &w, cap)?)
}
