//! Splitting a conjunctive coarse-grained guard into two finer waits, with
//! the global-correctness side condition that justifies it and a harness
//! that compares the two programs' behaviour.

use thiserror::Error;

use crate::expr::{Expr, TRUE};
use crate::lang::{auto_label, Block, Branch, LabelError, Program, PropertyKind, Stmt, StmtKind};
use crate::model::Model;
use crate::obligation::{ObKind, Obligation};
use crate::oracle::{build_state_space, OracleError, TransitionSystem};
use crate::safety::{check_global, check_local};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("no statement is labelled {0}")]
    NoSuchLabel(String),
    #[error("{0} is not a coarse-grained statement `atomic if G -> S fi end` with a single branch")]
    Shape(String),
    #[error("`{hoist}` is not a conjunct of the guard `{guard}`")]
    NotConjunct { hoist: String, guard: String },
    #[error("label {0} is already in use")]
    LabelTaken(String),
    #[error(transparent)]
    Label(#[from] LabelError),
}

#[derive(Clone, Debug)]
pub struct SplitRequest {
    /// Full label of the statement to split, e.g. `A.2`.
    pub label: String,
    /// The conjunct checked first.
    pub hoist: Expr,
    /// Local id for the second statement; the least unused number if absent.
    pub fresh: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Split {
    pub program: Program,
    /// Full label of the inserted statement.
    pub fresh_label: String,
    /// Local and global correctness of the hoisted conjunct at the new label.
    pub side_conditions: Vec<Obligation>,
}

impl Split {
    pub fn justified(&self) -> bool {
        crate::obligation::all_valid(&self.side_conditions)
    }
}

fn find<'a>(b: &'a mut Block, id: &str) -> Option<(&'a mut Block, usize)> {
    if let Some(k) = b.stmts.iter().position(|s| s.label.as_deref() == Some(id)) {
        return Some((b, k));
    }
    for s in b.stmts.iter_mut() {
        if let StmtKind::If(bs) | StmtKind::Do(bs) = &mut s.kind {
            for br in bs.iter_mut() {
                if let Some(hit) = find(&mut br.body, id) {
                    return Some(hit);
                }
            }
        }
    }
    None
}

/// Replaces `i: ⟨if B ∧ C → S fi⟩` by `i: ⟨if B → skip fi⟩; k: ⟨if C → S fi⟩`.
pub fn guard_conjunction_split(program: &Program, req: &SplitRequest, cap: u64) -> Result<Split, TransformError> {
    let mut out = if program.is_labelled() { program.clone() } else { auto_label(program)? };
    let (comp_name, id) = req.label.split_once('.').ok_or_else(|| TransformError::NoSuchLabel(req.label.clone()))?;
    let ci = out.component_index(comp_name).ok_or_else(|| TransformError::NoSuchLabel(req.label.clone()))?;
    let used = out.components[ci].labels();
    let comp = &mut out.components[ci];
    let fresh = match &req.fresh {
        Some(f) => {
            if used.contains(&comp.full_label(f)) {
                return Err(TransformError::LabelTaken(comp.full_label(f)));
            }
            f.clone()
        }
        None => (1..).map(|n: u32| n.to_string()).find(|n| !used.contains(&comp.full_label(n))).expect("unbounded"),
    };
    let fresh_label = comp.full_label(&fresh);
    let (block, k) = find(&mut comp.body, id).ok_or_else(|| TransformError::NoSuchLabel(req.label.clone()))?;
    let (guard, body) = match &block.stmts[k].kind {
        StmtKind::Atomic(inner) if inner.stmts.len() == 1 && inner.post.is_empty() => match &inner.stmts[0].kind {
            StmtKind::If(bs) if bs.len() == 1 => (bs[0].guard.clone(), bs[0].body.clone()),
            _ => return Err(TransformError::Shape(req.label.clone())),
        },
        _ => return Err(TransformError::Shape(req.label.clone())),
    };
    let rest = if req.hoist == TRUE {
        guard.clone()
    } else {
        let parts = guard.conjuncts();
        let Some(pos) = parts.iter().position(|p| **p == req.hoist) else {
            return Err(TransformError::NotConjunct { hoist: req.hoist.to_string(), guard: guard.to_string() });
        };
        Expr::conj(parts.iter().enumerate().filter(|(i, _)| *i != pos).map(|(_, p)| (*p).clone()))
    };
    let wait = |g: Expr, body: Block| {
        StmtKind::Atomic(Block::new(vec![Stmt::new(StmtKind::If(vec![Branch { guard: g, body }]))]))
    };
    block.stmts[k].kind = wait(req.hoist.clone(), Block::new(vec![Stmt::new(StmtKind::Skip)]));
    block.stmts.insert(k + 1, Stmt::labelled(&fresh, wait(rest, body)));

    // The side condition is checked on a copy that asserts the hoisted conjunct at the new label.
    let mut asserted = out.clone();
    let (block, k) = find(&mut asserted.components[ci].body, &fresh).expect("just inserted");
    block.stmts[k].assertions.push(req.hoist.clone());
    let model = Model::new(&asserted)?;
    let prefix = |kind: &str| format!("{kind}:{fresh_label}#{}/", block_index(&model, &fresh_label, &req.hoist));
    let (lc, gc) = (prefix("LC"), prefix("GC"));
    let side_conditions = check_local(&model, cap)
        .into_iter()
        .filter(|o| o.id.starts_with(&lc))
        .chain(check_global(&model, cap).into_iter().filter(|o| o.id.starts_with(&gc)))
        .map(|mut o| {
            o.provenance = format!("hoisted conjunct at {fresh_label}: {}", o.provenance);
            o
        })
        .collect::<Vec<_>>();
    debug_assert!(side_conditions.iter().all(|o| matches!(o.kind, ObKind::Lc | ObKind::Gc)));
    Ok(Split { program: out, fresh_label, side_conditions })
}

/// Position (from 1) of `pred` among the assertions at `label`.
fn block_index(model: &Model, label: &str, pred: &Expr) -> usize {
    model.assertions_at(label).iter().position(|p| p == pred).map(|i| i + 1).unwrap_or(0)
}

/// One compared verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub property: String,
    pub before: bool,
    pub after: bool,
}

#[derive(Clone, Debug, Default)]
pub struct HarnessReport {
    pub comparisons: Vec<Comparison>,
}

impl HarnessReport {
    pub fn divergences(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons.iter().filter(|c| c.before != c.after)
    }

    pub fn equivalent(&self) -> bool {
        self.divergences().next().is_none()
    }
}

/// Semantic verdicts of `before` and `after` side by side: deadlock freedom,
/// annotation, declared postconditions and invariants, and `pc=ii ⇝ pc=jj`
/// for every component and every pair of labels the original program has.
pub fn progress_equivalence(mb: &Model, ma: &Model, cap: usize) -> Result<HarnessReport, OracleError> {
    let (tb, ta) = (build_state_space(mb, cap)?, build_state_space(ma, cap)?);
    let mut report = HarnessReport::default();
    let mut push = |property: String, before: bool, after: bool| {
        report.comparisons.push(Comparison { property, before, after });
    };
    push("deadlock-free".into(), tb.deadlock().is_none(), ta.deadlock().is_none());
    push("annotation".into(), tb.check_assertions(mb)?.is_empty(), ta.check_assertions(ma)?.is_empty());
    for p in &mb.program.properties {
        let semantic = |m: &Model, ts: &TransitionSystem| -> Result<bool, OracleError> {
            Ok(match &p.kind {
                PropertyKind::Postcondition(e) => ts.check_postcondition(&m.universe, e)?.is_none(),
                PropertyKind::Invariant(e) => ts.check_invariant(&m.universe, e)?.is_none(),
                _ => return Ok(true),
            })
        };
        if matches!(p.kind, PropertyKind::Postcondition(_) | PropertyKind::Invariant(_)) {
            push(p.name.clone(), semantic(mb, &tb)?, semantic(ma, &ta)?);
        }
    }
    for c in &mb.program.components {
        let labels = c.labels();
        for ii in &labels {
            for jj in &labels {
                if ii == jj {
                    continue;
                }
                let (p, q) = (mb.at(ii), mb.at(jj));
                let b = tb.check_leadsto(&mb.universe, &p, &q)?.holds;
                let a = ta.check_leadsto(&ma.universe, &p, &q)?.holds;
                push(format!("{p} leadsto {q}"), b, a);
            }
        }
    }
    Ok(report)
}
