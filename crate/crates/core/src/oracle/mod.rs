//! Explicit-state semantics: the reachable transition system of a program,
//! queried under per-component weak fairness.

mod query;
pub mod raw;

use std::collections::HashMap;

use thiserror::Error;

use crate::lang::{ActionKind, Block, StmtKind};
use crate::model::Model;
use crate::predicate::{Compiled, PredError, Universe, Valuation};

pub use query::{Lasso, LeadsTo, Step, Violation};

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("state space exceeds cap {cap}: {states} states found, {frontier} still unexplored")]
    Cap { cap: usize, states: usize, frontier: usize },
    #[error("{0}")]
    Eval(#[from] PredError),
    #[error("{action}: value {value} assigned to {var} is outside its domain in state {state}")]
    Domain { action: String, var: String, value: i64, state: String },
}

impl OracleError {
    pub fn is_cap(&self) -> bool {
        matches!(self, OracleError::Cap { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub component: usize,
    /// Index into [`Model::actions`].
    pub action: usize,
    pub to: usize,
}

/// Reachable states in breadth-first discovery order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    pub states: Vec<Vec<i64>>,
    pub initial: Vec<usize>,
    pub succ: Vec<Vec<Transition>>,
    /// `enabled[s][c]`: component `c` can take a step in state `s`.
    pub enabled: Vec<Vec<bool>>,
    /// Counter slot of each component.
    pub pc_slots: Vec<usize>,
    pub final_codes: Vec<i64>,
}

impl TransitionSystem {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn transition_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Every component sits at its final label.
    pub fn is_terminal(&self, s: usize) -> bool {
        self.pc_slots.iter().zip(&self.final_codes).all(|(&slot, &code)| self.states[s][slot] == code)
    }

    pub fn valuation(&self, s: usize) -> Valuation {
        Valuation(self.states[s].clone())
    }
}

enum CStmt {
    Skip,
    Assign(Vec<(usize, Compiled)>),
    If(Vec<(Compiled, Vec<CStmt>)>),
}

enum CEffect {
    None,
    Assign(Vec<(usize, Compiled)>),
    Atomic(Vec<CStmt>),
}

struct COutcome {
    guard: Option<Compiled>,
    effect: CEffect,
    target: i64,
}

struct CAction {
    label: String,
    outcomes: Vec<COutcome>,
}

fn slot_of(u: &Universe, name: &str) -> Result<usize, PredError> {
    u.slot(name).ok_or_else(|| PredError::UnknownVar(name.to_string()))
}

fn compile_assigns(u: &Universe, pairs: &[(String, crate::expr::Expr)]) -> Result<Vec<(usize, Compiled)>, PredError> {
    pairs.iter().map(|(x, e)| Ok((slot_of(u, x)?, u.compile(e)?))).collect()
}

fn compile_block(u: &Universe, b: &Block) -> Result<Vec<CStmt>, PredError> {
    let mut out = Vec::new();
    for s in &b.stmts {
        match &s.kind {
            StmtKind::Skip => out.push(CStmt::Skip),
            StmtKind::Assign(pairs) => out.push(CStmt::Assign(compile_assigns(u, pairs)?)),
            StmtKind::Atomic(inner) => out.extend(compile_block(u, inner)?),
            StmtKind::If(bs) => {
                let mut branches = Vec::new();
                for br in bs {
                    branches.push((u.compile(&br.guard)?, compile_block(u, &br.body)?));
                }
                out.push(CStmt::If(branches));
            }
            StmtKind::Do(_) => return Err(PredError::Type("loop inside an atomic statement".into())),
        }
    }
    Ok(out)
}

fn compile_action(model: &Model, a: &crate::lang::AtomicAction) -> Result<CAction, PredError> {
    let u = &model.universe;
    let code = |l: &str| u.label_code(l).ok_or_else(|| PredError::UnknownLabel(l.to_string()));
    let simple = |effect: CEffect, next: &str| -> Result<Vec<COutcome>, PredError> {
        Ok(vec![COutcome { guard: None, effect, target: code(next)? }])
    };
    let selects = |bs: &mut dyn Iterator<Item = &(crate::expr::Expr, String)>| -> Result<Vec<COutcome>, PredError> {
        bs.map(|(g, t)| Ok(COutcome { guard: Some(u.compile(g)?), effect: CEffect::None, target: code(t)? }))
            .collect()
    };
    let outcomes = match &a.kind {
        ActionKind::Skip { next } => simple(CEffect::None, next)?,
        ActionKind::Assign { assigns, next } => simple(CEffect::Assign(compile_assigns(u, assigns)?), next)?,
        ActionKind::Atomic { body, next } => simple(CEffect::Atomic(compile_block(u, body)?), next)?,
        ActionKind::IfEval { branches } => selects(&mut branches.iter())?,
        ActionKind::DoEval { branches, exit } => selects(&mut branches.iter().chain(std::iter::once(exit)))?,
    };
    Ok(CAction { label: a.label.clone(), outcomes })
}

struct Engine<'a> {
    universe: &'a Universe,
}

impl Engine<'_> {
    fn assign(&self, action: &str, state: &[i64], pairs: &[(usize, Compiled)]) -> Result<Vec<i64>, OracleError> {
        let mut next = state.to_vec();
        for (slot, e) in pairs {
            let v = e.eval(state)?;
            if !self.universe.vars()[*slot].domain.contains(v) {
                return Err(OracleError::Domain {
                    action: action.to_string(),
                    var: self.universe.vars()[*slot].name.clone(),
                    value: v,
                    state: self.universe.render(&Valuation(state.to_vec())),
                });
            }
            next[*slot] = v;
        }
        Ok(next)
    }

    /// All final states of a body run to completion, or `None` when some
    /// run blocks at a selection with no true guard.
    fn run(&self, action: &str, body: &[CStmt], state: Vec<i64>) -> Result<Option<Vec<Vec<i64>>>, OracleError> {
        let mut current = vec![state];
        for s in body {
            let mut next = Vec::new();
            for st in current {
                match s {
                    CStmt::Skip => next.push(st),
                    CStmt::Assign(pairs) => next.push(self.assign(action, &st, pairs)?),
                    CStmt::If(branches) => {
                        let mut any = false;
                        for (g, b) in branches {
                            if g.eval_bool(&st)? {
                                any = true;
                                match self.run(action, b, st.clone())? {
                                    Some(finals) => next.extend(finals),
                                    None => return Ok(None),
                                }
                            }
                        }
                        if !any {
                            return Ok(None);
                        }
                    }
                }
            }
            current = dedup(next);
        }
        Ok(Some(current))
    }

    fn fire(&self, a: &CAction, pc: usize, state: &[i64]) -> Result<Vec<Vec<i64>>, OracleError> {
        let mut out = Vec::new();
        for o in &a.outcomes {
            if let Some(g) = &o.guard {
                if !g.eval_bool(state)? {
                    continue;
                }
            }
            let finals = match &o.effect {
                CEffect::None => vec![state.to_vec()],
                CEffect::Assign(pairs) => vec![self.assign(&a.label, state, pairs)?],
                CEffect::Atomic(body) => match self.run(&a.label, body, state.to_vec())? {
                    Some(f) => f,
                    None => return Ok(Vec::new()),
                },
            };
            for mut f in finals {
                f[pc] = o.target;
                out.push(f);
            }
        }
        Ok(dedup(out))
    }
}

fn dedup(v: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let mut seen = std::collections::HashSet::new();
    v.into_iter().filter(|s| seen.insert(s.clone())).collect()
}

/// Initial states: every data valuation satisfying the precondition, with
/// each counter at its component's initial label. Enumerated in slot order.
fn initial_states(model: &Model, pc_slots: &[usize], cap: usize) -> Result<Vec<Vec<i64>>, OracleError> {
    let u = &model.universe;
    let pre = u.compile(&model.pre())?;
    let mut base = u.minimal().0;
    for (c, &slot) in model.program.components.iter().zip(pc_slots) {
        if let Some(init) = c.initial_label() {
            base[slot] = u.label_code(&init).ok_or(PredError::UnknownLabel(init))?;
        }
    }
    let free: Vec<(usize, Vec<i64>)> = (0..u.len())
        .filter(|i| !pc_slots.contains(i))
        .map(|i| (i, u.vars()[i].domain.values()))
        .collect();
    let size: u128 = free.iter().map(|(_, v)| v.len() as u128).product();
    if size > cap as u128 {
        return Err(OracleError::Cap { cap, states: 0, frontier: size.min(usize::MAX as u128) as usize });
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; free.len()];
    loop {
        let mut s = base.clone();
        for ((slot, vals), &k) in free.iter().zip(&idx) {
            s[*slot] = vals[k];
        }
        if pre.eval_bool(&s)? {
            out.push(s);
        }
        // Odometer with the last slot varying fastest, so the order is lexicographic.
        let mut k = free.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < free[k].1.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Breadth-first exploration of every state reachable from the initial states.
pub fn build_state_space(model: &Model, cap: usize) -> Result<TransitionSystem, OracleError> {
    let u = &model.universe;
    let comps = &model.program.components;
    let pc_slots: Vec<usize> = comps.iter().map(|c| slot_of(u, &c.pc())).collect::<Result<_, _>>()?;
    let final_codes: Vec<i64> = comps
        .iter()
        .map(|c| {
            let f = c.final_full_label().unwrap_or_default();
            u.label_code(&f).ok_or(PredError::UnknownLabel(f))
        })
        .collect::<Result<_, _>>()?;
    let actions: Vec<CAction> = model.actions.iter().map(|a| compile_action(model, a)).collect::<Result<_, _>>()?;
    let mut by_code: HashMap<i64, usize> = HashMap::new();
    for (i, a) in model.actions.iter().enumerate() {
        if let Some(code) = u.label_code(&a.label) {
            by_code.insert(code, i);
        }
    }
    let engine = Engine { universe: u };
    let mut ts = TransitionSystem {
        states: Vec::new(),
        initial: Vec::new(),
        succ: Vec::new(),
        enabled: Vec::new(),
        pc_slots: pc_slots.clone(),
        final_codes,
    };
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    for s in initial_states(model, &pc_slots, cap)? {
        let id = ts.states.len();
        index.insert(s.clone(), id);
        ts.states.push(s);
        ts.initial.push(id);
    }
    if ts.states.len() > cap {
        return Err(OracleError::Cap { cap, states: ts.states.len(), frontier: ts.states.len() });
    }
    let mut next = 0;
    while next < ts.states.len() {
        let state = ts.states[next].clone();
        let mut succ = Vec::new();
        let mut enabled = vec![false; comps.len()];
        for (c, &pc) in pc_slots.iter().enumerate() {
            let Some(&ai) = by_code.get(&state[pc]) else { continue };
            for t in engine.fire(&actions[ai], pc, &state)? {
                enabled[c] = true;
                let id = match index.get(&t) {
                    Some(&id) => id,
                    None => {
                        let id = ts.states.len();
                        if id >= cap {
                            return Err(OracleError::Cap { cap, states: id, frontier: id - next });
                        }
                        index.insert(t.clone(), id);
                        ts.states.push(t);
                        id
                    }
                };
                succ.push(Transition { component: c, action: ai, to: id });
            }
        }
        ts.succ.push(succ);
        ts.enabled.push(enabled);
        next += 1;
    }
    Ok(ts)
}
