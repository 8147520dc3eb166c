use std::collections::VecDeque;

use crate::expr::Expr;
use crate::model::Model;
use crate::predicate::{Universe, Valuation};

use super::{OracleError, TransitionSystem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub from: usize,
    pub component: usize,
    pub action: usize,
    pub to: usize,
}

/// A finite path from an initial state followed by a cycle that repeats
/// forever. An empty cycle means the path ends in a state with no enabled
/// action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub start: usize,
    pub stem: Vec<Step>,
    pub cycle: Vec<Step>,
}

impl Lasso {
    /// Every state on the lasso, stem first.
    pub fn states(&self) -> Vec<usize> {
        let mut out = vec![self.start];
        out.extend(self.stem.iter().chain(&self.cycle).map(|s| s.to));
        out
    }

    fn end_of_stem(&self) -> usize {
        self.stem.last().map(|s| s.to).unwrap_or(self.start)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadsTo {
    pub holds: bool,
    pub witness: Option<Lasso>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub label: String,
    /// Position of the assertion among those at the label, from 1.
    pub index: usize,
    pub state: usize,
}

impl TransitionSystem {
    /// Truth value of `p` in every state.
    pub fn holds_in(&self, universe: &Universe, p: &Expr) -> Result<Vec<bool>, OracleError> {
        let c = universe.compile(p)?;
        self.states.iter().map(|s| Ok(c.eval_bool(s)?)).collect()
    }

    /// A shortest path from some initial state to `target`.
    pub fn path_to(&self, target: usize) -> Vec<Step> {
        let mut parent: Vec<Option<Step>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = self.initial.iter().copied().collect();
        for &i in &self.initial {
            seen[i] = true;
        }
        while let Some(s) = queue.pop_front() {
            if s == target {
                break;
            }
            for t in &self.succ[s] {
                if !seen[t.to] {
                    seen[t.to] = true;
                    parent[t.to] = Some(Step { from: s, component: t.component, action: t.action, to: t.to });
                    queue.push_back(t.to);
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = target;
        while let Some(step) = parent[cur].clone() {
            cur = step.from;
            path.push(step);
        }
        path.reverse();
        path
    }

    fn path_start(&self, path: &[Step], end: usize) -> usize {
        path.first().map(|s| s.from).unwrap_or(end)
    }

    /// A transition from a reachable `P ∧ ¬Q` state into `¬P ∧ ¬Q`.
    pub fn check_unless(&self, universe: &Universe, p: &Expr, q: &Expr) -> Result<Option<Step>, OracleError> {
        let (ps, qs) = (self.holds_in(universe, p)?, self.holds_in(universe, q)?);
        for s in 0..self.len() {
            if !ps[s] || qs[s] {
                continue;
            }
            if let Some(t) = self.succ[s].iter().find(|t| !ps[t.to] && !qs[t.to]) {
                return Ok(Some(Step { from: s, component: t.component, action: t.action, to: t.to }));
            }
        }
        Ok(None)
    }

    /// Whether every weakly fair maximal execution that reaches `P` later
    /// reaches `Q`.
    pub fn check_leadsto(&self, universe: &Universe, p: &Expr, q: &Expr) -> Result<LeadsTo, OracleError> {
        let (ps, qs) = (self.holds_in(universe, p)?, self.holds_in(universe, q)?);
        let n = self.len();
        // Q-avoiding region reachable from P ∧ ¬Q, with parents back to its source.
        let mut parent: Vec<Option<Step>> = vec![None; n];
        let mut inside = vec![false; n];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..n {
            if ps[s] && !qs[s] {
                inside[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for t in &self.succ[s] {
                if !qs[t.to] && !inside[t.to] {
                    inside[t.to] = true;
                    parent[t.to] = Some(Step { from: s, component: t.component, action: t.action, to: t.to });
                    queue.push_back(t.to);
                }
            }
        }
        let stem_to = |target: usize| {
            let mut local = Vec::new();
            let mut cur = target;
            while let Some(step) = parent[cur].clone() {
                cur = step.from;
                local.push(step);
            }
            local.reverse();
            let mut stem = self.path_to(cur);
            let start = self.path_start(&stem, cur);
            stem.extend(local);
            (start, stem)
        };
        if let Some(&stuck) = order.iter().find(|&&s| self.succ[s].is_empty()) {
            let (start, stem) = stem_to(stuck);
            return Ok(LeadsTo { holds: false, witness: Some(Lasso { start, stem, cycle: Vec::new() }) });
        }
        for scc in self.sccs(&inside) {
            if let Some(cycle) = self.fair_cycle(&scc) {
                let (start, stem) = stem_to(cycle[0].from);
                return Ok(LeadsTo { holds: false, witness: Some(Lasso { start, stem, cycle }) });
            }
        }
        Ok(LeadsTo { holds: true, witness: None })
    }

    /// Strongly connected components of the subgraph induced by `inside`
    /// that contain at least one edge, each sorted by state index.
    fn sccs(&self, inside: &[bool]) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut out = Vec::new();
        let mut counter = 0;
        for root in (0..n).filter(|&s| inside[s]) {
            if index[root] != usize::MAX {
                continue;
            }
            let mut work: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut i)) = work.last_mut() {
                if let Some(t) = self.succ[v].get(*i) {
                    *i += 1;
                    let w = t.to;
                    if !inside[w] {
                        continue;
                    }
                    if index[w] == usize::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                work.pop();
                if let Some(&(u, _)) = work.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    let looped = comp.len() > 1 || self.succ[v].iter().any(|t| t.to == v);
                    if looped {
                        out.push(comp);
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// A cycle through `scc` on which every component either moves or is
    /// disabled somewhere, if there is one.
    fn fair_cycle(&self, scc: &[usize]) -> Option<Vec<Step>> {
        let member = |s: usize| scc.binary_search(&s).is_ok();
        let internal = |s: usize| {
            self.succ[s].iter().filter(move |t| member(t.to)).map(move |t| Step {
                from: s,
                component: t.component,
                action: t.action,
                to: t.to,
            })
        };
        enum Need {
            Edge(Step),
            Visit(usize),
        }
        let mut needs = Vec::new();
        for c in 0..self.pc_slots.len() {
            if let Some(e) = scc.iter().flat_map(|&s| internal(s)).find(|e| e.component == c) {
                needs.push(Need::Edge(e));
            } else if let Some(&s) = scc.iter().find(|&&s| !self.enabled[s][c]) {
                needs.push(Need::Visit(s));
            } else {
                return None;
            }
        }
        let route = |from: usize, to: usize| -> Vec<Step> {
            let mut parent: Vec<Option<Step>> = vec![None; self.len()];
            let mut seen = vec![false; self.len()];
            seen[from] = true;
            let mut queue = VecDeque::from([from]);
            while let Some(s) = queue.pop_front() {
                if s == to {
                    break;
                }
                for e in internal(s) {
                    if !seen[e.to] {
                        seen[e.to] = true;
                        parent[e.to] = Some(e.clone());
                        queue.push_back(e.to);
                    }
                }
            }
            let mut path = Vec::new();
            let mut cur = to;
            while cur != from {
                let step = parent[cur].clone().expect("states of one component are mutually reachable");
                cur = step.from;
                path.push(step);
            }
            path.reverse();
            path
        };
        let home = scc[0];
        let mut cycle = Vec::new();
        let mut at = home;
        for need in needs {
            match need {
                Need::Edge(e) => {
                    cycle.extend(route(at, e.from));
                    at = e.to;
                    cycle.push(e);
                }
                Need::Visit(s) => {
                    cycle.extend(route(at, s));
                    at = s;
                }
            }
        }
        if cycle.is_empty() {
            let e = internal(home).next().expect("a component with an edge");
            at = e.to;
            cycle.push(e);
        }
        cycle.extend(route(at, home));
        Some(cycle)
    }

    /// Checks a counterexample on its own terms: it is a path of the system
    /// from an initial state, it closes, and it is weakly fair.
    pub fn lasso_is_fair(&self, lasso: &Lasso) -> bool {
        if !self.initial.contains(&lasso.start) {
            return false;
        }
        let mut at = lasso.start;
        for s in lasso.stem.iter().chain(&lasso.cycle) {
            let real = self.succ[s.from].iter().any(|t| t.to == s.to && t.component == s.component && t.action == s.action);
            if s.from != at || !real {
                return false;
            }
            at = s.to;
        }
        if lasso.cycle.is_empty() {
            return self.succ[at].is_empty();
        }
        if at != lasso.end_of_stem() {
            return false;
        }
        (0..self.pc_slots.len()).all(|c| {
            lasso.cycle.iter().any(|s| s.component == c || !self.enabled[s.from][c])
        })
    }

    /// Assertions that fail in some reachable state where control is at their label.
    pub fn check_assertions(&self, model: &Model) -> Result<Vec<Violation>, OracleError> {
        let u = &model.universe;
        let mut compiled = Vec::new();
        for (label, preds) in &model.annotation {
            let code = u.label_code(label);
            let slot = model.pc_of(label).and_then(|pc| u.slot(&pc));
            let (Some(code), Some(slot)) = (code, slot) else { continue };
            for (k, p) in preds.iter().enumerate() {
                compiled.push((label.clone(), k + 1, slot, code, u.compile(p)?));
            }
        }
        let mut out = Vec::new();
        for (label, index, slot, code, c) in &compiled {
            for (s, state) in self.states.iter().enumerate() {
                if state[*slot] == *code && !c.eval_bool(state)? {
                    out.push(Violation { label: label.clone(), index: *index, state: s });
                    break;
                }
            }
        }
        Ok(out)
    }

    /// A reachable state where `inv` fails.
    pub fn check_invariant(&self, universe: &Universe, inv: &Expr) -> Result<Option<usize>, OracleError> {
        Ok(self.holds_in(universe, inv)?.iter().position(|b| !b))
    }

    /// A reachable terminal state where `post` fails.
    pub fn check_postcondition(&self, universe: &Universe, post: &Expr) -> Result<Option<usize>, OracleError> {
        let holds = self.holds_in(universe, post)?;
        Ok((0..self.len()).find(|&s| self.is_terminal(s) && !holds[s]))
    }

    /// A reachable non-terminal state in which no component can move.
    pub fn deadlock(&self) -> Option<usize> {
        (0..self.len()).find(|&s| self.succ[s].is_empty() && !self.is_terminal(s))
    }

    /// One line per step: component, action label and the state change.
    pub fn render_steps(&self, model: &Model, start: usize, steps: &[Step]) -> Vec<String> {
        let u = &model.universe;
        let mut out = vec![format!("start: {}", u.render(&self.valuation(start)))];
        for s in steps {
            out.push(format!(
                "{} {}: {}",
                model.program.components[s.component].name,
                model.actions[s.action].label,
                u.render_diff(&self.valuation(s.from), &self.valuation(s.to))
            ));
        }
        out
    }

    pub fn render_lasso(&self, model: &Model, lasso: &Lasso) -> Vec<String> {
        let mut out = self.render_steps(model, lasso.start, &lasso.stem);
        if lasso.cycle.is_empty() {
            out.push("then no action is enabled".into());
        } else {
            out.push("repeat forever:".into());
            out.extend(self.render_steps(model, lasso.end_of_stem(), &lasso.cycle).into_iter().skip(1).map(|l| format!("  {l}")));
        }
        out
    }

    pub fn render_state(&self, universe: &Universe, s: usize) -> String {
        universe.render(&Valuation(self.states[s].clone()))
    }
}
