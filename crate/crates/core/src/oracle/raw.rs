//! A second interpreter that runs the source statements directly, keeping a
//! stack of resume points per component instead of program counters.

use std::collections::{BTreeSet, HashMap};

use crate::lang::{Block, Stmt, StmtKind};
use crate::model::Model;
use crate::predicate::{Compiled, PredError, Universe};

use super::{OracleError, TransitionSystem};

/// Resume points: `(block, index)` pairs, innermost last.
type Kont = Vec<(usize, usize)>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct RawState {
    data: Vec<i64>,
    konts: Vec<Kont>,
}

struct Comp<'a> {
    blocks: Vec<&'a Block>,
    /// Block id of each branch body, keyed by the address of the statement.
    bodies: HashMap<*const Stmt, Vec<usize>>,
}

fn collect<'a>(b: &'a Block, comp: &mut Comp<'a>) -> usize {
    let id = comp.blocks.len();
    comp.blocks.push(b);
    for s in &b.stmts {
        if let StmtKind::If(bs) | StmtKind::Do(bs) = &s.kind {
            let ids = bs.iter().map(|br| collect(&br.body, comp)).collect();
            comp.bodies.insert(s as *const Stmt, ids);
        }
    }
    id
}

/// The reachable graph of the uninstrumented program: states and, for each,
/// the set of `(component, successor)` pairs.
pub struct RawSystem {
    states: Vec<RawState>,
    pub succ: Vec<BTreeSet<(usize, usize)>>,
}

impl RawSystem {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

struct Interp<'a> {
    universe: &'a Universe,
    comps: Vec<Comp<'a>>,
    cache: HashMap<*const crate::expr::Expr, Compiled>,
}

impl<'a> Interp<'a> {
    fn eval(&mut self, e: &crate::expr::Expr, data: &[i64]) -> Result<i64, OracleError> {
        let key = e as *const _;
        if !self.cache.contains_key(&key) {
            self.cache.insert(key, self.universe.compile(e)?);
        }
        Ok(self.cache[&key].eval(data)?)
    }

    fn assign(&mut self, pairs: &[(String, crate::expr::Expr)], data: &[i64]) -> Result<Vec<i64>, OracleError> {
        let mut out = data.to_vec();
        for (x, e) in pairs {
            let v = self.eval(e, data)?;
            let slot = self.universe.slot(x).ok_or_else(|| PredError::UnknownVar(x.clone()))?;
            if !self.universe.vars()[slot].domain.contains(v) {
                return Err(OracleError::Domain { action: x.clone(), var: x.clone(), value: v, state: String::new() });
            }
            out[slot] = v;
        }
        Ok(out)
    }

    /// Big-step run of an atomic body; `None` if some run blocks.
    fn run(&mut self, b: &Block, data: Vec<i64>) -> Result<Option<Vec<Vec<i64>>>, OracleError> {
        let mut current = vec![data];
        for s in &b.stmts {
            let mut next = Vec::new();
            for d in current {
                match &s.kind {
                    StmtKind::Skip => next.push(d),
                    StmtKind::Assign(pairs) => next.push(self.assign(pairs, &d)?),
                    StmtKind::Atomic(inner) => match self.run(inner, d)? {
                        Some(f) => next.extend(f),
                        None => return Ok(None),
                    },
                    StmtKind::If(bs) => {
                        let mut any = false;
                        for br in bs {
                            if self.eval(&br.guard, &d)? != 0 {
                                any = true;
                                match self.run(&br.body, d.clone())? {
                                    Some(f) => next.extend(f),
                                    None => return Ok(None),
                                }
                            }
                        }
                        if !any {
                            return Ok(None);
                        }
                    }
                    StmtKind::Do(_) => return Err(PredError::Type("loop inside an atomic statement".into()).into()),
                }
            }
            current = next;
        }
        Ok(Some(current))
    }

    fn normalize(&self, c: usize, mut k: Kont) -> Kont {
        while let Some(&(b, i)) = k.last() {
            if i < self.comps[c].blocks[b].stmts.len() {
                break;
            }
            k.pop();
        }
        k
    }

    /// Successor `(data, continuation)` pairs of component `c`.
    fn step(&mut self, c: usize, data: &[i64], k: &Kont) -> Result<Vec<(Vec<i64>, Kont)>, OracleError> {
        let Some(&(b, i)) = k.last() else { return Ok(Vec::new()) };
        let block = self.comps[c].blocks[b];
        let stmt = &block.stmts[i];
        let mut advanced = k.clone();
        advanced.last_mut().expect("nonempty").1 += 1;
        let mut out = Vec::new();
        match &stmt.kind {
            StmtKind::Skip => out.push((data.to_vec(), advanced)),
            StmtKind::Assign(pairs) => out.push((self.assign(pairs, data)?, advanced)),
            StmtKind::Atomic(body) => {
                if let Some(finals) = self.run(body, data.to_vec())? {
                    out.extend(finals.into_iter().map(|d| (d, advanced.clone())));
                }
            }
            StmtKind::If(bs) => {
                let ids = self.comps[c].bodies[&(stmt as *const Stmt)].clone();
                for (br, id) in bs.iter().zip(ids) {
                    if self.eval(&br.guard, data)? != 0 {
                        let mut nk = advanced.clone();
                        nk.push((id, 0));
                        out.push((data.to_vec(), nk));
                    }
                }
            }
            StmtKind::Do(bs) => {
                let ids = self.comps[c].bodies[&(stmt as *const Stmt)].clone();
                let mut any = false;
                for (br, id) in bs.iter().zip(ids) {
                    if self.eval(&br.guard, data)? != 0 {
                        any = true;
                        let mut nk = k.clone();
                        nk.push((id, 0));
                        out.push((data.to_vec(), nk));
                    }
                }
                if !any {
                    out.push((data.to_vec(), advanced));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        Ok(out
            .into_iter()
            .map(|(d, k)| (d, self.normalize(c, k)))
            .filter(|x| seen.insert(x.clone()))
            .collect())
    }

    /// Label of the statement a continuation resumes at.
    fn label(&self, model: &Model, c: usize, k: &Kont) -> String {
        let comp = &model.program.components[c];
        match k.last() {
            Some(&(b, i)) => comp.full_label(self.comps[c].blocks[b].stmts[i].label.as_deref().unwrap_or("?")),
            None => comp.final_full_label().unwrap_or_default(),
        }
    }
}

fn explore(model: &Model, cap: usize) -> Result<(RawSystem, Interp<'_>), OracleError> {
    let u = &model.universe;
    let comps = model
        .program
        .components
        .iter()
        .map(|c| {
            let mut comp = Comp { blocks: Vec::new(), bodies: HashMap::new() };
            collect(&c.body, &mut comp);
            comp
        })
        .collect();
    let mut it = Interp { universe: u, comps, cache: HashMap::new() };
    let start_konts: Vec<Kont> = (0..model.program.components.len()).map(|c| it.normalize(c, vec![(0, 0)])).collect();
    // Initial data: the precondition holds with counters at their initial labels; then the counters are erased.
    let pc_slots: Vec<usize> =
        model.program.components.iter().map(|c| u.slot(&c.pc()).expect("counter slot")).collect();
    let mut sys = RawSystem { states: Vec::new(), succ: Vec::new() };
    let mut index: HashMap<RawState, usize> = HashMap::new();
    for mut data in super::initial_states(model, &pc_slots, cap)? {
        for &slot in &pc_slots {
            data[slot] = 0;
        }
        let st = RawState { data, konts: start_konts.clone() };
        if !index.contains_key(&st) {
            index.insert(st.clone(), sys.states.len());
            sys.states.push(st);
        }
    }
    let mut next = 0;
    while next < sys.states.len() {
        let st = sys.states[next].clone();
        let mut succ = BTreeSet::new();
        for c in 0..st.konts.len() {
            for (data, k) in it.step(c, &st.data, &st.konts[c])? {
                let mut konts = st.konts.clone();
                konts[c] = k;
                let ns = RawState { data, konts };
                let id = match index.get(&ns) {
                    Some(&id) => id,
                    None => {
                        if sys.states.len() >= cap {
                            return Err(OracleError::Cap { cap, states: sys.states.len(), frontier: sys.states.len() - next });
                        }
                        let id = sys.states.len();
                        index.insert(ns.clone(), id);
                        sys.states.push(ns);
                        id
                    }
                };
                succ.insert((c, id));
            }
        }
        sys.succ.push(succ);
        next += 1;
    }
    Ok((sys, it))
}

pub fn build_raw(model: &Model, cap: usize) -> Result<RawSystem, OracleError> {
    explore(model, cap).map(|(s, _)| s)
}

/// Whether mapping each raw state to its data plus the labels its
/// continuations resume at is an isomorphism onto `ts`.
pub fn isomorphic_to(model: &Model, ts: &TransitionSystem, cap: usize) -> Result<bool, OracleError> {
    let (sys, it) = explore(model, cap)?;
    if sys.len() != ts.len() {
        return Ok(false);
    }
    let index: HashMap<&Vec<i64>, usize> = ts.states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut image = Vec::with_capacity(sys.len());
    for st in &sys.states {
        let mut v = st.data.clone();
        for (c, k) in st.konts.iter().enumerate() {
            let l = it.label(model, c, k);
            v[ts.pc_slots[c]] = model.universe.label_code(&l).unwrap_or(-1);
        }
        match index.get(&v) {
            Some(&i) => image.push(i),
            None => return Ok(false),
        }
    }
    let distinct: BTreeSet<usize> = image.iter().copied().collect();
    if distinct.len() != image.len() {
        return Ok(false);
    }
    for (r, succ) in sys.succ.iter().enumerate() {
        let mapped: BTreeSet<(usize, usize)> = succ.iter().map(|&(c, t)| (c, image[t])).collect();
        let target: BTreeSet<(usize, usize)> = ts.succ[image[r]].iter().map(|t| (t.component, t.to)).collect();
        if mapped != target {
            return Ok(false);
        }
    }
    Ok(true)
}
