//! Random annotations, invariants, properties and proof scripts on top of a
//! random program, and the comparison of checker verdicts with the oracle.

use ogp_core::expr::{BinOp, Expr, FALSE};
use ogp_core::lang::{Block, NamedPredicate, ProofNode, ProofScript, Property, PropertyKind, Rule, Span, StmtKind};
use ogp_core::model::Model;
use ogp_core::oracle::{build_state_space, TransitionSystem};
use ogp_core::report::{check_program, PropertyOutcome};
use rand::seq::SliceRandom;

use super::rules::Sem;
use super::{Gen, Random, STATE_CAP, VAL_CAP};

fn assert_blocks(b: &mut Block, comp: &str, add: &mut dyn FnMut(&str) -> Option<Expr>) {
    for s in b.stmts.iter_mut() {
        if let Some(l) = &s.label {
            if let Some(p) = add(&format!("{comp}.{l}")) {
                s.assertions.push(p);
            }
        }
        if let StmtKind::If(bs) | StmtKind::Do(bs) = &mut s.kind {
            for br in bs.iter_mut() {
                assert_blocks(&mut br.body, comp, add);
            }
        }
    }
}

/// Attaches assertions (mostly true ones), invariants and random
/// properties with random proof scripts.
pub fn decorate(g: &mut Gen, r: &Random) -> Model {
    let sem = Sem { model: &r.model, ts: &r.ts };
    let mut program = r.model.program.clone();
    let candidate = |g: &mut Gen, at: &Expr| -> Option<Expr> {
        if !g.chance(0.4) {
            return None;
        }
        for _ in 0..4 {
            let p = g.pred(&r.model, &r.vars, 2);
            if g.chance(0.1) || sem.always(&Expr::implies(at.clone(), p.clone())) {
                return Some(p);
            }
        }
        None
    };
    for c in program.components.iter_mut() {
        let name = c.name.clone();
        assert_blocks(&mut c.body, &name, &mut |label| candidate(g, &Expr::at(&name, label)));
        if let Some(f) = c.final_full_label() {
            if let Some(p) = candidate(g, &Expr::at(&name, &f)) {
                c.body.post.push(p);
            }
        }
    }
    if g.chance(0.3) {
        let p = g.pred(&r.model, &r.vars, 2);
        if sem.always(&p) || g.chance(0.2) {
            program.invariants.push(NamedPredicate { name: "inv0".into(), pred: p, span: Span::default() });
        }
    }
    let prop = |name: &str, kind| Property { name: name.into(), kind, span: Span::default() };
    let pr = |g: &mut Gen| g.pred(&r.model, &r.vars, 2);
    let (p, q) = (pr(g), pr(g));
    program.properties.push(prop("un0", PropertyKind::Unless(p, q)));
    let i = if g.chance(0.5) { Expr::or(pr(g), pr(g)) } else { pr(g) };
    program.properties.push(prop("inv1", PropertyKind::Invariant(i)));
    let post = g.data_pred_expr(&r.vars);
    program.properties.push(prop("post0", PropertyKind::Postcondition(post)));
    for k in 0..2 {
        let name = format!("lt{k}");
        let (from, to) = goal(g, r);
        let root = node(g, r, &from, &to, 2);
        program.properties.push(prop(&name, PropertyKind::LeadsTo(from, to)));
        program.proofs.push(ProofScript { property: name, root, span: Span::default() });
    }
    Model::new(&program).unwrap()
}

/// A leads-to goal, usually about one action's control points.
fn goal(g: &mut Gen, r: &Random) -> (Expr, Expr) {
    if g.chance(0.3) {
        return (g.pred(&r.model, &r.vars, 2), g.pred(&r.model, &r.vars, 2));
    }
    let a = r.model.actions.choose(&mut g.rng).unwrap();
    let comp = &r.model.program.components[a.component].name;
    let from = Expr::at(comp, &a.label);
    let from = if g.chance(0.3) { Expr::and(from, g.data_pred_expr(&r.vars)) } else { from };
    let target = a.targets().choose(&mut g.rng).unwrap().clone();
    let to = Expr::at(comp, &target);
    let to = if g.chance(0.3) { Expr::or(to, g.pred(&r.model, &r.vars, 1)) } else { to };
    (from, to)
}

fn label_of(g: &mut Gen, r: &Random, from: &Expr) -> String {
    // Prefer an action whose control point the antecedent mentions.
    let text = from.to_string();
    let mentioned: Vec<_> = r.model.actions.iter().filter(|a| text.contains(&a.label)).collect();
    match mentioned.choose(&mut g.rng) {
        Some(a) if g.chance(0.8) => a.label.clone(),
        _ => r.model.actions.choose(&mut g.rng).unwrap().label.clone(),
    }
}

fn n(from: &Expr, to: &Expr, rule: Rule) -> ProofNode {
    ProofNode { from: from.clone(), to: to.clone(), rule, span: Span::default() }
}

/// A random proof of `from ⇝ to`, of depth at most `depth`.
pub fn node(g: &mut Gen, r: &Random, from: &Expr, to: &Expr, depth: u32) -> ProofNode {
    let roll = if depth == 0 { g.rng_range(0, 1) } else { g.rng_range(0, 10) };
    let pr = |g: &mut Gen| g.pred(&r.model, &r.vars, 1);
    match roll {
        0 => n(from, to, Rule::Immediate(label_of(g, r, from))),
        1 => n(from, to, Rule::Implication),
        2 | 3 => {
            let mid = goal(g, r).0;
            let first = node(g, r, from, &mid, depth - 1);
            let second = node(g, r, &mid, to, depth - 1);
            n(from, to, Rule::Transitivity { mid, first: Box::new(first), second: Box::new(second) })
        }
        4 => {
            let c = pr(g);
            let cases = [c.clone(), Expr::not(c)]
                .into_iter()
                .map(|c| {
                    let sub = node(g, r, &Expr::and(from.clone(), c.clone()), to, depth - 1);
                    (c, sub)
                })
                .collect();
            n(from, to, Rule::Disjunction(cases))
        }
        5 => {
            let d = pr(g);
            let first = node(g, r, from, &Expr::or(to.clone(), d.clone()), depth - 1);
            let second = node(g, r, &d, to, depth - 1);
            n(from, to, Rule::Cancellation { d, first: Box::new(first), second: Box::new(second) })
        }
        6 => {
            let (rr, d) = (pr(g), pr(g));
            let sub_to = pr(g);
            let sub = node(g, r, from, &sub_to, depth - 1);
            n(from, to, Rule::Psp { r: rr, d, sub: Box::new(sub) })
        }
        7 => n(from, to, Rule::Impossibility(Box::new(node(g, r, from, &FALSE, depth - 1)))),
        8 => {
            let subs = (0..2)
                .map(|_| {
                    let (a, b) = (pr(g), pr(g));
                    node(g, r, &a, &b, depth - 1)
                })
                .collect();
            n(from, to, Rule::DisjunctionTheorem(subs))
        }
        9 if r.vars.iter().any(|(v, k)| v == "n" && *k == super::Kind::Int) => {
            let m = Expr::var("m");
            let nv = Expr::var("n");
            let t_from = Expr::and(from.clone(), Expr::eq(nv.clone(), m.clone()));
            let t_to = Expr::or(Expr::and(from.clone(), Expr::bin(BinOp::Lt, nv.clone(), m)), to.clone());
            let template = node(g, r, &t_from, &t_to, 0);
            n(from, to, Rule::Induction { measure: nv, param: "m".into(), lo: 0, hi: 3, template: Box::new(template) })
        }
        _ => {
            let d = pr(g);
            let cases = (0..2)
                .map(|_| {
                    let (p, q) = (pr(g), pr(g));
                    let sub = node(g, r, &p, &Expr::or(q.clone(), d.clone()), depth - 1);
                    (q, sub)
                })
                .collect();
            n(from, to, Rule::Completion { d, cases })
        }
    }
}

impl Gen {
    pub fn data_pred_expr(&mut self, vars: &[(String, super::Kind)]) -> Expr {
        super::e(&self.data_pred(vars, 1))
    }
}

/// Counts of checker-discharged claims by kind and of those the oracle refutes.
#[derive(Default, Debug, Clone)]
pub struct Tally {
    pub discharged: [usize; 5],
    pub violations: Vec<String>,
}

pub const KINDS: [&str; 5] = ["annotation", "unless", "leadsto", "invariant", "postcondition"];

impl Tally {
    pub fn add(&mut self, other: &Tally) {
        for k in 0..5 {
            self.discharged[k] += other.discharged[k];
        }
        self.violations.extend(other.violations.iter().cloned());
    }

    pub fn summary(&self) -> String {
        KINDS.iter().zip(self.discharged).map(|(k, n)| format!("{k} {n}")).collect::<Vec<_>>().join(", ")
    }
}

/// Every claim the checker discharges on `model` must be true in `ts`.
pub fn compare(model: &Model, ts: &TransitionSystem, tag: &str) -> Tally {
    let mut t = Tally::default();
    let run = check_program(model, None, VAL_CAP).unwrap();
    let u = &model.universe;
    if run.safety.annotation_verified() && !run.safety.obligations.is_empty() {
        t.discharged[0] += 1;
        if !ts.check_assertions(model).unwrap().is_empty() {
            t.violations.push(format!("{tag}: annotation"));
        }
    }
    for p in &run.properties {
        if !p.discharged() || matches!(p.outcome, PropertyOutcome::OracleOnly) {
            continue;
        }
        let kind = &model.program.property(&p.name).unwrap().kind;
        let (slot, holds) = match kind {
            PropertyKind::Unless(a, b) => (1, ts.check_unless(u, a, b).unwrap().is_none()),
            PropertyKind::LeadsTo(a, b) => (2, ts.check_leadsto(u, a, b).unwrap().holds),
            PropertyKind::Invariant(i) => (3, ts.check_invariant(u, i).unwrap().is_none()),
            PropertyKind::Postcondition(q) => (4, ts.check_postcondition(u, q).unwrap().is_none()),
            PropertyKind::DeadlockFree => continue,
        };
        t.discharged[slot] += 1;
        if !holds {
            t.violations.push(format!("{tag}: {} {}", p.kind, p.name));
        }
    }
    t
}

/// One randomized program with decorations, checked and compared.
pub fn random_case(seed: u64) -> (Tally, String) {
    let mut g = Gen::new(seed);
    let r = g.program(5, true);
    let model = decorate(&mut g, &r);
    let ts = build_state_space(&model, STATE_CAP).unwrap();
    let text = ogp_core::frontend::print_program(&model.program)
        + &model.program.proofs.iter().map(ogp_core::frontend::print_proof).collect::<String>();
    (compare(&model, &ts, &format!("seed {seed}")), text)
}
