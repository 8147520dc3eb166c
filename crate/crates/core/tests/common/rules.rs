//! Semantic instances of the seven derived progress rules: premisses and
//! conclusion are all decided by the oracle on one random program.

use ogp_core::expr::{Expr, FALSE};
use ogp_core::model::Model;
use ogp_core::oracle::TransitionSystem;

use super::{e, Gen, Kind, Random};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivedRule {
    Implication,
    Impossibility,
    DisjunctionTheorem,
    Cancellation,
    Psp,
    Induction,
    Completion,
}

pub const ALL: [DerivedRule; 7] = [
    DerivedRule::Implication,
    DerivedRule::Impossibility,
    DerivedRule::DisjunctionTheorem,
    DerivedRule::Cancellation,
    DerivedRule::Psp,
    DerivedRule::Induction,
    DerivedRule::Completion,
];

pub struct Instance {
    pub premises: bool,
    pub conclusion: bool,
    pub program: String,
    pub statement: String,
}

impl Instance {
    /// Premisses confirmed but conclusion refuted.
    pub fn violated(&self) -> bool {
        self.premises && !self.conclusion
    }
}

pub struct Sem<'a> {
    pub model: &'a Model,
    pub ts: &'a TransitionSystem,
}

impl Sem<'_> {
    pub fn leadsto(&self, p: &Expr, q: &Expr) -> bool {
        self.ts.check_leadsto(&self.model.universe, p, q).unwrap().holds
    }

    pub fn unless(&self, p: &Expr, q: &Expr) -> bool {
        self.ts.check_unless(&self.model.universe, p, q).unwrap().is_none()
    }

    /// Holds in every reachable state.
    pub fn always(&self, p: &Expr) -> bool {
        self.ts.check_invariant(&self.model.universe, p).unwrap().is_none()
    }
}

fn or(a: &Expr, b: &Expr) -> Expr {
    Expr::or(a.clone(), b.clone())
}

fn and(a: &Expr, b: &Expr) -> Expr {
    Expr::and(a.clone(), b.clone())
}

/// One instance of `rule` drawn from `seed`.
pub fn instance(rule: DerivedRule, seed: u64) -> Instance {
    let mut g = Gen::new(seed);
    let r: Random = loop {
        let r = g.program(5, true);
        if rule != DerivedRule::Induction || r.vars.iter().any(|(n, k)| n == "n" && *k == Kind::Int) {
            break r;
        }
    };
    let sem = Sem { model: &r.model, ts: &r.ts };
    let pred = |g: &mut Gen| g.pred(&r.model, &r.vars, 2);
    let (premises, conclusion, statement) = match rule {
        DerivedRule::Implication => {
            let p = pred(&mut g);
            let q = if g.chance(0.5) { or(&p, &pred(&mut g)) } else { pred(&mut g) };
            (sem.always(&Expr::implies(p.clone(), q.clone())), sem.leadsto(&p, &q), format!("{p} ==> {q}"))
        }
        DerivedRule::Impossibility => {
            let p = pred(&mut g);
            (sem.leadsto(&p, &FALSE), sem.always(&Expr::not(p.clone())), format!("{p} leadsto false"))
        }
        DerivedRule::DisjunctionTheorem => {
            let k = g.rng_range(2, 3);
            let pairs: Vec<(Expr, Expr)> = (0..k).map(|_| (pred(&mut g), pred(&mut g))).collect();
            let prem = pairs.iter().all(|(p, q)| sem.leadsto(p, q));
            let ps = Expr::disj(pairs.iter().map(|(p, _)| p.clone()));
            let qs = Expr::disj(pairs.iter().map(|(_, q)| q.clone()));
            (prem, sem.leadsto(&ps, &qs), format!("{ps} leadsto {qs}"))
        }
        DerivedRule::Cancellation => {
            let (p, q, d, rr) = (pred(&mut g), pred(&mut g), pred(&mut g), pred(&mut g));
            let prem = sem.leadsto(&p, &or(&q, &d)) && sem.leadsto(&d, &rr);
            (prem, sem.leadsto(&p, &or(&q, &rr)), format!("{p} leadsto {q} || {rr} via {d}"))
        }
        DerivedRule::Psp => {
            let (p, q, rr, d) = (pred(&mut g), pred(&mut g), pred(&mut g), pred(&mut g));
            let prem = sem.leadsto(&p, &q) && sem.unless(&rr, &d);
            let concl = sem.leadsto(&and(&p, &rr), &or(&and(&q, &rr), &d));
            (prem, concl, format!("{p} leadsto {q}, {rr} unless {d}"))
        }
        DerivedRule::Induction => {
            let (p, q) = (pred(&mut g), pred(&mut g));
            let n = e("n");
            let prem = (0..=3).all(|m| {
                let here = and(&p, &Expr::eq(n.clone(), Expr::Int(m)));
                let lower = and(&p, &Expr::bin(ogp_core::expr::BinOp::Lt, n.clone(), Expr::Int(m)));
                sem.leadsto(&here, &or(&lower, &q))
            });
            (prem, sem.leadsto(&p, &q), format!("{p} leadsto {q} by induction on n"))
        }
        DerivedRule::Completion => {
            let d = pred(&mut g);
            let cases: Vec<(Expr, Expr)> = (0..2).map(|_| (pred(&mut g), pred(&mut g))).collect();
            let prem = cases.iter().all(|(p, q)| sem.leadsto(p, &or(q, &d)) && sem.unless(q, &d));
            let ps = Expr::conj(cases.iter().map(|(p, _)| p.clone()));
            let qs = Expr::conj(cases.iter().map(|(_, q)| q.clone()));
            (prem, sem.leadsto(&ps, &or(&qs, &d)), format!("{ps} leadsto {qs} || {d}"))
        }
    };
    Instance { premises, conclusion, program: r.text.clone(), statement }
}

impl Gen {
    pub fn rng_range(&mut self, lo: usize, hi: usize) -> usize {
        use rand::Rng;
        self.rng.gen_range(lo..=hi)
    }
}
