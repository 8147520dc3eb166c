//! Shared helpers for the integration tests: corpus access, seeded random
//! programs and predicates, and a direct big-step interpreter used as an
//! independent reference for the predicate transformers.
#![allow(dead_code)]

pub mod decorate;
pub mod rules;

use std::path::{Path, PathBuf};

use ogp_core::expr::Expr;
use ogp_core::frontend::{load, parse, parse_expr};
use ogp_core::lang::{Block, Program, StmtKind};
use ogp_core::model::Model;
use ogp_core::oracle::{build_state_space, TransitionSystem};
use ogp_core::predicate::{evaluate, Universe, Valuation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STATE_CAP: usize = 200_000;
pub const VAL_CAP: u64 = 1 << 22;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus(name: &str) -> Model {
    Model::new(&load(&corpus_dir().join(name)).unwrap()).unwrap()
}

/// Every corpus program, by file name.
pub fn corpus_all() -> Vec<(String, Program)> {
    let mut names: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ogp"))
        .collect();
    names.sort();
    names.into_iter().map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), load(&p).unwrap())).collect()
}

pub fn e(s: &str) -> Expr {
    parse_expr(s).unwrap_or_else(|err| panic!("{s}: {err}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Bool,
    /// Two bits: `0..3`.
    Int,
}

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn vars(&mut self) -> Vec<(String, Kind)> {
        let n = self.rng.gen_range(2..=3);
        ["a", "b", "n"][..n]
            .iter()
            .map(|v| (v.to_string(), if *v == "n" || self.chance(0.3) { Kind::Int } else { Kind::Bool }))
            .collect()
    }

    fn pick<'a>(&mut self, vars: &'a [(String, Kind)], kind: Kind) -> Option<&'a str> {
        let matching: Vec<_> = vars.iter().filter(|(_, k)| *k == kind).map(|(n, _)| n.as_str()).collect();
        matching.choose(&mut self.rng).copied()
    }

    pub fn int_expr(&mut self, vars: &[(String, Kind)]) -> String {
        let v = self.pick(vars, Kind::Int);
        match (self.rng.gen_range(0..3), v) {
            (1, Some(v)) => v.to_string(),
            (2, Some(v)) => format!("3 - {v}"),
            _ => self.rng.gen_range(0..=3).to_string(),
        }
    }

    fn data_atom(&mut self, vars: &[(String, Kind)]) -> String {
        let (name, kind) = vars.choose(&mut self.rng).unwrap().clone();
        match kind {
            Kind::Bool => {
                if self.chance(0.5) {
                    name
                } else {
                    format!("!{name}")
                }
            }
            Kind::Int => {
                let op = ["==", "!=", "<", "<="].choose(&mut self.rng).unwrap();
                format!("{name} {op} {}", self.rng.gen_range(0..=3))
            }
        }
    }

    /// A predicate over the data variables only.
    pub fn data_pred(&mut self, vars: &[(String, Kind)], depth: u32) -> String {
        if depth == 0 || self.chance(0.4) {
            return self.data_atom(vars);
        }
        let op = if self.chance(0.5) { "&&" } else { "||" };
        format!("({} {op} {})", self.data_pred(vars, depth - 1), self.data_pred(vars, depth - 1))
    }

    pub fn rhs(&mut self, vars: &[(String, Kind)], kind: Kind) -> String {
        match kind {
            Kind::Int => self.int_expr(vars),
            Kind::Bool => match self.rng.gen_range(0..4) {
                0 => "true".into(),
                1 => "false".into(),
                _ => self.data_pred(vars, 1),
            },
        }
    }

    pub fn assign(&mut self, vars: &[(String, Kind)]) -> String {
        let mut targets: Vec<_> = vars.to_vec();
        targets.shuffle(&mut self.rng);
        let k = if vars.len() > 1 && self.chance(0.25) { 2 } else { 1 };
        let lhs: Vec<_> = targets[..k].iter().map(|(n, _)| n.clone()).collect();
        let rhs: Vec<_> = targets[..k].iter().map(|(_, kind)| self.rhs(vars, *kind)).collect();
        format!("{} := {}", lhs.join(", "), rhs.join(", "))
    }

    fn simple(&mut self, vars: &[(String, Kind)]) -> String {
        if self.chance(0.2) {
            "skip".into()
        } else {
            self.assign(vars)
        }
    }

    /// A loop-free statement list for an atomic body.
    pub fn atomic_body(&mut self, vars: &[(String, Kind)]) -> String {
        match self.rng.gen_range(0..4) {
            0 => format!("if {} -> {} fi", self.data_pred(vars, 1), self.simple(vars)),
            1 => format!(
                "if {} -> {} [] {} -> {} fi",
                self.data_pred(vars, 1),
                self.simple(vars),
                self.data_pred(vars, 1),
                self.simple(vars)
            ),
            2 => format!("{}; {}", self.assign(vars), self.assign(vars)),
            _ => format!("{}; if {} -> skip fi", self.assign(vars), self.data_pred(vars, 1)),
        }
    }

    /// One statement using at most `budget` atomic actions.
    pub fn stmt(&mut self, vars: &[(String, Kind)], budget: &mut usize, nested: bool, allow_do: bool) -> String {
        let roll = self.rng.gen_range(0..10);
        if *budget >= 2 && !nested && roll >= 8 {
            *budget -= 1;
            let guard = self.data_pred(vars, 1);
            let body = self.stmt(vars, budget, true, allow_do);
            if roll == 9 && allow_do {
                return format!("do {guard} -> {body} od");
            }
            let other = self.data_pred(vars, 1);
            return format!("if {guard} -> {body} [] {other} -> skip fi");
        }
        *budget -= 1;
        match roll {
            0..=3 => self.assign(vars),
            4 => "skip".into(),
            _ => format!("atomic {} end", self.atomic_body(vars)),
        }
    }

    /// Program text with at most `max_actions` atomic actions over at most
    /// three components, boolean and two-bit variables.
    pub fn program_text(&mut self, max_actions: usize, allow_do: bool) -> (String, Vec<(String, Kind)>) {
        let vars = self.vars();
        let ncomp = self.rng.gen_range(1..=3usize).min(max_actions);
        let mut text = String::from("program random\n");
        for (n, k) in &vars {
            match k {
                Kind::Bool => text.push_str(&format!("var {n} : bool\n")),
                Kind::Int => text.push_str(&format!("var {n} : int 0..3\n")),
            }
        }
        if self.chance(0.5) {
            text.push_str(&format!("pre {}\n", self.data_pred(&vars, 1)));
        }
        let mut left = max_actions;
        for (i, name) in ["A", "B", "C"][..ncomp].iter().enumerate() {
            let share = if i + 1 == ncomp { left } else { self.rng.gen_range(1..=(left - (ncomp - i - 1))) };
            left -= share;
            let mut budget = share;
            let mut stmts = Vec::new();
            while budget > 0 && (stmts.is_empty() || self.chance(0.7)) {
                stmts.push(self.stmt(&vars, &mut budget, false, allow_do));
            }
            text.push_str(&format!("component {name}\n  {}\nend\n", stmts.join(";\n  ")));
        }
        (text, vars)
    }

    /// A random program with at least one initial state.
    pub fn program(&mut self, max_actions: usize, allow_do: bool) -> Random {
        loop {
            let (text, vars) = self.program_text(max_actions, allow_do);
            let program = parse(&text).unwrap_or_else(|err| panic!("{err}\n{text}"));
            let model = Model::new(&program).unwrap();
            let ts = build_state_space(&model, STATE_CAP).unwrap_or_else(|err| panic!("{err}\n{text}"));
            if !ts.initial.is_empty() {
                return Random { text, vars, model, ts };
            }
        }
    }

    fn pc_atom(&mut self, model: &Model) -> String {
        let c = model.program.components.choose(&mut self.rng).unwrap();
        let l = c.labels().choose(&mut self.rng).unwrap().clone();
        let op = if self.chance(0.75) { "==" } else { "!=" };
        format!("pc.{} {op} {l}", c.name)
    }

    /// A predicate over data variables and program counters.
    pub fn pred(&mut self, model: &Model, vars: &[(String, Kind)], depth: u32) -> Expr {
        e(&self.pred_text(model, vars, depth))
    }

    pub fn pred_text(&mut self, model: &Model, vars: &[(String, Kind)], depth: u32) -> String {
        if depth == 0 || self.chance(0.35) {
            return match self.rng.gen_range(0..10) {
                0 => "true".into(),
                1 => "false".into(),
                2..=5 => self.pc_atom(model),
                _ => self.data_atom(vars),
            };
        }
        let op = if self.chance(0.5) { "&&" } else { "||" };
        format!("({} {op} {})", self.pred_text(model, vars, depth - 1), self.pred_text(model, vars, depth - 1))
    }
}

pub struct Random {
    pub text: String,
    pub vars: Vec<(String, Kind)>,
    pub model: Model,
    pub ts: TransitionSystem,
}

/// Final data states of the big-step run of a loop-free statement list;
/// runs that block contribute nothing.
pub fn big_step(universe: &Universe, b: &Block, start: Valuation) -> Vec<Valuation> {
    let mut current = vec![start];
    for s in &b.stmts {
        let mut next = Vec::new();
        for v in current {
            match &s.kind {
                StmtKind::Skip => next.push(v),
                StmtKind::Assign(pairs) => {
                    let mut out = v.clone();
                    for (x, rhs) in pairs {
                        let value = universe.compile(rhs).unwrap().eval(&v.0).unwrap();
                        out.0[universe.slot(x).unwrap()] = value;
                    }
                    next.push(out);
                }
                StmtKind::Atomic(inner) => next.extend(big_step(universe, inner, v)),
                StmtKind::If(bs) => {
                    for br in bs {
                        if evaluate(universe, &br.guard, &v).unwrap() {
                            next.extend(big_step(universe, &br.body, v.clone()));
                        }
                    }
                }
                StmtKind::Do(_) => panic!("loop in a loop-free statement"),
            }
        }
        current = next;
    }
    current
}

/// Whether every run of `b` from `start` terminates without blocking.
pub fn never_blocks(universe: &Universe, b: &Block, start: &Valuation) -> bool {
    let mut current = vec![start.clone()];
    for s in &b.stmts {
        let mut next = Vec::new();
        for v in current {
            match &s.kind {
                StmtKind::If(bs) => {
                    let live: Vec<_> = bs.iter().filter(|br| evaluate(universe, &br.guard, &v).unwrap()).collect();
                    if live.is_empty() {
                        return false;
                    }
                    for br in live {
                        if !never_blocks(universe, &br.body, &v) {
                            return false;
                        }
                        next.extend(big_step(universe, &br.body, v.clone()));
                    }
                }
                StmtKind::Atomic(inner) => {
                    if !never_blocks(universe, inner, &v) {
                        return false;
                    }
                    next.extend(big_step(universe, inner, v));
                }
                _ => next.extend(big_step(universe, &Block::new(vec![s.clone()]), v)),
            }
        }
        current = next;
    }
    true
}

/// Every valuation of the universe, in odometer order.
pub fn all_valuations(universe: &Universe) -> Vec<Valuation> {
    let domains: Vec<Vec<i64>> = universe.vars().iter().map(|v| v.domain.values()).collect();
    let mut out = vec![Vec::new()];
    for d in &domains {
        out = out.into_iter().flat_map(|prefix: Vec<i64>| d.iter().map(move |x| [prefix.clone(), vec![*x]].concat())).collect();
    }
    out.into_iter().map(Valuation).collect()
}

/// Verdict of `check` line printed by the acceptance suite.
pub fn report(id: usize, title: &str, ok: bool, detail: &str) {
    println!("criterion {id} [{}] {title}: {detail}", if ok { "PASS" } else { "FAIL" });
}

pub fn pick_seed_count(default: usize) -> usize {
    std::env::var("OGP_RANDOM_CASES").ok().and_then(|s| s.parse().ok()).unwrap_or(default)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.gen_range(0..n)
}
