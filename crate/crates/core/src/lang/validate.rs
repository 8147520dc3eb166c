use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::expr::Expr;
use crate::predicate::{Type, Universe};

use super::ast::{Block, Component, Program, PropertyKind, Rule, ProofNode, Scope, Span, StmtKind, VarDecl, VarType};
use super::label::auto_label;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagKind {
    Declaration,
    Scope,
    Distinctness,
    AtomicBody,
    Label,
    Resolution,
    Type,
    Counter,
    Auxiliary,
    Proof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

struct Checker<'a> {
    program: &'a Program,
    universe: Universe,
    decls: HashMap<&'a str, &'a VarDecl>,
    out: Vec<Diagnostic>,
}

/// Well-formedness diagnostics; empty iff the program is well formed.
pub fn validate_wellformed(program: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut decls: HashMap<&str, &VarDecl> = HashMap::new();
    for d in &program.decls {
        if decls.insert(d.name.as_str(), d).is_some() {
            out.push(diag(DiagKind::Declaration, d.span, format!("variable `{}` declared twice", d.name)));
        }
        if let VarType::Int { lo, hi } = d.ty {
            if lo > hi {
                out.push(diag(DiagKind::Declaration, d.span, format!("empty range {lo}..{hi} for `{}`", d.name)));
            }
        }
        if let Scope::Local(o) | Scope::Private(o) = &d.scope {
            if program.component(o).is_none() {
                out.push(diag(DiagKind::Declaration, d.span, format!("owner `{o}` of `{}` is not a component", d.name)));
            }
        }
    }
    let mut names = BTreeSet::new();
    for c in &program.components {
        if !names.insert(&c.name) {
            out.push(diag(DiagKind::Declaration, c.span, format!("component `{}` declared twice", c.name)));
        }
    }
    let labelled = match auto_label(program) {
        Ok(p) => p,
        Err(e) => {
            out.push(diag(DiagKind::Label, Span::default(), e.to_string()));
            return out;
        }
    };
    let mut ck = Checker { program, universe: crate::model::build_universe(&labelled), decls, out };
    ck.predicate(&program.pre, Span::default(), "precondition");
    for inv in &program.invariants {
        ck.predicate(&inv.pred, inv.span, &format!("invariant `{}`", inv.name));
    }
    for c in &program.components {
        ck.block(&c.body, c, false);
    }
    ck.properties();
    ck.out
}

fn diag(kind: DiagKind, span: Span, message: String) -> Diagnostic {
    Diagnostic { kind, span, message }
}

impl Checker<'_> {
    fn push(&mut self, kind: DiagKind, span: Span, message: String) {
        self.out.push(diag(kind, span, message));
    }

    fn typed(&mut self, e: &Expr, span: Span, what: &str) -> Option<Type> {
        self.shadowing(e, span);
        match self.universe.type_of(e) {
            Ok(t) => Some(t),
            Err(err) => {
                let kind = match err {
                    crate::predicate::PredError::UnknownVar(_) | crate::predicate::PredError::UnknownLabel(_) => {
                        DiagKind::Resolution
                    }
                    _ => DiagKind::Type,
                };
                self.push(kind, span, format!("{what}: {err}"));
                None
            }
        }
    }

    fn predicate(&mut self, e: &Expr, span: Span, what: &str) {
        if let Some(t) = self.typed(e, span, what) {
            if t != Type::Bool {
                self.push(DiagKind::Type, span, format!("{what} `{e}` is not boolean"));
            }
        }
    }

    fn shadowing(&mut self, e: &Expr, span: Span) {
        let mut hits = Vec::new();
        e.visit(&mut |sub| {
            if let Expr::Quant(_, v, _, _, _) = sub {
                if self.decls.contains_key(v.as_str()) || v.starts_with("pc.") {
                    hits.push(v.clone());
                }
            }
        });
        for v in hits {
            self.push(DiagKind::Declaration, span, format!("quantified `{v}` shadows a program variable"));
        }
    }

    /// Checks a guard or right-hand side evaluated by component `comp`.
    fn code_expr(&mut self, e: &Expr, span: Span, comp: &Component, guard: bool, target_aux: bool) {
        for v in e.free_vars() {
            if v.starts_with("pc.") {
                self.push(DiagKind::Counter, span, format!("program counter `{v}` used in code"));
                continue;
            }
            let Some(d) = self.decls.get(v.as_str()).copied() else { continue };
            if let Scope::Local(o) = &d.scope {
                if o != &comp.name {
                    self.push(DiagKind::Scope, span, format!("`{v}` is local to {o} but read by {}", comp.name));
                }
            }
            if d.aux && (guard || !target_aux) {
                let place = if guard { "a guard" } else { "an ordinary assignment" };
                self.push(DiagKind::Auxiliary, span, format!("auxiliary `{v}` flows into {place}"));
            }
        }
    }

    fn block(&mut self, b: &Block, comp: &Component, in_atomic: bool) {
        for e in &b.post {
            self.predicate(e, Span::default(), "assertion");
        }
        for s in &b.stmts {
            if in_atomic && !s.assertions.is_empty() {
                self.push(DiagKind::AtomicBody, s.span, "assertion inside an atomic body".into());
            }
            for a in &s.assertions {
                self.predicate(a, s.span, "assertion");
            }
            match &s.kind {
                StmtKind::Skip => {}
                StmtKind::Assign(pairs) => self.assign(pairs, s.span, comp),
                StmtKind::Atomic(body) => {
                    if in_atomic {
                        self.push(DiagKind::AtomicBody, s.span, "nested atomic statement".into());
                    }
                    self.block(body, comp, true);
                }
                StmtKind::If(bs) | StmtKind::Do(bs) => {
                    if in_atomic && matches!(s.kind, StmtKind::Do(_)) {
                        self.push(DiagKind::AtomicBody, s.span, "loop inside an atomic body".into());
                    }
                    for br in bs {
                        self.predicate(&br.guard, s.span, "guard");
                        self.code_expr(&br.guard, s.span, comp, true, false);
                        if br.body.stmts.is_empty() {
                            self.push(DiagKind::Declaration, s.span, "empty branch body".into());
                        }
                        self.block(&br.body, comp, in_atomic);
                    }
                }
            }
        }
    }

    fn assign(&mut self, pairs: &[(String, Expr)], span: Span, comp: &Component) {
        let mut seen = BTreeSet::new();
        for (x, e) in pairs {
            if !seen.insert(x) {
                self.push(DiagKind::Distinctness, span, format!("`{x}` assigned twice in one multiple assignment"));
            }
            if x.starts_with("pc.") {
                self.push(DiagKind::Counter, span, format!("program counter `{x}` assigned in code"));
                continue;
            }
            let Some(d) = self.decls.get(x.as_str()).copied() else {
                self.push(DiagKind::Resolution, span, format!("unknown variable `{x}`"));
                continue;
            };
            if let Scope::Local(o) | Scope::Private(o) = &d.scope {
                if o != &comp.name {
                    self.push(DiagKind::Scope, span, format!("`{x}` belongs to {o} but is written by {}", comp.name));
                }
            }
            let want = match d.ty {
                VarType::Bool => Type::Bool,
                VarType::Int { .. } => Type::Int,
            };
            if let Some(t) = self.typed(e, span, &format!("right-hand side for `{x}`")) {
                if t != want {
                    self.push(DiagKind::Type, span, format!("`{x}` is {want:?} but `{e}` is {t:?}"));
                }
            }
            self.code_expr(e, span, comp, false, d.aux);
        }
    }

    fn properties(&mut self) {
        let program = self.program;
        let mut names = BTreeSet::new();
        for p in &program.properties {
            if !names.insert(&p.name) {
                self.push(DiagKind::Declaration, p.span, format!("property `{}` declared twice", p.name));
            }
            match &p.kind {
                PropertyKind::Unless(a, b) | PropertyKind::LeadsTo(a, b) => {
                    self.predicate(a, p.span, "property");
                    self.predicate(b, p.span, "property");
                }
                PropertyKind::Postcondition(a) | PropertyKind::Invariant(a) => self.predicate(a, p.span, "property"),
                PropertyKind::DeadlockFree => {}
            }
        }
        for script in &program.proofs {
            match program.property(&script.property).map(|p| &p.kind) {
                Some(PropertyKind::LeadsTo(..)) => {}
                Some(_) => self.push(DiagKind::Proof, script.span, format!("`{}` is not a leads-to property", script.property)),
                None => self.push(DiagKind::Proof, script.span, format!("proof for unknown property `{}`", script.property)),
            }
            self.proof_node(&script.root, &mut Vec::new());
        }
    }

    fn proof_node(&mut self, n: &ProofNode, params: &mut Vec<String>) {
        let check = |ck: &mut Self, e: &Expr, params: &[String]| {
            let bound = params.iter().map(|p| (p.clone(), Expr::Int(0))).collect::<Vec<_>>();
            ck.predicate(&e.subst(&bound), n.span, "proof predicate");
        };
        check(self, &n.from, params);
        check(self, &n.to, params);
        match &n.rule {
            Rule::Immediate(l) => {
                if self.program.resolve_label(l).is_none() && !self.is_auto_label(l) {
                    self.push(DiagKind::Proof, n.span, format!("unknown action label `{l}`"));
                }
            }
            Rule::Implication => {}
            Rule::Transitivity { mid, first, second } => {
                check(self, mid, params);
                self.proof_node(first, params);
                self.proof_node(second, params);
            }
            Rule::Disjunction(cases) => {
                for (c, sub) in cases {
                    check(self, c, params);
                    self.proof_node(sub, params);
                }
            }
            Rule::DisjunctionRange { param, template, .. } | Rule::Induction { param, template, .. } => {
                if let Rule::Induction { measure, .. } = &n.rule {
                    let bound = params.iter().map(|p| (p.clone(), Expr::Int(0))).collect::<Vec<_>>();
                    if let Some(t) = self.typed(&measure.subst(&bound), n.span, "measure") {
                        if t != Type::Int {
                            self.push(DiagKind::Type, n.span, "induction measure must be an integer".into());
                        }
                    }
                }
                params.push(param.clone());
                self.proof_node(template, params);
                params.pop();
            }
            Rule::Impossibility(sub) => self.proof_node(sub, params),
            Rule::DisjunctionTheorem(subs) => subs.iter().for_each(|s| self.proof_node(s, params)),
            Rule::Cancellation { d, first, second } => {
                check(self, d, params);
                self.proof_node(first, params);
                self.proof_node(second, params);
            }
            Rule::Psp { r, d, sub } => {
                check(self, r, params);
                check(self, d, params);
                self.proof_node(sub, params);
            }
            Rule::Completion { d, cases } => {
                check(self, d, params);
                for (q, sub) in cases {
                    check(self, q, params);
                    self.proof_node(sub, params);
                }
            }
        }
    }

    fn is_auto_label(&self, l: &str) -> bool {
        self.universe.label_code(l).is_some()
    }
}
