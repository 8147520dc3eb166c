use std::fmt;

use crate::expr::{label_name, pc_var, Expr};

/// Source position. Positions never take part in AST equality, so a program
/// and its reprint compare equal.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarType {
    Bool,
    Int { lo: i64, hi: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scope {
    Shared,
    /// Neither read nor written by other components.
    Local(String),
    /// Read but not written by other components.
    Private(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: VarType,
    pub scope: Scope,
    /// User auxiliary variable: may not occur in guards or flow into ordinary variables.
    pub aux: bool,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    /// Assertions at the end of the block, i.e. at its final label.
    pub post: Vec<Expr>,
}

impl Block {
    pub fn new(stmts: Vec<Stmt>) -> Self {
        Block { stmts, post: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    /// Local label id (`2` in `X.2`); `None` until labelled.
    pub label: Option<String>,
    /// Assertions at the statement's initial label.
    pub assertions: Vec<Expr>,
    pub kind: StmtKind,
    pub span: Span,
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt { label: None, assertions: Vec::new(), kind, span: Span::default() }
    }

    pub fn labelled(label: &str, kind: StmtKind) -> Self {
        Stmt { label: Some(label.to_string()), ..Stmt::new(kind) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub guard: Expr,
    pub body: Block,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Skip,
    Assign(Vec<(String, Expr)>),
    Atomic(Block),
    If(Vec<Branch>),
    Do(Vec<Branch>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub body: Block,
    pub final_label: Option<String>,
    pub span: Span,
}

impl Component {
    pub fn pc(&self) -> String {
        pc_var(&self.name)
    }

    pub fn full_label(&self, id: &str) -> String {
        label_name(&self.name, id)
    }

    /// Full name of the component's initial label (its final label if empty).
    pub fn initial_label(&self) -> Option<String> {
        match self.body.stmts.first() {
            Some(s) => s.label.as_ref().map(|l| self.full_label(l)),
            None => self.final_label.as_ref().map(|l| self.full_label(l)),
        }
    }

    pub fn final_full_label(&self) -> Option<String> {
        self.final_label.as_ref().map(|l| self.full_label(l))
    }

    /// All labels of the component (full names) in textual order, final last.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn walk(b: &Block, comp: &Component, out: &mut Vec<String>) {
            for s in &b.stmts {
                if let Some(l) = &s.label {
                    out.push(comp.full_label(l));
                }
                match &s.kind {
                    StmtKind::If(bs) | StmtKind::Do(bs) => {
                        for br in bs {
                            walk(&br.body, comp, out);
                        }
                    }
                    _ => {}
                }
            }
        }
        walk(&self.body, self, &mut out);
        if let Some(f) = &self.final_label {
            out.push(self.full_label(f));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedPredicate {
    pub name: String,
    pub pred: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropertyKind {
    Unless(Expr, Expr),
    LeadsTo(Expr, Expr),
    Postcondition(Expr),
    Invariant(Expr),
    DeadlockFree,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Property {
    pub name: String,
    pub kind: PropertyKind,
    pub span: Span,
}

/// A leads-to proof: every node states the goal `antecedent ⇝ consequent` it establishes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofNode {
    pub from: Expr,
    pub to: Expr,
    pub rule: Rule,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Immediate progress by the action at the given full label.
    Immediate(String),
    Implication,
    Transitivity { mid: Expr, first: Box<ProofNode>, second: Box<ProofNode> },
    /// Disjunction over an explicit case list.
    Disjunction(Vec<(Expr, ProofNode)>),
    /// Disjunction over the integer parameter `param ∈ lo..hi`.
    DisjunctionRange { param: String, lo: i64, hi: i64, template: Box<ProofNode> },
    Impossibility(Box<ProofNode>),
    DisjunctionTheorem(Vec<ProofNode>),
    Cancellation { d: Expr, first: Box<ProofNode>, second: Box<ProofNode> },
    Psp { r: Expr, d: Expr, sub: Box<ProofNode> },
    Induction { measure: Expr, param: String, lo: i64, hi: i64, template: Box<ProofNode> },
    /// Each case carries its `Qᵢ` and a proof of `Pᵢ ⇝ Qᵢ ∨ D`.
    Completion { d: Expr, cases: Vec<(Expr, ProofNode)> },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Immediate(_) => "immediate",
            Rule::Implication => "implication",
            Rule::Transitivity { .. } => "transitivity",
            Rule::Disjunction(_) | Rule::DisjunctionRange { .. } => "disjunction",
            Rule::Impossibility(_) => "impossibility",
            Rule::DisjunctionTheorem(_) => "disjunction_theorem",
            Rule::Cancellation { .. } => "cancellation",
            Rule::Psp { .. } => "psp",
            Rule::Induction { .. } => "induction",
            Rule::Completion { .. } => "completion",
        }
    }
}

impl ProofNode {
    /// Replaces the free parameter `param` by the literal `value` throughout.
    pub fn instantiate(&self, param: &str, value: i64) -> ProofNode {
        let s = |e: &Expr| e.subst1(param, Expr::Int(value));
        let b = |n: &ProofNode| Box::new(n.instantiate(param, value));
        let rule = match &self.rule {
            Rule::Immediate(l) => Rule::Immediate(l.clone()),
            Rule::Implication => Rule::Implication,
            Rule::Transitivity { mid, first, second } => {
                Rule::Transitivity { mid: s(mid), first: b(first), second: b(second) }
            }
            Rule::Disjunction(cases) => Rule::Disjunction(
                cases.iter().map(|(p, n)| (s(p), n.instantiate(param, value))).collect(),
            ),
            Rule::DisjunctionRange { param: p, lo, hi, template } if p != param => {
                Rule::DisjunctionRange { param: p.clone(), lo: *lo, hi: *hi, template: b(template) }
            }
            Rule::Induction { measure, param: p, lo, hi, template } if p != param => Rule::Induction {
                measure: s(measure),
                param: p.clone(),
                lo: *lo,
                hi: *hi,
                template: b(template),
            },
            r @ (Rule::DisjunctionRange { .. } | Rule::Induction { .. }) => r.clone(),
            Rule::Impossibility(n) => Rule::Impossibility(b(n)),
            Rule::DisjunctionTheorem(ns) => {
                Rule::DisjunctionTheorem(ns.iter().map(|n| n.instantiate(param, value)).collect())
            }
            Rule::Cancellation { d, first, second } => {
                Rule::Cancellation { d: s(d), first: b(first), second: b(second) }
            }
            Rule::Psp { r, d, sub } => Rule::Psp { r: s(r), d: s(d), sub: b(sub) },
            Rule::Completion { d, cases } => Rule::Completion {
                d: s(d),
                cases: cases.iter().map(|(q, n)| (s(q), n.instantiate(param, value))).collect(),
            },
        };
        ProofNode { from: s(&self.from), to: s(&self.to), rule, span: self.span }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofScript {
    pub property: String,
    pub root: ProofNode,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    pub pre: Expr,
    pub decls: Vec<VarDecl>,
    pub components: Vec<Component>,
    pub invariants: Vec<NamedPredicate>,
    pub properties: Vec<Property>,
    pub proofs: Vec<ProofScript>,
    /// Set by counter instrumentation; actions then carry their pc updates.
    pub instrumented: bool,
}

impl Program {
    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn property(&self, name: &str) -> Option<&Property> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn proof(&self, property: &str) -> Option<&ProofScript> {
        self.proofs.iter().find(|p| p.property == property)
    }

    pub fn is_labelled(&self) -> bool {
        fn block(b: &Block) -> bool {
            b.stmts.iter().all(|s| {
                s.label.is_some()
                    && match &s.kind {
                        StmtKind::If(bs) | StmtKind::Do(bs) => bs.iter().all(|br| block(&br.body)),
                        _ => true,
                    }
            })
        }
        self.components.iter().all(|c| c.final_label.is_some() && block(&c.body))
    }

    /// The component owning the full label `X.l`, if that label exists.
    pub fn resolve_label(&self, full: &str) -> Option<usize> {
        let (comp, _) = full.split_once('.')?;
        let idx = self.component_index(comp)?;
        self.components[idx].labels().iter().any(|l| l == full).then_some(idx)
    }
}
