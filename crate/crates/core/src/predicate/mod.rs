//! Finite-domain predicates: typing, evaluation and validity by enumeration.

mod compile;
mod valid;

pub use compile::{Compiled, Type};
pub use valid::{implies, valid, Validity, DEFAULT_VALUATION_CAP};

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::expr::Expr;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PredError {
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("arithmetic overflow")]
    Overflow,
    #[error("valuation space of {size} exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u64 },
    #[error("duplicate substitution target `{0}`")]
    DuplicateTarget(String),
}

/// The finite set of values a variable ranges over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Bool,
    Int { lo: i64, hi: i64 },
    /// Label codes, in declaration order.
    Labels(Vec<i64>),
}

impl Domain {
    pub fn values(&self) -> Vec<i64> {
        match self {
            Domain::Bool => vec![0, 1],
            Domain::Int { lo, hi } => (*lo..=*hi).collect(),
            Domain::Labels(codes) => codes.clone(),
        }
    }

    pub fn size(&self) -> u128 {
        match self {
            Domain::Bool => 2,
            Domain::Int { lo, hi } => (*hi as i128 - *lo as i128 + 1).max(0) as u128,
            Domain::Labels(codes) => codes.len() as u128,
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        match self {
            Domain::Bool => v == 0 || v == 1,
            Domain::Int { lo, hi } => *lo <= v && v <= *hi,
            Domain::Labels(codes) => codes.contains(&v),
        }
    }

    pub fn ty(&self) -> Type {
        match self {
            Domain::Bool => Type::Bool,
            Domain::Int { .. } => Type::Int,
            Domain::Labels(_) => Type::Label,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub domain: Domain,
}

/// Every variable a predicate may mention (data variables first, then one
/// program counter per component) plus the label table.
#[derive(Clone, Debug, Default)]
pub struct Universe {
    vars: Vec<VarInfo>,
    index: HashMap<String, usize>,
    labels: Vec<String>,
    label_index: HashMap<String, i64>,
}

impl Universe {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_label(&mut self, name: &str) -> i64 {
        if let Some(code) = self.label_index.get(name) {
            return *code;
        }
        let code = self.labels.len() as i64;
        self.labels.push(name.to_string());
        self.label_index.insert(name.to_string(), code);
        code
    }

    pub fn add_var(&mut self, name: &str, domain: Domain) -> usize {
        let slot = self.vars.len();
        self.vars.push(VarInfo { name: name.to_string(), domain });
        self.index.insert(name.to_string(), slot);
        slot
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn label_code(&self, name: &str) -> Option<i64> {
        self.label_index.get(name).copied()
    }

    pub fn label_name(&self, code: i64) -> &str {
        &self.labels[code as usize]
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// The valuation assigning every variable its least domain value.
    pub fn minimal(&self) -> Valuation {
        Valuation(self.vars.iter().map(|v| v.domain.values()[0]).collect())
    }

    pub fn value_of(&self, slot: usize, raw: i64) -> Value {
        match self.vars[slot].domain {
            Domain::Bool => Value::Bool(raw != 0),
            Domain::Int { .. } => Value::Int(raw),
            Domain::Labels(_) => Value::Label(self.label_name(raw).to_string()),
        }
    }

    pub fn render(&self, v: &Valuation) -> String {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, info)| format!("{}={}", info.name, self.value_of(i, v.0[i])))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Renders only the slots whose values differ between `from` and `to`.
    pub fn render_diff(&self, from: &Valuation, to: &Valuation) -> String {
        let parts: Vec<String> = (0..self.vars.len())
            .filter(|&i| from.0[i] != to.0[i])
            .map(|i| format!("{}:={}", self.vars[i].name, self.value_of(i, to.0[i])))
            .collect();
        if parts.is_empty() {
            "(no change)".to_string()
        } else {
            parts.join(", ")
        }
    }

    pub fn compile(&self, e: &Expr) -> Result<Compiled, PredError> {
        Compiled::new(self, e)
    }

    pub fn type_of(&self, e: &Expr) -> Result<Type, PredError> {
        compile::type_of(self, e)
    }
}

/// A total assignment of raw values to universe slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(pub Vec<i64>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Label(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Label(l) => f.write_str(l),
        }
    }
}

/// Evaluates a boolean predicate under a total valuation.
pub fn evaluate(universe: &Universe, p: &Expr, v: &Valuation) -> Result<bool, PredError> {
    universe.compile(p)?.eval_bool(&v.0)
}

/// Simultaneous substitution with the distinct-target check.
pub fn substitute(p: &Expr, bindings: &[(String, Expr)]) -> Result<Expr, PredError> {
    for (i, (x, _)) in bindings.iter().enumerate() {
        if bindings[..i].iter().any(|(y, _)| y == x) {
            return Err(PredError::DuplicateTarget(x.clone()));
        }
    }
    Ok(p.subst(bindings))
}
