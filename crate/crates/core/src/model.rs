//! A labelled, instrumented program together with everything the checkers
//! and the oracle derive from it.

use std::collections::BTreeMap;

use crate::expr::Expr;
use crate::lang::{
    annotation, auto_label, extract_actions, instrument_counters, AtomicAction, LabelError, Program,
    VarType,
};
use crate::predicate::{Domain, Universe};

/// Data variables in declaration order, then one counter per component whose
/// domain lists the component's labels in textual order.
pub fn build_universe(program: &Program) -> Universe {
    let mut u = Universe::new();
    let per_comp: Vec<Vec<i64>> = program
        .components
        .iter()
        .map(|c| c.labels().iter().map(|l| u.add_label(l)).collect())
        .collect();
    for d in &program.decls {
        let dom = match d.ty {
            VarType::Bool => Domain::Bool,
            VarType::Int { lo, hi } => Domain::Int { lo, hi },
        };
        u.add_var(&d.name, dom);
    }
    for (c, codes) in program.components.iter().zip(per_comp) {
        u.add_var(&c.pc(), Domain::Labels(codes));
    }
    u
}

#[derive(Clone, Debug)]
pub struct Model {
    pub program: Program,
    pub universe: Universe,
    pub actions: Vec<AtomicAction>,
    /// Full label → assertions at that label.
    pub annotation: BTreeMap<String, Vec<Expr>>,
}

impl Model {
    /// Labels (when needed) and instruments `program`.
    pub fn new(program: &Program) -> Result<Model, LabelError> {
        let labelled = if program.is_labelled() { program.clone() } else { auto_label(program)? };
        let program = instrument_counters(&labelled);
        let universe = build_universe(&program);
        let actions = extract_actions(&program);
        let annotation = annotation(&program);
        Ok(Model { program, universe, actions, annotation })
    }

    /// The user precondition strengthened with every counter at its initial label.
    pub fn pre(&self) -> Expr {
        let mut parts = vec![self.program.pre.clone()];
        for c in &self.program.components {
            if let Some(init) = c.initial_label() {
                parts.push(Expr::at(&c.name, &init));
            }
        }
        Expr::conj(parts)
    }

    pub fn action(&self, label: &str) -> Option<&AtomicAction> {
        self.actions.iter().find(|a| a.label == label)
    }

    pub fn assertions_at(&self, label: &str) -> &[Expr] {
        self.annotation.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn invariants(&self) -> Expr {
        Expr::conj(self.program.invariants.iter().map(|i| i.pred.clone()))
    }

    pub fn has_assumptions(&self) -> bool {
        !self.program.invariants.is_empty() || self.annotation.values().any(|v| !v.is_empty())
    }

    /// Counter of the component owning `label`.
    pub fn pc_of(&self, label: &str) -> Option<String> {
        self.program.resolve_label(label).map(|c| self.program.components[c].pc())
    }

    /// `pc = label` for the owning component.
    pub fn at(&self, label: &str) -> Expr {
        let comp = label.split_once('.').map(|(c, _)| c).unwrap_or(label);
        Expr::at(comp, label)
    }

    /// The annotated precondition of an action: control at its label, the
    /// assertions there, and the declared invariants.
    pub fn precondition(&self, action: &AtomicAction) -> Expr {
        let mut parts = vec![self.at(&action.label)];
        parts.extend(self.assertions_at(&action.label).iter().cloned());
        parts.extend(self.program.invariants.iter().map(|i| i.pred.clone()));
        Expr::conj(parts)
    }

    /// Everything the verified annotation lets a proof assume about any
    /// reachable state: the invariants, and at every label its assertions.
    pub fn assumptions(&self) -> Expr {
        let mut parts: Vec<Expr> = self.program.invariants.iter().map(|i| i.pred.clone()).collect();
        for (label, preds) in &self.annotation {
            if preds.is_empty() {
                continue;
            }
            parts.push(Expr::implies(self.at(label), Expr::conj(preds.iter().cloned())));
        }
        Expr::conj(parts)
    }

    pub fn final_labels(&self) -> Vec<String> {
        self.program.components.iter().filter_map(|c| c.final_full_label()).collect()
    }
}
