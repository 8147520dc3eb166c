use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::ast::{Block, Component, Program, Span, StmtKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("duplicate label `{component}.{label}` at {first} and {second}")]
    Duplicate { component: String, label: String, first: Span, second: Span },
    #[error("statement inside `atomic` at {0} cannot carry a label")]
    LabelInsideAtomic(Span),
}

/// Assigns a unique label to every atomic action and a final label to every
/// component. Explicit labels are kept; fresh ones are the smallest positive
/// ordinals not already spelled by an explicit label, handed out in textual
/// order.
pub fn auto_label(program: &Program) -> Result<Program, LabelError> {
    let mut out = program.clone();
    for comp in &mut out.components {
        label_component(comp)?;
    }
    Ok(out)
}

fn label_component(comp: &mut Component) -> Result<(), LabelError> {
    let mut seen: HashMap<String, Span> = HashMap::new();
    collect_explicit(&comp.body, &comp.name, &mut seen)?;
    if let Some(f) = &comp.final_label {
        if let Some(first) = seen.get(f) {
            return Err(LabelError::Duplicate {
                component: comp.name.clone(),
                label: f.clone(),
                first: *first,
                second: comp.span,
            });
        }
        seen.insert(f.clone(), comp.span);
    }
    let mut next = 1u64;
    let mut fresh = || {
        while seen.contains_key(&next.to_string()) {
            next += 1;
        }
        let l = next.to_string();
        seen.insert(l.clone(), Span::default());
        l
    };
    assign(&mut comp.body, &mut fresh);
    if comp.final_label.is_none() {
        comp.final_label = Some(fresh());
    }
    Ok(())
}

fn collect_explicit(b: &Block, comp: &str, seen: &mut HashMap<String, Span>) -> Result<(), LabelError> {
    for s in &b.stmts {
        if let Some(l) = &s.label {
            if let Some(first) = seen.insert(l.clone(), s.span) {
                return Err(LabelError::Duplicate {
                    component: comp.to_string(),
                    label: l.clone(),
                    first,
                    second: s.span,
                });
            }
        }
        match &s.kind {
            StmtKind::If(bs) | StmtKind::Do(bs) => {
                for br in bs {
                    collect_explicit(&br.body, comp, seen)?;
                }
            }
            StmtKind::Atomic(body) => check_unlabelled(body)?,
            _ => {}
        }
    }
    Ok(())
}

fn check_unlabelled(b: &Block) -> Result<(), LabelError> {
    for s in &b.stmts {
        if s.label.is_some() {
            return Err(LabelError::LabelInsideAtomic(s.span));
        }
        match &s.kind {
            StmtKind::If(bs) | StmtKind::Do(bs) => {
                for br in bs {
                    check_unlabelled(&br.body)?;
                }
            }
            StmtKind::Atomic(inner) => check_unlabelled(inner)?,
            _ => {}
        }
    }
    Ok(())
}

fn assign(b: &mut Block, fresh: &mut impl FnMut() -> String) {
    for s in &mut b.stmts {
        if s.label.is_none() {
            s.label = Some(fresh());
        }
        if let StmtKind::If(bs) | StmtKind::Do(bs) = &mut s.kind {
            for br in bs {
                assign(&mut br.body, fresh);
            }
        }
    }
}

/// The annotation of a labelled program: full label → assertions at that label.
pub fn annotation(program: &Program) -> BTreeMap<String, Vec<crate::expr::Expr>> {
    let mut out: BTreeMap<String, Vec<crate::expr::Expr>> = BTreeMap::new();
    for comp in &program.components {
        let Some(fin) = comp.final_full_label() else { continue };
        walk(&comp.body, comp, &fin, &mut out);
    }
    out
}

fn walk(
    b: &Block,
    comp: &Component,
    fin: &str,
    out: &mut BTreeMap<String, Vec<crate::expr::Expr>>,
) {
    let labels: Vec<String> = b
        .stmts
        .iter()
        .map(|s| s.label.as_ref().map(|l| comp.full_label(l)).unwrap_or_default())
        .collect();
    for (k, s) in b.stmts.iter().enumerate() {
        let here = &labels[k];
        let next = labels.get(k + 1).map(String::as_str).unwrap_or(fin);
        if !s.assertions.is_empty() {
            out.entry(here.clone()).or_default().extend(s.assertions.iter().cloned());
        }
        match &s.kind {
            StmtKind::If(bs) => {
                for br in bs {
                    walk(&br.body, comp, next, out);
                }
            }
            StmtKind::Do(bs) => {
                for br in bs {
                    walk(&br.body, comp, here, out);
                }
            }
            _ => {}
        }
    }
    if !b.post.is_empty() {
        out.entry(fin.to_string()).or_default().extend(b.post.iter().cloned());
    }
}
