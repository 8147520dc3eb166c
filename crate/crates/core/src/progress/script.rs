use crate::expr::{Expr, FALSE};
use crate::lang::{ProofNode, ProofScript, PropertyKind, Rule};
use crate::model::Model;
use crate::obligation::{all_valid, ObKind, Obligation};

use super::{immediate_with_prefix, unless_with_prefix, ProgressError};

/// Obligations raised by one node of a proof script.
#[derive(Clone, Debug)]
pub struct NodeReport {
    /// Position in the script tree, e.g. `1.2.1`.
    pub path: String,
    pub rule: &'static str,
    pub from: Expr,
    pub to: Expr,
    pub obligations: Vec<Obligation>,
}

#[derive(Clone, Debug)]
pub struct ScriptReport {
    pub property: String,
    /// Nodes in pre-order.
    pub nodes: Vec<NodeReport>,
}

impl ScriptReport {
    pub fn obligations(&self) -> impl Iterator<Item = &Obligation> {
        self.nodes.iter().flat_map(|n| n.obligations.iter())
    }

    pub fn obligations_mut(&mut self) -> impl Iterator<Item = &mut Obligation> {
        self.nodes.iter_mut().flat_map(|n| n.obligations.iter_mut())
    }

    pub fn holds(&self) -> bool {
        self.nodes.iter().all(|n| all_valid(&n.obligations))
    }
}

/// Checks `script` against the leads-to property it names.
pub fn check_script(model: &Model, script: &ProofScript, cap: u64) -> Result<ScriptReport, ProgressError> {
    let prop = model
        .program
        .property(&script.property)
        .ok_or_else(|| ProgressError::UnknownProperty(script.property.clone()))?;
    let PropertyKind::LeadsTo(p, q) = &prop.kind else {
        return Err(ProgressError::NotLeadsTo(prop.name.clone()));
    };
    let mut ctx = Ctx {
        model,
        cap,
        phi: model.has_assumptions().then(|| model.assumptions()),
        prop: script.property.clone(),
        nodes: Vec::new(),
    };
    ctx.node("1".into(), Some((p, q)), &script.root)?;
    Ok(ScriptReport { property: script.property.clone(), nodes: ctx.nodes })
}

/// A subproof: its path, the goal the parent requires of it (if any), and the node.
type Child = (String, Option<(Expr, Expr)>, ProofNode);

struct Ctx<'a> {
    model: &'a Model,
    cap: u64,
    phi: Option<Expr>,
    prop: String,
    nodes: Vec<NodeReport>,
}

impl Ctx<'_> {
    /// `a ⇒ b` in every state the annotation allows.
    fn side(&self, out: &mut Vec<Obligation>, path: &str, a: Expr, b: Expr, what: String) {
        let n = out.iter().filter(|o| o.kind == ObKind::Side).count() + 1;
        let lhs = match &self.phi {
            Some(phi) => Expr::and(phi.clone(), a),
            None => a,
        };
        out.push(Obligation::decide(
            &self.model.universe,
            format!("{}/{path}:SIDE{n}", self.prop),
            ObKind::Side,
            Expr::implies(lhs, b),
            what,
            self.phi.is_some(),
            self.cap,
        ));
    }

    fn prefix(&self, path: &str) -> String {
        format!("{}/{path}:", self.prop)
    }

    fn node(&mut self, path: String, required: Option<(&Expr, &Expr)>, n: &ProofNode) -> Result<(), ProgressError> {
        let idx = self.nodes.len();
        self.nodes.push(NodeReport {
            path: path.clone(),
            rule: n.rule.name(),
            from: n.from.clone(),
            to: n.to.clone(),
            obligations: Vec::new(),
        });
        let mut out = Vec::new();
        if let Some((a, b)) = required {
            if *a != n.from {
                self.side(&mut out, &path, a.clone(), n.from.clone(), format!("node {path} covers the required antecedent"));
            }
            if *b != n.to {
                self.side(&mut out, &path, n.to.clone(), b.clone(), format!("node {path} reaches the required consequent"));
            }
        }
        let (from, to) = (&n.from, &n.to);
        let child = |k: usize| format!("{path}.{k}");
        let mut children: Vec<Child> = Vec::new();
        match &n.rule {
            Rule::Immediate(label) => {
                out.extend(immediate_with_prefix(self.model, from, to, label, self.cap, &self.prefix(&path))?);
            }
            Rule::Implication => {
                self.side(&mut out, &path, from.clone(), to.clone(), "implication".into());
            }
            Rule::Transitivity { mid, first, second } => {
                children.push((child(1), Some((from.clone(), mid.clone())), (**first).clone()));
                children.push((child(2), Some((mid.clone(), to.clone())), (**second).clone()));
            }
            Rule::Disjunction(cases) => {
                let any = Expr::disj(cases.iter().map(|(c, _)| c.clone()));
                self.side(&mut out, &path, from.clone(), any, "the cases are exhaustive".into());
                for (k, (c, sub)) in cases.iter().enumerate() {
                    let want = Expr::and(from.clone(), c.clone());
                    children.push((child(k + 1), Some((want, to.clone())), sub.clone()));
                }
            }
            Rule::DisjunctionRange { param, lo, hi, template } => {
                self.range(param, *lo, *hi, n)?;
                let inst: Vec<ProofNode> = (*lo..=*hi).map(|v| template.instantiate(param, v)).collect();
                let any = Expr::disj(inst.iter().map(|s| s.from.clone()));
                self.side(&mut out, &path, from.clone(), any, format!("the cases {param} in {lo}..{hi} are exhaustive"));
                for (v, sub) in (*lo..=*hi).zip(inst) {
                    children.push((format!("{path}[{param}={v}]"), Some((sub.from.clone(), to.clone())), sub));
                }
            }
            Rule::Impossibility(sub) => {
                children.push((child(1), Some((from.clone(), FALSE)), (**sub).clone()));
            }
            Rule::DisjunctionTheorem(subs) => {
                let froms = Expr::disj(subs.iter().map(|s| s.from.clone()));
                let tos = Expr::disj(subs.iter().map(|s| s.to.clone()));
                self.side(&mut out, &path, from.clone(), froms, "the antecedent is covered".into());
                self.side(&mut out, &path, tos, to.clone(), "every consequent implies the goal".into());
                for (k, sub) in subs.iter().enumerate() {
                    children.push((child(k + 1), None, sub.clone()));
                }
            }
            Rule::Cancellation { d, first, second } => {
                let either = Expr::or(to.clone(), d.clone());
                children.push((child(1), Some((from.clone(), either)), (**first).clone()));
                children.push((child(2), Some((d.clone(), to.clone())), (**second).clone()));
            }
            Rule::Psp { r, d, sub } => {
                out.extend(unless_with_prefix(self.model, r, d, self.cap, &self.prefix(&path)));
                self.side(&mut out, &path, from.clone(), Expr::and(sub.from.clone(), r.clone()), "antecedent".into());
                let reached = Expr::or(Expr::and(sub.to.clone(), r.clone()), d.clone());
                self.side(&mut out, &path, reached, to.clone(), "consequent".into());
                children.push((child(1), None, (**sub).clone()));
            }
            Rule::Induction { measure, param, lo, hi, template } => {
                self.range(param, *lo, *hi, n)?;
                let bounded = Expr::and(
                    Expr::bin(crate::expr::BinOp::Le, Expr::Int(*lo), measure.clone()),
                    Expr::bin(crate::expr::BinOp::Le, measure.clone(), Expr::Int(*hi)),
                );
                self.side(&mut out, &path, from.clone(), bounded, format!("the measure stays in {lo}..{hi}"));
                for v in *lo..=*hi {
                    let want_from = Expr::and(from.clone(), Expr::eq(measure.clone(), Expr::Int(v)));
                    let smaller = Expr::and(
                        from.clone(),
                        Expr::bin(crate::expr::BinOp::Lt, measure.clone(), Expr::Int(v)),
                    );
                    let want_to = Expr::or(smaller, to.clone());
                    children.push((format!("{path}[{param}={v}]"), Some((want_from, want_to)), template.instantiate(param, v)));
                }
            }
            Rule::Completion { d, cases } => {
                for (k, (q, _)) in cases.iter().enumerate() {
                    let tag = self.prefix(&format!("{path}.{}", k + 1));
                    out.extend(unless_with_prefix(self.model, q, d, self.cap, &tag));
                }
                let all_p = Expr::conj(cases.iter().map(|(_, s)| s.from.clone()));
                let all_q = Expr::conj(cases.iter().map(|(q, _)| q.clone()));
                self.side(&mut out, &path, from.clone(), all_p, "antecedent".into());
                self.side(&mut out, &path, Expr::or(all_q, d.clone()), to.clone(), "consequent".into());
                for (k, (q, sub)) in cases.iter().enumerate() {
                    let want = Expr::or(q.clone(), d.clone());
                    children.push((child(k + 1), Some((sub.from.clone(), want)), sub.clone()));
                }
            }
        }
        self.nodes[idx].obligations = out;
        for (p, req, sub) in children {
            let req = req.as_ref().map(|(a, b)| (a, b));
            self.node(p, req, &sub)?;
        }
        Ok(())
    }

    fn range(&self, param: &str, lo: i64, hi: i64, n: &ProofNode) -> Result<(), ProgressError> {
        if lo > hi {
            return Err(ProgressError::EmptyRange { lo, hi, span: n.span });
        }
        if n.from.free_vars().contains(param) || n.to.free_vars().contains(param) {
            return Err(ProgressError::CapturedParameter { param: param.to_string(), span: n.span });
        }
        Ok(())
    }
}
