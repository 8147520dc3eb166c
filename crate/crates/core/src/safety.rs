//! Owicki-Gries obligations: local and global correctness of the
//! annotation, invariant preservation and the postcondition rule.

use crate::expr::Expr;
use crate::lang::{ActionKind, AtomicAction};
use crate::model::Model;
use crate::obligation::{all_valid, downgrade_assumptions, ObKind, Obligation, Verdict};
use crate::wlp::{action_wlp, effect_wlp};

/// The annotated precondition `U` of an action.
pub fn action_precondition(model: &Model, action: &AtomicAction) -> Expr {
    model.precondition(action)
}

fn wlp_or_error(action: &AtomicAction, post: &Expr) -> Result<Expr, String> {
    action_wlp(action, post).map_err(|e| e.to_string())
}

fn error_ob(id: String, kind: ObKind, provenance: String, msg: String) -> Obligation {
    Obligation { id, kind, formula: crate::expr::FALSE, provenance, verdict: Verdict::Error(msg), assumes: false }
}

/// Every assertion follows from the precondition (at an initial label) or
/// from the precondition of each action that can move control to it.
pub fn check_local(model: &Model, cap: u64) -> Vec<Obligation> {
    let u = &model.universe;
    let mut out = Vec::new();
    let pre = model.pre();
    for c in &model.program.components {
        let Some(init) = c.initial_label() else { continue };
        for (k, p) in model.assertions_at(&init).iter().enumerate() {
            out.push(Obligation::decide(
                u,
                format!("LC:{init}#{}/pre", k + 1),
                ObKind::Lc,
                Expr::implies(pre.clone(), p.clone()),
                format!("assertion {} at {init} follows from the precondition", k + 1),
                false,
                cap,
            ));
        }
    }
    for a in &model.actions {
        let pre_a = model.precondition(a);
        let loop_rule = matches!(a.kind, ActionKind::DoEval { .. });
        for (n, o) in a.outcomes().into_iter().enumerate() {
            for (k, p) in model.assertions_at(&o.target).iter().enumerate() {
                let id = format!("LC:{}#{}/{}", o.target, k + 1, a.label);
                let after = p.subst1(&a.pc, Expr::Label(o.target.clone()));
                let w = match effect_wlp(&o.effect, &after) {
                    Ok(w) => w,
                    Err(e) => {
                        out.push(error_ob(id, ObKind::Lc, String::new(), e.to_string()));
                        continue;
                    }
                };
                let formula = Expr::implies(Expr::and(pre_a.clone(), o.guard.clone()), w);
                let how = if loop_rule {
                    if n + 1 == a.outcomes().len() { "loop exit".to_string() } else { format!("loop branch {}", n + 1) }
                } else {
                    format!("{} {}", a.kind_name(), a.label)
                };
                out.push(Obligation::decide(
                    u,
                    id,
                    ObKind::Lc,
                    formula,
                    format!("assertion {} at {} established by {how}", k + 1, o.target),
                    true,
                    cap,
                ));
            }
        }
    }
    out
}

/// Every assertion is preserved by every action of every other component.
pub fn check_global(model: &Model, cap: u64) -> Vec<Obligation> {
    let u = &model.universe;
    let mut out = Vec::new();
    for (label, preds) in &model.annotation {
        let Some(owner) = model.program.resolve_label(label) else { continue };
        let site = Expr::conj(std::iter::once(model.at(label)).chain(preds.iter().cloned()));
        for (k, p) in preds.iter().enumerate() {
            for a in model.actions.iter().filter(|a| a.component != owner) {
                let id = format!("GC:{label}#{}/{}", k + 1, a.label);
                let prov = format!("assertion {} at {label} against {} {}", k + 1, a.kind_name(), a.label);
                match wlp_or_error(a, p) {
                    Ok(w) => out.push(Obligation::decide(
                        u,
                        id,
                        ObKind::Gc,
                        Expr::implies(Expr::and(site.clone(), model.precondition(a)), w),
                        prov,
                        true,
                        cap,
                    )),
                    Err(e) => out.push(error_ob(id, ObKind::Gc, prov, e)),
                }
            }
        }
    }
    out
}

/// `Pre ⇒ I` and `I ∧ U ⇒ wlp(S, I)` for every action.
pub fn check_invariant(model: &Model, name: &str, inv: &Expr, cap: u64) -> Vec<Obligation> {
    let u = &model.universe;
    let mut out = vec![Obligation::decide(
        u,
        format!("INV:{name}/pre"),
        ObKind::Inv,
        Expr::implies(model.pre(), inv.clone()),
        format!("invariant {name} holds initially"),
        false,
        cap,
    )];
    for a in &model.actions {
        let id = format!("INV:{name}/{}", a.label);
        let prov = format!("invariant {name} preserved by {} {}", a.kind_name(), a.label);
        match wlp_or_error(a, inv) {
            Ok(w) => out.push(Obligation::decide(
                u,
                id,
                ObKind::Inv,
                Expr::implies(Expr::and(inv.clone(), model.precondition(a)), w),
                prov,
                model.has_assumptions(),
                cap,
            )),
            Err(e) => out.push(error_ob(id, ObKind::Inv, prov, e)),
        }
    }
    out
}

/// The final assertions of all components, with every counter at its final
/// label, imply `post`.
pub fn check_postcondition(model: &Model, name: &str, post: &Expr, cap: u64) -> Obligation {
    let mut parts = Vec::new();
    let mut missing = Vec::new();
    for fin in model.final_labels() {
        parts.push(model.at(&fin));
        let here = model.assertions_at(&fin);
        if here.is_empty() {
            missing.push(fin.clone());
        }
        parts.extend(here.iter().cloned());
    }
    parts.extend(model.program.invariants.iter().map(|i| i.pred.clone()));
    let formula = Expr::implies(Expr::conj(parts), post.clone());
    let mut ob = Obligation::decide(
        &model.universe,
        format!("POST:{name}"),
        ObKind::Post,
        formula,
        format!("postcondition {name} from the final assertions"),
        model.has_assumptions(),
        cap,
    );
    if matches!(ob.verdict, Verdict::Invalid(_)) && !missing.is_empty() {
        ob.verdict = Verdict::Pending(format!("no final assertions at {}", missing.join(", ")));
    }
    ob
}

/// The annotation and the declared invariants, checked together.
#[derive(Clone, Debug)]
pub struct SafetyReport {
    pub obligations: Vec<Obligation>,
}

impl SafetyReport {
    pub fn annotation_verified(&self) -> bool {
        all_valid(&self.obligations)
    }

    /// Marks `later` as pending when it leans on an annotation that failed.
    pub fn stage(&self, later: &mut [Obligation]) {
        if !self.annotation_verified() {
            downgrade_assumptions(later, "relies on an annotation or invariant that is not verified");
        }
    }
}

pub fn check_safety(model: &Model, cap: u64) -> SafetyReport {
    let mut obligations = check_local(model, cap);
    obligations.extend(check_global(model, cap));
    for inv in &model.program.invariants {
        obligations.extend(check_invariant(model, &inv.name, &inv.pred, cap));
    }
    SafetyReport { obligations }
}
