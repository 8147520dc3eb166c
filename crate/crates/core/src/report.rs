//! A whole-program checker run: annotation first, then every declared
//! property, with later obligations staged on the annotation's verdict.

use crate::lang::PropertyKind;
use crate::model::Model;
use crate::obligation::{ObKind, Obligation};
use crate::progress::{check_script, unless_with_prefix, ProgressError, ScriptReport};
use crate::safety::{check_invariant, check_postcondition, check_safety, SafetyReport};

#[derive(Clone, Debug)]
pub enum PropertyOutcome {
    Obligations(Vec<Obligation>),
    Script(ScriptReport),
    /// Only the oracle decides it.
    OracleOnly,
}

#[derive(Clone, Debug)]
pub struct PropertyCheck {
    pub name: String,
    pub kind: &'static str,
    pub outcome: PropertyOutcome,
}

impl PropertyCheck {
    pub fn obligations(&self) -> Vec<&Obligation> {
        match &self.outcome {
            PropertyOutcome::Obligations(obs) => obs.iter().collect(),
            PropertyOutcome::Script(s) => s.obligations().collect(),
            PropertyOutcome::OracleOnly => Vec::new(),
        }
    }

    fn obligations_mut(&mut self) -> Vec<&mut Obligation> {
        match &mut self.outcome {
            PropertyOutcome::Obligations(obs) => obs.iter_mut().collect(),
            PropertyOutcome::Script(s) => s.obligations_mut().collect(),
            PropertyOutcome::OracleOnly => Vec::new(),
        }
    }

    pub fn discharged(&self) -> bool {
        !matches!(self.outcome, PropertyOutcome::OracleOnly) && self.obligations().iter().all(|o| o.verdict.is_valid())
    }
}

pub fn kind_name(kind: &PropertyKind) -> &'static str {
    match kind {
        PropertyKind::Unless(..) => "unless",
        PropertyKind::LeadsTo(..) => "leadsto",
        PropertyKind::Postcondition(_) => "postcondition",
        PropertyKind::Invariant(_) => "invariant",
        PropertyKind::DeadlockFree => "deadlockfree",
    }
}

#[derive(Clone, Debug)]
pub struct CheckRun {
    pub safety: SafetyReport,
    pub properties: Vec<PropertyCheck>,
}

impl CheckRun {
    pub fn obligations(&self) -> impl Iterator<Item = &Obligation> {
        self.safety.obligations.iter().chain(self.properties.iter().flat_map(|p| p.obligations()))
    }

    /// Every obligation raised is valid.
    pub fn verified(&self) -> bool {
        self.obligations().all(|o| o.verdict.is_valid())
    }
}

/// Obligations of one declared property, before staging.
pub fn check_property(model: &Model, name: &str, cap: u64) -> Result<PropertyCheck, ProgressError> {
    let prop = model.program.property(name).ok_or_else(|| ProgressError::UnknownProperty(name.to_string()))?;
    let outcome = match &prop.kind {
        PropertyKind::Unless(p, q) => PropertyOutcome::Obligations(unless_with_prefix(model, p, q, cap, &format!("{name}/"))),
        PropertyKind::Postcondition(post) => PropertyOutcome::Obligations(vec![check_postcondition(model, name, post, cap)]),
        PropertyKind::Invariant(inv) => PropertyOutcome::Obligations(check_invariant(model, name, inv, cap)),
        PropertyKind::LeadsTo(..) => match model.program.proof(name) {
            Some(script) => PropertyOutcome::Script(check_script(model, script, cap)?),
            None => PropertyOutcome::Obligations(vec![Obligation::pending(
                format!("{name}/script"),
                ObKind::Side,
                crate::expr::FALSE,
                "leads-to property without a proof script".into(),
                "no proof script".into(),
            )]),
        },
        PropertyKind::DeadlockFree => PropertyOutcome::OracleOnly,
    };
    Ok(PropertyCheck { name: name.to_string(), kind: kind_name(&prop.kind), outcome })
}

/// Checks the annotation and the declared properties (only `only` if given).
pub fn check_program(model: &Model, only: Option<&str>, cap: u64) -> Result<CheckRun, ProgressError> {
    let safety = check_safety(model, cap);
    let names: Vec<String> = match only {
        Some(n) => vec![n.to_string()],
        None => model.program.properties.iter().map(|p| p.name.clone()).collect(),
    };
    let mut properties = Vec::new();
    for name in names {
        let mut pc = check_property(model, &name, cap)?;
        let mut later: Vec<Obligation> = pc.obligations().into_iter().cloned().collect();
        safety.stage(&mut later);
        for (slot, staged) in pc.obligations_mut().into_iter().zip(later) {
            *slot = staged;
        }
        properties.push(pc);
    }
    Ok(CheckRun { safety, properties })
}
