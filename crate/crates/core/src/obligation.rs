//! Proof obligations and their verdicts.

use std::fmt;

use crate::expr::Expr;
use crate::predicate::{valid, PredError, Universe, Validity, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObKind {
    /// Local correctness of an assertion.
    Lc,
    /// Global correctness: an assertion survives another component's action.
    Gc,
    /// Initiation or preservation of an invariant.
    Inv,
    Post,
    Unless,
    /// A clause of the immediate-progress rule.
    Immediate,
    /// A side condition of a proof rule.
    Side,
}

impl ObKind {
    pub fn tag(self) -> &'static str {
        match self {
            ObKind::Lc => "LC",
            ObKind::Gc => "GC",
            ObKind::Inv => "INV",
            ObKind::Post => "POST",
            ObKind::Unless => "UN",
            ObKind::Immediate => "IMM",
            ObKind::Side => "SIDE",
        }
    }
}

impl fmt::Display for ObKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Valuation),
    /// Not decided, or decided only under assumptions that are not yet verified.
    Pending(String),
    /// The valuation space exceeds the configured cap.
    Capped(String),
    Error(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn word(&self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Invalid(_) => "invalid",
            Verdict::Pending(_) => "pending",
            Verdict::Capped(_) => "cap-exceeded",
            Verdict::Error(_) => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub id: String,
    pub kind: ObKind,
    pub formula: Expr,
    /// Which rule produced the obligation and for which program sites.
    pub provenance: String,
    pub verdict: Verdict,
    /// The formula assumes the annotation or declared invariants.
    pub assumes: bool,
}

impl Obligation {
    /// Builds and decides an obligation.
    pub fn decide(
        universe: &Universe,
        id: String,
        kind: ObKind,
        formula: Expr,
        provenance: String,
        assumes: bool,
        cap: u64,
    ) -> Obligation {
        let verdict = decide(universe, &formula, cap);
        Obligation { id, kind, formula, provenance, verdict, assumes }
    }

    pub fn pending(id: String, kind: ObKind, formula: Expr, provenance: String, why: String) -> Obligation {
        Obligation { id, kind, formula, provenance, verdict: Verdict::Pending(why), assumes: false }
    }
}

pub fn decide(universe: &Universe, formula: &Expr, cap: u64) -> Verdict {
    match valid(universe, formula, cap) {
        Ok(Validity::Valid) => Verdict::Valid,
        Ok(Validity::Invalid(v)) => Verdict::Invalid(v),
        Err(e @ PredError::CapExceeded { .. }) => Verdict::Capped(e.to_string()),
        Err(e) => Verdict::Error(e.to_string()),
    }
}

/// Turns valid verdicts that rest on an unverified annotation into pending ones.
pub fn downgrade_assumptions(obligations: &mut [Obligation], why: &str) {
    for o in obligations {
        if o.assumes && o.verdict.is_valid() {
            o.verdict = Verdict::Pending(why.to_string());
        }
    }
}

pub fn all_valid(obligations: &[Obligation]) -> bool {
    obligations.iter().all(|o| o.verdict.is_valid())
}
