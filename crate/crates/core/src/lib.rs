//! Verification of concurrent guarded-command programs: Owicki-Gries safety
//! obligations over program counters, unless/leads-to progress proofs, and an
//! explicit-state oracle under weak fairness.

pub mod expr;
pub mod frontend;
pub mod lang;
pub mod model;
pub mod obligation;
pub mod oracle;
pub mod predicate;
pub mod progress;
pub mod report;
pub mod safety;
pub mod transformer;
pub mod wlp;
