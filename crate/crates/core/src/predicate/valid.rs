use crate::expr::Expr;

use super::{PredError, Universe, Valuation};

/// Default bound on the number of valuations a single validity query may visit.
pub const DEFAULT_VALUATION_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// The least falsifying valuation in universe slot order; slots not free
    /// in the formula hold their least domain value.
    Invalid(Valuation),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Decides validity by enumerating the domains of the formula's free variables.
pub fn valid(universe: &Universe, p: &Expr, cap: u64) -> Result<Validity, PredError> {
    let compiled = universe.compile(p)?;
    if compiled.ty() != super::Type::Bool {
        return Err(PredError::Type(format!("`{p}` is not a predicate")));
    }
    let mut slots: Vec<usize> = p
        .free_vars()
        .iter()
        .map(|n| universe.slot(n).ok_or_else(|| PredError::UnknownVar(n.clone())))
        .collect::<Result<_, _>>()?;
    slots.sort_unstable();

    let domains: Vec<Vec<i64>> = slots.iter().map(|&s| universe.vars()[s].domain.values()).collect();
    let size = domains.iter().try_fold(1u128, |acc, d| acc.checked_mul(d.len() as u128));
    match size {
        Some(0) => return Ok(Validity::Valid),
        Some(n) if n <= cap as u128 => {}
        Some(n) => return Err(PredError::CapExceeded { size: n, cap }),
        None => return Err(PredError::CapExceeded { size: u128::MAX, cap }),
    }

    let mut current = universe.minimal();
    let mut digits = vec![0usize; slots.len()];
    for (k, &s) in slots.iter().enumerate() {
        current.0[s] = domains[k][0];
    }
    loop {
        if !compiled.eval_bool(&current.0)? {
            return Ok(Validity::Invalid(current));
        }
        // odometer: the last free slot varies fastest
        let mut k = slots.len();
        loop {
            if k == 0 {
                return Ok(Validity::Valid);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < domains[k].len() {
                current.0[slots[k]] = domains[k][digits[k]];
                break;
            }
            digits[k] = 0;
            current.0[slots[k]] = domains[k][0];
        }
    }
}

/// `valid(p ⇒ q)`.
pub fn implies(universe: &Universe, p: &Expr, q: &Expr, cap: u64) -> Result<Validity, PredError> {
    valid(universe, &Expr::implies(p.clone(), q.clone()), cap)
}
