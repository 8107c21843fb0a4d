//! Solvability of `Σ a_i ∏ b_ij^α_ij ≡ c (mod m)` over non-negative
//! exponents.
//!
//! The modulus is processed one prime-power factor at a time. The engine
//! keeps the exact set of exponent cells that survive every factor seen so
//! far: per variable, either an explicit small value (below the largest
//! track tail met so far) or a residue class modulo the lcm of the track
//! periods. Each factor lifts the cells to the finer moduli and discards
//! those violating the new congruence. An empty set is a proof of
//! unsolvability; the per-factor projections form the elimination trace
//! that [`replay_trace`] checks independently.

mod engine;
mod replay;

pub use engine::JointSet;
pub use replay::{replay_trace, ReplayError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use log::warn;
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::equation::{evaluate, Assignment, Equation, Var};
use crate::error::{Error, Result};
use crate::ntheory::{Factorization, PrimePower};

/// Working-set ceiling used when the caller does not supply one.
pub const DEFAULT_CEILING: usize = 1 << 22;

/// Resource limits for the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest number of surviving cells kept after a factor.
    pub ceiling: usize,
    /// Largest number of lifted cells examined while processing a factor.
    pub work: u128,
    /// Exponent tuples tried directly when the engine runs out of room;
    /// 0 disables.
    pub probe: usize,
}

impl Limits {
    /// Work is allowed to exceed the stored set by a factor of 16.
    pub fn with_ceiling(ceiling: usize) -> Self {
        Limits { ceiling, work: ceiling as u128 * 16, probe: 1 << 14 }
    }

    pub fn without_probe(self) -> Self {
        Limits { probe: 0, ..self }
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits::with_ceiling(DEFAULT_CEILING)
    }
}

/// Exponents admitted for one variable.
///
/// `α` is allowed iff `α < tail` and `α ∈ small`, or `α >= tail` and
/// `α mod modulus ∈ residues`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidueConstraint {
    pub var: Var,
    pub tail: u64,
    pub small: BTreeSet<u64>,
    pub modulus: u64,
    pub residues: BTreeSet<u64>,
}

impl ResidueConstraint {
    /// No restriction: every exponent allowed.
    pub fn free(var: Var) -> Self {
        ResidueConstraint { var, tail: 0, small: BTreeSet::new(), modulus: 1, residues: [0].into() }
    }

    pub fn is_unsat(&self) -> bool {
        self.small.is_empty() && self.residues.is_empty()
    }

    pub fn allows(&self, alpha: u64) -> bool {
        if alpha < self.tail {
            self.small.contains(&alpha)
        } else {
            self.residues.contains(&(alpha % self.modulus))
        }
    }

    /// The single admissible exponent, if there is exactly one.
    pub fn forced_value(&self) -> Option<u64> {
        match (self.small.len(), self.residues.is_empty()) {
            (1, true) => self.small.first().copied(),
            _ => None,
        }
    }

    /// Largest admissible exponent, if the admissible set is finite.
    pub fn max_value(&self) -> Option<u64> {
        if self.residues.is_empty() {
            self.small.last().copied()
        } else {
            None
        }
    }

    /// Whether every exponent allowed here is allowed by `coarser`.
    pub fn refines(&self, coarser: &ResidueConstraint) -> bool {
        if self.var != coarser.var {
            return false;
        }
        if !self.small.iter().all(|&s| coarser.allows(s)) {
            return false;
        }
        if self.residues.is_empty() {
            return true;
        }
        // Classes above our tail must sit inside coarser classes.
        self.tail >= coarser.tail
            && self.modulus.is_multiple_of(coarser.modulus)
            && self.residues.iter().all(|r| coarser.residues.contains(&(r % coarser.modulus)))
    }
}

impl fmt::Display for ResidueConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &BTreeSet<u64>| s.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(
            f,
            "var {}: small={{{}}} tail {} mod {} residues={{{}}}",
            self.var,
            join(&self.small),
            self.tail,
            self.modulus,
            join(&self.residues)
        )
    }
}

/// Constraints on every variable after one factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceStep {
    pub factor: PrimePower,
    pub constraints: Vec<ResidueConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStatus {
    Unsat,
    /// Explicit exponents satisfying the congruence modulo the processed factors.
    Sat(Assignment),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationTrace {
    pub steps: Vec<TraceStep>,
    pub status: TraceStatus,
}

impl EliminationTrace {
    pub fn is_unsat(&self) -> bool {
        self.status == TraceStatus::Unsat
    }

    /// Least common multiple of the processed factors.
    pub fn modulus(&self) -> Factorization {
        let mut top: BTreeMap<u64, u32> = BTreeMap::new();
        for s in &self.steps {
            let e = top.entry(s.factor.prime).or_default();
            *e = (*e).max(s.factor.exponent);
        }
        let factors: Vec<PrimePower> = top.into_iter().map(|(prime, exponent)| PrimePower { prime, exponent }).collect();
        Factorization::from_prime_powers(&factors)
    }

    /// Constraint on `var` after the factor `q_pow`, if that factor was used.
    pub fn constraint_after(&self, q_pow: u64, var: &Var) -> Option<&ResidueConstraint> {
        self.steps
            .iter()
            .find(|s| s.factor.value() == q_pow)
            .and_then(|s| s.constraints.iter().find(|c| &c.var == var))
    }
}

/// Result of [`constraints_mod_prime_power`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalConstraints {
    Unsat,
    Constraints(Vec<ResidueConstraint>),
}

/// Per-variable exponents admitting some completion modulo `q_pow`.
pub fn constraints_mod_prime_power(eq: &Equation, q_pow: PrimePower, limits: &Limits) -> Result<LocalConstraints> {
    let next = JointSet::new(eq).refine(q_pow, limits)?;
    if next.is_empty() {
        Ok(LocalConstraints::Unsat)
    } else {
        Ok(LocalConstraints::Constraints(next.constraints()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solvability {
    Sat { witness: Assignment, trace: EliminationTrace },
    Unsat(EliminationTrace),
}

impl Solvability {
    pub fn trace(&self) -> &EliminationTrace {
        match self {
            Solvability::Sat { trace, .. } | Solvability::Unsat(trace) => trace,
        }
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Solvability::Unsat(_))
    }
}

/// Small exponent tuples solving the congruence outright. The cells of a
/// solvable congruence rarely shrink, so this settles most SAT cases the
/// engine cannot finish.
fn probe(eq: &Equation, m: &BigUint, budget: usize) -> Result<Option<Assignment>> {
    let vars = eq.variables();
    let n = vars.len() as u32;
    if budget == 0 {
        return Ok(None);
    }
    let mut side = 1u64;
    while (side + 1).checked_pow(n).is_some_and(|s| s <= budget as u64) {
        side += 1;
        if n == 0 {
            break;
        }
    }
    let m = BigInt::from(m.clone());
    let total = side.pow(n);
    for code in 0..total {
        let mut c = code;
        let tuple: Vec<u64> = (0..n)
            .map(|_| {
                let x = c % side;
                c /= side;
                x
            })
            .rev()
            .collect();
        let a = eq.assignment_from_tuple(&tuple)?;
        if (evaluate(eq, &a)? % &m).is_zero() {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Decide the congruence modulo `m`.
///
/// If factors remain deferred at the end, small exponent tuples are tried
/// directly before giving up with a resource error; a witness found that
/// way closes a trace that stops short of the full modulus.
///
/// With `order` the factors are processed exactly in that sequence. Without
/// it each step takes the remaining factor whose rewritten goodness (see
/// [`JointSet::growth`]) is least, ties to the smaller factor. A factor
/// whose lifted set would break `limits` is deferred and retried after the
/// next successful step. Processing stops at the first empty set, so an
/// UNSAT trace may use a proper divisor of `m`.
pub fn solvable_mod(eq: &Equation, m: &Factorization, order: Option<&[PrimePower]>, limits: &Limits) -> Result<Solvability> {
    let factors = m.prime_powers()?;
    if let Some(order) = order {
        let mut a = order.to_vec();
        let mut b = factors.clone();
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::InvalidEquation("factor order is not a permutation of the modulus factors".into()));
        }
    }
    let mut state = JointSet::new(eq);
    let mut pending: Vec<PrimePower> = order.map(<[_]>::to_vec).unwrap_or(factors);
    let mut deferred: Vec<PrimePower> = Vec::new();
    while !state.is_empty() && !pending.is_empty() {
        let idx = if order.is_some() { 0 } else { state.best_factor(&pending) };
        let t = pending.remove(idx);
        match state.refine(t, limits) {
            Ok(next) => {
                state = next;
                pending.append(&mut deferred);
                pending.sort();
            }
            Err(Error::ResourceLimit { size, ceiling }) if order.is_none() => {
                warn!("deferring factor {t}: {size} cells exceed {ceiling}");
                deferred.push(t);
            }
            Err(e) => return Err(e),
        }
    }
    if state.is_empty() {
        return Ok(Solvability::Unsat(state.into_trace(TraceStatus::Unsat)));
    }
    if let Some(t) = deferred.first() {
        if let Some(witness) = probe(eq, &m.value(), limits.probe)? {
            let trace = state.into_trace(TraceStatus::Sat(witness.clone()));
            return Ok(Solvability::Sat { witness, trace });
        }
        let size = state.lift_size(t.value(), limits)?;
        return Err(Error::ResourceLimit { size, ceiling: limits.work });
    }
    let witness = state.witness().expect("non-empty");
    let trace = state.into_trace(TraceStatus::Sat(witness.clone()));
    Ok(Solvability::Sat { witness, trace })
}

#[cfg(test)]
mod tests;
