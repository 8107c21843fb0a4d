//! Searching for a modulus that rules an equation out.
//!
//! Candidates are prime powers `t` whose unit groups have smooth order, so
//! every base has a smooth multiplicative order modulo `t` and the residue
//! classes the congruence engine tracks stay small. The search is greedy:
//! it repeatedly takes the candidate that splits the surviving exponent
//! cells least, which is the goodness `f(t)` of the equation rewritten on
//! the current residue classes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use log::debug;
use num_bigint::BigUint;
use rayon::prelude::*;

use crate::congruence::{replay_trace, EliminationTrace, JointSet, Limits, ReplayError, TraceStatus};
use crate::equation::Equation;
use crate::error::{Error, Result};
use crate::ntheory::{
    factorize_u64, gcd, is_prime_u64, is_smooth, mult_order, primes_up_to, smooth_sieve, valuation, Factorization, PrimePower,
    SmoothnessSpec,
};

/// Highest power [`CandidatePool::extended_for`] adds.
const MAX_EXTENSION: u32 = 24;

/// Largest exponent allowed per prime in a candidate pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerCaps {
    per_prime: BTreeMap<u64, u32>,
    default: u32,
}

impl PowerCaps {
    pub fn new(per_prime: BTreeMap<u64, u32>, default: u32) -> Self {
        PowerCaps { per_prime, default }
    }

    pub fn cap(&self, prime: u64) -> u32 {
        self.per_prime.get(&prime).copied().unwrap_or(self.default)
    }

    pub fn per_prime(&self) -> &BTreeMap<u64, u32> {
        &self.per_prime
    }

    pub fn default_cap(&self) -> u32 {
        self.default
    }
}

impl Default for PowerCaps {
    /// `2^4` and `3^2`, first powers otherwise.
    fn default() -> Self {
        PowerCaps::new([(2, 4), (3, 2)].into(), 1)
    }
}

/// Prime powers available to the search, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePool {
    entries: Vec<PrimePower>,
    spec: SmoothnessSpec,
    caps: PowerCaps,
}

impl CandidatePool {
    pub fn entries(&self) -> &[PrimePower] {
        &self.entries
    }

    pub fn spec(&self) -> &SmoothnessSpec {
        &self.spec
    }

    pub fn caps(&self) -> &PowerCaps {
        &self.caps
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// This pool plus, for each of its primes dividing a base of `eq`, the
    /// powers up to one past the largest valuation among the coefficients.
    /// A term whose coefficient is divisible by `q^v` only says something
    /// about its own exponent modulo `q^(v+1)` and beyond.
    ///
    /// For a base prime `l` outside the smooth set it also adds the primes
    /// `p <= bound` with `l | p - 1` and `p - 1` smooth over the set and `l`.
    /// Shifted equations often keep a solution with a negative exponent of
    /// `l`; only `l`-adic information tied to such primes rules it out.
    pub fn extended_for(&self, eq: &Equation) -> CandidatePool {
        let mut entries = self.entries.clone();
        let primes: BTreeSet<u64> = self.entries.iter().map(|t| t.prime).collect();
        let mut top: BTreeMap<u64, u32> = BTreeMap::new();
        for t in &self.entries {
            let e = top.entry(t.prime).or_default();
            *e = (*e).max(t.exponent);
        }
        for q in eq.bases().into_iter().flat_map(|b| factorize_u64(b).into_iter().map(|(q, _)| q)) {
            if !primes.contains(&q) {
                continue;
            }
            let v = eq.terms().iter().map(|t| valuation(t.coefficient.magnitude(), q)).max().unwrap_or(0);
            for e in top[&q] + 1..=(v + 1).min(MAX_EXTENSION) {
                if let Ok(t) = PrimePower::new(q, e) {
                    if q.checked_pow(e).is_some() {
                        entries.push(t);
                    }
                }
            }
            if !self.spec.smooth_primes().contains(&q) {
                let mut set = self.spec.smooth_primes().to_vec();
                set.push(q);
                for p in primes_up_to(self.spec.bound()) {
                    if (p - 1) % q == 0 && is_smooth(p - 1, &set) {
                        entries.push(PrimePower::new(p, 1).expect("prime"));
                    }
                }
            }
        }
        CandidatePool::from_entries(entries, self.spec.clone(), self.caps.clone())
    }

    /// Restrict to the given prime powers, which need not satisfy the
    /// smoothness predicate.
    pub fn from_entries(mut entries: Vec<PrimePower>, spec: SmoothnessSpec, caps: PowerCaps) -> Self {
        entries.sort_by_key(PrimePower::value);
        entries.dedup();
        CandidatePool { entries, spec, caps }
    }
}

/// Smooth primes up to `bound`, every sieve prime, and any prime dividing
/// one of `bases` that passes the smoothness test even beyond the bound,
/// each raised to every exponent up to its cap.
pub fn build_pool(bases: &[u64], spec: &SmoothnessSpec, caps: &PowerCaps) -> CandidatePool {
    let mut primes: Vec<u64> = spec.smooth_primes().iter().copied().filter(|&q| q <= spec.bound()).collect();
    primes.extend(smooth_sieve(spec));
    for &b in bases {
        for (q, _) in factorize_u64(b) {
            let smooth = spec.smooth_primes().contains(&q) || is_smooth(q - 1, spec.smooth_primes());
            if smooth && is_prime_u64(q) {
                primes.push(q);
            }
        }
    }
    primes.sort_unstable();
    primes.dedup();
    let mut entries = Vec::new();
    for q in primes {
        let mut value = 1u64;
        for e in 1..=caps.cap(q) {
            match value.checked_mul(q) {
                Some(v) => value = v,
                None => break,
            }
            entries.push(PrimePower::new(q, e).expect("prime"));
        }
    }
    CandidatePool::from_entries(entries, spec.clone(), caps.clone())
}

/// `f(t)`: the product over base occurrences of `ord_t(b)`, taking 1 when
/// `b` and `t` share a factor.
pub fn goodness(t: PrimePower, eq: &Equation) -> BigUint {
    let q = t.value();
    eq.bases()
        .into_iter()
        .map(|b| if gcd(b, q) > 1 { 1 } else { mult_order(b, q).expect("coprime") })
        .fold(BigUint::from(1u8), |acc, o| acc * o)
}

/// A modulus under which the congruence has no solutions, with the trace
/// proving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusCertificate {
    pub equation: Equation,
    pub trace: EliminationTrace,
}

impl ModulusCertificate {
    /// Used factors, in processing order.
    pub fn factors(&self) -> Vec<PrimePower> {
        self.trace.steps.iter().map(|s| s.factor).collect()
    }

    pub fn modulus(&self) -> Factorization {
        self.trace.modulus()
    }

    /// Replay the trace and require an UNSAT verdict.
    pub fn check(&self) -> std::result::Result<(), ReplayError> {
        if !self.trace.is_unsat() {
            return Err(ReplayError { step: self.trace.steps.len(), reason: "certificate does not claim UNSAT".into() });
        }
        replay_trace(&self.equation, &self.trace)
    }
}

/// Tunables for [`find_certificate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// A factor multiplying the surviving cells by more than this is put
    /// aside while others remain.
    pub fanout: usize,
    /// Factor-extraction steps allowed.
    pub budget: u64,
    pub limits: Limits,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { fanout: 64, budget: 10_000, limits: Limits::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    Budget,
    PoolExhausted,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::Budget => "step budget exhausted",
            FailureReason::PoolExhausted => "candidate pool exhausted",
        })
    }
}

/// What the search had when it gave up. The trace ends in a witness
/// modulo the factors it did use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchFailure {
    pub reason: FailureReason,
    pub steps: u64,
    pub cells: usize,
    pub trace: EliminationTrace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Search {
    Found { certificate: ModulusCertificate, steps: u64 },
    Failed(SearchFailure),
}

impl Search {
    pub fn steps(&self) -> u64 {
        match self {
            Search::Found { steps, .. } => *steps,
            Search::Failed(f) => f.steps,
        }
    }

    pub fn certificate(&self) -> Option<&ModulusCertificate> {
        match self {
            Search::Found { certificate, .. } => Some(certificate),
            Search::Failed(_) => None,
        }
    }
}

/// Greedy search for a certifying modulus, drawing on
/// [`CandidatePool::extended_for`] the equation.
///
/// Each round tries pool entries in order of least growth (ties to the
/// smaller entry). The first whose survivors stay within `fanout` times the
/// current cell count is taken; if none does, the one with fewest survivors
/// is. Entries that prune nothing are dropped from the pool for good (the
/// cells only shrink, so they never will); entries that break the engine
/// limits wait for a smaller set. Every attempt costs one step.
pub fn find_certificate(eq: &Equation, pool: &CandidatePool, config: &SearchConfig) -> Result<Search> {
    let mut state = JointSet::new(eq);
    let mut pending: Vec<PrimePower> = pool.extended_for(eq).entries().to_vec();
    let mut steps = 0u64;
    let fail = |reason, steps, state: JointSet| -> Result<Search> {
        let cells = state.len();
        let witness = state.witness().expect("non-empty");
        let trace = state.into_trace(TraceStatus::Sat(witness));
        Ok(Search::Failed(SearchFailure { reason, steps, cells, trace }))
    };
    loop {
        if pending.is_empty() {
            return fail(FailureReason::PoolExhausted, steps, state);
        }
        let mut order = ranked(&state, &pending);
        let allowed = state.len().max(1).saturating_mul(config.fanout);
        let mut best: Option<(usize, JointSet)> = None;
        let mut dropped: Vec<usize> = Vec::new();
        let mut taken = None;
        for idx in order.drain(..) {
            if steps >= config.budget {
                break;
            }
            steps += 1;
            let t = pending[idx];
            let (next, lifted) = match state.refine_counted(t, &config.limits) {
                Ok(r) => r,
                Err(Error::ResourceLimit { size, ceiling }) => {
                    debug!("{t}: {size} cells exceed {ceiling}");
                    continue;
                }
                Err(e) => return Err(e),
            };
            if next.is_empty() {
                let certificate = ModulusCertificate { equation: eq.clone(), trace: next.into_trace(TraceStatus::Unsat) };
                return Ok(Search::Found { certificate, steps });
            }
            if lifted == next.len() as u128 {
                dropped.push(idx);
                continue;
            }
            if next.len() <= allowed {
                taken = Some((idx, next));
                break;
            }
            if best.as_ref().is_none_or(|(_, b)| next.len() < b.len()) {
                best = Some((idx, next));
            }
        }
        let Some((idx, next)) = taken.or(best) else {
            if steps >= config.budget {
                return fail(FailureReason::Budget, steps, state);
            }
            // Every remaining entry was useless or too large.
            return fail(FailureReason::PoolExhausted, steps, state);
        };
        debug!("took {} ({} -> {} cells)", pending[idx], state.len(), next.len());
        let t = pending[idx];
        dropped.push(idx);
        dropped.sort_unstable();
        for i in dropped.into_iter().rev() {
            pending.remove(i);
        }
        // Lower powers of the same prime are implied now.
        pending.retain(|s| s.prime != t.prime || s.exponent > t.exponent);
        state = next;
    }
}

/// Indices into `pending` by growth, then value.
fn ranked(state: &JointSet, pending: &[PrimePower]) -> Vec<usize> {
    let scores: Vec<(u128, u64)> = pending
        .par_iter()
        .map(|t| (state.growth(t.value()).unwrap_or(u128::MAX), t.value()))
        .collect();
    let mut idx: Vec<usize> = (0..pending.len()).collect();
    idx.sort_by_key(|&i| scores[i]);
    idx
}

/// Outcome of [`check_known_modulus`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KnownModulus {
    Certificate(ModulusCertificate),
    Sat(crate::equation::Assignment),
}

/// Decide the congruence modulo a given `m`, wrapping UNSAT into a
/// certificate.
pub fn check_known_modulus(eq: &Equation, m: &Factorization, limits: &Limits) -> Result<KnownModulus> {
    match crate::congruence::solvable_mod(eq, m, None, limits)? {
        crate::congruence::Solvability::Unsat(trace) => {
            Ok(KnownModulus::Certificate(ModulusCertificate { equation: eq.clone(), trace }))
        }
        crate::congruence::Solvability::Sat { witness, .. } => Ok(KnownModulus::Sat(witness)),
    }
}
