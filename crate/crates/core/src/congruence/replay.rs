//! Independent re-derivation of elimination traces.
//!
//! Nothing here touches the engine: tails and periods are found by stepping
//! `mod_pow`, cells are expanded by a plain odometer, and every recorded
//! projection must match the recomputed one exactly.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use super::{EliminationTrace, ResidueConstraint, TraceStatus};
use crate::equation::{evaluate, Equation};
use crate::ntheory::{mod_pow, reduce};

/// Cells the replay is willing to hold at once.
const REPLAY_CAP: usize = 1 << 24;

/// Why a trace was rejected; `step` indexes the trace steps, and equals the
/// number of steps when the final status is at fault.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayError {
    pub step: usize,
    pub reason: String,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.reason)
    }
}

impl std::error::Error for ReplayError {}

/// One coordinate of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Coord {
    Exact(u64),
    Class(u64),
}

fn tail_and_period(b: u64, q: u64) -> (u64, u64) {
    let mut first: HashMap<u64, u64> = HashMap::new();
    let mut u = 0;
    loop {
        let x = mod_pow(b, u, q);
        if let Some(&f) = first.get(&x) {
            return (f, u - f);
        }
        first.insert(x, u);
        u += 1;
    }
}

fn lowest_in_class(tail: u64, modulus: u64, r: u64) -> u64 {
    let mut a = tail - tail % modulus + r;
    if a < tail {
        a += modulus;
    }
    a
}

/// Check every step of `trace` against `eq`.
pub fn replay_trace(eq: &Equation, trace: &EliminationTrace) -> Result<(), ReplayError> {
    let vars = eq.variables();
    let bases = eq.bases();
    let n = vars.len();
    let fail = |step: usize, reason: String| Err(ReplayError { step, reason });

    let mut tails = vec![0u64; n];
    let mut moduli = vec![1u64; n];
    let mut cells: Vec<Vec<Coord>> = vec![vec![Coord::Class(0); n]];
    let mut previous: Vec<ResidueConstraint> = vars.iter().cloned().map(ResidueConstraint::free).collect();

    for (k, step) in trace.steps.iter().enumerate() {
        let names: Vec<_> = step.constraints.iter().map(|c| c.var.clone()).collect();
        if names != vars {
            return fail(k, "constraint variables differ from the equation's".into());
        }
        let q = step.factor.value();
        let mut new_tails = Vec::with_capacity(n);
        let mut new_moduli = Vec::with_capacity(n);
        for i in 0..n {
            let (tail, period) = tail_and_period(bases[i], q);
            new_tails.push(tails[i].max(tail));
            new_moduli.push(moduli[i].lcm(&period));
        }
        // Residue of b_i^α for each coordinate the lifted cells can take.
        let mut memo: Vec<HashMap<Coord, u64>> = vec![HashMap::new(); n];
        let mut power = |i: usize, c: Coord| -> u64 {
            *memo[i].entry(c).or_insert_with(|| match c {
                Coord::Exact(a) => mod_pow(bases[i], a, q),
                Coord::Class(r) => mod_pow(bases[i], lowest_in_class(new_tails[i], new_moduli[i], r), q),
            })
        };
        let coefficients: Vec<u64> = eq.terms().iter().map(|t| reduce(&t.coefficient, q)).collect();
        let target = reduce(eq.rhs(), q);

        let mut next: Vec<Vec<Coord>> = Vec::new();
        for cell in &cells {
            let options: Vec<Vec<Coord>> = (0..n)
                .map(|i| match cell[i] {
                    Coord::Exact(a) => vec![Coord::Exact(a)],
                    Coord::Class(r) => {
                        let mut v: Vec<Coord> = (tails[i]..new_tails[i])
                            .filter(|a| a % moduli[i] == r)
                            .map(Coord::Exact)
                            .collect();
                        let mut s = r;
                        while s < new_moduli[i] {
                            v.push(Coord::Class(s));
                            s += moduli[i];
                        }
                        v
                    }
                })
                .collect();
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            let mut idx = vec![0usize; n];
            'cells: loop {
                let chosen: Vec<Coord> = (0..n).map(|i| options[i][idx[i]]).collect();
                let mut total = 0u64;
                let mut slot = 0;
                for (t, coef) in eq.terms().iter().zip(&coefficients) {
                    let mut v = *coef as u128;
                    for _ in &t.powers {
                        v = v * power(slot, chosen[slot]) as u128 % q as u128;
                        slot += 1;
                    }
                    total = ((total as u128 + v) % q as u128) as u64;
                }
                if total == target {
                    next.push(chosen);
                    if next.len() > REPLAY_CAP {
                        return fail(k, "replay exceeds its resource limit".into());
                    }
                }
                // odometer, last coordinate fastest
                let mut i = n;
                loop {
                    if i == 0 {
                        break 'cells;
                    }
                    i -= 1;
                    idx[i] += 1;
                    if idx[i] < options[i].len() {
                        continue 'cells;
                    }
                    idx[i] = 0;
                }
            }
        }
        cells = next;
        tails = new_tails;
        moduli = new_moduli;

        for i in 0..n {
            let mut small = BTreeSet::new();
            let mut residues = BTreeSet::new();
            for cell in &cells {
                match cell[i] {
                    Coord::Exact(a) => small.insert(a),
                    Coord::Class(r) => residues.insert(r),
                };
            }
            let got = &step.constraints[i];
            let want = ResidueConstraint { var: vars[i].clone(), tail: tails[i], small, modulus: moduli[i], residues };
            if *got != want {
                return fail(k, format!("constraint for `{}` does not match the replay", vars[i]));
            }
            if !got.refines(&previous[i]) {
                return fail(k, format!("constraint for `{}` is not a refinement", vars[i]));
            }
        }
        previous = step.constraints.clone();
    }

    let end = trace.steps.len();
    match &trace.status {
        TraceStatus::Unsat => {
            if end == 0 {
                return fail(end, "an UNSAT trace needs at least one factor".into());
            }
            if !cells.is_empty() {
                return fail(end, format!("{} cells survive, trace claims UNSAT", cells.len()));
            }
        }
        TraceStatus::Sat(w) => {
            if cells.is_empty() {
                return fail(end, "no cells survive, trace claims SAT".into());
            }
            let value = match evaluate(eq, w) {
                Ok(v) => v,
                Err(e) => return fail(end, format!("witness: {e}")),
            };
            for step in &trace.steps {
                let q = step.factor.value();
                if !(&value % q).is_zero() {
                    return fail(end, format!("witness fails modulo {}", step.factor));
                }
            }
        }
    }
    Ok(())
}
