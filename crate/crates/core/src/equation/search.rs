//! Bounded enumeration of exponent tuples.
//!
//! Depth-first over variables in declaration order (last variable
//! innermost). Each node bounds what the unassigned variables can still
//! contribute and abandons the subtree when the target interval is out of
//! reach. Arithmetic runs in `i128` when a static bound proves it cannot
//! overflow, otherwise in `BigInt`. The outermost variable is split across
//! threads; results are merged in order.

use std::collections::BTreeSet;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::{Assignment, Equation, SearchBox};
use crate::error::{Error, Result};

trait Num: Clone + Ord + Zero + One + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn from_big(n: &BigInt) -> Self;
    fn as_i128(&self) -> Option<i128>;
}

impl Num for i128 {
    fn from_big(n: &BigInt) -> Self {
        ToPrimitive::to_i128(n).expect("checked by the static bound")
    }
    fn as_i128(&self) -> Option<i128> {
        Some(*self)
    }
}

impl Num for BigInt {
    fn from_big(n: &BigInt) -> Self {
        n.clone()
    }
    fn as_i128(&self) -> Option<i128> {
        ToPrimitive::to_i128(self)
    }
}

struct Plan<T> {
    term_of: Vec<usize>,
    tables: Vec<Vec<T>>,
    coefficients: Vec<T>,
    constant: T,
    /// `rem[d][j]` = (min, max) of the product of powers of unassigned
    /// variables `d..` inside term `j`.
    rem: Vec<Vec<(T, T)>>,
    /// For variable `d`: (earlier variable, `true` if `d` is the upper side, slack).
    order_checks: Vec<Vec<(usize, bool, i64)>>,
}

impl<T: Num> Plan<T> {
    fn build(eq: &Equation, bounds: &[u64]) -> Self {
        let vars = eq.variables();
        let mut term_of = Vec::new();
        let mut tables = Vec::new();
        for (j, term) in eq.terms().iter().enumerate() {
            for (p, &bound) in term.powers.iter().zip(bounds[term_of.len()..].iter()) {
                term_of.push(j);
                let mut table = Vec::with_capacity(bound as usize);
                let mut x = BigInt::one();
                for _ in 0..bound {
                    table.push(T::from_big(&x));
                    x *= p.base;
                }
                tables.push(table);
            }
        }
        let mut coefficients = Vec::new();
        let mut constant = T::zero();
        for t in eq.terms() {
            coefficients.push(T::from_big(&t.coefficient));
            if t.is_constant() {
                constant = constant + T::from_big(&t.coefficient);
            }
        }
        let n = vars.len();
        let nterms = eq.terms().len();
        let mut rem = vec![vec![(T::one(), T::one()); nterms]; n + 1];
        for d in (0..n).rev() {
            rem[d] = rem[d + 1].clone();
            let j = term_of[d];
            let hi = tables[d].last().cloned().unwrap_or_else(T::one);
            let lo = tables[d].first().cloned().unwrap_or_else(T::one);
            rem[d][j] = (rem[d][j].0.clone() * lo, rem[d][j].1.clone() * hi);
        }
        let index = |v: &super::Var| vars.iter().position(|w| w == v).expect("validated");
        let mut order_checks = vec![Vec::new(); n];
        for c in eq.order() {
            let (lo, hi) = (index(&c.lo), index(&c.hi));
            if lo < hi {
                order_checks[hi].push((lo, true, c.slack));
            } else {
                order_checks[lo].push((hi, false, c.slack));
            }
        }
        Plan { term_of, tables, coefficients, constant, rem, order_checks }
    }

    fn reachable(&self, depth: usize, partial: &[T], lo: &T, hi: &T) -> bool {
        let mut low = self.constant.clone();
        let mut high = self.constant.clone();
        for (j, p) in partial.iter().enumerate() {
            let (rmin, rmax) = &self.rem[depth][j];
            let a = p.clone() * rmin.clone();
            let b = p.clone() * rmax.clone();
            if a <= b {
                low = low + a;
                high = high + b;
            } else {
                low = low + b;
                high = high + a;
            }
        }
        !(high < *lo || low > *hi)
    }

    fn range_for(&self, d: usize, values: &[u64]) -> (u64, u64) {
        let mut from = 0i128;
        let mut to = self.tables[d].len() as i128;
        for &(other, d_is_hi, slack) in &self.order_checks[d] {
            let x = values[other] as i128;
            if d_is_hi {
                from = from.max(x - slack as i128);
            } else {
                to = to.min(x + slack as i128 + 1);
            }
        }
        (from.max(0) as u64, to.max(0) as u64)
    }

    fn dfs(&self, d: usize, partial: &mut Vec<T>, values: &mut Vec<u64>, lo: &T, hi: &T, visit: &mut dyn FnMut(&[u64], T)) {
        if d == self.tables.len() {
            let mut total = self.constant.clone();
            for p in partial.iter() {
                total = total + p.clone();
            }
            if total >= *lo && total <= *hi {
                visit(values, total);
            }
            return;
        }
        if !self.reachable(d, partial, lo, hi) {
            return;
        }
        let (from, to) = self.range_for(d, values);
        let j = self.term_of[d];
        let saved = partial[j].clone();
        for e in from..to {
            partial[j] = saved.clone() * self.tables[d][e as usize].clone();
            values.push(e);
            self.dfs(d + 1, partial, values, lo, hi, visit);
            values.pop();
        }
        partial[j] = saved;
    }

    /// Constant terms start at zero in `partial`; they live in `constant`.
    /// Run the search with the first variable fanned out over threads.
    /// `make` creates a per-branch accumulator, `visit` feeds it.
    fn run<A: Send>(
        &self,
        lo: &T,
        hi: &T,
        make: impl Fn() -> A + Sync,
        visit: impl Fn(&mut A, &[u64], T) + Sync,
    ) -> Vec<A> {
        let initial: Vec<T> = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| if self.term_of.contains(&j) { c.clone() } else { T::zero() })
            .collect();
        if self.tables.is_empty() {
            let mut acc = make();
            let mut partial = initial;
            self.dfs(0, &mut partial, &mut Vec::new(), lo, hi, &mut |v, t| visit(&mut acc, v, t));
            return vec![acc];
        }
        let (from, to) = self.range_for(0, &[]);
        (from..to)
            .into_par_iter()
            .map(|e| {
                let mut acc = make();
                let mut partial = initial.clone();
                let j = self.term_of[0];
                partial[j] = partial[j].clone() * self.tables[0][e as usize].clone();
                let mut values = vec![e];
                self.dfs(1, &mut partial, &mut values, lo, hi, &mut |v, t| visit(&mut acc, v, t));
                acc
            })
            .collect()
    }
}

fn bounds_for(eq: &Equation, bx: &SearchBox) -> Result<Vec<u64>> {
    eq.variables()
        .iter()
        .map(|v| bx.bound(v).ok_or_else(|| Error::PartialAssignment(v.to_string())))
        .collect()
}

/// Whether every partial and final sum fits comfortably in `i128`.
fn fits_i128(eq: &Equation, bounds: &[u64], extra: &BigInt) -> bool {
    let mut total = extra.abs();
    let mut k = 0;
    for t in eq.terms() {
        let mut m = t.coefficient.abs();
        for p in &t.powers {
            m *= BigInt::from(p.base).pow(bounds[k].saturating_sub(1) as u32);
            k += 1;
        }
        total += m;
    }
    total.bits() < 120
}

/// All solutions inside `bx` (respecting order constraints), in
/// lexicographic order of the declaration-ordered tuples.
pub fn exhaustive_solutions(eq: &Equation, bx: &SearchBox) -> Result<Vec<Assignment>> {
    let bounds = bounds_for(eq, bx)?;
    let tuples: Vec<Vec<u64>> = if fits_i128(eq, &bounds, eq.rhs()) {
        let target = ToPrimitive::to_i128(eq.rhs()).expect("fits");
        collect_hits::<i128>(eq, &bounds, &target)
    } else {
        collect_hits::<BigInt>(eq, &bounds, eq.rhs())
    };
    tuples.iter().map(|t| eq.assignment_from_tuple(t)).collect()
}

fn collect_hits<T: Num>(eq: &Equation, bounds: &[u64], target: &T) -> Vec<Vec<u64>> {
    let plan = Plan::<T>::build(eq, bounds);
    plan.run(target, target, Vec::new, |acc: &mut Vec<Vec<u64>>, v, _| acc.push(v.to_vec()))
        .into_iter()
        .flatten()
        .collect()
}

/// Right-hand sides in `[c_lo, c_hi]` that no in-box assignment reaches.
///
/// The equation's own right-hand side is ignored; one pass enumerates the
/// left-hand values that fall inside the range and marks them.
pub fn representable_scan(template: &Equation, c_lo: &BigInt, c_hi: &BigInt, bx: &SearchBox) -> Result<BTreeSet<BigInt>> {
    if c_lo > c_hi {
        return Ok(BTreeSet::new());
    }
    let width = (c_hi - c_lo)
        .to_usize()
        .filter(|w| *w < 1 << 32)
        .ok_or_else(|| Error::InvalidEquation("scan range too wide".into()))?
        + 1;
    let bounds = bounds_for(template, bx)?;
    let extra = c_lo.abs().max(c_hi.abs());
    let hit = if fits_i128(template, &bounds, &extra) {
        mark::<i128>(template, &bounds, ToPrimitive::to_i128(c_lo).expect("fits"), ToPrimitive::to_i128(c_hi).expect("fits"), width)
    } else {
        mark::<BigInt>(template, &bounds, c_lo.clone(), c_hi.clone(), width)
    };
    Ok(hit
        .iter()
        .enumerate()
        .filter(|(_, &h)| !h)
        .map(|(i, _)| c_lo + BigInt::from(i))
        .collect())
}

fn mark<T: Num>(eq: &Equation, bounds: &[u64], lo: T, hi: T, width: usize) -> Vec<bool> {
    let plan = Plan::<T>::build(eq, bounds);
    let base = lo.as_i128().expect("range fits i128");
    let parts = plan.run(
        &lo,
        &hi,
        || vec![false; width],
        |acc: &mut Vec<bool>, _, value| {
            let idx = (value.as_i128().expect("in range") - base) as usize;
            acc[idx] = true;
        },
    );
    let mut out = vec![false; width];
    for part in parts {
        for (o, p) in out.iter_mut().zip(part) {
            *o |= p;
        }
    }
    out
}
