//! Exponential Diophantine equations `Σ a_i ∏ b_ij^α_ij = c` over
//! non-negative exponents.
//!
//! Every exponent variable belongs to exactly one term. Optional order
//! constraints `α_u <= α_v + k` break the symmetry of repeated bases.

mod parse;
mod search;

pub use parse::{parse_template, Rhs};
pub use search::{exhaustive_solutions, representable_scan};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Pow, Zero};

use crate::error::{Error, Result};

/// Name of an exponent variable: `[a-z][a-z0-9]*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(String);

impl Var {
    pub fn new(name: &str) -> Result<Self> {
        let mut chars = name.chars();
        let ok = matches!(chars.next(), Some('a'..='z'))
            && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit());
        if !ok {
            return Err(Error::InvalidEquation(format!("bad variable name `{name}`")));
        }
        Ok(Var(name.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `base^var` inside a term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Power {
    pub base: u64,
    pub var: Var,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub coefficient: BigInt,
    pub powers: Vec<Power>,
}

impl Term {
    pub fn constant(value: impl Into<BigInt>) -> Self {
        Term { coefficient: value.into(), powers: Vec::new() }
    }

    pub fn is_constant(&self) -> bool {
        self.powers.is_empty()
    }
}

/// `α_lo <= α_hi + slack`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderConstraint {
    pub lo: Var,
    pub hi: Var,
    pub slack: i64,
}

impl OrderConstraint {
    pub fn le(lo: Var, hi: Var) -> Self {
        OrderConstraint { lo, hi, slack: 0 }
    }

    pub fn holds(&self, lo: u64, hi: u64) -> bool {
        (lo as i128) <= hi as i128 + self.slack as i128
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation {
    terms: Vec<Term>,
    rhs: BigInt,
    order: Vec<OrderConstraint>,
}

/// Values for every exponent variable.
pub type Assignment = BTreeMap<Var, u64>;

/// Exclusive upper bound per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBox {
    bounds: BTreeMap<Var, u64>,
}

impl SearchBox {
    pub fn new(bounds: BTreeMap<Var, u64>) -> Result<Self> {
        if let Some((v, _)) = bounds.iter().find(|(_, &b)| b == 0) {
            return Err(Error::InvalidEquation(format!("box bound for `{v}` must be positive")));
        }
        Ok(SearchBox { bounds })
    }

    /// Every variable of `eq` bounded by `bound` (exponents `0..bound`).
    pub fn uniform(eq: &Equation, bound: u64) -> Result<Self> {
        SearchBox::new(eq.variables().into_iter().map(|v| (v, bound)).collect())
    }

    pub fn bound(&self, var: &Var) -> Option<u64> {
        self.bounds.get(var).copied()
    }

    pub fn bounds(&self) -> &BTreeMap<Var, u64> {
        &self.bounds
    }
}

impl Equation {
    /// Validate and build. Terms with zero coefficient are rejected.
    pub fn new(terms: Vec<Term>, rhs: impl Into<BigInt>, order: Vec<OrderConstraint>) -> Result<Self> {
        let eq = Equation { terms, rhs: rhs.into(), order };
        eq.validate()?;
        Ok(eq)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for term in &self.terms {
            if term.coefficient.is_zero() {
                return Err(Error::InvalidEquation("zero coefficient".into()));
            }
            let mut bases = BTreeSet::new();
            for p in &term.powers {
                if p.base < 2 {
                    return Err(Error::InvalidEquation(format!("base {} must be at least 2", p.base)));
                }
                if !bases.insert(p.base) {
                    return Err(Error::InvalidEquation(format!("base {} repeated within a term", p.base)));
                }
                if !seen.insert(p.var.clone()) {
                    return Err(Error::VariableNotInOneTerm { var: p.var.to_string(), occurrences: 2 });
                }
            }
        }
        for c in &self.order {
            for v in [&c.lo, &c.hi] {
                if !seen.contains(v) {
                    return Err(Error::UnknownVariable(v.to_string()));
                }
            }
        }
        if self.order_has_cycle() {
            return Err(Error::InvalidEquation("order constraints contain a cycle".into()));
        }
        Ok(())
    }

    fn order_has_cycle(&self) -> bool {
        let vars = self.variables();
        let index: BTreeMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); vars.len()];
        let mut indeg = vec![0usize; vars.len()];
        for c in &self.order {
            let (a, b) = (index[&c.lo], index[&c.hi]);
            adj[a].push(b);
            indeg[b] += 1;
        }
        let mut stack: Vec<usize> = (0..vars.len()).filter(|&i| indeg[i] == 0).collect();
        let mut visited = 0;
        while let Some(i) = stack.pop() {
            visited += 1;
            for &j in &adj[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    stack.push(j);
                }
            }
        }
        visited != vars.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn rhs(&self) -> &BigInt {
        &self.rhs
    }

    pub fn order(&self) -> &[OrderConstraint] {
        &self.order
    }

    /// Variables in declaration order.
    pub fn variables(&self) -> Vec<Var> {
        self.terms.iter().flat_map(|t| t.powers.iter().map(|p| p.var.clone())).collect()
    }

    /// `(term index, base)` of a variable.
    pub fn locate(&self, var: &Var) -> Result<(usize, u64)> {
        let hits: Vec<(usize, u64)> = self
            .terms
            .iter()
            .enumerate()
            .flat_map(|(i, t)| t.powers.iter().filter(|p| &p.var == var).map(move |p| (i, p.base)))
            .collect();
        match hits.as_slice() {
            [one] => Ok(*one),
            _ => Err(Error::VariableNotInOneTerm { var: var.to_string(), occurrences: hits.len() }),
        }
    }

    pub fn base_of(&self, var: &Var) -> Option<u64> {
        self.locate(var).ok().map(|(_, b)| b)
    }

    /// Every base occurrence, in declaration order.
    pub fn bases(&self) -> Vec<u64> {
        self.terms.iter().flat_map(|t| t.powers.iter().map(|p| p.base)).collect()
    }

    /// The same equation without order constraints.
    pub fn without_order(&self) -> Equation {
        Equation { terms: self.terms.clone(), rhs: self.rhs.clone(), order: Vec::new() }
    }

    /// Whether an assignment respects the order constraints.
    pub fn respects_order(&self, a: &Assignment) -> bool {
        self.order.iter().all(|c| match (a.get(&c.lo), a.get(&c.hi)) {
            (Some(&x), Some(&y)) => c.holds(x, y),
            _ => true,
        })
    }

    /// Tuple of values in declaration order.
    pub fn tuple(&self, a: &Assignment) -> Vec<u64> {
        self.variables().iter().map(|v| a.get(v).copied().unwrap_or(0)).collect()
    }

    pub fn assignment_from_tuple(&self, values: &[u64]) -> Result<Assignment> {
        let vars = self.variables();
        if vars.len() != values.len() {
            return Err(Error::InvalidEquation(format!(
                "expected {} values, got {}",
                vars.len(),
                values.len()
            )));
        }
        Ok(vars.into_iter().zip(values.iter().copied()).collect())
    }
}

/// `lhs - rhs` at `a`; zero exactly at solutions.
pub fn evaluate(eq: &Equation, a: &Assignment) -> Result<BigInt> {
    let mut total = -eq.rhs.clone();
    for term in &eq.terms {
        let mut value = term.coefficient.clone();
        for p in &term.powers {
            let e = *a.get(&p.var).ok_or_else(|| Error::PartialAssignment(p.var.to_string()))?;
            value *= BigInt::from(p.base).pow(e as u32);
        }
        total += value;
    }
    Ok(total)
}

fn big_pow(base: u64, e: u64) -> Result<BigInt> {
    let e: u32 = e.try_into().map_err(|_| Error::Overflow(format!("exponent {e}")))?;
    Ok(BigInt::from(base).pow(e))
}

/// Replace `α_var` by `α0 + α'`: the term's coefficient absorbs `base^α0`.
pub fn shift(eq: &Equation, var: &Var, alpha0: u64) -> Result<Equation> {
    let (ti, base) = eq.locate(var)?;
    let mut out = eq.clone();
    out.terms[ti].coefficient *= big_pow(base, alpha0)?;
    let s = i64::try_from(alpha0).map_err(|_| Error::Overflow("shift".into()))?;
    for c in &mut out.order {
        if &c.lo == var {
            c.slack -= s;
        }
        if &c.hi == var {
            c.slack += s;
        }
    }
    Ok(out)
}

/// Substitute `α_var = value`. A term left without powers becomes a
/// constant and is merged with the other constants; constraints that
/// mention `var` are dropped, so the caller owns any bound they imply.
pub fn fix(eq: &Equation, var: &Var, value: u64) -> Result<Equation> {
    let (ti, base) = eq.locate(var)?;
    let mut out = eq.clone();
    let term = &mut out.terms[ti];
    term.coefficient *= big_pow(base, value)?;
    term.powers.retain(|p| &p.var != var);
    out.order.retain(|c| &c.lo != var && &c.hi != var);
    out.merge_constants();
    Ok(out)
}

impl Equation {
    /// Fold all constant terms into one, placed where the first stood.
    fn merge_constants(&mut self) {
        let Some(first) = self.terms.iter().position(Term::is_constant) else {
            return;
        };
        let total: BigInt = self.terms.iter().filter(|t| t.is_constant()).map(|t| &t.coefficient).sum();
        let mut merged = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.drain(..).enumerate() {
            if i == first {
                if !total.is_zero() {
                    merged.push(Term::constant(total.clone()));
                }
            } else if !t.is_constant() {
                merged.push(t);
            }
        }
        self.terms = merged;
    }
}

/// Restrict to `α_v ≡ β_v (mod o_v)` and substitute `α_v = β_v + o_v γ_v`.
///
/// The new equation has bases `b^o` and coefficients multiplied by `b^β`;
/// the variable names now denote the `γ`s.
pub fn rewrite_with_residues(eq: &Equation, residues: &BTreeMap<Var, (u64, u64)>) -> Result<Equation> {
    let mut out = eq.clone();
    for (var, &(beta, order)) in residues {
        if order == 0 || beta >= order {
            return Err(Error::InvalidResidue { var: var.to_string(), residue: beta, order });
        }
        let (ti, base) = eq.locate(var)?;
        let new_base = u32::try_from(order)
            .ok()
            .and_then(|o| base.checked_pow(o))
            .ok_or_else(|| Error::Overflow(format!("{base}^{order}")))?;
        let term = &mut out.terms[ti];
        term.coefficient *= big_pow(base, beta)?;
        for p in &mut term.powers {
            if &p.var == var {
                p.base = new_base;
            }
        }
    }
    if !out.order.is_empty() {
        // γ-ordering is not implied by α-ordering once the moduli differ.
        out.order.clear();
    }
    out.validate()?;
    Ok(out)
}
