use std::fmt;

use crate::equation::{fix, shift, Assignment, Equation, Var};
use crate::error::{Error, Result};

/// What a region knows about one exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Fixed(u64),
    AtLeast(u64),
}

impl Bound {
    pub fn lower(self) -> u64 {
        match self {
            Bound::Fixed(v) | Bound::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Fixed(v) => write!(f, "={v}"),
            Bound::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// A box of exponent tuples: each variable either fixed or bounded below.
///
/// Order constraints of the equation are part of the meaning: a region is
/// the set of tuples inside the box that satisfy them. Lower bounds are
/// kept closed under the constraints, which changes the box but not that
/// set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Region {
    bounds: Vec<(Var, Bound)>,
}

impl Region {
    /// Every tuple.
    pub fn whole(eq: &Equation) -> Self {
        let mut r = Region { bounds: eq.variables().into_iter().map(|v| (v, Bound::AtLeast(0))).collect() };
        r.close(eq);
        r
    }

    pub fn bounds(&self) -> &[(Var, Bound)] {
        &self.bounds
    }

    pub fn bound(&self, var: &Var) -> Option<Bound> {
        self.bounds.iter().find(|(v, _)| v == var).map(|(_, b)| *b)
    }

    fn slot(&self, var: &Var) -> Result<usize> {
        self.bounds.iter().position(|(v, _)| v == var).ok_or_else(|| Error::UnknownVariable(var.to_string()))
    }

    pub fn free(&self) -> Vec<Var> {
        self.bounds.iter().filter(|(_, b)| matches!(b, Bound::AtLeast(_))).map(|(v, _)| v.clone()).collect()
    }

    /// The sub-region `var = value`.
    pub fn fix(&self, eq: &Equation, var: &Var, value: u64) -> Result<Region> {
        let i = self.slot(var)?;
        match self.bounds[i].1 {
            Bound::AtLeast(l) if value >= l => {}
            b => return Err(Error::InvalidRegion(format!("cannot fix `{var}` {b} at {value}"))),
        }
        let mut r = self.clone();
        r.bounds[i].1 = Bound::Fixed(value);
        r.close(eq);
        Ok(r)
    }

    /// The sub-region `var >= bound`.
    pub fn raise(&self, eq: &Equation, var: &Var, bound: u64) -> Result<Region> {
        let i = self.slot(var)?;
        match self.bounds[i].1 {
            Bound::AtLeast(l) if bound >= l => {}
            b => return Err(Error::InvalidRegion(format!("cannot raise `{var}` {b} to {bound}"))),
        }
        let mut r = self.clone();
        r.bounds[i].1 = Bound::AtLeast(bound);
        r.close(eq);
        Ok(r)
    }

    /// Raise lower bounds implied by `lo <= hi + slack` until nothing moves.
    fn close(&mut self, eq: &Equation) {
        loop {
            let mut moved = false;
            for c in eq.order() {
                let (Some(lo), Some(hi)) = (self.bound(&c.lo), self.bound(&c.hi)) else { continue };
                let need = lo.lower() as i128 - c.slack as i128;
                if let Bound::AtLeast(l) = hi {
                    if need > l as i128 {
                        let i = self.slot(&c.hi).expect("present");
                        self.bounds[i].1 = Bound::AtLeast(need as u64);
                        moved = true;
                    }
                }
            }
            if !moved {
                return;
            }
        }
    }

    /// An order constraint no tuple of the box satisfies.
    pub fn violated<'e>(&self, eq: &'e Equation) -> Option<&'e crate::equation::OrderConstraint> {
        eq.order().iter().find(|c| match (self.bound(&c.lo), self.bound(&c.hi)) {
            (Some(lo), Some(Bound::Fixed(h))) => !c.holds(lo.lower(), h),
            _ => false,
        })
    }

    /// Largest value `var` can take, if a fixed variable above it in the
    /// order caps it.
    pub fn upper_bound(&self, eq: &Equation, var: &Var) -> Option<u64> {
        eq.order()
            .iter()
            .filter(|c| &c.lo == var)
            .filter_map(|c| match self.bound(&c.hi) {
                Some(Bound::Fixed(h)) => Some((h as i128 + c.slack as i128).max(0) as u64),
                _ => None,
            })
            .min()
    }

    /// The single tuple, once every variable is fixed.
    pub fn point(&self) -> Option<Assignment> {
        self.bounds
            .iter()
            .map(|(v, b)| match b {
                Bound::Fixed(x) => Some((v.clone(), *x)),
                Bound::AtLeast(_) => None,
            })
            .collect()
    }

    /// Whether `a` lies in the box (order constraints not checked).
    pub fn contains(&self, a: &Assignment) -> bool {
        self.bounds.iter().all(|(v, b)| match (b, a.get(v)) {
            (Bound::Fixed(x), Some(y)) => x == y,
            (Bound::AtLeast(l), Some(y)) => y >= l,
            _ => false,
        })
    }

    /// The equation whose non-negative solutions are the solutions of `eq`
    /// in this box: fixed variables substituted, the others shifted by
    /// their lower bounds.
    pub fn equation(&self, eq: &Equation) -> Result<Equation> {
        let mut out = eq.clone();
        for (v, b) in &self.bounds {
            out = match *b {
                Bound::Fixed(x) => fix(&out, v, x)?,
                Bound::AtLeast(0) => out,
                Bound::AtLeast(l) => shift(&out, v, l)?,
            };
        }
        Ok(out)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bounds.iter().map(|(v, b)| format!("{v}{b}")).collect();
        f.write_str(&parts.join(" "))
    }
}
