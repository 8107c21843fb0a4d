use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;

use super::{parse, CertificateDocument, DocStatus, FlatKind};
use crate::congruence::replay_trace;
use crate::equation::{evaluate, fix, shift, Equation, Var};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// Offending step, or `None` for document-level problems.
    pub step: Option<usize>,
    pub reason: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(n) => write!(f, "step {n}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// `complete` is false for documents with open branches: the
    /// solutions are then correct but not proven exhaustive.
    Accepted { complete: bool },
    Rejected(Rejection),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted { .. })
    }
}

/// Parse then verify. Parse failures are errors, not verdicts.
pub fn verify(text: &str) -> Result<Verdict> {
    Ok(verify_document(&parse(text)?))
}

fn reject(step: Option<usize>, reason: impl Into<String>) -> Verdict {
    Verdict::Rejected(Rejection { step, reason: reason.into() })
}

/// Per variable: fixed value, or a lower bound.
#[derive(Debug, Clone)]
struct Cell {
    var: Var,
    fixed: Option<u64>,
    lower: u64,
}

#[derive(Debug, Clone)]
struct Boxed {
    cells: Vec<Cell>,
}

impl Boxed {
    fn whole(eq: &Equation) -> Self {
        let mut b = Boxed { cells: eq.variables().into_iter().map(|var| Cell { var, fixed: None, lower: 0 }).collect() };
        b.propagate(eq);
        b
    }

    fn cell(&self, v: &Var) -> Option<&Cell> {
        self.cells.iter().find(|c| &c.var == v)
    }

    fn cell_mut(&mut self, v: &Var) -> &mut Cell {
        self.cells.iter_mut().find(|c| &c.var == v).expect("known variable")
    }

    /// `hi >= lo - slack` for each free `hi`, until stable.
    fn propagate(&mut self, eq: &Equation) {
        let mut moved = true;
        while moved {
            moved = false;
            for c in eq.order() {
                let (Some(lo), Some(hi)) = (self.cell(&c.lo), self.cell(&c.hi)) else { continue };
                let need = lo.lower as i128 - c.slack as i128;
                if hi.fixed.is_none() && need > hi.lower as i128 {
                    self.cell_mut(&c.hi).lower = need as u64;
                    moved = true;
                }
            }
        }
    }

    fn infeasible(&self, eq: &Equation) -> bool {
        eq.order().iter().any(|c| match (self.cell(&c.lo), self.cell(&c.hi)) {
            (Some(lo), Some(Cell { fixed: Some(h), .. })) => lo.lower as i128 > *h as i128 + c.slack as i128,
            _ => false,
        })
    }

    fn point(&self) -> Option<Vec<u64>> {
        self.cells.iter().map(|c| c.fixed).collect()
    }

    fn derived(&self, eq: &Equation) -> Result<Equation> {
        let mut out = eq.clone();
        for c in &self.cells {
            out = match (c.fixed, c.lower) {
                (Some(x), _) => fix(&out, &c.var, x)?,
                (None, 0) => out,
                (None, l) => shift(&out, &c.var, l)?,
            };
        }
        Ok(out)
    }
}

struct Walk<'a> {
    doc: &'a CertificateDocument,
    children: Vec<Vec<usize>>,
    visited: usize,
    found: BTreeSet<Vec<u64>>,
    open: usize,
    certificates: Vec<usize>,
}

impl Walk<'_> {
    /// Checks step `n` as covering region `b`. Returns a rejection reason.
    fn visit(&mut self, n: usize, b: &Boxed) -> std::result::Result<(), Rejection> {
        let fail = |reason: String| Rejection { step: Some(n), reason };
        if n != self.visited {
            return Err(fail("steps are not in depth-first order".into()));
        }
        self.visited += 1;
        let eq = &self.doc.equation;
        let kids = self.children[n].clone();
        let leaf = |kids: &[usize]| {
            if kids.is_empty() {
                Ok(())
            } else {
                Err(fail("leaf step has children".into()))
            }
        };
        match &self.doc.steps[n].kind {
            FlatKind::CaseSplit { var, bound } => {
                let cell = b.cell(var).ok_or_else(|| fail(format!("unknown variable `{var}`")))?;
                if cell.fixed.is_some() {
                    return Err(fail(format!("`{var}` is already fixed")));
                }
                if *bound < cell.lower {
                    return Err(fail(format!("bound {bound} is below the lower bound {} of `{var}`", cell.lower)));
                }
                let lower = cell.lower;
                if kids.len() as u64 != bound - lower + 1 {
                    return Err(fail(format!("case split needs {} branches, found {}", bound - lower + 1, kids.len())));
                }
                for (k, &child) in kids.iter().enumerate() {
                    let mut sub = b.clone();
                    let expected = if (k as u64) < bound - lower {
                        let value = lower + k as u64;
                        sub.cell_mut(var).fixed = Some(value);
                        sub.cell_mut(var).lower = value;
                        FlatKind::FixValue { var: var.clone(), value }
                    } else {
                        sub.cell_mut(var).lower = *bound;
                        FlatKind::Shift { var: var.clone(), bound: *bound }
                    };
                    sub.propagate(eq);
                    if self.doc.steps[child].kind != expected {
                        return Err(Rejection { step: Some(child), reason: "branch does not match its case split".into() });
                    }
                    if child != self.visited {
                        return Err(Rejection { step: Some(child), reason: "steps are not in depth-first order".into() });
                    }
                    self.visited += 1;
                    let grand = &self.children[child];
                    if grand.len() != 1 {
                        return Err(Rejection { step: Some(child), reason: "branch must have exactly one child".into() });
                    }
                    let g = grand[0];
                    self.visit(g, &sub)?;
                }
                Ok(())
            }
            FlatKind::FixValue { .. } | FlatKind::Shift { .. } => Err(fail("branch step outside a case split".into())),
            FlatKind::Certificate { equation, .. } => {
                leaf(&kids)?;
                let derived = b.derived(eq).map_err(|e| fail(e.to_string()))?;
                if &derived != equation {
                    return Err(fail(format!("certificate is for `{}`, the branch needs `{}`", equation, derived)));
                }
                self.certificates.push(n);
                Ok(())
            }
            FlatKind::ExhaustiveCheck { solution } => {
                leaf(&kids)?;
                let point = b.point().ok_or_else(|| fail("exhaustive check on a branch with free variables".into()))?;
                let a = eq.assignment_from_tuple(&point).map_err(|e| fail(e.to_string()))?;
                let zero = evaluate(eq, &a).map_err(|e| fail(e.to_string()))?.is_zero() && eq.respects_order(&a);
                match (solution, zero) {
                    (Some(s), true) if *s == point => {
                        self.found.insert(point);
                        Ok(())
                    }
                    (Some(_), true) => Err(fail("recorded tuple differs from the branch point".into())),
                    (Some(_), false) => Err(fail("solution does not evaluate to zero".into())),
                    (None, true) => Err(fail(format!("branch point {point:?} is a solution but is not recorded"))),
                    (None, false) => Ok(()),
                }
            }
            FlatKind::OrderInfeasible => {
                leaf(&kids)?;
                if b.infeasible(eq) {
                    Ok(())
                } else {
                    Err(fail("branch satisfies the order constraints".into()))
                }
            }
            FlatKind::Open => {
                leaf(&kids)?;
                self.open += 1;
                Ok(())
            }
        }
    }
}

/// Check a parsed document: the tree covers every exponent tuple, each
/// certificate replays to UNSAT on exactly its branch's equation, and the
/// listed solutions are precisely those met at exhaustive leaves.
pub fn verify_document(doc: &CertificateDocument) -> Verdict {
    let eq = &doc.equation;
    for t in &doc.solutions {
        let Ok(a) = eq.assignment_from_tuple(t) else {
            return reject(None, format!("solution {t:?} has the wrong length"));
        };
        match evaluate(eq, &a) {
            Ok(v) if v.is_zero() && eq.respects_order(&a) => {}
            Ok(v) if v.is_zero() => return reject(None, format!("solution {t:?} violates the order constraints")),
            _ => return reject(None, format!("solution {t:?}: solution does not evaluate to zero")),
        }
    }
    if doc.solutions.windows(2).any(|w| w[0] >= w[1]) {
        return reject(None, "solutions are not strictly ascending");
    }
    if doc.steps.is_empty() {
        return reject(None, "no steps");
    }
    let mut children = vec![Vec::new(); doc.steps.len()];
    for (n, s) in doc.steps.iter().enumerate() {
        match s.parent {
            None if n == 0 => {}
            None => return reject(Some(n), "only the first step may be the root"),
            Some(p) if p < n => children[p].push(n),
            Some(_) => return reject(Some(n), "parent must precede its child"),
        }
    }
    let mut walk = Walk { doc, children, visited: 0, found: BTreeSet::new(), open: 0, certificates: Vec::new() };
    if let Err(r) = walk.visit(0, &Boxed::whole(eq)) {
        return Verdict::Rejected(r);
    }
    if walk.visited != doc.steps.len() {
        return reject(Some(walk.visited), "step not reachable from the root");
    }
    let bad = walk.certificates.par_iter().find_map_first(|&n| {
        let FlatKind::Certificate { equation, trace } = &doc.steps[n].kind else { unreachable!() };
        if !trace.is_unsat() {
            return Some(Rejection { step: Some(n), reason: "certificate trace is not UNSAT".into() });
        }
        replay_trace(equation, trace)
            .err()
            .map(|e| Rejection { step: Some(n), reason: format!("trace replay failed at factor step {}: {}", e.step, e.reason) })
    });
    if let Some(r) = bad {
        return Verdict::Rejected(r);
    }
    let listed: BTreeSet<Vec<u64>> = doc.solutions.iter().cloned().collect();
    if listed != walk.found {
        return reject(None, "solution list differs from the solutions found in the tree");
    }
    match (doc.status, walk.open) {
        (DocStatus::Complete, 0) => Verdict::Accepted { complete: true },
        (DocStatus::Complete, k) => reject(None, format!("marked complete with {k} open branches")),
        (DocStatus::Partial, 0) => reject(None, "marked partial but every branch is closed"),
        (DocStatus::Partial, _) => Verdict::Accepted { complete: false },
    }
}
