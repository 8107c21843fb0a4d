use std::collections::BTreeSet;

use super::{serialize, CertificateDocument, DocStatus, FlatKind, FlatStep, VERSION};
use crate::congruence::{EliminationTrace, ResidueConstraint, TraceStatus, TraceStep};
use crate::equation::{Equation, Var};
use crate::error::{Error, Result};
use crate::ntheory::PrimePower;

struct Lines<'a> {
    lines: Vec<&'a str>,
    at: usize,
}

impl<'a> Lines<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.at).copied()
    }

    fn next(&mut self) -> Result<&'a str> {
        let l = self.peek().ok_or_else(|| self.err("unexpected end of document"))?;
        self.at += 1;
        Ok(l)
    }

    /// 1-based number of the line last returned by `next`.
    fn line(&self) -> usize {
        self.at.max(1)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.at + 1, column: 1, message: message.into() }
    }

    fn here(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line(), column: 1, message: message.into() }
    }

    fn expect_prefix(&mut self, prefix: &str) -> Result<&'a str> {
        let l = self.next()?;
        l.strip_prefix(prefix).ok_or_else(|| self.here(format!("expected `{prefix}`")))
    }

    /// An equation line followed by its `order:` lines.
    fn equation(&mut self, prefix: &str) -> Result<Equation> {
        let first = self.line() + 1;
        let mut text = self.expect_prefix(prefix)?.to_string();
        while let Some(l) = self.peek() {
            if !l.starts_with("order:") {
                break;
            }
            text.push('\n');
            text.push_str(l);
            self.at += 1;
        }
        text.parse().map_err(|e| match e {
            Error::Parse { line, column, message } => Error::Parse { line: first + line - 1, column, message },
            other => Error::Parse { line: first, column: 1, message: other.to_string() },
        })
    }
}

fn number<T: std::str::FromStr>(text: &str) -> Option<T> {
    // Digits only: no signs, no whitespace.
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

fn tuple(text: &str) -> Option<Vec<u64>> {
    let inner = text.strip_prefix('(')?.strip_suffix(')')?;
    if inner.is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(number).collect()
}

fn set(text: &str) -> Option<BTreeSet<u64>> {
    let inner = text.strip_prefix('{')?.strip_suffix('}')?;
    if inner.is_empty() {
        return Some(BTreeSet::new());
    }
    inner.split(',').map(number).collect()
}

fn prime_power(text: &str) -> Option<PrimePower> {
    let (p, e) = match text.split_once('^') {
        Some((p, e)) => (number(p)?, number(e)?),
        None => (number(text)?, 1),
    };
    PrimePower::new(p, e).ok()
}

fn constraint(text: &str) -> Option<ResidueConstraint> {
    let rest = text.strip_prefix("var ")?;
    let (name, rest) = rest.split_once(": small=")?;
    let (small, rest) = rest.split_once(" tail ")?;
    let (tail, rest) = rest.split_once(" mod ")?;
    let (modulus, residues) = rest.split_once(" residues=")?;
    Some(ResidueConstraint {
        var: Var::new(name).ok()?,
        tail: number(tail)?,
        small: set(small)?,
        modulus: number(modulus)?,
        residues: set(residues)?,
    })
}

/// `key=value` fields after the step header.
fn fields<'a>(text: &'a str, keys: &[&str]) -> Option<Vec<&'a str>> {
    let parts: Vec<&str> = if text.is_empty() { Vec::new() } else { text.split(' ').collect() };
    if parts.len() != keys.len() {
        return None;
    }
    parts.iter().zip(keys).map(|(p, k)| p.strip_prefix(k)?.strip_prefix('=')).collect()
}

fn step(lines: &mut Lines, n: usize) -> Result<FlatStep> {
    let header = lines.expect_prefix(&format!("step {n} "))?;
    let (label, rest) = header.split_once(": parent=").ok_or_else(|| lines.here("malformed step header"))?;
    let (parent, rest) = rest.split_once(' ').unwrap_or((rest, ""));
    let parent = match parent {
        "-" => None,
        p => Some(number::<usize>(p).ok_or_else(|| lines.here("bad parent index"))?),
    };
    let bad = |lines: &Lines| lines.here(format!("malformed `{label}` step"));
    let var = |s: &str, lines: &Lines| Var::new(s).map_err(|_| bad(lines));
    let num = |s: &str, lines: &Lines| number::<u64>(s).ok_or_else(|| bad(lines));
    let kind = match label {
        "case-split" | "shift" => {
            let f = fields(rest, &["var", "bound"]).ok_or_else(|| bad(lines))?;
            let (var, bound) = (var(f[0], lines)?, num(f[1], lines)?);
            if label == "shift" {
                FlatKind::Shift { var, bound }
            } else {
                FlatKind::CaseSplit { var, bound }
            }
        }
        "fix-value" => {
            let f = fields(rest, &["var", "value"]).ok_or_else(|| bad(lines))?;
            FlatKind::FixValue { var: var(f[0], lines)?, value: num(f[1], lines)? }
        }
        "exhaustive" => {
            let f = fields(rest, &["solution"]).ok_or_else(|| bad(lines))?;
            let solution = match f[0] {
                "none" => None,
                t => Some(tuple(t).ok_or_else(|| bad(lines))?),
            };
            FlatKind::ExhaustiveCheck { solution }
        }
        "order-infeasible" | "open" | "certificate" if !rest.is_empty() => return Err(bad(lines)),
        "order-infeasible" => FlatKind::OrderInfeasible,
        "open" => FlatKind::Open,
        "certificate" => {
            let equation = lines.equation("eq: ")?;
            let n_vars = equation.variables().len();
            let mut steps = Vec::new();
            while let Some(l) = lines.peek() {
                let Some(f) = l.strip_prefix("factor ") else { break };
                lines.at += 1;
                let factor = f
                    .strip_suffix(':')
                    .and_then(prime_power)
                    .ok_or_else(|| lines.here("bad factor"))?;
                let mut constraints = Vec::with_capacity(n_vars);
                for _ in 0..n_vars {
                    let l = lines.next()?;
                    constraints.push(constraint(l).ok_or_else(|| lines.here("bad constraint line"))?);
                }
                steps.push(TraceStep { factor, constraints });
            }
            FlatKind::Certificate { equation, trace: EliminationTrace { steps, status: TraceStatus::Unsat } }
        }
        other => return Err(lines.here(format!("unknown step kind `{other}`"))),
    };
    Ok(FlatStep { parent, kind })
}

/// Read a document. Text that is well formed but not in canonical form is
/// rejected, so accepted documents are byte-for-byte reproducible.
pub fn parse(text: &str) -> Result<CertificateDocument> {
    let body = text.strip_suffix('\n').ok_or_else(|| Error::parse(1, 1, "document must end with a newline"))?;
    let mut lines = Lines { lines: body.split('\n').collect(), at: 0 };
    let version: u32 = number(lines.expect_prefix("edcert ")?).ok_or_else(|| lines.here("bad version"))?;
    if version != VERSION {
        return Err(lines.here(format!("unsupported version {version}")));
    }
    let status = match lines.expect_prefix("status: ")? {
        "complete" => DocStatus::Complete,
        "partial" => DocStatus::Partial,
        _ => return Err(lines.here("status must be `complete` or `partial`")),
    };
    let equation = lines.equation("equation: ")?;
    if lines.next()? != "solutions:" {
        return Err(lines.here("expected `solutions:`"));
    }
    let mut solutions = Vec::new();
    while let Some(l) = lines.peek() {
        if !l.starts_with('(') {
            break;
        }
        lines.at += 1;
        solutions.push(tuple(l).ok_or_else(|| lines.here("bad solution tuple"))?);
    }
    let mut steps = Vec::new();
    while lines.peek().is_some_and(|l| l.starts_with("step ")) {
        steps.push(step(&mut lines, steps.len())?);
    }
    if lines.next()? != "end" {
        return Err(lines.here("expected `end`"));
    }
    if lines.peek().is_some() {
        return Err(lines.err("text after `end`"));
    }
    let doc = CertificateDocument { version, status, equation, solutions, steps };
    let canonical = serialize(&doc);
    if canonical != text {
        let shorter = canonical.lines().count().min(text.lines().count());
        let line = canonical.lines().zip(text.lines()).position(|(a, b)| a != b).unwrap_or(shorter) + 1;
        return Err(Error::parse(line, 1, "not in canonical form"));
    }
    Ok(doc)
}
