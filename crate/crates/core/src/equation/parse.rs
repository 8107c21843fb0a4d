//! Text form of equations.
//!
//! ```text
//! equation := term (('+'|'-') term)* '=' integer
//! term     := [integer '*'] factor ('*' factor)* | integer
//! factor   := integer '^' identifier
//! order    := "order:" identifier ('<=' identifier)+
//! ```
//!
//! Whitespace is insignificant, `#` starts a comment, and order lines may
//! follow the equation line. A template's right-hand side may be an
//! identifier instead of an integer.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Equation, OrderConstraint, Power, Term, Var};
use crate::error::{Error, Result};

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Lexer { chars: src.chars().collect(), pos: 0, line, _src: src }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.pos + 1, msg)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(d) if d == c => {
                self.pos += 1;
                Ok(())
            }
            Some(d) => Err(self.err(format!("expected `{c}`, found `{d}`"))),
            None => Err(self.err(format!("expected `{c}`, found end of line"))),
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        Ok(digits.parse().expect("digits"))
    }

    fn ident(&mut self) -> Result<Var> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_lowercase() || self.chars[self.pos].is_ascii_digit())
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        Var::new(&name).map_err(|_| Error::parse(self.line, start + 1, format!("bad identifier `{name}`")))
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

fn parse_term(lx: &mut Lexer<'_>) -> Result<Term> {
    let lead = lx.integer()?;
    if lx.peek() == Some('^') {
        lx.pos += 1;
        let var = lx.ident()?;
        let base = base_u64(lx, &lead)?;
        let mut powers = vec![Power { base, var }];
        parse_more_factors(lx, &mut powers)?;
        return Ok(Term { coefficient: BigInt::one(), powers });
    }
    let mut powers = Vec::new();
    if lx.peek() == Some('*') {
        lx.pos += 1;
        let b = lx.integer()?;
        lx.expect('^')?;
        let var = lx.ident()?;
        powers.push(Power { base: base_u64(lx, &b)?, var });
        parse_more_factors(lx, &mut powers)?;
    }
    Ok(Term { coefficient: lead, powers })
}

fn parse_more_factors(lx: &mut Lexer<'_>, powers: &mut Vec<Power>) -> Result<()> {
    while lx.peek() == Some('*') {
        lx.pos += 1;
        let b = lx.integer()?;
        lx.expect('^')?;
        let var = lx.ident()?;
        powers.push(Power { base: base_u64(lx, &b)?, var });
    }
    Ok(())
}

fn base_u64(lx: &Lexer<'_>, b: &BigInt) -> Result<u64> {
    u64::try_from(b).map_err(|_| lx.err(format!("base {b} too large")))
}

/// Right-hand side of a parsed line: a number or a template symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Value(BigInt),
    Symbol(Var),
}

fn parse_equation_line(text: &str, line: usize) -> Result<(Vec<Term>, Rhs)> {
    let mut lx = Lexer::new(text, line);
    let mut terms = Vec::new();
    let mut negate = false;
    if lx.peek() == Some('-') {
        lx.pos += 1;
        negate = true;
    } else if lx.peek() == Some('+') {
        lx.pos += 1;
    }
    loop {
        let mut t = parse_term(&mut lx)?;
        if negate {
            t.coefficient = -t.coefficient;
        }
        if !(t.is_constant() && t.coefficient.is_zero()) {
            terms.push(t);
        }
        match lx.peek() {
            Some('+') => {
                lx.pos += 1;
                negate = false;
            }
            Some('-') => {
                lx.pos += 1;
                negate = true;
            }
            Some('=') => {
                lx.pos += 1;
                break;
            }
            Some(c) => return Err(lx.err(format!("unexpected `{c}`"))),
            None => return Err(lx.err("missing `=`")),
        }
    }
    let rhs = match lx.peek() {
        Some(c) if c.is_ascii_lowercase() => Rhs::Symbol(lx.ident()?),
        Some('-') => {
            lx.pos += 1;
            Rhs::Value(-lx.integer()?)
        }
        _ => Rhs::Value(lx.integer()?),
    };
    if !lx.at_end() {
        return Err(lx.err("trailing input after right-hand side"));
    }
    Ok((terms, rhs))
}

fn parse_order_line(text: &str, line: usize, offset: usize) -> Result<Vec<OrderConstraint>> {
    let mut lx = Lexer::new(text, line);
    let mut out = Vec::new();
    let mut prev = lx.ident().map_err(|e| shift_col(e, offset))?;
    loop {
        lx.expect('<').map_err(|e| shift_col(e, offset))?;
        lx.expect('=').map_err(|e| shift_col(e, offset))?;
        let next = lx.ident().map_err(|e| shift_col(e, offset))?;
        let mut slack = 0i64;
        if let Some(s @ ('+' | '-')) = lx.peek() {
            lx.pos += 1;
            let k = lx.integer().map_err(|e| shift_col(e, offset))?;
            let k = i64::try_from(&k).map_err(|_| shift_col(lx.err("slack too large"), offset))?;
            slack = if s == '+' { k } else { -k };
        }
        out.push(OrderConstraint { lo: prev, hi: next.clone(), slack });
        prev = next;
        if lx.at_end() {
            return Ok(out);
        }
    }
}

fn shift_col(e: Error, offset: usize) -> Error {
    match e {
        Error::Parse { line, column, message } => Error::Parse { line, column: column + offset, message },
        other => other,
    }
}

/// Parse an equation template: the right-hand side may be a symbol.
pub fn parse_template(src: &str) -> Result<(Equation, Rhs)> {
    let mut equation: Option<(Vec<Term>, Rhs)> = None;
    let mut order = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let trimmed = content.trim_start();
        if let Some(rest) = trimmed.strip_prefix("order:") {
            let offset = content.len() - rest.len();
            order.extend(parse_order_line(rest, line, offset)?);
        } else if equation.is_none() {
            equation = Some(parse_equation_line(content, line)?);
        } else {
            return Err(Error::parse(line, 1, "more than one equation"));
        }
    }
    let (terms, rhs) = equation.ok_or_else(|| Error::parse(1, 1, "no equation found"))?;
    if terms.is_empty() && matches!(rhs, Rhs::Symbol(_)) {
        return Err(Error::parse(1, 1, "empty left-hand side"));
    }
    let value = match &rhs {
        Rhs::Value(v) => v.clone(),
        Rhs::Symbol(_) => BigInt::zero(),
    };
    Ok((Equation::new(terms, value, order)?, rhs))
}

impl FromStr for Equation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match parse_template(s)? {
            (eq, Rhs::Value(_)) => Ok(eq),
            (_, Rhs::Symbol(v)) => Err(Error::parse(1, 1, format!("right-hand side `{v}` is not an integer"))),
        }
    }
}

impl Equation {
    /// Single-line `lhs = rhs` form, without order constraints.
    pub fn equation_line(&self) -> String {
        let mut s = String::new();
        if self.terms.is_empty() {
            s.push('0');
        }
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coefficient.is_negative();
            match (i, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            let c = t.coefficient.abs();
            if t.powers.is_empty() {
                s.push_str(&c.to_string());
                continue;
            }
            if !c.is_one() {
                s.push_str(&c.to_string());
                s.push('*');
            }
            let factors: Vec<String> = t.powers.iter().map(|p| format!("{}^{}", p.base, p.var)).collect();
            s.push_str(&factors.join("*"));
        }
        s.push_str(" = ");
        s.push_str(&self.rhs.to_string());
        s
    }

    /// One `order:` line per constraint.
    pub fn order_lines(&self) -> Vec<String> {
        self.order
            .iter()
            .map(|c| match c.slack {
                0 => format!("order: {} <= {}", c.lo, c.hi),
                k if k > 0 => format!("order: {} <= {} + {}", c.lo, c.hi, k),
                k => format!("order: {} <= {} - {}", c.lo, c.hi, -k),
            })
            .collect()
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.equation_line())?;
        for l in self.order_lines() {
            write!(f, "\n{l}")?;
        }
        Ok(())
    }
}
