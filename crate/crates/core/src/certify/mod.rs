//! Text documents for proof trees and modulus certificates, and a verifier
//! that re-checks them without any search.
//!
//! A document is line oriented:
//!
//! ```text
//! edcert 1
//! status: complete
//! equation: 2*3^x + 4*5^y = 1
//! solutions:
//! step 0 certificate: parent=-
//! eq: 2*3^x + 4*5^y = 1
//! factor 2:
//! var x: small={} tail 0 mod 1 residues={}
//! var y: small={} tail 0 mod 1 residues={}
//! end
//! ```
//!
//! Steps are listed in depth-first order with explicit parents. A
//! certificate step carries its equation and the full elimination trace,
//! one `factor` block per processed prime power, in processing order since
//! each block records the cumulative projection. Formatting is canonical:
//! [`parse`] rejects any text that [`serialize`] would not produce.

mod parse;
mod verify;

pub use parse::parse;
pub use verify::{verify, verify_document, Rejection, Verdict};

use std::fmt::Write as _;

use crate::congruence::{EliminationTrace, TraceStatus};
use crate::equation::{Equation, Var};
use crate::modsearch::ModulusCertificate;
use crate::strategy::{ProofStep, SolveReport, StepKind};

/// Format version written in the header.
pub const VERSION: u32 = 1;

/// Conventional file extension.
pub const EXTENSION: &str = "edcert";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocStatus {
    /// Every branch closed.
    Complete,
    /// Some branches left open.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlatKind {
    CaseSplit { var: Var, bound: u64 },
    FixValue { var: Var, value: u64 },
    Shift { var: Var, bound: u64 },
    Certificate { equation: Equation, trace: EliminationTrace },
    ExhaustiveCheck { solution: Option<Vec<u64>> },
    OrderInfeasible,
    Open,
}

impl FlatKind {
    fn label(&self) -> &'static str {
        match self {
            FlatKind::CaseSplit { .. } => "case-split",
            FlatKind::FixValue { .. } => "fix-value",
            FlatKind::Shift { .. } => "shift",
            FlatKind::Certificate { .. } => "certificate",
            FlatKind::ExhaustiveCheck { .. } => "exhaustive",
            FlatKind::OrderInfeasible => "order-infeasible",
            FlatKind::Open => "open",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatStep {
    pub parent: Option<usize>,
    pub kind: FlatKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateDocument {
    pub version: u32,
    pub status: DocStatus,
    pub equation: Equation,
    /// Tuples in declaration order, ascending.
    pub solutions: Vec<Vec<u64>>,
    pub steps: Vec<FlatStep>,
}

impl CertificateDocument {
    pub fn from_report(report: &SolveReport) -> Self {
        let mut steps = Vec::new();
        flatten(&report.equation, &report.tree, None, &mut steps);
        let mut solutions: Vec<Vec<u64>> = report.solutions.iter().map(|a| report.equation.tuple(a)).collect();
        solutions.sort();
        solutions.dedup();
        CertificateDocument {
            version: VERSION,
            status: if report.is_complete() { DocStatus::Complete } else { DocStatus::Partial },
            equation: report.equation.clone(),
            solutions,
            steps,
        }
    }

    /// A one-step document: the certificate's equation has no solutions.
    pub fn from_certificate(cert: &ModulusCertificate) -> Self {
        CertificateDocument {
            version: VERSION,
            status: DocStatus::Complete,
            equation: cert.equation.clone(),
            solutions: Vec::new(),
            steps: vec![FlatStep {
                parent: None,
                kind: FlatKind::Certificate { equation: cert.equation.clone(), trace: cert.trace.clone() },
            }],
        }
    }
}

fn flatten(eq: &Equation, step: &ProofStep, parent: Option<usize>, out: &mut Vec<FlatStep>) {
    let kind = match &step.kind {
        StepKind::CaseSplit { var, bound } => FlatKind::CaseSplit { var: var.clone(), bound: *bound },
        StepKind::FixValue { var, value } => FlatKind::FixValue { var: var.clone(), value: *value },
        StepKind::Shift { var, bound } => FlatKind::Shift { var: var.clone(), bound: *bound },
        StepKind::Certificate(c) => FlatKind::Certificate { equation: c.equation.clone(), trace: c.trace.clone() },
        StepKind::ExhaustiveCheck { solution } => {
            FlatKind::ExhaustiveCheck { solution: solution.as_ref().map(|a| eq.tuple(a)) }
        }
        StepKind::OrderInfeasible => FlatKind::OrderInfeasible,
        StepKind::Open => FlatKind::Open,
    };
    let me = out.len();
    out.push(FlatStep { parent, kind });
    for c in &step.children {
        flatten(eq, c, Some(me), out);
    }
}

fn tuple_text(t: &[u64]) -> String {
    let parts: Vec<String> = t.iter().map(u64::to_string).collect();
    format!("({})", parts.join(","))
}

/// Canonical text of a document.
pub fn serialize(doc: &CertificateDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "edcert {}", doc.version);
    let status = match doc.status {
        DocStatus::Complete => "complete",
        DocStatus::Partial => "partial",
    };
    let _ = writeln!(s, "status: {status}");
    let _ = writeln!(s, "equation: {}", doc.equation.equation_line());
    for l in doc.equation.order_lines() {
        let _ = writeln!(s, "{l}");
    }
    let _ = writeln!(s, "solutions:");
    for t in &doc.solutions {
        let _ = writeln!(s, "{}", tuple_text(t));
    }
    for (n, step) in doc.steps.iter().enumerate() {
        let parent = step.parent.map_or("-".to_string(), |p| p.to_string());
        let _ = write!(s, "step {n} {}: parent={parent}", step.kind.label());
        match &step.kind {
            FlatKind::CaseSplit { var, bound } | FlatKind::Shift { var, bound } => {
                let _ = writeln!(s, " var={var} bound={bound}");
            }
            FlatKind::FixValue { var, value } => {
                let _ = writeln!(s, " var={var} value={value}");
            }
            FlatKind::ExhaustiveCheck { solution } => {
                let sol = solution.as_ref().map_or("none".to_string(), |t| tuple_text(t));
                let _ = writeln!(s, " solution={sol}");
            }
            FlatKind::Certificate { equation, trace } => {
                s.push('\n');
                let _ = writeln!(s, "eq: {}", equation.equation_line());
                for l in equation.order_lines() {
                    let _ = writeln!(s, "{l}");
                }
                for t in &trace.steps {
                    let _ = writeln!(s, "factor {}:", t.factor);
                    for c in &t.constraints {
                        let _ = writeln!(s, "{c}");
                    }
                }
                debug_assert_eq!(trace.status, TraceStatus::Unsat);
            }
            FlatKind::OrderInfeasible | FlatKind::Open => s.push('\n'),
        }
    }
    s.push_str("end\n");
    s
}
