//! Complete solution of an equation, backed by a proof tree.
//!
//! The driver follows the usual routine: find the solutions in a small box,
//! guess that they are all, then prove each exponent bounded by showing the
//! shifted equation has no solutions modulo some `m`. Bounded variables are
//! split into their finitely many values and each value is handled the same
//! way, until every branch ends in a certificate, a single checked tuple, or
//! a contradiction with the order constraints.

mod region;

pub use region::{Bound, Region};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use log::{debug, info};
use rayon::prelude::*;

use crate::equation::{evaluate, exhaustive_solutions, shift, Assignment, Equation, SearchBox, Var};
use crate::error::Result;
use crate::modsearch::{find_certificate, CandidatePool, ModulusCertificate, Search, SearchConfig, SearchFailure};

/// How a region is closed, or split further.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepKind {
    /// Children: `FixValue` for each value from the variable's lower bound
    /// up to `bound - 1`, then `Shift` to `bound`.
    CaseSplit { var: Var, bound: u64 },
    /// Single child resolving the region with `var = value`.
    FixValue { var: Var, value: u64 },
    /// Single child resolving the region with `var >= bound`.
    Shift { var: Var, bound: u64 },
    /// Leaf: the region's equation has no solutions modulo `m`.
    Certificate(ModulusCertificate),
    /// Leaf: every variable fixed; the tuple was evaluated.
    ExhaustiveCheck { solution: Option<Assignment> },
    /// Leaf: the fixed values contradict an order constraint.
    OrderInfeasible,
    /// Leaf left unresolved when the budget ran out.
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofStep {
    pub kind: StepKind,
    pub children: Vec<ProofStep>,
}

impl ProofStep {
    fn leaf(kind: StepKind) -> Self {
        ProofStep { kind, children: Vec::new() }
    }

    /// Nodes in depth-first order.
    pub fn walk(&self) -> Vec<&ProofStep> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }

    pub fn open_leaves(&self) -> usize {
        self.walk().iter().filter(|s| s.kind == StepKind::Open).count()
    }

    pub fn certificates(&self) -> Vec<&ModulusCertificate> {
        self.walk()
            .into_iter()
            .filter_map(|s| match &s.kind {
                StepKind::Certificate(c) => Some(c),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub steps: u64,
    pub attempts: u64,
    pub certificates: usize,
    pub nodes: usize,
    pub pool_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub equation: Equation,
    /// Solutions met at the tree's leaves, in lexicographic tuple order.
    pub solutions: Vec<Assignment>,
    pub tree: ProofStep,
    pub stats: SolveStats,
}

impl SolveReport {
    /// No open leaves: the solution list is provably complete.
    pub fn is_complete(&self) -> bool {
        self.tree.open_leaves() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    /// Per-certificate search settings; its budget caps each attempt.
    pub search: SearchConfig,
    /// Steps allowed across all attempts.
    pub budget: u64,
    /// Shift targets overriding "largest observed exponent + 1".
    pub alpha0: BTreeMap<Var, u64>,
    /// Order in which variables are bounded; by base size when `None`.
    pub var_order: Option<Vec<Var>>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            search: SearchConfig { budget: 400, ..SearchConfig::default() },
            budget: 100_000,
            alpha0: BTreeMap::new(),
            var_order: None,
        }
    }
}

/// Certificate that every solution of `eq` has `α_var < alpha0`.
pub fn bound_exponent(eq: &Equation, var: &Var, alpha0: u64, pool: &CandidatePool, config: &SearchConfig) -> Result<Search> {
    find_certificate(&shift(eq, var, alpha0)?, pool, config)
}

struct Solver<'a> {
    eq: &'a Equation,
    pool: &'a CandidatePool,
    config: &'a SolveConfig,
    known: Vec<Assignment>,
    order: Vec<Var>,
    steps: u64,
    attempts: u64,
    cache: HashMap<String, Option<ModulusCertificate>>,
    found: BTreeMap<Vec<u64>, Assignment>,
    depth_limit: usize,
}

/// Solve `eq` completely, or as far as the budget allows.
///
/// The returned report is partial exactly when its tree has open leaves;
/// its solution list is then only what the closed branches found.
pub fn principal_solve(eq: &Equation, initial: &SearchBox, pool: &CandidatePool, config: &SolveConfig) -> Result<SolveReport> {
    let known = exhaustive_solutions(eq, initial)?;
    info!("{} solutions in the initial box", known.len());
    let mut order = match &config.var_order {
        Some(o) => o.clone(),
        None => eq.variables(),
    };
    if config.var_order.is_none() {
        // Stable: ties keep declaration order.
        order.sort_by_key(|v| eq.base_of(v).unwrap_or(0));
    }
    let mut solver = Solver {
        eq,
        pool,
        config,
        known,
        order,
        steps: 0,
        attempts: 0,
        cache: HashMap::new(),
        found: BTreeMap::new(),
        depth_limit: 8 * eq.variables().len() + 16,
    };
    let tree = solver.resolve(&Region::whole(eq), 0)?;
    let solutions = solver.found.values().cloned().collect();
    let stats = SolveStats {
        steps: solver.steps,
        attempts: solver.attempts,
        certificates: tree.certificates().len(),
        nodes: tree.walk().len(),
        pool_size: pool.len(),
    };
    Ok(SolveReport { equation: eq.clone(), solutions, tree, stats })
}

impl Solver<'_> {
    fn certify(&mut self, region: &Region) -> Result<Option<ModulusCertificate>> {
        let derived = region.equation(self.eq)?;
        let key = derived.to_string();
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let remaining = self.config.budget.saturating_sub(self.steps);
        if remaining == 0 {
            return Ok(None);
        }
        let search = SearchConfig { budget: self.config.search.budget.min(remaining), ..self.config.search };
        self.attempts += 1;
        let out = find_certificate(&derived, self.pool, &search)?;
        self.steps += out.steps();
        let cert = match out {
            Search::Found { certificate, .. } => Some(certificate),
            Search::Failed(SearchFailure { reason, .. }) => {
                debug!("no certificate for {region}: {reason}");
                None
            }
        };
        // A budget cut is not a verdict on the region; only remember it
        // when the full allowance was available.
        if cert.is_some() || search.budget == self.config.search.budget {
            self.cache.insert(key, cert.clone());
        }
        Ok(cert)
    }

    fn known_in(&self, region: &Region) -> Vec<&Assignment> {
        self.known.iter().filter(|a| region.contains(a)).collect()
    }

    fn resolve(&mut self, region: &Region, depth: usize) -> Result<ProofStep> {
        if region.violated(self.eq).is_some() {
            return Ok(ProofStep::leaf(StepKind::OrderInfeasible));
        }
        if let Some(point) = region.point() {
            let value = evaluate(self.eq, &point)?;
            let solution = (value == 0.into() && self.eq.respects_order(&point)).then_some(point);
            if let Some(s) = &solution {
                self.found.insert(self.eq.tuple(s), s.clone());
            }
            return Ok(ProofStep::leaf(StepKind::ExhaustiveCheck { solution }));
        }
        if depth > self.depth_limit || self.steps >= self.config.budget {
            return Ok(ProofStep::leaf(StepKind::Open));
        }
        // Values capped by a fixed variable higher in the order.
        for v in region.free() {
            if let Some(u) = region.upper_bound(self.eq, &v) {
                return self.split(region, &v, u + 1, depth, |s, r, d| s.resolve(r, d));
            }
        }
        let known: Vec<Assignment> = self.known_in(region).into_iter().cloned().collect();
        if known.is_empty() {
            if let Some(c) = self.certify(region)? {
                return Ok(ProofStep::leaf(StepKind::Certificate(c)));
            }
        }
        let targets = self.targets(region, &known);
        let free: Vec<Var> = self.order.iter().filter(|v| region.free().contains(v)).cloned().collect();

        if free.len() > 1 {
            let mut all = region.clone();
            for v in &free {
                let b = targets[v].max(all.bound(v).expect("free").lower());
                all = all.raise(self.eq, v, b)?;
            }
            if let Some(c) = self.certify(&all)? {
                return self.chain(region, &free, &targets, c, depth);
            }
        }
        for v in &free {
            let above = region.raise(self.eq, v, targets[v])?;
            if let Some(c) = self.certify(&above)? {
                return self.split(region, v, targets[v], depth, move |_, _, _| {
                    Ok(ProofStep::leaf(StepKind::Certificate(c.clone())))
                });
            }
        }
        Ok(ProofStep::leaf(StepKind::Open))
    }

    /// Per free variable, where the shifted part should start.
    fn targets(&self, region: &Region, known: &[Assignment]) -> BTreeMap<Var, u64> {
        region
            .free()
            .into_iter()
            .map(|v| {
                let lower = region.bound(&v).expect("free").lower();
                let seen = known.iter().map(|a| a[&v] + 1).max().unwrap_or(lower + 1);
                let t = self.config.alpha0.get(&v).copied().unwrap_or(seen);
                (v, t.max(lower))
            })
            .collect()
    }

    /// `var` below `bound` value by value, then `var >= bound` handled by
    /// `above`.
    fn split(
        &mut self,
        region: &Region,
        var: &Var,
        bound: u64,
        depth: usize,
        above: impl FnOnce(&mut Self, &Region, usize) -> Result<ProofStep>,
    ) -> Result<ProofStep> {
        let lower = region.bound(var).expect("free").lower();
        let mut children = Vec::new();
        for value in lower..bound {
            let sub = region.fix(self.eq, var, value)?;
            let child = self.resolve(&sub, depth + 1)?;
            children.push(ProofStep { kind: StepKind::FixValue { var: var.clone(), value }, children: vec![child] });
        }
        let sub = region.raise(self.eq, var, bound)?;
        let child = above(self, &sub, depth + 1)?;
        children.push(ProofStep { kind: StepKind::Shift { var: var.clone(), bound }, children: vec![child] });
        Ok(ProofStep { kind: StepKind::CaseSplit { var: var.clone(), bound }, children })
    }

    /// Splits on each variable in turn; the branch where all of them sit at
    /// or above their targets is the certified one.
    fn chain(
        &mut self,
        region: &Region,
        vars: &[Var],
        targets: &BTreeMap<Var, u64>,
        cert: ModulusCertificate,
        depth: usize,
    ) -> Result<ProofStep> {
        let Some((v, rest)) = vars.split_first() else {
            if region.equation(self.eq)? == cert.equation {
                return Ok(ProofStep::leaf(StepKind::Certificate(cert)));
            }
            return self.resolve(region, depth);
        };
        if region.violated(self.eq).is_some() {
            return Ok(ProofStep::leaf(StepKind::OrderInfeasible));
        }
        let lower = region.bound(v).expect("free").lower();
        if lower >= targets[v] {
            return self.chain(region, rest, targets, cert, depth);
        }
        let rest = rest.to_vec();
        self.split(region, v, targets[v], depth, move |s, r, d| s.chain(r, &rest, targets, cert, d))
    }
}

/// Outcome of one member of [`min_exponent_survey`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyVerdict {
    pub equation: Equation,
    pub result: Search,
}

impl SurveyVerdict {
    pub fn proven(&self) -> bool {
        self.result.certificate().is_some()
    }
}

/// For each equation, try to certify that some exponent is at most
/// `bound`, by ruling out the equation with every exponent shifted by
/// `bound + 1`. Equations are handled in parallel; results keep input
/// order.
pub fn min_exponent_survey(eqs: &[Equation], bound: u64, pool: &CandidatePool, config: &SearchConfig) -> Result<Vec<SurveyVerdict>> {
    eqs.par_iter()
        .map(|eq| {
            let mut shifted = eq.clone();
            for v in eq.variables() {
                shifted = shift(&shifted, &v, bound + 1)?;
            }
            let result = find_certificate(&shifted, pool, config)?;
            Ok(SurveyVerdict { equation: eq.clone(), result })
        })
        .collect()
}

/// Distinct tuples of `report`'s solutions.
pub fn solution_tuples(report: &SolveReport) -> BTreeSet<Vec<u64>> {
    report.solutions.iter().map(|a| report.equation.tuple(a)).collect()
}
