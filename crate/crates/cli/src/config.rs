//! Run settings: defaults, a flat `key = value` file, then command-line
//! overrides.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use edsolve::congruence::{Limits, DEFAULT_CEILING};
use edsolve::equation::Var;
use edsolve::modsearch::{PowerCaps, SearchConfig};
use edsolve::ntheory::SmoothnessSpec;
use edsolve::strategy::SolveConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    /// Sieve bound for the candidate pool.
    pub bound: u64,
    pub smooth: Vec<u64>,
    /// Highest exponent per prime in the pool.
    pub caps: BTreeMap<u64, u32>,
    pub default_cap: u32,
    pub fanout: usize,
    /// Cells kept by the congruence engine.
    pub ceiling: usize,
    /// Steps across a whole solve.
    pub budget: u64,
    /// Steps per certificate attempt inside a solve.
    pub attempt_budget: u64,
    /// Steps for a standalone modulus search.
    pub search_budget: u64,
    /// 0 lets the thread pool decide.
    pub threads: usize,
    pub seed: u64,
    /// Exhaustive-search box for solve: exponents `0..box` per variable.
    pub search_box: u64,
    pub var_order: Option<Vec<Var>>,
    pub alpha0: BTreeMap<Var, u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bound: 20_000,
            smooth: vec![2, 3, 5],
            caps: [(2, 4), (3, 2)].into(),
            default_cap: 1,
            fanout: 64,
            ceiling: DEFAULT_CEILING,
            budget: 100_000,
            attempt_budget: 400,
            search_budget: 10_000,
            threads: 0,
            seed: 1,
            search_box: 15,
            var_order: None,
            alpha0: BTreeMap::new(),
        }
    }
}

fn positive<T: std::str::FromStr + PartialOrd + Default>(key: &str, value: &str) -> Result<T> {
    let v: T = value.parse().map_err(|_| anyhow!("`{key}` expects a positive integer, got `{value}`"))?;
    if v <= T::default() {
        bail!("`{key}` must be positive");
    }
    Ok(v)
}

pub fn parse_list(value: &str) -> Result<Vec<u64>> {
    value
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| anyhow!("bad list entry `{s}`")))
        .collect()
}

fn parse_caps(value: &str) -> Result<BTreeMap<u64, u32>> {
    let mut out = BTreeMap::new();
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (p, e) = part.split_once(':').ok_or_else(|| anyhow!("cap `{part}` is not `prime:exponent`"))?;
        out.insert(p.trim().parse()?, positive("caps", e.trim())?);
    }
    Ok(out)
}

fn parse_vars(value: &str) -> Result<Vec<Var>> {
    value.split(',').map(|s| Var::new(s.trim()).map_err(Into::into)).collect()
}

fn parse_alpha0(value: &str) -> Result<BTreeMap<Var, u64>> {
    let mut out = BTreeMap::new();
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (v, a) = part.split_once(':').ok_or_else(|| anyhow!("`{part}` is not `var:value`"))?;
        out.insert(Var::new(v.trim())?, a.trim().parse()?);
    }
    Ok(out)
}

impl RunConfig {
    /// Apply one setting; keys use underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "bound" => self.bound = positive(key, value)?,
            "smooth" => self.smooth = parse_list(value)?,
            "caps" => self.caps = parse_caps(value)?,
            "default_cap" => self.default_cap = positive(key, value)?,
            "fanout" => self.fanout = positive(key, value)?,
            "ceiling" => self.ceiling = positive(key, value)?,
            "budget" => self.budget = positive(key, value)?,
            "attempt_budget" => self.attempt_budget = positive(key, value)?,
            "search_budget" => self.search_budget = positive(key, value)?,
            "threads" => self.threads = value.parse().map_err(|_| anyhow!("bad thread count `{value}`"))?,
            "seed" => self.seed = value.parse().map_err(|_| anyhow!("bad seed `{value}`"))?,
            "box" => self.search_box = positive(key, value)?,
            "var_order" => self.var_order = Some(parse_vars(value)?),
            "alpha0" => self.alpha0 = parse_alpha0(value)?,
            _ => bail!("unknown setting `{key}`"),
        }
        Ok(())
    }

    /// Read `key = value` lines; `#` starts a comment.
    pub fn load(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), i + 1))?;
            self.set(k.trim(), v.trim()).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        }
        Ok(())
    }

    pub fn smoothness(&self) -> Result<SmoothnessSpec> {
        Ok(SmoothnessSpec::new(self.smooth.clone(), self.bound)?)
    }

    pub fn power_caps(&self) -> PowerCaps {
        PowerCaps::new(self.caps.clone(), self.default_cap)
    }

    pub fn limits(&self) -> Limits {
        Limits::with_ceiling(self.ceiling)
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig { fanout: self.fanout, budget: self.search_budget, limits: self.limits() }
    }

    pub fn solve(&self) -> SolveConfig {
        SolveConfig {
            search: SearchConfig { budget: self.attempt_budget, ..self.search() },
            budget: self.budget,
            alpha0: self.alpha0.clone(),
            var_order: self.var_order.clone(),
        }
    }
}
