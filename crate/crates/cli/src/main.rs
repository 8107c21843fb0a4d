//! `edsolve`: solve exponential Diophantine equations with checkable
//! certificates.
//!
//! Exit codes: 0 success, 1 negative answer (solvable congruence, rejected
//! document, runtime failure), 2 partial result or resource limit, 64 bad
//! input.

mod config;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use num_bigint::BigInt;

use edsolve::certify::{self, CertificateDocument, Verdict};
use edsolve::congruence::{solvable_mod, Solvability};
use edsolve::equation::{parse_template, representable_scan, Equation, Rhs, SearchBox};
use edsolve::modsearch::{build_pool, find_certificate, ModulusCertificate, Search};
use edsolve::ntheory::{smooth_sieve, Factorization};
use edsolve::strategy::{principal_solve, Region};

use config::RunConfig;

const EXIT_NEGATIVE: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "edsolve", version, about = "Exponential Diophantine equations with modular certificates")]
struct Cli {
    /// Flat `key = value` settings file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized factorization.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Sieve bound for the candidate pool.
    #[arg(long, global = true)]
    bound: Option<u64>,
    /// Smooth prime set, comma separated.
    #[arg(long, global = true)]
    smooth: Option<String>,
    /// Working-set ceiling of the congruence engine.
    #[arg(long, global = true)]
    ceiling: Option<usize>,
    /// Step budget (whole solve, or modulus search for find-modulus).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find all solutions and write a proof document.
    Solve {
        /// Equation file, or `-` for stdin.
        equation: PathBuf,
        /// Exhaustive-search box: exponents below this value.
        #[arg(long = "box")]
        search_box: Option<u64>,
        /// Variables in the order they should be bounded, comma separated.
        #[arg(long)]
        var_order: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide the equation modulo a given modulus.
    CheckCongruence {
        equation: PathBuf,
        /// `q1^e1*q2^e2*...`; components need not be prime.
        #[arg(long)]
        modulus: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search the candidate pool for a modulus with no solutions.
    FindModulus {
        equation: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Primes up to the bound whose `p - 1` is smooth.
    Sieve,
    /// Right-hand sides in a range that the template cannot reach.
    Scan {
        /// Template with a symbolic right-hand side, e.g. `... = c`.
        template: PathBuf,
        /// Inclusive range `lo..hi`.
        #[arg(long)]
        c_range: String,
        /// Exponents below this value.
        #[arg(long = "box")]
        search_box: u64,
    },
    /// Check a proof or certificate document.
    Verify { document: PathBuf },
}

/// Input the user got wrong.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(e: impl std::fmt::Display) -> Result<T> {
    Err(Usage(e.to_string()).into())
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        return Ok(s);
    }
    std::fs::read_to_string(path).or_else(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn read_equation(path: &Path) -> Result<Equation> {
    let text = read_input(path)?;
    text.parse().or_else(|e| usage(format!("{}: {e}", path.display())))
}

fn default_out(input: &Path, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| {
        if input == Path::new("-") {
            PathBuf::from("stdin.edcert")
        } else {
            input.with_extension(certify::EXTENSION)
        }
    })
}

/// Write through a temporary file in the target directory, then rename.
fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| anyhow!("writing {}: {}", path.display(), e.error))?;
    Ok(())
}

fn settings(cli: &Cli) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    if let Some(p) = &cli.config {
        c.load(p).or_else(|e| usage(format!("{e:#}")))?;
    }
    let mut set = |k: &str, v: Option<String>| -> Result<()> {
        match v {
            Some(v) => c.set(k, &v).or_else(|e| usage(format!("--{}: {e:#}", k.replace('_', "-")))),
            None => Ok(()),
        }
    };
    set("seed", cli.seed.map(|v| v.to_string()))?;
    set("threads", cli.threads.map(|v| v.to_string()))?;
    set("bound", cli.bound.map(|v| v.to_string()))?;
    set("smooth", cli.smooth.clone())?;
    set("ceiling", cli.ceiling.map(|v| v.to_string()))?;
    if let Command::Solve { search_box, var_order, .. } = &cli.command {
        set("budget", cli.budget.map(|v| v.to_string()))?;
        set("box", search_box.map(|v| v.to_string()))?;
        set("var_order", var_order.clone())?;
    } else {
        set("search_budget", cli.budget.map(|v| v.to_string()))?;
    }
    Ok(c)
}

fn tuple_text(t: &[u64]) -> String {
    let parts: Vec<String> = t.iter().map(u64::to_string).collect();
    format!("({})", parts.join(","))
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = settings(&cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global().context("starting worker threads")?;
    }
    match cli.command {
        Command::Solve { equation, out, .. } => {
            let eq = read_equation(&equation)?;
            let pool = build_pool(&eq.bases(), &cfg.smoothness()?, &cfg.power_caps());
            let bx = SearchBox::uniform(&eq, cfg.search_box)?;
            let report = principal_solve(&eq, &bx, &pool, &cfg.solve())?;
            let path = default_out(&equation, out);
            write_atomic(&path, &certify::serialize(&CertificateDocument::from_report(&report)))?;
            let complete = report.is_complete();
            println!("status={}", if complete { "complete" } else { "partial" });
            for s in &report.solutions {
                println!("solution={}", tuple_text(&eq.tuple(s)));
            }
            println!("open={}", report.tree.open_leaves());
            println!("certificates={}", report.stats.certificates);
            println!("nodes={}", report.stats.nodes);
            println!("steps={}", report.stats.steps);
            println!("report={}", path.display());
            Ok(if complete { 0 } else { EXIT_PARTIAL })
        }
        Command::CheckCongruence { equation, modulus, out } => {
            let eq = read_equation(&equation)?;
            let m = Factorization::parse_with_seed(&modulus, cfg.seed).or_else(|e| usage(format!("--modulus: {e}")))?;
            let derived = Region::whole(&eq).equation(&eq)?;
            match solvable_mod(&derived, &m, None, &cfg.limits()) {
                Ok(Solvability::Unsat(trace)) => {
                    let cert = ModulusCertificate { equation: derived, trace };
                    let path = default_out(&equation, out);
                    write_atomic(&path, &certify::serialize(&CertificateDocument::from_certificate(&cert)))?;
                    println!("result=unsat");
                    println!("modulus={}", cert.modulus());
                    println!("certificate={}", path.display());
                    Ok(0)
                }
                Ok(Solvability::Sat { witness, .. }) => {
                    println!("result=sat");
                    println!("witness={}", tuple_text(&derived.tuple(&witness)));
                    Ok(EXIT_NEGATIVE)
                }
                Err(edsolve::Error::ResourceLimit { size, ceiling }) => {
                    println!("result=resource-limit size={size} ceiling={ceiling}");
                    Ok(EXIT_PARTIAL)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::FindModulus { equation, out } => {
            let eq = read_equation(&equation)?;
            let derived = Region::whole(&eq).equation(&eq)?;
            let pool = build_pool(&derived.bases(), &cfg.smoothness()?, &cfg.power_caps());
            match find_certificate(&derived, &pool, &cfg.search())? {
                Search::Found { certificate, steps } => {
                    let path = default_out(&equation, out);
                    write_atomic(&path, &certify::serialize(&CertificateDocument::from_certificate(&certificate)))?;
                    println!("result=unsat");
                    println!("modulus={}", certificate.modulus());
                    println!("steps={steps}");
                    println!("certificate={}", path.display());
                    Ok(0)
                }
                Search::Failed(f) => {
                    println!("result=failed reason={}", f.reason);
                    println!("steps={}", f.steps);
                    println!("cells={}", f.cells);
                    println!("modulus={}", f.trace.modulus());
                    Ok(EXIT_PARTIAL)
                }
            }
        }
        Command::Sieve => {
            let mut stdout = std::io::stdout().lock();
            for p in smooth_sieve(&cfg.smoothness()?) {
                writeln!(stdout, "{p}")?;
            }
            Ok(0)
        }
        Command::Scan { template, c_range, search_box } => {
            let text = read_input(&template)?;
            let (eq, rhs) = parse_template(&text).or_else(|e| usage(format!("{}: {e}", template.display())))?;
            if let Rhs::Value(v) = rhs {
                if v != BigInt::from(0) {
                    bail!(Usage("scan template needs a symbolic or zero right-hand side".into()));
                }
            }
            let Some((lo, hi)) = c_range.split_once("..") else {
                return usage("--c-range must look like `lo..hi`");
            };
            let (Ok(lo), Ok(hi)) = (lo.trim().parse::<BigInt>(), hi.trim().parse::<BigInt>()) else {
                return usage("--c-range bounds must be integers");
            };
            let missed = representable_scan(&eq, &lo, &hi, &SearchBox::uniform(&eq, search_box)?)?;
            let mut stdout = std::io::stdout().lock();
            for c in &missed {
                writeln!(stdout, "{c}")?;
            }
            writeln!(stdout, "count={}", missed.len())?;
            Ok(0)
        }
        Command::Verify { document } => {
            let text = read_input(&document)?;
            match certify::verify(&text) {
                Ok(Verdict::Accepted { complete }) => {
                    println!("accepted {}", if complete { "complete" } else { "partial" });
                    Ok(0)
                }
                Ok(Verdict::Rejected(r)) => {
                    println!("rejected {r}");
                    Ok(EXIT_NEGATIVE)
                }
                Err(e) => {
                    println!("rejected {e}");
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else if matches!(e.downcast_ref::<edsolve::Error>(), Some(edsolve::Error::ResourceLimit { .. })) {
                ExitCode::from(EXIT_PARTIAL)
            } else {
                ExitCode::from(EXIT_NEGATIVE)
            }
        }
    }
}
