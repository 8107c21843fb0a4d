//! Acceptance suite. Prints one `criterion N: PASS|FAIL|SKIP` line per
//! criterion and exits non-zero on any failure other than the documented
//! one in criterion 3.
//!
//! Criteria 7 and 8 are long running and only execute with
//! `EDSOLVE_STRETCH=1`.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use edsolve::certify::{verify, Verdict};
use edsolve::congruence::{solvable_mod, Limits};
use edsolve::equation::Equation;
use edsolve::modsearch::{build_pool, find_certificate, PowerCaps, SearchConfig};
use edsolve::ntheory::{carmichael, small_lambda_modulus, Factorization, SmoothnessSpec};
use edsolve::strategy::min_exponent_survey;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BIN: &str = env!("CARGO_BIN_EXE_edsolve");

const SCAN_TARGET: Duration = Duration::from_secs(60);
const CHECK_TARGET: Duration = Duration::from_secs(120);
const SOLVE_TARGET: Duration = Duration::from_secs(600);

enum Outcome {
    Pass(String),
    Fail(String),
    /// Printed as a failure but not fatal: the listed modulus
    /// 5^2*11^2*31*61 leaves `8 + 121*11^a3 - 19^a6 = 0` solvable
    /// (a3 = 59, a6 = 61 is a witness), and nothing else went wrong.
    KnownFail(String),
    Skip(String),
}

struct Suite {
    dir: tempfile::TempDir,
    /// Every document written by criteria 1 to 5.
    emitted: Vec<PathBuf>,
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(out: &'a str, key: &str) -> Vec<&'a str> {
    out.lines().filter_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('='))).collect()
}

fn tuple(text: &str) -> Vec<u64> {
    let inner = text.trim_matches(|c| c == '(' || c == ')');
    if inner.is_empty() {
        return Vec::new();
    }
    inner.split(',').map(|s| s.parse().expect("tuple entry")).collect()
}

impl Suite {
    fn run(&self, args: &[&str]) -> Output {
        Command::new(BIN).current_dir(self.dir.path()).args(args).output().expect("binary runs")
    }

    fn write(&self, name: &str, text: &str) -> String {
        std::fs::write(self.dir.path().join(name), text).unwrap();
        name.to_string()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Checks `eq` modulo `m`; returns the certificate name when UNSAT and
    /// the stdout otherwise.
    fn check(&mut self, name: &str, eq: &str, m: &str) -> Result<PathBuf, (i32, String)> {
        let input = self.write(&format!("{name}.txt"), &format!("{eq}\n"));
        let out = format!("{name}.edcert");
        let o = self.run(&["check-congruence", &input, "--modulus", m, "--out", &out]);
        let code = o.status.code().unwrap_or(-1);
        if code == 0 && stdout(&o).starts_with("result=unsat\n") {
            self.emitted.push(self.path(&out));
            Ok(self.path(&out))
        } else {
            Err((code, stdout(&o)))
        }
    }

    fn solve(&mut self, name: &str, eq: &str, search_box: u64) -> (i32, String, Duration) {
        let input = self.write(&format!("{name}.txt"), eq);
        let out = format!("{name}.edcert");
        let t = Instant::now();
        let o = self.run(&["solve", &input, "--box", &search_box.to_string(), "--out", &out]);
        let took = t.elapsed();
        if self.path(&out).exists() {
            self.emitted.push(self.path(&out));
        }
        (o.status.code().unwrap_or(-1), stdout(&o), took)
    }
}

fn accepted(path: &Path) -> Result<bool, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    match verify(&text) {
        Ok(Verdict::Accepted { complete }) => Ok(complete),
        Ok(Verdict::Rejected(r)) => Err(format!("{} rejected: {r}", path.display())),
        Err(e) => Err(format!("{} unreadable: {e}", path.display())),
    }
}

const SCAN_EQ: &str = "2^x1*3^x2 + 5^x3*7^x4 - 11^x5*13^x6 = c";

fn criterion_1(s: &mut Suite) -> Outcome {
    let template = s.write("scan.txt", &format!("{SCAN_EQ}\n"));
    let t = Instant::now();
    let o = s.run(&["--threads", "1", "scan", &template, "--c-range", "0..1000", "--box", "13"]);
    let took = t.elapsed();
    let out = stdout(&o);
    let values: Vec<u64> = out.lines().filter_map(|l| l.parse().ok()).collect();
    let count = field(&out, "count").first().and_then(|c| c.parse::<usize>().ok());
    let detail = format!("count={count:?} min={:?} time={:.1}s", values.first(), took.as_secs_f64());
    if o.status.code() == Some(0) && count == Some(224) && values.len() == 224 && values.first() == Some(&11) && took < SCAN_TARGET
    {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_2(s: &mut Suite) -> Outcome {
    let eq = SCAN_EQ.replace("= c", "= 11");
    let t = Instant::now();
    let r = s.check("c11", &eq, "2^4*3^2*17*19*37*73*97*577");
    let took = t.elapsed();
    let cert = match r {
        Ok(p) => p,
        Err((code, out)) => return Outcome::Fail(format!("exit {code}: {}", out.trim())),
    };
    let text = std::fs::read_to_string(&cert).unwrap();
    let forced = text.contains("factor 2^4:\nvar x1: small={0} tail");
    let detail = format!("unsat, x1 forced to 0 mod 2^4: {forced}, time={:.2}s", took.as_secs_f64());
    match accepted(&cert) {
        Ok(true) if forced && took < CHECK_TARGET => Outcome::Pass(detail),
        Ok(_) => Outcome::Fail(detail),
        Err(e) => Outcome::Fail(e),
    }
}

/// Runs a solve and compares the solution list.
fn solve_exactly(s: &mut Suite, name: &str, eq: &str, search_box: u64, want: &[&str]) -> Result<String, String> {
    let (code, out, took) = s.solve(name, eq, search_box);
    let got = field(&out, "solution");
    let detail = format!("{name}: {} solutions in {:.1}s", got.len(), took.as_secs_f64());
    if code != 0 || field(&out, "status") != ["complete"] {
        return Err(format!("{name}: exit {code}, {}", out.lines().next().unwrap_or("")));
    }
    if got != want {
        return Err(format!("{name}: solutions {got:?}"));
    }
    if took >= SOLVE_TARGET {
        return Err(format!("{detail}, over target"));
    }
    match accepted(&s.path(&format!("{name}.edcert"))) {
        Ok(true) => Ok(detail),
        Ok(false) => Err(format!("{name}: verified only as partial")),
        Err(e) => Err(e),
    }
}

/// Moduli that must each rule their equation out.
fn check_moduli(s: &mut Suite, tag: &str, cases: &[(&str, &str)]) -> Vec<String> {
    let mut failures = Vec::new();
    for (i, (eq, m)) in cases.iter().enumerate() {
        match s.check(&format!("{tag}-{i}"), eq, m) {
            Ok(p) => {
                if let Err(e) = accepted(&p) {
                    failures.push(e);
                }
            }
            Err((1, out)) => {
                let w = field(&out, "witness").first().map(|t| tuple(t)).unwrap_or_default();
                failures.push(format!("{m} is sat, witness {w:?}"));
            }
            Err((code, out)) => failures.push(format!("{m}: exit {code}: {}", out.trim())),
        }
    }
    failures
}

/// Evaluates `8 + 121*11^a - 19^b` modulo `m` without the library.
fn reduced_step_residue(a: u32, b: u32, m: u64) -> BigInt {
    let v = BigInt::from(8) + BigInt::from(121) * BigInt::from(11).pow(a) - BigInt::from(19).pow(b);
    ((v % m) + m) % m
}

fn criterion_3(s: &mut Suite) -> Outcome {
    let mut notes = Vec::new();
    let solve = solve_exactly(
        s,
        "prime-sum",
        "3^a1 + 5^a2 + 11^a3 + 13^a4 + 17^a5 - 19^a6 = 0\n",
        15,
        &["(0,1,1,0,0,1)", "(1,0,0,1,0,1)"],
    );
    let cases = [
        (
            "9*3^a1 + 25*5^a2 + 121*11^a3 + 169*13^a4 + 17*17^a5 - 361*19^a6 = 0",
            "2*3^2*5*7*13*17*19*37*73*109*163*433",
        ),
        ("1 + 5^a2 + 11^a3 + 13*13^a4 + 17^a5 - 19^a6 = 0", "2^4*3^2*7*13*37*73*109*433"),
        ("2 + 5^a2 + 11^a3 + 17*17^a5 - 19^a6 = 0", "2*3*7*17*37*73*97*109*163"),
        ("3 + 25*5^a2 + 11^a3 - 19^a6 = 0", "3^3*5^2*7*31"),
        ("8 + 121*11^a3 - 19^a6 = 0", "5^2*11^2*31*61"),
        ("4 + 11^a3 - 19^a6 = 0", "3"),
    ];
    let failures = check_moduli(s, "prime-sum", &cases);
    let mut unexplained = solve.is_err();
    notes.push(solve.unwrap_or_else(|e| e));
    let mut explained = 0;
    for f in &failures {
        // Confirm the reported witness really solves the congruence.
        let witness = f.strip_prefix("5^2*11^2*31*61 is sat, witness ");
        let confirmed = witness.is_some_and(|rest| {
            let w: Vec<u32> = rest.trim_matches(|c| c == '[' || c == ']').split(", ").map(|x| x.parse().unwrap()).collect();
            reduced_step_residue(w[0], w[1], 25 * 121 * 31 * 61) == BigInt::from(0)
        });
        if confirmed {
            explained += 1;
            notes.push(format!("{f} (independently confirmed)"));
        } else {
            unexplained = true;
            notes.push(f.clone());
        }
    }
    if failures.is_empty() {
        notes.push("all six moduli unsat".into());
    }
    match (unexplained, explained) {
        (false, 0) => Outcome::Pass(notes.join("; ")),
        (false, _) => Outcome::KnownFail(notes.join("; ")),
        (true, _) => Outcome::Fail(notes.join("; ")),
    }
}

fn criterion_4(s: &mut Suite) -> Outcome {
    let mut notes = Vec::new();
    let fives = "1 + 5^a1 + 5^a2 + 5^a3 + 5^a4 + 5^a5 + 5^a6 + 5^a7 + 5^a8 - 17^a9 = 0\n\
                order: a1 <= a2 <= a3 <= a4 <= a5 <= a6 <= a7 <= a8\n";
    let results = [
        solve_exactly(s, "fives", fives, 8, &["(0,0,0,0,0,0,1,1,1)", "(0,0,0,1,1,2,3,3,2)"]),
        solve_exactly(s, "products", &format!("{}\n", SCAN_EQ.replace("= c", "= 1")), 13, &["(0,0,0,0,0,0)", "(0,2,1,0,0,1)"]),
    ];
    let mut ok = true;
    for r in results {
        ok &= r.is_ok();
        notes.push(r.unwrap_or_else(|e| e));
    }
    let cases = [
        ("2*2^a1*3^a2 + 5^a3*7^a4 - 11^a5*13^a6 = 1", "2"),
        ("3^a2 + 7*5^a3*7^a4 - 11^a5*13^a6 = 1", "2^5*7*17*19*37*73*97*193"),
        ("3^a2 + 5^a3 - 11*11^a5*13^a6 = 1", "7*11*17*19*31*37*41*73*97*193"),
        ("3^a2 + 25*5^a3 - 13^a6 = 1", "5^2*7*11*31*41"),
        ("27*3^a2 - 13^a6 = -4", "27*7*19*37"),
    ];
    let failures = check_moduli(s, "products", &cases);
    if failures.is_empty() {
        notes.push("all five moduli unsat".into());
    } else {
        ok = false;
        notes.extend(failures);
    }
    if ok {
        Outcome::Pass(notes.join("; "))
    } else {
        Outcome::Fail(notes.join("; "))
    }
}

fn brute_sieve(bound: u64) -> Vec<u64> {
    let is_prime = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
    let smooth = |mut n: u64| {
        for p in [2, 3, 5] {
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        n == 1
    };
    (6..=bound).filter(|&p| is_prime(p) && smooth(p - 1)).collect()
}

fn criterion_5(s: &mut Suite) -> Outcome {
    let o = s.run(&["sieve", "--bound", "20000", "--smooth", "2,3,5"]);
    let got: Vec<u64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    let want = brute_sieve(20_000);
    let landmarks = [193, 433, 577, 601].iter().all(|p| got.contains(p));
    let detail = format!("{} primes, brute force agrees: {}, landmarks present: {landmarks}", got.len(), got == want);
    if o.status.code() == Some(0) && got == want && landmarks {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

/// Carmichael function by definition: the exponent of the unit group.
fn lambda_by_orders(n: u64) -> u64 {
    let gcd = |mut a: u64, mut b: u64| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    let mut l = 1;
    for a in (1..n).filter(|&a| gcd(a, n) == 1) {
        let (mut x, mut k) = (a % n, 1);
        while x != 1 % n {
            x = x * a % n;
            k += 1;
        }
        l = l / gcd(l, k) * k;
    }
    l
}

fn lambda_submultiplicative() -> Result<String, String> {
    const N: u64 = 100_000;
    for n in 1..=300 {
        if carmichael(n) != lambda_by_orders(n) {
            return Err(format!("lambda({n}) disagrees with the unit group exponent"));
        }
    }
    let lambda: Vec<u64> = (0..=N).map(|n| if n == 0 { 0 } else { carmichael(n) }).collect();
    let mut pairs = 0u64;
    for a in 1..=N {
        for b in 1..=N / a {
            if lambda[(a * b) as usize] > a * lambda[b as usize] {
                return Err(format!("lambda({a}*{b}) > {a}*lambda({b})"));
            }
            pairs += 1;
        }
    }
    Ok(format!("lambda submultiplicative on {pairs} pairs"))
}

fn prime_powers_up_to(limit: u64) -> Vec<(u64, u32, u64)> {
    let mut out = Vec::new();
    for p in (2..=limit).filter(|&p| (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)) {
        let (mut q, mut e) = (p, 1);
        while q <= limit {
            out.push((p, e, q));
            q *= p;
            e += 1;
        }
    }
    out
}

fn lambda_prime_power(p: u64, e: u32) -> u64 {
    match (p, e) {
        (2, 1) => 1,
        (2, 2) => 2,
        (2, _) => 1 << (e - 2),
        _ => p.pow(e - 1) * (p - 1),
    }
}

fn residue_count_bound(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let powers = prime_powers_up_to(1_000_000);
    let mut tight = 0;
    for _ in 0..1000 {
        let b: u64 = rng.gen_range(2..=10_000);
        let (p, e, q) = powers[rng.gen_range(0..powers.len())];
        // The orbit of b^u is eventually periodic; its first repeat closes it.
        let mut seen = HashSet::new();
        let mut x = 1 % q;
        while seen.insert(x) {
            x = x * b % q;
        }
        let bound = lambda_prime_power(p, e) + e as u64;
        if seen.len() as u64 > bound {
            return Err(format!("{b} mod {p}^{e}: {} residues > {bound}", seen.len()));
        }
        tight += usize::from(seen.len() as u64 == bound);
    }
    Ok(format!("residue bound on 1000 pairs ({tight} tight)"))
}

fn builder_divisibility() -> Result<String, String> {
    let spec = SmoothnessSpec::default();
    for r in [1u64, 2, 6, 12, 30, 60, 121, 360] {
        for target in [10u64.pow(4), 10u64.pow(8), 10u64.pow(12)] {
            let b = small_lambda_modulus(r, target, &spec).map_err(|e| e.to_string())?;
            if &b.m % r != 0u32.into() || b.m != &b.n * r || b.lambda_m > r * b.lambda_n || b.n < target.into() {
                return Err(format!("builder r={r} target={target}: m={} lambda={}", b.m, b.lambda_m));
            }
        }
    }
    Ok("builder r | m and lambda(m) <= r lambda(n)".into())
}

/// Random equation with at most three variables and its modulus.
fn random_instance(rng: &mut ChaCha8Rng) -> (String, u64) {
    let bases = [2u64, 3, 5, 7, 11, 13];
    let nvars = rng.gen_range(1..=3);
    let mut text = String::from("0");
    for v in 0..nvars {
        let c: i64 = rng.gen_range(1..=20) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let b = bases[rng.gen_range(0..bases.len())];
        text += &format!(" {} {}*{b}^x{v}", if c < 0 { '-' } else { '+' }, c.abs());
    }
    let rhs: i64 = rng.gen_range(-50..=50);
    (format!("{text} = {rhs}"), rng.gen_range(2..=500))
}

/// Whether some exponents solve `eq` modulo `m`, by sumsets of residues.
fn solvable_by_sumsets(eq: &str, m: u64) -> bool {
    let (lhs, rhs) = eq.split_once(" = ").unwrap();
    let rhs: i64 = rhs.parse().unwrap();
    let mut reach: BTreeSet<u64> = [0].into();
    let tokens: Vec<&str> = lhs.split(' ').skip(1).collect();
    for pair in tokens.chunks(2) {
        let sign: i64 = if pair[0] == "-" { -1 } else { 1 };
        let (c, rest) = pair[1].split_once('*').unwrap();
        let b: u64 = rest.split_once('^').unwrap().0.parse().unwrap();
        let c = (sign * c.parse::<i64>().unwrap()).rem_euclid(m as i64) as u64;
        let mut orbit = BTreeSet::new();
        let mut x = 1 % m;
        while orbit.insert(x) {
            x = x * b % m;
        }
        reach = reach.iter().flat_map(|&r| orbit.iter().map(move |&o| (r + c * o) % m)).collect();
    }
    reach.contains(&(rhs.rem_euclid(m as i64) as u64))
}

fn engine_against_brute_force(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut unsat = 0;
    for _ in 0..200 {
        let (text, m) = random_instance(rng);
        let eq: Equation = text.parse().map_err(|e| format!("{text}: {e}"))?;
        let factored = Factorization::parse(&m.to_string()).unwrap();
        let engine = solvable_mod(&eq, &factored, None, &Limits::default()).map_err(|e| format!("{text} mod {m}: {e}"))?;
        if engine.is_unsat() == solvable_by_sumsets(&text, m) {
            return Err(format!("{text} mod {m}: engine unsat={}", engine.is_unsat()));
        }
        unsat += usize::from(engine.is_unsat());
    }
    Ok(format!("engine agrees on 200 instances ({unsat} unsat)"))
}

fn replay_emitted(s: &Suite) -> Result<String, String> {
    for p in &s.emitted {
        accepted(p)?;
        let o = s.run(&["verify", p.to_str().unwrap()]);
        if o.status.code() != Some(0) {
            return Err(format!("cli rejected {}", p.display()));
        }
    }
    Ok(format!("{} emitted documents replayed", s.emitted.len()))
}

/// Byte offsets inside residue sets and factor headers.
fn mutable_positions(text: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.starts_with("var ") {
            let mut inside = false;
            for (i, ch) in line.char_indices() {
                match ch {
                    '{' => inside = true,
                    '}' => inside = false,
                    _ if inside => out.push(offset + i),
                    _ => {}
                }
            }
        } else if let Some(rest) = line.strip_prefix("factor ") {
            out.extend((0..rest.trim_end().len()).map(|i| offset + "factor ".len() + i));
        }
        offset += line.len();
    }
    out
}

/// Mutations per document whose clean verification takes over a second.
const SLOW_DOC_MUTATIONS: usize = 5;

fn tamper(s: &Suite, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut fast = Vec::new();
    let mut slow = Vec::new();
    for p in &s.emitted {
        let text = std::fs::read_to_string(p).unwrap();
        if mutable_positions(&text).is_empty() {
            continue;
        }
        let t = Instant::now();
        let _ = verify(&text);
        if t.elapsed() > Duration::from_secs(1) {
            slow.push(text);
        } else {
            fast.push(text);
        }
    }
    if fast.is_empty() {
        return Err("no documents to tamper with".into());
    }
    let alphabet: Vec<u8> = b"0123456789,^{} x".to_vec();
    let mut tried = 0;
    while tried < 1000 {
        let text = match slow.get(tried / SLOW_DOC_MUTATIONS) {
            Some(t) => t,
            None => &fast[rng.gen_range(0..fast.len())],
        };
        let spots = mutable_positions(text);
        let at = spots[rng.gen_range(0..spots.len())];
        let new = alphabet[rng.gen_range(0..alphabet.len())];
        if text.as_bytes()[at] == new {
            continue;
        }
        let mut bytes = text.clone().into_bytes();
        bytes[at] = new;
        if let Ok(Verdict::Accepted { .. }) = verify(&String::from_utf8(bytes).unwrap()) {
            return Err(format!("mutation at byte {at} accepted"));
        }
        tried += 1;
    }
    Ok(format!(
        "1000 mutations over {} documents ({} on {} slow ones), 0 accepted",
        fast.len() + slow.len(),
        slow.len() * SLOW_DOC_MUTATIONS,
        slow.len()
    ))
}

fn criterion_6(s: &mut Suite) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let timed = |r: Result<String, String>, t: Instant| r.map(|d| format!("{d} ({:.1}s)", t.elapsed().as_secs_f64()));
    let mut checks = Vec::new();
    let t = Instant::now();
    checks.push(timed(lambda_submultiplicative(), t));
    let t = Instant::now();
    checks.push(timed(residue_count_bound(&mut rng), t));
    let t = Instant::now();
    checks.push(timed(builder_divisibility(), t));
    let t = Instant::now();
    checks.push(timed(engine_against_brute_force(&mut rng), t));
    let t = Instant::now();
    checks.push(timed(replay_emitted(s), t));
    let t = Instant::now();
    checks.push(timed(tamper(s, &mut rng), t));
    let ok = checks.iter().all(Result::is_ok);
    let detail: Vec<String> = checks.into_iter().map(|r| r.unwrap_or_else(|e| e)).collect();
    if ok {
        Outcome::Pass(detail.join("; "))
    } else {
        Outcome::Fail(detail.join("; "))
    }
}

fn stretch() -> bool {
    std::env::var("EDSOLVE_STRETCH").is_ok_and(|v| v == "1")
}

const STRETCH_CEILING: usize = 1 << 24;

/// Largest 23-exponent tried when representing small `c`.
const MAX_A9: u32 = 12;

fn powers_up_to(p: u64, limit: u64) -> Vec<u64> {
    std::iter::successors(Some(1u64), |q| q.checked_mul(p)).take_while(|&q| q <= limit).collect()
}

/// Sums of one power of each prime that do not exceed `limit`.
fn sums_of(primes: &[u64], limit: u64) -> Vec<u64> {
    primes.iter().fold(vec![0], |acc, &p| {
        acc.iter().flat_map(|&s| powers_up_to(p, limit - s).into_iter().map(move |q| s + q)).filter(|&s| s <= limit).collect()
    })
}

/// Whether `t = 2^a1 + 3^a2 + ... + 19^a8` for some exponents; meets in the
/// middle over the first and last four primes.
fn sum_of_eight(t: u64) -> bool {
    let low: HashSet<u64> = sums_of(&[2, 3, 5, 7], t).into_iter().collect();
    sums_of(&[11, 13, 17, 19], t).into_iter().any(|s| low.contains(&(t - s)))
}

fn criterion_7() -> Outcome {
    if !stretch() {
        return Outcome::Skip("set EDSOLVE_STRETCH=1".into());
    }
    let t = Instant::now();
    let text = "2^a1 + 3^a2 + 5^a3 + 7^a4 + 11^a5 + 13^a6 + 17^a7 + 19^a8 - 23^a9 = 55191";
    let eq: Equation = text.parse().unwrap();
    let pool = build_pool(&eq.bases(), &SmoothnessSpec::default(), &PowerCaps::default());
    // Nine variables need a larger working set than the default.
    let config = SearchConfig { limits: Limits::with_ceiling(STRETCH_CEILING), ..SearchConfig::default() };
    let cert = match find_certificate(&eq, &pool, &config) {
        Ok(r) => match r.certificate() {
            Some(c) => c.clone(),
            None => return Outcome::Fail(format!("no certificate after {} steps", r.steps())),
        },
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let doc = edsolve::certify::serialize(&edsolve::certify::CertificateDocument::from_certificate(&cert));
    if !matches!(verify(&doc), Ok(Verdict::Accepted { complete: true })) {
        return Outcome::Fail("certificate not accepted".into());
    }
    // Sums of one power of each of the eight primes, then one power of 23.
    const C: usize = 55_191;
    let limit = C + 23usize.pow(4);
    let mut sums = vec![false; limit + 1];
    sums[0] = true;
    for p in [2usize, 3, 5, 7, 11, 13, 17, 19] {
        let mut next = vec![false; limit + 1];
        for (s, _) in sums.iter().enumerate().filter(|(_, &r)| r) {
            let mut q = 1;
            while s + q <= limit {
                next[s + q] = true;
                q *= p;
            }
        }
        sums = next;
    }
    let missing: Vec<u64> = (0..C)
        .filter(|&c| (0..=4).all(|k| !sums[c + 23usize.pow(k)]))
        .map(|c| c as u64)
        .filter(|&c| !(5..=MAX_A9).any(|k| sum_of_eight(c + 23u64.pow(k))))
        .collect();
    // The certified value itself must stay out of reach.
    let consistent = (0..=MAX_A9).all(|k| !sum_of_eight(C as u64 + 23u64.pow(k)));
    let detail = format!(
        "ceiling 2^24, modulus {} unsat, {C} unreached: {consistent}, {} of 0..{C} unrepresented with a9 <= {MAX_A9}, time={:.1}s",
        cert.modulus(),
        missing.len(),
        t.elapsed().as_secs_f64()
    );
    if missing.is_empty() && consistent {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(format!("{detail}, first {:?}", &missing[..missing.len().min(5)]))
    }
}

/// Every assignment of six distinct primes at most 19 to
/// `p1^a1*p2^a2 + p3^a3*p4^a4 - p5^a5*p6^a6 = 1`, up to the symmetries of
/// the equation.
fn survey_family() -> Vec<Equation> {
    let primes = [2u64, 3, 5, 7, 11, 13, 17, 19];
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let n = primes.len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    for e in 0..n {
                        for f in 0..n {
                            let idx = [a, b, c, d, e, f];
                            if idx.iter().collect::<BTreeSet<_>>().len() < 6 {
                                continue;
                            }
                            let pair = |i: usize, j: usize| (primes[i].min(primes[j]), primes[i].max(primes[j]));
                            let (x, y, z) = (pair(a, b), pair(c, d), pair(e, f));
                            if !seen.insert((x.min(y), x.max(y), z)) {
                                continue;
                            }
                            let (x, y) = (x.min(y), x.max(y));
                            let text = format!(
                                "{}^a1*{}^a2 + {}^a3*{}^a4 - {}^a5*{}^a6 = 1",
                                x.0, x.1, y.0, y.1, z.0, z.1
                            );
                            out.push(text.parse().unwrap());
                        }
                    }
                }
            }
        }
    }
    out
}

fn criterion_8() -> Outcome {
    if !stretch() {
        return Outcome::Skip("set EDSOLVE_STRETCH=1".into());
    }
    let t = Instant::now();
    let family = survey_family();
    let pool = build_pool(&[2, 3, 5, 7, 11, 13, 17, 19], &SmoothnessSpec::default(), &PowerCaps::default());
    let verdicts = match min_exponent_survey(&family, 5, &pool, &SearchConfig::default()) {
        Ok(v) => v,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let unproven: Vec<String> = verdicts
        .iter()
        .filter(|v| !v.proven())
        .map(|v| format!("{} ({} steps)", v.equation.equation_line(), v.result.steps()))
        .collect();
    let detail = format!(
        "{} of {} proven, time={:.1}s",
        verdicts.len() - unproven.len(),
        verdicts.len(),
        t.elapsed().as_secs_f64()
    );
    if unproven.is_empty() {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(format!("{detail}; unproven: {}", unproven.join(", ")))
    }
}

type Criterion = dyn Fn(&mut Suite) -> Outcome;

fn main() {
    let mut suite = Suite { dir: tempfile::tempdir().unwrap(), emitted: Vec::new() };
    let mut unexpected = Vec::new();
    let criteria: [(u32, &Criterion); 8] = [
        (1, &criterion_1),
        (2, &criterion_2),
        (3, &criterion_3),
        (4, &criterion_4),
        (5, &criterion_5),
        (6, &criterion_6),
        (7, &|_| criterion_7()),
        (8, &|_| criterion_8()),
    ];
    for (n, run) in criteria {
        match run(&mut suite) {
            Outcome::Pass(d) => println!("criterion {n}: PASS {d}"),
            Outcome::Skip(d) => println!("criterion {n}: SKIP {d}"),
            Outcome::KnownFail(d) => println!("criterion {n}: FAIL {d}"),
            Outcome::Fail(d) => {
                println!("criterion {n}: FAIL {d}");
                unexpected.push(n);
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
