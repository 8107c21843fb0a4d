//! Primality testing and factorization.
//!
//! 64-bit inputs use a deterministic Miller-Rabin witness set. Larger inputs
//! fall back to 40 rounds with seeded random witnesses: a composite passes
//! with probability below 4^-40, and the answer is reproducible for a seed.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{gcd, mod_mul, mod_pow, PrimePower};
use crate::error::{Error, Result};

const TRIAL_LIMIT: u64 = 1_000_000;
const DEFAULT_SEED: u64 = 1;
const BIG_ROUNDS: usize = 40;

fn trial_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| super::primes_up_to(TRIAL_LIMIT))
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    // This witness set is exact below 3.3 * 10^24.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primality of an arbitrary-precision integer.
pub fn is_prime(n: &BigUint) -> bool {
    match n.to_u64() {
        Some(small) => is_prime_u64(small),
        None => is_probable_prime_big(n, DEFAULT_SEED),
    }
}

fn is_probable_prime_big(n: &BigUint, seed: u64) -> bool {
    for &p in &trial_primes()[..100] {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let mut d = n_minus_one.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two = BigUint::from(2u32);
    'round: for _ in 0..BIG_ROUNDS {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'round;
            }
        }
        return false;
    }
    true
}

/// Prime factorization `n = p1^e1 * ... * pk^ek`, primes ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Factorization {
    factors: Vec<(BigUint, u32)>,
}

impl Factorization {
    /// Build from prime/exponent pairs; merges repeated primes and sorts.
    pub fn from_factors(pairs: impl IntoIterator<Item = (BigUint, u32)>) -> Result<Self> {
        let mut factors: Vec<(BigUint, u32)> = Vec::new();
        for (p, e) in pairs {
            if e == 0 {
                continue;
            }
            if !is_prime(&p) {
                return Err(Error::InvalidEquation(format!("{p} is not prime")));
            }
            factors.push((p, e));
        }
        factors.sort();
        let mut merged: Vec<(BigUint, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        Ok(Factorization { factors: merged })
    }

    pub fn from_prime_powers(powers: &[PrimePower]) -> Self {
        Factorization::from_factors(powers.iter().map(|pp| (BigUint::from(pp.prime), pp.exponent)))
            .expect("prime powers hold primes")
    }

    pub fn factors(&self) -> &[(BigUint, u32)] {
        &self.factors
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// The factored integer.
    pub fn value(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }

    /// The prime-power parts as machine words, if every part fits.
    pub fn prime_powers(&self) -> Result<Vec<PrimePower>> {
        self.factors
            .iter()
            .map(|(p, e)| {
                let prime = p.to_u64().ok_or_else(|| Error::FactorTooLarge(format!("{p}^{e}")))?;
                PrimePower::new(prime, *e)
            })
            .collect()
    }

    /// Parse `int('^'int)?('*'int('^'int)?)*`. Components need not be prime;
    /// each is factored and the results merged.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_seed(text, DEFAULT_SEED)
    }

    /// [`parse`](Self::parse), factoring composite components with the
    /// given rho seed.
    pub fn parse_with_seed(text: &str, seed: u64) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::parse(1, 1, "empty modulus"));
        }
        let mut pairs = Vec::new();
        let mut column = 1;
        for part in compact.split('*') {
            let (base, exp) = match part.split_once('^') {
                Some((b, e)) => (b, Some(e)),
                None => (part, None),
            };
            let base: BigUint = parse_decimal(base)
                .ok_or_else(|| Error::parse(1, column, format!("expected an integer, found `{base}`")))?;
            let exp: u32 = match exp {
                Some(e) => e
                    .parse()
                    .ok()
                    .filter(|_| e.bytes().all(|b| b.is_ascii_digit()))
                    .ok_or_else(|| Error::parse(1, column, format!("bad exponent `{e}`")))?,
                None => 1,
            };
            if base.is_zero() {
                return Err(Error::parse(1, column, "modulus component must be positive"));
            }
            for (p, e) in factorize_with_seed(&base, seed).factors {
                pairs.push((p, e * exp));
            }
            column += part.len() + 1;
        }
        Factorization::from_factors(pairs)
    }
}

fn parse_decimal(s: &str) -> Option<BigUint> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, (p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Factor `n >= 1` with the default rho seed.
pub fn factorize(n: &BigUint) -> Factorization {
    factorize_with_seed(n, DEFAULT_SEED)
}

pub fn factorize_with_seed(n: &BigUint, seed: u64) -> Factorization {
    let mut primes: Vec<BigUint> = Vec::new();
    if let Some(small) = n.to_u64() {
        for (p, e) in factorize_u64_seeded(small, seed) {
            primes.extend(std::iter::repeat_n(BigUint::from(p), e as usize));
        }
    } else {
        let mut rest = n.clone();
        for &p in trial_primes() {
            while (&rest % p).is_zero() {
                rest /= p;
                primes.push(BigUint::from(p));
            }
            if rest.is_one() {
                break;
            }
        }
        if !rest.is_one() {
            split_big(rest, seed, &mut primes);
        }
    }
    Factorization::from_factors(primes.into_iter().map(|p| (p, 1))).expect("factors are prime")
}

fn split_big(n: BigUint, seed: u64, out: &mut Vec<BigUint>) {
    if let Some(small) = n.to_u64() {
        for (p, e) in factorize_u64_seeded(small, seed) {
            out.extend(std::iter::repeat_n(BigUint::from(p), e as usize));
        }
        return;
    }
    if is_probable_prime_big(&n, seed) {
        out.push(n);
        return;
    }
    let d = rho_big(&n, seed);
    split_big(&n / &d, seed, out);
    split_big(d, seed, out);
}

fn rho_big(n: &BigUint, seed: u64) -> BigUint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let c = rng.gen_biguint_below(n);
        let mut x = rng.gen_biguint_below(n);
        let mut y = x.clone();
        let mut d = BigUint::one();
        while d.is_one() {
            x = (&x * &x + &c) % n;
            y = (&y * &y + &c) % n;
            y = (&y * &y + &c) % n;
            let diff = if x > y { &x - &y } else { &y - &x };
            d = diff.gcd(n);
        }
        if &d != n {
            return d;
        }
    }
}

/// Factor a machine word; `0` and `1` yield an empty list.
pub fn factorize_u64(n: u64) -> Vec<(u64, u32)> {
    factorize_u64_seeded(n, DEFAULT_SEED)
}

fn factorize_u64_seeded(mut n: u64, seed: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    if n < 2 {
        return out;
    }
    for (i, &p) in trial_primes().iter().enumerate() {
        if p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        if i == 256 && n > 1 && is_prime_u64(n) {
            break;
        }
    }
    if n > 1 {
        let mut rest = Vec::new();
        split_u64(n, seed, &mut rest);
        rest.sort_unstable();
        for p in rest {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
    }
    out.sort_unstable();
    out
}

fn split_u64(n: u64, seed: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = brent_rho(n, seed);
    split_u64(d, seed, out);
    split_u64(n / d, seed, out);
}

/// Brent's cycle-finding variant of Pollard rho. `n` must be composite.
fn brent_rho(n: u64, seed: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n);
    loop {
        let c = rng.gen_range(1..n);
        let mut y = rng.gen_range(0..n);
        let m = 128;
        let mut g = 1;
        let mut r = 1u64;
        let mut q = 1u64;
        let mut x = y;
        let mut ys = y;
        let f = |v: u64| ((mod_mul(v, v, n) as u128 + c as u128) % n as u128) as u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mod_mul(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
}
