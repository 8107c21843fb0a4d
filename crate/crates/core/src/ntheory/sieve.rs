//! Primes whose multiplicative groups have smooth order, and moduli with
//! small Carmichael values built from them.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use super::{carmichael_of, factorize, lcm};
use crate::error::{Error, Result};

/// Which primes count as "smooth" and how far to sieve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothnessSpec {
    smooth_primes: Vec<u64>,
    bound: u64,
}

impl SmoothnessSpec {
    pub fn new(mut smooth_primes: Vec<u64>, bound: u64) -> Result<Self> {
        smooth_primes.sort_unstable();
        smooth_primes.dedup();
        if smooth_primes.is_empty() {
            return Err(Error::InvalidSmoothness("no smooth primes".into()));
        }
        if let Some(p) = smooth_primes.iter().find(|&&p| !super::is_prime_u64(p)) {
            return Err(Error::InvalidSmoothness(format!("{p} is not prime")));
        }
        if bound == 0 {
            return Err(Error::InvalidSmoothness("bound must be positive".into()));
        }
        Ok(SmoothnessSpec { smooth_primes, bound })
    }

    /// `{2, 3, 5}` up to `bound`.
    pub fn with_bound(bound: u64) -> Self {
        SmoothnessSpec::new(vec![2, 3, 5], bound).expect("default smooth primes")
    }

    pub fn smooth_primes(&self) -> &[u64] {
        &self.smooth_primes
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn largest_smooth_prime(&self) -> u64 {
        *self.smooth_primes.last().expect("non-empty")
    }
}

impl Default for SmoothnessSpec {
    fn default() -> Self {
        SmoothnessSpec::with_bound(20_000)
    }
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Whether `n` factors entirely over `primes`.
pub fn is_smooth(mut n: u64, primes: &[u64]) -> bool {
    if n == 0 {
        return false;
    }
    for &p in primes {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

/// Primes `p <= bound`, larger than every smooth prime, with `p - 1`
/// smooth. Ascending.
pub fn smooth_sieve(spec: &SmoothnessSpec) -> Vec<u64> {
    let floor = spec.largest_smooth_prime();
    primes_up_to(spec.bound)
        .into_iter()
        .filter(|&p| p > floor && is_smooth(p - 1, &spec.smooth_primes))
        .collect()
}

/// A modulus `m = r * n` whose Carmichael value stays small.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallLambdaModulus {
    pub m: BigUint,
    pub n: BigUint,
    /// Distinct primes whose product is `n`, in selection order.
    pub primes: Vec<u64>,
    pub lambda_n: u64,
    pub lambda_m: u64,
}

/// Build `m = r * n` with `n >= target` a product of distinct smooth-order
/// primes chosen greedily to keep `λ(n)` small.
///
/// Candidates are every prime `p <= bound` with `p - 1` smooth (including the
/// smooth primes themselves). At each step the prime with the least
/// `log(lcm growth) / log p` is taken; ties go to the larger prime. Since
/// `λ(r n) <= r λ(n)`, the achieved `λ(m)` is at most `r λ(n)`.
pub fn small_lambda_modulus(r: u64, target: u64, spec: &SmoothnessSpec) -> Result<SmallLambdaModulus> {
    if r == 0 {
        return Err(Error::InvalidSmoothness("r must be positive".into()));
    }
    let mut candidates: Vec<u64> = super::primes_up_to(spec.bound)
        .into_iter()
        .filter(|&p| is_smooth(p - 1, &spec.smooth_primes))
        .collect();
    let target_big = BigUint::from(target);
    let mut n = BigUint::one();
    let mut lambda_n = 1u64;
    let mut chosen = Vec::new();
    while n < target_big {
        let best = candidates
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let growth = lcm(lambda_n, p - 1) / lambda_n;
                (i, p, (growth as f64).ln() / (p as f64).ln())
            })
            .min_by(|a, b| a.2.total_cmp(&b.2).then(b.1.cmp(&a.1)));
        let Some((i, p, _)) = best else {
            return Err(Error::PoolExhausted { largest: n });
        };
        candidates.remove(i);
        lambda_n = lcm(lambda_n, p - 1);
        n *= p;
        chosen.push(p);
    }
    let m = &n * r;
    let mut parts: Vec<(u64, u32)> = Vec::new();
    for (p, e) in factorize(&m).factors() {
        let p = p.to_u64().ok_or_else(|| Error::Overflow("prime factor of r".into()))?;
        parts.push((p, *e));
    }
    let lambda_m = carmichael_of(&parts);
    Ok(SmallLambdaModulus { m, n, primes: chosen, lambda_n, lambda_m })
}
