//! Integer and modular-arithmetic primitives.
//!
//! Everything here is a pure function of its inputs. Moduli used by the
//! congruence engine are machine-sized (`u64`); products of them and the
//! integers being factored may be arbitrary precision.

mod prime;
mod sieve;
mod track;

pub use prime::{factorize, factorize_u64, factorize_with_seed, is_prime, is_prime_u64, Factorization};
pub use sieve::{primes_up_to, small_lambda_modulus, smooth_sieve, is_smooth, SmallLambdaModulus, SmoothnessSpec};
pub use track::{power_track, track_shape, PowerTrack};

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// A prime power `prime^exponent` small enough for word arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

impl PrimePower {
    pub fn new(prime: u64, exponent: u32) -> Result<Self> {
        if exponent == 0 || !is_prime_u64(prime) {
            return Err(Error::InvalidEquation(format!("{prime}^{exponent} is not a prime power")));
        }
        prime
            .checked_pow(exponent)
            .ok_or_else(|| Error::FactorTooLarge(format!("{prime}^{exponent}")))?;
        Ok(PrimePower { prime, exponent })
    }

    /// Recognize `n` as a prime power.
    pub fn from_value(n: u64) -> Result<Self> {
        let f = factorize_u64(n);
        match f.as_slice() {
            [(p, e)] => Ok(PrimePower { prime: *p, exponent: *e }),
            _ => Err(Error::NotPrimePower(n)),
        }
    }

    pub fn value(&self) -> u64 {
        self.prime.pow(self.exponent)
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 1 {
            write!(f, "{}", self.prime)
        } else {
            write!(f, "{}^{}", self.prime, self.exponent)
        }
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least common multiple; panics on overflow, which would indicate a
/// period far outside anything a prime-power modulus can produce.
pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b)).checked_mul(b).expect("lcm overflow")
}

#[inline]
pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `b^e mod m` by binary exponentiation. `m = 1` yields 0.
pub fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut base = b % m;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        e >>= 1;
    }
    acc
}

/// Least non-negative residue of an arbitrary-precision integer.
pub fn reduce(n: &BigInt, m: u64) -> u64 {
    let r = (n.magnitude() % m).to_u64().expect("residue fits");
    if n.sign() == Sign::Minus && r != 0 {
        m - r
    } else {
        r
    }
}

/// `λ` of a single prime power.
pub fn carmichael_prime_power(p: u64, e: u32) -> u64 {
    if p == 2 {
        match e {
            1 => 1,
            2 => 2,
            _ => 1 << (e - 2),
        }
    } else {
        p.pow(e - 1) * (p - 1)
    }
}

/// Carmichael's function: the exponent of the unit group modulo `m`.
pub fn carmichael(m: u64) -> u64 {
    carmichael_of(&factorize_u64(m))
}

/// `λ` from a known factorization, as the lcm over prime-power parts.
pub fn carmichael_of(factors: &[(u64, u32)]) -> u64 {
    factors
        .iter()
        .fold(1, |acc, &(p, e)| lcm(acc, carmichael_prime_power(p, e)))
}

/// Multiplicative order of `b` modulo `m`.
///
/// Starts from `λ(m)` and strips prime factors while the power stays 1, so
/// the cost is a handful of exponentiations rather than a walk of length
/// `ord_m(b)`.
pub fn mult_order(b: u64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::ModulusTooSmall { min: 2, got: m });
    }
    let b = b % m;
    if gcd(b, m) != 1 {
        return Err(Error::NotCoprime { base: b, modulus: m });
    }
    let mut order = carmichael(m);
    for (p, _) in factorize_u64(order) {
        while order.is_multiple_of(p) && mod_pow(b, order / p, m) == 1 {
            order /= p;
        }
    }
    Ok(order)
}

/// Exact `p`-adic valuation of a non-zero integer.
pub fn valuation(n: &BigUint, p: u64) -> u32 {
    let mut n = n.clone();
    let mut v = 0;
    let zero = BigUint::from(0u32);
    if n == zero {
        return u32::MAX;
    }
    loop {
        let r = &n % p;
        if r != zero {
            return v;
        }
        n /= p;
        v += 1;
    }
}
