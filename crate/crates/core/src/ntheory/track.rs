use std::collections::HashMap;

use super::{carmichael_prime_power, factorize_u64, gcd, mod_mul, mult_order};
use crate::error::{Error, Result};

/// The eventually periodic sequence `base^u mod modulus`, `u = 0, 1, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerTrack {
    pub base: u64,
    pub modulus: u64,
    pub prime: u64,
    pub exponent: u32,
    /// Number of pre-periodic indices.
    pub tail: u64,
    pub period: u64,
    /// `base^u mod modulus` for `u < tail + period`.
    pub residues: Vec<u64>,
}

impl PowerTrack {
    /// Index into `residues` holding `base^u`.
    pub fn index_of(&self, u: u64) -> usize {
        if u < self.tail {
            u as usize
        } else {
            (self.tail + (u - self.tail) % self.period) as usize
        }
    }

    pub fn residue_at(&self, u: u64) -> u64 {
        self.residues[self.index_of(u)]
    }

    pub fn distinct_residues(&self) -> usize {
        let mut r = self.residues.clone();
        r.sort_unstable();
        r.dedup();
        r.len()
    }

    /// `λ(q^β) + β`, the ceiling on the number of distinct residues.
    pub fn residue_bound(&self) -> u64 {
        carmichael_prime_power(self.prime, self.exponent) + self.exponent as u64
    }
}

/// `(tail, period)` of the power track of `b` modulo the prime power
/// `q_pow`, without listing the residues.
pub fn track_shape(b: u64, q_pow: u64) -> Result<(u64, u64)> {
    let (prime, exponent) = match factorize_u64(q_pow).as_slice() {
        [(p, e)] => (*p, *e),
        _ => return Err(Error::NotPrimePower(q_pow)),
    };
    if gcd(b, q_pow) == 1 {
        return Ok((0, mult_order(b % q_pow, q_pow)?));
    }
    // b^u has valuation u * v_p(b), so it is zero from ceil(exponent / v) on.
    let mut v = 0u64;
    let mut w = b;
    while w.is_multiple_of(prime) {
        w /= prime;
        v += 1;
    }
    Ok(((exponent as u64).div_ceil(v), 1))
}

/// Power track of `b` modulo the prime power `q_pow`.
pub fn power_track(b: u64, q_pow: u64) -> Result<PowerTrack> {
    let (prime, exponent) = match factorize_u64(q_pow).as_slice() {
        [(p, e)] => (*p, *e),
        _ => return Err(Error::NotPrimePower(q_pow)),
    };
    let start = 1 % q_pow;
    let step = b % q_pow;
    let (tail, period, residues) = if gcd(b, q_pow) == 1 {
        let period = mult_order(step, q_pow)?;
        let mut residues = Vec::with_capacity(period as usize);
        let mut x = start;
        for _ in 0..period {
            residues.push(x);
            x = mod_mul(x, step, q_pow);
        }
        (0, period, residues)
    } else {
        // The sequence collapses into a short cycle (usually the fixed point
        // 0); record first visits until a residue repeats.
        let mut seen: HashMap<u64, u64> = HashMap::new();
        let mut residues = Vec::new();
        let mut x = start;
        let mut u = 0u64;
        loop {
            if let Some(&first) = seen.get(&x) {
                break (first, u - first, residues);
            }
            seen.insert(x, u);
            residues.push(x);
            x = mod_mul(x, step, q_pow);
            u += 1;
        }
    };
    Ok(PowerTrack { base: b, modulus: q_pow, prime, exponent, tail, period, residues })
}
