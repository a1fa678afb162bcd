//! Sieve of Eratosthenes and the prime set as an [`IntegerSet`].

use crate::error::Result;
use crate::sets::IntegerSet;

/// `is_prime[k]` for `0 ≤ k ≤ n`.
pub fn sieve(n: u64) -> Vec<bool> {
    let n = n as usize;
    let mut is_prime = vec![true; n + 1];
    is_prime[0] = false;
    if n >= 1 {
        is_prime[1] = false;
    }
    let mut p = 2;
    while p * p <= n {
        if is_prime[p] {
            for q in (p * p..=n).step_by(p) {
                is_prime[q] = false;
            }
        }
        p += 1;
    }
    is_prime
}

pub fn primes_upto(n: u64) -> Vec<u64> {
    sieve(n)
        .iter()
        .enumerate()
        .filter_map(|(k, &p)| p.then_some(k as u64))
        .collect()
}

/// Primes known up to `horizon`; later queries are horizon errors.
pub fn prime_set(horizon: u64) -> Result<IntegerSet> {
    Ok(
        IntegerSet::finite_list(format!("primes:{horizon}"), primes_upto(horizon))?
            .with_horizon(horizon),
    )
}
