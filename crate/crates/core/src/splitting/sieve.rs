//! Segmented sieve of Eratosthenes.

use crate::error::{Error, Result};

/// Largest limit the sieve accepts unless a caller raises it.
pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

const SEGMENT: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    pub cap: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            cap: DEFAULT_SIEVE_CAP,
        }
    }
}

fn small_primes(limit: usize) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl SieveConfig {
    /// All primes `<= limit`, ascending.
    pub fn primes_up_to(&self, limit: u64) -> Result<Vec<u64>> {
        if limit > self.cap {
            return Err(Error::CapExceeded {
                what: "prime sieve limit",
                needed: limit as u128,
                cap: self.cap as u128,
            });
        }
        if limit < 2 {
            return Ok(Vec::new());
        }
        let root = isqrt(limit);
        let base = small_primes(root as usize);
        let mut out = Vec::with_capacity(estimate_pi(limit));
        let mut mark = vec![false; SEGMENT];
        let mut low = 2u64;
        while low <= limit {
            let high = (low + SEGMENT as u64 - 1).min(limit);
            let len = (high - low + 1) as usize;
            mark[..len].iter_mut().for_each(|m| *m = false);
            for &q in &base {
                if q * q > high {
                    break;
                }
                let mut start = (low.div_ceil(q) * q).max(q * q);
                while start <= high {
                    mark[(start - low) as usize] = true;
                    start += q;
                }
            }
            out.extend(
                mark[..len]
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| !m)
                    .map(|(i, _)| low + i as u64),
            );
            low = high + 1;
        }
        Ok(out)
    }

    /// The first `count` primes.
    pub fn first_primes(&self, count: u64) -> Result<Vec<u64>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let bound = nth_prime_upper_bound(count);
        let mut primes = self.primes_up_to(bound.min(self.cap))?;
        if (primes.len() as u64) < count {
            return Err(Error::CapExceeded {
                what: "prime sieve limit",
                needed: bound as u128,
                cap: self.cap as u128,
            });
        }
        primes.truncate(count as usize);
        Ok(primes)
    }

    pub fn nth_prime(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::invalid("prime index starts at 1"));
        }
        Ok(*self.first_primes(n)?.last().expect("nonempty"))
    }
}

/// Upper bound for p_n: Rosser's p_n < n(ln n + ln ln n) for n >= 6.
pub fn nth_prime_upper_bound(n: u64) -> u64 {
    if n < 6 {
        return 13;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as u64 + 1
}

fn estimate_pi(limit: u64) -> usize {
    if limit < 17 {
        return 8;
    }
    let x = limit as f64;
    (1.26 * x / x.ln()) as usize
}

/// Primes up to `limit` with the default cap.
pub fn rational_primes_up_to(limit: u64) -> Result<Vec<u64>> {
    SieveConfig::default().primes_up_to(limit)
}

/// The `n`-th rational prime, `p_1 = 2`.
pub fn nth_prime(n: u64) -> Result<u64> {
    SieveConfig::default().nth_prime(n)
}

/// Number of primes `<= x`, for small `x`.
pub(crate) fn prime_count_small(x: u64) -> u64 {
    small_primes(x as usize).len() as u64
}

/// Trial division; meant for validating single inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d <= n / d {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
