//! Truncated Euler products over prime ideals.
//!
//! All products are accumulated as sums of logarithms with Neumaier
//! compensation. Primes are cut into fixed-size chunks in ascending order;
//! chunks may be evaluated on any number of threads, and their partial sums
//! are merged in chunk order, so the result does not depend on the worker
//! count.
//!
//! The truncation bound for `-log P` after the first `N` rational primes is
//! `d(n-1)^2 / (2(2N - n + 3))`, valid once `N >= 5` and `p_N > n - 1`.
//! Since every omitted factor lies in `(0, 1)`, the truncated product is an
//! upper bound for `P` and `0 <= P_N - P <= P_N (1 - e^{-R_N}) <= R_N`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::elementary_symmetric_upto;
use crate::error::{Error, Result};
use crate::field::NumberField;
use crate::params::Params;
use crate::splitting::sieve::{prime_count_small, SieveConfig};
use crate::splitting::split_prime;

pub const DEFAULT_DIGITS: u32 = 4;
/// Double precision carries every guarantee up to this many decimals.
pub const MAX_DIGITS: u32 = 6;

const CHUNK: usize = 4096;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sums `term(p)` over `primes` chunk by chunk; the flag is OR-ed.
fn accumulate<F>(primes: &[u64], chunk: usize, term: F) -> (CompensatedSum, bool)
where
    F: Fn(u64) -> (f64, bool) + Sync,
{
    let partials: Vec<(CompensatedSum, bool)> = primes
        .par_chunks(chunk)
        .map(|block| {
            let mut acc = CompensatedSum::default();
            let mut flag = false;
            for &p in block {
                let (v, f) = term(p);
                acc.add(v);
                flag |= f;
            }
            (acc, flag)
        })
        .collect();
    let mut total = CompensatedSum::default();
    let mut flag = false;
    for (partial, f) in &partials {
        total.merge(partial);
        flag |= f;
    }
    (total, flag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precision {
    /// Guarantee `|value - P| <= 10^{-t} / 2`.
    Digits(u32),
    /// Use exactly the first `N` rational primes.
    Primes(u64),
}

#[derive(Debug, Clone)]
pub struct ProbabilityQuery {
    pub field: NumberField,
    pub params: Params,
    pub precision: Precision,
    pub sieve: SieveConfig,
}

impl ProbabilityQuery {
    pub fn new(field: NumberField, params: Params, precision: Precision) -> Self {
        ProbabilityQuery {
            field,
            params,
            precision,
            sieve: SieveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityResult {
    pub value: f64,
    /// `N`: number of rational primes whose prime ideals were included.
    pub primes_used: u64,
    /// `p_N`.
    pub last_prime: u64,
    /// Bound on the truncation error of `-log P`, and hence on
    /// `value - P >= 0`. `None` when `N` is too small for the bound to apply.
    pub error_bound: Option<f64>,
    pub digits: Option<u32>,
    /// Some prime ideal shape came from a polynomial that is not squarefree
    /// modulo its prime, so the value is not guaranteed.
    pub caveat: bool,
}

/// Number of primes `N` after which the truncation bound drops to
/// `10^{-t}/2`: `ceil((d(n-1)^2 10^t + n - 3) / 2)`, floored at 5 and at
/// the first index with `p_N > n - 1`.
pub fn required_primes(d: u32, n: u32, t: u32) -> u64 {
    let numer = d as i128 * ((n as i128 - 1).pow(2)) * 10i128.pow(t) + (n as i128 - 3);
    let formula = if numer <= 0 { 0 } else { (numer + 1) / 2 } as u64;
    formula.max(5).max(min_index_above(n))
}

/// Smallest `N` with `p_N > n - 1`.
fn min_index_above(n: u32) -> u64 {
    prime_count_small(n.saturating_sub(1) as u64) + 1
}

/// Prime count used in digits mode: [`required_primes`] enlarged by 1%.
pub fn digits_prime_count(d: u32, n: u32, t: u32) -> u64 {
    let base = required_primes(d, n, t);
    (base * 101).div_ceil(100)
}

/// `d(n-1)^2 / (2(2N - n + 3))`.
pub fn truncation_bound(d: u32, n: u32, primes: u64) -> Result<f64> {
    if primes < 5 {
        return Err(Error::invalid(format!("bound needs N >= 5, got {primes}")));
    }
    if primes < min_index_above(n) {
        return Err(Error::invalid(format!("bound needs p_N > n - 1 = {}", n - 1)));
    }
    let denom = 2 * primes as i128 - n as i128 + 3;
    if denom <= 0 {
        return Err(Error::invalid("bound needs 2N - n + 3 > 0"));
    }
    let num = d as f64 * ((n - 1) as f64).powi(2);
    Ok(num / (2.0 * denom as f64))
}

/// `Σ_{j=k}^{n} C(n,j) x^j (1-x)^{n-j}`, the probability that some `k` of
/// `n` events of probability `x` occur. All terms are nonnegative.
fn tail_probability(x: f64, binom: &[f64], k: u32) -> f64 {
    let n = binom.len() as u32 - 1;
    let y = 1.0 - x;
    (k..=n)
        .map(|j| binom[j as usize] * x.powi(j as i32) * y.powi((n - j) as i32))
        .sum()
}

fn binomial_row(n: u32) -> Vec<f64> {
    let mut row = vec![1.0f64; n as usize + 1];
    for j in 1..n as usize {
        row[j] = row[j - 1] * (n as usize - j + 1) as f64 / j as f64;
    }
    row
}

/// `log` of the truncated product of local factors over every prime ideal
/// above the given rational primes.
fn log_probability(field: &NumberField, params: Params, primes: &[u64]) -> (f64, bool) {
    let binom = binomial_row(params.n);
    let Params { k, r, .. } = params;
    let polynomial = !field.exact_splitting();
    let (sum, caveat) = accumulate(primes, CHUNK, |p| {
        let split = split_prime(field, p);
        let pf = p as f64;
        let term = split
            .classes
            .iter()
            .map(|c| {
                let x = pf.powi(-((c.f * r) as i32));
                c.g as f64 * (-tail_probability(x, &binom, k)).ln_1p()
            })
            .sum::<f64>();
        (term, polynomial && split.caveat)
    });
    (sum.value(), caveat)
}

pub fn probability(query: &ProbabilityQuery) -> Result<ProbabilityResult> {
    let field = &query.field;
    let params = query.params;
    let d = field.degree();
    let (count, digits) = match query.precision {
        Precision::Digits(t) if t > MAX_DIGITS => {
            return Err(Error::Precision {
                requested: t,
                max: MAX_DIGITS,
            })
        }
        Precision::Digits(0) => return Err(Error::invalid("digits must be positive")),
        Precision::Digits(t) => (digits_prime_count(d, params.n, t), Some(t)),
        Precision::Primes(0) => return Err(Error::invalid("prime count must be positive")),
        Precision::Primes(n) => (n, None),
    };
    let primes = query.sieve.first_primes(count)?;
    let last_prime = *primes.last().expect("count > 0");
    let (log_p, caveat) = log_probability(field, params, &primes);
    Ok(ProbabilityResult {
        value: log_p.exp(),
        primes_used: count,
        last_prime,
        error_bound: truncation_bound(d, params.n, count).ok(),
        digits,
        caveat,
    })
}

/// Truncated Euler product `Π_{p <= limit} Π_𝔭 (1 - N(𝔭)^{-s})^{-1}`.
pub fn dedekind_zeta(field: &NumberField, s: f64, prime_limit: u64) -> Result<f64> {
    dedekind_zeta_with(field, s, prime_limit, &SieveConfig::default())
}

pub fn dedekind_zeta_with(
    field: &NumberField,
    s: f64,
    prime_limit: u64,
    sieve: &SieveConfig,
) -> Result<f64> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::invalid(format!("zeta needs s > 1, got {s}")));
    }
    let primes = sieve.primes_up_to(prime_limit)?;
    let (sum, _) = accumulate(&primes, CHUNK, |p| {
        let pf = p as f64;
        let term = split_prime(field, p)
            .classes
            .iter()
            .map(|c| -(c.g as f64) * (-pf.powf(-(c.f as f64) * s)).ln_1p())
            .sum::<f64>();
        (term, false)
    });
    Ok(sum.value().exp())
}

/// Whether every `j`-subset of `s` with `k <= j <= n` has sum `> 1/r`. The
/// `j` smallest entries give the smallest `j`-subset sum, so only those are
/// tested.
pub fn convergence_region_check(s: &[f64], k: u32, r: u32) -> bool {
    if s.iter().any(|v| v.is_nan()) || r == 0 {
        return false;
    }
    let mut sorted = s.to_vec();
    sorted.sort_by(f64::total_cmp);
    let threshold = 1.0 / r as f64;
    let mut prefix = 0.0;
    for (idx, v) in sorted.iter().enumerate() {
        prefix += v;
        let j = idx as u32 + 1;
        if j >= k && prefix <= threshold {
            return false;
        }
    }
    true
}

/// Truncated `D_{n,k,r}(s_1, ..., s_n)` with `n = s.len()`:
/// `Π_𝔭 [1 - Σ_{j=k}^n (-1)^{j-k} C(j-1,k-1) e_j(N(𝔭)^{-r s_1}, ...)]`
/// over prime ideals above rational primes `<= prime_limit`.
pub fn dirichlet_d(field: &NumberField, s: &[f64], k: u32, r: u32, prime_limit: u64) -> Result<f64> {
    dirichlet_d_with(field, s, k, r, prime_limit, &SieveConfig::default())
}

pub fn dirichlet_d_with(
    field: &NumberField,
    s: &[f64],
    k: u32,
    r: u32,
    prime_limit: u64,
    sieve: &SieveConfig,
) -> Result<f64> {
    let n = s.len() as u32;
    Params::new(n, k, r)?;
    if !convergence_region_check(s, k, r) {
        return Err(Error::Convergence(format!("{s:?} with k = {k}, r = {r}")));
    }
    let primes = sieve.primes_up_to(prime_limit)?;
    let signs: Vec<f64> = (k..=n)
        .map(|j| {
            let c = crate::combinatorics::binomial(j as u64 - 1, k as u64 - 1);
            let c: f64 = c.to_string().parse().expect("binomial fits in f64");
            if (j - k).is_multiple_of(2) {
                c
            } else {
                -c
            }
        })
        .collect();

    // Nonpositive factors are possible away from s = (1, ..., 1); track the
    // sign separately and sum log |factor|.
    let negative = std::sync::atomic::AtomicUsize::new(0);
    let zero = std::sync::atomic::AtomicBool::new(false);
    let (sum, _) = accumulate(&primes, CHUNK, |p| {
        let pf = p as f64;
        let mut term = 0.0;
        for c in split_prime(field, p).classes {
            let ys: Vec<f64> = s
                .iter()
                .map(|&si| pf.powf(-(c.f as f64) * r as f64 * si))
                .collect();
            let e = elementary_symmetric_upto(&ys, n as usize);
            let correction: f64 = (k..=n)
                .zip(&signs)
                .map(|(j, sign)| sign * e[j as usize])
                .sum();
            let factor = 1.0 - correction;
            if factor == 0.0 {
                zero.store(true, std::sync::atomic::Ordering::Relaxed);
            } else if factor < 0.0 {
                if c.g % 2 == 1 {
                    negative.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                }
                term += c.g as f64 * (-factor).ln();
            } else {
                term += c.g as f64 * (-correction).ln_1p();
            }
        }
        (term, false)
    });
    if zero.into_inner() {
        return Ok(0.0);
    }
    let magnitude = sum.value().exp();
    Ok(if negative.into_inner() % 2 == 1 {
        -magnitude
    } else {
        magnitude
    })
}
