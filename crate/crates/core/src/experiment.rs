//! Exact and sampled counts of `k`-wise relatively `r`-prime tuples of
//! ideals of bounded norm, for comparison with the Euler product.
//!
//! # Sampling generator
//!
//! Draw `c` of sample `s` under seed `σ` is
//! `mix(mix(σ ^ mix(s)) ^ c)`, where `mix` is the SplitMix64 finalizer
//! (add `0x9E3779B97F4A7C15`, then xor-shift-multiply by `0xBF58476D1CE4E5B9`
//! and `0x94D049BB133111EB` with shifts 30, 27, 31). A draw `z` picks list
//! position `(z * H) >> 64` (128-bit product). Coordinate `c` of the tuple
//! uses counter `c`. Draws depend only on `(σ, s, c)`, so any partition of
//! the samples among workers sees the same tuples.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{psi_local, rho_columns};
use crate::error::{Error, Result};
use crate::field::NumberField;
use crate::ideals::{EnumerationConfig, IdealUniverse};
use crate::params::Params;
use crate::product::{probability, Precision, ProbabilityQuery};

/// Largest `H(x)^n` the tuple-by-tuple count will walk.
pub const DEFAULT_BRUTE_CAP: u128 = 100_000_000;
/// Largest `H(x)^n` the divisor-sum count accepts; its accumulator is `i128`.
pub const DEFAULT_MOBIUS_CAP: u128 = 1_000_000_000_000_000_000_000_000_000_000;

const SAMPLE_CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactCount {
    pub x: u64,
    pub params: Params,
    pub rho_sum: BigUint,
    /// `H(x)^n`.
    pub tuple_count: BigUint,
    pub ratio: f64,
}

impl ExactCount {
    fn new(x: u64, params: Params, rho_sum: BigUint, h: u64) -> Self {
        let tuple_count = BigUint::from(h).pow(params.n);
        let ratio = ratio_of(&rho_sum, &tuple_count);
        ExactCount {
            x,
            params,
            rho_sum,
            tuple_count,
            ratio,
        }
    }
}

fn ratio_of(a: &BigUint, b: &BigUint) -> f64 {
    // scale down together so both fit in f64 without overflow
    let shift = b.bits().saturating_sub(1000);
    let a = (a >> shift).to_f64().unwrap_or(f64::NAN);
    let b = (b >> shift).to_f64().unwrap_or(f64::NAN);
    a / b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub x: u64,
}

fn tuple_cap_check(h: u64, n: u32, cap: u128, what: &'static str) -> Result<()> {
    let needed = (h as u128).checked_pow(n).unwrap_or(u128::MAX);
    if needed > cap {
        return Err(Error::CapExceeded { what, needed, cap });
    }
    Ok(())
}

/// Counts tuples one by one.
pub fn exact_rho_sum(universe: &IdealUniverse, params: Params) -> Result<ExactCount> {
    exact_rho_sum_with(universe, params, DEFAULT_BRUTE_CAP)
}

pub fn exact_rho_sum_with(universe: &IdealUniverse, params: Params, cap: u128) -> Result<ExactCount> {
    let h = universe.len() as u64;
    let n = params.n as usize;
    tuple_cap_check(h, params.n, cap, "tuples for exact count")?;
    let total: u64 = (0..h as usize)
        .into_par_iter()
        .map(|first| {
            let mut scratch = Vec::new();
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let mut count = 0u64;
            loop {
                let items: Vec<&[(u32, u32)]> = idx.iter().map(|&i| universe.factors(i)).collect();
                count += rho_columns(params.k, params.r, &items, &mut scratch) as u64;
                // odometer over positions 1..n
                let mut pos = n - 1;
                loop {
                    if pos == 0 {
                        return count;
                    }
                    idx[pos] += 1;
                    if idx[pos] < h as usize {
                        break;
                    }
                    idx[pos] = 0;
                    pos -= 1;
                }
            }
        })
        .sum();
    Ok(ExactCount::new(universe.x(), params, BigUint::from(total), h))
}

/// Counts tuples through `Σ ψ(𝔡_1, ..., 𝔡_n) Π H(x / N(𝔡_i))`.
///
/// Only `ψ(𝔡) != 0` contributes: each `𝔡_i = 𝔟_i^r` with `𝔟_i` squarefree
/// and every prime of the `𝔟_i` shared by at least `k` of them. The walk
/// picks, prime by prime, the set of coordinates it divides.
pub fn exact_rho_sum_via_mobius(universe: &IdealUniverse, params: Params) -> Result<ExactCount> {
    exact_rho_sum_via_mobius_with(universe, params, DEFAULT_MOBIUS_CAP)
}

pub fn exact_rho_sum_via_mobius_with(
    universe: &IdealUniverse,
    params: Params,
    cap: u128,
) -> Result<ExactCount> {
    let h = universe.len() as u64;
    tuple_cap_check(h, params.n, cap, "tuples for divisor-sum count")?;
    if params.n > 24 {
        return Err(Error::invalid("divisor-sum count supports n <= 24"));
    }
    let x = universe.x();
    let n = params.n as usize;
    let mut qs: Vec<u64> = universe
        .primes()
        .iter()
        .filter_map(|id| id.norm_u64()?.checked_pow(params.r))
        .filter(|&q| q <= x)
        .collect();
    qs.sort_unstable();

    // coefficient of a prime hitting exactly m coordinates
    let unit = vec![0u32; n];
    let coeff: Vec<i128> = (0..=params.n)
        .map(|m| {
            let mut nu = unit.clone();
            nu[..m as usize].fill(params.r);
            psi_local(params, &nu) as i128
        })
        .collect();
    let masks: Vec<u32> = (1u32..1 << n)
        .filter(|m| m.count_ones() >= params.k)
        .collect();

    let walk = MobiusWalk {
        universe,
        qs: &qs,
        coeff: &coeff,
        masks: &masks,
        k: params.k as usize,
        x,
    };
    let mut norms = vec![1u64; n];
    let total = walk.descend(0, &mut norms, 1)?;
    let total = BigUint::try_from(total).map_err(|_| Error::invalid("negative tuple count"))?;
    Ok(ExactCount::new(x, params, total, h))
}

struct MobiusWalk<'a> {
    universe: &'a IdealUniverse,
    qs: &'a [u64],
    coeff: &'a [i128],
    masks: &'a [u32],
    k: usize,
    x: u64,
}

impl MobiusWalk<'_> {
    fn term(&self, norms: &[u64], weight: i128) -> Result<i128> {
        norms
            .iter()
            .try_fold(weight, |acc, &m| acc.checked_mul(self.universe.count_norm_at_most(self.x / m) as i128))
            .ok_or_else(|| Error::invalid("divisor-sum term overflows i128"))
    }

    fn descend(&self, start: usize, norms: &mut [u64], weight: i128) -> Result<i128> {
        let mut total = self.term(norms, weight)?;
        let mut sorted = norms.to_vec();
        sorted.sort_unstable();
        // the k smallest coordinates must all absorb q
        let kth = sorted[self.k - 1];
        for pos in start..self.qs.len() {
            let q = self.qs[pos];
            if q > self.x / kth {
                break;
            }
            for &mask in self.masks {
                let fits = (0..norms.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .all(|i| q <= self.x / norms[i]);
                if !fits {
                    continue;
                }
                let c = self.coeff[mask.count_ones() as usize];
                for i in (0..norms.len()).filter(|i| mask >> i & 1 == 1) {
                    norms[i] *= q;
                }
                let sub = self.descend(pos + 1, norms, weight * c);
                for i in (0..norms.len()).filter(|i| mask >> i & 1 == 1) {
                    norms[i] /= q;
                }
                total = total
                    .checked_add(sub?)
                    .ok_or_else(|| Error::invalid("divisor-sum total overflows i128"))?;
            }
        }
        Ok(total)
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The counter-based draw described in the module docs.
pub fn counter_draw(seed: u64, stream: u64, counter: u64) -> u64 {
    mix(mix(seed ^ mix(stream)) ^ counter)
}

/// Uniform position in `0..len` from a draw.
pub fn draw_index(draw: u64, len: u64) -> u64 {
    ((draw as u128 * len as u128) >> 64) as u64
}

/// Mean of `ρ` over `samples` uniform `n`-tuples from the universe.
pub fn empirical_probability(
    universe: &IdealUniverse,
    params: Params,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::invalid("samples must be positive"));
    }
    if universe.is_empty() {
        return Err(Error::invalid("empty universe"));
    }
    let h = universe.len() as u64;
    let n = params.n as u64;
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut scratch = Vec::new();
            let mut items: Vec<&[(u32, u32)]> = Vec::with_capacity(n as usize);
            let end = ((c + 1) * SAMPLE_CHUNK).min(samples);
            let mut hits = 0u64;
            for s in c * SAMPLE_CHUNK..end {
                items.clear();
                for coord in 0..n {
                    let i = draw_index(counter_draw(seed, s, coord), h);
                    items.push(universe.factors(i as usize));
                }
                hits += rho_columns(params.k, params.r, &items, &mut scratch) as u64;
            }
            hits
        })
        .sum();
    let mean = hits as f64 / samples as f64;
    Ok(MonteCarloEstimate {
        mean,
        standard_error: (mean * (1.0 - mean) / samples as f64).sqrt(),
        samples,
        seed,
        x: universe.x(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableConfig {
    /// Use the exact count while `H(x)^n` stays at or below this.
    pub exact_cap: u128,
    pub samples: u64,
    pub seed: u64,
    /// Digits for the reference value of `P`.
    pub digits: u32,
    pub enumeration: EnumerationConfig,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            exact_cap: 1_000_000_000_000,
            samples: 200_000,
            seed: 0,
            digits: 4,
            enumeration: EnumerationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub x: u64,
    /// `H(x)`.
    pub ideal_count: u64,
    /// Exact ratio or Monte-Carlo mean.
    pub ratio: f64,
    pub exact: bool,
    /// Present for Monte-Carlo rows.
    pub standard_error: Option<f64>,
    pub probability: f64,
    pub gap: f64,
}

pub fn convergence_table(
    field: &NumberField,
    params: Params,
    x_values: &[u64],
    config: &TableConfig,
) -> Result<Vec<ConvergenceRow>> {
    if x_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("x values must be ascending"));
    }
    let query = ProbabilityQuery::new(field.clone(), params, Precision::Digits(config.digits));
    let p = probability(&query)?.value;
    x_values
        .iter()
        .map(|&x| {
            let universe = IdealUniverse::build(field, x, &config.enumeration)?;
            let h = universe.len() as u64;
            let exact_ok = (h as u128)
                .checked_pow(params.n)
                .is_some_and(|t| t <= config.exact_cap);
            let (ratio, exact, standard_error) = if exact_ok {
                (exact_rho_sum_via_mobius(&universe, params)?.ratio, true, None)
            } else {
                let est = empirical_probability(&universe, params, config.samples, config.seed)?;
                (est.mean, false, Some(est.standard_error))
            };
            Ok(ConvergenceRow {
                x,
                ideal_count: h,
                ratio,
                exact,
                standard_error,
                probability: p,
                gap: (ratio - p).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{rho, rho_bruteforce};
    use crate::ideals::enumerate_ideals;

    fn field(s: &str) -> NumberField {
        s.parse().unwrap()
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    #[test]
    fn integer_pairs_up_to_four() {
        let u = enumerate_ideals(&field("Q"), 4).unwrap();
        let pr = Params::pairwise(2).unwrap();
        let oracle = (1..=4u64)
            .flat_map(|a| (1..=4u64).map(move |b| (a, b)))
            .filter(|&(a, b)| gcd(a, b) == 1)
            .count();
        assert_eq!(oracle, 11);
        assert_eq!(exact_rho_sum(&u, pr).unwrap().rho_sum, BigUint::from(11u32));
        let m = exact_rho_sum_via_mobius(&u, pr).unwrap();
        assert_eq!(m.rho_sum, BigUint::from(11u32));
        assert_eq!(m.tuple_count, BigUint::from(16u32));
        assert_eq!(m.ratio, 11.0 / 16.0);
    }

    #[test]
    fn unit_universe() {
        let u = enumerate_ideals(&field("Q"), 1).unwrap();
        for (n, k, r) in [(2, 2, 1), (3, 2, 2), (4, 4, 1)] {
            let pr = Params::new(n, k, r).unwrap();
            assert_eq!(exact_rho_sum(&u, pr).unwrap().rho_sum, BigUint::from(1u32));
            assert_eq!(exact_rho_sum_via_mobius(&u, pr).unwrap().rho_sum, BigUint::from(1u32));
            let est = empirical_probability(&u, pr, 1000, 5).unwrap();
            assert_eq!((est.mean, est.standard_error), (1.0, 0.0));
        }
    }

    #[test]
    fn gaussian_pairs_against_pairwise_oracle() {
        let pr = Params::pairwise(2).unwrap();
        for x in [5u64, 10, 20] {
            let u = enumerate_ideals(&field("Q(sqrt-1)"), x).unwrap();
            let ideals: Vec<_> = u.iter().collect();
            let mut oracle = 0u32;
            for a in &ideals {
                for b in &ideals {
                    oracle += rho_bruteforce(pr, &[a.clone(), b.clone()]).unwrap() as u32;
                }
            }
            assert_eq!(exact_rho_sum(&u, pr).unwrap().rho_sum, BigUint::from(oracle));
            assert_eq!(exact_rho_sum_via_mobius(&u, pr).unwrap().rho_sum, BigUint::from(oracle));
        }
    }

    #[test]
    fn below_smallest_prime_power_every_tuple_counts() {
        let u = enumerate_ideals(&field("Q(zeta5)"), 10).unwrap();
        // the smallest prime ideal of Z[zeta5] has norm 5; r = 2 needs 25
        let pr = Params::new(3, 2, 2).unwrap();
        let h = u.len() as u64;
        assert_eq!(exact_rho_sum_via_mobius(&u, pr).unwrap().rho_sum, BigUint::from(h).pow(3));
    }

    #[test]
    fn both_counts_agree_on_a_grid() {
        for f in ["Q", "Q(sqrt-1)", "Q(zeta3)", "Q(sqrt2)"] {
            for x in [7u64, 16, 30] {
                let u = enumerate_ideals(&field(f), x).unwrap();
                for (n, k, r) in [(2, 2, 1), (3, 2, 1), (3, 3, 1), (2, 2, 2), (3, 2, 2)] {
                    let pr = Params::new(n, k, r).unwrap();
                    assert_eq!(
                        exact_rho_sum(&u, pr).unwrap().rho_sum,
                        exact_rho_sum_via_mobius(&u, pr).unwrap().rho_sum,
                        "{f} x={x} {pr:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn brute_cap() {
        let u = enumerate_ideals(&field("Q"), 1000).unwrap();
        let pr = Params::pairwise(3).unwrap();
        assert!(matches!(exact_rho_sum(&u, pr), Err(Error::CapExceeded { .. })));
        assert!(exact_rho_sum_via_mobius(&u, pr).is_ok());
    }

    #[test]
    fn rational_ratio_near_six_over_pi_squared() {
        let u = enumerate_ideals(&field("Q"), 1000).unwrap();
        let c = exact_rho_sum_via_mobius(&u, Params::pairwise(2).unwrap()).unwrap();
        assert!((c.ratio - 0.6079).abs() < 0.01);
        assert!(c.rho_sum <= c.tuple_count);
    }

    #[test]
    fn draws_are_reproducible_and_uniform_enough() {
        assert_eq!(counter_draw(1, 2, 3), counter_draw(1, 2, 3));
        assert_ne!(counter_draw(1, 2, 3), counter_draw(1, 2, 4));
        assert_ne!(counter_draw(1, 2, 3), counter_draw(2, 2, 3));
        let mut buckets = [0u32; 10];
        for s in 0..100_000 {
            buckets[draw_index(counter_draw(7, s, 0), 10) as usize] += 1;
        }
        assert!(buckets.iter().all(|&b| (9_500..10_500).contains(&b)), "{buckets:?}");
        assert_eq!(draw_index(u64::MAX, 10), 9);
        assert_eq!(draw_index(0, 10), 0);
    }

    #[test]
    fn sampling_matches_exact_ratio() {
        let u = enumerate_ideals(&field("Q(sqrt-1)"), 2000).unwrap();
        let pr = Params::pairwise(2).unwrap();
        let exact = exact_rho_sum_via_mobius(&u, pr).unwrap().ratio;
        let est = empirical_probability(&u, pr, 100_000, 11).unwrap();
        assert!((est.mean - exact).abs() < 5.0 * est.standard_error);
        let again = empirical_probability(&u, pr, 100_000, 11).unwrap();
        assert_eq!(est, again);
        assert!(empirical_probability(&u, pr, 0, 11).is_err());
    }

    #[test]
    fn sampling_ignores_worker_count() {
        let u = enumerate_ideals(&field("Q(sqrt2)"), 3000).unwrap();
        let pr = Params::pairwise(3).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(5).build().unwrap();
        let a = one.install(|| empirical_probability(&u, pr, 50_000, 3).unwrap());
        let b = many.install(|| empirical_probability(&u, pr, 50_000, 3).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_tuples_agree_with_rho() {
        // the fast path used while sampling must match the public rho
        let u = enumerate_ideals(&field("Q(sqrt-1)"), 300).unwrap();
        let pr = Params::new(4, 3, 1).unwrap();
        let h = u.len() as u64;
        for s in 0..2000 {
            let idx: Vec<usize> = (0..4).map(|c| draw_index(counter_draw(9, s, c), h) as usize).collect();
            let items: Vec<_> = idx.iter().map(|&i| u.factors(i)).collect();
            let tuple: Vec<_> = idx.iter().map(|&i| u.ideal(i)).collect();
            assert_eq!(rho_columns(pr.k, pr.r, &items, &mut Vec::new()) as u8, rho(pr, &tuple).unwrap());
        }
    }

    #[test]
    fn convergence_rows() {
        let q = field("Q");
        let pr = Params::pairwise(2).unwrap();
        let rows = convergence_table(&q, pr, &[1, 10, 100, 1000], &TableConfig::default()).unwrap();
        assert_eq!(rows[0].ratio, 1.0);
        assert!((rows[0].gap - (1.0 - rows[0].probability)).abs() < 1e-15);
        assert!(rows.iter().all(|r| r.exact));
        assert!(rows[3].gap < 0.01);
        assert!(rows[3].gap < rows[1].gap);
        let config = TableConfig { exact_cap: 10, samples: 20_000, ..Default::default() };
        let rows = convergence_table(&q, pr, &[100], &config).unwrap();
        assert!(!rows[0].exact && rows[0].standard_error.is_some());
        assert!(convergence_table(&q, pr, &[10, 5], &config).is_err());
    }
}
