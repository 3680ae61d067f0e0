//! Property suites comparing closed forms with their oracles.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::classify::{
    mobius_inversion_check, psi, psi_convolution_oracle, psi_local, rho, rho_bruteforce,
};
use crate::combinatorics::{alternating_binomial, binomial_identity_sides, local_factor, local_factor_complement};
use crate::error::{Error, Result};
use crate::experiment::{counter_draw, draw_index, exact_rho_sum, exact_rho_sum_via_mobius};
use crate::field::NumberField;
use crate::ideals::{enumerate_ideals, IdealFactorization, IdealUniverse, PrimeIdealId};
use crate::params::Params;
use crate::product::{dedekind_zeta, probability, Precision, ProbabilityQuery};

/// Fields of the reference table.
pub const TABLE_FIELDS: [&str; 5] = ["Q", "Q(sqrt2)", "Q(sqrt-1)", "Q(zeta3)", "Q(zeta5)"];

const SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Psi,
    Rho,
    MobiusCount,
    ZetaConsistency,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Identities,
        Suite::Psi,
        Suite::Rho,
        Suite::MobiusCount,
        Suite::ZetaConsistency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Psi => "psi",
            Suite::Rho => "rho",
            Suite::MobiusCount => "mobius-count",
            Suite::ZetaConsistency => "zeta-consistency",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, mismatches: u64, total: u64) -> Check {
    Check {
        name: name.to_string(),
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches in {total} cases"),
    }
}

pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Identities => identities(),
        Suite::Psi => psi_suite(),
        Suite::Rho => rho_suite(),
        Suite::MobiusCount => mobius_suite(),
        Suite::ZetaConsistency => zeta_suite(),
    }?;
    Ok(SuiteReport {
        suite: suite.name().to_string(),
        checks,
    })
}

fn identities() -> Result<Vec<Check>> {
    let points = [(1, 2), (1, 3), (2, 7), (-1, 5)].map(|(a, b)| BigRational::new(BigInt::from(a), BigInt::from(b)));
    let (mut bad, mut total) = (0, 0);
    for n in 1..=12u32 {
        for k in 1..=n {
            for x in &points {
                let (lhs, rhs) = binomial_identity_sides(n, k, x)?;
                total += 1;
                bad += (lhs != rhs) as u64;
            }
        }
    }
    let mut out = vec![check("binomial identity, 1 <= k <= n <= 12", bad, total)];

    let (mut bad, mut range_bad, mut bound_bad, mut total) = (0, 0, 0, 0);
    for q in 2..=64u64 {
        for n in 2..=10u32 {
            for k in 2..=n {
                let a = local_factor(q, n, k)?;
                let b = local_factor_complement(q, n, k)?;
                total += 1;
                bad += (a != b) as u64;
                range_bad += !(a > BigRational::zero() && a < BigRational::one()) as u64;
                if q > (n - 1) as u64 {
                    let ratio = BigRational::new(BigInt::from(n - 1), BigInt::from(q));
                    bound_bad += (a < BigRational::one() - &ratio * &ratio) as u64;
                }
            }
        }
    }
    out.push(check("local factor equals its complement form", bad, total));
    out.push(check("local factor in (0, 1)", range_bad, total));
    out.push(check("local factor >= 1 - ((n-1)/q)^2", bound_bad, total));

    let (mut bad, mut total) = (0, 0);
    for n in 1..=30u64 {
        for d in 0..n {
            let (sum, closed) = alternating_binomial(n, d)?;
            total += 1;
            bad += (sum != closed) as u64;
        }
    }
    out.push(check("alternating binomial sums", bad, total));
    Ok(out)
}

fn single_prime(e: u32) -> IdealFactorization {
    IdealFactorization::prime_power(PrimeIdealId { p: 2, f: 1, index: 0 }, e)
}

fn psi_suite() -> Result<Vec<Check>> {
    let (mut bad, mut total) = (0, 0);
    let (mut vanish_bad, mut vanish_total) = (0, 0);
    for n in 2..=4u32 {
        for k in 2..=n {
            for r in 1..=2u32 {
                let params = Params::new(n, k, r)?;
                for pattern in (0..n).map(|_| 0..=r + 2).multi_cartesian_product() {
                    let tuple: Vec<_> = pattern.iter().map(|&e| single_prime(e)).collect();
                    let local = psi_local(params, &pattern);
                    total += 1;
                    bad += (local != psi_convolution_oracle(params, &tuple)?) as u64;
                    if pattern[0] != 0 && pattern[0] != r {
                        vanish_total += 1;
                        vanish_bad += (local != 0) as u64;
                    }
                }
            }
        }
    }
    let mut out = vec![
        check("psi_local against the defining convolution", bad, total),
        check("psi_local vanishes off {0, r}", vanish_bad, vanish_total),
    ];

    let universe = enumerate_ideals(&"Q(sqrt-1)".parse()?, 50)?;
    let (mut bad, mut sym_bad, mut total) = (0, 0, 0);
    for (n, k, r) in [(3, 2, 1), (3, 3, 1), (3, 2, 2)] {
        let params = Params::new(n, k, r)?;
        for s in 0..2000 {
            let tuple = draw_tuple(&universe, n, SEED, s);
            let value = psi(params, &tuple)?;
            total += 1;
            bad += (value != psi_convolution_oracle(params, &tuple)?) as u64;
            let mut rotated = tuple.clone();
            rotated.rotate_left(1);
            rotated.swap(0, 1);
            sym_bad += (psi(params, &rotated)? != value) as u64;
        }
    }
    out.push(check("psi against convolution on sampled Z[i] tuples", bad, total));
    out.push(check("psi symmetric under permutation", sym_bad, total));
    Ok(out)
}

fn draw_tuple(universe: &IdealUniverse, n: u32, seed: u64, sample: u64) -> Vec<IdealFactorization> {
    (0..n as u64)
        .map(|c| universe.ideal(draw_index(counter_draw(seed, sample, c), universe.len() as u64) as usize))
        .collect()
}

fn rho_suite() -> Result<Vec<Check>> {
    let gi: NumberField = "Q(sqrt-1)".parse()?;
    let universe = enumerate_ideals(&gi, 30)?;
    let ideals: Vec<_> = universe.iter().collect();
    let mut out = Vec::new();

    let (mut bad, mut total) = (0, 0);
    for (k, r) in [(2, 1), (2, 2)] {
        let params = Params::new(2, k, r)?;
        for a in &ideals {
            for b in &ideals {
                let t = [a.clone(), b.clone()];
                total += 1;
                bad += (rho(params, &t)? != rho_bruteforce(params, &t)?) as u64;
            }
        }
    }
    out.push(check("rho against subset scan, Z[i] x = 30, n = 2", bad, total));

    let (mut bad, mut total) = (0, 0);
    for (n, k, r) in [(3, 2, 1), (3, 3, 1), (3, 2, 2), (4, 3, 1), (4, 2, 1)] {
        let params = Params::new(n, k, r)?;
        for s in 0..20_000 {
            let t = draw_tuple(&universe, n, SEED, s);
            total += 1;
            bad += (rho(params, &t)? != rho_bruteforce(params, &t)?) as u64;
        }
    }
    out.push(check("rho against subset scan, sampled n in {3, 4}", bad, total));

    // coprime tuples: rho(ab) = rho(a) rho(b)
    let big = enumerate_ideals(&gi, 400)?;
    let (mut bad, mut total, mut s) = (0, 0, 0u64);
    let params = Params::new(3, 2, 1)?;
    while total < 1000 && s < 1_000_000 {
        let a = draw_tuple(&big, 3, SEED, s);
        let b = draw_tuple(&big, 3, SEED ^ 1, s);
        s += 1;
        let support = |t: &[IdealFactorization]| -> Vec<PrimeIdealId> {
            t.iter().flat_map(|i| i.factors().iter().map(|f| f.0)).collect()
        };
        let sa = support(&a);
        if support(&b).iter().any(|p| sa.contains(p)) {
            continue;
        }
        let ab: Vec<_> = a.iter().zip(&b).map(|(x, y)| x.mul(y)).collect();
        total += 1;
        bad += (rho(params, &ab)? != rho(params, &a)? * rho(params, &b)?) as u64;
    }
    out.push(check("rho multiplicative on coprime tuples", bad, total));
    Ok(out)
}

fn mobius_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let (mut bad, mut total) = (0, 0);
    for f in ["Q", "Q(sqrt-1)", "Q(zeta3)"] {
        let field: NumberField = f.parse()?;
        for x in 1..=30u64 {
            let universe = enumerate_ideals(&field, x)?;
            for (n, k) in [(2, 2), (3, 2), (3, 3)] {
                for r in 1..=2 {
                    let params = Params::new(n, k, r)?;
                    total += 1;
                    bad += (exact_rho_sum(&universe, params)?.rho_sum
                        != exact_rho_sum_via_mobius(&universe, params)?.rho_sum) as u64;
                }
            }
        }
    }
    out.push(check("direct count equals divisor-sum count", bad, total));

    let gi: NumberField = "Q(sqrt-1)".parse()?;
    let small = enumerate_ideals(&gi, 20)?;
    let ideals: Vec<_> = small.iter().collect();
    let (mut bad, mut total) = (0, 0);
    for (k, r) in [(2, 1), (2, 2)] {
        let params = Params::new(2, k, r)?;
        for a in &ideals {
            for b in &ideals {
                total += 1;
                bad += !mobius_inversion_check(params, &[a.clone(), b.clone()])? as u64;
            }
        }
    }
    out.push(check("rho = sum of psi over divisors, Z[i] norm <= 20, n = 2", bad, total));

    let medium = enumerate_ideals(&gi, 50)?;
    let (mut bad, mut total) = (0, 0);
    for (k, r) in [(2, 1), (3, 1), (2, 2)] {
        let params = Params::new(3, k, r)?;
        for s in 0..2000 {
            let t = draw_tuple(&medium, 3, SEED, s);
            total += 1;
            bad += !mobius_inversion_check(params, &t)? as u64;
        }
    }
    out.push(check("rho = sum of psi over divisors, sampled n = 3", bad, total));
    Ok(out)
}

/// Largest deviation of `P_{n,n,r} ζ_K(rn)` from 1 over the table fields.
fn zeta_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for f in TABLE_FIELDS {
        let field: NumberField = f.parse()?;
        let mut worst = 0.0f64;
        for n in 2..=3u32 {
            for r in 1..=2u32 {
                worst = worst.max(zeta_deviation(&field, n, r, 20_000)?);
            }
        }
        out.push(Check {
            name: format!("P_(n,n,r) * zeta_K(rn) = 1 for {}", field.label()),
            passed: worst <= 1e-9,
            detail: format!("largest deviation {worst:.3e}"),
        });
    }
    Ok(out)
}

/// `|P_{n,n,r} ζ_K(rn) - 1|` with both products over the first `primes`
/// rational primes.
pub fn zeta_deviation(field: &NumberField, n: u32, r: u32, primes: u64) -> Result<f64> {
    let query = ProbabilityQuery::new(field.clone(), Params::new(n, n, r)?, Precision::Primes(primes));
    let p = probability(&query)?;
    let z = dedekind_zeta(field, (r * n) as f64, p.last_prime)?;
    Ok((p.value * z - 1.0).abs())
}
