//! The characteristic function `ρ` of `k`-wise relative `r`-primality and
//! its Möbius transform `ψ`, each paired with a slow oracle.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::ideals::{divisors, gcd_ideal, mobius, IdealFactorization};
use crate::params::Params;

/// Cap on the number of divisor tuples the convolution oracles will visit.
pub const DEFAULT_DIVISOR_CAP: u64 = 1_000_000;

fn check_arity(params: Params, tuple: &[IdealFactorization]) -> Result<()> {
    if tuple.len() != params.n as usize {
        return Err(Error::invalid(format!(
            "expected {} ideals, got {}",
            params.n,
            tuple.len()
        )));
    }
    Ok(())
}

/// `ρ` on factor slices: false iff some prime has exponent `>= r` in at
/// least `k` items. `scratch` is reused between calls.
pub fn rho_columns<P: Ord + Copy>(
    k: u32,
    r: u32,
    items: &[&[(P, u32)]],
    scratch: &mut Vec<P>,
) -> bool {
    scratch.clear();
    for item in items {
        scratch.extend(item.iter().filter(|&&(_, e)| e >= r).map(|&(p, _)| p));
    }
    if scratch.len() < k as usize {
        return true;
    }
    scratch.sort_unstable();
    scratch
        .chunk_by(|a, b| a == b)
        .all(|run| run.len() < k as usize)
}

pub fn rho(params: Params, tuple: &[IdealFactorization]) -> Result<u8> {
    check_arity(params, tuple)?;
    let items: Vec<_> = tuple.iter().map(|a| a.factors()).collect();
    Ok(rho_columns(params.k, params.r, &items, &mut Vec::new()) as u8)
}

/// Checks every `k`-subset: it fails when its gcd is divisible by some `𝔭^r`.
pub fn rho_bruteforce(params: Params, tuple: &[IdealFactorization]) -> Result<u8> {
    check_arity(params, tuple)?;
    for subset in tuple.iter().cloned().combinations(params.k as usize) {
        let g = gcd_ideal(&subset)?;
        if g.factors().iter().any(|&(_, e)| e >= params.r) {
            return Ok(0);
        }
    }
    Ok(1)
}

/// `C(n, j)` for the small arguments `ψ` needs.
fn small_binomial(n: u32, j: u32) -> i64 {
    if j > n {
        return 0;
    }
    let j = j.min(n - j);
    let mut acc: u128 = 1;
    for i in 0..j as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    i64::try_from(acc).expect("binomial fits in i64")
}

/// `ψ` at a single prime, from the exponents `ν_1, ..., ν_n` of that prime.
///
/// With `m = #{i : ν_i = r}`: `1` if every `ν_i = 0`;
/// `(-1)^{m-k+1} C(m-1, k-1)` if every `ν_i ∈ {0, r}` and `m >= k`; else `0`.
pub fn psi_local(params: Params, exponents: &[u32]) -> i64 {
    let Params { k, r, .. } = params;
    let mut m = 0u32;
    for &v in exponents {
        if v == r {
            m += 1;
        } else if v != 0 {
            return 0;
        }
    }
    if m == 0 {
        return 1;
    }
    if m < k {
        return 0;
    }
    let c = small_binomial(m - 1, k - 1);
    if (m - k + 1).is_multiple_of(2) {
        c
    } else {
        -c
    }
}

/// `ψ` on factor slices as a product of [`psi_local`] over prime columns.
pub fn psi_columns<P: Ord + Copy>(params: Params, items: &[&[(P, u32)]]) -> i64 {
    // any exponent other than r already forces zero
    if items.iter().any(|it| it.iter().any(|&(_, e)| e != params.r)) {
        return 0;
    }
    let mut support: Vec<P> = items.iter().flat_map(|it| it.iter().map(|&(p, _)| p)).collect();
    support.sort_unstable();
    support.dedup();
    let mut column = vec![0u32; items.len()];
    let mut value = 1i64;
    for p in support {
        for (slot, item) in column.iter_mut().zip(items) {
            *slot = item
                .binary_search_by(|(q, _)| q.cmp(&p))
                .map(|i| item[i].1)
                .unwrap_or(0);
        }
        value *= psi_local(params, &column);
        if value == 0 {
            return 0;
        }
    }
    value
}

pub fn psi(params: Params, tuple: &[IdealFactorization]) -> Result<i64> {
    check_arity(params, tuple)?;
    let items: Vec<_> = tuple.iter().map(|a| a.factors()).collect();
    Ok(psi_columns(params, &items))
}

fn divisor_lists(tuple: &[IdealFactorization], cap: u64) -> Result<Vec<Vec<IdealFactorization>>> {
    let needed: u128 = tuple
        .iter()
        .map(|a| a.factors().iter().map(|&(_, e)| e as u128 + 1).product::<u128>())
        .product();
    if needed > cap as u128 {
        return Err(Error::CapExceeded {
            what: "divisor tuples",
            needed,
            cap: cap as u128,
        });
    }
    Ok(tuple.iter().map(divisors).collect())
}

/// `Σ ρ(𝔡_1, ..., 𝔡_n) μ(𝔢_1)...μ(𝔢_n)` over all `𝔞_i = 𝔡_i 𝔢_i`.
pub fn psi_convolution_oracle(params: Params, tuple: &[IdealFactorization]) -> Result<i64> {
    psi_convolution_oracle_with(params, tuple, DEFAULT_DIVISOR_CAP)
}

pub fn psi_convolution_oracle_with(
    params: Params,
    tuple: &[IdealFactorization],
    cap: u64,
) -> Result<i64> {
    check_arity(params, tuple)?;
    let lists = divisor_lists(tuple, cap)?;
    let mut total = 0i64;
    for ds in lists.iter().multi_cartesian_product() {
        let mut sign = 1i64;
        for (a, d) in tuple.iter().zip(&ds) {
            sign *= mobius(&a.quotient(d).expect("divisor")) as i64;
            if sign == 0 {
                break;
            }
        }
        if sign != 0 {
            let ds: Vec<IdealFactorization> = ds.into_iter().cloned().collect();
            total += sign * rho(params, &ds)? as i64;
        }
    }
    Ok(total)
}

/// Whether `ρ(𝔞) = Σ_{𝔡_i | 𝔞_i} ψ(𝔡)` holds for this tuple.
pub fn mobius_inversion_check(params: Params, tuple: &[IdealFactorization]) -> Result<bool> {
    mobius_inversion_check_with(params, tuple, DEFAULT_DIVISOR_CAP)
}

pub fn mobius_inversion_check_with(
    params: Params,
    tuple: &[IdealFactorization],
    cap: u64,
) -> Result<bool> {
    check_arity(params, tuple)?;
    let lists = divisor_lists(tuple, cap)?;
    let mut total = 0i64;
    for ds in lists.iter().multi_cartesian_product() {
        let items: Vec<_> = ds.iter().map(|d| d.factors()).collect();
        total += psi_columns(params, &items);
    }
    Ok(total == rho(params, tuple)? as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::PrimeIdealId;

    fn id(p: u64) -> PrimeIdealId {
        PrimeIdealId { p, f: 1, index: 0 }
    }

    fn prime(p: u64) -> IdealFactorization {
        IdealFactorization::prime(id(p))
    }

    fn ideal(parts: &[(u64, u32)]) -> IdealFactorization {
        IdealFactorization::from_factors(parts.iter().map(|&(p, e)| (id(p), e)))
    }

    fn params(n: u32, k: u32, r: u32) -> Params {
        Params::new(n, k, r).unwrap()
    }

    #[test]
    fn rho_examples() {
        let one = IdealFactorization::unit();
        for (pr, tuple, expected) in [
            (params(3, 2, 1), vec![one.clone(), one.clone(), one.clone()], 1),
            (params(3, 2, 1), vec![prime(2), prime(2), prime(3)], 0),
            (params(2, 2, 2), vec![prime(2), prime(2)], 1),
            (params(4, 3, 1), vec![prime(2), prime(2), prime(3), ideal(&[(2, 1), (3, 1)])], 0),
            (params(4, 3, 1), vec![prime(2), prime(2), prime(3), prime(5)], 1),
        ] {
            assert_eq!(rho(pr, &tuple).unwrap(), expected);
            assert_eq!(rho_bruteforce(pr, &tuple).unwrap(), expected);
        }
        assert!(rho(params(3, 2, 1), &[prime(2)]).is_err());
    }

    #[test]
    fn psi_local_examples() {
        assert_eq!(psi_local(params(3, 2, 1), &[0, 0, 0]), 1);
        assert_eq!(psi_local(params(3, 2, 1), &[1, 1, 0]), -1);
        assert_eq!(psi_local(params(3, 2, 1), &[1, 1, 1]), 2);
        assert_eq!(psi_local(params(2, 2, 2), &[1, 2]), 0);
        assert_eq!(psi_local(params(3, 2, 1), &[1, 0, 0]), 0);
        assert_eq!(psi_local(params(4, 3, 2), &[2, 2, 2, 2]), 3);
    }

    #[test]
    fn psi_examples() {
        let pr = params(3, 2, 1);
        let one = IdealFactorization::unit();
        assert_eq!(psi(pr, &[one.clone(), one.clone(), one]).unwrap(), 1);
        let t = [ideal(&[(2, 1), (3, 1)]), prime(2), prime(3)];
        assert_eq!(psi(pr, &t).unwrap(), 1);
        assert_eq!(psi_convolution_oracle(pr, &t).unwrap(), 1);
        let t = [ideal(&[(2, 2)]), prime(2), prime(3)];
        assert_eq!(psi(pr, &t).unwrap(), 0);
        assert_eq!(psi_convolution_oracle(pr, &t).unwrap(), 0);
    }

    #[test]
    fn psi_matches_convolution_on_single_prime_patterns() {
        for n in 2..=4u32 {
            for k in 2..=n {
                for r in 1..=2u32 {
                    let pr = params(n, k, r);
                    let top = r + 2;
                    for pattern in (0..n).map(|_| 0..=top).multi_cartesian_product() {
                        let tuple: Vec<_> = pattern.iter().map(|&e| ideal(&[(2, e)])).collect();
                        assert_eq!(
                            psi_local(pr, &pattern),
                            psi_convolution_oracle(pr, &tuple).unwrap(),
                            "{pattern:?} n={n} k={k} r={r}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mobius_inversion_on_small_tuples() {
        let pr = params(3, 2, 1);
        let t = [ideal(&[(2, 1), (3, 2)]), ideal(&[(2, 2)]), ideal(&[(3, 1), (5, 1)])];
        assert!(mobius_inversion_check(pr, &t).unwrap());
        let one = IdealFactorization::unit();
        assert!(mobius_inversion_check(pr, &[one.clone(), one.clone(), one]).unwrap());
        let big = [ideal(&[(2, 40), (3, 40)]), ideal(&[(2, 40), (3, 40)]), ideal(&[(5, 40)])];
        assert!(matches!(
            mobius_inversion_check(pr, &big),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn vanishing_cases() {
        for r in 1..=3u32 {
            for n in 2..=4u32 {
                let pr = params(n, 2, r);
                for v in (1..r).chain(r + 1..r + 4) {
                    let mut nu = vec![r; n as usize];
                    nu[0] = v;
                    assert_eq!(psi_local(pr, &nu), 0);
                }
            }
        }
    }
}
