//! Exact evaluation of local Euler factors and the binomial identities they
//! rest on. Everything here is exact rational arithmetic; the floating-point
//! products live in [`crate::product`].

use std::ops::{AddAssign, Mul};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `C(n, j)`, zero when `j > n`.
pub fn binomial(n: u64, j: u64) -> BigUint {
    if j > n {
        return BigUint::zero();
    }
    let j = j.min(n - j);
    let mut acc = BigUint::one();
    for i in 0..j {
        // acc = C(n, i) here, and C(n, i) * (n - i) is divisible by i + 1.
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn binomial_int(n: u64, j: u64) -> BigInt {
    BigInt::from(binomial(n, j))
}

fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

fn check_factor_args(q: u64, n: u32, k: u32) -> Result<()> {
    if q < 2 {
        return Err(Error::invalid(format!("norm power q = {q} must be at least 2")));
    }
    if !(2..=n).contains(&k) {
        return Err(Error::invalid(format!("need n >= k >= 2, got n = {n}, k = {k}")));
    }
    Ok(())
}

/// `Σ_{j<k} C(n,j) (1 - 1/q)^{n-j} q^{-j}`: the probability that at most
/// `k - 1` of `n` independent events of probability `1/q` occur.
pub fn local_factor(q: u64, n: u32, k: u32) -> Result<Rational> {
    check_factor_args(q, n, k)?;
    let x = ratio(1, q);
    let y = Rational::one() - &x;
    let mut acc = Rational::zero();
    for j in 0..k {
        let term = Rational::from_integer(binomial_int(n as u64, j as u64))
            * pow(&y, n - j)
            * pow(&x, j);
        acc += term;
    }
    Ok(acc)
}

/// `1 - Σ_{j=k}^{n} (-1)^{j-k} C(n,j) C(j-1,k-1) q^{-j}`. Equal to
/// [`local_factor`] for every admissible argument.
pub fn local_factor_complement(q: u64, n: u32, k: u32) -> Result<Rational> {
    check_factor_args(q, n, k)?;
    let x = ratio(1, q);
    let mut acc = Rational::zero();
    for j in k..=n {
        let coeff = binomial_int(n as u64, j as u64) * binomial_int(j as u64 - 1, k as u64 - 1);
        let term = Rational::from_integer(coeff) * pow(&x, j);
        if (j - k).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(Rational::one() - acc)
}

fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// `e_j(values)`, via the product recurrence over prefixes. Works for any
/// commutative ring type; `e_0 = 1` and `e_j = 0` for `j > len`.
pub fn elementary_symmetric<T>(values: &[T], j: usize) -> T
where
    T: Clone + Zero + One + AddAssign + for<'a> Mul<&'a T, Output = T>,
{
    if j > values.len() {
        return T::zero();
    }
    elementary_symmetric_upto(values, j).swap_remove(j)
}

/// `[e_0, e_1, ..., e_top]` of `values` in one pass.
pub fn elementary_symmetric_upto<T>(values: &[T], top: usize) -> Vec<T>
where
    T: Clone + Zero + One + AddAssign + for<'a> Mul<&'a T, Output = T>,
{
    let mut e = vec![T::zero(); top + 1];
    e[0] = T::one();
    for (i, v) in values.iter().enumerate() {
        for t in (1..=top.min(i + 1)).rev() {
            let add = e[t - 1].clone() * v;
            e[t] += add;
        }
    }
    e
}

/// Both sides of
/// `Σ_{j=k}^n (-1)^{j-k} C(n,j) C(j-1,k-1) x^j = Σ_{j=k}^n C(n,j) x^j (1-x)^{n-j}`.
pub fn binomial_identity_sides(n: u32, k: u32, x: &Rational) -> Result<(Rational, Rational)> {
    if !(1..=n).contains(&k) {
        return Err(Error::invalid(format!("need n >= k >= 1, got n = {n}, k = {k}")));
    }
    let one_minus = Rational::one() - x;
    let mut lhs = Rational::zero();
    let mut rhs = Rational::zero();
    for j in k..=n {
        let cnj = Rational::from_integer(binomial_int(n as u64, j as u64));
        let alt = Rational::from_integer(binomial_int(j as u64 - 1, k as u64 - 1));
        let xj = pow(x, j);
        let left = &cnj * &alt * &xj;
        if (j - k).is_multiple_of(2) {
            lhs += left;
        } else {
            lhs -= left;
        }
        rhs += cnj * xj * pow(&one_minus, n - j);
    }
    Ok((lhs, rhs))
}

/// `(Σ_{i=0}^{d} (-1)^i C(n,i), (-1)^d C(n-1,d))`; the two agree for `0 <= d < n`.
pub fn alternating_binomial(n: u64, d: u64) -> Result<(BigInt, BigInt)> {
    if n == 0 || d >= n {
        return Err(Error::invalid(format!("need 0 <= d < n, got n = {n}, d = {d}")));
    }
    let mut sum = BigInt::zero();
    for i in 0..=d {
        let c = binomial_int(n, i);
        if i % 2 == 0 {
            sum += c;
        } else {
            sum -= c;
        }
    }
    let mut closed = binomial_int(n - 1, d);
    if d % 2 == 1 {
        closed = -closed;
    }
    Ok((sum, closed))
}
