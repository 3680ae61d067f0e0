//! How rational primes decompose in a number field.
//!
//! For each rational prime `p` the decomposition `pO = Π 𝔭_i^{e_i}` is reported
//! as a list of [`PrimeClass`]es, grouping prime ideals that share residue
//! degree `f` and ramification index `e`. Every class satisfies
//! `Σ e·f·g = [K : Q]`.

pub mod sieve;

use std::collections::HashMap;
use std::sync::RwLock;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{euler_phi, factorize, FieldSpec, NumberField};
use crate::polymod::{self, PolyMod};

pub use sieve::{is_prime, nth_prime, rational_primes_up_to, SieveConfig, DEFAULT_SIEVE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeClass {
    pub p: u64,
    /// Residue degree; each ideal in the class has norm `p^f`.
    pub f: u32,
    /// Ramification index.
    pub e: u32,
    /// Number of distinct prime ideals above `p` with this `(e, f)`.
    pub g: u32,
}

impl PrimeClass {
    pub fn norm(&self) -> Option<u64> {
        self.p.checked_pow(self.f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSplitting {
    pub p: u64,
    /// Sorted by `(f, e)`.
    pub classes: Vec<PrimeClass>,
    /// Set when the shapes come from factoring a polynomial that is not
    /// squarefree mod `p`; `p` may then divide the index and the reported
    /// ramification is not guaranteed.
    pub caveat: bool,
}

impl PrimeSplitting {
    /// Number of prime ideals above `p`.
    pub fn ideal_count(&self) -> u32 {
        self.classes.iter().map(|c| c.g).sum()
    }

    pub fn degree_sum(&self) -> u32 {
        self.classes.iter().map(|c| c.e * c.f * c.g).sum()
    }
}

/// Kronecker symbol `(a | b)`.
pub fn kronecker_symbol(a: i64, b: i64) -> i8 {
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut a = a as i128;
    let mut b = b as i128;
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut sign = 1i8;
    let twos = b.trailing_zeros();
    b >>= twos;
    if twos % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
        sign = -sign;
    }
    if b < 0 {
        b = -b;
        if a < 0 {
            sign = -sign;
        }
    }
    // b is now odd and positive: Jacobi symbol with reciprocity.
    a = a.rem_euclid(b);
    while a != 0 {
        let t = a.trailing_zeros();
        a >>= t;
        if t % 2 == 1 && matches!(b % 8, 3 | 5) {
            sign = -sign;
        }
        if a % 4 == 3 && b % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut b);
        a %= b;
    }
    if b == 1 {
        sign
    } else {
        0
    }
}

/// Least `t >= 1` with `a^t ≡ 1 (mod m)`.
pub fn multiplicative_order(a: i64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::invalid("modulus must be positive"));
    }
    if m == 1 {
        return Ok(1);
    }
    let a = (a as i128).rem_euclid(m as i128) as u64;
    if a.gcd(&m) != 1 {
        return Err(Error::invalid(format!("gcd({a}, {m}) != 1")));
    }
    let mut order = euler_phi(m);
    for (q, _) in factorize(order) {
        while order.is_multiple_of(q) && polymod::pow_mod(a, order / q, m) == 1 {
            order /= q;
        }
    }
    Ok(order)
}

/// Factor-degree census of a monic polynomial mod `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeCensus {
    /// `(degree, count)` of irreducible factors of the squarefree part.
    pub degrees: Vec<(u32, u32)>,
    /// `deg f - deg rad(f)`.
    pub removed_multiplicity: u32,
}

/// Distinct-degree factorization of the squarefree part of `poly` over F_p.
pub fn distinct_degree_factor_degrees(poly: &PolyMod) -> DegreeCensus {
    let sff = polymod::squarefree_decomposition(poly);
    let mut radical = PolyMod::one(poly.modulus());
    for (g, _) in &sff {
        radical = radical.mul(g);
    }
    let total = poly.degree().unwrap_or(0) as u32;
    let rad_deg = radical.degree().unwrap_or(0) as u32;
    DegreeCensus {
        degrees: polymod::distinct_degree(&radical),
        removed_multiplicity: total - rad_deg,
    }
}

fn merge_classes(p: u64, mut raw: Vec<(u32, u32, u32)>) -> Vec<PrimeClass> {
    raw.sort_unstable();
    let mut out: Vec<PrimeClass> = Vec::new();
    for (f, e, g) in raw {
        match out.last_mut() {
            Some(last) if last.f == f && last.e == e => last.g += g,
            _ => out.push(PrimeClass { p, f, e, g }),
        }
    }
    out
}

fn split_cyclotomic(m: u64, p: u64) -> Vec<PrimeClass> {
    let mut a = 0u32;
    let mut rest = m;
    while rest.is_multiple_of(p) {
        rest /= p;
        a += 1;
    }
    let e = if a == 0 { 1 } else { euler_phi(p.pow(a)) as u32 };
    let f = multiplicative_order(p as i64, rest).expect("p is coprime to m'") as u32;
    let g = (euler_phi(rest) / f as u64) as u32;
    vec![PrimeClass { p, f, e, g }]
}

fn split_polynomial(coeffs: &[num_bigint::BigInt], p: u64) -> (Vec<PrimeClass>, bool) {
    let f = PolyMod::from_integers(coeffs, p);
    let mut raw = Vec::new();
    let mut ramified = false;
    for (factor, mult) in polymod::squarefree_decomposition(&f) {
        if mult > 1 {
            ramified = true;
        }
        for (deg, count) in polymod::distinct_degree(&factor) {
            raw.push((deg, mult, count));
        }
    }
    (merge_classes(p, raw), ramified)
}

/// Decomposition of the rational prime `p` in `field`.
pub fn split_prime(field: &NumberField, p: u64) -> PrimeSplitting {
    let (classes, caveat) = match field.spec() {
        FieldSpec::Rational => (vec![PrimeClass { p, f: 1, e: 1, g: 1 }], false),
        FieldSpec::Quadratic(_) => {
            let disc = field.quadratic_discriminant().expect("quadratic");
            let class = match kronecker_symbol(disc, p as i64) {
                1 => PrimeClass { p, f: 1, e: 1, g: 2 },
                -1 => PrimeClass { p, f: 2, e: 1, g: 1 },
                _ => PrimeClass { p, f: 1, e: 2, g: 1 },
            };
            (vec![class], false)
        }
        FieldSpec::Cyclotomic(m) => (split_cyclotomic(*m, p), false),
        FieldSpec::MonicPolynomial(coeffs) => split_polynomial(coeffs, p),
    };
    PrimeSplitting { p, classes, caveat }
}

/// Memoized [`split_prime`] for one field, safe to share between threads.
#[derive(Debug)]
pub struct SplitCache {
    field: NumberField,
    entries: RwLock<HashMap<u64, PrimeSplitting>>,
}

impl SplitCache {
    pub fn new(field: NumberField) -> Self {
        SplitCache {
            field,
            entries: RwLock::new(HashMap::new()),
        }
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn split(&self, p: u64) -> PrimeSplitting {
        if let Some(hit) = self.entries.read().expect("cache lock").get(&p) {
            return hit.clone();
        }
        let computed = split_prime(&self.field, p);
        self.entries
            .write()
            .expect("cache lock")
            .entry(p)
            .or_insert(computed)
            .clone()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
