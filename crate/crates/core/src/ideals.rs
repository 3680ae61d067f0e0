//! Ideals as exponent vectors over prime ideals, and exhaustive enumeration
//! of all ideals of norm at most `x`.
//!
//! Prime ideals are never constructed; a [`PrimeIdealId`] only tells distinct
//! prime ideals of the same norm apart. Everything here goes through norms and
//! factorizations.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::NumberField;
use crate::splitting::{SieveConfig, SplitCache};

/// Largest norm bound a universe accepts.
pub const MAX_NORM_BOUND: u64 = 1 << 62;
pub const DEFAULT_IDEAL_CAP: u64 = 10_000_000;

/// One prime ideal above `p` with residue degree `f`. `index` separates the
/// prime ideals sharing `(p, f)` and carries no arithmetic meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeIdealId {
    pub p: u64,
    pub f: u32,
    pub index: u32,
}

impl PrimeIdealId {
    pub fn norm(&self) -> BigUint {
        BigUint::from(self.p).pow(self.f)
    }

    pub fn norm_u64(&self) -> Option<u64> {
        self.p.checked_pow(self.f)
    }
}

impl fmt::Display for PrimeIdealId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}#{}", self.p, self.f, self.index)
    }
}

/// An ideal `Π 𝔭^{ν_𝔭}`, stored as `(𝔭, ν_𝔭)` pairs sorted by id with every
/// exponent positive. The empty vector is the unit ideal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IdealFactorization {
    factors: Vec<(PrimeIdealId, u32)>,
}

impl IdealFactorization {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn prime(id: PrimeIdealId) -> Self {
        Self::prime_power(id, 1)
    }

    pub fn prime_power(id: PrimeIdealId, e: u32) -> Self {
        let factors = if e == 0 { Vec::new() } else { vec![(id, e)] };
        IdealFactorization { factors }
    }

    /// Sorts, merges repeated ids and drops zero exponents.
    pub fn from_factors(factors: impl IntoIterator<Item = (PrimeIdealId, u32)>) -> Self {
        let mut merged: Vec<(PrimeIdealId, u32)> = Vec::new();
        let mut raw: Vec<_> = factors.into_iter().filter(|&(_, e)| e > 0).collect();
        raw.sort_unstable();
        for (id, e) in raw {
            match merged.last_mut() {
                Some((last, acc)) if *last == id => *acc += e,
                _ => merged.push((id, e)),
            }
        }
        IdealFactorization { factors: merged }
    }

    pub fn factors(&self) -> &[(PrimeIdealId, u32)] {
        &self.factors
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent(&self, id: &PrimeIdealId) -> u32 {
        self.factors
            .binary_search_by(|(q, _)| q.cmp(id))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn norm(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, (id, e)| acc * id.norm().pow(*e))
    }

    /// Exponent-wise sum.
    pub fn mul(&self, other: &Self) -> Self {
        Self::from_factors(self.factors.iter().chain(&other.factors).copied())
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.factors.iter().all(|(id, e)| other.exponent(id) >= *e)
    }

    /// `self / d`, or `None` when `d` does not divide `self`.
    pub fn quotient(&self, d: &Self) -> Option<Self> {
        if !d.divides(self) {
            return None;
        }
        Some(Self::from_factors(
            self.factors.iter().map(|(id, e)| (*id, e - d.exponent(id))),
        ))
    }
}

impl fmt::Display for IdealFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("(1)");
        }
        for (i, (id, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}:{e}")?;
        }
        Ok(())
    }
}

/// `0` if some exponent exceeds 1, else `(-1)^{number of prime factors}`.
pub fn mobius(a: &IdealFactorization) -> i8 {
    if a.factors.iter().any(|&(_, e)| e > 1) {
        0
    } else if a.factors.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All divisors, in lexicographic order of their exponent tuples with the
/// smallest prime id most significant.
pub fn divisors(a: &IdealFactorization) -> Vec<IdealFactorization> {
    let mut out = vec![Vec::new()];
    for &(id, e) in a.factors.iter().rev() {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for j in 0..=e {
            for tail in &out {
                let mut v: Vec<(PrimeIdealId, u32)> = Vec::with_capacity(tail.len() + 1);
                if j > 0 {
                    v.push((id, j));
                }
                v.extend_from_slice(tail);
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|factors| IdealFactorization { factors })
        .collect()
}

/// Exponent-wise minimum.
pub fn gcd_ideal(ideals: &[IdealFactorization]) -> Result<IdealFactorization> {
    let (first, rest) = ideals
        .split_first()
        .ok_or_else(|| Error::invalid("gcd of an empty list"))?;
    let factors = first
        .factors
        .iter()
        .map(|&(id, e)| (id, rest.iter().fold(e, |m, b| m.min(b.exponent(&id)))))
        .filter(|&(_, e)| e > 0)
        .collect();
    Ok(IdealFactorization { factors })
}

/// All prime ideals of norm `<= x`, sorted by id.
pub fn prime_ideals_up_to(field: &NumberField, x: u64) -> Result<Vec<PrimeIdealId>> {
    prime_ideals_with(&SplitCache::new(field.clone()), x, &SieveConfig::default())
}

fn prime_ideals_with(cache: &SplitCache, x: u64, sieve: &SieveConfig) -> Result<Vec<PrimeIdealId>> {
    if x < 2 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for p in sieve.primes_up_to(x)? {
        let split = cache.split(p);
        let mut next_index: HashMap<u32, u32> = HashMap::new();
        for class in &split.classes {
            let slot = next_index.entry(class.f).or_insert(0);
            let first = *slot;
            *slot += class.g;
            if class.norm().is_some_and(|q| q <= x) {
                out.extend((first..first + class.g).map(|index| PrimeIdealId { p, f: class.f, index }));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationConfig {
    /// Maximum number of ideals a universe or count may contain.
    pub cap: u64,
    pub sieve: SieveConfig,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig {
            cap: DEFAULT_IDEAL_CAP,
            sieve: SieveConfig::default(),
        }
    }
}

/// Prime ideals of norm `<= x` in ascending norm order, for pruned DFS.
struct PrimeTable {
    ids: Vec<PrimeIdealId>,
    /// `by_norm[i]` is an index into `ids`.
    by_norm: Vec<u32>,
    norms: Vec<u64>,
}

impl PrimeTable {
    fn build(field: &NumberField, x: u64, config: &EnumerationConfig) -> Result<Self> {
        if x == 0 {
            return Err(Error::invalid("norm bound must be at least 1"));
        }
        if x > MAX_NORM_BOUND {
            return Err(Error::CapExceeded {
                what: "norm bound",
                needed: x as u128,
                cap: MAX_NORM_BOUND as u128,
            });
        }
        let ids = prime_ideals_with(&SplitCache::new(field.clone()), x, &config.sieve)?;
        let norms: Vec<u64> = ids.iter().map(|id| id.norm_u64().expect("norm <= x")).collect();
        let mut by_norm: Vec<u32> = (0..ids.len() as u32).collect();
        by_norm.sort_by_key(|&i| (norms[i as usize], i));
        Ok(PrimeTable { ids, by_norm, norms })
    }

    /// Visits every ideal of norm `<= x` once, the unit ideal first. The
    /// factor slice holds `(prime index, exponent)` in DFS order.
    fn walk<F>(&self, x: u64, cap: u64, visit: &mut F) -> Result<u64>
    where
        F: FnMut(u64, &[(u32, u32)]),
    {
        let mut stack = Vec::new();
        let mut count = 1u64;
        visit(1, &stack);
        self.descend(0, 1, x, cap, &mut stack, &mut count, visit)?;
        Ok(count)
    }

    #[allow(clippy::too_many_arguments)]
    fn descend<F>(
        &self,
        start: usize,
        norm: u64,
        x: u64,
        cap: u64,
        stack: &mut Vec<(u32, u32)>,
        count: &mut u64,
        visit: &mut F,
    ) -> Result<()>
    where
        F: FnMut(u64, &[(u32, u32)]),
    {
        for pos in start..self.by_norm.len() {
            let idx = self.by_norm[pos];
            let q = self.norms[idx as usize];
            if q > x / norm {
                break;
            }
            let mut m = norm;
            let mut e = 0;
            while q <= x / m {
                m *= q;
                e += 1;
                *count += 1;
                if *count > cap {
                    return Err(Error::CapExceeded {
                        what: "ideal enumeration (count so far)",
                        needed: *count as u128,
                        cap: cap as u128,
                    });
                }
                stack.push((idx, e));
                visit(m, stack);
                self.descend(pos + 1, m, x, cap, stack, count, visit)?;
                stack.pop();
            }
        }
        Ok(())
    }
}

/// Every ideal of norm `<= x`, sorted by `(norm, factorization)`.
///
/// Factorizations are stored in one flat array of `(prime index, exponent)`
/// pairs, where the prime index points into [`IdealUniverse::primes`].
#[derive(Debug, Clone)]
pub struct IdealUniverse {
    field: NumberField,
    x: u64,
    primes: Vec<PrimeIdealId>,
    norms: Vec<u64>,
    offsets: Vec<u32>,
    entries: Vec<(u32, u32)>,
}

/// Enumerates all ideals of norm `<= x` under the default cap.
pub fn enumerate_ideals(field: &NumberField, x: u64) -> Result<IdealUniverse> {
    IdealUniverse::build(field, x, &EnumerationConfig::default())
}

/// `H(x)`, the number of ideals of norm `<= x`, without materializing them.
pub fn ideal_count(field: &NumberField, x: u64) -> Result<u64> {
    ideal_count_with(field, x, &EnumerationConfig::default())
}

pub fn ideal_count_with(field: &NumberField, x: u64, config: &EnumerationConfig) -> Result<u64> {
    let table = PrimeTable::build(field, x, config)?;
    table.walk(x, config.cap, &mut |_, _| {})
}

impl IdealUniverse {
    pub fn build(field: &NumberField, x: u64, config: &EnumerationConfig) -> Result<Self> {
        let table = PrimeTable::build(field, x, config)?;
        let mut raw_norms = Vec::new();
        let mut raw_offsets = vec![0u32];
        let mut raw_entries = Vec::new();
        table.walk(x, config.cap, &mut |norm, factors| {
            raw_norms.push(norm);
            let start = raw_entries.len();
            raw_entries.extend_from_slice(factors);
            raw_entries[start..].sort_unstable();
            raw_offsets.push(raw_entries.len() as u32);
        })?;

        let slice = |i: usize| &raw_entries[raw_offsets[i] as usize..raw_offsets[i + 1] as usize];
        let mut order: Vec<u32> = (0..raw_norms.len() as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            let (a, b) = (a as usize, b as usize);
            raw_norms[a].cmp(&raw_norms[b]).then_with(|| slice(a).cmp(slice(b)))
        });

        let mut norms = Vec::with_capacity(order.len());
        let mut offsets = Vec::with_capacity(order.len() + 1);
        let mut entries = Vec::with_capacity(raw_entries.len());
        offsets.push(0u32);
        for &i in &order {
            norms.push(raw_norms[i as usize]);
            entries.extend_from_slice(slice(i as usize));
            offsets.push(entries.len() as u32);
        }
        Ok(IdealUniverse {
            field: field.clone(),
            x,
            primes: table.ids,
            norms,
            offsets,
            entries,
        })
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn primes(&self) -> &[PrimeIdealId] {
        &self.primes
    }

    /// `H(x)`.
    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    /// Norms in list order (nondecreasing).
    pub fn norms(&self) -> &[u64] {
        &self.norms
    }

    pub fn norm(&self, i: usize) -> u64 {
        self.norms[i]
    }

    /// Factorization of ideal `i` as `(prime index, exponent)` pairs sorted
    /// by prime index.
    pub fn factors(&self, i: usize) -> &[(u32, u32)] {
        &self.entries[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn ideal(&self, i: usize) -> IdealFactorization {
        IdealFactorization {
            factors: self
                .factors(i)
                .iter()
                .map(|&(p, e)| (self.primes[p as usize], e))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = IdealFactorization> + '_ {
        (0..self.len()).map(|i| self.ideal(i))
    }

    /// Position of `a` in the list, if its norm is `<= x`.
    pub fn index_of(&self, a: &IdealFactorization) -> Option<usize> {
        let mut local = Vec::with_capacity(a.factors.len());
        for (id, e) in &a.factors {
            let p = self.primes.binary_search(id).ok()?;
            local.push((p as u32, *e));
        }
        let norm: u64 = local
            .iter()
            .try_fold(1u64, |acc, &(p, e)| {
                self.primes[p as usize]
                    .norm_u64()
                    .and_then(|q| q.checked_pow(e))
                    .and_then(|q| acc.checked_mul(q))
            })?;
        let lo = self.norms.partition_point(|&m| m < norm);
        let hi = self.norms.partition_point(|&m| m <= norm);
        (lo..hi).find(|&i| self.factors(i) == local.as_slice())
    }

    /// `H(y)` for any `y` (clamped to `x`).
    pub fn count_norm_at_most(&self, y: u64) -> u64 {
        self.norms.partition_point(|&m| m <= y) as u64
    }

    /// One line per ideal: `norm<TAB>p^f#idx:e,...`; the unit ideal has an
    /// empty factor list.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for i in 0..self.len() {
            write!(out, "{}\t", self.norms[i])?;
            for (j, &(p, e)) in self.factors(i).iter().enumerate() {
                if j > 0 {
                    out.write_all(b",")?;
                }
                write!(out, "{}:{e}", self.primes[p as usize])?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}
