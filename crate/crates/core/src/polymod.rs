//! Dense polynomials over a prime field F_p.
//!
//! Coefficients are stored from the constant term upward and kept reduced in
//! `[0, p)`. The zero polynomial is the empty vector. `p` must be below 2^63
//! so that sums of two residues fit in a `u64`; products go through `u128`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMod {
    coeffs: Vec<u64>,
    p: u64,
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // p is prime, so Fermat.
    pow_mod(a, p - 2, p)
}

impl PolyMod {
    pub fn new(coeffs: Vec<u64>, p: u64) -> Self {
        let mut poly = PolyMod {
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
            p,
        };
        poly.trim();
        poly
    }

    /// Reduces integer coefficients (constant term first) modulo `p`.
    pub fn from_integers(coeffs: &[BigInt], p: u64) -> Self {
        let modulus = BigInt::from(p);
        let reduced = coeffs
            .iter()
            .map(|c| {
                c.mod_floor(&modulus)
                    .to_u64()
                    .expect("residue fits in u64")
            })
            .collect();
        PolyMod::new(reduced, p)
    }

    pub fn one(p: u64) -> Self {
        PolyMod::new(vec![1], p)
    }

    pub fn x(p: u64) -> Self {
        PolyMod::new(vec![0, 1], p)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn leading(&self) -> u64 {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = inv_mod(self.leading(), self.p);
        PolyMod::new(
            self.coeffs.iter().map(|&c| mul_mod(c, inv, self.p)).collect(),
            self.p,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.p;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + p - b) % p
            })
            .collect();
        PolyMod::new(coeffs, p)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return PolyMod::new(Vec::new(), self.p);
        }
        let p = self.p;
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(a, b, p)) % p;
            }
        }
        PolyMod::new(out, p)
    }

    /// Quotient and remainder. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let p = self.p;
        let dd = divisor.degree().expect("division by zero polynomial");
        let inv_lead = inv_mod(divisor.leading(), p);
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (PolyMod::new(Vec::new(), p), self.clone());
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = mul_mod(rem[i], inv_lead, p);
            if c == 0 {
                continue;
            }
            quot[i - dd] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                let idx = i - dd + j;
                rem[idx] = (rem[idx] + p - mul_mod(c, d, p)) % p;
            }
        }
        rem.truncate(dd);
        (PolyMod::new(quot, p), PolyMod::new(rem, p))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    pub fn derivative(&self) -> Self {
        let p = self.p;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mul_mod(c, i as u64 % p, p))
            .collect();
        PolyMod::new(coeffs, p)
    }

    /// Monic greatest common divisor; `gcd(0, 0)` is zero.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self^exp mod modulus` by square and multiply.
    pub fn pow_mod(&self, mut exp: u64, modulus: &Self) -> Self {
        let mut base = self.rem(modulus);
        let mut acc = PolyMod::one(self.p).rem(modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base).rem(modulus);
            }
            base = base.mul(&base).rem(modulus);
            exp >>= 1;
        }
        acc
    }

    /// Inverse Frobenius on a polynomial whose derivative vanishes: every
    /// exponent is a multiple of p, and a^p = a on F_p.
    fn pth_root(&self) -> Self {
        let p = self.p as usize;
        let coeffs = self.coeffs.iter().step_by(p).copied().collect();
        PolyMod::new(coeffs, self.p)
    }

    pub fn evaluate(&self, at: u64) -> u64 {
        let p = self.p;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| (mul_mod(acc, at, p) + c) % p)
    }
}

/// Square-free decomposition of a monic polynomial: pairs `(factor, multiplicity)`
/// with pairwise coprime square-free factors whose product with multiplicities
/// recovers the input.
pub fn squarefree_decomposition(f: &PolyMod) -> Vec<(PolyMod, u32)> {
    let mut out = Vec::new();
    let f = f.monic();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let p = f.modulus();
    let mut c = f.gcd(&f.derivative());
    let mut w = f.div_rem(&c).0;
    let mut i = 1u32;
    while !w.is_one() {
        let y = w.gcd(&c);
        let fac = w.div_rem(&y).0;
        if fac.degree().unwrap_or(0) > 0 {
            out.push((fac.monic(), i));
        }
        w = y;
        c = c.div_rem(&w).0;
        i += 1;
    }
    if c.degree().unwrap_or(0) > 0 {
        let root = c.monic().pth_root();
        for (g, m) in squarefree_decomposition(&root) {
            out.push((g, m * p as u32));
        }
    }
    out
}

/// Distinct-degree factorization of a monic square-free polynomial: pairs
/// `(degree, number of irreducible factors of that degree)` in ascending degree.
pub fn distinct_degree(g: &PolyMod) -> Vec<(u32, u32)> {
    let p = g.modulus();
    let mut rest = g.monic();
    let mut out = Vec::new();
    let x = PolyMod::x(p);
    let mut h = x.rem(&rest);
    let mut d = 1usize;
    while rest.degree().unwrap_or(0) >= 2 * d {
        h = h.pow_mod(p, &rest);
        let t = h.sub(&x).gcd(&rest);
        if !t.is_one() {
            let deg = t.degree().unwrap_or(0);
            out.push((d as u32, (deg / d) as u32));
            rest = rest.div_rem(&t).0;
            h = h.rem(&rest);
        }
        d += 1;
    }
    if let Some(deg) = rest.degree() {
        if deg > 0 {
            out.push((deg as u32, 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[u64], p: u64) -> PolyMod {
        PolyMod::new(c.to_vec(), p)
    }

    #[test]
    fn division_recovers_dividend() {
        let p = 7;
        let a = poly(&[3, 0, 5, 1, 2], p);
        let b = poly(&[1, 4, 1], p);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).sub(&a.sub(&r)), PolyMod::new(vec![], p));
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn squarefree_parts_of_repeated_factors() {
        // (x+1)^2 (x+2) over F_5
        let p = 5;
        let f = poly(&[1, 1], p)
            .mul(&poly(&[1, 1], p))
            .mul(&poly(&[2, 1], p));
        let sff = squarefree_decomposition(&f);
        assert_eq!(sff, vec![(poly(&[2, 1], p), 1), (poly(&[1, 1], p), 2)]);
    }

    #[test]
    fn squarefree_handles_pth_powers() {
        // x^2 + 1 = (x+1)^2 over F_2; x^4 + 1 = (x+1)^4.
        assert_eq!(
            squarefree_decomposition(&poly(&[1, 0, 1], 2)),
            vec![(poly(&[1, 1], 2), 2)]
        );
        assert_eq!(
            squarefree_decomposition(&poly(&[1, 0, 0, 0, 1], 2)),
            vec![(poly(&[1, 1], 2), 4)]
        );
        // x^9 + 2 = (x + 2)^9 over F_3
        let f = poly(&[2, 0, 0, 0, 0, 0, 0, 0, 0, 1], 3);
        let sff = squarefree_decomposition(&f);
        assert_eq!(sff, vec![(poly(&[2, 1], 3), 9)]);
    }

    #[test]
    fn distinct_degree_counts() {
        assert_eq!(distinct_degree(&poly(&[1, 0, 1], 5)), vec![(1, 2)]);
        assert_eq!(distinct_degree(&poly(&[1, 0, 1], 3)), vec![(2, 1)]);
        // x^4 + x^3 + x^2 + x + 1 is irreducible over F_2
        assert_eq!(distinct_degree(&poly(&[1, 1, 1, 1, 1], 2)), vec![(4, 1)]);
        // same polynomial splits into two quadratics over F_19 (19 ≡ -1 mod 5)
        assert_eq!(distinct_degree(&poly(&[1, 1, 1, 1, 1], 19)), vec![(2, 2)]);
    }
}
