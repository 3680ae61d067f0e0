//! Number-field descriptors.
//!
//! A field is given by a short ASCII spec:
//!
//! ```text
//! Q                 the rationals
//! Q(sqrt<m>)        quadratic field, m squarefree, m not in {0, 1}
//! Q(zeta<m>)        cyclotomic field, m >= 3
//! poly:c0,c1,...,1  Q[x]/(f) for a monic irreducible f, constant term first
//! ```
//!
//! Only the data needed to split rational primes is kept: the degree and the
//! defining parameters. Cyclotomic conductors `m ≡ 2 (mod 4)` are halved on
//! normalization since `Q(ζ_m) = Q(ζ_{m/2})` there.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymod::{distinct_degree, squarefree_decomposition, PolyMod};
use crate::splitting::sieve::rational_primes_up_to;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Rational,
    Quadratic(i64),
    Cyclotomic(u64),
    /// Coefficients from the constant term up; the last one is 1.
    MonicPolynomial(Vec<BigInt>),
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "Q"),
            FieldSpec::Quadratic(m) => write!(f, "Q(sqrt{m})"),
            FieldSpec::Cyclotomic(m) => write!(f, "Q(zeta{m})"),
            FieldSpec::MonicPolynomial(c) => {
                write!(f, "poly:")?;
                for (i, coeff) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{coeff}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_field_spec(s)
    }
}

/// Parses a field spec string. Domain constraints on the parameters are
/// checked here as well as in [`normalize`].
pub fn parse_field_spec(text: &str) -> Result<FieldSpec> {
    if text == "Q" {
        return Ok(FieldSpec::Rational);
    }
    if let Some(rest) = text.strip_prefix("poly:") {
        return parse_poly(rest, 5);
    }
    let Some(inner) = text.strip_prefix("Q(") else {
        return Err(Error::parse(0, "expected `Q`, `Q(...)` or `poly:`"));
    };
    let Some(inner) = inner.strip_suffix(')') else {
        return Err(Error::parse(text.len(), "missing closing `)`"));
    };
    if let Some(digits) = inner.strip_prefix("sqrt") {
        let pos = 6;
        let m = parse_i64(digits, pos)?;
        check_quadratic(m)?;
        Ok(FieldSpec::Quadratic(m))
    } else if let Some(digits) = inner.strip_prefix("zeta") {
        let pos = 6;
        if digits.starts_with('-') || digits.starts_with('+') {
            return Err(Error::parse(pos, "cyclotomic conductor must be unsigned"));
        }
        let m = parse_i64(digits, pos)?;
        check_cyclotomic(m as u64)?;
        Ok(FieldSpec::Cyclotomic(m as u64))
    } else {
        Err(Error::parse(2, "expected `sqrt<m>` or `zeta<m>`"))
    }
}

fn parse_i64(digits: &str, pos: usize) -> Result<i64> {
    let body = digits.strip_prefix('-').unwrap_or(digits);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        let offset = body
            .bytes()
            .position(|b| !b.is_ascii_digit())
            .unwrap_or(0);
        return Err(Error::parse(
            pos + (digits.len() - body.len()) + offset,
            "expected an integer literal",
        ));
    }
    digits
        .parse::<i64>()
        .map_err(|_| Error::parse(pos, "integer literal out of range"))
}

fn parse_poly(list: &str, pos: usize) -> Result<FieldSpec> {
    let mut coeffs = Vec::new();
    let mut offset = pos;
    for piece in list.split(',') {
        let body = piece.strip_prefix('-').unwrap_or(piece);
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::parse(offset, "expected an integer coefficient"));
        }
        coeffs.push(piece.parse::<BigInt>().expect("validated digits"));
        offset += piece.len() + 1;
    }
    check_polynomial(&coeffs)?;
    Ok(FieldSpec::MonicPolynomial(coeffs))
}

pub(crate) fn is_squarefree(m: u64) -> bool {
    let mut n = m;
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return false;
            }
        }
        d += 1;
    }
    true
}

fn check_quadratic(m: i64) -> Result<()> {
    if m == 0 || m == 1 {
        return Err(Error::Domain(format!("Q(sqrt{m}) is not a quadratic field")));
    }
    if m.checked_mul(4).is_none() {
        return Err(Error::Domain(format!("|{m}| too large for a discriminant")));
    }
    if !is_squarefree(m.unsigned_abs()) {
        return Err(Error::Domain(format!("{m} is not squarefree")));
    }
    Ok(())
}

fn check_cyclotomic(m: u64) -> Result<()> {
    if m < 3 {
        return Err(Error::Domain(format!(
            "cyclotomic conductor must be at least 3, got {m}"
        )));
    }
    if m > u32::MAX as u64 {
        return Err(Error::Domain(format!("cyclotomic conductor {m} too large")));
    }
    Ok(())
}

fn check_polynomial(coeffs: &[BigInt]) -> Result<()> {
    if coeffs.len() < 3 {
        return Err(Error::Domain("polynomial must have degree at least 2".into()));
    }
    if !coeffs.last().is_some_and(One::is_one) {
        return Err(Error::Domain("polynomial must be monic".into()));
    }
    Ok(())
}

/// Factorization of `n` by trial division, as `(prime, exponent)` pairs.
pub(crate) fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// How an irreducibility claim for a polynomial was established.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IrreducibilityCertificate {
    /// Irreducible modulo this prime.
    IrreducibleModPrime(u64),
    /// Factor-degree patterns modulo these primes admit no common proper
    /// factor degree.
    IncompatibleDegrees(Vec<(u64, Vec<u32>)>),
    /// Degree 2 or 3 and no rational root.
    NoRationalRoot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberField {
    spec: FieldSpec,
    degree: u32,
    exact_splitting: bool,
    label: String,
    certificate: Option<IrreducibilityCertificate>,
}

impl NumberField {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// False for polynomial fields, where primes dividing the index of
    /// `Z[x]/(f)` may be reported with the wrong shape.
    pub fn exact_splitting(&self) -> bool {
        self.exact_splitting
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn certificate(&self) -> Option<&IrreducibilityCertificate> {
        self.certificate.as_ref()
    }

    /// Discriminant of a quadratic field: `m` when `m ≡ 1 (mod 4)`, else `4m`.
    pub fn quadratic_discriminant(&self) -> Option<i64> {
        match self.spec {
            FieldSpec::Quadratic(m) if m.rem_euclid(4) == 1 => Some(m),
            FieldSpec::Quadratic(m) => Some(4 * m),
            _ => None,
        }
    }

    pub fn rational() -> Self {
        normalize(FieldSpec::Rational).expect("Q is valid")
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl FromStr for NumberField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        normalize(parse_field_spec(s)?)
    }
}

fn label_for(spec: &FieldSpec) -> String {
    match spec {
        FieldSpec::Rational => "Z".to_string(),
        FieldSpec::Quadratic(-1) => "Z[i]".to_string(),
        FieldSpec::Quadratic(m) if m.rem_euclid(4) == 1 => format!("Z[(1+sqrt{m})/2]"),
        FieldSpec::Quadratic(m) => format!("Z[sqrt{m}]"),
        FieldSpec::Cyclotomic(m) => format!("Z[zeta{m}]"),
        FieldSpec::MonicPolynomial(_) => format!("O_K, K = Q[x]/({})", poly_display(spec)),
    }
}

fn poly_display(spec: &FieldSpec) -> String {
    let FieldSpec::MonicPolynomial(coeffs) = spec else {
        return String::new();
    };
    let mut terms = Vec::new();
    for (i, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let sign = if c.is_negative() { "-" } else { "+" };
        let body = match (i, mag.is_one()) {
            (0, _) => mag.to_string(),
            (1, true) => "x".to_string(),
            (1, false) => format!("{mag}x"),
            (_, true) => format!("x^{i}"),
            (_, false) => format!("{mag}x^{i}"),
        };
        terms.push((sign, body));
    }
    let mut out = String::new();
    for (idx, (sign, body)) in terms.into_iter().enumerate() {
        if idx == 0 {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        out.push_str(&body);
    }
    out
}

/// Validates a spec and computes its degree. Polynomial specs are checked for
/// irreducibility: a rational root rejects, a mod-p certificate accepts, and
/// anything else is reported as undecided.
pub fn normalize(spec: FieldSpec) -> Result<NumberField> {
    let (spec, degree, certificate) = match spec {
        FieldSpec::Rational => (FieldSpec::Rational, 1, None),
        FieldSpec::Quadratic(m) => {
            check_quadratic(m)?;
            (FieldSpec::Quadratic(m), 2, None)
        }
        FieldSpec::Cyclotomic(m) => {
            check_cyclotomic(m)?;
            let m = if m % 4 == 2 { m / 2 } else { m };
            (FieldSpec::Cyclotomic(m), euler_phi(m) as u32, None)
        }
        FieldSpec::MonicPolynomial(coeffs) => {
            check_polynomial(&coeffs)?;
            let cert = certify_irreducible(&coeffs)?;
            let degree = (coeffs.len() - 1) as u32;
            (FieldSpec::MonicPolynomial(coeffs), degree, Some(cert))
        }
    };
    let exact_splitting = !matches!(spec, FieldSpec::MonicPolynomial(_));
    Ok(NumberField {
        label: label_for(&spec),
        spec,
        degree,
        exact_splitting,
        certificate,
    })
}

/// Good primes scanned before giving up on a certificate.
const CERTIFICATE_PRIMES: usize = 30;
const ROOT_SEARCH_LIMIT: u64 = 1_000_000_000_000;

fn has_rational_root(coeffs: &[BigInt]) -> Option<bool> {
    // Monic, so rational roots are integers dividing the constant term.
    let c0 = &coeffs[0];
    if c0.is_zero() {
        return Some(true);
    }
    let c0 = c0.abs().to_u64().filter(|&v| v <= ROOT_SEARCH_LIMIT)?;
    let eval = |x: &BigInt| {
        coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    };
    let mut d = 1u64;
    while d * d <= c0 {
        if c0 % d == 0 {
            for cand in [d, c0 / d] {
                for v in [BigInt::from(cand), -BigInt::from(cand)] {
                    if eval(&v).is_zero() {
                        return Some(true);
                    }
                }
            }
        }
        d += 1;
    }
    Some(false)
}

fn subset_sums(degrees: &[u32], total: u32) -> Vec<bool> {
    let mut reachable = vec![false; total as usize + 1];
    reachable[0] = true;
    for &d in degrees {
        for s in (d as usize..=total as usize).rev() {
            if reachable[s - d as usize] {
                reachable[s] = true;
            }
        }
    }
    reachable
}

fn certify_irreducible(coeffs: &[BigInt]) -> Result<IrreducibilityCertificate> {
    let degree = (coeffs.len() - 1) as u32;
    let shown = poly_display(&FieldSpec::MonicPolynomial(coeffs.to_vec()));
    let root = has_rational_root(coeffs);
    if root == Some(true) {
        return Err(Error::Domain(format!("{shown} has a rational root")));
    }
    if degree <= 3 && root == Some(false) {
        return Ok(IrreducibilityCertificate::NoRationalRoot);
    }

    let mut possible = vec![true; degree as usize + 1];
    let mut patterns = Vec::new();
    let mut root_free_somewhere = false;
    for p in rational_primes_up_to(2_000)? {
        let f = PolyMod::from_integers(coeffs, p);
        let sff = squarefree_decomposition(&f);
        if sff.len() != 1 || sff[0].1 != 1 {
            continue;
        }
        let mut degrees = Vec::new();
        for (d, count) in distinct_degree(&f) {
            degrees.extend(std::iter::repeat_n(d, count as usize));
        }
        if degrees == [degree] {
            return Ok(IrreducibilityCertificate::IrreducibleModPrime(p));
        }
        if !degrees.contains(&1) {
            root_free_somewhere = true;
        }
        let reach = subset_sums(&degrees, degree);
        for (slot, ok) in possible.iter_mut().zip(reach) {
            *slot &= ok;
        }
        patterns.push((p, degrees));
        if (1..degree as usize).all(|s| !possible[s]) {
            return Ok(IrreducibilityCertificate::IncompatibleDegrees(patterns));
        }
        if patterns.len() >= CERTIFICATE_PRIMES {
            break;
        }
    }
    if degree <= 3 && root_free_somewhere {
        return Ok(IrreducibilityCertificate::NoRationalRoot);
    }
    Err(Error::Undecided(shown))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    fn field(s: &str) -> Result<NumberField> {
        s.parse()
    }

    #[test]
    fn parses_each_variant() {
        assert_eq!(parse_field_spec("Q").unwrap(), FieldSpec::Rational);
        assert_eq!(parse_field_spec("Q(sqrt2)").unwrap(), FieldSpec::Quadratic(2));
        assert_eq!(parse_field_spec("Q(sqrt-1)").unwrap(), FieldSpec::Quadratic(-1));
        assert_eq!(parse_field_spec("Q(zeta5)").unwrap(), FieldSpec::Cyclotomic(5));
        assert_eq!(
            parse_field_spec("poly:1,0,1").unwrap(),
            FieldSpec::MonicPolynomial(vec![1.into(), 0.into(), 1.into()])
        );
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in ["", "q", "Q(", "Q(sqrt)", "Q(sqrtx)", "Q(zeta-5)", "Q(cbrt2)", "poly:", "poly:1,,1"] {
            assert!(
                matches!(parse_field_spec(bad), Err(Error::Parse { .. })),
                "{bad:?} should not parse"
            );
        }
        assert_eq!(
            parse_field_spec("Q(sqrt2x)"),
            Err(Error::Parse { pos: 7, msg: "expected an integer literal".into() })
        );
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(parse_field_spec("Q(sqrt12)"), Err(Error::Domain(_))));
        assert!(matches!(parse_field_spec("Q(sqrt1)"), Err(Error::Domain(_))));
        assert!(matches!(parse_field_spec("Q(sqrt0)"), Err(Error::Domain(_))));
        assert!(matches!(parse_field_spec("Q(zeta2)"), Err(Error::Domain(_))));
        assert!(matches!(parse_field_spec("poly:1,2"), Err(Error::Domain(_))));
        assert!(matches!(parse_field_spec("poly:1,0,2"), Err(Error::Domain(_))));
        assert!(matches!(normalize(FieldSpec::Quadratic(12)), Err(Error::Domain(_))));
    }

    #[test]
    fn degrees_and_labels() {
        let six = normalize(FieldSpec::Cyclotomic(6)).unwrap();
        assert_eq!(six.spec(), &FieldSpec::Cyclotomic(3));
        assert_eq!(six.degree(), 2);

        let gauss = normalize(FieldSpec::Quadratic(-1)).unwrap();
        assert_eq!(gauss.degree(), 2);
        assert_eq!(gauss.label(), "Z[i]");
        assert_eq!(gauss.quadratic_discriminant(), Some(-4));

        assert_eq!(field("Q").unwrap().degree(), 1);
        assert_eq!(field("Q(zeta5)").unwrap().degree(), 4);
        assert_eq!(field("Q(sqrt-3)").unwrap().quadratic_discriminant(), Some(-3));
        assert!(field("Q(zeta5)").unwrap().exact_splitting());
    }

    #[test]
    fn cyclotomic_degree_is_totient() {
        for m in 3..=100u64 {
            let direct = (1..=m).filter(|&a| a.gcd(&m) == 1).count() as u32;
            let f = normalize(FieldSpec::Cyclotomic(m)).unwrap();
            assert_eq!(f.degree(), direct, "m = {m}");
        }
    }

    #[test]
    fn polynomial_irreducibility() {
        let f = field("poly:1,0,1").unwrap();
        assert_eq!(f.degree(), 2);
        assert!(!f.exact_splitting());

        let cubic = field("poly:-2,0,0,1").unwrap();
        assert_eq!(cubic.degree(), 3);

        // x^2 - 1 has roots ±1
        assert!(matches!(field("poly:-1,0,1"), Err(Error::Domain(_))));
        // x^3 has root 0
        assert!(matches!(field("poly:0,0,0,1"), Err(Error::Domain(_))));

        // Φ_5 is irreducible mod 2
        let phi5 = field("poly:1,1,1,1,1").unwrap();
        assert_eq!(
            phi5.certificate(),
            Some(&IrreducibilityCertificate::IrreducibleModPrime(2))
        );

        // x^4 + 1 is reducible modulo every prime: not decidable here.
        assert!(matches!(field("poly:1,0,0,0,1"), Err(Error::Undecided(_))));
        // (x^2+1)(x^2+2) has no rational root but is reducible
        assert!(matches!(field("poly:2,0,3,0,1"), Err(Error::Undecided(_))));
    }

    #[test]
    fn render_round_trips() {
        for s in ["Q", "Q(sqrt-1)", "Q(sqrt2)", "Q(zeta6)", "poly:-2,0,0,1", "poly:3,-1,0,1"] {
            assert_eq!(parse_field_spec(s).unwrap().to_string(), s);
        }
    }
}
