use idealprob::classify::{psi, psi_convolution_oracle, rho, rho_bruteforce};
use idealprob::field::euler_phi;
use idealprob::ideals::{enumerate_ideals, ideal_count, IdealFactorization};
use idealprob::product::{probability, Precision, ProbabilityQuery};
use idealprob::splitting::{rational_primes_up_to, split_prime};
use idealprob::{FieldSpec, NumberField, Params};
use proptest::prelude::*;

fn field(s: &str) -> NumberField {
    s.parse().unwrap()
}

const FIELDS: [&str; 10] = [
    "Q",
    "Q(sqrt2)",
    "Q(sqrt-1)",
    "Q(sqrt-5)",
    "Q(sqrt13)",
    "Q(zeta3)",
    "Q(zeta5)",
    "Q(zeta12)",
    "Q(zeta9)",
    "poly:-2,0,0,1",
];

#[test]
fn degree_sum_over_every_prime() {
    let primes = rational_primes_up_to(10_000).unwrap();
    for f in FIELDS {
        let k = field(f);
        for &p in &primes {
            let s = split_prime(&k, p);
            assert_eq!(s.degree_sum(), k.degree(), "{f} at {p}");
            assert!(s.ideal_count() <= k.degree());
        }
    }
}

#[test]
fn quadratic_rule_matches_polynomial_route() {
    for m in [-1i64, 2, 3, -5, 7, -11, 13, 15] {
        let quad = field(&format!("Q(sqrt{m})"));
        let poly = field(&format!("poly:{},0,1", -m));
        for p in rational_primes_up_to(1000).unwrap() {
            if (2 * m).unsigned_abs() % p == 0 {
                continue;
            }
            assert_eq!(split_prime(&quad, p).classes, split_prime(&poly, p).classes, "m={m} p={p}");
        }
    }
}

#[test]
fn cyclotomic_unramified_shapes() {
    for m in [3u64, 5, 7, 8, 9, 12, 15, 16, 20, 21] {
        let k = field(&format!("Q(zeta{m})"));
        assert_eq!(k.degree() as u64, euler_phi(m));
        for p in rational_primes_up_to(1000).unwrap() {
            if m % p == 0 {
                continue;
            }
            let s = split_prime(&k, p);
            assert_eq!(s.classes.len(), 1);
            let c = s.classes[0];
            assert_eq!(c.e, 1);
            assert_eq!((c.f * c.g) as u64, euler_phi(m));
            // residue degree is the order of p modulo m
            let order = (1..=m).find(|&t| (0..t).fold(1u64, |a, _| a * p % m) == 1).unwrap();
            assert_eq!(c.f as u64, order, "m={m} p={p}");
        }
    }
}

#[test]
fn cyclotomic_normalization_and_render() {
    let k = field("Q(zeta6)");
    assert_eq!(k.spec(), &FieldSpec::Cyclotomic(3));
    assert_eq!(k.degree(), 2);
    for s in ["Q", "Q(sqrt2)", "Q(sqrt-1)", "Q(zeta5)", "poly:-2,0,0,1"] {
        assert_eq!(field(s).spec().to_string(), s);
    }
}

#[test]
fn eisenstein_count_matches_lattice() {
    // norms a^2 - ab + b^2, six units
    let x = 3000i64;
    let mut points = 0u64;
    for a in -70i64..=70 {
        for b in -70i64..=70 {
            let n = a * a - a * b + b * b;
            if n > 0 && n <= x {
                points += 1;
            }
        }
    }
    assert_eq!(ideal_count(&field("Q(zeta3)"), x as u64).unwrap(), points / 6);
}

#[test]
fn rho_agrees_with_subset_scan_on_small_universe() {
    let u = enumerate_ideals(&field("Q(sqrt-1)"), 30).unwrap();
    let ideals: Vec<_> = u.iter().collect();
    for (n, k, r) in [(3, 2, 1), (3, 3, 1), (3, 2, 2)] {
        let params = Params::new(n, k, r).unwrap();
        for a in &ideals {
            for b in &ideals {
                for c in ideals.iter().step_by(3) {
                    let t = [a.clone(), b.clone(), c.clone()];
                    assert_eq!(rho(params, &t).unwrap(), rho_bruteforce(params, &t).unwrap());
                }
            }
        }
    }
}

#[test]
fn figure_values_have_guaranteed_bounds() {
    for f in ["Q", "Q(sqrt2)", "Q(zeta5)"] {
        for n in 2..=4 {
            let q = ProbabilityQuery::new(field(f), Params::pairwise(n).unwrap(), Precision::Digits(4));
            let r = probability(&q).unwrap();
            assert!(r.error_bound.unwrap() <= 5e-5);
            assert!(!r.caveat);
        }
    }
}

fn universe_ideals() -> Vec<IdealFactorization> {
    enumerate_ideals(&field("Q(sqrt-1)"), 60).unwrap().iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn psi_is_symmetric(idx in prop::collection::vec(0usize..48, 3), k in 2u32..=3, r in 1u32..=2, rot in 0usize..3) {
        let ideals = universe_ideals();
        let params = Params::new(3, k, r).unwrap();
        let t: Vec<_> = idx.iter().map(|&i| ideals[i % ideals.len()].clone()).collect();
        let mut s = t.clone();
        s.rotate_left(rot);
        s.swap(0, 2);
        prop_assert_eq!(psi(params, &t).unwrap(), psi(params, &s).unwrap());
        prop_assert_eq!(psi(params, &t).unwrap(), psi_convolution_oracle(params, &t).unwrap());
    }

    #[test]
    fn rho_is_multiplicative_on_coprime_tuples(a in prop::collection::vec(0u32..4, 3), b in prop::collection::vec(0u32..4, 3), k in 2u32..=3) {
        use idealprob::PrimeIdealId;
        // a lives on one prime ideal, b on another
        let p = PrimeIdealId { p: 2, f: 1, index: 0 };
        let q = PrimeIdealId { p: 5, f: 1, index: 1 };
        let params = Params::new(3, k, 1).unwrap();
        let ta: Vec<_> = a.iter().map(|&e| IdealFactorization::prime_power(p, e)).collect();
        let tb: Vec<_> = b.iter().map(|&e| IdealFactorization::prime_power(q, e)).collect();
        let tab: Vec<_> = ta.iter().zip(&tb).map(|(x, y)| x.mul(y)).collect();
        prop_assert_eq!(rho(params, &tab).unwrap(), rho(params, &ta).unwrap() * rho(params, &tb).unwrap());
    }
}
