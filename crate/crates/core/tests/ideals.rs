use nilfourier::exact::{q, qr};
use nilfourier::ideals::*;
use nilfourier::numfield::{builtin, FieldElement, BUILTIN_NAMES};
use nilfourier::Error;
use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;

fn el(name: &str, c: &[i64]) -> FieldElement {
    FieldElement::from_int(&builtin(name).unwrap(), c)
}

#[test]
fn gaussian_primes_above_two_and_five() {
    let k = builtin("Qi").unwrap();
    let two = primes_above(&k, 2).unwrap();
    assert_eq!(two.len(), 1);
    assert_eq!((two[0].e, two[0].f, two[0].norm()), (2, 1, BigInt::from(2)));
    let five = primes_above(&k, 5).unwrap();
    assert_eq!(five.len(), 2);
    assert!(five.iter().all(|p| p.e == 1 && p.f == 1 && p.norm() == BigInt::from(5)));
    let three = primes_above(&k, 3).unwrap();
    assert_eq!((three.len(), three[0].f), (1, 2));
}

#[test]
fn biquadratic_prime_above_five_has_degree_two() {
    let k = builtin("Qsqrt2sqrt3").unwrap();
    let five = primes_above(&k, 5).unwrap();
    assert_eq!(five.len(), 2);
    assert!(five.iter().all(|p| p.f == 2 && p.e == 1));
}

#[test]
fn non_prime_and_index_primes_fail() {
    let k = builtin("Qi").unwrap();
    assert!(matches!(primes_above(&k, 9), Err(Error::Precondition(_))));
    // Z[√5] has index 2 in the ring of integers
    let k = nilfourier::numfield::FieldSpec::from_poly("Zsqrt5", &[-5, 0, 1]).unwrap();
    assert!(matches!(primes_above(&k, 2), Err(Error::UnsupportedPrime { p: 2, .. })));
    assert!(primes_above(&k, 3).is_ok());
}

#[test]
fn residue_degrees_sum_to_the_degree() {
    for name in BUILTIN_NAMES {
        let k = builtin(name).unwrap();
        for p in (2..=100u64).filter(|&p| num_prime::nt_funcs::is_prime64(p)) {
            let primes = primes_above(&k, p).unwrap();
            assert!(primes.len() <= k.degree());
            let s: u32 = primes.iter().map(|i| i.e * i.f).sum();
            assert_eq!(s as usize, k.degree(), "{name} at {p}");
            for i in &primes {
                assert_eq!(i.norm(), BigInt::from(p).pow(i.f));
                assert!(i.lattice.is_ideal());
            }
        }
    }
}

#[test]
fn valuations_by_lattice_powers() {
    let k = builtin("Qi").unwrap();
    let j = IdealLattice::principal(&el("Qi", &[1, 1])).unwrap();
    assert_eq!(valuation(&el("Qi", &[4, 0]), &j).unwrap(), 4);
    assert_eq!(valuation(&el("Qi", &[3, 0]), &j).unwrap(), 0);
    assert_eq!(valuation(&FieldElement::one(&k), &j).unwrap(), 0);
    assert_eq!(valuation(&FieldElement::zero(&k), &j), Err(Error::UndefinedValuation));
}

#[test]
fn mobius_examples() {
    assert_eq!(mobius_k(&el("Qi", &[1, 1])).unwrap(), -1);
    assert_eq!(mobius_k(&el("Qi", &[2, 0])).unwrap(), 0);
    assert_eq!(mobius_k(&el("Qi", &[1, 0])).unwrap(), 1);
    assert_eq!(mobius_k(&el("Qi", &[0, 1])).unwrap(), 1);
    assert_eq!(liouville_k(&el("Qi", &[2, 0])).unwrap(), 1);
    assert_eq!(liouville_k(&el("Qi", &[3, 0])).unwrap(), -1);
}

#[test]
fn mobius_takes_minus_one_on_the_biquadratic_field() {
    // √3 = θ² − 2; −3 − 2√3 = 1 − 2θ² generates a prime of norm 9 above 3
    let n = el("Qsqrt2sqrt3", &[1, 0, -2, 0]);
    assert_eq!(n.knorm(), q(9));
    assert_eq!(mobius_k(&n).unwrap(), -1);
    let three = primes_above(n.field(), 3).unwrap();
    assert_eq!((three.len(), three[0].e, three[0].f), (1, 2, 2));
    let two = primes_above(n.field(), 2).unwrap();
    assert_eq!((two.len(), two[0].e, two[0].f), (1, 4, 1));
}

#[test]
fn principal_norms_match_knorm() {
    for (name, c) in [("Qi", vec![3, 4]), ("Qsqrt2", vec![5, -3]), ("Qsqrt-3", vec![2, 7]), ("Qsqrt2sqrt3", vec![1, 2, 0, -1])] {
        let x = el(name, &c);
        let i = IdealLattice::principal(&x).unwrap();
        assert_eq!(q_of(&i.norm()), x.knorm().abs());
        assert!(i.contains(&x));
        assert!(i.is_ideal());
    }
}

fn q_of(b: &BigInt) -> nilfourier::exact::Q {
    nilfourier::exact::Q::from_integer(b.clone())
}

#[test]
fn norms_of_prime_powers_multiply() {
    let k = builtin("Qsqrt-3").unwrap();
    for p in [2u64, 3, 7, 13] {
        for pr in primes_above(&k, p).unwrap() {
            for e in 0..4u32 {
                assert_eq!(pr.lattice.pow(e).unwrap().norm(), pr.norm().pow(e));
            }
        }
    }
    let a = &primes_above(&k, 7).unwrap()[0].lattice;
    let b = &primes_above(&k, 13).unwrap()[1].lattice;
    assert_eq!(a.mul(b).unwrap().norm(), BigInt::from(91));
}

#[test]
fn density_examples() {
    let z = builtin("Q").unwrap();
    let three = IdealLattice::from_generators(&z, &[vec![3]]).unwrap();
    assert_eq!(density_estimate(&three, 100).unwrap(), qr(67, 201));
    let qi = builtin("Qi").unwrap();
    assert_eq!(density_estimate(&IdealLattice::unit(&qi), 10).unwrap(), q(1));
    let j = IdealLattice::principal(&el("Qi", &[1, 1])).unwrap();
    for n in [25u64, 50, 100, 200] {
        let d = nilfourier::exact::q_to_f64(&density_estimate(&j, n).unwrap());
        assert!((d - 0.5).abs() <= 3.0 / n as f64);
        if n == 50 {
            assert!((d - 0.5).abs() < 0.02);
        }
    }
    assert!(density_estimate(&j, 0).is_err());
}

/// Gaussian integers as (re, im), factored by trial division over Gaussian primes.
fn gaussian_mobius(a: i64, b: i64) -> i8 {
    let div = |(a, b): (i64, i64), (c, d): (i64, i64)| -> Option<(i64, i64)> {
        let n = c * c + d * d;
        let (re, im) = (a * c + b * d, b * c - a * d);
        (re % n == 0 && im % n == 0).then_some((re / n, im / n))
    };
    let mut x = (a, b);
    let norm = a * a + b * b;
    let mut primes: Vec<(i64, i64)> = vec![(1, 1)];
    for p in 3..=norm {
        if !num_prime::nt_funcs::is_prime64(p as u64) {
            continue;
        }
        if p % 4 == 3 {
            if p * p <= norm {
                primes.push((p, 0));
            }
        } else {
            let s = (1..).find(|&s| {
                let t = p - s * s;
                let r = (t as f64).sqrt().round() as i64;
                r * r == t
            });
            let s = s.unwrap();
            let t = ((p - s * s) as f64).sqrt().round() as i64;
            primes.push((s, t));
            primes.push((s, -t));
        }
    }
    let mut count = 0;
    for pi in primes {
        let mut v = 0;
        while let Some(y) = div(x, pi) {
            x = y;
            v += 1;
        }
        if v >= 2 {
            return 0;
        }
        count += v;
    }
    assert_eq!(x.0 * x.0 + x.1 * x.1, 1);
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

#[test]
fn gaussian_mobius_matches_trial_division() {
    let cache = PrimeCache::new(&builtin("Qi").unwrap());
    for a in -25i64..=25 {
        for b in -25i64..=25 {
            if a == 0 && b == 0 {
                continue;
            }
            assert_eq!(cache.mobius_int(&[a as i128, b as i128]).unwrap(), gaussian_mobius(a, b), "{a}+{b}i");
        }
    }
}

#[test]
fn rational_mobius_is_classical() {
    let cache = PrimeCache::new(&builtin("Q").unwrap());
    for n in 1i64..=500 {
        let f = num_prime::nt_funcs::factorize64(n as u64);
        let classical = if f.values().any(|&e| e > 1) { 0 } else if f.len() % 2 == 0 { 1 } else { -1 };
        assert_eq!(cache.mobius_int(&[n as i128]).unwrap(), classical);
        assert_eq!(cache.mobius_int(&[-(n as i128)]).unwrap(), classical);
    }
}

fn element_in(name: &'static str) -> impl Strategy<Value = Vec<i64>> {
    let d = builtin(name).unwrap().degree();
    prop::collection::vec(-12i64..=12, d).prop_filter("nonzero", |v| v.iter().any(|&x| x != 0))
}

fn any_field_element() -> impl Strategy<Value = (usize, Vec<i64>)> {
    (0..BUILTIN_NAMES.len()).prop_flat_map(|i| (Just(i), element_in(BUILTIN_NAMES[i])))
}

fn lattice_mobius(x: &FieldElement) -> i8 {
    let n = x.knorm().abs().to_integer();
    let n: u64 = n.try_into().unwrap();
    let mut count = 0;
    for p in num_prime::nt_funcs::factorize64(n).keys() {
        for pr in primes_above(x.field(), *p).unwrap() {
            match valuation(x, &pr.lattice).unwrap() {
                0 => {}
                1 => count += 1,
                _ => return 0,
            }
        }
    }
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn fast_mobius_agrees_with_lattice_valuations((i, v) in any_field_element()) {
        let x = el(BUILTIN_NAMES[i], &v);
        prop_assert_eq!(mobius_k(&x).unwrap(), lattice_mobius(&x));
    }

    #[test]
    fn mobius_is_multiplicative_on_coprime_norms(a in element_in("Qsqrt-3"), b in element_in("Qsqrt-3")) {
        let (x, y) = (el("Qsqrt-3", &a), el("Qsqrt-3", &b));
        let (nx, ny) = (x.knorm().to_integer(), y.knorm().to_integer());
        prop_assume!(num_integer::Integer::gcd(&nx, &ny) == BigInt::from(1));
        prop_assert_eq!(mobius_k(&x.mul(&y)).unwrap(), mobius_k(&x).unwrap() * mobius_k(&y).unwrap());
    }

    #[test]
    fn ideal_products_are_closed_and_norms_multiply(a in element_in("Qi"), b in element_in("Qi")) {
        let (x, y) = (el("Qi", &a), el("Qi", &b));
        let (i, j) = (IdealLattice::principal(&x).unwrap(), IdealLattice::principal(&y).unwrap());
        let ij = i.mul(&j).unwrap();
        prop_assert!(ij.is_ideal());
        prop_assert_eq!(ij.norm(), i.norm() * j.norm());
        prop_assert_eq!(ij, IdealLattice::principal(&x.mul(&y)).unwrap());
    }
}
