use nilfourier::exact::q;
use nilfourier::grid::APSpec;
use nilfourier::ideals::mobius_k;
use nilfourier::io::parse_multfn;
use nilfourier::multfn::*;
use nilfourier::numfield::{builtin, FieldElement};
use nilfourier::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn spec(name: &str, kind: MultKind) -> MultFnSpec {
    MultFnSpec::new(&builtin(name).unwrap(), kind).unwrap()
}

/// Classical Liouville function on nonzero integers, by trial factorization.
fn classical_liouville(n: i64) -> i64 {
    if n == 0 {
        return 0;
    }
    let omega: usize = num_prime::nt_funcs::factorize64(n.unsigned_abs()).values().sum();
    if omega % 2 == 0 {
        1
    } else {
        -1
    }
}

#[test]
fn evaluation_examples() {
    let mu = spec("Qi", MultKind::Mobius);
    assert_eq!(mu.eval_int(&[1, 1]).unwrap(), re(-1.0));
    let lambda = spec("Q", MultKind::Liouville);
    assert_eq!(lambda.eval_int(&[12]).unwrap(), re(-1.0));
    assert_eq!(lambda.eval_int(&[0]).unwrap(), re(0.0));
    let one = spec("Qsqrt2sqrt3", MultKind::One);
    assert_eq!(one.eval_int(&[3, -1, 4, 1]).unwrap(), re(1.0));
    assert_eq!(one.eval_int(&[0, 0, 0, 0]).unwrap(), re(0.0));
    let half = FieldElement::new(one.field(), vec![nilfourier::exact::qr(1, 2), q(0), q(0), q(0)]).unwrap();
    assert!(matches!(one.eval(&half), Err(Error::Precondition(_))));
}

#[test]
fn completely_multiplicative_values() {
    let k = builtin("Qi").unwrap();
    let kind = MultKind::CompletelyMultiplicative {
        prime_values: vec![(vec![1, 1], Complex64::new(0.0, 1.0)), (vec![2, 1], re(-1.0))],
        default: CmDefault::One,
    };
    let chi = MultFnSpec::new(&k, kind).unwrap();
    // 2 = −i(1+i)², so χ(2) = i² = −1; 5 = (2+i)(2−i)
    assert_eq!(chi.eval_int(&[2, 0]).unwrap(), re(-1.0));
    assert_eq!(chi.eval_int(&[5, 0]).unwrap(), re(-1.0));
    assert_eq!(chi.eval_int(&[0, 1]).unwrap(), re(1.0));
    let bad = MultKind::CompletelyMultiplicative { prime_values: vec![(vec![2, 0], re(1.0))], default: CmDefault::One };
    assert!(matches!(MultFnSpec::new(&k, bad), Err(Error::Precondition(_))));
    let big = MultKind::CompletelyMultiplicative { prime_values: vec![(vec![1, 1], re(2.0))], default: CmDefault::One };
    assert!(matches!(MultFnSpec::new(&k, big), Err(Error::Precondition(_))));
}

#[test]
fn spec_files_parse() {
    let k = builtin("Qi").unwrap();
    let chi = parse_multfn(&k, "kind = cm\ndefault = one\nprime 1,1 = 0,1\n").unwrap();
    assert_eq!(chi.eval_int(&[2, 0]).unwrap(), re(-1.0));
    let mu = parse_multfn(&k, "kind = mobiusK\n").unwrap();
    assert_eq!(mu.eval_int(&[1, 1]).unwrap(), re(-1.0));
    let q = builtin("Q").unwrap();
    let ch = parse_multfn(&q, "kind = character\nmodulus = 3\nvalue 1 = 1,0\nvalue 2 = -1,0\n").unwrap();
    assert_eq!(ch.eval_int(&[5]).unwrap(), re(-1.0));
    assert_eq!(ch.eval_int(&[6]).unwrap(), re(0.0));
    assert!(matches!(parse_multfn(&k, "kind = zeta\n"), Err(Error::Parse(_))));
    assert!(parse_multfn(&k, "default = one\n").is_err());
}

#[test]
fn truncation_examples() {
    let one = spec("Q", MultKind::One);
    let g = truncate(&one, 4, 11).unwrap();
    let expect: Vec<f64> = (0..11).map(|i| if (1..=4).contains(&i) { 1.0 } else { 0.0 }).collect();
    assert_eq!(g.values().iter().map(|z| z.re).collect::<Vec<_>>(), expect);

    let mu = spec("Q", MultKind::Mobius);
    let g = truncate(&mu, 6, 13).unwrap();
    let expect = [0.0, 1.0, -1.0, -1.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    assert_eq!(g.values().iter().map(|z| z.re).collect::<Vec<_>>(), expect);

    let k = builtin("Qi").unwrap();
    let g = truncate(&spec("Qi", MultKind::Mobius), 2, 5).unwrap();
    for a in 0..5i64 {
        for b in 0..5i64 {
            let expected = if (1..=2).contains(&a) && (1..=2).contains(&b) {
                mobius_k(&FieldElement::from_int(&k, &[a, b])).unwrap() as f64
            } else {
                0.0
            };
            assert_eq!(g.get(&[a, b]), re(expected));
        }
    }
    assert!(matches!(truncate(&mu, 6, 6), Err(Error::BadWindow(_))));
}

#[test]
fn constant_function_on_the_full_box() {
    let one = spec("Qi", MultKind::One);
    let full = APSpec { base: vec![-5, -5], steps: vec![1, 1], lengths: vec![11, 11] };
    // χ(0) = 0, so the full box misses one point
    let s = aperiodicity_stat(&one, 5, &[full]).unwrap();
    assert!((s - 120.0 / 121.0).abs() < 1e-12);
    let z = spec("Q", MultKind::One);
    let s = aperiodicity_stat(&z, 5, &[APSpec { base: vec![1], steps: vec![1], lengths: vec![5] }]).unwrap();
    assert!((s - 5.0 / 11.0).abs() < 1e-12);
    assert!(matches!(aperiodicity_stat(&z, 5, &[]), Err(Error::Precondition(_))));
    let outside = APSpec { base: vec![0], steps: vec![2], lengths: vec![4] };
    assert!(matches!(aperiodicity_stat(&z, 5, &[outside]), Err(Error::Precondition(_))));
}

#[test]
fn liouville_is_small_on_the_default_catalog() {
    let n = 4096i64;
    let lambda = spec("Q", MultKind::Liouville);
    let catalog = default_catalog(1, n);
    assert!(!catalog.is_empty() && catalog.len() <= CATALOG_CAP);
    let stat = aperiodicity_stat(&lambda, n, &catalog).unwrap();
    let direct = catalog
        .iter()
        .map(|ap| {
            let mut s = 0i64;
            ap.for_each(|p| s += classical_liouville(p[0]));
            s.abs() as f64 / (2 * n + 1) as f64
        })
        .fold(0.0, f64::max);
    assert!((stat - direct).abs() < 1e-12);
    assert!(stat < 0.1);
}

#[test]
fn legendre_character_sees_its_residue_class() {
    let q = builtin("Q").unwrap();
    let chi = MultFnSpec::legendre(&q, 3).unwrap();
    let n = 300i64;
    // {3k+1} ∩ [−300, 300] starts at −299 and has 200 terms, all with χ = 1
    let ap = APSpec { base: vec![-299], steps: vec![3], lengths: vec![200] };
    let s = aperiodicity_stat(&chi, n, &[ap]).unwrap();
    assert!((s - 200.0 / 601.0).abs() < 1e-12);
    assert!(MultFnSpec::legendre(&q, 4).is_err());
    assert!(MultFnSpec::legendre(&builtin("Qi").unwrap(), 3).is_err());
}

#[test]
fn two_dimensional_catalog_respects_the_cap() {
    for (d, n) in [(2usize, 10i64), (4, 3)] {
        let c = default_catalog(d, n);
        assert!(!c.is_empty() && c.len() <= CATALOG_CAP);
        assert!(c.iter().all(|ap| ap.dim() == d && ap.inside(-n, n)));
    }
}

#[test]
fn progression_statistics_agree_in_verdict() {
    let n = 2048usize;
    let threshold = 0.1;
    let q = builtin("Q").unwrap();
    let legendre = MultFnSpec::legendre(&q, 5).unwrap();
    let phase = MultFnSpec::new(&q, MultKind::CompletelyMultiplicative { prime_values: vec![], default: CmDefault::RandomPhase(11) }).unwrap();
    let tests: Vec<(&str, Box<dyn Fn(i64) -> Complex64 + Sync>)> = vec![
        ("one", Box::new(|x: i64| re(if x == 0 { 0.0 } else { 1.0 }))),
        ("liouville", Box::new(|x: i64| re(classical_liouville(x) as f64))),
        ("legendre5", Box::new(move |x: i64| legendre.eval_int(&[x as i128]).unwrap())),
        ("random phase", Box::new(move |x: i64| phase.eval_int(&[x as i128]).unwrap())),
        ("alternating", Box::new(|x: i64| re(if x % 2 == 0 { 1.0 } else { -1.0 }))),
    ];
    for (name, f) in &tests {
        let one_sided = ap1_stat(f.as_ref(), n, 8);
        let values: Vec<Complex64> = (-(n as i64)..=n as i64).map(|x| f(x)).collect();
        let two_sided = ap2_stat(&values, 8);
        assert_eq!(one_sided >= threshold, two_sided >= threshold, "{name}: {one_sided} vs {two_sided}");
    }
}

fn pair() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (prop::collection::vec(-15i64..=15, 2), prop::collection::vec(-15i64..=15, 2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn multiplicative_on_coprime_norms((a, b) in pair(), seed in 0u64..4) {
        let k = builtin("Qi").unwrap();
        let (x, y) = (FieldElement::from_int(&k, &a), FieldElement::from_int(&k, &b));
        prop_assume!(!x.is_zero() && !y.is_zero());
        let (nx, ny) = (x.knorm().to_integer(), y.knorm().to_integer());
        prop_assume!(num_integer::Integer::gcd(&nx, &ny) == 1.into());
        let kinds = [
            MultKind::Mobius,
            MultKind::Liouville,
            MultKind::One,
            MultKind::CompletelyMultiplicative { prime_values: vec![], default: CmDefault::RandomPhase(seed) },
        ];
        for kind in kinds {
            let chi = MultFnSpec::new(&k, kind).unwrap();
            let (cx, cy, cxy) = (chi.eval(&x).unwrap(), chi.eval(&y).unwrap(), chi.eval(&x.mul(&y)).unwrap());
            prop_assert!((cx * cy - cxy).norm() < 1e-12);
            prop_assert!(cx.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn legendre_is_multiplicative(a in -500i64..=500, b in -500i64..=500, p in prop::sample::select(vec![3u64, 5, 7, 11, 13])) {
        let chi = MultFnSpec::legendre(&builtin("Q").unwrap(), p).unwrap();
        let v = |x: i64| chi.eval_int(&[x as i128]).unwrap();
        prop_assert_eq!(v(a) * v(b), v(a * b));
    }

    #[test]
    fn truncation_round_trips(n in 1usize..6, extra in 1usize..4, seed in 0u64..100) {
        let k = builtin("Qsqrt-3").unwrap();
        let chi = MultFnSpec::new(&k, MultKind::CompletelyMultiplicative { prime_values: vec![], default: CmDefault::RandomPhase(seed) }).unwrap();
        let g = truncate(&chi, n, n + extra).unwrap();
        for a in 0..(n + extra) as i64 {
            for b in 0..(n + extra) as i64 {
                let inside = (1..=n as i64).contains(&a) && (1..=n as i64).contains(&b);
                let expected = if inside { chi.eval(&FieldElement::from_int(&k, &[a, b])).unwrap() } else { re(0.0) };
                prop_assert_eq!(g.get(&[a, b]), expected);
            }
        }
    }
}
