use nilfourier::exact::{q, q_to_f64, qr, Q};
use nilfourier::grid::APSpec;
use nilfourier::nilseq::*;
use nilfourier::Error;
use proptest::prelude::*;
use std::f64::consts::SQRT_2;

fn scalar(terms: &[(u32, f64)]) -> PolySeq {
    let k = terms.iter().map(|t| t.0).max().unwrap_or(0);
    let t: Vec<(Vec<u32>, Vec<f64>)> = terms.iter().map(|&(j, a)| (vec![j], vec![a])).collect();
    PolySeq::from_monomial(1, 1, k, &t).unwrap()
}

fn scalar_binomial_exact(terms: &[(u32, Q)]) -> PolySeq {
    let k = terms.iter().map(|t| t.0).max().unwrap_or(0);
    let t: Vec<(Vec<u32>, Vec<Q>)> = terms.iter().map(|(j, a)| (vec![*j], vec![a.clone()])).collect();
    PolySeq::from_binomial_exact(1, 1, k, &t).unwrap()
}

/// Unsigned Stirling numbers of the first kind `[i j]` and second kind `{i j}` up to k.
fn stirling(k: usize) -> (Vec<Vec<u64>>, Vec<Vec<u64>>) {
    let mut first = vec![vec![0u64; k + 1]; k + 1];
    let mut second = vec![vec![0u64; k + 1]; k + 1];
    first[0][0] = 1;
    second[0][0] = 1;
    for i in 1..=k {
        for j in 1..=i {
            first[i][j] = (i as u64 - 1) * first[i - 1][j] + first[i - 1][j - 1];
            second[i][j] = j as u64 * second[i - 1][j] + second[i - 1][j - 1];
        }
    }
    (first, second)
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Per-axis constants for degree k: `bin ≤ c1 · mono` and `mono(k!·g) ≤ c2 · bin(g)`.
///
/// `α_i = Σ_{j ≥ i} {j i} i! α'_j` and `k! α'_j = Σ_{i ≥ j} ±[i j] (k!/i!) α_i`, both with
/// integer weights, so the torus norms obey the triangle inequality with those weights.
fn flavor_constants(k: usize) -> (f64, f64) {
    let (first, second) = stirling(k);
    let c1 = (0..=k).map(|i| (i..=k).map(|j| second[j][i] * factorial(i)).sum::<u64>()).max().unwrap();
    let c2 = (0..=k).map(|j| (j..=k).map(|i| first[i][j] * (factorial(k) / factorial(i))).sum::<u64>()).max().unwrap();
    (c1 as f64, c2 as f64)
}

#[test]
fn smooth_norm_examples() {
    let alpha = 0.3;
    let g = scalar(&[(1, alpha)]);
    for n in [1u64, 10, 100] {
        let expected = (2 * n + 1) as f64 * 0.3;
        assert!((smooth_norm(&g, n, Flavor::Binomial) - expected).abs() < 1e-9);
        assert!((smooth_norm(&g, n, Flavor::Monomial) - expected).abs() < 1e-9);
    }
    let c = scalar(&[(0, 0.77)]);
    assert_eq!(smooth_norm(&c, 50, Flavor::Binomial), 0.0);
    assert_eq!(smooth_norm(&c, 50, Flavor::Monomial), 0.0);
}

#[test]
fn flavors_of_half_n_squared() {
    // n²/2 = C(n,2) + n/2: binomial (1, 1/2), monomial (1/2, 0)
    let g = PolySeq::from_monomial_exact(1, 1, 2, &[(vec![2], vec![qr(1, 2)])]).unwrap();
    assert_eq!(g.binomial_exact().unwrap()[2][0], q(1));
    assert_eq!(g.binomial_exact().unwrap()[1][0], qr(1, 2));
    for n in [1u64, 5, 50, 500] {
        let s = (2 * n + 1) as f64;
        assert_eq!(smooth_norm(&g, n, Flavor::Binomial), s / 2.0);
        assert_eq!(smooth_norm(&g, n, Flavor::Monomial), s * s / 2.0);
    }
    // C(n,2) is integer valued: binomial 0, monomial (2N+1)²/2, so no constant bounds the ratio
    let h = scalar_binomial_exact(&[(2, q(1))]);
    assert_eq!(smooth_norm(&h, 30, Flavor::Binomial), 0.0);
    assert_eq!(smooth_norm(&h, 30, Flavor::Monomial), 61.0 * 61.0 / 2.0);
}

#[test]
fn flavor_constants_are_the_stirling_sums() {
    assert_eq!(flavor_constants(1), (1.0, 1.0));
    // k = 2: c1 = max(1, 1+1, 2) and c2 = max(2, 2+1, 1)
    assert_eq!(flavor_constants(2), (2.0, 3.0));
    assert_eq!(flavor_constants(3), (8.0, 11.0));
}

#[test]
fn char_search_examples() {
    let half = scalar(&[(1, 0.5)]);
    let (chi, s) = char_search(&half, 100, 4, Flavor::Binomial).unwrap();
    assert_eq!(chi.ell, vec![2]);
    assert_eq!(s, 0.0);

    let g = scalar(&[(1, SQRT_2)]);
    let (chi, s) = char_search(&g, 100, 10, Flavor::Binomial).unwrap();
    let oracle = (1..=10i64).map(|l| (l, 201.0 * torus_norm(l as f64 * SQRT_2))).fold((0, f64::MAX), |b, x| if x.1 < b.1 { x } else { b });
    assert_eq!(oracle.0, 5);
    assert_eq!(chi.ell, vec![5]);
    assert!((s - oracle.1).abs() < 1e-9);
    assert!((s - 14.3).abs() < 0.05);

    let c = PolySeq::from_monomial(1, 3, 1, &[(vec![0], vec![0.2, 0.4, 0.9])]).unwrap();
    let (chi, s) = char_search(&c, 10, 3, Flavor::Binomial).unwrap();
    assert_eq!((chi.ell, s), (vec![1, 0, 0], 0.0));
    assert!(matches!(char_search(&c, 10, 0, Flavor::Binomial), Err(Error::Precondition(_))));
}

#[test]
fn leibman_witness_examples() {
    let n = 500u64;
    let s = (2 * n + 1) as f64;
    let g = scalar(&[(1, 1.0 / (s * s))]);
    let w = leibman_witness(&g, &HorizChar::new(vec![1]), n, 10.0).unwrap();
    assert_eq!(w.radius, n);
    assert_eq!(w.ap, APSpec { base: vec![-(n as i64)], steps: vec![1], lengths: vec![2 * n + 1] });
    assert!(w.correlation >= 0.5);

    let t = PolySeq::from_binomial_exact(2, 2, 2, &[(vec![1, 1], vec![qr(1, 3), qr(1, 2)]), (vec![2, 0], vec![qr(2, 3), q(0)])]).unwrap();
    let w = leibman_witness(&t, &HorizChar::new(vec![3, 2]), 6, 1.0).unwrap();
    assert_eq!((w.radius, w.smooth_norm), (6, 0.0));
    assert!((w.correlation - 1.0).abs() < 1e-12);

    let r = scalar(&[(1, SQRT_2)]);
    match leibman_witness(&r, &HorizChar::new(vec![1]), 100, 10.0) {
        Err(Error::NoWitness { smooth_norm, bound }) => {
            assert!((smooth_norm - 201.0 * (SQRT_2 - 1.0)).abs() < 1e-9);
            assert!((smooth_norm - 83.26).abs() < 0.01);
            assert_eq!(bound, 10.0);
        }
        other => panic!("expected no witness, got {other:?}"),
    }
    assert!(matches!(leibman_witness(&r, &HorizChar::new(vec![0]), 100, 1e9), Err(Error::Precondition(_))));
}

#[test]
fn heisenberg_examples() {
    let a = HeisenbergElem::new(1.0, 0.0, 0.0);
    let b = HeisenbergElem::new(0.0, 1.0, 0.0);
    assert_eq!(a.commutator(&b), HeisenbergElem::new(0.0, 0.0, 1.0));
    assert_eq!(bracket(&[a.clone(), b.clone()]).unwrap(), HeisenbergElem::new(0.0, 0.0, 1.0));
    let three = [Heis::new(qr(3, 10), q(-2), qr(11, 2)), Heis::new(qr(1, 7), q(4), q(0)), Heis::new(q(9), qr(-5, 3), qr(1, 2))];
    assert_eq!(bracket(&three).unwrap(), Heis::identity());
    assert!(bracket::<f64>(&[]).is_err());

    let r = HeisenbergElem::new(1.5, 2.3, 0.7).reduce();
    assert!((r.x - 0.5).abs() < 1e-12 && (r.y - 0.3).abs() < 1e-12 && (r.z - 0.7).abs() < 1e-12);
    let exact = Heis::new(qr(3, 2), qr(23, 10), qr(7, 10));
    assert_eq!(exact.reduce(), Heis::new(qr(1, 2), qr(3, 10), qr(7, 10)));
    assert_eq!(exact.mul(&Heis::new(q(-1), q(-2), q(3))), exact.reduce());
}

#[test]
fn equidistributed_linear_orbit() {
    let g = PolySeq::from_monomial(1, 2, 1, &[(vec![1], vec![SQRT_2, 3f64.sqrt()])]).unwrap();
    let cat = EquidCatalog::default_for(1, 2000, 3, 3);
    let r = equid_correlation(&g, OrbitModel::Torus, 2000, &cat, 0.05).unwrap();
    assert!(r.max_correlation < 0.05, "{}", r.max_correlation);
    assert!(r.equidistributed);
    assert_eq!(r.test_functions, 48);
    assert_eq!(r.progressions, 1 + 2 + 3);
}

#[test]
fn periodic_orbit_correlates_fully() {
    let g = PolySeq::from_monomial(1, 2, 1, &[(vec![1], vec![0.5, 0.0])]).unwrap();
    let cat = EquidCatalog::default_for(1, 300, 2, 2);
    let r = equid_correlation(&g, OrbitModel::Torus, 300, &cat, 0.05).unwrap();
    assert!((r.max_correlation - 1.0).abs() < 1e-9);
    // the second coordinate is constant, so (0, 1) scores 1 with the smallest norm
    assert_eq!(r.best_test, "horizontal [0, 1]");
    assert!(!r.equidistributed);

    // with a moving second coordinate only (±2, 0) survive; ties go to the larger ξ
    let g = PolySeq::from_monomial(1, 2, 1, &[(vec![1], vec![0.5, SQRT_2])]).unwrap();
    let r = equid_correlation(&g, OrbitModel::Torus, 300, &cat, 0.05).unwrap();
    assert!((r.max_correlation - 1.0).abs() < 1e-9);
    assert_eq!(r.best_test, "horizontal [2, 0]");
    assert_eq!(r.best_ap, APSpec { base: vec![-300], steps: vec![1], lengths: vec![601] });
}

#[test]
fn constant_orbits_are_flagged() {
    let g = PolySeq::from_monomial(1, 2, 1, &[(vec![0], vec![0.3, 0.7])]).unwrap();
    let cat = EquidCatalog::default_for(1, 100, 2, 1);
    let r = equid_correlation(&g, OrbitModel::Torus, 100, &cat, 0.1).unwrap();
    assert!((r.max_correlation - 1.0).abs() < 1e-9);
    assert!(!r.equidistributed);

    // on the Heisenberg quotient the vertical bump at (1/2, 1/2) has modulus 1
    let h = PolySeq::from_monomial(1, 3, 1, &[(vec![0], vec![0.5, 0.5, 0.0]), (vec![1], vec![0.0, 0.0, 1.0 / 3.0])]).unwrap();
    let cat = EquidCatalog::default_for(1, 90, 3, 1);
    let r = equid_correlation(&h, OrbitModel::Heisenberg, 90, &cat, 0.1).unwrap();
    assert!((r.max_correlation - 1.0).abs() < 1e-9);
    assert_eq!(r.test_functions, 48 + 3);
    assert!(matches!(equid_correlation(&g, OrbitModel::Heisenberg, 100, &cat, 0.1), Err(Error::ShapeMismatch(_))));
    let empty = EquidCatalog { xi_max: 2, aps: vec![] };
    assert!(matches!(equid_correlation(&g, OrbitModel::Torus, 100, &empty, 0.1), Err(Error::Precondition(_))));
}

#[test]
fn orbit_dump_has_one_row_per_point() {
    let g = PolySeq::from_monomial(2, 1, 1, &[(vec![1, 0], vec![0.25]), (vec![0, 1], vec![0.5])]).unwrap();
    let csv = orbit_csv(&g, OrbitModel::Torus, 2);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n0,n1,c0");
    assert_eq!(lines.len(), 1 + 25);
    assert_eq!(lines[1], "-2,-2,0.5");
}

fn rational() -> impl Strategy<Value = Q> {
    (-12i64..=12, 1i64..=6).prop_map(|(a, b)| qr(a, b))
}

fn heis() -> impl Strategy<Value = Heis<Q>> {
    (rational(), rational(), rational()).prop_map(|(x, y, z)| Heis::new(x, y, z))
}

/// Exact sequence with random rational binomial coefficients.
fn exact_seq(dim: usize, out: usize, k: u32) -> impl Strategy<Value = PolySeq> {
    let n = multi_indices(dim, k).len();
    prop::collection::vec(prop::collection::vec(rational(), out), n).prop_map(move |cs| {
        let terms: Vec<(Vec<u32>, Vec<Q>)> = multi_indices(dim, k).into_iter().zip(cs).collect();
        PolySeq::from_binomial_exact(dim, out, k, &terms).unwrap()
    })
}

fn any_exact_seq() -> impl Strategy<Value = PolySeq> {
    (1usize..=2, 1usize..=2, 1u32..=3).prop_flat_map(|(d, s, k)| exact_seq(d, s, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn group_axioms_hold_exactly(a in heis(), b in heis(), c in heis()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&a.inv()), Heis::identity());
        prop_assert_eq!(a.inv().mul(&a), Heis::identity());
        let r = a.reduce();
        for v in [&r.x, &r.y, &r.z] {
            prop_assert!(*v >= q(0) && *v < q(1));
        }
    }

    #[test]
    fn brackets_are_multiplicative(a in heis(), a2 in heis(), b in heis()) {
        let lhs = bracket(&[a.clone(), b.clone()]).unwrap().mul(&bracket(&[a2.clone(), b.clone()]).unwrap());
        prop_assert_eq!(lhs, bracket(&[a.mul(&a2), b.clone()]).unwrap());
        prop_assert_eq!(bracket(&[a.clone(), b.clone()]).unwrap().inv(), bracket(&[a.inv(), b]).unwrap());
    }

    #[test]
    fn basis_conversion_round_trips(g in any_exact_seq()) {
        let terms: Vec<(Vec<u32>, Vec<Q>)> = g.indices().iter().cloned().zip(g.monomial_exact().unwrap().iter().cloned()).collect();
        let back = PolySeq::from_monomial_exact(g.dim(), g.out_dim(), g.degree(), &terms).unwrap();
        prop_assert_eq!(back.binomial_exact().unwrap(), g.binomial_exact().unwrap());

        let fterms: Vec<(Vec<u32>, Vec<f64>)> = g.indices().iter().cloned().zip(g.binomial().iter().cloned()).collect();
        let f = PolySeq::from_binomial(g.dim(), g.out_dim(), g.degree(), &fterms).unwrap();
        let mterms: Vec<(Vec<u32>, Vec<f64>)> = g.indices().iter().cloned().zip(f.monomial().iter().cloned()).collect();
        let fb = PolySeq::from_monomial(g.dim(), g.out_dim(), g.degree(), &mterms).unwrap();
        for (x, y) in fb.binomial().iter().flatten().zip(f.binomial().iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        for pt in [vec![-3i64, 2], vec![0, 0], vec![4, -1]] {
            let pt = &pt[..g.dim()];
            let ev = g.eval_exact(pt).unwrap();
            for (x, y) in g.eval(pt).iter().zip(&ev) {
                prop_assert!((x - q_to_f64(y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn derivatives_lower_the_degree(g in any_exact_seq(), h in prop::collection::vec(-4i64..=4, 2)) {
        let h = &h[..g.dim()];
        let dg = g.derivative(h).unwrap();
        let k = g.degree();
        prop_assert!(dg.effective_degree().is_none_or(|e| e < k));
        for pt in [vec![1i64, -2], vec![-5, 3]] {
            let pt = &pt[..g.dim()];
            let shifted: Vec<i64> = pt.iter().zip(h).map(|(a, b)| a + b).collect();
            let expected: Vec<Q> = g.eval_exact(&shifted).unwrap().iter().zip(g.eval_exact(pt).unwrap()).map(|(a, b)| a - b).collect();
            prop_assert_eq!(dg.eval_exact(pt).unwrap(), expected);
        }
    }

    #[test]
    fn flavors_compare_within_stirling_constants(g in any_exact_seq(), n in 1u64..40) {
        let (c1, c2) = flavor_constants(g.degree() as usize);
        let d = g.dim() as i32;
        let bin = smooth_norm(&g, n, Flavor::Binomial);
        let mono = smooth_norm(&g, n, Flavor::Monomial);
        prop_assert!(bin <= c1.powi(d) * mono * (1.0 + 1e-12) + 1e-9);
        let kf = q(factorial(g.degree() as usize) as i64);
        let scale = (0..d).fold(q(1), |acc, _| acc * &kf);
        let terms: Vec<(Vec<u32>, Vec<Q>)> = g
            .indices()
            .iter()
            .cloned()
            .zip(g.binomial_exact().unwrap().iter().map(|c| c.iter().map(|x| x * &scale).collect()))
            .collect();
        let scaled = PolySeq::from_binomial_exact(g.dim(), g.out_dim(), g.degree(), &terms).unwrap();
        prop_assert!(smooth_norm(&scaled, n, Flavor::Monomial) <= c2.powi(d) * bin * (1.0 + 1e-12) + 1e-9);
    }

    #[test]
    fn homogeneous_coefficients_transfer(d in 1usize..=2, m in 1u32..=3, seed in prop::collection::vec(rational(), 10)) {
        let terms: Vec<(Vec<u32>, Vec<Q>)> = multi_indices(d, m)
            .into_iter()
            .filter(|j| j.iter().sum::<u32>() == m)
            .zip(seed)
            .map(|(j, c)| (j, vec![c]))
            .collect();
        let g = PolySeq::from_monomial_exact(d, 1, m, &terms).unwrap();
        let r = popo_check(&g).unwrap();
        prop_assert!(r.holds);
        prop_assert_eq!(r.q, factorial(m as usize).pow(d as u32));
        prop_assert_eq!(r.terms.len(), terms.len());
        for ((j, extracted, qa), (tj, tc)) in r.terms.iter().zip(&terms) {
            prop_assert_eq!(j, tj);
            prop_assert!((extracted - q_to_f64(&tc[0])).abs() < 1e-9);
            prop_assert!(*qa <= r.c0 * r.c + 1e-9);
        }
    }

    #[test]
    fn searched_characters_yield_witnesses(g in (1u32..=2).prop_flat_map(|k| exact_seq(1, 2, k)), n in 5u64..40, c0 in 1u64..6) {
        let (eta, sn) = char_search(&g, n, c0, Flavor::Binomial).unwrap();
        prop_assert!(eta.norm() <= c0);
        if sn <= c0 as f64 {
            let w = leibman_witness(&g, &eta, n, c0 as f64).unwrap();
            prop_assert!(w.correlation >= w.floor - 1e-12);
            prop_assert!((w.smooth_norm - sn).abs() <= 1e-9 * (1.0 + sn));
        } else {
            let is_no_witness = matches!(leibman_witness(&g, &eta, n, c0 as f64), Err(Error::NoWitness { .. }));
            prop_assert!(is_no_witness);
        }
    }
}

#[test]
fn popo_rejects_mixed_degrees() {
    let g = PolySeq::from_monomial_exact(1, 1, 2, &[(vec![2], vec![qr(1, 3)]), (vec![1], vec![q(1)])]).unwrap();
    assert!(matches!(popo_check(&g), Err(Error::Precondition(_))));
    let two = PolySeq::from_monomial_exact(1, 2, 1, &[(vec![1], vec![q(1), q(2)])]).unwrap();
    assert!(matches!(popo_check(&two), Err(Error::Precondition(_))));
}
