use nilfourier::exact::{q, q_to_f64, qr, RatPoly, RationalMatrix, Q};
use nilfourier::forms::*;
use nilfourier::nilseq::multi_indices;
use nilfourier::numfield::{builtin, FieldElement};
use nilfourier::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn el(name: &str, c: &[i64]) -> FieldElement {
    FieldElement::from_int(&builtin(name).unwrap(), c)
}

fn exponents(dim: usize, m: usize) -> Vec<Vec<u32>> {
    multi_indices(dim, m as u32).into_iter().filter(|j| j.iter().sum::<u32>() as usize == m).collect()
}

/// `n ↦ nB` for a row vector n.
fn row_times(n: &[Q], b: &RationalMatrix) -> Vec<Q> {
    (0..b.cols).map(|k| n.iter().enumerate().fold(q(0), |acc, (i, x)| acc + x * b.get(i, k))).collect()
}

/// Monic polynomial with the given distinct complex roots, real parts of its coefficients.
fn poly_from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, x) in c.iter().enumerate() {
            next[i + 1] += x;
            next[i] -= x * r;
        }
        c = next;
    }
    c.iter().map(|x| x.re).collect()
}

fn strings(p: &RatPoly) -> Vec<String> {
    p.coeffs().iter().map(|c| c.to_string()).collect()
}

#[test]
fn duality_examples() {
    let l = SymForm::new(1, 2, 1, vec![vec![q(5)]]).unwrap();
    let r = hat(&l);
    assert_eq!(r.coeff(&[2]), Some(&[q(5)][..]));
    assert_eq!(r.eval(&[q(3)]).unwrap(), vec![q(45)]);

    let r = DiagForm::new(2, 2, 1, &[(vec![1, 1], vec![q(1)])]).unwrap();
    let l = check(&r);
    assert_eq!(l.coeffs(), &[vec![q(0)], vec![qr(1, 2)], vec![qr(1, 2)], vec![q(0)]]);
    assert_eq!(hat(&l), r);

    let z = SymForm::zero(3, 3, 2).unwrap();
    assert!(hat(&z).is_zero());
    assert_eq!(check(&hat(&z)), z);
    assert_eq!(multinomial(&[1, 1]), 2.into());
    assert_eq!(multinomial(&[2, 1, 0]), 3.into());
}

#[test]
fn forms_validate_shape_and_symmetry() {
    assert!(matches!(SymForm::new(2, 2, 1, vec![vec![q(0)], vec![q(1)], vec![q(2)], vec![q(0)]]), Err(Error::Precondition(_))));
    assert!(matches!(SymForm::new(2, 2, 1, vec![vec![q(0)]; 3]), Err(Error::ShapeMismatch(_))));
    assert!(matches!(SymForm::new(0, 2, 1, vec![]), Err(Error::Precondition(_))));
    assert!(matches!(DiagForm::new(2, 2, 1, &[(vec![1, 0], vec![q(1)])]), Err(Error::ShapeMismatch(_))));
    let l = SymForm::zero(2, 2, 1).unwrap();
    assert!(matches!(act_right(&RationalMatrix::identity(3), &l), Err(Error::ShapeMismatch(_))));
    assert!(matches!(act_left(&RationalMatrix::identity(2), &l), Err(Error::ShapeMismatch(_))));
}

#[test]
fn right_action_examples() {
    let l = check(&DiagForm::new(2, 2, 1, &[(vec![1, 1], vec![q(1)])]).unwrap());
    assert_eq!(act_right(&RationalMatrix::identity(2), &l).unwrap(), l);
    let swap = RationalMatrix::from_i64(&[vec![0, 1], vec![1, 0]]);
    assert_eq!(act_right(&swap, &l).unwrap(), l);
    let shear = RationalMatrix::from_i64(&[vec![1, 1], vec![0, 1]]);
    // n1 n2 at (n1, n1 + n2) is n1² + n1 n2
    let r = hat(&act_right(&shear, &l).unwrap());
    assert_eq!(r.coeff(&[2, 0]), Some(&[q(1)][..]));
    assert_eq!(r.coeff(&[1, 1]), Some(&[q(1)][..]));
    assert_eq!(r.coeff(&[0, 2]), Some(&[q(0)][..]));
}

#[test]
fn automorphism_examples() {
    let a = RationalMatrix::from_i64(&[vec![2, -1], vec![3, 5]]);
    let x = extract_automorphism(&a, &RationalMatrix::identity(2)).unwrap();
    assert_eq!(x.b1, a);
    assert!(x.graph);
    assert_eq!(x.height, q(5));

    let a2 = RationalMatrix::from_i64(&[vec![1, 0], vec![0, 1], vec![0, 0]]);
    let a1 = RationalMatrix::from_i64(&[vec![1, 1], vec![0, 1], vec![0, 0]]);
    let x = extract_automorphism(&a1, &a2).unwrap();
    assert_eq!(x.b1, RationalMatrix::from_i64(&[vec![1, 1], vec![0, 1]]));
    assert!(x.graph);
    for perm in [[1usize, 0, 2], [2, 1, 0], [2, 0, 1]] {
        let p1 = RationalMatrix::from_rows(perm.iter().map(|&i| a1.row(i).to_vec()).collect());
        let p2 = RationalMatrix::from_rows(perm.iter().map(|&i| a2.row(i).to_vec()).collect());
        assert_eq!(extract_automorphism(&p1, &p2).unwrap().b1, x.b1);
    }

    // a kernel row outside the graph
    let a1k = RationalMatrix::from_i64(&[vec![1, 1], vec![0, 1], vec![4, 0]]);
    let x = extract_automorphism(&a1k, &a2).unwrap();
    assert!(!x.graph);
    // the kernel pivot also clears its column of B1; Y below realizes both identities
    assert_eq!(x.b1, RationalMatrix::from_i64(&[vec![0, 1], vec![0, 1]]));
    assert_eq!(x.b2, RationalMatrix::from_i64(&[vec![1, 0]]));
    let y = RationalMatrix::from_i64(&[vec![1, 0, 1], vec![0, 1, 0], vec![0, 0, 4]]);
    let stacked = RationalMatrix::from_rows(x.b1.to_rows().into_iter().chain(x.b2.to_rows()).collect());
    assert_eq!(y.mul(&stacked), a1k);
    assert_eq!(y.mul(&RationalMatrix::from_i64(&[vec![1, 0], vec![0, 1], vec![0, 0]])), a2);
    assert_ne!(y.det(), q(0));

    let flat = RationalMatrix::from_i64(&[vec![1, 2], vec![2, 4], vec![0, 0]]);
    assert!(matches!(extract_automorphism(&a1, &flat), Err(Error::NotAGraph(_))));
    assert!(matches!(extract_automorphism(&a, &a2), Err(Error::ShapeMismatch(_))));
}

#[test]
fn bracket_form_invariance() {
    assert!(aut_d_check(&[[1, 1], [0, 1]]));
    assert!(!aut_d_check(&[[2, 0], [0, 2]]));
    assert!(aut_d_check(&[[1, 0], [0, 1]]));
}

#[test]
fn eigenproduct_examples() {
    let two = eigenproduct_minpoly(&el("Q", &[2]), &el("Q", &[1]), 1).unwrap();
    assert_eq!(two.f0, vec!["-2", "1"]);
    assert!(annihilates(&two.poly, &RationalMatrix::identity(2).scale(&q(2))));
    assert!(!annihilates(&two.poly, &RationalMatrix::from_i64(&[vec![1, 0], vec![0, 2]])));

    let g = eigenproduct_minpoly(&el("Qi", &[1, 1]), &el("Qi", &[1, 0]), 1).unwrap();
    assert_eq!(g.f0, vec!["2", "-2", "1"]);
    assert!(!g.norms_equal);

    // products of 1 ± i of length 2 are 2i, 2, −2i
    let g2 = eigenproduct_minpoly(&el("Qi", &[1, 1]), &el("Qi", &[1, 0]), 2).unwrap();
    let expected = RatPoly::from_i64(&[2, -2, 1]).mul(&RatPoly::from_i64(&[-2, 1])).mul(&RatPoly::from_i64(&[4, 0, 1]));
    assert_eq!(g2.f0, strings(&expected));
    assert_eq!(g2.per_degree.len(), 2);

    let conj = eigenproduct_minpoly(&el("Qi", &[1, 1]), &el("Qi", &[1, -1]), 1).unwrap();
    assert!(conj.norms_equal);
    assert!(matches!(eigenproduct_minpoly(&el("Qi", &[1, 1]), &el("Qi", &[0, 0]), 1), Err(Error::Precondition(_))));
    assert!(matches!(eigenproduct_minpoly(&el("Qi", &[1, 1]), &el("Qi", &[1, 0]), 0), Err(Error::Precondition(_))));
}

fn rational() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=4).prop_map(|(a, b)| qr(a, b))
}

fn diag_form() -> impl Strategy<Value = DiagForm> {
    (1usize..=3, 1usize..=3, 1usize..=2).prop_flat_map(|(d, m, s)| {
        let n = exponents(d, m).len();
        prop::collection::vec(prop::collection::vec(rational(), s), n).prop_map(move |cs| {
            let terms: Vec<(Vec<u32>, Vec<Q>)> = exponents(d, m).into_iter().zip(cs).collect();
            DiagForm::new(d, m, s, &terms).unwrap()
        })
    })
}

fn int_matrix(n: usize) -> impl Strategy<Value = RationalMatrix> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, n), n).prop_map(|rows| RationalMatrix::from_i64(&rows))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn duality_round_trips(r in diag_form()) {
        let l = check(&r);
        prop_assert_eq!(hat(&l), r.clone());
        prop_assert_eq!(check(&hat(&l)), l.clone());
        // L(n, …, n) = R(n)
        for n in [vec![q(1), q(-2), qr(1, 3)], vec![q(0), q(4), q(-1)]] {
            let n = &n[..l.dim()];
            prop_assert_eq!(l.eval(&vec![n.to_vec(); l.degree()]).unwrap(), r.eval(n).unwrap());
        }
    }

    #[test]
    fn zero_forms_correspond(r in diag_form()) {
        let l = check(&r);
        prop_assert_eq!(l.is_zero(), r.is_zero());
        // a nonzero form of degree m cannot vanish on the grid {0..m}^D
        let (d, m) = (l.dim(), l.degree());
        let side = m + 1;
        let mut vanishes = true;
        for idx in 0..side.pow(d as u32) {
            let n: Vec<Q> = (0..d).map(|t| q(((idx / side.pow(t as u32)) % side) as i64)).collect();
            if r.eval(&n).unwrap().iter().any(|x| *x != q(0)) {
                vanishes = false;
            }
        }
        prop_assert_eq!(vanishes, l.is_zero());
    }

    #[test]
    fn right_action_commutes_with_restriction(r in diag_form(), seed in prop::collection::vec(-3i64..=3, 9)) {
        let l = check(&r);
        let d = l.dim();
        let b = RationalMatrix::from_i64(&(0..d).map(|i| seed[i * 3..i * 3 + d].to_vec()).collect::<Vec<_>>());
        // construction runs the symmetry validation
        let lb = act_right(&b, &l).unwrap();
        for n in [vec![q(2), q(-1), q(3)], vec![qr(1, 2), q(0), q(-5)]] {
            let n = &n[..d];
            prop_assert_eq!(hat(&lb).eval(n).unwrap(), r.eval(&row_times(n, &b)).unwrap());
        }
    }

    #[test]
    fn left_action_post_composes(r in diag_form(), a in int_matrix(2)) {
        let l = check(&r);
        let a = RationalMatrix::from_rows(a.to_rows()[..l.out_dim()].to_vec());
        let al = act_left(&a, &l).unwrap();
        let n = vec![vec![q(1), q(-3), q(2)][..l.dim()].to_vec(); l.degree()];
        prop_assert_eq!(al.eval(&n).unwrap(), row_times(&l.eval(&n).unwrap(), &a));
    }

    #[test]
    fn graphs_return_their_matrix(b in int_matrix(2), a2 in prop::collection::vec(prop::collection::vec(-4i64..=4, 2), 4)) {
        let a2 = RationalMatrix::from_i64(&a2);
        prop_assume!(a2.rank() == 2);
        let x = extract_automorphism(&a2.mul(&b), &a2).unwrap();
        prop_assert_eq!(x.b1, b);
        prop_assert!(x.graph);
    }

    #[test]
    fn bracket_invariance_is_unit_determinant(b in prop::array::uniform2(prop::array::uniform2(-4i64..=4))) {
        prop_assert_eq!(aut_d_check(&b), b[0][0] * b[1][1] - b[0][1] * b[1][0] == 1);
    }

    #[test]
    fn f0_matches_numerical_eigenvalue_products(a in -6i64..=6, b in 1i64..=4, c in 1i64..=5, m_max in 1usize..=3) {
        // x = (a + b√2)/c has real conjugates σ± = (a ± b√2)/c
        let x = eigenproduct_minpoly(&el("Qsqrt2", &[a, b]), &el("Qsqrt2", &[c, 0]), m_max).unwrap();
        let s = 2f64.sqrt();
        let sig = [(a as f64 + b as f64 * s) / c as f64, (a as f64 - b as f64 * s) / c as f64];
        let mut roots: Vec<f64> = Vec::new();
        for m in 1..=m_max {
            for k in 0..=m {
                let v = sig[0].powi(k as i32) * sig[1].powi((m - k) as i32);
                if roots.iter().all(|r| (r - v).abs() > 1e-9 * (1.0 + v.abs())) {
                    roots.push(v);
                }
            }
        }
        let oracle = poly_from_roots(&roots.iter().map(|&r| Complex64::new(r, 0.0)).collect::<Vec<_>>());
        let got: Vec<f64> = x.poly.coeffs().iter().map(q_to_f64).collect();
        prop_assert_eq!(got.len(), oracle.len());
        for (g, o) in got.iter().zip(&oracle) {
            prop_assert!((g - o).abs() < 1e-6 * (1.0 + o.abs()), "{:?} vs {:?}", got, oracle);
        }
        // no repeated roots
        prop_assert_eq!(x.poly.gcd(&x.poly.derivative()).degree(), Some(0));
    }
}
