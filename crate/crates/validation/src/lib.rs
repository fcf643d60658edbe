//! Acceptance criteria for `nilfourier`, each a self-contained check with a runtime budget.

use std::time::{Duration, Instant};

use nilfourier::exact::{q, q_to_f64, qr, RationalMatrix, Q};
use nilfourier::forms::{act_right, aut_d_check, check, extract_automorphism, hat, DiagForm};
use nilfourier::grid::{gowers_interval_norm, gowers_norm, gowers_norm_cube, GridFn};
use nilfourier::ideals::{density_estimate, primes_above, IdealLattice, PrimeCache};
use nilfourier::katai::{build_prime_set, tk_statistic, PrimeSet};
use nilfourier::kernels::{check_kernel, decompose, fejer, least_prime_above, phi_kernel, structure_report, KernelSpec};
use nilfourier::multfn::{truncate, MultFnSpec, MultKind};
use nilfourier::nilseq::{leibman_witness, multi_indices, HorizChar, PolySeq};
use nilfourier::numfield::{builtin, FieldElement, BUILTIN_NAMES};
use nilfourier::partreg::{gerardin_spec, quad_parametrization, verify_identity};
use nilfourier::units::{find_units, regularity_check, regularize};
use nilfourier::Error;
use num_complex::Complex64;
use num_prime::nt_funcs::is_prime64;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Outcome of one criterion.
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

type Check = fn() -> Result<String, String>;

/// Criteria in run order; the splitting claim on Q(√2,√3) runs last.
pub const CRITERIA: [(u32, &str, u64, Check); 15] = [
    (1, "Fourier identity for U2", 5, fourier_identity),
    (2, "recursive and cube Gowers norms agree", 30, gowers_oracle),
    (3, "interval norm is independent of the window", 10, window_independence),
    (4, "kernel axioms and spectra", 10, kernel_axioms),
    (5, "structure decomposition of the Mobius function", 20, structure_decomposition),
    (6, "Liouville U2 norms decrease", 60, aperiodicity_trend),
    (8, "exact algebra on random pairs", 10, exact_algebra),
    (9, "density of multiples of 1+i", 5, gaussian_density),
    (10, "regularization of (2+sqrt2)^4", 5, regularization),
    (11, "Turan-Kubilius ratios", 30, turan_kubilius),
    (12, "parametrized identities vanish", 20, partition_identities),
    (13, "automorphism calculus", 5, automorphisms),
    (14, "inverse Leibman witness", 5, leibman),
    (15, "form duality and symmetry", 10, form_duality),
    (7, "Mobius on Q(sqrt2,sqrt3) avoids -1 and primes split into 2 or 4", 60, biquadratic_mobius),
];

pub fn run(id: u32, name: &'static str, budget_s: u64, f: Check) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_s);
    let (ok, mut detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let passed = ok && elapsed <= budget;
    if ok && !passed {
        detail = format!("{detail}; over budget");
    }
    Outcome { id, name, passed, detail, elapsed, budget }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn random_grid(rng: &mut ChaCha8Rng, dim: usize, modulus: usize) -> GridFn {
    let v = (0..modulus.pow(dim as u32))
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GridFn::new(dim, modulus, v).expect("sized to the grid")
}

fn fourier_identity() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for t in 0..200 {
        let dim = 1 + t % 2;
        let modulus = [8, 16, 31][(t / 2) % 3];
        let f = random_grid(&mut rng, dim, modulus);
        let lhs = gowers_norm(&f, 2).map_err(err)?.powi(4);
        let rhs: f64 = f.dft().values().iter().map(|v| v.norm().powi(4)).sum();
        let rel = (lhs - rhs).abs() / f.sup_norm().powi(4);
        worst = worst.max(rel);
        ensure(rel <= 1e-9, || format!("D={dim} Ñ={modulus}: |U2⁴ − Σ|f̂|⁴| = {rel:e}·‖f‖∞⁴"))?;
    }
    Ok(format!("200 functions, worst deviation {worst:.1e}·‖f‖∞⁴"))
}

fn gowers_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for d in [2u32, 3] {
        for _ in 0..50 {
            let modulus = rng.gen_range(2..=16);
            let f = random_grid(&mut rng, 1, modulus);
            let a = gowers_norm(&f, d).map_err(err)?;
            let b = gowers_norm_cube(&f, d).map_err(err)?;
            worst = worst.max((a - b).abs());
            ensure((a - b).abs() <= 1e-9, || format!("d={d} Ñ={modulus}: {a} vs {b}"))?;
        }
    }
    Ok(format!("100 functions, worst gap {worst:.1e}"))
}

fn window_independence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 32;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let vals: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let a = gowers_interval_norm(&vals, 1, n, 2, 2 * n + 1).map_err(err)?;
        let b = gowers_interval_norm(&vals, 1, n, 2, 4 * n).map_err(err)?;
        worst = worst.max((a - b).abs());
        ensure((a - b).abs() <= 1e-9, || format!("{a} vs {b}"))?;
    }
    Ok(format!("50 functions, worst gap {worst:.1e}"))
}

fn centered(x: usize, n: usize) -> i64 {
    if 2 * x > n {
        x as i64 - n as i64
    } else {
        x as i64
    }
}

fn kernel_axioms() -> Result<String, String> {
    let mut kernels = 0;
    for n in [101usize, 257] {
        for m in 1..=16usize {
            let f = fejer(n, m, 1).map_err(err)?;
            check_kernel(&f, 1e-12).map_err(err)?;
            kernels += 1;
            for dil in [1u64, 6] {
                let spec = KernelSpec::new(n, m, dil, 1).map_err(err)?;
                let phi = phi_kernel(&spec).map_err(err)?;
                check_kernel(&phi, 1e-12).map_err(err)?;
                kernels += 1;
                let hat = phi.dft();
                for idx in 0..n {
                    let xi = centered(idx, n);
                    let r = centered((dil as i64 * xi).rem_euclid(n as i64) as usize, n);
                    let expected = (1.0 - r.abs() as f64 / m as f64).max(0.0);
                    let exact = q_to_f64(&spec.coefficient(&[xi]));
                    ensure((hat.values()[idx].re - expected).abs() < 1e-12 && hat.values()[idx].im.abs() < 1e-12, || {
                        format!("Ñ={n} m={m} Q={dil} ξ={xi}: φ̂ = {} vs {expected}", hat.values()[idx])
                    })?;
                    ensure((exact - expected).abs() < 1e-15, || format!("exact coefficient {exact} vs {expected}"))?;
                    if m < 16 {
                        let wide = KernelSpec::new(n, m + 1, dil, 1).map_err(err)?;
                        ensure(wide.coefficient(&[xi]) >= spec.coefficient(&[xi]), || format!("widening lowers ξ={xi}"))?;
                    }
                }
            }
        }
    }
    Ok(format!("{kernels} kernels checked"))
}

fn structure_decomposition() -> Result<String, String> {
    let n = 512;
    let n_tilde = least_prime_above(3 * n as u64) as usize;
    let mu = MultFnSpec::new(&builtin("Q").map_err(err)?, MultKind::Mobius).map_err(err)?;
    let chi = truncate(&mu, n, n_tilde).map_err(err)?;
    let spec = KernelSpec::new(n_tilde, 8, 12, 1).map_err(err)?;
    let dec = decompose(&chi, &phi_kernel(&spec).map_err(err)?).map_err(err)?;
    ensure(dec.structured.add(&dec.uniform).map_err(err)? == chi, || "structured + uniform differs from χ".into())?;
    let r = structure_report(&chi, &spec, 12, 2).map_err(err)?;
    ensure(r.reconstruction_error == 0.0, || format!("reconstruction error {}", r.reconstruction_error))?;
    ensure(r.max_structured <= 1.0 + 1e-12, || format!("|structured| reaches {}", r.max_structured))?;
    ensure(r.spectral_r <= r.spectral_r_bound + 1e-9, || format!("R = {} exceeds {}", r.spectral_r, r.spectral_r_bound))?;
    ensure(r.uniform_norm <= 1.01 * r.chi_norm, || format!("‖u‖ = {} vs ‖χ‖ = {}", r.uniform_norm, r.chi_norm))?;
    Ok(format!(
        "Ñ={n_tilde}, R={:.3} ≤ {:.3}, ‖u‖={:.4}, ‖χ‖={:.4}",
        r.spectral_r, r.spectral_r_bound, r.uniform_norm, r.chi_norm
    ))
}

fn aperiodicity_trend() -> Result<String, String> {
    let k = builtin("Q").map_err(err)?;
    let lambda = MultFnSpec::new(&k, MultKind::Liouville).map_err(err)?;
    let mut norms = Vec::new();
    for e in 8..=12 {
        let n = 1usize << e;
        let vals: Vec<Complex64> = (1..=n as i128).map(|x| lambda.eval_int(&[x])).collect::<Result<_, _>>().map_err(err)?;
        let ones = vec![Complex64::new(1.0, 0.0); n];
        let l = gowers_interval_norm(&vals, 1, n, 2, 2 * n + 1).map_err(err)?;
        let o = gowers_interval_norm(&ones, 1, n, 2, 2 * n + 1).map_err(err)?;
        ensure(o >= 0.5, || format!("‖1‖ = {o} at N = {n}"))?;
        norms.push(l);
    }
    for w in norms.windows(2) {
        ensure(w[1] <= 1.05 * w[0], || format!("norms rise: {norms:?}"))?;
    }
    let last = *norms.last().expect("five sizes");
    ensure(last < 0.2, || format!("‖λ‖ = {last} at N = 4096"))?;
    let shown: Vec<String> = norms.iter().map(|x| format!("{x:.4}")).collect();
    Ok(format!("‖λ‖ at N=2^8..2^12: {}", shown.join(", ")))
}

fn biquadratic_mobius() -> Result<String, String> {
    let k = builtin("Qsqrt2sqrt3").map_err(err)?;
    let cache = PrimeCache::new(&k);
    let side = 41i128;
    let minus: Vec<[i128; 4]> = (0..side.pow(4))
        .into_par_iter()
        .filter_map(|idx| {
            let c = [idx % side - 20, idx / side % side - 20, idx / side.pow(2) % side - 20, idx / side.pow(3) - 20];
            if c == [0; 4] {
                return None;
            }
            match cache.mobius_int(&c) {
                Ok(-1) => Some(c),
                _ => None,
            }
        })
        .collect();
    let mut bad_split = Vec::new();
    for p in (2u64..=100).filter(|&p| is_prime64(p)) {
        match primes_above(&k, p) {
            Ok(ps) if ps.len() != 2 && ps.len() != 4 => bad_split.push(format!("p={p}: {} prime(s)", ps.len())),
            Ok(_) | Err(Error::UnsupportedPrime { .. }) => {}
            Err(e) => return Err(err(e)),
        }
    }
    ensure(minus.is_empty() && bad_split.is_empty(), || {
        let first = minus.first().map(|c| format!("{c:?}")).unwrap_or_default();
        format!("{} elements with μ = −1 (first {first}); splitting: {}", minus.len(), bad_split.join(", "))
    })?;
    Ok("no −1 values, every prime splits into 2 or 4".into())
}

fn random_element(k: &nilfourier::numfield::Field, rng: &mut ChaCha8Rng) -> FieldElement {
    let c = (0..k.degree()).map(|_| qr(rng.gen_range(-20..=20), rng.gen_range(1..=4))).collect();
    FieldElement::new(k, c).expect("degree matches")
}

fn exact_algebra() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for name in BUILTIN_NAMES {
        let k = builtin(name).map_err(err)?;
        for _ in 0..1000 {
            let (x, y) = (random_element(&k, &mut rng), random_element(&k, &mut rng));
            let xy = x.mul(&y);
            ensure(x.knorm() * y.knorm() == xy.knorm(), || format!("{name}: norm of {x} · {y}"))?;
            ensure(x.embed_matrix().mul(&y.embed_matrix()) == xy.embed_matrix(), || format!("{name}: A(xy) for {x}, {y}"))?;
            ensure(x.embed_matrix().add(&y.embed_matrix()) == x.add(&y).embed_matrix(), || format!("{name}: A(x+y)"))?;
            ensure(x.min_poly().eval_matrix(&x.embed_matrix()).is_zero(), || format!("{name}: min_poly of {x}"))?;
        }
    }
    Ok(format!("{} pairs", 1000 * BUILTIN_NAMES.len()))
}

fn gaussian_density() -> Result<String, String> {
    let j = IdealLattice::principal(&FieldElement::from_int(&builtin("Qi").map_err(err)?, &[1, 1])).map_err(err)?;
    let mut shown = Vec::new();
    for n in [25u64, 50, 100, 200] {
        let d = q_to_f64(&density_estimate(&j, n).map_err(err)?);
        ensure((d - 0.5).abs() <= 3.0 / n as f64, || format!("N={n}: density {d}"))?;
        shown.push(format!("{d:.4}"));
    }
    Ok(format!("densities {}", shown.join(", ")))
}

fn regularization() -> Result<String, String> {
    let k = builtin("Qsqrt2").map_err(err)?;
    let units = find_units(&k, 2).map_err(err)?;
    let a = FieldElement::from_int(&k, &[2, 1]).pow(4);
    let r = regularize(&a, &units).map_err(err)?;
    let four = FieldElement::from_int(&k, &[4, 0]);
    let ratio = r.regularized.div(&four).ok_or("division by 4 failed")?;
    ensure(ratio.is_integral() && ratio.knorm().abs() == q(1), || format!("εa = {} is not 4 up to a unit", r.regularized))?;
    for n in [10u64, 40, 160] {
        ensure(regularity_check(&four, 1.01, n).map_err(err)?, || format!("4 fails the check at N={n}"))?;
    }
    Ok(format!("εa = {}, exponents {:?}", r.regularized, r.exponents))
}

fn turan_kubilius() -> Result<String, String> {
    let z = builtin("Q").map_err(err)?;
    let rational = PrimeSet::from_elements(&z, [2, 3, 5].iter().map(|&p| FieldElement::from_int(&z, &[p])).collect()).map_err(err)?;
    let gaussian = build_prime_set(&builtin("Qi").map_err(err)?, 3, 4).map_err(err)?;
    ensure(gaussian.norms().iter().all(|n| n.to_u64().is_some_and(is_prime64)), || {
        "Gaussian set has a prime of degree 2".into()
    })?;
    let mut worst = 0.0f64;
    for set in [&rational, &gaussian] {
        for n in [50u64, 100, 200] {
            let r = tk_statistic(set, n).map_err(err)?;
            worst = worst.max(r.ratio);
            ensure(r.ratio <= 4.0, || format!("{}: ratio {} at N={n}", set.field.label(), r.ratio))?;
        }
    }
    Ok(format!("largest ratio {worst:.3}"))
}

fn partition_identities() -> Result<String, String> {
    let specs = [
        ("9x²+16y²−z²", quad_parametrization(9, 16, -1, 0, 0, 0).map_err(err)?),
        ("x²−y²−z²", quad_parametrization(1, -1, -1, 0, 0, 0).map_err(err)?),
        ("Gérardin", gerardin_spec().map_err(err)?),
    ];
    let mut evals = 0;
    for (seed, (name, spec)) in specs.iter().enumerate() {
        let r = verify_identity(spec, 100, seed as u64).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.symbolic_zero, || format!("{name}: composed polynomial nonzero"))?;
        evals += r.evaluations;
    }
    Ok(format!("{evals} exact evaluations, all residuals 0"))
}

fn automorphisms() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut recovered = 0;
    while recovered < 50 {
        let sp = rng.gen_range(1..=3);
        let r = sp + rng.gen_range(0..=2);
        let a2 = RationalMatrix::from_i64(&(0..r).map(|_| (0..sp).map(|_| rng.gen_range(-4..=4)).collect()).collect::<Vec<_>>());
        if a2.rank() != sp {
            continue;
        }
        let b = RationalMatrix::from_i64(&(0..sp).map(|_| (0..sp).map(|_| rng.gen_range(-5..=5)).collect()).collect::<Vec<_>>());
        let x = extract_automorphism(&a2.mul(&b), &a2).map_err(err)?;
        ensure(x.b1 == b && x.graph, || format!("graph of {b:?} gave {:?}", x.b1))?;
        recovered += 1;
    }
    let mut count = 0;
    for e in 0..7i64.pow(4) {
        let c = |i: u32| e / 7i64.pow(i) % 7 - 3;
        let b = [[c(0), c(1)], [c(2), c(3)]];
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        ensure(aut_d_check(&b) == (det == 1), || format!("{b:?}: check disagrees with det = {det}"))?;
        count += 1;
    }
    Ok(format!("50 graphs recovered, {count} matrices checked"))
}

fn leibman() -> Result<String, String> {
    let n = 500u64;
    let s = (2 * n + 1) as f64;
    let slow = PolySeq::from_monomial(1, 1, 1, &[(vec![1], vec![1.0 / (s * s)])]).map_err(err)?;
    let w = leibman_witness(&slow, &HorizChar::new(vec![1]), n, 10.0).map_err(err)?;
    ensure(w.correlation >= 0.5, || format!("correlation {}", w.correlation))?;
    let c0 = 10.0;
    let fast = PolySeq::from_monomial(1, 1, 1, &[(vec![1], vec![std::f64::consts::SQRT_2])]).map_err(err)?;
    let refused = match leibman_witness(&fast, &HorizChar::new(vec![1]), 100, c0) {
        Err(Error::NoWitness { smooth_norm, .. }) if smooth_norm > c0 => smooth_norm,
        other => return Err(format!("n√2 was not refused: {other:?}")),
    };
    Ok(format!("correlation {:.4}; n√2 refused with smooth norm {refused:.2} > {c0}", w.correlation))
}

fn random_form(rng: &mut ChaCha8Rng) -> DiagForm {
    let (d, m, s) = (rng.gen_range(1..=3usize), rng.gen_range(1..=3usize), rng.gen_range(1..=2usize));
    let terms: Vec<(Vec<u32>, Vec<Q>)> = multi_indices(d, m as u32)
        .into_iter()
        .filter(|j| j.iter().sum::<u32>() as usize == m)
        .map(|j| (j, (0..s).map(|_| qr(rng.gen_range(-9..=9), rng.gen_range(1..=5))).collect()))
        .collect();
    DiagForm::new(d, m, s, &terms).expect("valid exponents")
}

fn form_duality() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..200 {
        let r = random_form(&mut rng);
        let l = check(&r);
        ensure(hat(&l) == r, || format!("hat(check(R)) differs for {r:?}"))?;
        ensure(check(&hat(&l)) == l, || "check(hat(L)) differs".into())?;
    }
    for _ in 0..50 {
        let l = check(&random_form(&mut rng));
        let d = l.dim();
        let b = RationalMatrix::from_i64(&(0..d).map(|_| (0..d).map(|_| rng.gen_range(-3..=3)).collect()).collect::<Vec<_>>());
        // act_right rebuilds through the symmetry-validating constructor
        let lb = act_right(&b, &l).map_err(|e| format!("L∘B not symmetric: {e}"))?;
        let n: Vec<Q> = (0..d).map(|i| q(i as i64 * 2 - 1)).collect();
        let nb: Vec<Q> = (0..d).map(|k| n.iter().enumerate().fold(q(0), |a, (i, x)| a + x * b.get(i, k))).collect();
        ensure(hat(&lb).eval(&n).map_err(err)? == hat(&l).eval(&nb).map_err(err)?, || "hat(L∘B)(n) ≠ hat(L)(nB)".into())?;
    }
    Ok("200 round trips, 50 actions".into())
}
