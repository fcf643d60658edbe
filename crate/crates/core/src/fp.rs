//! Polynomials over a prime field F_p and their factorization into irreducibles.

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Polynomial over F_p with coefficients in ascending order, trailing zeros trimmed.
pub type FpPoly = Vec<u64>;

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "inverse of zero mod {p}");
    powmod(a, p - 2, p)
}

fn trim(mut f: FpPoly) -> FpPoly {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

/// Reduces integer coefficients mod p.
pub fn from_i64(coeffs: &[i64], p: u64) -> FpPoly {
    trim(coeffs.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect())
}

/// Reduces i128 coefficients mod p.
pub fn from_i128(coeffs: &[i128], p: u64) -> FpPoly {
    trim(coeffs.iter().map(|&c| c.rem_euclid(p as i128) as u64).collect())
}

pub fn degree(f: &FpPoly) -> Option<usize> {
    f.len().checked_sub(1)
}

pub fn add(f: &FpPoly, g: &FpPoly, p: u64) -> FpPoly {
    let n = f.len().max(g.len());
    trim((0..n)
        .map(|i| (f.get(i).copied().unwrap_or(0) + g.get(i).copied().unwrap_or(0)) % p)
        .collect())
}

pub fn sub(f: &FpPoly, g: &FpPoly, p: u64) -> FpPoly {
    let n = f.len().max(g.len());
    trim((0..n)
        .map(|i| (f.get(i).copied().unwrap_or(0) + p - g.get(i).copied().unwrap_or(0)) % p)
        .collect())
}

pub fn mul(f: &FpPoly, g: &FpPoly, p: u64) -> FpPoly {
    if f.is_empty() || g.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(a, b, p)) % p;
        }
    }
    trim(out)
}

pub fn divrem(f: &FpPoly, g: &FpPoly, p: u64) -> (FpPoly, FpPoly) {
    assert!(!g.is_empty(), "division by zero polynomial");
    let dg = g.len() - 1;
    if f.len() <= dg {
        return (vec![], f.clone());
    }
    let inv = inv_mod(g[dg], p);
    let mut r = f.clone();
    let mut q = vec![0u64; f.len() - dg];
    for k in (0..q.len()).rev() {
        let c = mulmod(r[k + dg], inv, p);
        q[k] = c;
        if c != 0 {
            for (j, &gj) in g.iter().enumerate() {
                r[k + j] = (r[k + j] + p - mulmod(c, gj, p)) % p;
            }
        }
    }
    r.truncate(dg);
    (trim(q), trim(r))
}

pub fn monic(f: &FpPoly, p: u64) -> FpPoly {
    match f.last() {
        None => vec![],
        Some(&l) => {
            let inv = inv_mod(l, p);
            f.iter().map(|&c| mulmod(c, inv, p)).collect()
        }
    }
}

pub fn gcd(f: &FpPoly, g: &FpPoly, p: u64) -> FpPoly {
    let mut a = f.clone();
    let mut b = g.clone();
    while !b.is_empty() {
        let r = divrem(&a, &b, p).1;
        a = b;
        b = r;
    }
    monic(&a, p)
}

pub fn derivative(f: &FpPoly, p: u64) -> FpPoly {
    trim(f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| mulmod(c, i as u64 % p, p))
        .collect())
}

/// `base^e mod f`.
pub fn powmod_poly(base: &FpPoly, e: &BigUint, f: &FpPoly, p: u64) -> FpPoly {
    let mut result: FpPoly = divrem(&vec![1], f, p).1;
    let b = divrem(base, f, p).1;
    for i in (0..e.bits()).rev() {
        result = divrem(&mul(&result, &result, p), f, p).1;
        if e.bit(i) {
            result = divrem(&mul(&result, &b, p), f, p).1;
        }
    }
    result
}

fn is_one(f: &FpPoly) -> bool {
    f.len() == 1 && f[0] == 1
}

/// Squarefree decomposition of a monic polynomial: pairs `(g, e)` with `f = prod g^e`.
fn squarefree(f: &FpPoly, p: u64) -> Vec<(FpPoly, u32)> {
    let mut out = Vec::new();
    let df = derivative(f, p);
    let mut c = gcd(f, &df, p);
    let mut w = divrem(f, &c, p).0;
    let mut i = 1;
    while !is_one(&w) && !w.is_empty() {
        let y = gcd(&w, &c, p);
        let fac = divrem(&w, &y, p).0;
        if degree(&fac).unwrap_or(0) > 0 {
            out.push((monic(&fac, p), i));
        }
        w = y;
        c = divrem(&c, &w, p).0;
        i += 1;
    }
    if degree(&c).unwrap_or(0) > 0 {
        // c is a p-th power: its coefficients sit at multiples of p.
        let root: FpPoly = c.iter().step_by(p as usize).copied().collect();
        for (g, e) in squarefree(&monic(&root, p), p) {
            out.push((g, e * p as u32));
        }
    }
    out
}

/// Distinct-degree factorization of a squarefree monic polynomial.
fn distinct_degree(f: &FpPoly, p: u64) -> Vec<(FpPoly, usize)> {
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x: FpPoly = vec![0, 1];
    let mut h = divrem(&x, &rest, p).1;
    let pb = BigUint::from(p);
    let mut d = 1;
    while degree(&rest).unwrap_or(0) >= 2 * d {
        h = powmod_poly(&h, &pb, &rest, p);
        let g = gcd(&sub(&h, &x, p), &rest, p);
        if !is_one(&g) {
            out.push((g.clone(), d));
            rest = divrem(&rest, &g, p).0;
            h = divrem(&h, &rest, p).1;
        }
        d += 1;
    }
    if degree(&rest).unwrap_or(0) > 0 {
        let dr = degree(&rest).unwrap();
        out.push((monic(&rest, p), dr));
    }
    out
}

/// Equal-degree splitting of a product of distinct irreducibles of degree `d`.
fn equal_degree(f: &FpPoly, d: usize, p: u64, rng: &mut ChaCha8Rng) -> Vec<FpPoly> {
    let n = degree(f).unwrap_or(0);
    if n == d {
        return vec![monic(f, p)];
    }
    let exp = (BigUint::from(p).pow(d as u32) - BigUint::one()) >> 1;
    loop {
        let a: FpPoly = trim((0..n).map(|_| rng.gen_range(0..p)).collect());
        if degree(&a).unwrap_or(0) == 0 {
            continue;
        }
        let candidate = if p == 2 {
            // Trace map a + a^2 + ... + a^(2^(d-1)).
            let mut t = a.clone();
            let mut acc = a.clone();
            for _ in 1..d {
                t = divrem(&mul(&t, &t, p), f, p).1;
                acc = add(&acc, &t, p);
            }
            acc
        } else {
            sub(&powmod_poly(&a, &exp, f, p), &vec![1], p)
        };
        let g = gcd(&candidate, f, p);
        let dg = degree(&g).unwrap_or(0);
        if dg > 0 && dg < n {
            let h = divrem(f, &g, p).0;
            let mut out = equal_degree(&g, d, p, rng);
            out.extend(equal_degree(&monic(&h, p), d, p, rng));
            return out;
        }
    }
}

/// Factors a nonzero polynomial into monic irreducibles with multiplicities.
///
/// The output is sorted by degree, then by coefficient vector, so it is deterministic.
pub fn factor(f: &FpPoly, p: u64) -> Vec<(FpPoly, u32)> {
    assert!(!f.is_empty(), "cannot factor the zero polynomial");
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    let mut out = Vec::new();
    for (g, e) in squarefree(&monic(f, p), p) {
        for (h, d) in distinct_degree(&g, p) {
            for irr in equal_degree(&h, d, p, &mut rng) {
                out.push((irr, e));
            }
        }
    }
    out.sort_by(|a, b| {
        a.0.len()
            .cmp(&b.0.len())
            .then_with(|| a.0.iter().rev().cmp(b.0.iter().rev()))
    });
    out
}

/// Whether the polynomial is the zero polynomial mod p.
pub fn is_zero(f: &FpPoly) -> bool {
    f.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(factors: &[(FpPoly, u32)], p: u64) -> FpPoly {
        let mut acc = vec![1];
        for (g, e) in factors {
            for _ in 0..*e {
                acc = mul(&acc, g, p);
            }
        }
        acc
    }

    #[test]
    fn gaussian_modulus_mod_two_and_five() {
        assert_eq!(factor(&from_i64(&[1, 0, 1], 2), 2), vec![(vec![1, 1], 2)]);
        assert_eq!(
            factor(&from_i64(&[1, 0, 1], 5), 5),
            vec![(vec![2, 1], 1), (vec![3, 1], 1)]
        );
    }

    #[test]
    fn biquadratic_mod_five_splits_into_two_quadratics() {
        let f = from_i64(&[1, 0, -4, 0, 1], 5);
        let fac = factor(&f, 5);
        assert_eq!(fac.len(), 2);
        assert!(fac.iter().all(|(g, e)| g.len() == 3 && *e == 1));
        assert_eq!(expand(&fac, 5), f);
    }

    #[test]
    fn factorization_reconstructs_input() {
        for p in [2u64, 3, 7, 13, 101] {
            for seed in 0..20i64 {
                let coeffs: Vec<i64> = (0..6).map(|i| (seed * 7 + i * i * 3 + i) % 11 - 5).chain([1]).collect();
                let f = from_i64(&coeffs, p);
                let fac = factor(&f, p);
                assert_eq!(expand(&fac, p), monic(&f, p), "p={p} seed={seed}");
            }
        }
    }
}
