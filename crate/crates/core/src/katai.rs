//! Sets of prime elements with coprime norms, and the Turán–Kubilius and Katai statistics
//! over boxes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{q, q_to_f64, Q};
use crate::ideals::IdealLattice;
use crate::multfn::MultFnSpec;
use crate::numfield::{Field, FieldElement};
use crate::units::{find_units, regularity_constant, regularity_sample, regularize_with};

/// Prime elements whose norms are distinct rational primes.
#[derive(Clone, Debug)]
pub struct PrimeSet {
    pub field: Field,
    pub elements: Vec<FieldElement>,
    /// Largest measured regularity constant over the elements.
    pub achieved_c: f64,
    /// `Σ 1/|N(p)|`.
    pub a_p: Q,
    /// Rational primes passed over during construction, with the reason.
    pub skipped: Vec<(u64, String)>,
}

impl PrimeSet {
    /// Validates caller-supplied elements: integral, of prime absolute norm, pairwise coprime.
    pub fn from_elements(field: &Field, elements: Vec<FieldElement>) -> Result<Self> {
        let sample = regularity_sample(field.degree());
        let mut achieved_c = 0.0f64;
        for x in &elements {
            if !x.is_zero() {
                for &n in &sample {
                    achieved_c = achieved_c.max(regularity_constant(x, n)?);
                }
            }
        }
        let set = PrimeSet {
            field: field.clone(),
            a_p: reciprocal_norm_sum(&elements),
            elements,
            achieved_c,
            skipped: vec![],
        };
        set.validate()?;
        Ok(set)
    }

    /// Absolute norms of the elements.
    pub fn norms(&self) -> Vec<BigInt> {
        self.elements.iter().map(|x| x.knorm().to_integer().abs()).collect()
    }

    /// Re-checks integrality, primality of norms, and pairwise coprimality.
    pub fn validate(&self) -> Result<()> {
        let norms = self.norms();
        for (x, n) in self.elements.iter().zip(&norms) {
            if !x.is_integral() {
                return Err(Error::Precondition(format!("{x} is not integral")));
            }
            let n64 = n.to_u64().unwrap_or(0);
            if !num_prime::nt_funcs::is_prime64(n64) {
                return Err(Error::Precondition(format!("{x} has norm {n}, not a prime")));
            }
        }
        for i in 0..norms.len() {
            for j in 0..i {
                if norms[i].gcd(&norms[j]) != BigInt::from(1) {
                    return Err(Error::Precondition(format!(
                        "norms {} and {} are not coprime",
                        norms[j], norms[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn reciprocal_norm_sum(elements: &[FieldElement]) -> Q {
    elements
        .iter()
        .fold(q(0), |acc, x| acc + Q::new(BigInt::from(1), x.knorm().to_integer().abs()))
}

/// Collects `count` prime elements of prime norm for increasing rational primes.
///
/// The box `[-height, height]^D` is scanned once. For each rational prime p the generator of
/// norm ±p that is lexicographically largest in coordinates is kept, then balanced by units.
/// Primes with no such generator in the box are skipped and recorded.
pub fn build_prime_set(field: &Field, count: usize, height: u32) -> Result<PrimeSet> {
    if count < 2 {
        return Err(Error::Precondition("a prime set needs at least two elements".into()));
    }
    if height == 0 {
        return Err(Error::Precondition("height must be positive".into()));
    }
    let d = field.degree();
    let h = height as i64;
    let side = (2 * h + 1) as usize;
    let total = side
        .checked_pow(d as u32)
        .filter(|&t| t <= 1 << 28)
        .ok_or_else(|| Error::Precondition("search box too large".into()))?;
    let found: Vec<(u64, Vec<i64>)> = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let mut c = vec![0i64; d];
            let mut r = idx;
            for x in c.iter_mut().rev() {
                *x = (r % side) as i64 - h;
                r /= side;
            }
            let wide: Vec<i128> = c.iter().map(|&x| x as i128).collect();
            let n = field.norm_int(&wide).unsigned_abs();
            let n = u64::try_from(n).ok()?;
            num_prime::nt_funcs::is_prime64(n).then_some((n, c))
        })
        .collect();
    let mut best: BTreeMap<u64, Vec<i64>> = BTreeMap::new();
    for (p, c) in found {
        let e = best.entry(p).or_insert_with(|| c.clone());
        if c > *e {
            *e = c;
        }
    }
    let largest = *best.keys().next_back().unwrap_or(&1);

    let system = if field.unit_rank() > 0 { Some(find_units(field, height.max(2))?) } else { None };
    let sample = regularity_sample(d);
    let mut elements = Vec::new();
    let mut skipped = Vec::new();
    let mut achieved_c = 0.0f64;
    let mut p = 1u64;
    while elements.len() < count {
        p += 1;
        if p > largest {
            break;
        }
        if !num_prime::nt_funcs::is_prime64(p) {
            continue;
        }
        let Some(c) = best.get(&p) else {
            skipped.push((p, "no generator of prime norm in the search box".into()));
            continue;
        };
        let x = FieldElement::from_int(field, c);
        let (x, cx) = match &system {
            Some(s) => {
                let r = regularize_with(&x, s, &sample)?;
                (r.regularized, r.achieved_c)
            }
            None => {
                let mut cx = 0.0f64;
                for &n in &sample {
                    cx = cx.max(regularity_constant(&x, n)?);
                }
                (x, cx)
            }
        };
        achieved_c = achieved_c.max(cx);
        elements.push(x);
    }
    if elements.len() < count {
        return Err(Error::PartialSet {
            wanted: count,
            found: elements.iter().map(|x| x.to_i64().expect("integral")).collect(),
            detail: format!("no further prime-norm generators within height {height}"),
        });
    }
    let set = PrimeSet {
        field: field.clone(),
        a_p: reciprocal_norm_sum(&elements),
        elements,
        achieved_c,
        skipped,
    };
    set.validate()?;
    Ok(set)
}

/// Divisibility by a fixed nonzero element through its adjugate: `p | z` iff
/// `z · adj(p) ≡ 0 mod N(p)` coordinatewise.
struct Divisor {
    adj: Vec<i128>,
    norm: i128,
}

impl Divisor {
    fn new(p: &FieldElement) -> Result<Self> {
        let norm = p.knorm();
        let adj = p
            .inverse()
            .ok_or_else(|| Error::Precondition("zero prime element".into()))?
            .scale(&norm)
            .to_i128()
            .ok_or_else(|| Error::Precondition("adjugate is not integral".into()))?;
        let norm = norm
            .to_integer()
            .to_i128()
            .ok_or_else(|| Error::Precondition("norm exceeds 128 bits".into()))?;
        Ok(Divisor { adj, norm })
    }

    fn divides(&self, field: &Field, z: &[i128]) -> bool {
        field.mul_int(z, &self.adj).iter().all(|c| c % self.norm == 0)
    }
}

/// Turán–Kubilius left side and its scale.
#[derive(Clone, Debug, Serialize)]
pub struct TkReport {
    pub n: u64,
    /// `Σ_{z ∈ R_N} |ω_P(z) − A_P|`, exact.
    pub lhs_exact: String,
    pub lhs: f64,
    /// `√(A_P + 1) (2N+1)^D`.
    pub rhs_scale: f64,
    pub ratio: f64,
}

/// Counts `ω_P(z)` over the box `[-N, N]^D`, with `ω_P(0) = |P|`.
pub fn tk_statistic(set: &PrimeSet, n: u64) -> Result<TkReport> {
    let field = &set.field;
    let d = field.degree();
    let divisors: Vec<Divisor> = set.elements.iter().map(Divisor::new).collect::<Result<_>>()?;
    let ni = n as i64;
    let side = (2 * ni + 1) as usize;
    let per_row = side.pow(d as u32 - 1);
    let k = divisors.len();
    // Histogram of ω over the box, accumulated per leading coordinate.
    let hist: Vec<Vec<u64>> = (0..side)
        .into_par_iter()
        .map(|lead| {
            let mut h = vec![0u64; k + 1];
            let mut z = vec![0i128; d];
            for idx in 0..per_row {
                z[0] = lead as i128 - ni as i128;
                let mut r = idx;
                for x in z[1..].iter_mut().rev() {
                    *x = (r % side) as i128 - ni as i128;
                    r /= side;
                }
                let w = divisors.iter().filter(|dv| dv.divides(field, &z)).count();
                h[w] += 1;
            }
            h
        })
        .collect();
    let mut counts = vec![0u64; k + 1];
    for h in hist {
        for (c, v) in counts.iter_mut().zip(h) {
            *c += v;
        }
    }
    let lhs = counts.iter().enumerate().fold(q(0), |acc, (w, &c)| {
        acc + (q(w as i64) - &set.a_p).abs() * q(c as i64)
    });
    let rhs_scale = (q_to_f64(&set.a_p) + 1.0).sqrt() * (side as f64).powi(d as i32);
    let lhs_f = q_to_f64(&lhs);
    Ok(TkReport {
        n,
        lhs_exact: lhs.to_string(),
        lhs: lhs_f,
        rhs_scale,
        ratio: lhs_f / rhs_scale,
    })
}

/// The two sides of the Katai inequality, normalized by `(2N+1)^D`.
#[derive(Clone, Debug, Serialize)]
pub struct KataiTerms {
    pub s: Complex64,
    pub c_p: f64,
    pub a_p: String,
    pub a_p_value: f64,
}

/// `S(N) = Σ_{n ∈ R_N} χ(ι(n)) h(n)` and
/// `C_P(N) = Σ_{p ≠ q} |Σ_{n : nA(p), nA(q) ∈ R_N} h(nA(p)) conj h(nA(q))|`.
pub fn katai_terms(
    chi: &MultFnSpec,
    h: &(dyn Fn(&[i64]) -> Complex64 + Sync),
    set: &PrimeSet,
    n: u64,
) -> Result<KataiTerms> {
    let field = &set.field;
    let d = field.degree();
    let ni = n as i64;
    let s = box_sum(d, ni, |c| {
        let wide: Vec<i128> = c.iter().map(|&x| x as i128).collect();
        Ok(chi.eval_int(&wide)? * h(c))
    })?;
    let c_p = pair_sum(set, ni, |p, c| {
        let wide: Vec<i128> = c.iter().map(|&x| x as i128).collect();
        let image = field.mul_int(&wide, &p.to_i128().expect("integral"));
        Some(image.iter().map(|&x| x as i64).collect())
    }, h)?;
    finish(s, c_p, set, n)
}

/// Multiplicative form of [`katai_terms`]: sums over elements `z` with `h` read on `pz`, all
/// products taken in the field. Agrees with the additive form under `ι`.
pub fn katai_terms_multiplicative(
    chi: &MultFnSpec,
    h: &(dyn Fn(&FieldElement) -> Complex64 + Sync),
    set: &PrimeSet,
    n: u64,
) -> Result<KataiTerms> {
    let field = &set.field;
    let d = field.degree();
    let ni = n as i64;
    let s = box_sum(d, ni, |c| {
        let z = FieldElement::from_int(field, c);
        Ok(chi.eval(&z)? * h(&z))
    })?;
    let hc = |c: &[i64]| h(&FieldElement::from_int(field, c));
    let c_p = pair_sum(set, ni, |p, c| {
        let z = FieldElement::from_int(field, c);
        p.mul(&z).to_i64()
    }, &hc)?;
    finish(s, c_p, set, n)
}

fn finish(s: Complex64, c_p: f64, set: &PrimeSet, n: u64) -> Result<KataiTerms> {
    let vol = ((2 * n + 1) as f64).powi(set.field.degree() as i32);
    Ok(KataiTerms {
        s: s / vol,
        c_p: c_p / vol,
        a_p: set.a_p.to_string(),
        a_p_value: q_to_f64(&set.a_p),
    })
}

fn box_sum(d: usize, n: i64, f: impl Fn(&[i64]) -> Result<Complex64>) -> Result<Complex64> {
    let side = (2 * n + 1) as usize;
    let mut c = vec![0i64; d];
    let mut acc = Complex64::new(0.0, 0.0);
    for idx in 0..side.pow(d as u32) {
        let mut r = idx;
        for x in c.iter_mut().rev() {
            *x = (r % side) as i64 - n;
            r /= side;
        }
        acc += f(&c)?;
    }
    Ok(acc)
}

/// For each ordered pair `p ≠ q`, enumerates `w ∈ (p) ∩ R_N` in lattice order, recovers
/// `z = w/p` and sums `h(w) conj h(qz)` over those with `qz ∈ R_N`.
fn pair_sum(
    set: &PrimeSet,
    n: i64,
    times: impl Fn(&FieldElement, &[i64]) -> Option<Vec<i64>>,
    h: &(dyn Fn(&[i64]) -> Complex64 + Sync),
) -> Result<f64> {
    let field = &set.field;
    let mut total = 0.0f64;
    for (i, p) in set.elements.iter().enumerate() {
        let ideal = IdealLattice::principal(p)?;
        let div = Divisor::new(p)?;
        let mut zs: Vec<Vec<i64>> = Vec::new();
        ideal.hnf().for_each_in_box(n, |w| {
            let wide: Vec<i128> = w.iter().map(|&x| x as i128).collect();
            let z: Vec<i64> = field
                .mul_int(&wide, &div.adj)
                .iter()
                .map(|&c| (c / div.norm) as i64)
                .collect();
            zs.push(z);
        });
        for (j, qel) in set.elements.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for z in &zs {
                let (Some(pz), Some(qz)) = (times(p, z), times(qel, z)) else {
                    continue;
                };
                if qz.iter().all(|x| x.abs() <= n) {
                    acc += h(&pz) * h(&qz).conj();
                }
            }
            total += acc.norm();
        }
    }
    Ok(total)
}

/// `A_P` for the first `w` elements of a prime set, for `w = 1..=len`.
pub fn reciprocal_sums(set: &PrimeSet) -> Vec<Q> {
    let mut acc = q(0);
    set.elements
        .iter()
        .map(|x| {
            acc = &acc + Q::new(BigInt::from(1), x.knorm().to_integer().abs());
            acc.clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::builtin;

    #[test]
    fn gaussian_set_skips_inert_three() {
        let k = builtin("Qi").unwrap();
        let s = build_prime_set(&k, 3, 4).unwrap();
        let norms: Vec<i64> = s.norms().iter().map(|n| n.to_i64().unwrap()).collect();
        assert_eq!(norms, vec![2, 5, 13]);
        assert_eq!(s.skipped.iter().map(|x| x.0).collect::<Vec<_>>(), vec![3, 7, 11]);
    }

    #[test]
    fn rejects_small_counts() {
        let k = builtin("Q").unwrap();
        assert!(build_prime_set(&k, 0, 5).is_err());
    }
}
