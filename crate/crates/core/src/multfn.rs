//! Multiplicative functions on O_K, their truncations to grids and aperiodicity statistics.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{APSpec, GridFn};
use crate::ideals::{IdealLattice, PrimeCache};
use crate::numfield::{Field, FieldElement};

/// Value of a completely multiplicative function at primes not listed explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmDefault {
    One,
    /// A phase `e(u)` with `u` drawn from a generator keyed by the seed and the prime ideal.
    RandomPhase(u64),
}

/// The kinds of multiplicative function supported.
#[derive(Clone, Debug)]
pub enum MultKind {
    Mobius,
    Liouville,
    One,
    /// Defined on prime ideals; units map to 1.
    CompletelyMultiplicative {
        prime_values: Vec<(Vec<i64>, Complex64)>,
        default: CmDefault,
    },
    /// Function of the residue class modulo an ideal, 0 on classes without a value.
    Character {
        modulus: Vec<i64>,
        values: Vec<(Vec<i64>, Complex64)>,
    },
}

/// A multiplicative function on a field, with its prime cache.
#[derive(Clone)]
pub struct MultFnSpec {
    field: Field,
    kind: MultKind,
    cache: Arc<PrimeCache>,
    prime_table: HashMap<(u64, Vec<Vec<BigInt>>), Complex64>,
    residue: Option<(IdealLattice, HashMap<Vec<BigInt>, Complex64>)>,
}

impl std::fmt::Debug for MultFnSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultFnSpec")
            .field("field", &self.field.label())
            .field("kind", &self.kind)
            .finish()
    }
}

impl MultFnSpec {
    pub fn new(field: &Field, kind: MultKind) -> Result<Self> {
        let cache = Arc::new(PrimeCache::new(field));
        let mut prime_table = HashMap::new();
        let mut residue = None;
        match &kind {
            MultKind::CompletelyMultiplicative { prime_values, .. } => {
                for (coords, value) in prime_values {
                    if (value.norm() - 1.0).abs() > 1e-12 {
                        return Err(Error::Precondition(format!("value {value} at {coords:?} is not of modulus 1")));
                    }
                    let v = int_coords(field, coords)?;
                    let fac = cache.factorization(&v)?;
                    if fac.len() != 1 || fac[0].1 != 1 {
                        return Err(Error::Precondition(format!("{coords:?} does not generate a prime ideal")));
                    }
                    let key = (fac[0].0.p, fac[0].0.lattice.hnf().rows().to_vec());
                    prime_table.insert(key, *value);
                }
            }
            MultKind::Character { modulus, values } => {
                let m = int_coords(field, modulus)?;
                let ideal = IdealLattice::principal(&FieldElement::from_i128(field, &m))?;
                let mut table = HashMap::new();
                for (coords, value) in values {
                    if value.norm() > 1.0 + 1e-12 {
                        return Err(Error::Precondition(format!("value {value} exceeds modulus 1")));
                    }
                    let key = ideal.hnf().reduce(&big(&int_coords(field, coords)?));
                    table.insert(key, *value);
                }
                residue = Some((ideal, table));
            }
            _ => {}
        }
        Ok(MultFnSpec {
            field: field.clone(),
            kind,
            cache,
            prime_table,
            residue,
        })
    }

    /// The real character `n ↦ (n/p)` on Z.
    pub fn legendre(field: &Field, p: u64) -> Result<Self> {
        if field.degree() != 1 {
            return Err(Error::Precondition("Legendre symbol needs the rational field".into()));
        }
        if !num_prime::nt_funcs::is_prime64(p) || p == 2 {
            return Err(Error::Precondition(format!("{p} is not an odd prime")));
        }
        let values = (1..p as i64)
            .map(|r| {
                let e = (p - 1) / 2;
                let s = pow_mod(r as u64, e, p);
                (vec![r], Complex64::new(if s == 1 { 1.0 } else { -1.0 }, 0.0))
            })
            .collect();
        Self::new(field, MultKind::Character { modulus: vec![p as i64], values })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn kind(&self) -> &MultKind {
        &self.kind
    }

    pub fn cache(&self) -> &PrimeCache {
        &self.cache
    }

    /// Value at an integral element given by coordinates; 0 at 0.
    pub fn eval_int(&self, n: &[i128]) -> Result<Complex64> {
        if n.iter().all(|&x| x == 0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let re = |x: f64| Complex64::new(x, 0.0);
        Ok(match &self.kind {
            MultKind::One => re(1.0),
            MultKind::Mobius => re(self.cache.mobius_int(n)? as f64),
            MultKind::Liouville => re(self.cache.liouville_int(n)? as f64),
            MultKind::CompletelyMultiplicative { default, .. } => {
                let mut acc = re(1.0);
                for (prime, v) in self.cache.factorization(n)? {
                    let key = (prime.p, prime.lattice.hnf().rows().to_vec());
                    let value = match self.prime_table.get(&key) {
                        Some(v) => *v,
                        None => match default {
                            CmDefault::One => re(1.0),
                            CmDefault::RandomPhase(seed) => random_phase(*seed, &key),
                        },
                    };
                    acc *= value.powu(v);
                }
                acc
            }
            MultKind::Character { .. } => {
                let (ideal, table) = self.residue.as_ref().expect("built with the character");
                let key = ideal.hnf().reduce(&big(n));
                table.get(&key).copied().unwrap_or(re(0.0))
            }
        })
    }

    pub fn eval(&self, n: &FieldElement) -> Result<Complex64> {
        if !n.is_integral() {
            return Err(Error::Precondition(format!("{n} is not integral")));
        }
        let v = n
            .to_i128()
            .ok_or_else(|| Error::Precondition("coordinates exceed 128 bits".into()))?;
        self.eval_int(&v)
    }

    /// Values on the box `[-N, N]^D` in row-major order.
    pub fn box_values(&self, n: i64) -> Result<Vec<Complex64>> {
        let d = self.field.degree();
        let side = (2 * n + 1) as usize;
        let total = side
            .checked_pow(d as u32)
            .ok_or_else(|| Error::Precondition("box too large".into()))?;
        (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut c = vec![0i128; d];
                let mut r = idx;
                for x in c.iter_mut().rev() {
                    *x = (r % side) as i128 - n as i128;
                    r /= side;
                }
                self.eval_int(&c)
            })
            .collect()
    }
}

fn big(v: &[i128]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn int_coords(field: &Field, c: &[i64]) -> Result<Vec<i128>> {
    if c.len() != field.degree() {
        return Err(Error::ShapeMismatch(format!("{} coordinates for degree {}", c.len(), field.degree())));
    }
    Ok(c.iter().map(|&x| x as i128).collect())
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * a as u128) % p as u128) as u64;
        }
        a = ((a as u128 * a as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

fn random_phase(seed: u64, key: &(u64, Vec<Vec<BigInt>>)) -> Complex64 {
    let mut h = seed ^ key.0.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    for row in &key.1 {
        for x in row {
            let v = x.to_i64().unwrap_or(i64::MAX) as u64;
            h = h.rotate_left(17) ^ v.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        }
    }
    let u: f64 = ChaCha8Rng::seed_from_u64(h).gen();
    crate::grid::e(u)
}

/// `χ∘ι` on `{1..N}^D` inside Z_Ñ^D, zero elsewhere.
pub fn truncate(chi: &MultFnSpec, n: usize, n_tilde: usize) -> Result<GridFn> {
    if n_tilde <= n {
        return Err(Error::BadWindow(format!("Ñ = {n_tilde} must exceed N = {n}")));
    }
    let d = chi.field.degree();
    let total = n
        .checked_pow(d as u32)
        .ok_or_else(|| Error::Precondition("window too large".into()))?;
    let vals: Vec<Complex64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut c = vec![0i128; d];
            let mut r = idx;
            for x in c.iter_mut().rev() {
                *x = (r % n) as i128 + 1;
                r /= n;
            }
            chi.eval_int(&c)
        })
        .collect::<Result<_>>()?;
    let mut g = GridFn::zeros(d, n_tilde)?;
    let mut c = vec![0i64; d];
    for (idx, v) in vals.into_iter().enumerate() {
        let mut r = idx;
        for x in c.iter_mut().rev() {
            *x = (r % n) as i64 + 1;
            r /= n;
        }
        g.set(&c, v);
    }
    Ok(g)
}

/// Most progressions in a default catalog.
pub const CATALOG_CAP: usize = 100_000;

/// Progressions with steps `1..=8` on every axis and base points on an evenly spaced
/// sub-grid of `[-N, N]^D`, each running to the edge of the box; in one dimension also the
/// half and quarter lengths. At most [`CATALOG_CAP`] entries.
pub fn default_catalog(dim: usize, n: i64) -> Vec<APSpec> {
    let side = 2 * n + 1;
    let step_vectors = 8usize.pow(dim as u32);
    let per_axis = if dim == 1 {
        64.min(side as usize)
    } else {
        let budget = (CATALOG_CAP / step_vectors).max(1) as f64;
        (budget.powf(1.0 / dim as f64).floor() as usize).clamp(1, 8).min(side as usize)
    };
    let bases_1d: Vec<i64> = (0..per_axis).map(|k| -n + (k as i64 * side) / per_axis as i64).collect();
    let mut out = Vec::new();
    for sv in 0..step_vectors {
        let steps: Vec<i64> = (0..dim).map(|i| (sv / 8usize.pow(i as u32) % 8) as i64 + 1).collect();
        let nb = per_axis.pow(dim as u32);
        for bv in 0..nb {
            let base: Vec<i64> = (0..dim).map(|i| bases_1d[bv / per_axis.pow(i as u32) % per_axis]).collect();
            let lengths: Vec<u64> = base.iter().zip(&steps).map(|(&b, &s)| ((n - b) / s + 1) as u64).collect();
            if dim == 1 {
                let l = lengths[0];
                let mut ls = vec![l, l.div_ceil(2), l.div_ceil(4)];
                ls.dedup();
                for l in ls {
                    out.push(APSpec { base: base.clone(), steps: steps.clone(), lengths: vec![l] });
                }
            } else {
                out.push(APSpec { base, steps: steps.clone(), lengths });
            }
            if out.len() >= CATALOG_CAP {
                out.truncate(CATALOG_CAP);
                return out;
            }
        }
    }
    out
}

/// `max_P |(2N+1)^{-D} Σ_{n ∈ [-N,N]^D} 1_P(n) χ(ι(n))|` over a catalog of progressions.
pub fn aperiodicity_stat(chi: &MultFnSpec, n: i64, catalog: &[APSpec]) -> Result<f64> {
    let values = chi.box_values(n)?;
    aperiodicity_from_values(&values, chi.field.degree(), n, catalog)
}

/// [`aperiodicity_stat`] on precomputed box values.
pub fn aperiodicity_from_values(values: &[Complex64], dim: usize, n: i64, catalog: &[APSpec]) -> Result<f64> {
    if catalog.is_empty() {
        return Err(Error::Precondition("catalog is empty".into()));
    }
    let side = (2 * n + 1) as usize;
    for ap in catalog {
        if ap.dim() != dim || ap.steps.len() != dim || ap.lengths.len() != dim {
            return Err(Error::ShapeMismatch("progression dimension differs from the field degree".into()));
        }
        if !ap.inside(-n, n) {
            return Err(Error::Precondition(format!("progression {ap:?} leaves the box")));
        }
    }
    let volume = (side as f64).powi(dim as i32);
    // In one dimension, prefix sums along each step answer a progression in O(1).
    let prefix: HashMap<i64, Vec<Complex64>> = if dim == 1 {
        let mut steps: Vec<i64> = catalog.iter().map(|ap| ap.steps[0].abs()).filter(|&s| s > 0 && s <= 64).collect();
        steps.sort_unstable();
        steps.dedup();
        steps
            .into_iter()
            .map(|s| {
                let s_us = s as usize;
                let mut p = values.to_vec();
                for i in s_us..p.len() {
                    let prev = p[i - s_us];
                    p[i] += prev;
                }
                (s, p)
            })
            .collect()
    } else {
        HashMap::new()
    };
    let sums: Vec<f64> = catalog
        .par_iter()
        .map(|ap| {
            let total = if dim == 1 && prefix.contains_key(&ap.steps[0].abs()) && ap.lengths[0] > 0 {
                let s = ap.steps[0];
                let end = ap.base[0] + s * (ap.lengths[0] as i64 - 1);
                let (lo, hi) = if s > 0 { (ap.base[0], end) } else { (end, ap.base[0]) };
                let p = &prefix[&s.abs()];
                let hi_i = (hi + n) as usize;
                let lo_i = (lo + n) as usize;
                let below = if lo_i >= s.unsigned_abs() as usize { p[lo_i - s.unsigned_abs() as usize] } else { Complex64::new(0.0, 0.0) };
                p[hi_i] - below
            } else {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut seen = std::collections::HashSet::new();
                ap.for_each(|pt| {
                    let idx = pt.iter().fold(0usize, |a, &x| a * side + (x + n) as usize);
                    if seen.insert(idx) {
                        acc += values[idx];
                    }
                });
                acc
            };
            total.norm() / volume
        })
        .collect();
    Ok(sums.into_iter().fold(0.0, f64::max))
}

/// One-sided progression averages `max |(1/N) Σ_{m<N} f(am+b)|` over `1 ≤ |a| ≤ max_step`
/// and `0 ≤ b < |a|`.
pub fn ap1_stat(f: &(dyn Fn(i64) -> Complex64 + Sync), n: usize, max_step: i64) -> f64 {
    let mut best = 0.0f64;
    for a in (-max_step..=max_step).filter(|&a| a != 0) {
        for b in 0..a.abs() {
            let s = (0..n as i64).fold(Complex64::new(0.0, 0.0), |acc, m| acc + f(a * m + b));
            best = best.max(s.norm() / n as f64);
        }
    }
    best
}

/// Supremum over all progressions `P_{a,b,L}` with `1 ≤ |a| ≤ max_step` of
/// `|(2N+1)^{-1} Σ_{|n| ≤ N} 1_P(n) f(n)|`, given `values[n + N] = f(n)`.
///
/// A progression meets `[-N, N]` in a run of consecutive terms of one residue class, so the
/// supremum is the largest difference of partial sums along the class. For complex values
/// the modulus is approached through 256 projection directions, giving a lower bound within
/// a factor `cos(π/256)`.
pub fn ap2_stat(values: &[Complex64], max_step: usize) -> f64 {
    let len = values.len();
    let real = values.iter().all(|v| v.im == 0.0);
    let dirs: Vec<Complex64> = if real {
        vec![Complex64::new(1.0, 0.0)]
    } else {
        (0..256).map(|k| crate::grid::e(k as f64 / 256.0).conj()).collect()
    };
    let mut best = 0.0f64;
    for a in 1..=max_step {
        for r in 0..a.min(len) {
            for dir in &dirs {
                let (mut s, mut lo, mut hi) = (0.0f64, 0.0f64, 0.0f64);
                let mut i = r;
                while i < len {
                    s += (values[i] * dir).re;
                    lo = lo.min(s);
                    hi = hi.max(s);
                    i += a;
                }
                best = best.max(hi - lo);
            }
        }
    }
    best / len as f64
}
