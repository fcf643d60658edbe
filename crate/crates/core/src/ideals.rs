//! Ideals of the ring of integers as integer lattices, prime decomposition of rational
//! primes, valuations, the Möbius and Liouville functions, and box densities.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_prime::nt_funcs::{factorize128, is_prime64};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::Q;
use crate::fp::{self, FpPoly};
use crate::lattice::Hnf;
use crate::numfield::{Field, FieldElement};

/// Nonzero ideal of O_K as the Z-lattice of its coordinate vectors.
#[derive(Clone, Debug)]
pub struct IdealLattice {
    field: Field,
    hnf: Hnf,
}

impl PartialEq for IdealLattice {
    fn eq(&self, other: &Self) -> bool {
        self.hnf == other.hnf && *self.field == *other.field
    }
}

impl IdealLattice {
    /// The whole ring O_K.
    pub fn unit(field: &Field) -> Self {
        IdealLattice {
            field: field.clone(),
            hnf: Hnf::identity(field.degree()),
        }
    }

    /// Ideal generated by integral elements: the Z-span of every `g b_i`.
    pub fn from_generators(field: &Field, gens: &[Vec<i128>]) -> Result<Self> {
        let d = field.degree();
        let mut rows = Vec::with_capacity(gens.len() * d);
        for g in gens {
            if g.len() != d {
                return Err(Error::ShapeMismatch(format!("generator needs {d} coordinates")));
            }
            for i in 0..d {
                let mut e = vec![0i128; d];
                e[i] = 1;
                rows.push(field.mul_int(g, &e).into_iter().map(BigInt::from).collect());
            }
        }
        Ok(IdealLattice {
            field: field.clone(),
            hnf: Hnf::from_generators(d, &rows)?,
        })
    }

    /// Principal ideal `(x)` of a nonzero integral element.
    pub fn principal(x: &FieldElement) -> Result<Self> {
        let v = integral_coords(x)?;
        if v.iter().all(|c| *c == 0) {
            return Err(Error::Precondition("the zero ideal is not a lattice".into()));
        }
        Self::from_generators(x.field(), &[v])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn hnf(&self) -> &Hnf {
        &self.hnf
    }

    /// Index `[O_K : I]`.
    pub fn norm(&self) -> BigInt {
        self.hnf.index()
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        match x.to_i128() {
            Some(v) => self.hnf.contains(&v.into_iter().map(BigInt::from).collect::<Vec<_>>()),
            None => false,
        }
    }

    pub fn contains_int(&self, v: &[i128]) -> bool {
        self.hnf.contains(&v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
    }

    /// Whether multiplying every row by every basis element stays inside the lattice.
    pub fn is_ideal(&self) -> bool {
        let d = self.field.degree();
        let Some(rows) = self.hnf.rows_i64() else {
            return self.big_closure();
        };
        rows.iter().all(|r| {
            let r: Vec<i128> = r.iter().map(|&x| x as i128).collect();
            (0..d).all(|i| {
                let mut e = vec![0i128; d];
                e[i] = 1;
                self.contains_int(&self.field.mul_int(&r, &e))
            })
        })
    }

    fn big_closure(&self) -> bool {
        let d = self.field.degree();
        self.hnf.rows().iter().all(|r| {
            (0..d).all(|i| {
                let prod: Vec<BigInt> = (0..d)
                    .map(|k| (0..d).map(|j| &r[j] * BigInt::from(self.field.c(j, i, k))).sum())
                    .collect();
                self.hnf.contains(&prod)
            })
        })
    }

    /// Product ideal: the Z-span of pairwise products of basis rows.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let d = self.field.degree();
        let mut gens = Vec::with_capacity(d * d);
        for a in self.hnf.rows() {
            for b in other.hnf.rows() {
                let mut out = vec![BigInt::zero(); d];
                for i in 0..d {
                    if a[i].is_zero() {
                        continue;
                    }
                    for j in 0..d {
                        if b[j].is_zero() {
                            continue;
                        }
                        let ab = &a[i] * &b[j];
                        for (k, o) in out.iter_mut().enumerate() {
                            let c = self.field.c(i, j, k);
                            if c != 0 {
                                *o += &ab * BigInt::from(c);
                            }
                        }
                    }
                }
                gens.push(out);
            }
        }
        Ok(IdealLattice {
            field: self.field.clone(),
            hnf: Hnf::from_generators(d, &gens)?,
        })
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::unit(&self.field);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

/// Prime ideal `(p, g(θ))` above a rational prime.
#[derive(Clone, Debug)]
pub struct PrimeIdeal {
    pub lattice: IdealLattice,
    pub p: u64,
    /// Ramification index.
    pub e: u32,
    /// Residue degree.
    pub f: u32,
    /// Monic irreducible factor of the defining polynomial mod p.
    pub residue_factor: FpPoly,
    /// Coordinates of `(f/g)(θ)` lifted to O_K; dividing by p gives an element of
    /// valuation -1 at this prime and nonnegative valuation elsewhere.
    anti: Vec<i128>,
}

impl PartialEq for PrimeIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice
    }
}

impl PrimeIdeal {
    pub fn norm(&self) -> BigInt {
        self.lattice.norm()
    }

    /// Membership of an integral power-basis vector: `n(t)` is divisible by the residue
    /// factor mod p.
    pub fn contains_int(&self, n: &[i128]) -> bool {
        let nbar = fp::from_i128(n, self.p);
        fp::divrem(&nbar, &self.residue_factor, self.p).1.is_empty()
    }

    /// Valuation of a nonzero integral element: the largest k with `n (a/p)^k` integral.
    pub fn valuation_int(&self, field: &Field, n: &[i128]) -> Result<u32> {
        if n.iter().all(|&x| x == 0) {
            return Err(Error::UndefinedValuation);
        }
        let p = self.p as i128;
        let mut m = n.to_vec();
        let mut k = 0;
        loop {
            let next = field.mul_int(&m, &self.anti);
            if next.iter().all(|x| x % p == 0) {
                m = next.into_iter().map(|x| x / p).collect();
                k += 1;
            } else {
                return Ok(k);
            }
        }
    }
}

fn integral_coords(x: &FieldElement) -> Result<Vec<i128>> {
    if !x.is_integral() {
        return Err(Error::Precondition(format!("{x} is not integral")));
    }
    x.to_i128()
        .ok_or_else(|| Error::Precondition(format!("{x} has coordinates beyond 128 bits")))
}

/// Integer polynomial product, ascending coefficients.
fn zmul(a: &[i128], b: &[i128]) -> Vec<i128> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Remainder of an integer polynomial modulo a monic integer polynomial.
fn zrem_monic(a: &[i128], f: &[i64]) -> Vec<i128> {
    let d = f.len() - 1;
    let mut r = a.to_vec();
    while r.len() > d {
        let top = r.pop().unwrap();
        let shift = r.len() - d;
        for k in 0..d {
            r[shift + k] -= top * f[k] as i128;
        }
    }
    r.resize(d, 0);
    r
}

fn lift(f: &FpPoly) -> Vec<i128> {
    f.iter().map(|&c| c as i128).collect()
}

/// Prime ideals above `p` with ramification indices and residue degrees.
///
/// Needs a defining polynomial and `p` coprime to the index of `Z[θ]`, the latter decided
/// by Dedekind's criterion.
pub fn primes_above(field: &Field, p: u64) -> Result<Vec<PrimeIdeal>> {
    let Some(fpoly) = field.defining_poly() else {
        return Err(Error::UnsupportedPrime {
            p,
            reason: "field has no defining polynomial, so Kummer-Dedekind factorization does not apply".into(),
        });
    };
    if !is_prime64(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let d = field.degree();
    let fbar = fp::from_i64(fpoly, p);
    let factors = fp::factor(&fbar, p);

    // Dedekind's criterion: with g the product of the distinct factors and h = f/g mod p,
    // F = (f - g h)/p; Z[θ] is p-maximal iff gcd(F, g, h) = 1 mod p.
    let mut gbar: FpPoly = vec![1];
    for (g, _) in &factors {
        gbar = fp::mul(&gbar, g, p);
    }
    let hbar = fp::divrem(&fbar, &gbar, p).0;
    let gh = zmul(&lift(&gbar), &lift(&hbar));
    let f128: Vec<i128> = fpoly.iter().map(|&c| c as i128).collect();
    let len = f128.len().max(gh.len());
    let diff: Vec<i128> = (0..len)
        .map(|i| f128.get(i).copied().unwrap_or(0) - gh.get(i).copied().unwrap_or(0))
        .collect();
    debug_assert!(diff.iter().all(|c| c % p as i128 == 0));
    let big_f = fp::from_i128(&diff.iter().map(|c| c / p as i128).collect::<Vec<_>>(), p);
    let common = fp::gcd(&fp::gcd(&big_f, &gbar, p), &hbar, p);
    if fp::degree(&common).unwrap_or(0) > 0 {
        return Err(Error::UnsupportedPrime {
            p,
            reason: "p divides the index of Z[theta] in the ring of integers".into(),
        });
    }

    let mut out = Vec::with_capacity(factors.len());
    for (g, e) in &factors {
        let gen = zrem_monic(&lift(g), fpoly);
        let mut pv = vec![0i128; d];
        pv[0] = p as i128;
        let lattice = IdealLattice::from_generators(field, &[pv, gen])?;
        let cof = fp::divrem(&fbar, g, p).0;
        let anti = zrem_monic(&lift(&cof), fpoly);
        out.push(PrimeIdeal {
            lattice,
            p,
            e: *e,
            f: fp::degree(g).unwrap() as u32,
            residue_factor: g.clone(),
            anti,
        });
    }
    out.sort_by(|a, b| a.norm().cmp(&b.norm()).then_with(|| a.lattice.hnf.rows().cmp(b.lattice.hnf.rows())));
    Ok(out)
}

/// Valuation of a nonzero integral element at a prime ideal, by lattice powers.
pub fn valuation(n: &FieldElement, prime: &IdealLattice) -> Result<u32> {
    let v = integral_coords(n)?;
    if v.iter().all(|&c| c == 0) {
        return Err(Error::UndefinedValuation);
    }
    let mut power = prime.clone();
    let mut k = 0;
    while power.contains_int(&v) {
        k += 1;
        power = power.mul(prime)?;
    }
    Ok(k)
}

/// Prime decompositions cached per rational prime.
pub struct PrimeCache {
    field: Field,
    primes: RwLock<HashMap<u64, std::result::Result<Arc<Vec<PrimeIdeal>>, Error>>>,
}

impl PrimeCache {
    pub fn new(field: &Field) -> Self {
        PrimeCache {
            field: field.clone(),
            primes: RwLock::new(HashMap::new()),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn above(&self, p: u64) -> Result<Arc<Vec<PrimeIdeal>>> {
        if let Some(r) = self.primes.read().unwrap().get(&p) {
            return r.clone();
        }
        let r = primes_above(&self.field, p).map(Arc::new);
        self.primes.write().unwrap().insert(p, r.clone());
        r
    }

    /// Rational prime factorization of `|N(n)|`.
    fn norm_factors(&self, n: &[i128]) -> Result<Vec<(u64, u32)>> {
        let norm = self.field.norm_int(n);
        if norm == 0 {
            return Err(Error::UndefinedValuation);
        }
        factorize128(norm.unsigned_abs())
            .into_iter()
            .map(|(p, v)| {
                let p = p
                    .to_u64()
                    .ok_or_else(|| Error::Precondition(format!("prime factor {p} exceeds 64 bits")))?;
                Ok((p, v as u32))
            })
            .collect()
    }

    /// Prime ideal factorization `(n) = prod P^v` of a nonzero integral element.
    pub fn factorization(&self, n: &[i128]) -> Result<Vec<(PrimeIdeal, u32)>> {
        let mut out = Vec::new();
        for (p, _) in self.norm_factors(n)? {
            for prime in self.above(p)?.iter() {
                let v = prime.valuation_int(&self.field, n)?;
                if v > 0 {
                    out.push((prime.clone(), v));
                }
            }
        }
        Ok(out)
    }

    /// Möbius function of the principal ideal `(n)`.
    ///
    /// Above each p dividing the norm, the set S of primes containing n is found by
    /// membership. n is squarefree at p exactly when the residue degrees over S add up to
    /// the exponent of p in the norm.
    pub fn mobius_int(&self, n: &[i128]) -> Result<i8> {
        let mut count = 0u32;
        for (p, v) in self.norm_factors(n)? {
            let primes = self.above(p)?;
            let mut fsum = 0;
            for prime in primes.iter() {
                if prime.contains_int(n) {
                    fsum += prime.f;
                    count += 1;
                }
            }
            if fsum < v {
                return Ok(0);
            }
        }
        Ok(if count % 2 == 0 { 1 } else { -1 })
    }

    /// Liouville function `(-1)^Ω` with Ω the number of prime ideal factors with multiplicity.
    pub fn liouville_int(&self, n: &[i128]) -> Result<i8> {
        let omega: u32 = self.factorization(n)?.iter().map(|(_, v)| v).sum();
        Ok(if omega % 2 == 0 { 1 } else { -1 })
    }

    pub fn mobius(&self, n: &FieldElement) -> Result<i8> {
        self.mobius_int(&integral_coords(n)?)
    }

    pub fn liouville(&self, n: &FieldElement) -> Result<i8> {
        self.liouville_int(&integral_coords(n)?)
    }
}

/// Möbius function of `(n)` without a shared cache.
pub fn mobius_k(n: &FieldElement) -> Result<i8> {
    PrimeCache::new(n.field()).mobius(n)
}

/// Liouville function of `(n)` without a shared cache.
pub fn liouville_k(n: &FieldElement) -> Result<i8> {
    PrimeCache::new(n.field()).liouville(n)
}

/// Fraction `|I ∩ [-N, N]^D| / (2N+1)^D` of box points lying in the ideal.
pub fn density_estimate(ideal: &IdealLattice, n: u64) -> Result<Q> {
    if n == 0 {
        return Err(Error::Precondition("box radius must be at least 1".into()));
    }
    let count = ideal.hnf.count_in_box(n as i64);
    let side = BigInt::from(2 * n + 1);
    Ok(Q::new(BigInt::from(count), side.pow(ideal.field.degree() as u32)))
}
