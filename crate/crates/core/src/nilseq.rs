//! Polynomial sequences in binomial and monomial coordinates, smooth norms, horizontal
//! character search, progression witnesses, and the Heisenberg nilmanifold model.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{q, q_to_f64, Q};
use crate::grid::{e, APSpec};

/// Scalars a polynomial sequence or Heisenberg element can carry.
pub trait Coef:
    Clone + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn int(n: i64) -> Self;
    fn from_q(x: &Q) -> Self;
    fn floor(&self) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coef for f64 {
    fn int(n: i64) -> Self {
        n as f64
    }
    fn from_q(x: &Q) -> Self {
        q_to_f64(x)
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coef for Q {
    fn int(n: i64) -> Self {
        q(n)
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn floor(&self) -> Self {
        Q::floor(self)
    }
    fn to_f64(&self) -> f64 {
        q_to_f64(self)
    }
}

/// `‖x‖_T`, distance to the nearest integer.
pub fn torus_norm(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Exact `‖x‖_T`.
pub fn torus_norm_q(x: &Q) -> Q {
    let f = x - x.floor();
    let g = q(1) - &f;
    if f < g {
        f
    } else {
        g
    }
}

/// Multi-indices `j ∈ N^D` with `|j| ≤ k`, by total degree and then lexicographically.
pub fn multi_indices(dim: usize, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=k {
        let mut cur = vec![0u32; dim];
        compositions(dim, total, 0, &mut cur, &mut out);
    }
    out
}

fn compositions(dim: usize, left: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == dim {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        compositions(dim, left - v, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// Coefficient of `n^i` in `C(n, j)`, exactly: `s(j, i)/j!` with `s` the signed Stirling
/// numbers of the first kind.
fn binom_to_mono_1d(k: u32) -> Vec<Vec<Q>> {
    let k = k as usize;
    // poly[j] = n(n-1)...(n-j+1) in ascending coefficients.
    let mut out = vec![vec![q(0); k + 1]; k + 1];
    let mut poly = vec![q(1)];
    let mut fact = q(1);
    for j in 0..=k {
        for (i, c) in poly.iter().enumerate() {
            out[j][i] = c / &fact;
        }
        // multiply by (n - j)
        let mut next = vec![q(0); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] = &next[i + 1] + c;
            next[i] = &next[i] - c * q(j as i64);
        }
        poly = next;
        fact = fact * q(j as i64 + 1);
    }
    out
}

/// Inverse of [`binom_to_mono_1d`]: `n^i = Σ_j S(i, j) j! C(n, j)`.
fn mono_to_binom_1d(k: u32) -> Vec<Vec<Q>> {
    let k = k as usize;
    // Stirling numbers of the second kind.
    let mut s = vec![vec![BigInt::zero(); k + 1]; k + 1];
    s[0][0] = BigInt::one();
    for i in 1..=k {
        for j in 1..=i {
            s[i][j] = BigInt::from(j) * &s[i - 1][j] + &s[i - 1][j - 1];
        }
    }
    let mut out = vec![vec![q(0); k + 1]; k + 1];
    for i in 0..=k {
        let mut fact = BigInt::one();
        for j in 0..=k {
            if j > 0 {
                fact *= j;
            }
            out[i][j] = Q::from_integer(&s[i][j] * &fact);
        }
    }
    out
}

/// Change of basis between multi-index families using a per-axis table.
fn convert<T: Coef>(indices: &[Vec<u32>], lookup: &HashMap<Vec<u32>, usize>, table: &[Vec<Q>], coeffs: &[Vec<T>]) -> Vec<Vec<T>> {
    let out_dim = coeffs.first().map_or(0, |c| c.len());
    let mut out = vec![vec![T::int(0); out_dim]; indices.len()];
    for (src, c) in indices.iter().zip(coeffs) {
        if c.iter().all(|x| *x == T::int(0)) {
            continue;
        }
        // every target index i with i_t ≤ j_t on each axis
        let mut tgt = vec![0u32; src.len()];
        loop {
            let f = src
                .iter()
                .zip(&tgt)
                .fold(q(1), |acc, (&j, &i)| acc * &table[j as usize][i as usize]);
            if !f.is_zero() {
                let fc = T::from_q(&f);
                let idx = lookup[&tgt];
                for (o, x) in out[idx].iter_mut().zip(c) {
                    *o = o.clone() + fc.clone() * x.clone();
                }
            }
            if !advance(&mut tgt, src) {
                break;
            }
        }
    }
    out
}

/// Odometer step over `0 ≤ a ≤ bound` componentwise; false once every vector was visited.
fn advance(a: &mut [u32], bound: &[u32]) -> bool {
    for axis in (0..a.len()).rev() {
        if a[axis] < bound[axis] {
            a[axis] += 1;
            return true;
        }
        a[axis] = 0;
    }
    false
}

/// Which coefficient family a smooth norm reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Flavor {
    Binomial,
    Monomial,
}

/// Polynomial map `Z^D → R^s` of degree at most k.
#[derive(Clone, Debug)]
pub struct PolySeq {
    dim: usize,
    out: usize,
    degree: u32,
    indices: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
    binomial: Vec<Vec<f64>>,
    monomial: Vec<Vec<f64>>,
    exact: Option<(Vec<Vec<Q>>, Vec<Vec<Q>>)>,
}

impl PolySeq {
    fn shell(dim: usize, out: usize, degree: u32) -> Result<(Vec<Vec<u32>>, HashMap<Vec<u32>, usize>)> {
        if dim == 0 || out == 0 {
            return Err(Error::Precondition("input and output dimensions must be positive".into()));
        }
        let indices = multi_indices(dim, degree);
        let lookup = indices.iter().cloned().enumerate().map(|(i, j)| (j, i)).collect();
        Ok((indices, lookup))
    }

    fn fill<T: Coef>(
        indices: &[Vec<u32>],
        lookup: &HashMap<Vec<u32>, usize>,
        out: usize,
        degree: u32,
        terms: &[(Vec<u32>, Vec<T>)],
    ) -> Result<Vec<Vec<T>>> {
        let mut c = vec![vec![T::int(0); out]; indices.len()];
        for (j, v) in terms {
            let &idx = lookup.get(j).ok_or_else(|| {
                Error::ShapeMismatch(format!("multi-index {j:?} outside degree {degree} in dimension {}", indices[0].len()))
            })?;
            if v.len() != out {
                return Err(Error::ShapeMismatch(format!("coefficient of length {} for output dimension {out}", v.len())));
            }
            for (a, b) in c[idx].iter_mut().zip(v) {
                *a = a.clone() + b.clone();
            }
        }
        Ok(c)
    }

    /// Float sequence from binomial coefficients `g(n) = Σ α_j C(n, j)`.
    pub fn from_binomial(dim: usize, out: usize, degree: u32, terms: &[(Vec<u32>, Vec<f64>)]) -> Result<Self> {
        let (indices, lookup) = Self::shell(dim, out, degree)?;
        let binomial = Self::fill(&indices, &lookup, out, degree, terms)?;
        let monomial = convert(&indices, &lookup, &binom_to_mono_1d(degree), &binomial);
        Ok(PolySeq { dim, out, degree, indices, lookup, binomial, monomial, exact: None })
    }

    /// Float sequence from monomial coefficients `g(n) = Σ α'_j n^j`.
    pub fn from_monomial(dim: usize, out: usize, degree: u32, terms: &[(Vec<u32>, Vec<f64>)]) -> Result<Self> {
        let (indices, lookup) = Self::shell(dim, out, degree)?;
        let monomial = Self::fill(&indices, &lookup, out, degree, terms)?;
        let binomial = convert(&indices, &lookup, &mono_to_binom_1d(degree), &monomial);
        Ok(PolySeq { dim, out, degree, indices, lookup, binomial, monomial, exact: None })
    }

    /// Exact sequence from rational binomial coefficients.
    pub fn from_binomial_exact(dim: usize, out: usize, degree: u32, terms: &[(Vec<u32>, Vec<Q>)]) -> Result<Self> {
        let (indices, lookup) = Self::shell(dim, out, degree)?;
        let b = Self::fill(&indices, &lookup, out, degree, terms)?;
        let m = convert(&indices, &lookup, &binom_to_mono_1d(degree), &b);
        Ok(Self::with_exact(dim, out, degree, indices, lookup, b, m))
    }

    /// Exact sequence from rational monomial coefficients.
    pub fn from_monomial_exact(dim: usize, out: usize, degree: u32, terms: &[(Vec<u32>, Vec<Q>)]) -> Result<Self> {
        let (indices, lookup) = Self::shell(dim, out, degree)?;
        let m = Self::fill(&indices, &lookup, out, degree, terms)?;
        let b = convert(&indices, &lookup, &mono_to_binom_1d(degree), &m);
        Ok(Self::with_exact(dim, out, degree, indices, lookup, b, m))
    }

    fn with_exact(
        dim: usize,
        out: usize,
        degree: u32,
        indices: Vec<Vec<u32>>,
        lookup: HashMap<Vec<u32>, usize>,
        b: Vec<Vec<Q>>,
        m: Vec<Vec<Q>>,
    ) -> Self {
        let tf = |v: &Vec<Vec<Q>>| v.iter().map(|r| r.iter().map(q_to_f64).collect()).collect();
        PolySeq {
            dim,
            out,
            degree,
            binomial: tf(&b),
            monomial: tf(&m),
            indices,
            lookup,
            exact: Some((b, m)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn out_dim(&self) -> usize {
        self.out
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn binomial(&self) -> &[Vec<f64>] {
        &self.binomial
    }

    pub fn monomial(&self) -> &[Vec<f64>] {
        &self.monomial
    }

    pub fn binomial_exact(&self) -> Option<&[Vec<Q>]> {
        self.exact.as_ref().map(|(b, _)| b.as_slice())
    }

    pub fn monomial_exact(&self) -> Option<&[Vec<Q>]> {
        self.exact.as_ref().map(|(_, m)| m.as_slice())
    }

    /// Coefficient `α_j` (binomial basis).
    pub fn coefficient(&self, j: &[u32]) -> Option<&[f64]> {
        self.lookup.get(j).map(|&i| self.binomial[i].as_slice())
    }

    /// `g(n)` in floating point from the binomial coefficients.
    pub fn eval(&self, n: &[i64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out];
        for (j, c) in self.indices.iter().zip(&self.binomial) {
            let b: f64 = j.iter().zip(n).map(|(&jt, &nt)| binom_f64(nt, jt)).product();
            if b != 0.0 {
                for (o, x) in out.iter_mut().zip(c) {
                    *o += x * b;
                }
            }
        }
        out
    }

    /// `g(n)` exactly, when the sequence carries rational coefficients.
    pub fn eval_exact(&self, n: &[i64]) -> Option<Vec<Q>> {
        let (b, _) = self.exact.as_ref()?;
        let mut out = vec![q(0); self.out];
        for (j, c) in self.indices.iter().zip(b) {
            let f: Q = j.iter().zip(n).fold(q(1), |acc, (&jt, &nt)| acc * binom_q(nt, jt));
            if !f.is_zero() {
                for (o, x) in out.iter_mut().zip(c) {
                    *o = &*o + x * &f;
                }
            }
        }
        Some(out)
    }

    /// `∂_h g(n) = g(n + h) − g(n)`, of degree at most k − 1.
    pub fn derivative(&self, h: &[i64]) -> Result<Self> {
        if h.len() != self.dim {
            return Err(Error::ShapeMismatch("shift dimension differs from the input dimension".into()));
        }
        if let Some((_, m)) = &self.exact {
            let shifted = shift_monomial(&self.indices, &self.lookup, m, h);
            let diff: Vec<(Vec<u32>, Vec<Q>)> = self
                .indices
                .iter()
                .zip(shifted.iter().zip(m))
                .map(|(j, (a, b))| (j.clone(), a.iter().zip(b).map(|(x, y)| x - y).collect()))
                .collect();
            Self::from_monomial_exact(self.dim, self.out, self.degree, &diff)
        } else {
            let shifted = shift_monomial(&self.indices, &self.lookup, &self.monomial, h);
            let diff: Vec<(Vec<u32>, Vec<f64>)> = self
                .indices
                .iter()
                .zip(shifted.iter().zip(&self.monomial))
                .map(|(j, (a, b))| (j.clone(), a.iter().zip(b).map(|(x, y)| x - y).collect()))
                .collect();
            Self::from_monomial(self.dim, self.out, self.degree, &diff)
        }
    }

    /// Largest `|j|` with a nonzero coefficient (exactly zero in rational mode).
    pub fn effective_degree(&self) -> Option<u32> {
        let nonzero: Vec<bool> = match &self.exact {
            Some((b, _)) => b.iter().map(|c| c.iter().any(|x| !x.is_zero())).collect(),
            None => self.binomial.iter().map(|c| c.iter().any(|&x| x != 0.0)).collect(),
        };
        self.indices
            .iter()
            .zip(nonzero)
            .filter(|(_, nz)| *nz)
            .map(|(j, _)| j.iter().sum())
            .max()
    }

    /// `ℓ·g`, a scalar sequence.
    pub fn apply_char(&self, chi: &HorizChar) -> Result<Self> {
        if chi.ell.len() != self.out {
            return Err(Error::ShapeMismatch(format!(
                "character of length {} for output dimension {}",
                chi.ell.len(),
                self.out
            )));
        }
        if let Some((b, _)) = &self.exact {
            let terms: Vec<(Vec<u32>, Vec<Q>)> = self
                .indices
                .iter()
                .zip(b)
                .map(|(j, c)| (j.clone(), vec![c.iter().zip(&chi.ell).fold(q(0), |acc, (x, &l)| acc + x * q(l))]))
                .collect();
            Self::from_binomial_exact(self.dim, 1, self.degree, &terms)
        } else {
            let terms: Vec<(Vec<u32>, Vec<f64>)> = self
                .indices
                .iter()
                .zip(&self.binomial)
                .map(|(j, c)| (j.clone(), vec![c.iter().zip(&chi.ell).map(|(x, &l)| x * l as f64).sum()]))
                .collect();
            Self::from_binomial(self.dim, 1, self.degree, &terms)
        }
    }
}

fn shift_monomial<T: Coef>(indices: &[Vec<u32>], lookup: &HashMap<Vec<u32>, usize>, m: &[Vec<T>], h: &[i64]) -> Vec<Vec<T>> {
    let out_dim = m.first().map_or(0, |c| c.len());
    let mut out = vec![vec![T::int(0); out_dim]; indices.len()];
    for (i, c) in indices.iter().zip(m) {
        // (n + h)^i = Π_t Σ_{a ≤ i_t} C(i_t, a) h_t^{i_t − a} n_t^a
        let mut a = vec![0u32; i.len()];
        loop {
            let f = i.iter().zip(&a).zip(h).fold(q(1), |acc, ((&it, &at), &ht)| {
                acc * binom_q(it as i64, at) * Q::from_integer(BigInt::from(ht).pow(it - at))
            });
            if !f.is_zero() {
                let fc = T::from_q(&f);
                let idx = lookup[&a];
                for (o, x) in out[idx].iter_mut().zip(c) {
                    *o = o.clone() + fc.clone() * x.clone();
                }
            }
            if !advance(&mut a, i) {
                break;
            }
        }
    }
    out
}

/// `C(n, j)` for any integer n.
fn binom_q(n: i64, j: u32) -> Q {
    let mut r = q(1);
    for t in 0..j as i64 {
        r = r * q(n - t) / q(t + 1);
    }
    r
}

fn binom_f64(n: i64, j: u32) -> f64 {
    let mut r = 1.0;
    for t in 0..j as i64 {
        r = r * (n - t) as f64 / (t + 1) as f64;
    }
    r
}

/// `max_{j≠0} (2N+1)^{|j|} ‖α_j‖_{T^s}` with the coordinate sup metric on `T^s`.
pub fn smooth_norm(g: &PolySeq, n: u64, flavor: Flavor) -> f64 {
    let scale = (2 * n + 1) as f64;
    let exact = match flavor {
        Flavor::Binomial => g.binomial_exact(),
        Flavor::Monomial => g.monomial_exact(),
    };
    let float = match flavor {
        Flavor::Binomial => g.binomial(),
        Flavor::Monomial => g.monomial(),
    };
    let mut best = 0.0f64;
    for (k, j) in g.indices.iter().enumerate() {
        let deg: u32 = j.iter().sum();
        if deg == 0 {
            continue;
        }
        let t = match exact {
            Some(c) => c[k].iter().map(|x| q_to_f64(&torus_norm_q(x))).fold(0.0, f64::max),
            None => float[k].iter().map(|&x| torus_norm(x)).fold(0.0, f64::max),
        };
        best = best.max(scale.powi(deg as i32) * t);
    }
    best
}

/// Horizontal character `x ↦ ℓ·x mod 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HorizChar {
    pub ell: Vec<i64>,
}

impl HorizChar {
    pub fn new(ell: Vec<i64>) -> Self {
        HorizChar { ell }
    }

    /// `Σ |ℓ_i|`.
    pub fn norm(&self) -> u64 {
        self.ell.iter().map(|x| x.unsigned_abs()).sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.ell.iter().all(|&x| x == 0)
    }
}

/// Nonzero characters with `Σ|ℓ_i| ≤ c`.
fn characters(s: usize, c: u64) -> Vec<Vec<i64>> {
    let c = c as i64;
    let side = (2 * c + 1) as usize;
    (0..side.pow(s as u32))
        .map(|idx| {
            let mut v = vec![0i64; s];
            let mut r = idx;
            for x in v.iter_mut().rev() {
                *x = (r % side) as i64 - c;
                r /= side;
            }
            v
        })
        .filter(|v| v.iter().any(|&x| x != 0) && v.iter().map(|x| x.abs()).sum::<i64>() <= c)
        .collect()
}

/// Character minimizing the smooth norm of `ℓ·g` over `0 < Σ|ℓ_i| ≤ C`.
///
/// Smooth norms within a relative `1e-12` count as equal; ties go to the smaller character
/// norm and then to the lexicographically largest ℓ.
pub fn char_search(g: &PolySeq, n: u64, c: u64, flavor: Flavor) -> Result<(HorizChar, f64)> {
    if c == 0 {
        return Err(Error::Precondition("search bound must be at least 1".into()));
    }
    let cands = characters(g.out, c);
    let scored: Vec<(Vec<i64>, f64)> = cands
        .into_par_iter()
        .map(|ell| {
            let chi = HorizChar::new(ell);
            let s = smooth_norm(&g.apply_char(&chi).expect("matching length"), n, flavor);
            (chi.ell, s)
        })
        .collect();
    let mut best: Option<(Vec<i64>, f64)> = None;
    for (ell, s) in scored {
        let better = match &best {
            None => true,
            Some((bl, bs)) => {
                let tol = 1e-12 * bs.abs().max(s.abs()).max(1e-300);
                if (s - bs).abs() > tol {
                    s < *bs
                } else {
                    let (na, nb) = (HorizChar::new(ell.clone()).norm(), HorizChar::new(bl.clone()).norm());
                    na < nb || (na == nb && ell > *bl)
                }
            }
        };
        if better {
            best = Some((ell, s));
        }
    }
    let (ell, s) = best.expect("at least one nonzero character");
    Ok((HorizChar::new(ell), s))
}

/// A progression on which `e(η∘g)` stays within 1/2 of its value at 0.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub ap: APSpec,
    pub radius: u64,
    pub smooth_norm: f64,
    pub correlation: f64,
    /// `|R_M| / (2|R_N|)`, guaranteed by the phase bound.
    pub floor: f64,
}

/// Builds the sub-box `R_M` of `R_N` on which the phase of `η∘g` moves by at most 1/2 and
/// measures `|E_{n ∈ R_N} 1_{R_M}(n) e(η∘g(n))|`.
///
/// Each coefficient is replaced by its signed fractional part, which changes `η∘g` by an
/// integer on `Z^D`. M is the largest radius with `2π Σ_j |β_j| max_{R_M} |C(n, j)| ≤ 1/2`.
pub fn leibman_witness(g: &PolySeq, eta: &HorizChar, n: u64, c0: f64) -> Result<Witness> {
    if eta.is_trivial() {
        return Err(Error::Precondition("character must be nontrivial".into()));
    }
    let phase = g.apply_char(eta)?;
    let sn = smooth_norm(&phase, n, Flavor::Binomial);
    if sn > c0 {
        return Err(Error::NoWitness { smooth_norm: sn, bound: c0 });
    }
    let betas: Vec<(Vec<u32>, f64)> = match phase.binomial_exact() {
        Some(b) => phase
            .indices
            .iter()
            .zip(b)
            .filter(|(j, _)| j.iter().any(|&x| x > 0))
            .map(|(j, c)| (j.clone(), q_to_f64(&(&c[0] - c[0].round()))))
            .collect(),
        None => phase
            .indices
            .iter()
            .zip(&phase.binomial)
            .filter(|(j, _)| j.iter().any(|&x| x > 0))
            .map(|(j, c)| (j.clone(), c[0] - c[0].round()))
            .collect(),
    };
    let spread = |m: u64| -> f64 {
        2.0 * std::f64::consts::PI
            * betas
                .iter()
                .map(|(j, b)| {
                    // max over |n_t| ≤ m of |C(n_t, j_t)| is C(m + j_t − 1, j_t), at n_t = −m.
                    let f: f64 = j.iter().map(|&jt| if jt == 0 { 1.0 } else { binom_f64(m as i64 + jt as i64 - 1, jt) }).product();
                    b.abs() * f
                })
                .sum::<f64>()
    };
    let (mut lo, mut hi) = (0u64, n);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if spread(mid) <= 0.5 {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let m = lo;
    let d = g.dim;
    let ap = APSpec {
        base: vec![-(m as i64); d],
        steps: vec![1; d],
        lengths: vec![2 * m + 1; d],
    };
    let mut acc = Complex64::new(0.0, 0.0);
    ap.for_each(|pt| acc += e(phase.eval(pt)[0]));
    let vol_n = ((2 * n + 1) as f64).powi(d as i32);
    let vol_m = ((2 * m + 1) as f64).powi(d as i32);
    Ok(Witness {
        ap,
        radius: m,
        smooth_norm: sn,
        correlation: acc.norm() / vol_n,
        floor: vol_m / (2.0 * vol_n),
    })
}

/// Finite-difference extraction for a homogeneous degree-m scalar polynomial.
#[derive(Clone, Debug, Serialize)]
pub struct PopoReport {
    /// `max_{|n| ≤ m} ‖g(n)‖_T`.
    pub c0: f64,
    /// `(m!)^D`.
    pub q: u64,
    /// `2^D Q`.
    pub c: f64,
    /// For each `|j| = m`: the index, `∂^j g(0)/j!`, and `‖Q a'_j‖_T`.
    pub terms: Vec<(Vec<u32>, f64, f64)>,
    /// Whether every extracted coefficient matches the stored one and obeys the bound.
    pub holds: bool,
}

/// Recovers `a'_j` from `∂_{e_1}^{j_1}…∂_{e_D}^{j_D} g(0) = j! a'_j` and checks
/// `‖Q a'_j‖_T ≤ C_0 C` with `Q = (m!)^D`, `C = 2^D Q`.
pub fn popo_check(g: &PolySeq) -> Result<PopoReport> {
    if g.out != 1 {
        return Err(Error::Precondition("a scalar sequence is required".into()));
    }
    let m = g.degree;
    let d = g.dim;
    for (j, c) in g.indices.iter().zip(&g.monomial) {
        if j.iter().sum::<u32>() != m && c[0] != 0.0 {
            return Err(Error::Precondition("sequence is not homogeneous of its degree".into()));
        }
    }
    let mut c0 = 0.0f64;
    let side = 2 * m as i64 + 1;
    for idx in 0..(side as usize).pow(d as u32) {
        let mut pt = vec![0i64; d];
        let mut r = idx;
        for x in pt.iter_mut().rev() {
            *x = (r % side as usize) as i64 - m as i64;
            r /= side as usize;
        }
        if pt.iter().map(|x| x.abs()).sum::<i64>() <= m as i64 {
            c0 = c0.max(torus_norm(g.eval(&pt)[0]));
        }
    }
    let fact = |k: u32| (1..=k as u64).product::<u64>();
    let qv = fact(m).pow(d as u32);
    let c = 2f64.powi(d as i32) * qv as f64;
    let mut holds = true;
    let mut terms = Vec::new();
    for (k, j) in g.indices.iter().enumerate() {
        if j.iter().sum::<u32>() != m {
            continue;
        }
        // Σ over 0 ≤ a ≤ j of (−1)^{|j−a|} C(j, a) g(a)
        let mut total = 0.0;
        let mut exact_total = q(0);
        let mut a = vec![0u32; d];
        loop {
            let sign = if (j.iter().zip(&a).map(|(x, y)| x - y).sum::<u32>()) % 2 == 0 { 1i64 } else { -1 };
            let w: i64 = j.iter().zip(&a).map(|(&x, &y)| binom_f64(x as i64, y) as i64).product::<i64>() * sign;
            let pt: Vec<i64> = a.iter().map(|&x| x as i64).collect();
            total += w as f64 * g.eval(&pt)[0];
            if let Some(v) = g.eval_exact(&pt) {
                exact_total = exact_total + q(w) * &v[0];
            }
            if !advance(&mut a, j) {
                break;
            }
        }
        let jf: u64 = j.iter().map(|&x| fact(x)).product();
        let extracted = total / jf as f64;
        let qa = match g.monomial_exact() {
            Some(mono) => {
                let ex = exact_total / q(jf as i64);
                if ex != mono[k][0] {
                    holds = false;
                }
                q_to_f64(&torus_norm_q(&(ex * q(qv as i64))))
            }
            None => {
                if (extracted - g.monomial[k][0]).abs() > 1e-9 * (1.0 + g.monomial[k][0].abs()) {
                    holds = false;
                }
                torus_norm(extracted * qv as f64)
            }
        };
        if qa > c0 * c + 1e-9 {
            holds = false;
        }
        terms.push((j.clone(), extracted, qa));
    }
    Ok(PopoReport { c0, q: qv, c, terms, holds })
}

/// Element `(x, y; z)` of the Heisenberg group with law
/// `(x, y; z)(x', y'; z') = (x + x', y + y'; z + z' + x y')`.
#[derive(Clone, Debug, PartialEq)]
pub struct Heis<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Floating-point Heisenberg element.
pub type HeisenbergElem = Heis<f64>;

impl<T: Coef> Heis<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Heis { x, y, z }
    }

    pub fn identity() -> Self {
        Heis::new(T::int(0), T::int(0), T::int(0))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Heis::new(
            self.x.clone() + o.x.clone(),
            self.y.clone() + o.y.clone(),
            self.z.clone() + o.z.clone() + self.x.clone() * o.y.clone(),
        )
    }

    /// `(−x, −y; −z + xy)`.
    pub fn inv(&self) -> Self {
        Heis::new(-self.x.clone(), -self.y.clone(), -self.z.clone() + self.x.clone() * self.y.clone())
    }

    /// `[g, h] = g h g⁻¹ h⁻¹`.
    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).mul(&self.inv()).mul(&o.inv())
    }

    /// Representative of the coset `gΓ` in `[0, 1)^3`, by right multiplication with
    /// `(−⌊x⌋, 0; 0)`, then `(0, −⌊y⌋; 0)`, then `(0, 0; −⌊z⌋)`.
    pub fn reduce(&self) -> Self {
        let a = self.mul(&Heis::new(-self.x.floor(), T::int(0), T::int(0)));
        let b = a.mul(&Heis::new(T::int(0), -a.y.floor(), T::int(0)));
        b.mul(&Heis::new(T::int(0), T::int(0), -b.z.floor()))
    }
}

/// `[g_1, …, g_d]_d = [[…[g_1, g_2], g_3]…], g_d]`, with `[g_1]_1 = g_1`.
pub fn bracket<T: Coef>(gs: &[Heis<T>]) -> Result<Heis<T>> {
    let (first, rest) = gs
        .split_first()
        .ok_or_else(|| Error::Precondition("bracket needs at least one element".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, g| acc.commutator(g)))
}

/// The space an orbit lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrbitModel {
    /// `T^s`, with the sequence read mod 1.
    Torus,
    /// Heisenberg nilmanifold; the sequence gives `(x, y, z)` coordinates.
    Heisenberg,
}

/// Test functions and progressions for [`equid_correlation`].
#[derive(Clone, Debug, Serialize)]
pub struct EquidCatalog {
    /// Horizontal frequencies `ξ` with `0 < max|ξ_i| ≤ xi_max`, and on Heisenberg also
    /// vertical frequencies `1..=xi_max`.
    pub xi_max: i64,
    pub aps: Vec<APSpec>,
}

impl EquidCatalog {
    /// Progressions in `R_{N,D}` with equal steps `1..=max_step` on every axis, one per
    /// residue class of the step, each running across the whole box.
    pub fn default_for(dim: usize, n: u64, xi_max: i64, max_step: i64) -> Self {
        let n = n as i64;
        let mut aps = Vec::new();
        for s in 1..=max_step.max(1) {
            let classes = s.min(2 * n + 1) as usize;
            for r in 0..classes.pow(dim as u32) {
                let base: Vec<i64> = (0..dim).map(|i| -n + (r / classes.pow(i as u32) % classes) as i64).collect();
                let lengths: Vec<u64> = base.iter().map(|&b| ((n - b) / s + 1) as u64).collect();
                aps.push(APSpec { base, steps: vec![s; dim], lengths });
            }
        }
        EquidCatalog { xi_max, aps }
    }
}

/// Surrogate for total equidistribution.
#[derive(Clone, Debug, Serialize)]
pub struct EquidReport {
    pub model: OrbitModel,
    pub n: u64,
    pub test_functions: usize,
    pub progressions: usize,
    pub max_correlation: f64,
    pub best_test: String,
    pub best_ap: APSpec,
    pub epsilon: f64,
    /// Whether the largest correlation is at most epsilon.
    pub equidistributed: bool,
}

enum TestFn {
    Horizontal(Vec<i64>),
    Vertical(i64),
}

impl TestFn {
    fn describe(&self) -> String {
        match self {
            TestFn::Horizontal(xi) => format!("horizontal {xi:?}"),
            TestFn::Vertical(l) => format!("vertical {l}"),
        }
    }

    /// Tie-break key: horizontal before vertical, smaller `Σ|ξ_i|`, then larger ξ.
    fn rank(&self) -> (u8, i64, std::cmp::Reverse<Vec<i64>>) {
        match self {
            TestFn::Horizontal(xi) => (0, xi.iter().map(|x| x.abs()).sum(), std::cmp::Reverse(xi.clone())),
            TestFn::Vertical(l) => (1, *l, std::cmp::Reverse(vec![])),
        }
    }

    fn eval(&self, p: &[f64]) -> Complex64 {
        match self {
            TestFn::Horizontal(xi) => e(xi.iter().zip(p).map(|(&k, &x)| k as f64 * x).sum()),
            TestFn::Vertical(l) => {
                // vanishes on the boundary of the (x, y) square, so it descends to the quotient
                let bump = (std::f64::consts::PI * p[0]).sin().powi(2) * (std::f64::consts::PI * p[1]).sin().powi(2);
                e(*l as f64 * p[2]) * bump
            }
        }
    }
}

/// Reduced orbit point for `n`.
pub fn orbit_point(g: &PolySeq, model: OrbitModel, n: &[i64]) -> Vec<f64> {
    let v = g.eval(n);
    match model {
        OrbitModel::Torus => v.iter().map(|x| x - x.floor()).collect(),
        OrbitModel::Heisenberg => {
            let r = Heis::new(v[0], v[1], v[2]).reduce();
            vec![r.x, r.y, r.z]
        }
    }
}

/// `max |E_{n ∈ R_N} 1_P(n) f(orbit(n))|` over the catalog's test functions and progressions.
pub fn equid_correlation(g: &PolySeq, model: OrbitModel, n: u64, catalog: &EquidCatalog, epsilon: f64) -> Result<EquidReport> {
    if catalog.aps.is_empty() || catalog.xi_max < 1 {
        return Err(Error::Precondition("catalogs must be nonempty".into()));
    }
    let s = g.out_dim();
    if model == OrbitModel::Heisenberg && s != 3 {
        return Err(Error::ShapeMismatch("Heisenberg orbits need three coordinates".into()));
    }
    let d = g.dim();
    let ni = n as i64;
    for ap in &catalog.aps {
        if ap.dim() != d || !ap.inside(-ni, ni) {
            return Err(Error::Precondition(format!("progression {ap:?} leaves R_N")));
        }
    }
    let horiz = if model == OrbitModel::Heisenberg { 2 } else { s };
    let mut tests: Vec<TestFn> = characters_sup(horiz, catalog.xi_max).into_iter().map(TestFn::Horizontal).collect();
    if model == OrbitModel::Heisenberg {
        tests.extend((1..=catalog.xi_max).map(TestFn::Vertical));
    }
    let side = (2 * n + 1) as usize;
    let total = side.pow(d as u32);
    let orbit: Vec<Vec<f64>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut pt = vec![0i64; d];
            let mut r = idx;
            for x in pt.iter_mut().rev() {
                *x = (r % side) as i64 - ni;
                r /= side;
            }
            orbit_point(g, model, &pt)
        })
        .collect();
    let vol = total as f64;
    let scores: Vec<(f64, usize, usize)> = tests
        .par_iter()
        .enumerate()
        .map(|(ti, t)| {
            let vals: Vec<Complex64> = orbit.iter().map(|p| t.eval(p)).collect();
            let mut best = (0.0f64, ti, 0usize);
            for (ai, ap) in catalog.aps.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                ap.for_each(|pt| {
                    let idx = pt.iter().fold(0usize, |a, &x| a * side + (x + ni) as usize);
                    acc += vals[idx];
                });
                let c = acc.norm() / vol;
                if c > best.0 {
                    best = (c, ti, ai);
                }
            }
            best
        })
        .collect();
    let (max_c, ti, ai) = scores.into_iter().fold((0.0f64, 0, 0), |b, x| {
        let tol = 1e-12 * b.0.max(x.0);
        if (x.0 - b.0).abs() > tol {
            if x.0 > b.0 {
                x
            } else {
                b
            }
        } else if tests[x.1].rank() < tests[b.1].rank() {
            x
        } else {
            b
        }
    });
    Ok(EquidReport {
        model,
        n,
        test_functions: tests.len(),
        progressions: catalog.aps.len(),
        max_correlation: max_c,
        best_test: tests[ti].describe(),
        best_ap: catalog.aps[ai].clone(),
        epsilon,
        equidistributed: max_c <= epsilon,
    })
}

/// Nonzero `ξ ∈ Z^s` with `max|ξ_i| ≤ m`.
fn characters_sup(s: usize, m: i64) -> Vec<Vec<i64>> {
    let side = (2 * m + 1) as usize;
    (0..side.pow(s as u32))
        .map(|idx| {
            let mut v = vec![0i64; s];
            let mut r = idx;
            for x in v.iter_mut().rev() {
                *x = (r % side) as i64 - m;
                r /= side;
            }
            v
        })
        .filter(|v| v.iter().any(|&x| x != 0))
        .collect()
}

/// Orbit dump with columns `n0,…,n{D-1},c0,…` of reduced coordinates.
pub fn orbit_csv(g: &PolySeq, model: OrbitModel, n: u64) -> String {
    use std::fmt::Write as _;
    let d = g.dim();
    let k = if model == OrbitModel::Heisenberg { 3 } else { g.out_dim() };
    let mut s = String::new();
    let cols: Vec<String> = (0..d).map(|i| format!("n{i}")).chain((0..k).map(|i| format!("c{i}"))).collect();
    let _ = writeln!(s, "{}", cols.join(","));
    let ni = n as i64;
    let side = (2 * n + 1) as usize;
    for idx in 0..side.pow(d as u32) {
        let mut pt = vec![0i64; d];
        let mut r = idx;
        for x in pt.iter_mut().rev() {
            *x = (r % side) as i64 - ni;
            r /= side;
        }
        let p = orbit_point(g, model, &pt);
        let row: Vec<String> = pt.iter().map(|x| x.to_string()).chain(p.iter().map(|x| x.to_string())).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qr;

    #[test]
    fn half_square_in_both_bases() {
        // n²/2 = C(n,2) + C(n,1)/2
        let g = PolySeq::from_monomial_exact(1, 1, 2, &[(vec![2], vec![qr(1, 2)])]).unwrap();
        let b = g.binomial_exact().unwrap();
        assert_eq!(b[1][0], qr(1, 2));
        assert_eq!(b[2][0], q(1));
    }

    #[test]
    fn heisenberg_reduction_example() {
        let r = HeisenbergElem::new(1.5, 2.3, 0.7).reduce();
        assert!((r.x - 0.5).abs() < 1e-12 && (r.y - 0.3).abs() < 1e-12 && (r.z - 0.7).abs() < 1e-12);
    }
}
