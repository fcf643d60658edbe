//! Complex functions on Z_Ñ^D: Fourier transform, convolution, Gowers uniformity norms and
//! averages over arithmetic progressions.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Dense complex array on Z_Ñ^D in row-major order (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridFn {
    dim: usize,
    modulus: usize,
    values: Vec<Complex64>,
}

/// Above this many terms the U² autocorrelation is taken through the transform.
const DIRECT_U2_LIMIT: usize = 1 << 22;

impl GridFn {
    pub fn new(dim: usize, modulus: usize, values: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || modulus == 0 {
            return Err(Error::ShapeMismatch("dimension and modulus must be positive".into()));
        }
        let len = checked_len(dim, modulus)?;
        if values.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "{} values given for a grid of {len} points",
                values.len()
            )));
        }
        Ok(GridFn { dim, modulus, values })
    }

    pub fn zeros(dim: usize, modulus: usize) -> Result<Self> {
        let len = checked_len(dim, modulus)?;
        Self::new(dim, modulus, vec![Complex64::new(0.0, 0.0); len])
    }

    /// Grid filled by a function of the coordinates `0..Ñ` on each axis.
    pub fn from_fn(dim: usize, modulus: usize, f: impl Fn(&[usize]) -> Complex64) -> Result<Self> {
        let len = checked_len(dim, modulus)?;
        let mut coords = vec![0usize; dim];
        let mut values = Vec::with_capacity(len);
        for idx in 0..len {
            decode(idx, modulus, &mut coords);
            values.push(f(&coords));
        }
        Self::new(dim, modulus, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat index of a coordinate vector, reducing each entry mod Ñ.
    pub fn index_of(&self, coords: &[i64]) -> usize {
        let m = self.modulus as i64;
        coords.iter().fold(0usize, |acc, &c| acc * self.modulus + c.rem_euclid(m) as usize)
    }

    /// Coordinates of a flat index.
    pub fn coords_of(&self, idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        decode(idx, self.modulus, &mut c);
        c
    }

    pub fn get(&self, coords: &[i64]) -> Complex64 {
        self.values[self.index_of(coords)]
    }

    pub fn set(&mut self, coords: &[i64], v: Complex64) {
        let i = self.index_of(coords);
        self.values[i] = v;
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.modulus != other.modulus {
            return Err(Error::ShapeMismatch(format!(
                "grids Z_{}^{} and Z_{}^{} differ",
                self.modulus, self.dim, other.modulus, other.dim
            )));
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        GridFn {
            dim: self.dim,
            modulus: self.modulus,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.same_shape(other)?;
        Ok(GridFn {
            dim: self.dim,
            modulus: self.modulus,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// `n ↦ f(n + shift)`.
    pub fn translate(&self, shift: &[i64]) -> Self {
        let mut out = self.clone();
        let mut c = vec![0usize; self.dim];
        let m = self.modulus as i64;
        for idx in 0..self.len() {
            decode(idx, self.modulus, &mut c);
            let src = c
                .iter()
                .zip(shift)
                .fold(0usize, |acc, (&x, &s)| acc * self.modulus + (x as i64 + s).rem_euclid(m) as usize);
            out.values[idx] = self.values[src];
        }
        out
    }

    /// `n ↦ f(n) e(n·ξ/Ñ)`.
    pub fn modulate(&self, xi: &[i64]) -> Self {
        let mut out = self.clone();
        let mut c = vec![0usize; self.dim];
        let m = self.modulus as i64;
        for idx in 0..self.len() {
            decode(idx, self.modulus, &mut c);
            let dot = c.iter().zip(xi).fold(0i64, |acc, (&x, &k)| (acc + x as i64 * k.rem_euclid(m)) % m);
            out.values[idx] *= e(dot as f64 / self.modulus as f64);
        }
        out
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn mean(&self) -> Complex64 {
        ordered_sum(&self.values) / self.len() as f64
    }

    /// Averaged transform `f̂(ξ) = E_n f(n) e(-n·ξ/Ñ)`.
    pub fn dft(&self) -> Self {
        let mut out = self.clone();
        let plan = FftPlanner::new().plan_fft_forward(self.modulus);
        transform_axes(&mut out, &plan);
        let scale = 1.0 / self.len() as f64;
        out.values.iter_mut().for_each(|v| *v *= scale);
        out
    }

    /// Inverse of [`GridFn::dft`]: `f(n) = Σ_ξ f̂(ξ) e(n·ξ/Ñ)`.
    pub fn idft(&self) -> Self {
        let mut out = self.clone();
        let plan = FftPlanner::new().plan_fft_inverse(self.modulus);
        transform_axes(&mut out, &plan);
        out
    }

    /// `(f*g)(n) = E_m f(n-m) g(m)`, computed in the transform domain.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.dft().mul(&other.dft())?.idft())
    }

    /// Serializes as CSV with header `index0,…,index{D-1},re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.dim {
            let _ = write!(s, "index{i},");
        }
        s.push_str("re,im\n");
        let mut c = vec![0usize; self.dim];
        for (idx, v) in self.values.iter().enumerate() {
            decode(idx, self.modulus, &mut c);
            for x in &c {
                let _ = write!(s, "{x},");
            }
            let _ = writeln!(s, "{},{}", v.re, v.im);
        }
        s
    }

    /// Parses the format written by [`GridFn::to_csv`]; the modulus is given by the caller.
    pub fn from_csv(text: &str, modulus: usize) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 3 || cols[cols.len() - 2] != "re" || cols[cols.len() - 1] != "im" {
            return Err(Error::Parse("header must end with re,im".into()));
        }
        let dim = cols.len() - 2;
        let mut grid = Self::zeros(dim, modulus)?;
        let mut seen = vec![false; grid.len()];
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != dim + 2 {
                return Err(Error::Parse(format!("line {}: expected {} fields", lineno + 2, dim + 2)));
            }
            let mut coords = Vec::with_capacity(dim);
            for f in &fields[..dim] {
                let c: usize = f.parse().map_err(|_| Error::Parse(format!("bad index {f:?}")))?;
                if c >= modulus {
                    return Err(Error::Parse(format!("index {c} outside Z_{modulus}")));
                }
                coords.push(c as i64);
            }
            let re: f64 = fields[dim].parse().map_err(|_| Error::Parse(format!("bad value {:?}", fields[dim])))?;
            let im: f64 = fields[dim + 1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad value {:?}", fields[dim + 1])))?;
            let i = grid.index_of(&coords);
            seen[i] = true;
            grid.values[i] = Complex64::new(re, im);
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parse("CSV does not cover every grid point".into()));
        }
        Ok(grid)
    }
}

fn checked_len(dim: usize, modulus: usize) -> Result<usize> {
    modulus
        .checked_pow(dim as u32)
        .filter(|&l| l <= 1 << 30)
        .ok_or_else(|| Error::ShapeMismatch(format!("grid Z_{modulus}^{dim} is too large")))
}

fn decode(mut idx: usize, modulus: usize, out: &mut [usize]) {
    for c in out.iter_mut().rev() {
        *c = idx % modulus;
        idx /= modulus;
    }
}

/// `e(x) = exp(2πix)`.
pub fn e(x: f64) -> Complex64 {
    let t = 2.0 * std::f64::consts::PI * x.rem_euclid(1.0);
    Complex64::new(t.cos(), t.sin())
}

/// Sum in index order, so results do not depend on thread scheduling.
fn ordered_sum(v: &[Complex64]) -> Complex64 {
    v.iter().fold(Complex64::new(0.0, 0.0), |a, &b| a + b)
}

fn transform_axes(g: &mut GridFn, plan: &Arc<dyn Fft<f64>>) {
    let n = g.modulus;
    let len = g.len();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..g.dim {
        let stride = n.pow((g.dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..len).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for k in 0..n {
                    line[k] = g.values[base + k * stride];
                }
                plan.process(&mut line);
                for k in 0..n {
                    g.values[base + k * stride] = line[k];
                }
            }
        }
    }
}

/// Autocorrelation `A(m) = E_n f(n+m) conj f(n)`.
fn autocorrelation(f: &GridFn) -> GridFn {
    let len = f.len();
    if len.saturating_mul(len) <= DIRECT_U2_LIMIT {
        let vals: Vec<Complex64> = (0..len)
            .into_par_iter()
            .map(|m| {
                let mc = f.coords_of(m);
                let mi: Vec<i64> = mc.iter().map(|&x| x as i64).collect();
                let shifted = f.translate(&mi);
                let s = shifted
                    .values
                    .iter()
                    .zip(&f.values)
                    .fold(Complex64::new(0.0, 0.0), |acc, (&a, &b)| acc + a * b.conj());
                s / len as f64
            })
            .collect();
        GridFn {
            dim: f.dim,
            modulus: f.modulus,
            values: vals,
        }
    } else {
        f.dft().map(|v| Complex64::new(v.norm_sqr(), 0.0)).idft()
    }
}

/// `‖f‖_{U^d}^{2^d}`, recursively.
fn gowers_power(f: &GridFn, d: u32) -> f64 {
    match d {
        1 => f.mean().norm_sqr(),
        2 => {
            let a = autocorrelation(f);
            a.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / f.len() as f64
        }
        _ => {
            let terms: Vec<f64> = (0..f.len())
                .into_par_iter()
                .map(|m| {
                    let mi: Vec<i64> = f.coords_of(m).iter().map(|&x| x as i64).collect();
                    let g = f.translate(&mi).mul(&f.conj()).expect("same shape");
                    gowers_power(&g, d - 1)
                })
                .collect();
            terms.iter().sum::<f64>() / f.len() as f64
        }
    }
}

/// Gowers uniformity norm `‖f‖_{U^d(Z_Ñ^D)}`.
pub fn gowers_norm(f: &GridFn, d: u32) -> Result<f64> {
    if d == 0 {
        return Err(Error::Precondition("Gowers norm order must be at least 1".into()));
    }
    let p = gowers_power(f, d).max(0.0);
    Ok(p.powf(1.0 / 2f64.powi(d as i32)))
}

/// Gowers norm by direct summation over all cubes `n + ω·h`, for `D = 1`, `Ñ ≤ 16`, `d ≤ 3`.
pub fn gowers_norm_cube(f: &GridFn, d: u32) -> Result<f64> {
    if f.dim != 1 || f.modulus > 16 || d == 0 || d > 3 {
        return Err(Error::Precondition("cube oracle needs D = 1, Ñ ≤ 16 and 1 ≤ d ≤ 3".into()));
    }
    let n = f.modulus;
    let corners = 1usize << d;
    let mut total = Complex64::new(0.0, 0.0);
    let count = n.pow(d + 1);
    for t in 0..count {
        let mut rest = t;
        let base = rest % n;
        rest /= n;
        let h: Vec<usize> = (0..d).map(|_| {
            let v = rest % n;
            rest /= n;
            v
        }).collect();
        let mut prod = Complex64::new(1.0, 0.0);
        for w in 0..corners {
            let mut pos = base;
            for (i, hi) in h.iter().enumerate() {
                if w >> i & 1 == 1 {
                    pos += hi;
                }
            }
            let v = f.values[pos % n];
            prod *= if w.count_ones() % 2 == 1 { v.conj() } else { v };
        }
        total += prod;
    }
    let p = (total.re / count as f64).max(0.0);
    Ok(p.powf(1.0 / corners as f64))
}

/// `‖1_{[N]^D} f‖_{U^d(Z_{N*}^D)} / ‖1_{[N]^D}‖_{U^d(Z_{N*}^D)}` for `f` given on `{1..N}^D`
/// in row-major order.
pub fn gowers_interval_norm(values: &[Complex64], dim: usize, n: usize, d: u32, n_star: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::Precondition("interval norm needs d ≥ 2".into()));
    }
    if n_star <= 2 * n {
        return Err(Error::BadWindow(format!("N* = {n_star} must exceed 2N = {}", 2 * n)));
    }
    if values.len() != checked_len(dim, n)? {
        return Err(Error::ShapeMismatch(format!("expected {} values on [N]^D", n.pow(dim as u32))));
    }
    let mut f = GridFn::zeros(dim, n_star)?;
    let mut ind = GridFn::zeros(dim, n_star)?;
    let mut c = vec![0usize; dim];
    for (k, v) in values.iter().enumerate() {
        decode(k, n, &mut c);
        let pos: Vec<i64> = c.iter().map(|&x| x as i64 + 1).collect();
        f.set(&pos, *v);
        ind.set(&pos, Complex64::new(1.0, 0.0));
    }
    Ok(gowers_norm(&f, d)? / gowers_norm(&ind, d)?)
}

/// D-dimensional arithmetic progression `{base + Σ steps_i n_i e_i : 0 ≤ n_i < lengths_i}`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct APSpec {
    pub base: Vec<i64>,
    pub steps: Vec<i64>,
    pub lengths: Vec<u64>,
}

impl APSpec {
    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn volume(&self) -> u64 {
        self.lengths.iter().product()
    }

    /// Visits every point of the progression.
    pub fn for_each(&self, mut visit: impl FnMut(&[i64])) {
        let d = self.dim();
        if self.lengths.iter().any(|&l| l == 0) {
            return;
        }
        let mut k = vec![0u64; d];
        let mut p = self.base.clone();
        loop {
            visit(&p);
            let mut axis = d;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                k[axis] += 1;
                p[axis] += self.steps[axis];
                if k[axis] < self.lengths[axis] {
                    break;
                }
                p[axis] -= self.steps[axis] * self.lengths[axis] as i64;
                k[axis] = 0;
            }
        }
    }

    /// Whether every point lies in `[lo, hi]^D`.
    pub fn inside(&self, lo: i64, hi: i64) -> bool {
        (0..self.dim()).all(|i| {
            let end = self.base[i] + self.steps[i] * (self.lengths[i] as i64 - 1);
            self.lengths[i] == 0 || (self.base[i].min(end) >= lo && self.base[i].max(end) <= hi)
        })
    }

    fn check(&self) -> Result<()> {
        let d = self.dim();
        if self.steps.len() != d || self.lengths.len() != d {
            return Err(Error::ShapeMismatch("base, steps and lengths must share a dimension".into()));
        }
        Ok(())
    }
}

/// `E_{n ∈ Z_Ñ^D} 1_P(n) f(n)`, counting each residue of P once.
pub fn ap_average(f: &GridFn, ap: &APSpec) -> Result<Complex64> {
    ap.check()?;
    if ap.dim() != f.dim {
        return Err(Error::ShapeMismatch("progression and grid dimensions differ".into()));
    }
    let mut mask = vec![false; f.len()];
    ap.for_each(|p| mask[f.index_of(p)] = true);
    let s = f
        .values
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .fold(Complex64::new(0.0, 0.0), |acc, (&v, _)| acc + v);
    Ok(s / f.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let g = GridFn::from_fn(2, 3, |c| Complex64::new(c[0] as f64, c[1] as f64 * 0.5)).unwrap();
        let back = GridFn::from_csv(&g.to_csv(), 3).unwrap();
        assert_eq!(g, back);
        assert!(g.to_csv().starts_with("index0,index1,re,im\n"));
    }

    #[test]
    fn progression_enumeration_order() {
        let ap = APSpec { base: vec![1, 2], steps: vec![2, 3], lengths: vec![2, 2] };
        let mut pts = vec![];
        ap.for_each(|p| pts.push(p.to_vec()));
        assert_eq!(pts, vec![vec![1, 2], vec![1, 5], vec![3, 2], vec![3, 5]]);
    }
}
