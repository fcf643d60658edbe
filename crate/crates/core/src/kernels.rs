//! Fejér-type kernels on Z_Ñ^D, their dilations, and the two-way structure decomposition.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{q, Q};
use crate::grid::{e, gowers_norm, GridFn};

/// Parameters of a dilated kernel: modulus Ñ, width m, dilation Q and dimension D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KernelSpec {
    pub modulus: usize,
    pub width: usize,
    pub dilation: u64,
    pub dim: usize,
}

impl KernelSpec {
    pub fn new(modulus: usize, width: usize, dilation: u64, dim: usize) -> Result<Self> {
        let spec = KernelSpec { modulus, width, dilation, dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.dim == 0 {
            return Err(Error::Precondition("width and dimension must be positive".into()));
        }
        if 2 * self.width >= self.modulus {
            return Err(Error::Precondition(format!(
                "width {} too large for modulus {}",
                self.width, self.modulus
            )));
        }
        if self.dilation == 0 || self.dilation.gcd(&(self.modulus as u64)) != 1 {
            return Err(Error::Precondition(format!(
                "dilation {} is not invertible mod {}",
                self.dilation, self.modulus
            )));
        }
        Ok(())
    }

    /// Inverse of the dilation mod Ñ.
    pub fn dilation_inverse(&self) -> u64 {
        let n = BigInt::from(self.modulus);
        let g = BigInt::from(self.dilation).extended_gcd(&n);
        g.x.mod_floor(&n).try_into().expect("reduced mod Ñ")
    }

    /// Exact Fourier coefficient `φ̂(ξ) = ∏ max(0, 1 − |c(Qξ_i)|/m)`, with `c` the centered
    /// residue mod Ñ.
    pub fn coefficient(&self, xi: &[i64]) -> Q {
        let n = self.modulus as i64;
        let m = self.width as i64;
        xi.iter().fold(q(1), |acc, &x| {
            let r = centered((self.dilation as i128 * x as i128).rem_euclid(n as i128) as i64, n);
            let t = Q::new(BigInt::from(m - r.abs()), BigInt::from(m));
            if t.is_positive() {
                acc * t
            } else {
                Q::zero()
            }
        })
    }

    /// Whether `ξ` lies in the spectrum `{ξ : ‖Qξ_i/Ñ‖_T < m/Ñ for all i}`.
    pub fn in_spectrum(&self, xi: &[i64]) -> bool {
        !self.coefficient(xi).is_zero()
    }
}

fn centered(r: i64, n: i64) -> i64 {
    if 2 * r > n {
        r - n
    } else {
        r
    }
}

/// One axis of the Fejér kernel, `F(n) = |Σ_{k<m} e(kn/Ñ)|² / m`.
fn fejer_axis(modulus: usize, width: usize) -> Vec<f64> {
    (0..modulus)
        .map(|n| {
            let s = (0..width).fold(Complex64::new(0.0, 0.0), |acc, k| {
                acc + e(((k * n) % modulus) as f64 / modulus as f64)
            });
            s.norm_sqr() / width as f64
        })
        .collect()
}

fn tensor(dim: usize, modulus: usize, axis: &[f64]) -> Result<GridFn> {
    GridFn::from_fn(dim, modulus, |c| {
        Complex64::new(c.iter().map(|&x| axis[x]).product(), 0.0)
    })
}

/// Fejér kernel with spectrum `{−(m−1),…,m−1}^D` and coefficients `∏(1 − |ξ_i|/m)`.
pub fn fejer(modulus: usize, width: usize, dim: usize) -> Result<GridFn> {
    KernelSpec::new(modulus, width, 1, dim)?;
    tensor(dim, modulus, &fejer_axis(modulus, width))
}

/// Dilated kernel `φ(x) = F(Q*·x mod Ñ)`.
pub fn phi_kernel(spec: &KernelSpec) -> Result<GridFn> {
    spec.validate()?;
    let f = fejer_axis(spec.modulus, spec.width);
    let qs = spec.dilation_inverse() as usize % spec.modulus;
    let axis: Vec<f64> = (0..spec.modulus)
        .map(|x| f[((x as u128 * qs as u128) % spec.modulus as u128) as usize])
        .collect();
    tensor(spec.dim, spec.modulus, &axis)
}

/// Least prime strictly above `x`.
pub fn least_prime_above(x: u64) -> u64 {
    let mut p = x + 1;
    while !num_prime::nt_funcs::is_prime64(p) {
        p += 1;
    }
    p
}

/// `χ_N = structured + uniform`, with `structured = χ_N * φ`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub structured: GridFn,
    pub uniform: GridFn,
}

/// Resolution of the structured part. Rounding to this grid makes the split exact for
/// inputs on the same grid, such as integer-valued functions.
pub const QUANTUM: f64 = 1.0 / (1u64 << 40) as f64;

fn quantize(x: f64) -> f64 {
    (x / QUANTUM).round() * QUANTUM
}

/// Checks nonnegativity, realness and mean 1 within `tol`.
pub fn check_kernel(phi: &GridFn, tol: f64) -> Result<()> {
    let mean = phi.mean();
    if (mean - Complex64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::NotAKernel(format!("mean {mean} differs from 1")));
    }
    if let Some(v) = phi.values().iter().find(|v| v.re < -tol || v.im.abs() > tol) {
        return Err(Error::NotAKernel(format!("value {v} is not a nonnegative real")));
    }
    Ok(())
}

pub fn decompose(chi: &GridFn, phi: &GridFn) -> Result<Decomposition> {
    if chi.dim() != phi.dim() || chi.modulus() != phi.modulus() {
        return Err(Error::ShapeMismatch("function and kernel live on different grids".into()));
    }
    check_kernel(phi, 1e-9)?;
    let mut structured = chi.convolve(phi)?;
    for v in structured.values_mut() {
        *v = Complex64::new(quantize(v.re), quantize(v.im));
    }
    let uniform = chi.sub(&structured)?;
    Ok(Decomposition { structured, uniform })
}

/// Measured counterparts of the structure properties.
#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub modulus: usize,
    pub width: usize,
    pub dilation: u64,
    pub q_report: u64,
    pub d: u32,
    /// `max_{n,i} |s(n + Q_report e_i) − s(n)|`.
    pub shift_difference: f64,
    /// `Ñ` times the shift difference, the measured constant in an `R/Ñ` bound.
    pub shift_difference_scaled: f64,
    /// Number of frequencies carrying the structured part.
    pub spectral_points: usize,
    /// Largest `|ξ_i/Ñ − p_i/Q_report|` over the spectrum with `p_i` nearest.
    pub spectral_distance: f64,
    /// `Ñ` times the spectral distance.
    pub spectral_r: f64,
    /// `(m − 1)/Q`, the bound for `spectral_r` when `Q_report = Q`.
    pub spectral_r_bound: f64,
    pub chi_norm: f64,
    pub structured_norm: f64,
    pub uniform_norm: f64,
    /// `sup |χ̂|` outside the kernel spectrum.
    pub spectral_tail: f64,
    pub max_structured: f64,
    /// Largest `|s + u − χ|`, zero when the split is exact.
    pub reconstruction_error: f64,
}

pub fn structure_report(chi: &GridFn, spec: &KernelSpec, q_report: u64, d: u32) -> Result<StructureReport> {
    if q_report == 0 {
        return Err(Error::Precondition("Q_report must be positive".into()));
    }
    if chi.dim() != spec.dim || chi.modulus() != spec.modulus {
        return Err(Error::ShapeMismatch("function and kernel live on different grids".into()));
    }
    let phi = phi_kernel(spec)?;
    let dec = decompose(chi, &phi)?;
    let s = &dec.structured;
    let dim = spec.dim;
    let n = spec.modulus;

    let mut shift = 0.0f64;
    for i in 0..dim {
        let mut step = vec![0i64; dim];
        step[i] = q_report as i64;
        let t = s.translate(&step);
        for (a, b) in t.values().iter().zip(s.values()) {
            shift = shift.max((a - b).norm());
        }
    }

    let sh = s.dft();
    let ch = chi.dft();
    let scale = chi.sup_norm().max(1.0);
    let mut points = 0usize;
    let mut dist = 0.0f64;
    let mut tail = 0.0f64;
    for idx in 0..sh.len() {
        let xi: Vec<i64> = sh.coords_of(idx).iter().map(|&x| centered(x as i64, n as i64)).collect();
        if !spec.in_spectrum(&xi) {
            tail = tail.max(ch.values()[idx].norm());
            continue;
        }
        if sh.values()[idx].norm() <= 1e-12 * scale {
            continue;
        }
        points += 1;
        for &x in &xi {
            let t = x as f64 / n as f64;
            let p = (t * q_report as f64).round();
            dist = dist.max((t - p / q_report as f64).abs());
        }
    }

    let recon = chi
        .values()
        .iter()
        .zip(s.values().iter().zip(dec.uniform.values()))
        .map(|(c, (a, b))| (a + b - c).norm())
        .fold(0.0, f64::max);

    Ok(StructureReport {
        modulus: n,
        width: spec.width,
        dilation: spec.dilation,
        q_report,
        d,
        shift_difference: shift,
        shift_difference_scaled: shift * n as f64,
        spectral_points: points,
        spectral_distance: dist,
        spectral_r: dist * n as f64,
        spectral_r_bound: (spec.width as f64 - 1.0) / spec.dilation as f64,
        chi_norm: gowers_norm(chi, d)?,
        structured_norm: gowers_norm(s, d)?,
        uniform_norm: gowers_norm(&dec.uniform, d)?,
        spectral_tail: tail,
        max_structured: s.sup_norm(),
        reconstruction_error: recon,
    })
}
