//! Unit search, the logarithmic embedding, and balancing an element by units so that all
//! its conjugates have comparable size.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ideals::IdealLattice;
use crate::numfield::{Field, FieldElement};

/// Independent units with their logarithmic embeddings.
#[derive(Clone, Debug)]
pub struct UnitSystem {
    pub field: Field,
    pub units: Vec<FieldElement>,
    pub log_vectors: Vec<Vec<f64>>,
    /// Whether `units.len()` equals the unit rank.
    pub complete: bool,
}

impl UnitSystem {
    pub fn rank(&self) -> usize {
        self.field.unit_rank()
    }

    /// System built from caller-supplied units; each must have norm ±1.
    pub fn from_units(field: &Field, units: Vec<FieldElement>) -> Result<Self> {
        for u in &units {
            if !u.is_integral() || u.knorm().abs() != crate::exact::q(1) {
                return Err(Error::Precondition(format!("{u} is not a unit")));
            }
        }
        let log_vectors: Vec<Vec<f64>> = units.iter().map(|u| u.log_embedding()).collect();
        let complete = units.len() == field.unit_rank() && float_rank(&log_vectors) == units.len();
        Ok(UnitSystem {
            field: field.clone(),
            units,
            log_vectors,
            complete,
        })
    }
}

/// Numerical rank of a list of vectors.
fn float_rank(vectors: &[Vec<f64>]) -> usize {
    let mut m: Vec<Vec<f64>> = vectors.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len())
            .filter(|&i| m[i][c].abs() > 1e-8)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
        else {
            continue;
        };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank {
                let f = m[i][c] / m[rank][c];
                for j in 0..cols {
                    m[i][j] -= f * m[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Normalizes signs, and for rank one picks the representative with `0 < σ₁(ε) < 1`.
fn normalize(field: &Field, u: FieldElement) -> FieldElement {
    let (r1, _) = field.signature();
    let mut u = u;
    if field.unit_rank() == 1 && r1 > 0 && u.conjugates()[0].norm() > 1.0 {
        u = u.inverse().expect("units are invertible");
    }
    if r1 > 0 && u.conjugates()[0].re < 0.0 {
        u = u.neg();
    }
    u
}

/// Searches for independent units.
///
/// Real quadratic power-basis fields use continued fractions; everything else scans boxes
/// `[-h, h]^D` for `h = 1..=height` in shells of increasing height, greedily keeping units
/// whose logarithmic embeddings are independent of those already kept.
pub fn find_units(field: &Field, height: u32) -> Result<UnitSystem> {
    if height == 0 {
        return Err(Error::Precondition("height must be at least 1".into()));
    }
    let r = field.unit_rank();
    if r == 0 {
        return UnitSystem::from_units(field, vec![]);
    }
    if field.degree() == 2 {
        if let Some(u) = quadratic_unit(field) {
            return UnitSystem::from_units(field, vec![normalize(field, u)]);
        }
    }
    let d = field.degree();
    let mut units: Vec<FieldElement> = Vec::new();
    let mut logs: Vec<Vec<f64>> = Vec::new();
    'outer: for h in 1..=height as i64 {
        let side = 2 * h + 1;
        let total = (side as u64).pow(d as u32);
        let mut v = vec![0i128; d];
        for mut idx in 0..total {
            for x in v.iter_mut() {
                *x = (idx % side as u64) as i128 - h as i128;
                idx /= side as u64;
            }
            if v.iter().all(|x| x.abs() < h as i128) {
                continue;
            }
            if field.norm_int(&v).abs() != 1 {
                continue;
            }
            let u = FieldElement::from_i128(field, &v);
            let w = u.log_embedding();
            if w.iter().all(|x| x.abs() < 1e-9) {
                continue;
            }
            let mut trial = logs.clone();
            trial.push(w.clone());
            if float_rank(&trial) == trial.len() {
                units.push(normalize(field, u));
                logs.push(w);
                if units.len() == r {
                    break 'outer;
                }
            }
        }
    }
    UnitSystem::from_units(field, units)
}

/// Fundamental unit of `Z[θ]` for a real quadratic `θ² + bθ + c`, from the continued
/// fraction of `-θ'` where `θ'` is the smaller root.
fn quadratic_unit(field: &Field) -> Option<FieldElement> {
    let f = field.defining_poly()?;
    let (c, b) = (f[0] as i128, f[1] as i128);
    let disc = b * b - 4 * c;
    if disc <= 4 {
        return None;
    }
    let root = isqrt(disc);
    // -θ' = (b + sqrt(disc)) / 2 as (P + sqrt(disc)) / Q.
    let (mut p, mut qq) = (b, 2i128);
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    for _ in 0..400 {
        let a = (p + root).div_euclid(qq);
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        // x + yθ with x/y ≈ -θ'
        let norm = h1.checked_mul(h1)? - b.checked_mul(h1)?.checked_mul(k1)? + c.checked_mul(k1)?.checked_mul(k1)?;
        if norm.abs() == 1 {
            return Some(FieldElement::from_i128(field, &[h1, k1]));
        }
        p = a * qq - p;
        qq = (disc - p * p) / qq;
        if qq == 0 {
            return None;
        }
    }
    None
}

fn isqrt(n: i128) -> i128 {
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Result of balancing an element.
#[derive(Clone, Debug)]
pub struct Regularized {
    pub unit: FieldElement,
    pub exponents: Vec<i64>,
    pub regularized: FieldElement,
    pub achieved_c: f64,
}

/// Box radii used to measure the regularity constant in low degree.
pub const REGULARITY_SAMPLE: [u64; 3] = [10, 40, 160];

/// Box radii for measuring regularity: [`REGULARITY_SAMPLE`] in degree at most 2, smaller
/// boxes above that.
pub fn regularity_sample(degree: usize) -> Vec<u64> {
    if degree <= 2 {
        REGULARITY_SAMPLE.to_vec()
    } else {
        vec![4, 8]
    }
}

/// Multiplies `a` by a unit product that brings every `log|σ_i|` close to `log|N(a)|/D`.
///
/// The real system over the first `r` places is solved and rounded, then ±1 moves on the
/// exponents are taken while they reduce the largest deviation over all places. Ties go to
/// the lexicographically smallest exponent vector.
pub fn regularize(a: &FieldElement, system: &UnitSystem) -> Result<Regularized> {
    regularize_with(a, system, &regularity_sample(a.field().degree()))
}

pub fn regularize_with(a: &FieldElement, system: &UnitSystem, sample: &[u64]) -> Result<Regularized> {
    if a.is_zero() {
        return Err(Error::Precondition("cannot regularize zero".into()));
    }
    if !system.complete {
        return Err(Error::RegularizationUnavailable(format!(
            "unit system has {} of {} independent units",
            system.units.len(),
            system.rank()
        )));
    }
    let field = a.field();
    let r = system.rank();
    let exponents = if r == 0 {
        vec![]
    } else {
        let d = field.degree() as f64;
        let target = crate::exact::q_to_f64(&a.knorm()).abs().ln() / d;
        let base: Vec<f64> = a.place_values().iter().map(|z| z.norm().ln()).collect();
        // Per place, per unit.
        let unit_logs: Vec<Vec<f64>> = system
            .units
            .iter()
            .map(|u| u.place_values().iter().map(|z| z.norm().ln()).collect())
            .collect();
        let spread = |x: &[i64]| -> f64 {
            base.iter()
                .enumerate()
                .map(|(i, b)| {
                    let v = b + x.iter().zip(&unit_logs).map(|(&e, l)| e as f64 * l[i]).sum::<f64>();
                    (v - target).abs()
                })
                .fold(0.0, f64::max)
        };
        let mut sys: Vec<Vec<f64>> = (0..r)
            .map(|i| {
                let mut row: Vec<f64> = (0..r).map(|j| unit_logs[j][i]).collect();
                row.push(target - base[i]);
                row
            })
            .collect();
        let real = solve_dense(&mut sys)
            .ok_or_else(|| Error::RegularizationUnavailable("logarithmic system is singular".into()))?;
        let mut best: Vec<i64> = real.iter().map(|x| x.round() as i64).collect();
        let mut best_val = spread(&best);
        for _ in 0..64 {
            let mut cand = best.clone();
            let mut cand_val = best_val;
            for code in 0..3usize.pow(r as u32) {
                let mut c = code;
                let x: Vec<i64> = best
                    .iter()
                    .map(|&e| {
                        let step = (c % 3) as i64 - 1;
                        c /= 3;
                        e + step
                    })
                    .collect();
                let v = spread(&x);
                if v < cand_val - 1e-12 || ((v - cand_val).abs() <= 1e-12 && x < cand) {
                    cand_val = v;
                    cand = x;
                }
            }
            if cand == best {
                break;
            }
            best = cand;
            best_val = cand_val;
        }
        best
    };
    let mut unit = FieldElement::one(field);
    for (u, &e) in system.units.iter().zip(&exponents) {
        let base = if e < 0 { u.inverse().expect("units are invertible") } else { u.clone() };
        unit = unit.mul(&base.pow(e.unsigned_abs() as u32));
    }
    let regularized = unit.mul(a);
    let achieved_c = sample
        .iter()
        .map(|&n| regularity_constant(&regularized, n))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Regularized {
        unit,
        exponents,
        regularized,
        achieved_c,
    })
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(m: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = m.len();
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[p][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, p);
        for i in 0..n {
            if i != c {
                let f = m[i][c] / m[c][c];
                for j in c..=n {
                    m[i][j] -= f * m[c][j];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Smallest C with `a⁻¹R_N ⊆ R_{C |N(a)|^{-1/D} N}`, by enumerating `aO_K ∩ R_N`.
pub fn regularity_constant(a: &FieldElement, n: u64) -> Result<f64> {
    let (adj, norm) = adjugate(a)?;
    let field = a.field();
    let ideal = IdealLattice::principal(a)?;
    let mut max_coord = 0i128;
    let mut overflow = false;
    ideal.hnf().for_each_in_box(n as i64, |y| {
        let y: Vec<i128> = y.iter().map(|&v| v as i128).collect();
        // z = y / a = y adj(a) / N(a)
        let z = field.mul_int(&y, &adj);
        for c in z {
            match c.checked_abs() {
                Some(v) => max_coord = max_coord.max(v),
                None => overflow = true,
            }
        }
    });
    if overflow {
        return Err(Error::Numeric {
            message: "coordinates overflow during regularity enumeration".into(),
            achieved: f64::INFINITY,
        });
    }
    let d = field.degree() as f64;
    let norm_abs = norm.unsigned_abs() as f64;
    let max_z = max_coord as f64 / norm_abs;
    Ok(max_z / (norm_abs.powf(-1.0 / d) * n as f64))
}

/// `N(a) a⁻¹` as integral coordinates, with `N(a)`.
fn adjugate(a: &FieldElement) -> Result<(Vec<i128>, i128)> {
    if !a.is_integral() || a.is_zero() {
        return Err(Error::Precondition(format!("{a} must be integral and nonzero")));
    }
    let norm = a.knorm();
    let inv = a.inverse().expect("nonzero elements are invertible");
    let adj = inv.scale(&norm);
    let coords = adj
        .to_i128()
        .ok_or_else(|| Error::Precondition("adjugate exceeds 128 bits".into()))?;
    let n: BigInt = norm.to_integer();
    let n = n
        .to_i128()
        .filter(|v| !v.is_zero())
        .ok_or_else(|| Error::Precondition("norm exceeds 128 bits".into()))?;
    Ok((coords, n))
}

/// Whether every integral z with `a z ∈ R_N` has coordinates at most `C |N(a)|^{-1/D} N`.
pub fn regularity_check(a: &FieldElement, c: f64, n: u64) -> Result<bool> {
    Ok(regularity_constant(a, n)? <= c * (1.0 + 1e-12))
}
