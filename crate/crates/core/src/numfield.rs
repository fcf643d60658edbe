//! Number fields given by an integral basis and its multiplication table.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{q, q_to_f64, Q, RatPoly, RationalMatrix};

/// Shared handle to a field specification.
pub type Field = Arc<FieldSpec>;

/// Degree, integral basis multiplication table and coordinates of 1.
///
/// `c[i][j][k]` gives `b_i b_j = sum_k c[i][j][k] b_k`.
pub struct FieldSpec {
    label: String,
    degree: usize,
    table: Vec<i64>,
    one: Vec<i64>,
    defining_poly: Option<Vec<i64>>,
    embeddings: OnceLock<Embeddings>,
}

/// Complex embeddings evaluated on the basis.
#[derive(Clone, Debug)]
pub struct Embeddings {
    /// Number of real embeddings.
    pub r1: usize,
    /// Number of conjugate pairs.
    pub r2: usize,
    /// `basis_images[s][k]` is the image of `b_k` under embedding `s`. Real embeddings come
    /// first in descending order, then each complex pair as adjacent entries with the
    /// positive imaginary part first.
    pub basis_images: Vec<Vec<Complex64>>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("label", &self.label)
            .field("degree", &self.degree)
            .field("defining_poly", &self.defining_poly)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.degree == other.degree
            && self.table == other.table
            && self.one == other.one
    }
}

impl Eq for FieldSpec {}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 5] = ["Q", "Qi", "Qsqrt2", "Qsqrt-3", "Qsqrt2sqrt3"];

/// One of the shipped fields.
///
/// `Qsqrt-3` uses the basis `{1, (1+sqrt(-3))/2}`. `Qsqrt2sqrt3` uses the power basis of
/// `(sqrt2+sqrt6)/2`, root of `t^4 - 4t^2 + 1`, which generates the full ring of integers.
pub fn builtin(name: &str) -> Result<Field> {
    let poly: &[i64] = match name {
        "Q" => &[0, 1],
        "Qi" => &[1, 0, 1],
        "Qsqrt2" => &[-2, 0, 1],
        "Qsqrt-3" => &[1, -1, 1],
        "Qsqrt2sqrt3" => &[1, 0, -4, 0, 1],
        _ => {
            return Err(Error::InvalidField(format!(
                "unknown builtin field {name:?}; expected one of {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    FieldSpec::from_poly(name, poly)
}

impl FieldSpec {
    /// Field `Q[t]/(f)` with power basis `1, t, ..., t^(D-1)`; `coeffs` ascending, monic.
    pub fn from_poly(label: &str, coeffs: &[i64]) -> Result<Field> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidField("defining polynomial must have degree at least 1".into()));
        }
        if *coeffs.last().unwrap() != 1 {
            return Err(Error::InvalidField("defining polynomial must be monic".into()));
        }
        let d = coeffs.len() - 1;
        let f = RatPoly::from_i64(coeffs);
        if f.gcd(&f.derivative()).degree() != Some(0) {
            return Err(Error::InvalidField("defining polynomial has a repeated factor".into()));
        }
        if d > 1 && has_integer_root(coeffs) {
            return Err(Error::InvalidField("defining polynomial has a rational root".into()));
        }
        // Powers t^0 .. t^(2D-2) reduced mod f.
        let mut powers: Vec<Vec<i64>> = Vec::with_capacity(2 * d - 1);
        let mut cur = vec![0i64; d];
        cur[0] = 1;
        for _ in 0..(2 * d - 1) {
            powers.push(cur.clone());
            // multiply by t
            let top = cur[d - 1];
            let mut next = vec![0i64; d];
            next[1..d].copy_from_slice(&cur[..(d - 1)]);
            for k in 0..d {
                next[k] = next[k]
                    .checked_sub(top.checked_mul(coeffs[k]).ok_or_else(overflow)?)
                    .ok_or_else(overflow)?;
            }
            cur = next;
        }
        let mut table = vec![0i64; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    table[(i * d + j) * d + k] = powers[i + j][k];
                }
            }
        }
        let mut one = vec![0i64; d];
        one[0] = 1;
        Ok(Arc::new(FieldSpec {
            label: label.to_string(),
            degree: d,
            table,
            one,
            defining_poly: Some(coeffs.to_vec()),
            embeddings: OnceLock::new(),
        }))
    }

    /// Field given by an explicit multiplication table `table[(i*D + j)*D + k]`.
    pub fn from_table(label: &str, degree: usize, table: Vec<i64>, one: Vec<i64>) -> Result<Field> {
        let d = degree;
        if d == 0 {
            return Err(Error::InvalidField("degree must be positive".into()));
        }
        if table.len() != d * d * d || one.len() != d {
            return Err(Error::InvalidField(format!(
                "table needs {} entries and one needs {d}",
                d * d * d
            )));
        }
        let spec = FieldSpec {
            label: label.to_string(),
            degree: d,
            table,
            one,
            defining_poly: None,
            embeddings: OnceLock::new(),
        };
        spec.validate_table()?;
        Ok(Arc::new(spec))
    }

    fn validate_table(&self) -> Result<()> {
        let d = self.degree;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if self.c(i, j, k) != self.c(j, i, k) {
                        return Err(Error::InvalidField(format!("not commutative at b{i}*b{j}")));
                    }
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    // (b_i b_j) b_l versus b_i (b_j b_l)
                    for t in 0..d {
                        let lhs: i128 = (0..d)
                            .map(|k| self.c(i, j, k) as i128 * self.c(k, l, t) as i128)
                            .sum();
                        let rhs: i128 = (0..d)
                            .map(|k| self.c(j, l, k) as i128 * self.c(i, k, t) as i128)
                            .sum();
                        if lhs != rhs {
                            return Err(Error::InvalidField(format!(
                                "not associative at (b{i}, b{j}, b{l})"
                            )));
                        }
                    }
                }
            }
        }
        let one: Vec<i128> = self.one.iter().map(|&x| x as i128).collect();
        for i in 0..d {
            let mut e = vec![0i128; d];
            e[i] = 1;
            if self.mul_int(&one, &e) != e {
                return Err(Error::InvalidField(format!("one does not fix b{i}")));
            }
        }
        if self.discriminant().is_zero() {
            return Err(Error::InvalidField("trace form is degenerate".into()));
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn defining_poly(&self) -> Option<&[i64]> {
        self.defining_poly.as_deref()
    }

    pub fn one_coords(&self) -> &[i64] {
        &self.one
    }

    /// Structure constant `c[i][j][k]`.
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> i64 {
        self.table[(i * self.degree + j) * self.degree + k]
    }

    /// Product of integral coordinate vectors.
    pub fn mul_int(&self, x: &[i128], y: &[i128]) -> Vec<i128> {
        let d = self.degree;
        let mut out = vec![0i128; d];
        for i in 0..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0 {
                    continue;
                }
                let xy = x[i] * y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.c(i, j, k);
                    if c != 0 {
                        *o += xy * c as i128;
                    }
                }
            }
        }
        out
    }

    /// Regular representation of an integral element: row `i` holds the coordinates of `x b_i`.
    pub fn matrix_int(&self, x: &[i128]) -> Vec<Vec<i128>> {
        let d = self.degree;
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|k| (0..d).map(|j| x[j] * self.c(j, i, k) as i128).sum())
                    .collect()
            })
            .collect()
    }

    /// Norm of an integral element, exactly.
    pub fn norm_int(&self, x: &[i128]) -> i128 {
        bareiss_det(self.matrix_int(x))
    }

    /// Discriminant of the basis, `det(Tr(b_i b_j))`.
    pub fn discriminant(&self) -> Q {
        let d = self.degree;
        let traces: Vec<i64> = (0..d)
            .map(|k| (0..d).map(|i| self.c(k, i, i)).sum())
            .collect();
        let m = RationalMatrix::from_rows(
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| q((0..d).map(|k| self.c(i, j, k) * traces[k]).sum()))
                        .collect()
                })
                .collect(),
        );
        m.det()
    }

    /// Complex embeddings, computed on first use.
    pub fn embeddings(&self) -> &Embeddings {
        self.embeddings.get_or_init(|| self.compute_embeddings())
    }

    /// Signature `(r1, r2)`.
    pub fn signature(&self) -> (usize, usize) {
        let e = self.embeddings();
        (e.r1, e.r2)
    }

    /// Rank of the unit group, `r1 + r2 - 1`.
    pub fn unit_rank(&self) -> usize {
        let (r1, r2) = self.signature();
        r1 + r2 - 1
    }

    fn compute_embeddings(&self) -> Embeddings {
        let d = self.degree;
        // Primitive element: b_1 for power bases, otherwise the first small combination
        // with a squarefree characteristic polynomial of full degree.
        let prim: Vec<i128> = self.primitive_element();
        let a = self.matrix_int(&prim);
        let charpoly = RationalMatrix::from_rows(
            a.iter().map(|r| r.iter().map(|&x| q(x as i64)).collect()).collect(),
        )
        .charpoly();
        let roots = poly_roots(&charpoly.to_f64());
        let (reals, pairs) = classify_roots(&roots);
        let mut ordered: Vec<Complex64> = reals.clone();
        for z in &pairs {
            ordered.push(*z);
            ordered.push(z.conj());
        }
        let af: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let one: Vec<f64> = self.one.iter().map(|&x| x as f64).collect();
        let basis_images = ordered
            .iter()
            .map(|&lambda| {
                if self.defining_poly.is_some() && d > 1 {
                    // s_k = theta^k
                    let mut s = Vec::with_capacity(d);
                    let mut p = Complex64::new(1.0, 0.0);
                    for _ in 0..d {
                        s.push(p);
                        p *= lambda;
                    }
                    s
                } else {
                    let s = null_vector(&af, lambda);
                    let scale: Complex64 = s.iter().zip(&one).map(|(x, o)| x * o).sum();
                    s.iter().map(|x| x / scale).collect()
                }
            })
            .collect();
        Embeddings {
            r1: reals.len(),
            r2: pairs.len(),
            basis_images,
        }
    }

    fn primitive_element(&self) -> Vec<i128> {
        let d = self.degree;
        if d == 1 {
            return vec![self.one[0] as i128];
        }
        let mut candidates: Vec<Vec<i128>> = Vec::new();
        if self.defining_poly.is_some() {
            let mut e = vec![0i128; d];
            e[1] = 1;
            candidates.push(e);
        }
        for i in 0..d {
            let mut e = vec![0i128; d];
            e[i] = 1;
            candidates.push(e);
        }
        for t in 1..50i128 {
            candidates.push((0..d).map(|i| (i as i128 + 1) * t % 7 + i as i128).collect());
        }
        for x in candidates {
            let m = RationalMatrix::from_rows(
                self.matrix_int(&x)
                    .iter()
                    .map(|r| r.iter().map(|&v| q(v as i64)).collect())
                    .collect(),
            );
            let cp = m.charpoly();
            if cp.gcd(&cp.derivative()).degree() == Some(0) {
                return x;
            }
        }
        unreachable!("a separable algebra has a primitive element among small combinations")
    }
}

fn overflow() -> Error {
    Error::InvalidField("coefficients overflow 64-bit reduction".into())
}

fn has_integer_root(coeffs: &[i64]) -> bool {
    let c0 = coeffs[0];
    if c0 == 0 {
        return true;
    }
    let eval = |x: i128| coeffs.iter().rev().fold(0i128, |acc, &c| acc.saturating_mul(x).saturating_add(c as i128));
    let n = c0.unsigned_abs();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            for r in [d, n / d] {
                for s in [r as i128, -(r as i128)] {
                    if eval(s) == 0 {
                        return true;
                    }
                }
            }
        }
        d += 1;
    }
    false
}

/// Determinant of an integer matrix by fraction-free elimination.
pub fn bareiss_det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return 0;
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Roots of a monic real polynomial (ascending coefficients) by Weierstrass iteration
/// followed by Newton polishing.
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let c: Vec<f64> = coeffs.iter().map(|x| x / lead).collect();
    if n == 1 {
        return vec![Complex64::new(-c[0], 0.0)];
    }
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::zero(), |acc, &a| acc * z + a);
    let deval = |z: Complex64| {
        c.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::zero(), |acc, (i, &a)| acc * z + a * i as f64)
    };
    let radius = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for k in 0..n {
            let mut denom = Complex64::one();
            for j in 0..n {
                if j != k {
                    denom *= z[k] - z[j];
                }
            }
            let step = eval(z[k]) / denom;
            z[k] -= step;
            delta = delta.max(step.norm() / (1.0 + z[k].norm()));
        }
        if delta < 1e-15 {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let d = deval(*zk);
            if d.norm() == 0.0 {
                break;
            }
            *zk -= eval(*zk) / d;
        }
    }
    z
}

/// Splits roots of a real polynomial into real roots (descending) and representatives of
/// conjugate pairs with positive imaginary part (descending by real then imaginary part).
fn classify_roots(roots: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut reals: Vec<Complex64> = Vec::new();
    let mut uppers: Vec<Complex64> = Vec::new();
    for z in roots {
        if z.im.abs() <= 1e-9 * (1.0 + z.norm()) {
            reals.push(Complex64::new(z.re, 0.0));
        } else if z.im > 0.0 {
            uppers.push(*z);
        }
    }
    reals.sort_by(|a, b| b.re.total_cmp(&a.re));
    uppers.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    (reals, uppers)
}

/// A nonzero column vector `s` with `A s = lambda s`.
fn null_vector(a: &[Vec<f64>], lambda: Complex64) -> Vec<Complex64> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Complex64::new(a[i][j], 0.0) - if i == j { lambda } else { Complex64::zero() })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == n {
            break;
        }
        let (p, best) = (r..n)
            .map(|i| (i, m[i][c].norm()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let scale: f64 = m.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
        if best <= 1e-9 * scale.max(1.0) {
            continue;
        }
        m.swap(r, p);
        let piv = m[r][c];
        for j in 0..n {
            m[r][j] /= piv;
        }
        for i in 0..n {
            if i != r {
                let f = m[i][c];
                for j in 0..n {
                    let v = m[r][j] * f;
                    m[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..n).find(|c| !pivots.contains(c)).unwrap_or(n - 1);
    let mut s = vec![Complex64::zero(); n];
    s[free] = Complex64::one();
    for (i, &c) in pivots.iter().enumerate() {
        if c != free {
            s[c] = -m[i][free];
        }
    }
    s
}

/// Element of a field as rational coordinates over the integral basis.
#[derive(Clone, Debug)]
pub struct FieldElement {
    field: Field,
    coords: Vec<Q>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.field, &other.field) || self.field == other.field) && self.coords == other.coords
    }
}

impl Eq for FieldElement {}

/// Classification of an eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenKind {
    Real,
    ComplexPair,
}

impl FieldElement {
    pub fn new(field: &Field, coords: Vec<Q>) -> Result<Self> {
        if coords.len() != field.degree {
            return Err(Error::ShapeMismatch(format!(
                "{} coordinates given for a degree-{} field",
                coords.len(),
                field.degree
            )));
        }
        Ok(FieldElement {
            field: field.clone(),
            coords,
        })
    }

    /// Integral element from integer coordinates; panics on a length mismatch.
    pub fn from_int(field: &Field, coords: &[i64]) -> Self {
        assert_eq!(coords.len(), field.degree, "coordinate count must equal the degree");
        FieldElement {
            field: field.clone(),
            coords: coords.iter().map(|&c| q(c)).collect(),
        }
    }

    pub fn from_i128(field: &Field, coords: &[i128]) -> Self {
        assert_eq!(coords.len(), field.degree, "coordinate count must equal the degree");
        FieldElement {
            field: field.clone(),
            coords: coords
                .iter()
                .map(|&c| Q::from_integer(c.into()))
                .collect(),
        }
    }

    /// The rational number `r` viewed in the field.
    pub fn from_rational(field: &Field, r: &Q) -> Self {
        FieldElement {
            field: field.clone(),
            coords: field.one.iter().map(|&c| q(c) * r).collect(),
        }
    }

    pub fn one(field: &Field) -> Self {
        Self::from_int(field, &field.one.clone())
    }

    pub fn zero(field: &Field) -> Self {
        FieldElement {
            field: field.clone(),
            coords: vec![Q::zero(); field.degree],
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    /// Integer coordinates when integral and within `i128`.
    pub fn to_i128(&self) -> Option<Vec<i128>> {
        self.coords
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_i128() } else { None })
            .collect()
    }

    /// Integer coordinates when integral and within `i64`.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.coords
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None })
            .collect()
    }

    fn check_same(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field == other.field,
            "elements belong to different fields"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same(other);
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, r: &Q) -> Self {
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().map(|a| a * r).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_same(other);
        let d = self.field.degree;
        if let (Some(x), Some(y)) = (self.small_int(), other.small_int()) {
            return Self::from_i128(&self.field, &self.field.mul_int(&x, &y));
        }
        let mut out = vec![Q::zero(); d];
        for i in 0..d {
            if self.coords[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if other.coords[j].is_zero() {
                    continue;
                }
                let xy = &self.coords[i] * &other.coords[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.field.c(i, j, k);
                    if c != 0 {
                        *o += &xy * q(c);
                    }
                }
            }
        }
        FieldElement {
            field: self.field.clone(),
            coords: out,
        }
    }

    /// Integer coordinates small enough that a product cannot overflow `i128`.
    fn small_int(&self) -> Option<Vec<i128>> {
        const LIMIT: i128 = 1 << 40;
        let v = self.to_i128()?;
        let small = v.iter().all(|x| x.abs() < LIMIT) && self.field.table.iter().all(|c| c.abs() < 1 << 20);
        small.then_some(v)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(&self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Multiplicative inverse, or `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // iota^-1(y) A(x) = iota^-1(1)
        let a = self.embed_matrix();
        let one: Vec<Q> = self.field.one.iter().map(|&c| q(c)).collect();
        let y = a.transpose().solve(&one)?;
        Some(FieldElement {
            field: self.field.clone(),
            coords: y,
        })
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        Some(self.mul(&other.inverse()?))
    }

    /// Regular representation `A(x)`: row `i` holds the coordinates of `x b_i`.
    pub fn embed_matrix(&self) -> RationalMatrix {
        let d = self.field.degree;
        let mut m = RationalMatrix::zero(d, d);
        for i in 0..d {
            for k in 0..d {
                let mut acc = Q::zero();
                for j in 0..d {
                    let c = self.field.c(j, i, k);
                    if c != 0 && !self.coords[j].is_zero() {
                        acc += &self.coords[j] * q(c);
                    }
                }
                m.set(i, k, acc);
            }
        }
        m
    }

    /// Field norm `det A(x)`.
    pub fn knorm(&self) -> Q {
        if let Some(x) = self.small_int() {
            let m = self.field.matrix_int(&x);
            // Fraction-free elimination stays inside i128 for these sizes.
            if self.field.degree <= 4 && m.iter().flatten().all(|v| v.abs() < 1 << 20) {
                return Q::from_integer(bareiss_det(m).into());
            }
        }
        self.embed_matrix().det()
    }

    /// Trace of `A(x)`.
    pub fn trace(&self) -> Q {
        let a = self.embed_matrix();
        (0..a.rows).map(|i| a.get(i, i).clone()).sum()
    }

    pub fn char_poly(&self) -> RatPoly {
        self.embed_matrix().charpoly()
    }

    /// Minimal polynomial over Q, from the first linear dependency among powers of `x`.
    pub fn min_poly(&self) -> RatPoly {
        let mut powers = vec![Self::one(&self.field).coords];
        let mut cur = Self::one(&self.field);
        loop {
            cur = cur.mul(self);
            if let Some(c) = crate::exact::express_in_span(&powers, &cur.coords) {
                let mut coeffs: Vec<Q> = c.into_iter().map(|x| -x).collect();
                coeffs.push(Q::one());
                return RatPoly::new(coeffs);
            }
            powers.push(cur.coords.clone());
        }
    }

    /// Images under all embeddings, ordered as [`Embeddings::basis_images`].
    pub fn conjugates(&self) -> Vec<Complex64> {
        let coords: Vec<f64> = self.coords.iter().map(q_to_f64).collect();
        self.field
            .embeddings()
            .basis_images
            .iter()
            .map(|s| s.iter().zip(&coords).map(|(b, x)| b * x).sum())
            .collect()
    }

    /// One conjugate per place: the real ones, then one per complex pair.
    pub fn place_values(&self) -> Vec<Complex64> {
        let e = self.field.embeddings();
        let all = self.conjugates();
        let mut out: Vec<Complex64> = all[..e.r1].to_vec();
        out.extend((0..e.r2).map(|k| all[e.r1 + 2 * k]));
        out
    }

    /// Logarithmic embedding `(log|lambda_1|, ..., log|lambda_r|)` over the first `r = r1+r2-1` places.
    pub fn log_embedding(&self) -> Vec<f64> {
        let r = self.field.unit_rank();
        self.place_values()[..r].iter().map(|z| z.norm().ln()).collect()
    }

    /// Eigenvalues of `A(x)` with their kinds; fails when the estimated error exceeds `precision`.
    pub fn eigen_data(&self, precision: f64) -> Result<Vec<(Complex64, EigenKind)>> {
        if !(precision > 0.0) {
            return Err(Error::Precondition("precision must be positive".into()));
        }
        let e = self.field.embeddings();
        let mut vals = self.conjugates();
        let mp = self.min_poly();
        let coeffs = mp.to_f64();
        let eval = |z: Complex64| coeffs.iter().rev().fold(Complex64::zero(), |acc, &a| acc * z + a);
        let dcoeffs = mp.derivative().to_f64();
        let deval = |z: Complex64| dcoeffs.iter().rev().fold(Complex64::zero(), |acc, &a| acc * z + a);
        let mut achieved = 0.0f64;
        for (i, v) in vals.iter_mut().enumerate() {
            // Newton refinement on the squarefree minimal polynomial.
            for _ in 0..2 {
                let d = deval(*v);
                if d.norm() > 0.0 {
                    *v -= eval(*v) / d;
                }
            }
            if i < e.r1 {
                v.im = 0.0;
            }
            let d = deval(*v);
            let err = if d.norm() > 0.0 {
                eval(*v).norm() / d.norm()
            } else if eval(*v).norm() == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            // Floating-point floor relative to the magnitude.
            let floor = 4.0 * f64::EPSILON * (1.0 + v.norm());
            achieved = achieved.max(err.max(floor));
        }
        if achieved > precision {
            return Err(Error::Numeric {
                message: "eigenvalues not resolved to the requested precision".into(),
                achieved,
            });
        }
        Ok(vals
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, if i < e.r1 { EigenKind::Real } else { EigenKind::ComplexPair }))
            .collect())
    }

    /// Largest absolute coordinate.
    pub fn height(&self) -> Q {
        self.coords.iter().map(|c| c.abs()).max().unwrap_or_else(Q::zero)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(BigRational::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_have_expected_signatures() {
        assert_eq!(builtin("Q").unwrap().signature(), (1, 0));
        assert_eq!(builtin("Qi").unwrap().signature(), (0, 1));
        assert_eq!(builtin("Qsqrt2").unwrap().signature(), (2, 0));
        assert_eq!(builtin("Qsqrt-3").unwrap().signature(), (0, 1));
        assert_eq!(builtin("Qsqrt2sqrt3").unwrap().signature(), (4, 0));
    }

    #[test]
    fn discriminants_match_known_values() {
        assert_eq!(builtin("Qi").unwrap().discriminant(), q(-4));
        assert_eq!(builtin("Qsqrt2").unwrap().discriminant(), q(8));
        assert_eq!(builtin("Qsqrt-3").unwrap().discriminant(), q(-3));
        assert_eq!(builtin("Qsqrt2sqrt3").unwrap().discriminant(), q(2304));
    }

    #[test]
    fn real_embeddings_are_descending() {
        let k = builtin("Qsqrt2").unwrap();
        let s = FieldElement::from_int(&k, &[0, 1]).conjugates();
        assert!((s[0].re - 2f64.sqrt()).abs() < 1e-12);
        assert!((s[1].re + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn table_field_rejects_non_identity() {
        let k = builtin("Qi").unwrap();
        let err = FieldSpec::from_table("bad", 2, k.table.clone(), vec![0, 1]).unwrap_err();
        assert!(matches!(err, Error::InvalidField(_)));
    }

    #[test]
    fn table_field_without_one_in_basis() {
        // Z[i] with basis {1+i, i}: 1 = b0 - b1.
        // b0^2 = 2i = 2 b1; b0 b1 = i - 1 = -b0 + 2 b1; b1^2 = -1 = -b0 + b1.
        let table = vec![0, 2, -1, 2, -1, 2, -1, 1];
        let k = FieldSpec::from_table("Zi-skew", 2, table, vec![1, -1]).unwrap();
        assert_eq!(k.signature(), (0, 1));
        let x = FieldElement::from_int(&k, &[1, 0]);
        assert_eq!(x.knorm(), q(2));
        assert_eq!(x.min_poly(), RatPoly::from_i64(&[2, -2, 1]));
        let vals = x.eigen_data(1e-9).unwrap();
        assert!((vals[0].0 - Complex64::new(1.0, 1.0)).norm() < 1e-9);
    }
}
