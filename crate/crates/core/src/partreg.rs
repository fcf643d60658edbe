//! K-type polynomials: quadratic parametrizations over multiquadratic towers, exact identity
//! checks, multiplicative Følner sets, finite multiple averages and monochromatic search.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{q, qr, Q};
use crate::ideals::{primes_above, IdealLattice, PrimeIdeal};
use crate::multfn::{MultFnSpec, MultKind};
use crate::numfield::{Field, FieldElement, FieldSpec};

// ---------------------------------------------------------------------------------------
// Multiquadratic towers

/// `Q(√s₁,…,√s_g)` on the basis `√S = ∏_{i∈S} √sᵢ`, indexed by bitmask, with
/// `√S·√T = (∏_{S∩T} sᵢ)·√(S△T)`.
#[derive(Clone, Debug)]
pub struct Tower {
    pub field: Field,
    /// GF(2)-independent squarefree radicands, sign included.
    pub generators: Vec<i64>,
    /// Squarefree kernel of every basis product, with its bitmask.
    span: Vec<(i128, usize)>,
}

fn squarefree_split(n: i128) -> Result<(i128, i128)> {
    let a = n.unsigned_abs();
    let a64 = u64::try_from(a).map_err(|_| Error::Precondition(format!("{n} is too large to factor")))?;
    let mut kernel: i128 = n.signum();
    let mut root: i128 = 1;
    for (p, e) in num_prime::nt_funcs::factorize64(a64) {
        let p = p as i128;
        if e % 2 == 1 {
            kernel *= p;
        }
        root *= p.pow((e / 2) as u32);
    }
    Ok((kernel, root))
}

fn squarefree_mul(a: i128, b: i128) -> i128 {
    let g = a.gcd(&b);
    (a / g) * (b / g)
}

impl Tower {
    /// Adjoins the square roots of `radicands`, skipping any already in the field.
    pub fn new(radicands: &[i128]) -> Result<Tower> {
        let mut generators: Vec<i64> = Vec::new();
        let mut span: Vec<(i128, usize)> = vec![(1, 0)];
        for &r in radicands {
            if r == 0 {
                continue;
            }
            let (s, _) = squarefree_split(r)?;
            if span.iter().any(|&(k, _)| k == s) {
                continue;
            }
            let bit = 1usize << generators.len();
            let grown: Vec<(i128, usize)> = span.iter().map(|&(k, m)| (squarefree_mul(k, s), m | bit)).collect();
            span.extend(grown);
            generators.push(i64::try_from(s).map_err(|_| Error::Precondition(format!("radicand {s} too large")))?);
        }
        let d = 1usize << generators.len();
        let mut table = vec![0i64; d * d * d];
        for s in 0..d {
            for t in 0..d {
                let c: i64 = (0..generators.len()).filter(|i| (s & t) >> i & 1 == 1).map(|i| generators[i]).product();
                table[(s * d + t) * d + (s ^ t)] = c;
            }
        }
        let mut one = vec![0i64; d];
        one[0] = 1;
        let label = if generators.is_empty() {
            "Q".to_string()
        } else {
            let parts: Vec<String> = generators.iter().map(|g| format!("sqrt({g})")).collect();
            format!("Q({})", parts.join(","))
        };
        let field = FieldSpec::from_table(&label, d, table, one)?;
        Ok(Tower { field, generators, span })
    }

    /// A square root of the integer `n` in the tower.
    pub fn sqrt(&self, n: i128) -> Result<FieldElement> {
        if n == 0 {
            return Ok(FieldElement::zero(&self.field));
        }
        let (s, t) = squarefree_split(n)?;
        let &(_, mask) = self
            .span
            .iter()
            .find(|&&(k, _)| k == s)
            .ok_or_else(|| Error::Precondition(format!("sqrt({n}) is not in {}", self.field.label())))?;
        // ∏_{mask} sᵢ = s·r²
        let prod: i128 = (0..self.generators.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.generators[i] as i128)
            .product();
        let r = squarefree_split(prod / s)?.1;
        let mut coords = vec![Q::zero(); self.field.degree()];
        coords[mask] = qr(t as i64, r as i64);
        FieldElement::new(&self.field, coords)
    }
}

// ---------------------------------------------------------------------------------------
// Polynomials in (k, m, n)

/// Polynomial in `(k, m, n)` with coefficients in a number field.
#[derive(Clone, Debug)]
pub struct KPoly {
    field: Field,
    terms: BTreeMap<[u32; 3], FieldElement>,
}

impl KPoly {
    pub fn zero(field: &Field) -> Self {
        KPoly { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(c: &FieldElement) -> Self {
        let mut p = Self::zero(c.field());
        p.insert([0, 0, 0], c.clone());
        p
    }

    /// The variable `k` (0), `m` (1) or `n` (2).
    pub fn var(field: &Field, i: usize) -> Self {
        let mut e = [0u32; 3];
        e[i] = 1;
        let mut p = Self::zero(field);
        p.insert(e, FieldElement::one(field));
        p
    }

    /// `m + a·n`.
    pub fn linear(a: &FieldElement) -> Self {
        let f = a.field();
        Self::var(f, 1).add(&Self::var(f, 2).scale(a))
    }

    fn insert(&mut self, e: [u32; 3], c: FieldElement) {
        let sum = match self.terms.remove(&e) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(e, sum);
        }
    }

    pub fn terms(&self) -> &BTreeMap<[u32; 3], FieldElement> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        KPoly {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(&self.field);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.insert([e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]], c1.mul(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &FieldElement) -> Self {
        let mut out = Self::zero(&self.field);
        for (e, x) in &self.terms {
            out.insert(*e, x.mul(c));
        }
        out
    }

    pub fn scale_q(&self, r: &Q) -> Self {
        self.scale(&FieldElement::from_rational(&self.field, r))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(&FieldElement::one(&self.field));
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, kmn: &[FieldElement; 3]) -> FieldElement {
        self.terms.iter().fold(FieldElement::zero(&self.field), |acc, (e, c)| {
            acc.add(&c.mul(&kmn[0].pow(e[0])).mul(&kmn[1].pow(e[1])).mul(&kmn[2].pow(e[2])))
        })
    }
}

impl fmt::Display for KPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mut s = c.to_string();
                for (name, &x) in ["k", "m", "n"].iter().zip(e) {
                    match x {
                        0 => {}
                        1 => s.push_str(&format!("*{name}")),
                        _ => s.push_str(&format!("*{name}^{x}")),
                    }
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------------------
// K-type specifications

/// Which parametrization of the quadratic case was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QuadCase {
    /// `Δ₃² = 0`, `Δ₁² ≠ Δ₂²`.
    VanishingThird,
    /// `Δ₃² ≠ 0`.
    General,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadInfo {
    /// `(a, b, c, d, e, f)` of `ax² + by² + cz² + dxy + exz + fyz`.
    pub coeffs: [i64; 6],
    /// `(Δ₁², Δ₂², Δ₃²)`.
    pub deltas_sq: [i128; 3],
    pub case: QuadCase,
    /// Radicands adjoined to Q.
    pub radicands: Vec<i64>,
}

/// Polynomial `p(x, y; z₁,…,z_r)` with a family of solutions
/// `x = x_scale·k∏(m + aᵢn)`, `y = y_scale·k∏(m + a′ᵢn)`, `z = z(k, m, n)`.
#[derive(Clone, Debug)]
pub struct KTypeSpec {
    pub field: Field,
    pub shifts: Vec<FieldElement>,
    pub shifts_prime: Vec<FieldElement>,
    pub x_scale: FieldElement,
    pub y_scale: FieldElement,
    /// Monomials over `(x, y, z₁,…,z_r)` with rational coefficients.
    pub poly: Vec<(Vec<u32>, Q)>,
    /// Alternative parametrizations of `(z₁,…,z_r)`, such as both signs of a square root.
    pub z: Vec<Vec<KPoly>>,
    pub quad: Option<QuadInfo>,
}

fn distinct(v: &[FieldElement]) -> bool {
    v.iter().enumerate().all(|(i, a)| v[..i].iter().all(|b| b != a))
}

fn same_set(a: &[FieldElement], b: &[FieldElement]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

/// Checks that the shifts are pairwise distinct on each side and differ as sets.
pub fn check_shifts(a: &[FieldElement], a_prime: &[FieldElement]) -> Result<()> {
    if a.is_empty() || a.len() != a_prime.len() {
        return Err(Error::Precondition("shift lists must be nonempty and of equal length".into()));
    }
    if !distinct(a) || !distinct(a_prime) {
        return Err(Error::Precondition("shifts on one side are not pairwise distinct".into()));
    }
    if same_set(a, a_prime) {
        return Err(Error::Precondition("the two shift sets coincide".into()));
    }
    Ok(())
}

impl KTypeSpec {
    pub fn new(
        field: &Field,
        shifts: Vec<FieldElement>,
        shifts_prime: Vec<FieldElement>,
        x_scale: FieldElement,
        y_scale: FieldElement,
        poly: Vec<(Vec<u32>, Q)>,
        z: Vec<Vec<KPoly>>,
    ) -> Result<Self> {
        check_shifts(&shifts, &shifts_prime)?;
        let foreign = shifts.iter().chain(&shifts_prime).chain([&x_scale, &y_scale]).any(|a| a.field() != field);
        if foreign {
            return Err(Error::ShapeMismatch("shifts and scales must live in the spec field".into()));
        }
        if x_scale.is_zero() || y_scale.is_zero() {
            return Err(Error::Precondition("scales must be nonzero".into()));
        }
        let r = z.first().map_or(0, Vec::len);
        if z.is_empty() || z.iter().any(|v| v.len() != r) {
            return Err(Error::ShapeMismatch("every z variant needs the same number of entries".into()));
        }
        if poly.iter().any(|(e, _)| e.len() != 2 + r) {
            return Err(Error::ShapeMismatch(format!("monomials must have {} exponents", 2 + r)));
        }
        Ok(KTypeSpec { field: field.clone(), shifts, shifts_prime, x_scale, y_scale, poly, z, quad: None })
    }

    pub fn d(&self) -> usize {
        self.shifts.len()
    }

    fn side(&self, scale: &FieldElement, shifts: &[FieldElement]) -> KPoly {
        shifts
            .iter()
            .fold(KPoly::var(&self.field, 0).scale(scale), |acc, a| acc.mul(&KPoly::linear(a)))
    }

    pub fn x(&self) -> KPoly {
        self.side(&self.x_scale, &self.shifts)
    }

    pub fn y(&self) -> KPoly {
        self.side(&self.y_scale, &self.shifts_prime)
    }

    /// `(x, y)` at a point, evaluated factor by factor.
    pub fn xy_at(&self, kmn: &[FieldElement; 3]) -> (FieldElement, FieldElement) {
        let [k, m, n] = kmn;
        let side = |scale: &FieldElement, shifts: &[FieldElement]| {
            shifts.iter().fold(k.mul(scale), |acc, a| acc.mul(&m.add(&a.mul(n))))
        };
        (side(&self.x_scale, &self.shifts), side(&self.y_scale, &self.shifts_prime))
    }

    /// `p` at field values of its variables.
    pub fn eval_poly(&self, vars: &[FieldElement]) -> FieldElement {
        self.poly.iter().fold(FieldElement::zero(&self.field), |acc, (e, c)| {
            let t = e
                .iter()
                .zip(vars)
                .fold(FieldElement::from_rational(&self.field, c), |t, (&k, v)| t.mul(&v.pow(k)));
            acc.add(&t)
        })
    }

    /// `p` composed with the parametrization, for the z variant `v`.
    pub fn composed(&self, v: usize) -> KPoly {
        let mut vars = vec![self.x(), self.y()];
        vars.extend(self.z[v].iter().cloned());
        self.poly.iter().fold(KPoly::zero(&self.field), |acc, (e, c)| {
            let t = e
                .iter()
                .zip(&vars)
                .fold(KPoly::constant(&FieldElement::from_rational(&self.field, c)), |t, (&k, p)| t.mul(&p.pow(k)));
            acc.add(&t)
        })
    }

    pub fn summary(&self) -> KTypeSummary {
        KTypeSummary {
            field: self.field.label().to_string(),
            degree: self.field.degree(),
            d: self.d(),
            shifts: self.shifts.iter().map(coord_strings).collect(),
            shifts_prime: self.shifts_prime.iter().map(coord_strings).collect(),
            poly: self.poly.iter().map(|(e, c)| (e.clone(), c.to_string())).collect(),
            x: self.x().to_string(),
            y: self.y().to_string(),
            z: self.z.iter().map(|v| v.iter().map(ToString::to_string).collect()).collect(),
            quad: self.quad.clone(),
        }
    }
}

/// JSON view of a [`KTypeSpec`]; field elements as coordinate strings.
#[derive(Clone, Debug, Serialize)]
pub struct KTypeSummary {
    pub field: String,
    pub degree: usize,
    pub d: usize,
    pub shifts: Vec<Vec<String>>,
    pub shifts_prime: Vec<Vec<String>>,
    pub poly: Vec<(Vec<u32>, String)>,
    pub x: String,
    pub y: String,
    pub z: Vec<Vec<String>>,
    pub quad: Option<QuadInfo>,
}

pub fn coord_strings(x: &FieldElement) -> Vec<String> {
    x.coords().iter().map(ToString::to_string).collect()
}

fn quad_monomials(c: [i64; 6]) -> Vec<(Vec<u32>, Q)> {
    let exps = [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]];
    exps.iter()
        .zip(c)
        .filter(|(_, c)| *c != 0)
        .map(|(e, c)| (e.to_vec(), q(c)))
        .collect()
}

/// Parametrization of `ax² + by² + cz² + dxy + exz + fyz` over `Q(Δ₁, Δ₂, Δ₃)`.
pub fn quad_parametrization(a: i64, b: i64, c: i64, d: i64, e: i64, f: i64) -> Result<KTypeSpec> {
    let (a1, b1, c1, d1, e1, f1) = (a as i128, b as i128, c as i128, d as i128, e as i128, f as i128);
    let ds = [
        e1 * e1 - 4 * a1 * c1,
        f1 * f1 - 4 * b1 * c1,
        (e1 + f1) * (e1 + f1) - 4 * c1 * (a1 + b1 + d1),
    ];
    if c == 0 {
        return Err(Error::UnsupportedCase("(i) c = 0".into()));
    }
    let zeros = ds.iter().filter(|&&x| x == 0).count();
    let one_zero_rest_equal = (0..3).any(|i| {
        let rest: Vec<i128> = (0..3).filter(|&j| j != i).map(|j| ds[j]).collect();
        ds[i] == 0 && rest[0] == rest[1]
    });
    if zeros > 0 && one_zero_rest_equal {
        return Err(Error::UnsupportedCase(format!(
            "(ii) one of the squared deltas {ds:?} vanishes and the other two are equal"
        )));
    }
    if ds[0] == 0 || ds[1] == 0 {
        return Err(Error::UnsupportedCase(format!(
            "(iii) a squared delta in {ds:?} vanishes and the other differs from the third"
        )));
    }

    let tower = Tower::new(&ds)?;
    let k = &tower.field;
    let delta: Vec<FieldElement> = ds.iter().map(|&x| tower.sqrt(x)).collect::<Result<_>>()?;
    let cst = |x: i128| FieldElement::from_rational(k, &Q::from_integer(BigInt::from(x)));
    let cc = cst(c1);
    let (km, mm, nm) = (KPoly::var(k, 0), KPoly::var(k, 1), KPoly::var(k, 2));

    let (case, sa, sb, zp) = if ds[2] == 0 {
        // x′ = k(m−Δ₂n)(m+Δ₂n), y′ = k(m−Δ₁n)(m+Δ₁n), z′ = ±k(Δ₁²−Δ₂²)mn
        let sa = vec![delta[1].neg(), delta[1].clone()];
        let sb = vec![delta[0].neg(), delta[0].clone()];
        let zp = km.mul(&mm).mul(&nm).scale(&cst(ds[0] - ds[1]));
        (QuadCase::VanishingThird, sa, sb, zp)
    } else {
        let (d1, d2, d3) = (&delta[0], &delta[1], &delta[2]);
        let sq2 = cst(ds[1]);
        let sa = vec![cc.mul(&sq2.add(&d2.mul(d3))), cc.mul(&sq2.sub(&d2.mul(d3)))];
        let base = cst(ds[1] - ds[2]);
        let sb = vec![cc.mul(&base.add(&d1.mul(d3))), cc.mul(&base.sub(&d1.mul(d3)))];
        // z′ = ±kΔ₃(m² + c(Δ₁²+Δ₂²−Δ₃²)mn + c²Δ₁²Δ₂²n²)
        let quad = mm
            .pow(2)
            .add(&mm.mul(&nm).scale(&cst(c1 * (ds[0] + ds[1] - ds[2]))))
            .add(&nm.pow(2).scale(&cst(c1 * c1 * ds[0] * ds[1])));
        (QuadCase::General, sa, sb, km.mul(&quad).scale(d3))
    };

    // Original variables: x = 2c·x′, y = 2c·y′, z = z′ − e·x′ − f·y′.
    let xp = sa.iter().fold(km.clone(), |acc, s| acc.mul(&KPoly::linear(s)));
    let yp = sb.iter().fold(km.clone(), |acc, s| acc.mul(&KPoly::linear(s)));
    let lin = xp.scale(&cst(e1)).add(&yp.scale(&cst(f1)));
    let z = vec![vec![zp.sub(&lin)], vec![zp.neg().sub(&lin)]];
    let two_c = cc.add(&cc);
    let mut spec = KTypeSpec::new(k, sa, sb, two_c.clone(), two_c, quad_monomials([a, b, c, d, e, f]), z)?;
    spec.quad = Some(QuadInfo {
        coeffs: [a, b, c, d, e, f],
        deltas_sq: ds,
        case,
        radicands: tower.generators.clone(),
    });
    Ok(spec)
}

/// `x₁² − 2x₂² + z₁² − z₂²` over `Q(√−3)` with `x₁ = k(m+n)(m−n)` and
/// `x₂ = k(m+ωn)(m+ω̄n)`, `ω = (−1+√−3)/2`.
///
/// With `W = 2x₂² − x₁²` the pair `z₁ = (W+1)/2`, `z₂ = (W−1)/2` has `z₁² − z₂² = W`.
pub fn gerardin_spec() -> Result<KTypeSpec> {
    let (field, sa, sb) = gerardin_shifts()?;
    let one = FieldElement::one(&field);
    let poly = vec![(vec![2, 0, 0, 0], q(1)), (vec![0, 2, 0, 0], q(-2)), (vec![0, 0, 2, 0], q(1)), (vec![0, 0, 0, 2], q(-1))];
    let x = sa.iter().fold(KPoly::var(&field, 0), |acc, s| acc.mul(&KPoly::linear(s)));
    let y = sb.iter().fold(KPoly::var(&field, 0), |acc, s| acc.mul(&KPoly::linear(s)));
    let w = y.pow(2).scale_q(&q(2)).sub(&x.pow(2));
    let half = qr(1, 2);
    let unit = KPoly::constant(&one);
    let z1 = w.add(&unit).scale_q(&half);
    let z2 = w.sub(&unit).scale_q(&half);
    KTypeSpec::new(&field, sa, sb, one.clone(), one, poly, vec![vec![z1.clone(), z2.clone()], vec![z1, z2.neg()]])
}

/// The quartic form of the Gérardin identity,
/// `x₁⁴ − 2x₂⁴ + z₁⁴ + z₂⁴` with `z₁ = k(m²−2mn)`, `z₂ = k(n²−2mn)` and the same `x₁, x₂`.
pub fn gerardin_quartic_spec() -> Result<KTypeSpec> {
    let (field, sa, sb) = gerardin_shifts()?;
    let one = FieldElement::one(&field);
    let poly = vec![(vec![4, 0, 0, 0], q(1)), (vec![0, 4, 0, 0], q(-2)), (vec![0, 0, 4, 0], q(1)), (vec![0, 0, 0, 4], q(1))];
    let (km, mm, nm) = (KPoly::var(&field, 0), KPoly::var(&field, 1), KPoly::var(&field, 2));
    let mn2 = mm.mul(&nm).scale_q(&q(2));
    let z1 = km.mul(&mm.pow(2).sub(&mn2));
    let z2 = km.mul(&nm.pow(2).sub(&mn2));
    KTypeSpec::new(&field, sa, sb, one.clone(), one, poly, vec![vec![z1, z2]])
}

fn gerardin_shifts() -> Result<(Field, Vec<FieldElement>, Vec<FieldElement>)> {
    let tower = Tower::new(&[-3])?;
    let field = tower.field.clone();
    let root = tower.sqrt(-3)?;
    let one = FieldElement::one(&field);
    let half = qr(1, 2);
    let omega = one.neg().add(&root).scale(&half);
    let omega_bar = one.neg().sub(&root).scale(&half);
    Ok((field, vec![one.clone(), one.neg()], vec![omega, omega_bar]))
}

/// Both sides of `(m²−n²)⁴ + (2mn+m²)⁴ + (2mn+n²)⁴ = 2(m²+mn+n²)⁴`.
pub fn gerardin_identity(m: i64, n: i64) -> (BigInt, BigInt) {
    let (m, n) = (BigInt::from(m), BigInt::from(n));
    let p4 = |x: BigInt| x.pow(4);
    let lhs = p4(&m * &m - &n * &n) + p4(BigInt::from(2) * &m * &n + &m * &m) + p4(BigInt::from(2) * &m * &n + &n * &n);
    let rhs = BigInt::from(2) * p4(&m * &m + &m * &n + &n * &n);
    (lhs, rhs)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub field: String,
    pub trials: usize,
    pub variants: usize,
    /// The composed polynomial vanishes identically.
    pub symbolic_zero: bool,
    /// Number of point evaluations, all with residual exactly 0.
    pub evaluations: usize,
}

fn random_element(field: &Field, rng: &mut ChaCha8Rng) -> FieldElement {
    let coords = (0..field.degree())
        .map(|_| qr(rng.gen_range(-20..=20), rng.gen_range(1..=3)))
        .collect();
    FieldElement::new(field, coords).expect("degree matches")
}

/// Checks `p(x, y; z) = 0` for the parametrization, symbolically and at `trials` random
/// points `(k, m, n)` of the field drawn from `seed`.
pub fn verify_identity(spec: &KTypeSpec, trials: usize, seed: u64) -> Result<IdentityReport> {
    for v in 0..spec.z.len() {
        let res = spec.composed(v);
        if !res.is_zero() {
            return Err(Error::IdentityViolation { witness: format!("variant {v}: p∘param = {res}") });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[FieldElement; 3]> = (0..trials)
        .map(|_| std::array::from_fn(|_| random_element(&spec.field, &mut rng)))
        .collect();
    let failure = points.par_iter().find_map_first(|kmn| {
        let (x, y) = spec.xy_at(kmn);
        spec.z.iter().enumerate().find_map(|(v, zs)| {
            let mut vars = vec![x.clone(), y.clone()];
            vars.extend(zs.iter().map(|z| z.eval(kmn)));
            let r = spec.eval_poly(&vars);
            (!r.is_zero()).then(|| format!("k={}, m={}, n={}, variant {v}: residual {r}", kmn[0], kmn[1], kmn[2]))
        })
    });
    if let Some(witness) = failure {
        return Err(Error::IdentityViolation { witness });
    }
    Ok(IdentityReport {
        field: spec.field.label().to_string(),
        trials,
        variants: spec.z.len(),
        symbolic_zero: true,
        evaluations: trials * spec.z.len(),
    })
}

// ---------------------------------------------------------------------------------------
// Multiplicative Følner sets

/// `Φ_N = {n ∈ O_K : (n) ⊇ (I₁⋯I_N)^N}` within a search height.
#[derive(Clone, Debug)]
pub struct FolnerSet {
    pub field: Field,
    pub n: usize,
    /// `(p, norm)` of `I₁,…,I_N`.
    pub primes: Vec<(u64, BigInt)>,
    /// One generator per divisor ideal, in exponent-vector order.
    pub generators: Vec<FieldElement>,
    pub units: Vec<FieldElement>,
    /// Generators times units, deduplicated and sorted by coordinates.
    pub elements: Vec<FieldElement>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FolnerSummary {
    pub field: String,
    pub n: usize,
    pub primes: Vec<(u64, String)>,
    pub divisors: usize,
    pub units: usize,
    pub size: usize,
    pub elements: Vec<Vec<String>>,
}

impl FolnerSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        self.elements.binary_search_by(|e| e.coords().cmp(x.coords())).is_ok()
    }

    pub fn summary(&self) -> FolnerSummary {
        FolnerSummary {
            field: self.field.label().to_string(),
            n: self.n,
            primes: self.primes.iter().map(|(p, nm)| (*p, nm.to_string())).collect(),
            divisors: self.generators.len(),
            units: self.units.len(),
            size: self.len(),
            elements: self.elements.iter().map(coord_strings).collect(),
        }
    }
}

/// Largest `N` accepted by [`folner_set`].
pub const FOLNER_MAX: usize = 3;

/// First `count` prime ideals ordered by norm, ties by HNF.
pub fn first_primes(field: &Field, count: usize) -> Result<Vec<PrimeIdeal>> {
    let mut found: Vec<PrimeIdeal> = Vec::new();
    let mut p = 2u64;
    loop {
        // every prime above q ≥ p has norm ≥ p
        let settled = found.iter().filter(|i| i.norm() < BigInt::from(p)).count();
        if settled >= count {
            break;
        }
        found.extend(primes_above(field, p)?);
        p = crate::kernels::least_prime_above(p);
    }
    found.sort_by(|a, b| a.norm().cmp(&b.norm()).then_with(|| a.lattice.hnf().rows().cmp(b.lattice.hnf().rows())));
    found.truncate(count);
    Ok(found)
}

fn units_in_box(field: &Field, height: i64) -> Vec<FieldElement> {
    let mut out = Vec::new();
    crate::lattice::Hnf::identity(field.degree()).for_each_in_box(height, |v| {
        let w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        if field.norm_int(&w).abs() == 1 {
            out.push(FieldElement::from_int(field, v));
        }
    });
    out
}

/// Element of `ideal` with norm equal to the ideal norm, searching boxes of growing height.
pub fn find_generator(ideal: &IdealLattice, height: i64) -> Option<FieldElement> {
    let field = ideal.field();
    let target = ideal.norm();
    for h in 0..=height {
        let mut hit: Option<Vec<i64>> = None;
        ideal.hnf().for_each_in_box(h, |v| {
            if hit.is_some() {
                return;
            }
            let w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
            if BigInt::from(field.norm_int(&w).abs()) == target {
                hit = Some(v.to_vec());
            }
        });
        if let Some(v) = hit {
            return Some(FieldElement::from_int(field, &v));
        }
    }
    None
}

pub fn folner_set(field: &Field, n: usize, height: i64) -> Result<FolnerSet> {
    if n > FOLNER_MAX {
        return Err(Error::Precondition(format!("N = {n} exceeds the cap {FOLNER_MAX}")));
    }
    let primes = first_primes(field, n)?;
    let units = units_in_box(field, height);
    let mut generators = Vec::new();
    let mut missing = Vec::new();
    let exps = (n as u32 + 1).pow(n as u32);
    for code in 0..exps {
        let mut ideal = IdealLattice::unit(field);
        let mut c = code;
        let mut ev = Vec::with_capacity(n);
        for pr in &primes {
            let e = c % (n as u32 + 1);
            c /= n as u32 + 1;
            ev.push(e);
            ideal = ideal.mul(&pr.lattice.pow(e)?)?;
        }
        match find_generator(&ideal, height) {
            Some(g) => generators.push(g),
            None => missing.push(format!("{ev:?}")),
        }
    }
    let mut elements: Vec<FieldElement> = generators.iter().flat_map(|g| units.iter().map(move |u| g.mul(u))).collect();
    elements.sort_by(|a, b| a.coords().cmp(b.coords()));
    elements.dedup();
    if !missing.is_empty() {
        return Err(Error::PartialSet {
            wanted: exps as usize,
            found: generators.iter().filter_map(FieldElement::to_i64).collect(),
            detail: format!("no generator within height {height} for exponent vectors {}", missing.join(" ")),
        });
    }
    Ok(FolnerSet {
        field: field.clone(),
        n,
        primes: primes.iter().map(|p| (p.p, p.norm())).collect(),
        generators,
        units,
        elements,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FolnerRatio {
    pub size: usize,
    /// `|a⁻¹Φ|`.
    pub preimage: usize,
    pub symmetric_difference: usize,
    pub ratio: f64,
}

/// `|a⁻¹Φ △ Φ| / |Φ|` with `a⁻¹Φ = {y ∈ O_K : ay ∈ Φ}`.
pub fn folner_ratio(set: &FolnerSet, a: &FieldElement) -> Result<FolnerRatio> {
    let inv = a.inverse().ok_or_else(|| Error::Precondition("a must be nonzero".into()))?;
    let pre: Vec<FieldElement> = set.elements.iter().map(|x| x.mul(&inv)).filter(FieldElement::is_integral).collect();
    let inside = pre.iter().filter(|y| set.contains(y)).count();
    let sd = (pre.len() - inside) + (set.len() - inside);
    Ok(FolnerRatio {
        size: set.len(),
        preimage: pre.len(),
        symmetric_difference: sd,
        ratio: sd as f64 / set.len().max(1) as f64,
    })
}

/// `|E ∩ Φ_N| / |Φ_N|`.
pub fn mult_density(set: &FolnerSet, member: impl Fn(&FieldElement) -> bool) -> Q {
    let hits = set.elements.iter().filter(|x| member(x)).count();
    qr(hits as i64, set.len().max(1) as i64)
}

// ---------------------------------------------------------------------------------------
// Multiple averages

#[derive(Clone, Debug, Serialize)]
pub struct MultAverage {
    pub value: Complex64,
    pub pairs: u64,
    /// Pairs with some `m + aᵢn = 0` or `m + a′ᵢn = 0`.
    pub degenerate: u64,
    pub degenerate_fraction: f64,
}

/// Largest table of χ values built for one shift.
pub const MULT_TABLE_CAP: u128 = 1 << 26;

struct ShiftTable {
    shift: Vec<Vec<i128>>,
    lo: Vec<i128>,
    side: Vec<i128>,
    values: Vec<Complex64>,
}

impl ShiftTable {
    fn build(chi: &MultFnSpec, a: &[i128], n: i64) -> Result<Self> {
        let field = chi.field();
        let dim = field.degree();
        // column j of the multiplication-by-a matrix: row i is coord i of a·bⱼ
        let rows = field.matrix_int(a);
        let mut lo = vec![1i128; dim];
        let mut hi = vec![n as i128; dim];
        for t in 0..dim {
            for row in rows.iter().take(dim) {
                let c = row[t];
                if c >= 0 {
                    lo[t] += c;
                    hi[t] += c * n as i128;
                } else {
                    lo[t] += c * n as i128;
                    hi[t] += c;
                }
            }
        }
        let side: Vec<i128> = lo.iter().zip(&hi).map(|(l, h)| h - l + 1).collect();
        let volume: u128 = side.iter().map(|&s| s as u128).product();
        if volume > MULT_TABLE_CAP {
            return Err(Error::Precondition(format!("value table of size {volume} exceeds {MULT_TABLE_CAP}")));
        }
        let values = (0..volume as usize)
            .into_par_iter()
            .map(|idx| {
                let mut rem = idx as i128;
                let mut v = vec![0i128; dim];
                for t in (0..dim).rev() {
                    v[t] = lo[t] + rem % side[t];
                    rem /= side[t];
                }
                chi.eval_int(&v)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ShiftTable { shift: rows, lo, side, values })
    }

    fn at(&self, m: &[i128], n: &[i128]) -> (Complex64, bool) {
        let dim = m.len();
        let mut idx = 0i128;
        let mut zero = true;
        for t in 0..dim {
            let v = m[t] + (0..dim).map(|j| self.shift[j][t] * n[j]).sum::<i128>();
            zero &= v == 0;
            idx = idx * self.side[t] + (v - self.lo[t]);
        }
        (self.values[idx as usize], zero)
    }
}

/// `E_{m,n ∈ ι([N]^D)} ∏χ(m + aᵢn)·∏conj χ(m + a′ᵢn)` for a completely multiplicative χ of
/// unit modulus.
pub fn mult_average(chi: &MultFnSpec, a: &[FieldElement], a_prime: &[FieldElement], n: i64) -> Result<MultAverage> {
    match chi.kind() {
        MultKind::One | MultKind::Liouville | MultKind::CompletelyMultiplicative { .. } => {}
        _ => {
            return Err(Error::Precondition("χ must be completely multiplicative with unit modulus".into()));
        }
    }
    check_shifts(a, a_prime)?;
    if n < 1 {
        return Err(Error::Precondition("N must be positive".into()));
    }
    let field = chi.field();
    let dim = field.degree();
    let ints = |s: &[FieldElement]| -> Result<Vec<Vec<i128>>> {
        s.iter()
            .map(|x| {
                if x.field() != field {
                    return Err(Error::ShapeMismatch("shifts must live in the field of χ".into()));
                }
                x.to_i128().ok_or_else(|| Error::Precondition(format!("shift {x} is not integral")))
            })
            .collect()
    };
    let tabs = |s: Vec<Vec<i128>>| -> Result<Vec<ShiftTable>> { s.iter().map(|x| ShiftTable::build(chi, x, n)).collect() };
    let ta = tabs(ints(a)?)?;
    let tb = tabs(ints(a_prime)?)?;

    let side = n as usize;
    let count = side.pow(dim as u32);
    let point = |idx: usize| -> Vec<i128> {
        let mut rem = idx;
        let mut v = vec![0i128; dim];
        for t in (0..dim).rev() {
            v[t] = (rem % side) as i128 + 1;
            rem /= side;
        }
        v
    };
    let partial: Vec<(Complex64, u64)> = (0..count)
        .into_par_iter()
        .map(|mi| {
            let m = point(mi);
            let mut sum = Complex64::new(0.0, 0.0);
            let mut degenerate = 0u64;
            for ni in 0..count {
                let nn = point(ni);
                let mut prod = Complex64::new(1.0, 0.0);
                let mut zero = false;
                for t in &ta {
                    let (v, z) = t.at(&m, &nn);
                    zero |= z;
                    prod *= v;
                }
                for t in &tb {
                    let (v, z) = t.at(&m, &nn);
                    zero |= z;
                    prod *= v.conj();
                }
                if zero {
                    degenerate += 1;
                } else {
                    sum += prod;
                }
            }
            (sum, degenerate)
        })
        .collect();
    let pairs = (count * count) as u64;
    let (sum, degenerate) = partial
        .iter()
        .fold((Complex64::new(0.0, 0.0), 0u64), |(s, d), (x, y)| (s + x, d + y));
    Ok(MultAverage {
        value: sum / pairs as f64,
        pairs,
        degenerate,
        degenerate_fraction: degenerate as f64 / pairs as f64,
    })
}

// ---------------------------------------------------------------------------------------
// Monochromatic search

/// Finite colorings of O_K by coordinates. A color is a short integer label.
#[derive(Clone, Debug)]
pub enum Coloring {
    Constant,
    /// Coordinates mod 2; the parity coloring on Z.
    Parity,
    /// Residue class mod an ideal.
    Residue(IdealLattice),
    /// Explicit table; elements missing from it are uncolored and never match.
    Table(HashMap<Vec<i64>, i64>),
}

impl Coloring {
    pub fn color(&self, v: &[i128]) -> Option<Vec<i64>> {
        match self {
            Coloring::Constant => Some(Vec::new()),
            Coloring::Parity => Some(v.iter().map(|x| x.rem_euclid(2) as i64).collect()),
            Coloring::Residue(ideal) => {
                let w: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
                ideal.hnf().reduce(&w).iter().map(ToPrimitive::to_i64).collect()
            }
            Coloring::Table(t) => {
                let key: Option<Vec<i64>> = v.iter().map(|&x| i64::try_from(x).ok()).collect();
                key.and_then(|k| t.get(&k)).map(|&c| vec![c])
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ColoringWitness {
    pub k: Vec<i64>,
    pub m: Vec<i64>,
    pub n: Vec<i64>,
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub z: Vec<Vec<String>>,
    pub variant: usize,
    pub color: Vec<i64>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SearchOutcome {
    Witness(ColoringWitness),
    Exhausted { scanned: u64 },
}

/// Position `i` of the ordering `0, 1, −1, 2, −2, …` of Z.
fn zigzag(i: usize) -> i64 {
    let h = i.div_ceil(2) as i64;
    if i % 2 == 1 {
        h
    } else {
        -h
    }
}

/// First `(k, m, n)` with coordinates in `[−h, h]`, ordered lexicographically with each
/// coordinate running through `0, 1, −1, 2, −2, …`, whose `x` and `y` are distinct, nonzero,
/// integral and of one color, and whose `z` values are integral for some variant.
pub fn coloring_search(spec: &KTypeSpec, coloring: &Coloring, height: u32) -> Result<SearchOutcome> {
    let dim = spec.field.degree();
    let side = 2 * height as usize + 1;
    let slice = side
        .checked_pow(dim as u32)
        .filter(|s| s.checked_mul(*s).is_some())
        .ok_or_else(|| Error::Precondition("search box too large".into()))?;
    let vec_of = |mut idx: usize| -> Vec<i64> {
        let mut v = vec![0i64; dim];
        for t in (0..dim).rev() {
            v[t] = zigzag(idx % side);
            idx /= side;
        }
        v
    };
    let field = &spec.field;
    let hit = (0..slice).into_par_iter().find_map_first(|ki| {
        let k = vec_of(ki);
        if k.iter().all(|&c| c == 0) {
            return None;
        }
        let ke = FieldElement::from_int(field, &k);
        for mni in 0..slice * slice {
            let (m, n) = (vec_of(mni / slice), vec_of(mni % slice));
            let kmn = [ke.clone(), FieldElement::from_int(field, &m), FieldElement::from_int(field, &n)];
            let (x, y) = spec.xy_at(&kmn);
            if x.is_zero() || y.is_zero() || x == y {
                continue;
            }
            let (Some(xi), Some(yi)) = (x.to_i128(), y.to_i128()) else { continue };
            let Some(color) = coloring.color(&xi) else { continue };
            if coloring.color(&yi).as_ref() != Some(&color) {
                continue;
            }
            let found = spec.z.iter().enumerate().find_map(|(v, zs)| {
                let vals: Vec<FieldElement> = zs.iter().map(|z| z.eval(&kmn)).collect();
                vals.iter().all(FieldElement::is_integral).then_some((v, vals))
            });
            if let Some((variant, zv)) = found {
                return Some(ColoringWitness {
                    k: k.clone(),
                    m,
                    n,
                    x: coord_strings(&x),
                    y: coord_strings(&y),
                    z: zv.iter().map(coord_strings).collect(),
                    variant,
                    color,
                });
            }
        }
        None
    });
    Ok(match hit {
        Some(w) => SearchOutcome::Witness(w),
        None => SearchOutcome::Exhausted { scanned: (slice * slice * slice) as u64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_skips_dependent_radicands() {
        let t = Tower::new(&[8, 12, 24]).unwrap();
        assert_eq!(t.generators, vec![2, 3]);
        let r = t.sqrt(24).unwrap();
        assert_eq!(r.mul(&r), FieldElement::from_int(&t.field, &[24, 0, 0, 0]));
    }

    #[test]
    fn gerardin_sides_agree() {
        let (l, r) = gerardin_identity(2, 1);
        assert_eq!(l, BigInt::from(81 + 4096 + 625));
        assert_eq!(r, BigInt::from(2 * 2401));
    }
}
