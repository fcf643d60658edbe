//! Symmetric multilinear forms and their diagonal restrictions, the automorphism extraction
//! by column reduction, and the minimal polynomial of eigenvalue products.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{q, RatPoly, RationalMatrix, Q};
use crate::nilseq::multi_indices;
use crate::numfield::FieldElement;

/// All index tuples `(i_1, …, i_m)` in `{0..D}^m`, lexicographic.
fn tuples(dim: usize, m: usize) -> Vec<Vec<usize>> {
    (0..dim.pow(m as u32))
        .map(|mut idx| {
            let mut t = vec![0usize; m];
            for x in t.iter_mut().rev() {
                *x = idx % dim;
                idx /= dim;
            }
            t
        })
        .collect()
}

/// Exponent vector `j` of an index tuple: `j_k` counts occurrences of `k`.
fn type_of(t: &[usize], dim: usize) -> Vec<u32> {
    let mut j = vec![0u32; dim];
    for &i in t {
        j[i] += 1;
    }
    j
}

/// `m! / (j_1! ⋯ j_D!)`.
pub fn multinomial(j: &[u32]) -> BigInt {
    let m: u32 = j.iter().sum();
    let fact = |k: u32| (1..=k).fold(BigInt::one(), |a, x| a * x);
    j.iter().fold(fact(m), |a, &x| a / fact(x))
}

/// Symmetric m-linear form `(Q^D)^m → Q^s` stored as its full coefficient tensor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymForm {
    dim: usize,
    m: usize,
    s: usize,
    /// `coeffs[t]` for index tuples in lexicographic order.
    coeffs: Vec<Vec<Q>>,
}

impl SymForm {
    /// Validates shape and symmetry under index permutations.
    pub fn new(dim: usize, m: usize, s: usize, coeffs: Vec<Vec<Q>>) -> Result<Self> {
        if dim == 0 || m == 0 || s == 0 {
            return Err(Error::Precondition("D, m and s must be positive".into()));
        }
        if coeffs.len() != dim.pow(m as u32) || coeffs.iter().any(|c| c.len() != s) {
            return Err(Error::ShapeMismatch(format!("expected {} coefficients of length {s}", dim.pow(m as u32))));
        }
        let f = SymForm { dim, m, s, coeffs };
        for (k, t) in tuples(dim, m).iter().enumerate() {
            let mut sorted = t.clone();
            sorted.sort_unstable();
            if f.coeffs[k] != f.coeffs[f.flat(&sorted)] {
                return Err(Error::Precondition(format!("coefficients are not symmetric at {t:?}")));
            }
        }
        Ok(f)
    }

    pub fn zero(dim: usize, m: usize, s: usize) -> Result<Self> {
        Self::new(dim, m, s, vec![vec![Q::zero(); s]; dim.pow(m as u32)])
    }

    fn flat(&self, t: &[usize]) -> usize {
        t.iter().fold(0, |a, &i| a * self.dim + i)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn out_dim(&self) -> usize {
        self.s
    }

    pub fn coeff(&self, t: &[usize]) -> &[Q] {
        &self.coeffs[self.flat(t)]
    }

    pub fn coeffs(&self) -> &[Vec<Q>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|x| x.is_zero())
    }

    /// `L(n_1, …, n_m)`.
    pub fn eval(&self, args: &[Vec<Q>]) -> Result<Vec<Q>> {
        if args.len() != self.m || args.iter().any(|a| a.len() != self.dim) {
            return Err(Error::ShapeMismatch(format!("{} arguments of length {} expected", self.m, self.dim)));
        }
        let mut out = vec![Q::zero(); self.s];
        for (k, t) in tuples(self.dim, self.m).iter().enumerate() {
            let w = t.iter().zip(args).fold(q(1), |a, (&i, n)| a * &n[i]);
            if !w.is_zero() {
                for (o, u) in out.iter_mut().zip(&self.coeffs[k]) {
                    *o += u * &w;
                }
            }
        }
        Ok(out)
    }
}

/// Homogeneous degree-m polynomial `R(n) = Σ_{|j| = m} v_j n^j` with values in `Q^s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagForm {
    dim: usize,
    m: usize,
    s: usize,
    /// Pairs `(j, v_j)` over all `|j| = m`, in the order of [`multi_indices`].
    terms: Vec<(Vec<u32>, Vec<Q>)>,
}

impl DiagForm {
    /// Builds from the listed terms; missing exponents get zero coefficients.
    pub fn new(dim: usize, m: usize, s: usize, terms: &[(Vec<u32>, Vec<Q>)]) -> Result<Self> {
        if dim == 0 || m == 0 || s == 0 {
            return Err(Error::Precondition("D, m and s must be positive".into()));
        }
        let mut all: Vec<(Vec<u32>, Vec<Q>)> = multi_indices(dim, m as u32)
            .into_iter()
            .filter(|j| j.iter().sum::<u32>() as usize == m)
            .map(|j| (j, vec![Q::zero(); s]))
            .collect();
        for (j, v) in terms {
            if v.len() != s {
                return Err(Error::ShapeMismatch(format!("coefficient of length {} for s = {s}", v.len())));
            }
            let slot = all
                .iter_mut()
                .find(|(k, _)| k == j)
                .ok_or_else(|| Error::ShapeMismatch(format!("{j:?} is not an exponent of degree {m}")))?;
            for (a, b) in slot.1.iter_mut().zip(v) {
                *a += b;
            }
        }
        Ok(DiagForm { dim, m, s, terms: all })
    }

    pub fn terms(&self) -> &[(Vec<u32>, Vec<Q>)] {
        &self.terms
    }

    pub fn coeff(&self, j: &[u32]) -> Option<&[Q]> {
        self.terms.iter().find(|(k, _)| k == j).map(|(_, v)| v.as_slice())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, v)| v.iter().all(|x| x.is_zero()))
    }

    pub fn eval(&self, n: &[Q]) -> Result<Vec<Q>> {
        if n.len() != self.dim {
            return Err(Error::ShapeMismatch(format!("argument of length {} expected", self.dim)));
        }
        let mut out = vec![Q::zero(); self.s];
        for (j, v) in &self.terms {
            let w = j.iter().zip(n).fold(q(1), |a, (&e, x)| a * num_traits::pow(x.clone(), e as usize));
            for (o, c) in out.iter_mut().zip(v) {
                *o += c * &w;
            }
        }
        Ok(out)
    }
}

/// `R(n) = L(n, …, n)`: `v_j = multinomial(j) · u_t` for any tuple t of type j.
pub fn hat(l: &SymForm) -> DiagForm {
    let mut terms = Vec::new();
    for j in multi_indices(l.dim, l.m as u32).into_iter().filter(|j| j.iter().sum::<u32>() as usize == l.m) {
        let t: Vec<usize> = j.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat(i).take(c as usize)).collect();
        let c = Q::from_integer(multinomial(&j));
        terms.push((j, l.coeff(&t).iter().map(|u| u * &c).collect()));
    }
    DiagForm { dim: l.dim, m: l.m, s: l.s, terms }
}

/// Inverse of [`hat`]: `u_t = v_j / multinomial(j)` with j the type of t.
pub fn check(r: &DiagForm) -> SymForm {
    let coeffs = tuples(r.dim, r.m)
        .iter()
        .map(|t| {
            let j = type_of(t, r.dim);
            let c = Q::from_integer(multinomial(&j));
            r.coeff(&j).expect("every type has a term").iter().map(|v| v / &c).collect()
        })
        .collect();
    SymForm { dim: r.dim, m: r.m, s: r.s, coeffs }
}

/// `(A∘L)(…) = L(…)·A` for an `s × s'` matrix A.
pub fn act_left(a: &RationalMatrix, l: &SymForm) -> Result<SymForm> {
    if a.rows != l.s {
        return Err(Error::ShapeMismatch(format!("matrix has {} rows, form has s = {}", a.rows, l.s)));
    }
    let coeffs = l.coeffs.iter().map(|u| a.left_mul_vec(u)).collect();
    SymForm::new(l.dim, l.m, a.cols, coeffs)
}

/// `(L∘B)(n_1, …, n_m) = L(n_1 B, …, n_m B)` for a `D × D` matrix B:
/// `u'_{i_1…i_m} = Σ_k u_{k_1…k_m} B_{i_1 k_1} ⋯ B_{i_m k_m}`.
pub fn act_right(b: &RationalMatrix, l: &SymForm) -> Result<SymForm> {
    if b.rows != l.dim || b.cols != l.dim {
        return Err(Error::ShapeMismatch(format!("matrix must be {0}×{0}", l.dim)));
    }
    let ts = tuples(l.dim, l.m);
    let coeffs = ts
        .iter()
        .map(|i| {
            let mut acc = vec![Q::zero(); l.s];
            for (kk, k) in ts.iter().enumerate() {
                let w = i.iter().zip(k).fold(q(1), |a, (&x, &y)| a * b.get(x, y));
                if !w.is_zero() {
                    for (o, u) in acc.iter_mut().zip(&l.coeffs[kk]) {
                        *o += u * &w;
                    }
                }
            }
            acc
        })
        .collect();
    SymForm::new(l.dim, l.m, l.s, coeffs)
}

/// Result of the column reduction `A2 = Y[I; 0]`, `A1 = Y[B1; B2]`.
#[derive(Clone, Debug)]
pub struct AutExtraction {
    pub b1: RationalMatrix,
    pub b2: RationalMatrix,
    /// True when `rank (A1, A2) = s'`, so that every row satisfies `a1 = a2 B1` exactly.
    pub graph: bool,
    pub height: Q,
}

/// Reads B1 from the reduced row echelon form of `[A2 | A1]`, whose top `s'` rows are
/// `[I | B1]` once `rank A2 = s'`. The echelon form is unique, so the result does not depend
/// on row order.
pub fn extract_automorphism(a1: &RationalMatrix, a2: &RationalMatrix) -> Result<AutExtraction> {
    let (r, sp) = (a2.rows, a2.cols);
    if a1.rows != r || a1.cols != sp {
        return Err(Error::ShapeMismatch("A1 and A2 must both be r×s'".into()));
    }
    if sp > r || a2.rank() != sp {
        return Err(Error::NotAGraph(format!("rank A2 = {} differs from s' = {sp}", a2.rank())));
    }
    let mut aug = RationalMatrix::zero(r, 2 * sp);
    for i in 0..r {
        for j in 0..sp {
            aug.set(i, j, a2.get(i, j).clone());
            aug.set(i, sp + j, a1.get(i, j).clone());
        }
    }
    let (red, pivots) = aug.rref();
    debug_assert!(pivots[..sp].iter().enumerate().all(|(k, &c)| k == c));
    let mut b1 = RationalMatrix::zero(sp, sp);
    let mut b2 = RationalMatrix::zero(r - sp, sp);
    for i in 0..r {
        for j in 0..sp {
            let v = red.get(i, sp + j).clone();
            if i < sp {
                b1.set(i, j, v);
            } else {
                b2.set(i - sp, j, v);
            }
        }
    }
    let graph = pivots.len() == sp;
    let height = b1.height();
    Ok(AutExtraction { b1, b2, graph, height })
}

/// Whether `F(uB, vB) = F(u, v)` on basis pairs, for the bracket form
/// `F(u, v) = u_x v_y − u_y v_x` of the Heisenberg group.
pub fn aut_d_check(b: &[[i64; 2]; 2]) -> bool {
    let f = |u: [i64; 2], v: [i64; 2]| u[0] * v[1] - u[1] * v[0];
    let img = |u: [i64; 2]| [u[0] * b[0][0] + u[1] * b[1][0], u[0] * b[0][1] + u[1] * b[1][1]];
    let basis = [[1, 0], [0, 1]];
    basis.iter().all(|&u| basis.iter().all(|&v| f(img(u), img(v)) == f(u, v)))
}

/// Minimal polynomial data of eigenvalue products of `A(p/q)`.
#[derive(Clone, Debug, Serialize)]
pub struct EigenProducts {
    /// Ascending coefficients of f0 as rational strings.
    pub f0: Vec<String>,
    /// For each `m = 1..=m_max`, the squarefree part of the characteristic polynomial of
    /// the m-th Kronecker power.
    pub per_degree: Vec<Vec<String>>,
    /// True when `|N(p)| = |N(q)|`.
    pub norms_equal: bool,
    #[serde(skip)]
    pub poly: RatPoly,
}

/// f0: squarefree part of the product of the characteristic polynomials of `A^{⊗m}`,
/// `m ≤ m_max`, with `A = A(p/q)`; its roots are the eigenvalue products of length m.
pub fn eigenproduct_minpoly(p: &FieldElement, qel: &FieldElement, m_max: usize) -> Result<EigenProducts> {
    if qel.is_zero() {
        return Err(Error::Precondition("q must be nonzero".into()));
    }
    if m_max == 0 {
        return Err(Error::Precondition("m_max must be at least 1".into()));
    }
    let x = p.div(qel).expect("q is nonzero");
    let a = x.embed_matrix();
    let mut power = a.clone();
    let mut all = RatPoly::one();
    let mut per = Vec::new();
    for m in 1..=m_max {
        if m > 1 {
            power = power.kron(&a);
        }
        let sf = power.charpoly().squarefree_part();
        per.push(sf.coeffs().iter().map(|c| c.to_string()).collect());
        all = all.mul(&sf);
    }
    let f0 = all.squarefree_part().monic();
    let norms_equal = {
        use num_traits::Signed;
        p.knorm().abs() == qel.knorm().abs()
    };
    Ok(EigenProducts {
        f0: f0.coeffs().iter().map(|c| c.to_string()).collect(),
        per_degree: per,
        norms_equal,
        poly: f0,
    })
}

/// Whether `f0(A)` is the zero matrix.
pub fn annihilates(f0: &RatPoly, a: &RationalMatrix) -> bool {
    f0.eval_matrix(a).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qr;

    #[test]
    fn off_diagonal_halves() {
        let r = DiagForm::new(2, 2, 1, &[(vec![1, 1], vec![q(1)])]).unwrap();
        let l = check(&r);
        assert_eq!(l.coeff(&[0, 1]), &[qr(1, 2)]);
        assert_eq!(l.coeff(&[1, 0]), &[qr(1, 2)]);
        assert_eq!(l.coeff(&[0, 0]), &[q(0)]);
        assert_eq!(hat(&l), r);
    }

    #[test]
    fn bracket_form_scales_by_determinant() {
        assert!(aut_d_check(&[[1, 1], [0, 1]]));
        assert!(!aut_d_check(&[[2, 0], [0, 2]]));
        assert!(!aut_d_check(&[[0, 1], [1, 0]]));
    }
}
