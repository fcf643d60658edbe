//! Full-rank integer lattices in Hermite normal form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Full-rank sublattice of Z^D stored as an upper-triangular Hermite normal form.
///
/// Row `i` has zeros left of column `i`, a positive diagonal entry, and every entry above
/// a diagonal entry lies in `[0, diagonal)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hnf {
    rows: Vec<Vec<BigInt>>,
}

impl Hnf {
    /// Reduces a generating set to Hermite normal form.
    ///
    /// Fails when the generators do not span a full-rank lattice.
    pub fn from_generators(dim: usize, gens: &[Vec<BigInt>]) -> Result<Self> {
        let mut m: Vec<Vec<BigInt>> = gens
            .iter()
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .cloned()
            .collect();
        if m.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch(format!("generators must have length {dim}")));
        }
        let mut out: Vec<Vec<BigInt>> = Vec::with_capacity(dim);
        for c in 0..dim {
            // Euclid on column c across the remaining rows.
            loop {
                let mut nz: Vec<usize> = (0..m.len()).filter(|&i| !m[i][c].is_zero()).collect();
                if nz.len() <= 1 {
                    break;
                }
                nz.sort_by(|&a, &b| m[a][c].abs().cmp(&m[b][c].abs()));
                let p = nz[0];
                let pivot = m[p].clone();
                for &i in &nz[1..] {
                    let f = m[i][c].div_floor(&pivot[c]);
                    for j in c..dim {
                        let v = &m[i][j] - &f * &pivot[j];
                        m[i][j] = v;
                    }
                }
            }
            let Some(p) = (0..m.len()).find(|&i| !m[i][c].is_zero()) else {
                return Err(Error::Precondition("generators do not span a full-rank lattice".into()));
            };
            let mut row = m.swap_remove(p);
            if row[c].is_negative() {
                row.iter_mut().for_each(|x| *x = -&*x);
            }
            out.push(row);
            m.retain(|r| r.iter().any(|x| !x.is_zero()));
        }
        // Reduce entries above the diagonal.
        for c in 0..dim {
            let d = out[c][c].clone();
            for i in 0..c {
                let f = out[i][c].div_floor(&d);
                if !f.is_zero() {
                    let pivot = out[c].clone();
                    for j in c..dim {
                        let v = &out[i][j] - &f * &pivot[j];
                        out[i][j] = v;
                    }
                }
            }
        }
        Ok(Hnf { rows: out })
    }

    pub fn from_i64(dim: usize, gens: &[Vec<i64>]) -> Result<Self> {
        let g: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_generators(dim, &g)
    }

    /// The whole of Z^D.
    pub fn identity(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        Hnf { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    /// Index in Z^D, the product of the diagonal.
    pub fn index(&self) -> BigInt {
        (0..self.dim()).map(|i| self.rows[i][i].clone()).product()
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        let mut w = v.to_vec();
        for i in 0..self.dim() {
            let d = &self.rows[i][i];
            let (q, r) = w[i].div_mod_floor(d);
            if !r.is_zero() {
                return false;
            }
            if !q.is_zero() {
                for j in i..self.dim() {
                    let x = &w[j] - &q * &self.rows[i][j];
                    w[j] = x;
                }
            }
        }
        true
    }

    /// Canonical coset representative: coordinate `i` reduced into `[0, h_ii)`.
    pub fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut w = v.to_vec();
        for i in 0..self.dim() {
            let q = w[i].div_floor(&self.rows[i][i]);
            if !q.is_zero() {
                for j in i..self.dim() {
                    let x = &w[j] - &q * &self.rows[i][j];
                    w[j] = x;
                }
            }
        }
        w
    }

    pub fn contains_i64(&self, v: &[i64]) -> bool {
        let w: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        self.contains(&w)
    }

    /// Rows as `i64`, when every entry fits.
    pub fn rows_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_i64()).collect())
            .collect()
    }

    /// Number of lattice points in the box `[-n, n]^D`.
    pub fn count_in_box(&self, n: i64) -> u64 {
        let mut count = 0u64;
        self.for_each_in_box(n, |_| count += 1);
        count
    }

    /// Visits every lattice point in `[-n, n]^D` in lexicographic order of the triangular
    /// coefficients.
    pub fn for_each_in_box(&self, n: i64, mut visit: impl FnMut(&[i64])) {
        let dim = self.dim();
        let Some(h) = self.rows_i64() else {
            // Entries beyond i64: scan the box with exact membership tests.
            box_scan(dim, n, |v| {
                if self.contains_i64(v) {
                    visit(v)
                }
            });
            return;
        };
        let mut point = vec![0i64; dim];
        enumerate(&h, 0, n, &mut point, &mut visit);
    }
}

fn enumerate(h: &[Vec<i64>], level: usize, n: i64, point: &mut [i64], visit: &mut impl FnMut(&[i64])) {
    let dim = h.len();
    if level == dim {
        visit(point);
        return;
    }
    let d = h[level][level];
    let base = point[level];
    // base + x*d in [-n, n]
    let lo = Integer::div_ceil(&(-n - base), &d);
    let hi = Integer::div_floor(&(n - base), &d);
    for x in lo..=hi {
        for j in level..dim {
            point[j] += x * h[level][j];
        }
        enumerate(h, level + 1, n, point, visit);
        for j in level..dim {
            point[j] -= x * h[level][j];
        }
    }
}

fn box_scan(dim: usize, n: i64, mut visit: impl FnMut(&[i64])) {
    let side = 2 * n + 1;
    let total = (side as u64).pow(dim as u32);
    let mut v = vec![0i64; dim];
    for mut idx in 0..total {
        for x in v.iter_mut() {
            *x = (idx % side as u64) as i64 - n;
            idx /= side as u64;
        }
        visit(&v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hnf_of_gaussian_prime_above_two() {
        // (1+i) in Z[i]: rows (1,1) and i(1+i) = (-1,1).
        let h = Hnf::from_i64(2, &[vec![1, 1], vec![-1, 1]]).unwrap();
        assert_eq!(h.rows_i64().unwrap(), vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(h.index(), BigInt::from(2));
        assert!(h.contains_i64(&[2, 0]));
        assert!(!h.contains_i64(&[1, 0]));
    }

    #[test]
    fn box_count_of_multiples_of_three() {
        let h = Hnf::from_i64(1, &[vec![3]]).unwrap();
        assert_eq!(h.count_in_box(100), 67);
    }

    #[test]
    fn rank_deficient_generators_rejected() {
        assert!(Hnf::from_i64(2, &[vec![1, 1], vec![2, 2]]).is_err());
    }
}
