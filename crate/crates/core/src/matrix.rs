//! Dense row-major square-or-rectangular matrices over any [`Ring`].
//! Vectors are columns.

use serde::{Deserialize, Serialize};

use crate::algebra::{Field, Ring};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix<E> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn zeros<R: Ring<Elem = E>>(ring: &R, rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, ring.zero())
    }

    pub fn identity<R: Ring<Elem = E>>(ring: &R, d: usize) -> Self {
        Self::from_fn(d, d, |i, j| if i == j { ring.one() } else { ring.zero() })
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn dim(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: E) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<E> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[E]) {
        for (i, v) in col.iter().enumerate() {
            self.set(i, j, v.clone());
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<F: Clone>(&self, f: impl FnMut(&E) -> F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Square submatrix on the index range `lo..hi`.
    pub fn block(&self, lo: usize, hi: usize) -> Self {
        Self::from_fn(hi - lo, hi - lo, |i, j| self.get(lo + i, lo + j).clone())
    }
}

/// Schoolbook product that skips exact zeros on the left.
pub fn generic_mul<R: Ring>(ring: &R, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Matrix<R::Elem> {
    assert_eq!(a.cols, b.rows, "matrix product dimension mismatch");
    let mut out = Matrix::zeros(ring, a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if ring.is_exact_zero(aik) {
                continue;
            }
            for j in 0..b.cols {
                let bkj = b.get(k, j);
                if ring.is_exact_zero(bkj) {
                    continue;
                }
                let prod = ring.mul(aik, bkj);
                let cur = ring.add(out.get(i, j), &prod);
                out.set(i, j, cur);
            }
        }
    }
    out
}

pub fn mat_add<R: Ring>(ring: &R, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Matrix<R::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Matrix::from_fn(a.rows, a.cols, |i, j| ring.add(a.get(i, j), b.get(i, j)))
}

pub fn mat_sub<R: Ring>(ring: &R, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Matrix<R::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Matrix::from_fn(a.rows, a.cols, |i, j| ring.sub(a.get(i, j), b.get(i, j)))
}

pub fn mat_scale<R: Ring>(ring: &R, s: &R::Elem, a: &Matrix<R::Elem>) -> Matrix<R::Elem> {
    a.map(|x| ring.mul(s, x))
}

pub fn mat_vec<R: Ring>(ring: &R, a: &Matrix<R::Elem>, v: &[R::Elem]) -> Vec<R::Elem> {
    assert_eq!(a.cols, v.len());
    (0..a.rows)
        .map(|i| {
            let mut acc = ring.zero();
            for (k, vk) in v.iter().enumerate() {
                let aik = a.get(i, k);
                if ring.is_exact_zero(aik) || ring.is_exact_zero(vk) {
                    continue;
                }
                acc = ring.add(&acc, &ring.mul(aik, vk));
            }
            acc
        })
        .collect()
}

/// `a^n` by repeated squaring.
pub fn mat_pow<R: Ring>(ring: &R, a: &Matrix<R::Elem>, mut n: u64) -> Matrix<R::Elem> {
    assert!(a.is_square());
    let mut acc = Matrix::identity(ring, a.rows);
    let mut base = a.clone();
    let mut first = true;
    while n > 0 {
        if n & 1 == 1 {
            acc = if first { base.clone() } else { ring.mat_mul(&acc, &base) };
            first = false;
        }
        n >>= 1;
        if n > 0 {
            base = ring.mat_mul(&base, &base);
        }
    }
    acc
}

pub fn is_zero_matrix<R: Ring>(ring: &R, a: &Matrix<R::Elem>) -> bool {
    a.data.iter().all(|x| ring.is_zero(x))
}

pub fn mat_equal<R: Ring>(ring: &R, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> bool {
    (a.rows, a.cols) == (b.rows, b.cols) && is_zero_matrix(ring, &mat_sub(ring, a, b))
}

/// Block-diagonal assembly.
pub fn direct_sum<R: Ring>(ring: &R, blocks: &[Matrix<R::Elem>]) -> Matrix<R::Elem> {
    let d: usize = blocks.iter().map(|b| b.rows).sum();
    let mut out = Matrix::zeros(ring, d, d);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..b.cols {
                out.set(off + i, off + j, b.get(i, j).clone());
            }
        }
        off += b.rows;
    }
    out
}

/// Reduced row echelon form in place; returns the pivot columns.
/// Pivoting takes the first row with a nonzero entry in the leftmost
/// remaining column.
pub fn rref<F: Field>(field: &F, a: &mut Matrix<F::Elem>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(pr) = (r..a.rows).find(|&i| !field.is_zero(a.get(i, c))) else {
            continue;
        };
        if pr != r {
            for j in 0..a.cols {
                a.data.swap(pr * a.cols + j, r * a.cols + j);
            }
        }
        let inv = field.inv(a.get(r, c)).expect("pivot is nonzero");
        for j in 0..a.cols {
            let v = field.mul(&inv, a.get(r, j));
            a.set(r, j, v);
        }
        for i in 0..a.rows {
            if i == r || field.is_zero(a.get(i, c)) {
                continue;
            }
            let factor = a.get(i, c).clone();
            for j in 0..a.cols {
                let v = field.sub(a.get(i, j), &field.mul(&factor, a.get(r, j)));
                a.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(field: &F, a: &Matrix<F::Elem>) -> usize {
    let mut m = a.clone();
    rref(field, &mut m).len()
}

/// Basis of the right kernel, one vector per free column in increasing
/// order; each vector has a 1 in its free coordinate.
pub fn kernel_basis<F: Field>(field: &F, a: &Matrix<F::Elem>) -> Vec<Vec<F::Elem>> {
    let mut m = a.clone();
    let pivots = rref(field, &mut m);
    let free: Vec<usize> = (0..a.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![field.zero(); a.cols];
            v[fc] = field.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(m.get(r, fc));
            }
            v
        })
        .collect()
}

/// Inverse by Gauss-Jordan; `None` if singular.
pub fn inverse<F: Field>(field: &F, a: &Matrix<F::Elem>) -> Option<Matrix<F::Elem>> {
    let n = a.rows;
    let mut aug = Matrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            a.get(i, j).clone()
        } else if j - n == i {
            field.one()
        } else {
            field.zero()
        }
    });
    let pivots = rref(field, &mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(Matrix::from_fn(n, n, |i, j| aug.get(i, n + j).clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Integers, Zmod};

    #[test]
    fn power_matches_iterated_product() {
        let r = Integers;
        let a = Matrix::from_rows(vec![vec![1, 0], vec![1, 1]]).unwrap();
        let a5 = mat_pow(&r, &a, 5);
        assert_eq!(a5.data, vec![1, 0, 5, 1]);
        assert_eq!(mat_pow(&r, &a, 0), Matrix::identity(&r, 2));
    }

    #[test]
    fn kernel_of_singular() {
        let f = Zmod::new(5);
        let a = Matrix::from_rows(vec![vec![1u64, 2, 3], vec![2, 4, 0]]).unwrap();
        let ker = kernel_basis(&f, &a);
        assert_eq!(ker.len(), 1);
        let img = mat_vec(&f, &a, &ker[0]);
        assert!(img.iter().all(|x| *x == 0));
    }

    #[test]
    fn inverse_roundtrip() {
        let f = Zmod::new(7);
        let a = Matrix::from_rows(vec![vec![2u64, 1], vec![5, 3]]).unwrap();
        let ai = inverse(&f, &a).unwrap();
        assert_eq!(f.mat_mul(&a, &ai), Matrix::identity(&f, 2));
        let s = Matrix::from_rows(vec![vec![1u64, 2], vec![2, 4]]).unwrap();
        assert!(inverse(&f, &s).is_none());
    }

    #[test]
    fn direct_sum_blocks() {
        let r = Integers;
        let a = Matrix::from_rows(vec![vec![7]]).unwrap();
        let b = Matrix::from_rows(vec![vec![1, 2], vec![3, 4]]).unwrap();
        let s = direct_sum(&r, &[a, b]);
        assert_eq!(s.data, vec![7, 0, 0, 0, 1, 2, 0, 3, 4]);
        assert_eq!(s.block(1, 3).data, vec![1, 2, 3, 4]);
    }
}
