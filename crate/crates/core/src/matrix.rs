//! Dense exact matrices over the rationals, plus rational subspaces kept in
//! reduced row-echelon form so that equality of spans is structural equality.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

pub type QVector = Vec<Q>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(rational::fmt_q).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn scalar(n: usize, c: &Q) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    pub fn diag(entries: &[Q]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        Ok(QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Panics on ragged input; meant for literals.
    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<Q>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| rational::q(x)).collect())
            .collect();
        Self::from_rows(rows).expect("ragged matrix literal")
    }

    pub fn from_columns(n: usize, cols: &[QVector]) -> Self {
        let mut m = Self::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn block_diag(blocks: &[&QMatrix]) -> Self {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(r, c);
        let (mut oi, mut oj) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(oi + i, oj + j)] = b[(i, j)].clone();
                }
            }
            oi += b.rows;
            oj += b.cols;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> QVector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> QVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<QVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn columns(&self) -> Vec<QVector> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn entries(&self) -> &[Q] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> QVector {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut s = Q::zero();
                for (a, b) in self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        s += a * b;
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn neg(&self) -> QMatrix {
        self.scale(&-Q::one())
    }

    pub fn pow(&self, mut e: u64) -> QMatrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self[(i, j)].is_one()
                    } else {
                        self[(i, j)].is_zero()
                    }
                })
            })
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    pub fn max_abs(&self) -> Q {
        self.data.iter().map(Signed::abs).max().unwrap_or_else(Q::zero)
    }

    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        if !self.is_integral() {
            return None;
        }
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self[(i, j)].to_integer().to_i64())
                    .collect()
            })
            .collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| rational::to_f64(&self[(i, j)]))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> QMatrix {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    /// Reduced row-echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(r, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self * x = 0}`, one vector per free column, in column order.
    pub fn kernel(&self) -> Vec<QVector> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Q::zero(); self.cols];
                v[f] = Q::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Basis of the column space, as the pivot columns of `self`.
    pub fn column_space(&self) -> Vec<QVector> {
        let (_, pivots) = self.rref();
        pivots.into_iter().map(|c| self.col(c)).collect()
    }

    pub fn det(&self) -> Q {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Q::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return Q::zero();
            };
            if p != c {
                m.swap_rows(c, p);
                det = -det;
            }
            let pivot = m[(c, c)].clone();
            det *= &pivot;
            for i in c + 1..n {
                if !m[(i, c)].is_zero() {
                    let f = &m[(i, c)] / &pivot;
                    for j in c..n {
                        let v = &m[(c, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Q::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Some(r.submatrix(&rows, &cols))
    }

    /// Solves `self * x = b` for square invertible `self`.
    pub fn solve(&self, b: &[Q]) -> Option<QVector> {
        let inv = self.inverse()?;
        Some(inv.mul_vec(b))
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vadd(a: &[Q], b: &[Q]) -> QVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[Q], b: &[Q]) -> QVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vscale(a: &[Q], c: &Q) -> QVector {
    a.iter().map(|x| x * c).collect()
}

pub fn vis_zero(a: &[Q]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn unit_vector(n: usize, i: usize) -> QVector {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

pub fn vto_f64(a: &[Q]) -> Vec<f64> {
    a.iter().map(rational::to_f64).collect()
}

/// Positive rational multiple of `v` with coprime integer entries whose first
/// nonzero entry is positive.
pub fn primitive(v: &[Q]) -> QVector {
    let Some(first) = v.iter().find(|x| !x.is_zero()) else {
        return v.to_vec();
    };
    let l = rational::lcm_denominators(v);
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = if first.is_negative() { -BigInt::one() } else { BigInt::one() };
    ints.into_iter()
        .map(|x| Q::from_integer(x / &g * &sign))
        .collect()
}

/// A subspace of `Q^n`, stored as the nonzero rows of a reduced row-echelon form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    n: usize,
    rows: Vec<QVector>,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace { n, rows: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        Self::span(n, &(0..n).map(|i| unit_vector(n, i)).collect::<Vec<_>>())
    }

    pub fn span(n: usize, vectors: &[QVector]) -> Self {
        if vectors.is_empty() {
            return Self::zero(n);
        }
        let m = QMatrix::from_rows(vectors.to_vec()).expect("span of equal-length vectors");
        assert_eq!(m.cols(), n);
        let (r, pivots) = m.rref();
        Subspace {
            n,
            rows: (0..pivots.len()).map(|i| r.row(i)).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Canonical basis (reduced row-echelon rows).
    pub fn basis(&self) -> &[QVector] {
        &self.rows
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        let mut vs = self.rows.clone();
        vs.push(v.to_vec());
        Subspace::span(self.n, &vs).dim() == self.dim()
    }

    pub fn contains_space(&self, other: &Subspace) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut vs = self.rows.clone();
        vs.extend(other.rows.iter().cloned());
        Subspace::span(self.n, &vs)
    }

    /// Vectors orthogonal (standard dot product) to the subspace.
    pub fn annihilator(&self) -> Subspace {
        if self.rows.is_empty() {
            return Subspace::full(self.n);
        }
        let m = QMatrix::from_rows(self.rows.clone()).unwrap();
        Subspace::span(self.n, &m.kernel())
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        self.annihilator().sum(&other.annihilator()).annihilator()
    }

    pub fn image(&self, m: &QMatrix) -> Subspace {
        let vs: Vec<QVector> = self.rows.iter().map(|v| m.mul_vec(v)).collect();
        Subspace::span(m.rows(), &vs)
    }

    pub fn is_invariant(&self, m: &QMatrix) -> bool {
        self.contains_space(&self.image(m))
    }

    /// Basis vectors as the columns of an `n × dim` matrix.
    pub fn basis_matrix(&self) -> QMatrix {
        QMatrix::from_columns(self.n, &self.rows)
    }
}

pub fn kernel_space(m: &QMatrix) -> Subspace {
    Subspace::span(m.cols(), &m.kernel())
}

pub fn image_space(m: &QMatrix) -> Subspace {
    Subspace::span(m.rows(), &m.column_space())
}

/// Fraction-free Gaussian elimination on an integer system `k x = rhs`.
/// Returns integer numerators and the common denominator `det(k)`, or `None`
/// when `k` is singular.
pub fn bareiss_solve(k: &[Vec<BigInt>], rhs: &[BigInt]) -> Option<(Vec<BigInt>, BigInt)> {
    let n = k.len();
    let mut m: Vec<Vec<BigInt>> = k
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let mut prev = BigInt::one();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        if p != c {
            m.swap(p, c);
        }
        for i in c + 1..n {
            for j in c + 1..=n {
                let v = (&m[i][j] * &m[c][c] - &m[i][c] * &m[c][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[c][c].clone();
    }
    // Back substitution; numerators share the denominator m[n-1][n-1].
    let det = m[n - 1][n - 1].clone();
    let mut x = vec![BigInt::zero(); n];
    for i in (0..n).rev() {
        let mut acc = &m[i][n] * &det;
        for j in i + 1..n {
            acc -= &m[i][j] * &x[j];
        }
        x[i] = acc / &m[i][i];
    }
    Some((x, det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};

    #[test]
    fn inverse_and_det() {
        let a = QMatrix::from_i64(&[[2, 1], [1, 1]]);
        assert_eq!(a.det(), q(1));
        let inv = a.inverse().unwrap();
        assert_eq!(inv, QMatrix::from_i64(&[[1, -1], [-1, 2]]));
        assert!(a.mul(&inv).is_identity());
        assert!(QMatrix::from_i64(&[[1, 2], [2, 4]]).inverse().is_none());
    }

    #[test]
    fn kernel_of_shift() {
        let n = QMatrix::from_i64(&[[0, 1, 0], [0, 0, 1], [0, 0, 0]]);
        assert_eq!(n.kernel(), vec![vec![q(1), q(0), q(0)]]);
        assert_eq!(image_space(&n), Subspace::span(3, &[unit_vector(3, 0), unit_vector(3, 1)]));
    }

    #[test]
    fn subspace_algebra() {
        let a = Subspace::span(3, &[vec![q(1), q(1), q(0)], vec![q(0), q(1), q(0)]]);
        let b = Subspace::span(3, &[vec![q(0), q(1), q(1)], vec![q(1), q(0), q(0)]]);
        let i = a.intersect(&b);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&[q(1), q(0), q(0)]));
        assert_eq!(a.sum(&b).dim(), 3);
    }

    #[test]
    fn bareiss_matches_rational_solve() {
        let k = vec![
            vec![BigInt::from(4), BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(1), BigInt::from(3), BigInt::from(1)],
            vec![BigInt::from(0), BigInt::from(2), BigInt::from(5)],
        ];
        let b = vec![BigInt::from(1), BigInt::from(-2), BigInt::from(7)];
        let (num, den) = bareiss_solve(&k, &b).unwrap();
        let km = QMatrix::from_i64(&[[4, 1, 0], [1, 3, 1], [0, 2, 5]]);
        let x = km.solve(&[q(1), q(-2), q(7)]).unwrap();
        for (n, xi) in num.iter().zip(&x) {
            assert_eq!(Q::new(n.clone(), den.clone()), *xi);
        }
    }

    #[test]
    fn primitive_vector() {
        assert_eq!(
            primitive(&[frac(-1, 2), q(0), frac(3, 4)]),
            vec![q(2), q(0), q(-3)]
        );
    }
}
