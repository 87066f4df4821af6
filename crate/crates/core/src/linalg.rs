//! Sparse and dense matrices over a [`Scalar`] field, with exact elimination
//! for rational matrices and SVD-based rank decisions for complex ones.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::scalar::Scalar;

/// Row-compressed sparse matrix; each row holds `(column, value)` pairs
/// sorted by column with no explicit zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, F)>>,
}

impl<F: Scalar> SparseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for (i, row) in m.data.iter_mut().enumerate() {
            row.push((i, F::one()));
        }
        m
    }

    pub fn from_triplets(rows: usize, cols: usize, triplets: impl IntoIterator<Item = (usize, usize, F)>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, j, v) in triplets {
            m.add_to(i, j, v);
        }
        m
    }

    pub fn from_dense(d: &DenseMatrix<F>) -> Self {
        let mut m = Self::zeros(d.rows(), d.cols());
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                let v = d.get(i, j);
                if !v.is_zero() {
                    m.data[i].push((j, v.clone()));
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[(usize, F)] {
        &self.data[i]
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        match self.data[i].binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => self.data[i][k].1.clone(),
            Err(_) => F::zero(),
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: F) {
        if v.is_zero() {
            return;
        }
        let row = &mut self.data[i];
        match row.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => {
                let s = row[k].1.clone() + v;
                if s.is_zero() {
                    row.remove(k);
                } else {
                    row[k].1 = s;
                }
            }
            Err(k) => row.insert(k, (j, v)),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        let row = &mut self.data[i];
        match row.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => {
                if v.is_zero() {
                    row.remove(k);
                } else {
                    row[k].1 = v;
                }
            }
            Err(k) => {
                if !v.is_zero() {
                    row.insert(k, (j, v));
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .map(|(_, v)| v.modulus())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        self.data
            .iter()
            .map(|row| {
                row.iter().fold(F::zero(), |acc, (j, a)| {
                    if v[*j].is_zero() {
                        acc
                    } else {
                        acc + a.clone() * v[*j].clone()
                    }
                })
            })
            .collect()
    }

    /// `v^T M`
    pub fn vec_mul(&self, v: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.cols];
        for (i, row) in self.data.iter().enumerate() {
            if v[i].is_zero() {
                continue;
            }
            for (j, a) in row {
                out[*j] = out[*j].clone() + v[i].clone() * a.clone();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions");
        let mut out = Self::zeros(self.rows, rhs.cols);
        let mut acc: Vec<Option<F>> = vec![None; rhs.cols];
        let mut touched = Vec::new();
        for (i, row) in self.data.iter().enumerate() {
            for (k, a) in row {
                for (j, b) in &rhs.data[*k] {
                    let p = a.clone() * b.clone();
                    match &mut acc[*j] {
                        Some(x) => *x = x.clone() + p,
                        slot @ None => {
                            *slot = Some(p);
                            touched.push(*j);
                        }
                    }
                }
            }
            touched.sort_unstable();
            for j in touched.drain(..) {
                let v = acc[j].take().unwrap();
                if !v.is_zero() {
                    out.data[i].push((j, v));
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (i, row) in rhs.data.iter().enumerate() {
            for (j, v) in row {
                out.add_to(i, *j, v.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zeros(self.rows, self.cols);
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|row| row.iter().map(|(j, v)| (*j, v.clone() * c.clone())).collect())
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&-F::one()))
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                out.data[*j].push((i, v.clone()));
            }
        }
        out
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for (i, row) in self.data.iter().enumerate() {
            for k in 0..rhs.rows {
                let target = &mut out.data[i * rhs.rows + k];
                for (j, a) in row {
                    for (l, b) in &rhs.data[k] {
                        target.push((j * rhs.cols + l, a.clone() * b.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> SparseMatrix<G> {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|(j, v)| (*j, f(v)))
                        .filter(|(_, v)| !v.is_zero())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<F> {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                d.set(i, j.to_owned(), v.clone());
            }
        }
        d
    }

    /// `P^T M P` style restriction: rows and columns picked by index.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix<F> {
        let mut d = DenseMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                d.set(a, b, self.get(i, j));
            }
        }
        d
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        DenseMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|row| row.iter().cloned()).collect(),
        }
    }

    pub fn from_columns(cols: &[Vec<F>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j).clone() + a.clone() * b.clone();
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::modulus).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> DenseMatrix<G> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Reduced row echelon form and pivot columns. Entries with modulus at
    /// most `tol` times the largest entry count as zero (ignored for exact
    /// fields).
    pub fn rref(&self, tol: f64) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let threshold = if F::EXACT { 0.0 } else { tol * self.max_abs() };
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // exact: first nonzero; floating: largest modulus
            let candidate = if F::EXACT {
                (r..m.rows).find(|&i| !m.get(i, c).is_zero())
            } else {
                (r..m.rows)
                    .max_by(|&a, &b| m.get(a, c).modulus().total_cmp(&m.get(b, c).modulus()))
                    .filter(|&i| m.get(i, c).modulus() > threshold)
            };
            let Some(p) = candidate else { continue };
            m.swap_rows(r, p);
            let inv = m.get(r, c).recip();
            for j in c..m.cols {
                let v = m.get(r, j).clone() * inv.clone();
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = m.get(i, j).clone() - f.clone() * m.get(r, j).clone();
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.rref(tol).1.len()
    }

    /// Basis of the right null space as columns, from the reduced echelon form.
    pub fn nullspace(&self, tol: f64) -> Vec<Vec<F>> {
        let (r, pivots) = self.rref(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![F::zero(); self.cols];
                v[f] = F::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(row, f).clone();
                }
                v
            })
            .collect()
    }

    /// Solves `self * x = b` for square nonsingular `self`.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        let n = self.rows;
        let mut aug = Self::zeros(n, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n, b[i].clone());
        }
        let (r, pivots) = aug.rref(1e-14);
        if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
            return None;
        }
        Some((0..n).map(|i| r.get(i, n).clone()).collect())
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, F::one());
        }
        let (r, pivots) = aug.rref(1e-14);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    /// Determinant by elimination; `1` for the empty matrix.
    pub fn determinant(&self) -> F {
        let n = self.rows;
        let mut m = self.clone();
        let mut det = F::one();
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| m.get(a, c).modulus().total_cmp(&m.get(b, c).modulus()));
            let Some(p) = p.filter(|&p| !m.get(p, c).is_zero()) else {
                return F::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det = det * piv.clone();
            let inv = piv.recip();
            for i in c + 1..n {
                let f = m.get(i, c).clone() * inv.clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(i, j).clone() - f.clone() * m.get(c, j).clone();
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_c64())
    }
}

/// Singular values in descending order.
pub fn singular_values<F: Scalar>(m: &DenseMatrix<F>) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol` times the largest.
pub fn numerical_rank<F: Scalar>(m: &DenseMatrix<F>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Orthonormal basis of the numerical right null space: right singular
/// vectors whose singular values are at most `rel_tol` times the largest.
pub fn nullspace_svd(m: &DenseMatrix<Complex64>, rel_tol: f64) -> Vec<Vec<Complex64>> {
    let cols = m.cols();
    if cols == 0 {
        return Vec::new();
    }
    // pad with zero rows so that the thin SVD exposes every right singular vector
    let rows = m.rows().max(cols);
    let a = DMatrix::from_fn(rows, cols, |i, j| {
        if i < m.rows() {
            *m.get(i, j)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    (0..cols)
        .filter(|&k| svd.singular_values[k] <= rel_tol * top || top == 0.0)
        .map(|k| (0..cols).map(|j| v_t[(k, j)].conj()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn dm(rows: &[&[i64]]) -> DenseMatrix<Rational> {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect::<Vec<_>>())
    }

    #[test]
    fn exact_nullspace_and_rank() {
        let m = dm(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(m.rank(0.0), 1);
        let ns = m.nullspace(0.0);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(m.mul_vec(&v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn determinant_and_inverse() {
        let m = dm(&[&[2, 1], &[1, 1]]);
        assert_eq!(m.determinant(), rat(1, 1));
        assert_eq!(m.inverse().unwrap(), dm(&[&[1, -1], &[-1, 2]]));
        assert_eq!(DenseMatrix::<Rational>::zeros(0, 0).determinant(), rat(1, 1));
        assert!(dm(&[&[1, 1], &[1, 1]]).inverse().is_none());
    }

    #[test]
    fn sparse_products_and_kron() {
        let a = SparseMatrix::from_dense(&dm(&[&[0, 1], &[0, 0]]));
        let b = a.transpose();
        let c = a.commutator(&b);
        assert_eq!(c.to_dense(), dm(&[&[1, 0], &[0, -1]]));
        let k = SparseMatrix::<Rational>::identity(2).kron(&a);
        assert_eq!(k.rows(), 4);
        assert_eq!(k.get(2, 3), rat(1, 1));
        assert_eq!(k.nnz(), 2);
    }

    #[test]
    fn svd_nullspace() {
        let m = dm(&[&[1, 2, 3], &[2, 4, 6]]).map(|x| x.to_c64());
        let ns = nullspace_svd(&m, 1e-10);
        assert_eq!(ns.len(), 2);
        assert_eq!(numerical_rank(&m, 1e-10), 1);
    }
}
