//! Small dense linear algebra: row-major matrices, block partitions,
//! Cholesky-backed affine projection and power iteration.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm1<T: Real>(a: &[T]) -> T {
    a.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// `y += alpha * x`
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Euclidean distance `‖a - b‖`.
pub fn dist2<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

/// Dense row-major matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at index {i}"
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// `out = A x`
    pub fn mul_vec_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `out = Aᵀ y`
    pub fn tr_mul_vec_into(&self, y: &[T], out: &mut [T]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|o| *o = T::zero());
        for (&yi, row) in y.iter().zip(self.data.chunks_exact(self.cols)) {
            if yi != T::zero() {
                axpy(yi, row, out);
            }
        }
    }

    pub fn tr_mul_vec(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        self.tr_mul_vec_into(y, &mut out);
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                axpy(a, orow, dst);
            }
        }
        Ok(out)
    }

    /// `A Aᵀ`, symmetric `rows x rows`.
    pub fn gram_rows(&self) -> Self {
        let m = self.rows;
        let mut g = Self::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = dot(self.row(i), self.row(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Rows `start..start+count` as a new matrix.
    pub fn row_block(&self, start: usize, count: usize) -> Self {
        let data = self.data[start * self.cols..(start + count) * self.cols].to_vec();
        Self {
            rows: count,
            cols: self.cols,
            data,
        }
    }

    /// Columns `start..start+count` as a new matrix.
    pub fn col_block(&self, start: usize, count: usize) -> Self {
        let mut data = Vec::with_capacity(self.rows * count);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[start..start + count]);
        }
        Self {
            rows: self.rows,
            cols: count,
            data,
        }
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let r = self.row(i);
            data.extend(cols.iter().map(|&j| r[j]));
        }
        Self {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    pub fn vstack(blocks: &[Self]) -> Result<Self> {
        let cols = blocks
            .first()
            .map(|b| b.cols)
            .ok_or_else(|| Error::Dimension("no blocks".into()))?;
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::Dimension("vstack column mismatch".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let data = blocks.iter().flat_map(|b| b.data.iter().copied()).collect();
        Ok(Self { rows, cols, data })
    }

    pub fn hstack(blocks: &[Self]) -> Result<Self> {
        let rows = blocks
            .first()
            .map(|b| b.rows)
            .ok_or_else(|| Error::Dimension("no blocks".into()))?;
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::Dimension("hstack row mismatch".into()));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for b in blocks {
                data.extend_from_slice(b.row(i));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn frobenius(&self) -> T {
        norm2(&self.data)
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    Row,
    Column,
}

/// Block sizes per node, in node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    pub kind: PartitionKind,
    pub sizes: Vec<usize>,
}

impl PartitionSpec {
    pub fn new(kind: PartitionKind, sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidInput(
                "partition sizes must be positive".into(),
            ));
        }
        Ok(Self { kind, sizes })
    }

    /// Splits `total` into `parts` equal contiguous blocks.
    pub fn even(kind: PartitionKind, total: usize, parts: usize) -> Result<Self> {
        if parts == 0 || !total.is_multiple_of(parts) {
            return Err(Error::InvalidInput(format!(
                "{parts} does not divide {total}"
            )));
        }
        Self::new(kind, vec![total / parts; parts])
    }

    pub fn parts(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Start offset of each block.
    pub fn offsets(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect()
    }
}

/// The slice of `(A, b)` held by one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeBlock<T> {
    pub a: DenseMatrix<T>,
    /// `b_p` for row partitions; column partitions share the full `b`.
    pub b: Option<Vec<T>>,
    /// First row (row kind) or column (column kind) of the block in `A`.
    pub offset: usize,
}

pub fn partition<T: Real>(
    a: &DenseMatrix<T>,
    b: &[T],
    spec: &PartitionSpec,
) -> Result<Vec<NodeBlock<T>>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "b has {} entries, A has {} rows",
            b.len(),
            a.rows()
        )));
    }
    let expected = match spec.kind {
        PartitionKind::Row => a.rows(),
        PartitionKind::Column => a.cols(),
    };
    if spec.total() != expected {
        return Err(Error::Dimension(format!(
            "partition sizes sum to {}, expected {expected}",
            spec.total()
        )));
    }
    Ok(spec
        .offsets()
        .into_iter()
        .zip(&spec.sizes)
        .map(|(offset, &size)| match spec.kind {
            PartitionKind::Row => NodeBlock {
                a: a.row_block(offset, size),
                b: Some(b[offset..offset + size].to_vec()),
                offset,
            },
            PartitionKind::Column => NodeBlock {
                a: a.col_block(offset, size),
                b: None,
                offset,
            },
        })
        .collect())
}

/// Inverse of [`partition`]: re-stacks the blocks into `A` (and `b` for rows).
pub fn concat_blocks<T: Real>(
    blocks: &[NodeBlock<T>],
    kind: PartitionKind,
) -> Result<(DenseMatrix<T>, Option<Vec<T>>)> {
    let mats: Vec<_> = blocks.iter().map(|blk| blk.a.clone()).collect();
    match kind {
        PartitionKind::Row => {
            let a = DenseMatrix::vstack(&mats)?;
            let b = blocks
                .iter()
                .flat_map(|blk| blk.b.iter().flatten().copied())
                .collect();
            Ok((a, Some(b)))
        }
        PartitionKind::Column => Ok((DenseMatrix::hstack(&mats)?, None)),
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky<T> {
    l: DenseMatrix<T>,
    jitter: T,
}

impl<T: Real> Cholesky<T> {
    /// Factors `m`. On breakdown the factorization is retried once with
    /// `1e-12 * trace / n` added to the diagonal; it is still rejected when
    /// the jitter dominates a pivot.
    pub fn new(m: &DenseMatrix<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Dimension("Cholesky of a non-square matrix".into()));
        }
        let n = T::from_usize_lossy(m.rows().max(1));
        let scale = T::lit(1e-12) * m.trace().abs().max(T::min_positive_value()) / n;
        // a pivot this small means the matrix is numerically rank deficient
        let floor = (T::lit(1e3) * scale).sqrt();
        let check = |l: DenseMatrix<T>, jitter: T| match (0..l.rows()).find(|&i| l[(i, i)] <= floor)
        {
            Some(p) => Err(Error::Singular { pivot: p }),
            None => Ok(Self { l, jitter }),
        };
        match Self::factor(m, T::zero()) {
            Ok(l) => check(l, T::zero()),
            Err(_) => check(Self::factor(m, scale)?, scale),
        }
    }

    fn factor(m: &DenseMatrix<T>, jitter: T) -> Result<DenseMatrix<T>> {
        let n = m.rows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = m[(j, j)] + jitter;
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return Err(Error::Singular { pivot: j });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(l)
    }

    pub fn factor_matrix(&self) -> &DenseMatrix<T> {
        &self.l
    }

    pub fn jitter(&self) -> T {
        self.jitter
    }

    /// Solves `L Lᵀ z = rhs` in place.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.l.rows();
        debug_assert_eq!(rhs.len(), n);
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= self.l[(i, k)] * rhs[k];
            }
            rhs[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * rhs[k];
            }
            rhs[i] = s / self.l[(i, i)];
        }
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut z = rhs.to_vec();
        self.solve_in_place(&mut z);
        z
    }
}

/// Cached Cholesky factor of `A Aᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramFactorization<T> {
    rows: usize,
    cols: usize,
    chol: Cholesky<T>,
}

impl<T: Real> GramFactorization<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        Ok(Self {
            rows: a.rows(),
            cols: a.cols(),
            chol: Cholesky::new(&a.gram_rows())?,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn factor(&self) -> &DenseMatrix<T> {
        self.chol.factor_matrix()
    }

    /// Solves `(A Aᵀ) z = rhs`.
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        self.chol.solve(rhs)
    }
}

/// Euclidean projection of `p` onto `{x : A x = b}`:
/// `x = p - Aᵀ (A Aᵀ)⁻¹ (A p - b)`.
pub fn affine_projection<T: Real>(
    a: &DenseMatrix<T>,
    b: &[T],
    fact: &GramFactorization<T>,
    p: &[T],
) -> Result<Vec<T>> {
    if fact.dims() != (a.rows(), a.cols()) {
        return Err(Error::Dimension(
            "factorization built for another matrix".into(),
        ));
    }
    if p.len() != a.cols() || b.len() != a.rows() {
        return Err(Error::Dimension("projection operand lengths".into()));
    }
    let mut r = a.mul_vec(p);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri -= bi;
    }
    if r.iter().all(|&x| x == T::zero()) {
        return Ok(p.to_vec());
    }
    let z = fact.solve(&r);
    let mut x = p.to_vec();
    let correction = a.tr_mul_vec(&z);
    axpy(-T::one(), &correction, &mut x);
    Ok(x)
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration from a fixed, non-constant start vector.
///
/// Stops once the Rayleigh quotient changes by at most `tol * estimate`
/// and the eigen-residual `‖M v - λ v‖` is at most `sqrt(tol) * λ`.
pub fn lambda_max<T: Real>(m: &DenseMatrix<T>, tol: T, max_iter: usize) -> Result<T> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension("lambda_max of a non-square matrix".into()));
    }
    let n = m.rows();
    // All-ones is the null vector of a graph Laplacian, so the start vector
    // deliberately breaks that symmetry.
    let mut v: Vec<T> = (0..n)
        .map(|i| {
            let h = ((i as u64).wrapping_mul(2654435761) % 1000) as f64 / 1000.0;
            T::lit(1.0 + h)
        })
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut w = vec![T::zero(); n];
    let mut estimate = T::zero();
    for _ in 0..max_iter {
        m.mul_vec_into(&v, &mut w);
        let lambda = dot(&v, &w);
        let nw = norm2(&w);
        if nw == T::zero() {
            return Ok(T::zero());
        }
        let residual = w
            .iter()
            .zip(&v)
            .map(|(&wi, &vi)| (wi - lambda * vi) * (wi - lambda * vi))
            .sum::<T>()
            .sqrt();
        if (lambda - estimate).abs() <= tol * lambda.abs() && residual <= tol.sqrt() * lambda.abs()
        {
            return Ok(lambda);
        }
        estimate = lambda;
        for (vi, &wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        estimate: estimate.as_f64(),
    })
}
