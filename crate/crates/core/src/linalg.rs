//! Dense complex matrices and vectors at small dimension.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::{Error, Result, C64, TOL};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

#[derive(Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<C64>,
}

/// Dimensions of the tensor factors labelling a matrix or vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemDims(Vec<usize>);

impl SubsystemDims {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid factor dimensions {dims:?}")));
        }
        Ok(SubsystemDims(dims.to_vec()))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    /// Split a flat index into per-factor digits.
    pub fn digits(&self, mut index: usize, out: &mut [usize]) {
        for k in (0..self.0.len()).rev() {
            out[k] = index % self.0[k];
            index /= self.0[k];
        }
    }

    pub fn flat(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.0).fold(0, |acc, (&d, &n)| acc * n + d)
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Build from nested rows. Panics on ragged input, so meant for literals.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix literal");
        ComplexMatrix { rows: r, cols: c, data: rows.iter().flat_map(|row| row.iter().copied()).collect() }
    }

    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix literal");
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| C64::new(x, 0.0))).collect();
        ComplexMatrix { rows: r, cols: c, data }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// |i><j| in dimension n.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn from_columns(cols: &[ComplexVector]) -> Result<Self> {
        let rows = cols.first().map_or(0, |c| c.dim());
        if cols.iter().any(|c| c.dim() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        Ok(m)
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise absolute difference; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.dagger() * self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector dimension mismatch");
        let mut out = vec![ZERO; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(v.data()).map(|(a, b)| a * b).sum();
        }
        ComplexVector::new(out)
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert!(self.cols == other.rows && self.rows == other.cols, "trace_product shape mismatch");
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// Block (i, j) of size `rb × cb`.
    pub fn block(&self, i: usize, j: usize, rb: usize, cb: usize) -> Self {
        let mut m = Self::zeros(rb, cb);
        for r in 0..rb {
            for c in 0..cb {
                m[(r, c)] = self[(i * rb + r, j * cb + c)];
            }
        }
        m
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "matrix sum shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "matrix difference shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl ComplexVector {
    pub fn new(data: Vec<C64>) -> Self {
        ComplexVector { data }
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexVector { data: vec![ZERO; dim] }
    }

    /// Computational basis vector |i> in dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = ONE;
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        ComplexVector { data: entries.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// <self|other>, antilinear in self.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Degenerate("cannot normalize the zero vector".into()));
        }
        Ok(self.scale_real(1.0 / n))
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexVector { data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn conj(&self) -> Self {
        ComplexVector { data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        ComplexVector { data }
    }

    /// |self><other|
    pub fn outer(&self, other: &Self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim(), other.dim());
        for i in 0..self.dim() {
            for j in 0..other.dim() {
                m[(i, j)] = self.data[i] * other.data[j].conj();
            }
        }
        m
    }

    pub fn projector(&self) -> ComplexMatrix {
        self.outer(self)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// |<self|other>|^2 / (|self|^2 |other|^2)
    pub fn fidelity(&self, other: &Self) -> f64 {
        let n = self.norm() * other.norm();
        if n == 0.0 {
            return 0.0;
        }
        (self.inner(other).norm() / n).powi(2)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "vector sum dimension mismatch");
        ComplexVector { data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "vector difference dimension mismatch");
        ComplexVector { data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.data.iter().map(|z| format!("{:+.4}{:+.4}i", z.re, z.im)).collect();
        write!(f, "ComplexVector[{}]", items.join(", "))
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a sequence, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    factors.iter().fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

fn check_labels(m: &ComplexMatrix, dims: &SubsystemDims) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("expected a square matrix, got {}x{}", m.rows, m.cols)));
    }
    if dims.total() != m.rows {
        return Err(Error::Dimension(format!("factor dimensions {:?} do not multiply to {}", dims.dims(), m.rows)));
    }
    Ok(())
}

/// Trace over every factor not listed in `keep`. Kept factors stay in their
/// original relative order.
pub fn partial_trace(m: &ComplexMatrix, dims: &SubsystemDims, keep: &[usize]) -> Result<ComplexMatrix> {
    check_labels(m, dims)?;
    let n = dims.len();
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::IndexOutOfRange { index: bad, count: n });
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims.dims()[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims.dims()[k]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();
    let kd = SubsystemDims(kept_dims);
    let td = SubsystemDims(traced_dims);

    let mut out = ComplexMatrix::zeros(dk, dk);
    let mut digits = vec![0usize; n];
    let mut kdig = vec![0usize; kept.len()];
    let mut tdig = vec![0usize; traced.len()];
    let full = |kdig: &[usize], tdig: &[usize], digits: &mut [usize]| {
        for (p, &k) in kept.iter().enumerate() {
            digits[k] = kdig[p];
        }
        for (p, &t) in traced.iter().enumerate() {
            digits[t] = tdig[p];
        }
        dims.flat(digits)
    };
    let mut rows = vec![0usize; dk * dt];
    for a in 0..dk {
        kd.digits(a, &mut kdig);
        for t in 0..dt {
            td.digits(t, &mut tdig);
            rows[a * dt + t] = full(&kdig, &tdig, &mut digits);
        }
    }
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(rows[a * dt + t], rows[b * dt + t])];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

fn permutation_map(dims: &SubsystemDims, perm: &[usize]) -> Result<(SubsystemDims, Vec<usize>)> {
    let n = dims.len();
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Dimension(format!("permutation of length {} for {n} factors", perm.len())));
    }
    for &p in perm {
        if p >= n {
            return Err(Error::IndexOutOfRange { index: p, count: n });
        }
        if seen[p] {
            return Err(Error::Dimension(format!("repeated factor {p} in permutation")));
        }
        seen[p] = true;
    }
    let new_dims = SubsystemDims(perm.iter().map(|&p| dims.dims()[p]).collect());
    let total = dims.total();
    let mut map = vec![0usize; total];
    let mut old = vec![0usize; n];
    let mut new = vec![0usize; n];
    for (idx, slot) in map.iter_mut().enumerate() {
        new_dims.digits(idx, &mut new);
        for (k, &p) in perm.iter().enumerate() {
            old[p] = new[k];
        }
        *slot = dims.flat(&old);
    }
    Ok((new_dims, map))
}

/// Reorder tensor factors: factor `k` of the result is factor `perm[k]` of
/// the input. Returns the permuted matrix and its factor dimensions.
pub fn permute_subsystems(
    m: &ComplexMatrix,
    dims: &SubsystemDims,
    perm: &[usize],
) -> Result<(ComplexMatrix, SubsystemDims)> {
    check_labels(m, dims)?;
    let (new_dims, map) = permutation_map(dims, perm)?;
    let n = m.rows;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = m[(map[i], map[j])];
        }
    }
    Ok((out, new_dims))
}

pub fn permute_vector(
    v: &ComplexVector,
    dims: &SubsystemDims,
    perm: &[usize],
) -> Result<(ComplexVector, SubsystemDims)> {
    if dims.total() != v.dim() {
        return Err(Error::Dimension(format!("factor dimensions {:?} do not multiply to {}", dims.dims(), v.dim())));
    }
    let (new_dims, map) = permutation_map(dims, perm)?;
    Ok((ComplexVector::new(map.iter().map(|&i| v[i]).collect()), new_dims))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations. Stops once the off-diagonal Frobenius norm is
/// below 1e-12 relative to max(1, ‖m‖_F).
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigen-decomposition of a {}x{} matrix", m.rows, m.cols)));
    }
    let scale = m.frobenius_norm().max(1.0);
    let herr = m.hermiticity_error();
    if herr > TOL * scale {
        return Err(Error::NotHermitian(herr));
    }
    let n = m.rows;
    let mut a = m.clone();
    for i in 0..n {
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let threshold = 1e-12 * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off < threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag < 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let theta = 0.5 * (2.0 * mag).atan2(a[(q, q)].re - a[(p, p)].re);
                let (s, c) = theta.sin_cos();
                // G = diag(1, e^{-i phi}) · [[c, s], [-s, c]] on the (p, q) plane.
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[(r, src)];
        }
    }
    Ok(Eigen { values, vectors })
}

impl Eigen {
    /// V f(Λ) V†
    pub fn map_values(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let fk = f(lam);
            if fk == ZERO {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fk;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_values(|x| C64::new(x, 0.0))
    }
}

pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    let herr = m.hermiticity_error();
    if herr > tol.max(TOL) {
        return Err(Error::NotHermitian(herr));
    }
    let eig = hermitian_eigen(m)?;
    Ok(eig.values.first().is_none_or(|&v| v >= -tol))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(m)?.values.first().copied().unwrap_or(0.0))
}

/// Principal square root of a PSD matrix; slightly negative eigenvalues are
/// clamped to zero.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m)?;
    if let Some(&low) = eig.values.first() {
        if low < -TOL * m.frobenius_norm().max(1.0) {
            return Err(Error::NotPositive(low));
        }
    }
    Ok(eig.map_values(|x| C64::new(x.max(0.0).sqrt(), 0.0)))
}

/// exp(-i t H) for Hermitian H, through its spectral decomposition.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.map_values(|x| C64::from_polar(1.0, -t * x)))
}

/// Modified Gram–Schmidt with one reorthogonalization pass. Candidates whose
/// residual norm falls below `drop_tol` are skipped.
pub fn orthonormalize(candidates: &[ComplexVector], start: &[ComplexVector], drop_tol: f64) -> Vec<ComplexVector> {
    let mut basis: Vec<ComplexVector> = start.to_vec();
    let mut added = Vec::new();
    for c in candidates {
        let mut r = c.clone();
        for _ in 0..2 {
            for b in &basis {
                r = r.sub(&b.scale(b.inner(&r)));
            }
        }
        let n = r.norm();
        if n > drop_tol {
            let q = r.scale_real(1.0 / n);
            basis.push(q.clone());
            added.push(q);
        }
    }
    added
}

pub mod pauli {
    use super::ComplexMatrix;
    use crate::C64;

    pub fn id() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        ComplexMatrix::from_rows(&[&[z, -i], &[i, z]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    pub fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real(&[&[s, s], &[s, -s]])
    }
}
