use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// A complex column vector.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CVec {
    entries: Vec<C64>,
}

impl CVec {
    pub fn new(entries: Vec<C64>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: vec![C64::new(0.0, 0.0); dim] }
    }

    /// Computational basis ket `|index⟩` of dimension `dim`.
    pub fn ket(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self { entries: values.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &CVec) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: C64) -> CVec {
        CVec::new(self.entries.iter().map(|z| z * factor).collect())
    }

    /// `self += factor * other`
    pub fn axpy(&mut self, factor: C64, other: &CVec) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += factor * b;
        }
    }

    /// Returns the normalized vector, or `None` for a (numerically) zero vector.
    pub fn normalized(&self) -> Option<CVec> {
        let n = self.norm();
        (n > 1e-300).then(|| self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// Slice `[start, start + len)` as a new vector.
    pub fn segment(&self, start: usize, len: usize) -> CVec {
        CVec::new(self.entries[start..start + len].to_vec())
    }

    pub fn max_abs_diff(&self, other: &CVec) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `|self⟩⟨other|`
    pub fn outer(&self, other: &CVec) -> CMat {
        let mut m = CMat::zeros(self.dim(), other.dim());
        for (r, a) in self.entries.iter().enumerate() {
            for (c, b) in other.entries.iter().enumerate() {
                m.data[r * m.cols + c] = a * b.conj();
            }
        }
        m
    }

    /// `|self⟩⟨self|`
    pub fn projector(&self) -> CMat {
        self.outer(self)
    }
}

impl Index<usize> for CVec {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.entries[i]
    }
}

impl Add for &CVec {
    type Output = CVec;
    fn add(self, rhs: &CVec) -> CVec {
        CVec::new(self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVec {
    type Output = CVec;
    fn sub(self, rhs: &CVec) -> CVec {
        CVec::new(self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Debug for CVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

/// A dense complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| if r == c { C64::new(values[r], 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[CVec]) -> Result<Self> {
        let rows = columns.first().map(CVec::dim).unwrap_or(0);
        if columns.iter().any(|c| c.dim() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        Ok(Self::from_fn(rows, columns.len(), |r, c| columns[c][r]))
    }

    /// Block-diagonal matrix assembled from square or rectangular blocks.
    pub fn block_diag(blocks: &[CMat]) -> CMat {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = CMat::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    m.data[(r0 + r) * cols + c0 + c] = b.get(r, c);
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: C64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, c: usize) -> CVec {
        CVec::new((0..self.rows).map(|r| self.get(r, c)).collect())
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: C64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn scale_real(&self, factor: f64) -> CMat {
        self.scale(C64::new(factor, 0.0))
    }

    /// `(M + M†) / 2`
    pub fn hermitized(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |r, c| (self.get(r, c) + self.get(c, r).conj()) * 0.5)
    }

    /// Largest entry of `|M − M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn mul_vec(&self, v: &CVec) -> CVec {
        debug_assert_eq!(self.cols, v.dim());
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            out.push(row.iter().zip(v.entries()).map(|(a, b)| a * b).sum());
        }
        CVec::new(out)
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `|M†M − I|`; zero for an exact isometry.
    pub fn isometry_defect(&self) -> f64 {
        self.adjoint().matmul(self).max_abs_diff(&CMat::identity(self.cols))
    }

    /// Traces out the second factor of a `(dim_a·dim_b)`-square operator.
    pub fn partial_trace_second(&self, dim_a: usize, dim_b: usize) -> Result<CMat> {
        if !self.is_square() || self.rows != dim_a * dim_b {
            return Err(Error::Dimension(format!(
                "cannot split {}x{} as {dim_a}⊗{dim_b}",
                self.rows, self.cols
            )));
        }
        Ok(CMat::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| self.get(i * dim_b + k, j * dim_b + k)).sum()
        }))
    }

    /// Traces out the first factor of a `(dim_a·dim_b)`-square operator.
    pub fn partial_trace_first(&self, dim_a: usize, dim_b: usize) -> Result<CMat> {
        if !self.is_square() || self.rows != dim_a * dim_b {
            return Err(Error::Dimension(format!(
                "cannot split {}x{} as {dim_a}⊗{dim_b}",
                self.rows, self.cols
            )));
        }
        Ok(CMat::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|k| self.get(k * dim_b + i, k * dim_b + j)).sum()
        }))
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> CMat {
        CMat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

impl Mul<&CVec> for &CMat {
    type Output = CVec;
    fn mul(self, rhs: &CVec) -> CVec {
        self.mul_vec(rhs)
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Kronecker product, left factor most significant.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for CVec {
    fn tensor(&self, other: &CVec) -> CVec {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in self.entries() {
            for b in other.entries() {
                out.push(a * b);
            }
        }
        CVec::new(out)
    }
}

impl Tensor for CMat {
    fn tensor(&self, other: &CMat) -> CMat {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        CMat::from_fn(rows, cols, |r, c| {
            self.get(r / other.rows, c / other.cols) * other.get(r % other.rows, c % other.cols)
        })
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Haar-like random isometry `rows × cols` (rows ≥ cols): thin QR of a
/// complex Gaussian matrix with the R-diagonal phases absorbed.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<CMat> {
    if cols == 0 || rows < cols {
        return Err(Error::Dimension(format!("no {rows}x{cols} isometry")));
    }
    let g = DMatrix::<C64>::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..cols {
        let d = r[(c, c)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            for row in 0..rows {
                q[(row, c)] *= phase;
            }
        }
    }
    Ok(CMat::from_nalgebra(&q))
}
