//! Dense complex linear algebra for small dimensions.
//!
//! Everything here works on row-major [`ComplexMatrix`] values and plain
//! [`Ket`] vectors. Eigen and singular value problems are handed to
//! `nalgebra`; the wrappers add validation, descending order and a fixed
//! eigenvector phase so that identical inputs give identical outputs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Entrywise tolerance used to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on the 2-norm for a ket flagged as normalized.
pub const NORM_TOL: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix stored in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &Ket, v: &Ket) -> Self {
        Self::from_fn(u.dim(), v.dim(), |i, j| u[i] * v[j].conj())
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn pauli_y() -> Self {
        Self::new(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
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

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`; `f64::INFINITY` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from M = M†.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &Ket) -> Result<Ket> {
        if self.cols != v.dim() {
            return Err(Error::Shape(format!(
                "cannot apply {}x{} matrix to a ket of dim {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let amps = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect();
        Ok(Ket::unnormalized(amps))
    }

    /// Column `j` as a ket.
    pub fn column(&self, j: usize) -> Ket {
        Ket::unnormalized((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn from_columns(cols: &[Ket]) -> Result<Self> {
        let rows = cols.first().map(Ket::dim).unwrap_or(0);
        if cols.iter().any(|k| k.dim() != rows) {
            return Err(Error::Shape("columns of unequal length".into()));
        }
        Ok(Self::from_fn(rows, cols.len(), |i, j| cols[j][i]))
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
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
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product; dimensions multiply.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

/// State vector. `normalized` records whether the amplitudes are meant to
/// have unit norm; symmetrized products are kept unnormalized.
#[derive(Clone, PartialEq)]
pub struct Ket {
    amps: Vec<Complex64>,
    normalized: bool,
}

impl Ket {
    /// Builds a normalized ket, rejecting amplitudes whose norm is off by
    /// more than [`NORM_TOL`].
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::OutOfRange(format!("ket norm {norm} is not 1")));
        }
        Ok(Self {
            amps,
            normalized: true,
        })
    }

    pub fn unnormalized(amps: Vec<Complex64>) -> Self {
        Self {
            amps,
            normalized: false,
        }
    }

    /// Computational basis vector |index⟩.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self {
            amps,
            normalized: true,
        }
    }

    pub fn from_real(amps: &[f64]) -> Self {
        Self::unnormalized(amps.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::NotNormalizable { norm });
        }
        Ok(Self {
            amps: self.amps.iter().map(|z| z / norm).collect(),
            normalized: true,
        })
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::unnormalized(self.amps.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &Ket) -> Self {
        assert_eq!(self.dim(), other.dim(), "ket dimension mismatch");
        Self::unnormalized(self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Ket) -> Self {
        assert_eq!(self.dim(), other.dim(), "ket dimension mismatch");
        Self::unnormalized(self.amps.iter().zip(&other.amps).map(|(a, b)| a - b).collect())
    }

    pub fn kron(&self, other: &Ket) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self {
            amps,
            normalized: self.normalized && other.normalized,
        }
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(self, self)
    }

    /// Largest entrywise distance after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &Ket) -> f64 {
        let overlap = self.inner(other);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }

    /// Multiplies by the phase that makes the largest-magnitude component
    /// real and positive (first index wins among near ties).
    pub fn canonical_phase(&self) -> Self {
        let max = self.amps.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return self.clone();
        }
        let pivot = self
            .amps
            .iter()
            .find(|z| z.norm() >= max - 1e-12)
            .copied()
            .unwrap_or(ONE);
        let phase = pivot.conj() / pivot.norm();
        Self {
            amps: self.amps.iter().map(|z| z * phase).collect(),
            normalized: self.normalized,
        }
    }
}

impl std::ops::Index<usize> for Ket {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.amps[i]
    }
}

impl fmt::Debug for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ket[")?;
        for z in &self.amps {
            write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
        }
        write!(f, " ]{}", if self.normalized { "" } else { " (unnormalized)" })
    }
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues in descending
/// order, eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Ket {
        let mut v = self.vectors.column(k);
        v.normalized = true;
        v
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Shape(format!("{}x{} is not square", m.rows, m.cols)));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.rows;
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    // Solve the exactly Hermitian part so rounding asymmetry cannot leak in.
    let sym = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let eig = sym.to_nalgebra().symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let columns: Vec<Ket> = order
        .iter()
        .map(|&k| {
            let col = Ket::unnormalized(eig.eigenvectors.column(k).iter().copied().collect());
            col.normalize().unwrap_or(col).canonical_phase()
        })
        .collect();
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix::from_columns(&columns)?,
    })
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.rows == 0 || m.cols == 0 {
        return vec![];
    }
    let mut sv: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Operator 2-norm (largest singular value).
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Standard normal complex sample with unit variance per component.
fn gaussian_c<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * u2;
    c(r * t.cos(), r * t.sin())
}

/// Haar-random normalized ket.
pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Ket {
    let v = Ket::unnormalized((0..dim).map(|_| gaussian_c(rng)).collect());
    v.normalize().expect("gaussian vector is nonzero")
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_c(rng));
    (&g + &g.dagger()).scale(c(0.5, 0.0))
}

/// Haar-random unitary via Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Ket> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = Ket::unnormalized((0..dim).map(|_| gaussian_c(rng)).collect());
        for u in &cols {
            v = v.sub(&u.scale(u.inner(&v)));
        }
        if let Ok(v) = v.normalize() {
            cols.push(v);
        }
    }
    ComplexMatrix::from_columns(&cols).expect("equal length columns")
}

/// exp(iH) for Hermitian H, computed spectrally.
pub fn unitary_from_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let phases: Vec<Complex64> = eig.values.iter().map(|&l| Complex64::from_polar(1.0, l)).collect();
    let v = &eig.vectors;
    Ok(&(v * &ComplexMatrix::diag(&phases)) * &v.dagger())
}
