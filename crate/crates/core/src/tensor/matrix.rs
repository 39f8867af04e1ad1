use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::eigen::{eigh, Eigen};

/// Elementwise tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-12;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds an `n × n` matrix from row-major entries.
    pub fn from_row_major(n: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "{} entries do not form a {n}x{n} matrix",
                data.len()
            )));
        }
        Ok(Matrix { n, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::ShapeMismatch("ragged rows".into()));
            }
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Ok(Matrix { n, data })
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::ShapeMismatch("outer product of unequal lengths".into()));
        }
        let n = u.len();
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        Ok(m)
    }

    pub fn pauli_x() -> Self {
        Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        Matrix { n: 2, data: vec![z, -i, i, z] }
    }

    pub fn pauli_z() -> Self {
        Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        Matrix { n: self.n, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Self {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { n: self.n, data }
    }

    pub fn sub(&self, other: &Matrix) -> Self {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { n: self.n, data }
    }

    /// Kronecker product, `self` on the slow index.
    pub fn kron(&self, other: &Matrix) -> Self {
        let n = self.n * other.n;
        let mut m = Matrix::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                let a = self[(i, j)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..other.n {
                    for l in 0..other.n {
                        m[(i * other.n + k, j * other.n + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest elementwise `|M_ij - conj(M_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{})[", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// A Hermitian operator on a single qudit, with its spectral data cached.
#[derive(Clone, Debug)]
pub struct HermitianObservable {
    matrix: Matrix,
    eigen: Eigen,
}

impl HermitianObservable {
    /// Validates Hermiticity and diagonalizes. The stored matrix is the
    /// exactly Hermitian part `(M + M†)/2`.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.dim() < 2 {
            return Err(Error::Dimension(format!(
                "observable dimension {} is below 2",
                matrix.dim()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::ShapeMismatch("observable has non-finite entries".into()));
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let matrix = matrix.add(&matrix.adjoint()).scale(C64::new(0.5, 0.0));
        let eigen = eigh(&matrix)?;
        Ok(HermitianObservable { matrix, eigen })
    }

    pub fn pauli_x() -> Self {
        Self::new(Matrix::pauli_x()).unwrap()
    }

    pub fn pauli_y() -> Self {
        Self::new(Matrix::pauli_y()).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::new(Matrix::pauli_z()).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn eigen(&self) -> &Eigen {
        &self.eigen
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.eigen.values()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigen.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Spectral projectors `(λ, P_λ)`, one per degenerate cluster, ascending.
    ///
    /// Downstream code only ever sees these projectors, so results do not
    /// depend on how eigenvectors inside a cluster were chosen.
    pub fn spectral_projectors(&self) -> Vec<(f64, Matrix)> {
        let values = self.eigen.values();
        let vectors = self.eigen.vectors();
        let n = values.len();
        let mut out: Vec<(f64, Matrix)> = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && values[end] - values[end - 1] < DEGENERACY_GAP {
                end += 1;
            }
            let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
            let mut proj = Matrix::zeros(n);
            for k in start..end {
                let v = vectors.column(k);
                proj = proj.add(&Matrix::outer(&v, &v).unwrap());
            }
            out.push((mean, proj));
            start = end;
        }
        out
    }

    /// `⟨v|X|v⟩ / ⟨v|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let xv = self.matrix.apply(v);
        let num: C64 = v.iter().zip(&xv).map(|(a, b)| a.conj() * b).sum();
        let den: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        num.re / den
    }
}

/// Reduced density operator returned by partial traces.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: Matrix,
    weight: f64,
}

impl DensityOperator {
    /// `weight` is the trace the operator is expected to carry (the squared
    /// norm of the state it came from).
    pub fn new(matrix: Matrix, weight: f64) -> Self {
        DensityOperator { matrix, weight }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr ρ² / (Tr ρ)²`.
    pub fn purity(&self) -> f64 {
        let sq = &self.matrix * &self.matrix;
        let t = self.trace();
        sq.trace().re / (t * t)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigh(&self.matrix)?.values().to_vec())
    }

    pub fn is_positive_semidefinite(&self, tol: f64) -> Result<bool> {
        Ok(self.eigenvalues()?.iter().all(|&v| v >= -tol))
    }
}
