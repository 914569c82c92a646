use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Square complex matrix of dimension ≥ 2.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows < 2 {
            return Err(Error::NotSquare { rows, cols });
        }
        Ok(Operator(matrix))
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    /// `|row⟩⟨col|`
    pub fn transition(dim: usize, row: usize, col: usize) -> Result<Self> {
        let mut m = DMatrix::zeros(dim, dim);
        if row >= dim || col >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.max(col) + 1,
            });
        }
        m[(row, col)] = C64::new(1.0, 0.0);
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Operator {
        Operator(self.0.adjoint())
    }

    /// Largest entrywise modulus of `A − A†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Exact Hermiticity: every entry equals the conjugate of its mirror.
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() == 0.0
    }

    /// Anti-Hermitian part expressed as the Hermitian matrix `i (A − A†)`.
    /// It is positive semidefinite for purely lossy generators.
    pub fn loss_matrix(&self) -> DMatrix<C64> {
        (&self.0 - self.0.adjoint()) * C64::new(0.0, 1.0)
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        eigenvalues(self)
    }
}

/// Eigenvalues of a (possibly non-Hermitian) operator, sorted by real part
/// and then imaginary part.
pub fn eigenvalues(op: &Operator) -> Vec<C64> {
    let m = op.matrix();
    let mut values: Vec<C64> = if is_diagonal(m) {
        m.diagonal().iter().copied().collect()
    } else {
        // complex Schur form is upper triangular; its diagonal is the spectrum
        let (_, t) = m.clone().schur().unpack();
        t.diagonal().iter().copied().collect()
    };
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    values
}

fn is_diagonal(m: &DMatrix<C64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)))
}
