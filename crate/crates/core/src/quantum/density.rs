use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

const TRACE_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = -1e-8;

/// Positive, unit-trace complex matrix.
///
/// States produced by [`DensityMatrix::new`] are validated; trajectory
/// samples from trace-decreasing evolution are stored without the trace
/// check (see [`DensityMatrix::from_matrix_unchecked`]).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows < 2 {
            return Err(Error::NotSquare { rows, cols });
        }
        let rho = DensityMatrix(matrix);
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let defect = rho.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let min_ev = rho.min_eigenvalue();
        if min_ev < EIGEN_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_ev:e}"
            )));
        }
        Ok(rho)
    }

    /// Hermitizes, rescales to unit trace and validates.
    pub fn normalized(matrix: DMatrix<C64>) -> Result<Self> {
        let h = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        let tr = h.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidState(format!(
                "trace {tr} cannot be normalized"
            )));
        }
        Self::new(h / C64::new(tr, 0.0))
    }

    pub fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        DensityMatrix(matrix)
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm2 = psi.norm_squared();
        if norm2 <= 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        Self::normalized(psi * psi.adjoint() / C64::new(norm2, 0.0))
    }

    /// Projector onto basis state `index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Self::new(m)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
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

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0[(level, level)].re
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
    pub fn expectation_in(&self, psi: &DVector<C64>) -> f64 {
        (psi.adjoint() * &self.0 * psi)[(0, 0)].re
    }

    /// Entrywise maximum distance to another matrix.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }
}
