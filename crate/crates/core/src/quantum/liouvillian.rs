use nalgebra::{DMatrix, DVector};

use super::{Operator, MAX_DIM};
use crate::{Error, Result, C64};

/// Tolerance on the trace row below which a generator counts as trace
/// preserving.
const TRACE_ROW_TOL: f64 = 1e-12;

/// Jump operator `J` with its rate; contributes
/// `rate · (J ρ J† − ½{J†J, ρ})`.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladTerm {
    jump: Operator,
    rate: f64,
}

impl LindbladTerm {
    pub fn new(jump: Operator, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::NegativeRate(rate));
        }
        Ok(LindbladTerm { jump, rate })
    }

    pub fn jump(&self) -> &Operator {
        &self.jump
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Matrix of a master-equation generator acting on column-stacked `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    matrix: DMatrix<C64>,
    trace_decreasing: bool,
}

impl Liouvillian {
    /// Wraps a raw superoperator matrix of size `dim² × dim²`.
    pub fn from_matrix(dim: usize, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.shape() != (dim * dim, dim * dim) {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.nrows(),
            });
        }
        let trace_decreasing = trace_row_defect(dim, &matrix) > TRACE_ROW_TOL;
        Ok(Liouvillian {
            dim,
            matrix,
            trace_decreasing,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Set when `Tr(L ρ) ≠ 0` for some `ρ`, i.e. the generator leaks norm.
    pub fn is_trace_decreasing(&self) -> bool {
        self.trace_decreasing
    }

    /// Largest modulus in the row that computes `Tr(ρ̇)`.
    pub fn trace_row_defect(&self) -> f64 {
        trace_row_defect(self.dim, &self.matrix)
    }

    /// `ρ̇ = L ρ`
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        unvectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::from_matrix(dim, DMatrix::zeros(dim * dim, dim * dim))
    }
}

fn trace_row_defect(dim: usize, matrix: &DMatrix<C64>) -> f64 {
    (0..dim * dim)
        .map(|col| {
            (0..dim)
                .map(|i| matrix[(i * dim + i, col)])
                .sum::<C64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

/// Column-stacking `vec(ρ)`.
pub fn vectorize(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, dim: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Superoperator of `ρ ↦ −i(Hρ − ρH†)`.
pub fn hamiltonian_superoperator(h: &DMatrix<C64>) -> DMatrix<C64> {
    let n = h.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let left = id.kronecker(h);
    let right = h.map(|z| z.conj()).kronecker(&id);
    (left - right) * C64::new(0.0, -1.0)
}

fn dissipator(j: &DMatrix<C64>, rate: f64) -> DMatrix<C64> {
    let n = j.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let jdj = j.adjoint() * j;
    let sandwich = j.map(|z| z.conj()).kronecker(j);
    let anti = id.kronecker(&jdj) + jdj.transpose().kronecker(&id);
    (sandwich - anti * C64::new(0.5, 0.0)) * C64::new(rate, 0.0)
}

fn jump_only(j: &DMatrix<C64>, rate: f64) -> DMatrix<C64> {
    j.map(|z| z.conj()).kronecker(j) * C64::new(rate, 0.0)
}

fn check_dims(h: &Operator, terms: &[LindbladTerm]) -> Result<usize> {
    let n = h.dim();
    if n > MAX_DIM {
        return Err(Error::DimensionMismatch {
            expected: MAX_DIM,
            found: n,
        });
    }
    for t in terms {
        if t.jump.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.jump.dim(),
            });
        }
    }
    Ok(n)
}

/// Matrix of `ρ ↦ −i(Hρ − ρH†) + Σ rate·(JρJ† − ½{J†J, ρ})`.
///
/// `H` may be non-Hermitian; its anti-Hermitian part then removes norm and
/// the returned generator is flagged as trace decreasing.
pub fn build_liouvillian(h: &Operator, terms: &[LindbladTerm]) -> Result<Liouvillian> {
    let n = check_dims(h, terms)?;
    let mut l = hamiltonian_superoperator(h.matrix());
    for t in terms {
        l += dissipator(t.jump.matrix(), t.rate);
    }
    Liouvillian::from_matrix(n, l)
}

/// Like [`build_liouvillian`], but the norm removed by the anti-Hermitian
/// part of `H` is returned to the state it leaked from.
///
/// With `K = i(H − H†) = Σ κₖ |vₖ⟩⟨vₖ|` this adds `Σ κₖ Pₖ ρ Pₖ`,
/// `Pₖ = |vₖ⟩⟨vₖ|`, making the generator trace preserving. Physically the
/// lost photon leaves the system while the atom is returned to where it
/// started. Gain (`κₖ < 0`) is rejected.
pub fn build_liouvillian_recycled(h: &Operator, terms: &[LindbladTerm]) -> Result<Liouvillian> {
    let n = check_dims(h, terms)?;
    let mut l = hamiltonian_superoperator(h.matrix());
    for t in terms {
        l += dissipator(t.jump.matrix(), t.rate);
    }
    let k = h.loss_matrix();
    if k.iter().any(|z| z.norm() > 0.0) {
        let eig = k.symmetric_eigen();
        for (idx, &kappa) in eig.eigenvalues.iter().enumerate() {
            if kappa < -1e-14 {
                return Err(Error::param(
                    "hamiltonian",
                    format!("anti-Hermitian part has gain {kappa:e}"),
                ));
            }
            if kappa <= 1e-14 {
                continue;
            }
            let v = eig.eigenvectors.column(idx);
            let p = v * v.adjoint();
            l += jump_only(&p, kappa);
        }
    }
    Liouvillian::from_matrix(n, l)
}
