use nalgebra::{DMatrix, DVector};

use super::{liouvillian::vectorize, unvectorize, DensityMatrix, Liouvillian};
use crate::{Error, Result, C64};

/// Relative threshold on the pivoted-QR diagonal used to count kernel
/// dimensions.
const KERNEL_RTOL: f64 = 1e-11;
const RESIDUAL_TOL: f64 = 1e-10;

fn trace_functional(dim: usize) -> DVector<C64> {
    let mut t = DVector::zeros(dim * dim);
    for i in 0..dim {
        t[i * dim + i] = C64::new(1.0, 0.0);
    }
    t
}

struct Basic {
    x: DVector<C64>,
    rank: usize,
}

/// Rank-revealing least-squares solve by column-pivoted QR. Columns past the
/// numerical rank are set to zero (basic solution).
fn basic_solve(a: &DMatrix<C64>, b: &DVector<C64>) -> Basic {
    let cols = a.ncols();
    let qr = a.clone().col_piv_qr();
    let r = qr.r();
    let lead = if r.nrows() > 0 { r[(0, 0)].norm() } else { 0.0 };
    let rank = (0..r.nrows().min(cols))
        .take_while(|&i| r[(i, i)].norm() > KERNEL_RTOL * lead.max(1.0))
        .count();
    let qtb = qr.q().adjoint() * b;
    let mut x = DVector::<C64>::zeros(cols);
    if rank > 0 {
        let head = r.view((0, 0), (rank, rank)).into_owned();
        let z = head
            .solve_upper_triangular(&qtb.rows(0, rank).into_owned())
            .expect("diagonal entries above the rank threshold are nonzero");
        x.rows_mut(0, rank).copy_from(&z);
    }
    qr.p().inv_permute_rows(&mut x);
    Basic { x, rank }
}

fn kernel_dimension(matrix: &DMatrix<C64>) -> usize {
    let zero = DVector::zeros(matrix.nrows());
    matrix.ncols() - basic_solve(matrix, &zero).rank
}

/// Unique unit-trace state in the kernel of `L`.
///
/// The kernel is found from the bordered system
/// `[[L, t], [tᵀ, 0]] [x; μ] = [0; 1]` with `t = vec(I)`, which is regular
/// exactly when the kernel is one-dimensional and not traceless.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let n = l.dim();
    let size = n * n;
    match kernel_dimension(l.matrix()) {
        0 => return Err(Error::NoSteadyState),
        1 => {}
        k => return Err(Error::NonUniqueSteadyState(k)),
    }

    let t = trace_functional(n);
    let mut bordered = DMatrix::<C64>::zeros(size + 1, size + 1);
    bordered
        .view_mut((0, 0), (size, size))
        .copy_from(l.matrix());
    bordered.view_mut((0, size), (size, 1)).copy_from(&t);
    bordered
        .view_mut((size, 0), (1, size))
        .copy_from(&t.transpose());
    let mut rhs = DVector::<C64>::zeros(size + 1);
    rhs[size] = C64::new(1.0, 0.0);

    let sol = bordered.lu().solve(&rhs).ok_or(Error::NoSteadyState)?;
    let x = sol.rows(0, size).into_owned();
    let rho = DensityMatrix::normalized(unvectorize(&x, n))?;
    let residual = (l.matrix() * vectorize(rho.matrix())).norm();
    if !(residual < RESIDUAL_TOL) {
        return Err(Error::NoSteadyState);
    }
    Ok(rho)
}

/// First-order steady-state response to a weak perturbation.
///
/// Given a stationary `ρ₀` of `L₀` and the superoperator `L₁` of a
/// perturbation, solves `L₀ ρ₁ = −L₁ ρ₀` with `Tr ρ₁ = 0`. If `L₀` has
/// further stationary states, their admixture is fixed by the basic solution
/// of a column-pivoted QR (deterministic; it only moves populations).
pub fn linear_response(
    l0: &Liouvillian,
    l1: &DMatrix<C64>,
    rho0: &DensityMatrix,
) -> Result<DMatrix<C64>> {
    let n = l0.dim();
    let size = n * n;
    if l1.shape() != (size, size) {
        return Err(Error::DimensionMismatch {
            expected: size,
            found: l1.nrows(),
        });
    }
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho0.dim(),
        });
    }
    let v0 = vectorize(rho0.matrix());
    let drift = (l0.matrix() * &v0).norm();
    if drift > RESIDUAL_TOL {
        return Err(Error::NotStationary(drift));
    }

    let source = -(l1 * &v0);
    let mut system = DMatrix::<C64>::zeros(size + 1, size);
    system.view_mut((0, 0), (size, size)).copy_from(l0.matrix());
    system
        .view_mut((size, 0), (1, size))
        .copy_from(&trace_functional(n).transpose());
    let mut rhs = DVector::<C64>::zeros(size + 1);
    rhs.rows_mut(0, size).copy_from(&source);

    let x = basic_solve(&system, &rhs).x;
    let residual = (&system * &x - &rhs).norm();
    if !(residual <= RESIDUAL_TOL * source.norm().max(1.0)) {
        return Err(Error::InconsistentResponse(residual));
    }
    Ok(unvectorize(&x, n))
}
