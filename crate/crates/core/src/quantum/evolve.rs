use nalgebra::{DMatrix, DVector};

use super::{liouvillian::vectorize, unvectorize, DensityMatrix, Liouvillian};
use crate::{Error, Result, C64};

/// Right-hand side `ρ̇ = L(t) ρ` in column-stacked form.
pub trait Generator {
    /// Hilbert-space dimension.
    fn dim(&self) -> usize;
    fn apply(&self, t: f64, x: &DVector<C64>, out: &mut DVector<C64>);
}

impl Generator for Liouvillian {
    fn dim(&self) -> usize {
        Liouvillian::dim(self)
    }

    fn apply(&self, _t: f64, x: &DVector<C64>, out: &mut DVector<C64>) {
        out.gemv(C64::new(1.0, 0.0), self.matrix(), x, C64::new(0.0, 0.0));
    }
}

type Envelope = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// `L(t) = L₀ + Σₖ fₖ(t) Dₖ` with fixed superoperators `Dₖ` and scalar
/// envelopes `fₖ`.
pub struct DrivenLiouvillian {
    dim: usize,
    base: DMatrix<C64>,
    drives: Vec<(DMatrix<C64>, Envelope)>,
}

impl DrivenLiouvillian {
    pub fn new(base: Liouvillian) -> Self {
        DrivenLiouvillian {
            dim: base.dim(),
            base: base.matrix().clone(),
            drives: Vec::new(),
        }
    }

    pub fn with_drive(
        mut self,
        superoperator: DMatrix<C64>,
        envelope: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let size = self.dim * self.dim;
        if superoperator.shape() != (size, size) {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: superoperator.nrows(),
            });
        }
        self.drives.push((superoperator, Box::new(envelope)));
        Ok(self)
    }

    /// Generator frozen at time `t`.
    pub fn at(&self, t: f64) -> Result<Liouvillian> {
        let mut m = self.base.clone();
        for (d, f) in &self.drives {
            m += d * C64::new(f(t), 0.0);
        }
        Liouvillian::from_matrix(self.dim, m)
    }
}

impl Generator for DrivenLiouvillian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, x: &DVector<C64>, out: &mut DVector<C64>) {
        let one = C64::new(1.0, 0.0);
        out.gemv(one, &self.base, x, C64::new(0.0, 0.0));
        for (d, f) in &self.drives {
            let a = f(t);
            if a != 0.0 {
                out.gemv(C64::new(a, 0.0), d, x, one);
            }
        }
    }
}

/// Tolerances for the embedded Runge–Kutta integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on a single step, in 1/Γ.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rtol: 1e-8,
            atol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.17;
const PI_BETA: f64 = 0.04;

struct Stepper<'a, G: Generator + ?Sized> {
    gen: &'a G,
    k: [DVector<C64>; 7],
    tmp: DVector<C64>,
    y_new: DVector<C64>,
}

impl<'a, G: Generator + ?Sized> Stepper<'a, G> {
    fn combine(&mut self, y: &DVector<C64>, h: f64, coeffs: &[(usize, f64)]) {
        self.tmp.copy_from(y);
        for &(i, a) in coeffs {
            self.tmp
                .axpy(C64::new(h * a, 0.0), &self.k[i], C64::new(1.0, 0.0));
        }
    }

    /// One trial step; `k[0]` must hold `f(t, y)`. Returns the scaled error.
    fn attempt(&mut self, t: f64, y: &DVector<C64>, h: f64, opts: &EvolveOptions) -> f64 {
        let stages: [(f64, &[(usize, f64)]); 5] = [
            (C2, &[(0, A21)]),
            (C3, &[(0, A31), (1, A32)]),
            (C4, &[(0, A41), (1, A42), (2, A43)]),
            (C5, &[(0, A51), (1, A52), (2, A53), (3, A54)]),
            (1.0, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]),
        ];
        for (s, (c, coeffs)) in stages.iter().enumerate() {
            self.combine(y, h, coeffs);
            let (head, tail) = self.k.split_at_mut(s + 1);
            let _ = head;
            self.gen.apply(t + c * h, &self.tmp, &mut tail[0]);
        }
        self.combine(y, h, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]);
        self.y_new.copy_from(&self.tmp);
        let (_, last) = self.k.split_at_mut(6);
        self.gen.apply(t + h, &self.y_new, &mut last[0]);

        let mut acc = 0.0;
        for i in 0..y.len() {
            let e = (self.k[0][i] * E1
                + self.k[2][i] * E3
                + self.k[3][i] * E4
                + self.k[4][i] * E5
                + self.k[5][i] * E6
                + self.k[6][i] * E7)
                * h;
            let scale = opts.atol + opts.rtol * y[i].norm().max(self.y_new[i].norm());
            acc += (e.norm() / scale).powi(2);
        }
        (acc / y.len() as f64).sqrt()
    }
}

/// Integrates `ρ̇ = L(t) ρ` from `grid[0]` and returns the state at every
/// grid point (the first entry is `ρ0`).
///
/// Dormand–Prince 5(4) with FSAL and PI step-size control; the local error
/// estimate is held below `atol + rtol·|y|` componentwise (RMS norm).
pub fn evolve<G: Generator + ?Sized>(
    rho0: &DensityMatrix,
    gen: &G,
    grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    let n = gen.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho0.dim(),
        });
    }
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(
            "grid",
            "time grid must be finite and strictly increasing",
        ));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::param("tolerance", "rtol and atol must be positive"));
    }

    let size = n * n;
    let mut y = vectorize(rho0.matrix());
    let mut t = grid[0];
    let mut out = Vec::with_capacity(grid.len());
    out.push(rho0.clone());

    let zero = || DVector::<C64>::zeros(size);
    let mut st = Stepper {
        gen,
        k: [zero(), zero(), zero(), zero(), zero(), zero(), zero()],
        tmp: zero(),
        y_new: zero(),
    };
    gen.apply(t, &y, &mut st.k[0]);

    let span = grid[grid.len() - 1] - grid[0];
    let mut h = initial_step(&y, &st.k[0], opts)
        .min(span)
        .min(opts.max_step);
    let mut err_prev = 1e-4f64;
    let mut steps = 0usize;

    for &target in &grid[1..] {
        while t < target {
            let remaining = target - t;
            let truncated = h >= remaining;
            let h_try = if truncated { remaining } else { h };
            let min_step = 1e-13 * t.abs().max(1.0);
            if h_try < min_step && !truncated {
                return Err(Error::Integration {
                    t,
                    reason: format!("step size underflow (h = {h_try:e})"),
                });
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("exceeded {} steps", opts.max_steps),
                });
            }
            let err = st.attempt(t, &y, h_try, opts);
            if !err.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }
            if err <= 1.0 {
                t = if truncated { target } else { t + h_try };
                y.copy_from(&st.y_new);
                st.k.swap(0, 6);
                let factor = (SAFETY * err.max(1e-10).powf(-PI_ALPHA) * err_prev.powf(PI_BETA))
                    .clamp(0.2, 10.0);
                err_prev = err.max(1e-4);
                let proposal = h_try * factor;
                h = if truncated { proposal.max(h) } else { proposal };
            } else {
                h = h_try * (SAFETY * err.powf(-0.2)).max(0.2);
            }
            h = h.min(opts.max_step);
        }
        out.push(DensityMatrix::from_matrix_unchecked(unvectorize(&y, n)));
    }
    Ok(out)
}

fn initial_step(y: &DVector<C64>, f: &DVector<C64>, opts: &EvolveOptions) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..y.len() {
        let sc = opts.atol + opts.rtol * y[i].norm();
        d0 += (y[i].norm() / sc).powi(2);
        d1 += (f[i].norm() / sc).powi(2);
    }
    let (d0, d1) = (d0.sqrt(), d1.sqrt());
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
}
