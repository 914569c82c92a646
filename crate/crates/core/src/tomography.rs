//! Six-basis polarization tomography: simulated counts, linear inversion
//! and maximum-likelihood reconstruction.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::quantum::DensityMatrix;
use crate::qubit::PolarizationQubit;
use crate::{Error, Result, C64};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Basis {
    pub const ALL: [Basis; 6] = [Basis::H, Basis::V, Basis::D, Basis::A, Basis::R, Basis::L];

    pub fn state(self) -> PolarizationQubit {
        match self {
            Basis::H => PolarizationQubit::h(),
            Basis::V => PolarizationQubit::v(),
            Basis::D => PolarizationQubit::d(),
            Basis::A => PolarizationQubit::a(),
            Basis::R => PolarizationQubit::r(),
            Basis::L => PolarizationQubit::l(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Basis::H => "H",
            Basis::V => "V",
            Basis::D => "D",
            Basis::A => "A",
            Basis::R => "R",
            Basis::L => "L",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementRecord {
    pub basis: Basis,
    pub counts: u64,
    pub shots: u64,
}

impl MeasurementRecord {
    pub fn new(basis: Basis, counts: u64, shots: u64) -> Result<Self> {
        let r = MeasurementRecord {
            basis,
            counts,
            shots,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::param("shots", "must be positive"));
        }
        if self.counts > self.shots {
            return Err(Error::param(
                "counts",
                format!("{} counts exceed {} shots", self.counts, self.shots),
            ));
        }
        Ok(())
    }

    pub fn frequency(&self) -> f64 {
        self.counts as f64 / self.shots as f64
    }
}

/// Binomial counts in each of the six bases, in [`Basis::ALL`] order.
pub fn simulate_counts(
    rho: &DensityMatrix,
    shots: u64,
    seed: u64,
) -> Result<Vec<MeasurementRecord>> {
    if shots == 0 {
        return Err(Error::param("shots", "must be positive"));
    }
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Basis::ALL
        .iter()
        .map(|&basis| {
            let p = rho.expectation_in(&basis.state().vector()).clamp(0.0, 1.0);
            let dist =
                Binomial::new(shots, p).map_err(|e| Error::param("probability", e.to_string()))?;
            Ok(MeasurementRecord {
                basis,
                counts: dist.sample(&mut rng),
                shots,
            })
        })
        .collect()
}

/// Exact expected frequencies, as records with `shots` trials each.
pub fn expected_records(rho: &DensityMatrix, shots: u64) -> Result<Vec<MeasurementRecord>> {
    Basis::ALL
        .iter()
        .map(|&basis| {
            let p = rho.expectation_in(&basis.state().vector()).clamp(0.0, 1.0);
            MeasurementRecord::new(basis, (p * shots as f64).round() as u64, shots)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearInversion {
    /// `½(I + s·σ)`: Hermitian with unit trace, possibly not positive.
    pub rho: DMatrix<C64>,
    pub stokes: [f64; 3],
    pub physical: bool,
}

fn check_records(records: &[MeasurementRecord]) -> Result<()> {
    for r in records {
        r.validate()?;
    }
    for b in Basis::ALL {
        if !records.iter().any(|r| r.basis == b) {
            return Err(Error::MissingBasis(b.as_str()));
        }
    }
    Ok(())
}

pub fn linear_inversion(records: &[MeasurementRecord]) -> Result<LinearInversion> {
    check_records(records)?;
    let freq = |b: Basis| {
        let (n, s) = records
            .iter()
            .filter(|r| r.basis == b)
            .fold((0u64, 0u64), |(n, s), r| (n + r.counts, s + r.shots));
        n as f64 / s as f64
    };
    let contrast = |p: f64, m: f64| if p + m > 0.0 { (p - m) / (p + m) } else { 0.0 };
    let stokes = [
        contrast(freq(Basis::H), freq(Basis::V)),
        contrast(freq(Basis::D), freq(Basis::A)),
        contrast(freq(Basis::R), freq(Basis::L)),
    ];
    let [s1, s2, s3] = stokes;
    let rho = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new((1.0 + s1) / 2.0, 0.0),
            C64::new(s2 / 2.0, -s3 / 2.0),
            C64::new(s2 / 2.0, s3 / 2.0),
            C64::new((1.0 - s1) / 2.0, 0.0),
        ],
    );
    let physical = s1 * s1 + s2 * s2 + s3 * s3 <= 1.0 + 1e-12;
    Ok(LinearInversion {
        rho,
        stokes,
        physical,
    })
}

/// Nearest state with the same eigenvectors: negative eigenvalues set to 0.
fn project_physical(m: &DMatrix<C64>) -> Result<DensityMatrix> {
    let eig = m.clone().symmetric_eigen();
    let clipped = eig.eigenvalues.map(|x| C64::new(x.max(0.0), 0.0));
    let v = &eig.eigenvectors;
    DensityMatrix::normalized(v * DMatrix::from_diagonal(&clipped) * v.adjoint())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult {
    pub rho_hat: DensityMatrix,
    /// `Σ n_k ln p_k`
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Serialized form of a 2×2 complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DMatrix<C64>> for ComplexMatrixJson {
    fn from(m: &DMatrix<C64>) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        ComplexMatrixJson {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

#[derive(Serialize)]
struct ReconstructionJson {
    rho_hat: ComplexMatrixJson,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
}

impl Serialize for ReconstructionResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReconstructionJson {
            rho_hat: self.rho_hat.matrix().into(),
            log_likelihood: self.log_likelihood,
            iterations: self.iterations,
            converged: self.converged,
        }
        .serialize(s)
    }
}

// ρ ∝ L†L with L = [[t0, 0], [t2 + i t3, t1]].
struct Likelihood {
    states: Vec<[C64; 2]>,
    weights: Vec<f64>,
    total: f64,
}

impl Likelihood {
    fn new(records: &[MeasurementRecord]) -> Self {
        let scale = records.iter().map(|r| r.shots).sum::<u64>() as f64;
        let weights: Vec<f64> = records.iter().map(|r| r.counts as f64 / scale).collect();
        Likelihood {
            states: records
                .iter()
                .map(|r| r.basis.state().amplitudes())
                .collect(),
            total: weights.iter().sum(),
            weights,
        }
    }

    fn image(t: &[f64; 4], b: &[C64; 2]) -> [C64; 2] {
        [b[0] * t[0], b[0] * C64::new(t[2], t[3]) + b[1] * t[1]]
    }

    fn norm(t: &[f64; 4]) -> f64 {
        t.iter().map(|x| x * x).sum()
    }

    /// Scaled log-likelihood `Σ w_k ln a_k − W ln τ`.
    fn value(&self, t: &[f64; 4]) -> f64 {
        let tau = Self::norm(t);
        let mut f = -self.total * tau.ln();
        for (b, &w) in self.states.iter().zip(&self.weights) {
            if w > 0.0 {
                let u = Self::image(t, b);
                f += w * (u[0].norm_sqr() + u[1].norm_sqr()).ln();
            }
        }
        f
    }

    fn gradient(&self, t: &[f64; 4]) -> [f64; 4] {
        let tau = Self::norm(t);
        let mut g = [0.0; 4];
        for i in 0..4 {
            g[i] = -2.0 * self.total * t[i] / tau;
        }
        for (b, &w) in self.states.iter().zip(&self.weights) {
            if w > 0.0 {
                let u = Self::image(t, b);
                let a = u[0].norm_sqr() + u[1].norm_sqr();
                let c = 2.0 * w / a;
                g[0] += c * (u[0].conj() * b[0]).re;
                g[1] += c * (u[1].conj() * b[1]).re;
                g[2] += c * (u[1].conj() * b[0]).re;
                g[3] += c * (u[1].conj() * b[0] * C64::i()).re;
            }
        }
        g
    }
}

fn factor(rho: &DensityMatrix) -> [f64; 4] {
    let m = rho.matrix();
    let t1 = m[(1, 1)].re.max(0.0).sqrt();
    let z = if t1 > 1e-150 {
        m[(1, 0)] / t1
    } else {
        C64::new(0.0, 0.0)
    };
    let t0 = (m[(0, 0)].re - z.norm_sqr()).max(0.0).sqrt();
    [t0, t1, z.re, z.im]
}

fn state_of(t: &[f64; 4]) -> Result<DensityMatrix> {
    let l = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(t[0], 0.0),
            C64::new(0.0, 0.0),
            C64::new(t[2], t[3]),
            C64::new(t[1], 0.0),
        ],
    );
    DensityMatrix::normalized(l.adjoint() * l)
}

/// `Σ n_k ln p_k`, with `0·ln 0 = 0`.
pub fn log_likelihood(rho: &DensityMatrix, records: &[MeasurementRecord]) -> f64 {
    records
        .iter()
        .filter(|r| r.counts > 0)
        .map(|r| {
            let p = rho.expectation_in(&r.basis.state().vector());
            r.counts as f64 * if p > 0.0 { p.ln() } else { f64::NEG_INFINITY }
        })
        .sum()
}

/// Maximum-likelihood state by BFGS ascent with Armijo backtracking over the
/// Cholesky parameters. Starts from the physical projection of the linear
/// inversion, so the result is never less likely than that (up to roundoff
/// in the final digits, where steps are accepted on the directional
/// derivative instead).
pub fn mle_reconstruct(
    records: &[MeasurementRecord],
    tol: f64,
    max_iter: usize,
) -> Result<ReconstructionResult> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    check_records(records)?;
    let lik = Likelihood::new(records);

    let mut start = project_physical(&linear_inversion(records)?.rho)?;
    if !log_likelihood(&start, records).is_finite() {
        let mixed = start.matrix() * C64::new(0.99, 0.0)
            + DMatrix::<C64>::identity(2, 2) * C64::new(0.005, 0.0);
        start = DensityMatrix::normalized(mixed)?;
    }

    let mut t = factor(&start);
    let mut f = lik.value(&t);
    let mut g = lik.gradient(&t);
    let mut hinv = DMatrix::<f64>::identity(4, 4);
    let mut iterations = 0;
    let grad_norm = |g: &[f64; 4]| g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut converged = grad_norm(&g) < tol;

    while !converged && iterations < max_iter {
        iterations += 1;
        let gv = DVector::from_row_slice(&g);
        let mut d = &hinv * &gv;
        let mut slope = gv.dot(&d);
        if !(slope > 0.0) {
            hinv = DMatrix::identity(4, 4);
            d = gv.clone();
            slope = gv.dot(&d);
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-20 {
            let trial = [
                t[0] + alpha * d[0],
                t[1] + alpha * d[1],
                t[2] + alpha * d[2],
                t[3] + alpha * d[3],
            ];
            let ft = lik.value(&trial);
            let armijo = ft >= f + 1e-4 * alpha * slope;
            // Near the optimum value changes drop below roundoff; fall back
            // to the derivative form of the sufficient-increase condition.
            let flat = (ft - f).abs() <= 1e-13 * f.abs().max(1.0) && {
                let gt = lik.gradient(&trial);
                (0..4).map(|i| gt[i] * d[i]).sum::<f64>() >= -0.8 * slope
            };
            if armijo || flat {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((tn, fnew)) = accepted else {
            if hinv != DMatrix::identity(4, 4) {
                hinv = DMatrix::identity(4, 4);
                continue;
            }
            break;
        };

        let gn = lik.gradient(&tn);
        let s = DVector::from_fn(4, |i, _| tn[i] - t[i]);
        // curvature of −f
        let y = DVector::from_fn(4, |i, _| g[i] - gn[i]);
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(4, 4);
            let left = &eye - &s * y.transpose() * rho;
            let right = &eye - &y * s.transpose() * rho;
            hinv = &left * &hinv * &right + &s * s.transpose() * rho;
        }
        t = tn;
        f = fnew;
        g = gn;
        converged = grad_norm(&g) < tol;
    }

    let rho_hat = state_of(&t)?;
    Ok(ReconstructionResult {
        log_likelihood: log_likelihood(&rho_hat, records),
        rho_hat,
        iterations,
        converged,
    })
}
