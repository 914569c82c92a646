//! Least-squares fit of the model to the M1 operating point.
//!
//! Free parameters are `{Ωc, Ω, γ_gs, b}` (b is the detection noise floor
//! that caps the measured isolation). The fit runs Levenberg–Marquardt in
//! log space against forward/backward transmission at the calibration depth
//! and the isolation at a larger depth, with a weak prior pulling toward
//! the starting point so the under-determined direction stays put.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::routing::{
    directional_transmission, isolation_db, Direction, Helicity, RoutingParams, ZeemanScheme,
};
use crate::{Error, Result};

/// Noise floor fitted together with the default [`RoutingParams`].
pub const M1_NOISE_FLOOR: f64 = 8.154_381_704e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct M1Targets {
    pub depth: f64,
    pub t_forward: f64,
    pub t_forward_sigma: f64,
    pub t_backward: f64,
    pub t_backward_sigma: f64,
    pub isolation_depth: f64,
    pub isolation_db: f64,
    pub isolation_sigma: f64,
}

impl Default for M1Targets {
    fn default() -> Self {
        M1Targets {
            depth: 14.0,
            t_forward: 0.929,
            t_forward_sigma: 0.020,
            t_backward: 0.026,
            t_backward_sigma: 0.004,
            isolation_depth: 40.0,
            isolation_db: 20.0,
            isolation_sigma: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Weight of the log-space prior toward the starting point.
    pub prior_weight: f64,
    pub max_iter: usize,
    /// Stop when the relative cost decrease falls below this.
    pub ftol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            prior_weight: 0.05,
            max_iter: 200,
            ftol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub params: RoutingParams,
    pub noise_floor: f64,
    pub t_forward: f64,
    pub t_backward: f64,
    pub isolation_db: f64,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Model predictions at δ = 0 for control helicity +1.
pub fn predict(
    params: &RoutingParams,
    noise_floor: f64,
    scheme: &ZeemanScheme,
    targets: &M1Targets,
) -> Result<(f64, f64, f64)> {
    let p = params.with_two_photon_detuning(0.0);
    let tf = |d| directional_transmission(Direction::Forward, scheme, &p, Helicity::Plus, d);
    let tb = |d| directional_transmission(Direction::Backward, scheme, &p, Helicity::Plus, d);
    let t_forward = tf(targets.depth)?.power;
    let t_backward = tb(targets.depth)?.power;
    let iso = isolation_db(
        tf(targets.isolation_depth)?.power,
        tb(targets.isolation_depth)?.power,
        noise_floor,
    )?;
    Ok((t_forward, t_backward, iso))
}

fn unpack(base: &RoutingParams, x: &DVector<f64>) -> (RoutingParams, f64) {
    let p = RoutingParams {
        omega_c: x[0].exp(),
        omega_diss: x[1].exp(),
        gamma_gs: x[2].exp(),
        ..*base
    };
    (p, x[3].exp())
}

fn residuals(
    base: &RoutingParams,
    x: &DVector<f64>,
    x0: &DVector<f64>,
    scheme: &ZeemanScheme,
    targets: &M1Targets,
    prior: f64,
) -> Result<DVector<f64>> {
    let (p, b) = unpack(base, x);
    let (tf, tb, iso) = predict(&p, b, scheme, targets)?;
    let mut r = DVector::zeros(3 + x.len());
    r[0] = (tf - targets.t_forward) / targets.t_forward_sigma;
    r[1] = (tb - targets.t_backward) / targets.t_backward_sigma;
    r[2] = (iso - targets.isolation_db) / targets.isolation_sigma;
    for i in 0..x.len() {
        r[3 + i] = prior * (x[i] - x0[i]);
    }
    Ok(r)
}

/// Fit `{Ωc, Ω, γ_gs, b}` starting from `start` and `start_floor`.
pub fn calibrate_m1(
    start: &RoutingParams,
    start_floor: f64,
    scheme: &ZeemanScheme,
    targets: &M1Targets,
    opts: &FitOptions,
) -> Result<Calibration> {
    start.validate_weak_probe()?;
    for (name, v) in [
        ("omega_c", start.omega_c),
        ("omega_diss", start.omega_diss),
        ("gamma_gs", start.gamma_gs),
        ("noise_floor", start_floor),
    ] {
        if !(v > 0.0) {
            return Err(Error::param(name, "calibration start must be positive"));
        }
    }
    let x0 = DVector::from_vec(vec![
        start.omega_c.ln(),
        start.omega_diss.ln(),
        start.gamma_gs.ln(),
        start_floor.ln(),
    ]);
    let res = |x: &DVector<f64>| residuals(start, x, &x0, scheme, targets, opts.prior_weight);

    let mut x = x0.clone();
    let mut r = res(&x)?;
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let h = 1e-6;

    while iterations < opts.max_iter {
        iterations += 1;
        let mut jac = DMatrix::zeros(r.len(), x.len());
        for j in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let col = (res(&xp)? - res(&xm)?) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;

        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..x.len() {
                a[(i, i)] += mu * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial = &x + &step;
            let Ok(rt) = res(&trial) else {
                mu *= 10.0;
                continue;
            };
            let ct = rt.norm_squared();
            if ct < cost {
                let rel = (cost - ct) / cost.max(f64::MIN_POSITIVE);
                x = trial;
                r = rt;
                cost = ct;
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                if rel < opts.ftol || step.norm() < 1e-12 {
                    converged = true;
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            // no downhill step at any damping: stationary point
            converged = true;
        }
        if converged {
            break;
        }
    }

    let (params, noise_floor) = unpack(start, &x);
    let (t_forward, t_backward, iso) = predict(&params, noise_floor, scheme, targets)?;
    Ok(Calibration {
        params,
        noise_floor,
        t_forward,
        t_backward,
        isolation_db: iso,
        cost,
        iterations,
        converged,
    })
}
