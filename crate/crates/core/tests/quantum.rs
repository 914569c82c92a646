use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qrouter::quantum::*;
use qrouter::routing::{build_h_eff, default_lindblad_terms, RoutingParams};
use qrouter::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn hermitian(diag: [f64; 3], off: [(f64, f64); 3]) -> Operator {
    let mut m = DMatrix::<C64>::zeros(3, 3);
    for i in 0..3 {
        m[(i, i)] = c(diag[i], 0.0);
    }
    let pos = [(0, 1), (0, 2), (1, 2)];
    for (k, &(i, j)) in pos.iter().enumerate() {
        m[(i, j)] = c(off[k].0, off[k].1);
        m[(j, i)] = c(off[k].0, -off[k].1);
    }
    Operator::new(m).unwrap()
}

fn jump(entries: &[(f64, f64)]) -> Operator {
    let v: Vec<C64> = entries.iter().map(|&(a, b)| c(a, b)).collect();
    Operator::from_rows(3, &v).unwrap()
}

fn pure(v: &[(f64, f64)]) -> DensityMatrix {
    let psi = DVector::from_iterator(3, v.iter().map(|&(a, b)| c(a, b)));
    DensityMatrix::pure(&psi).unwrap()
}

fn entry() -> impl Strategy<Value = (f64, f64)> {
    (-1.0..1.0f64, -1.0..1.0f64)
}

fn params() -> impl Strategy<Value = RoutingParams> {
    (
        -3.0..3.0f64,
        -1.0..1.0f64,
        0.001..0.1f64,
        0.1..2.0f64,
        0.0..2.0f64,
        1e-4..0.05f64,
    )
        .prop_map(|(dp, delta, op, oc, od, ggs)| RoutingParams {
            delta_p: dp,
            delta_c: dp - delta,
            omega_p: op,
            omega_c: oc,
            omega_diss: od,
            gamma: 1.0,
            gamma_gs: ggs,
        })
}

#[test]
fn zero_hamiltonian_without_terms_is_zero() {
    let l = build_liouvillian(&Operator::zeros(3).unwrap(), &[]).unwrap();
    assert!(l.matrix().iter().all(|z| *z == c(0.0, 0.0)));
    let rho = pure(&[(1.0, 0.0), (0.5, 0.2), (0.0, -0.3)]);
    let grid: Vec<f64> = (0..5).map(|i| i as f64).collect();
    let traj = evolve(&rho, &l, &grid, &EvolveOptions::default()).unwrap();
    for r in &traj {
        assert!(r.max_abs_diff(&rho) < 1e-15);
    }
}

#[test]
fn two_level_decay_is_exponential() {
    let decay = LindbladTerm::new(Operator::transition(2, 0, 1).unwrap(), 1.0).unwrap();
    let l = build_liouvillian(&Operator::zeros(2).unwrap(), &[decay]).unwrap();
    let grid: Vec<f64> = (0..=20).map(|i| 0.25 * i as f64).collect();
    let traj = evolve(
        &DensityMatrix::basis(2, 1).unwrap(),
        &l,
        &grid,
        &EvolveOptions::default(),
    )
    .unwrap();
    for (t, r) in grid.iter().zip(&traj) {
        assert!((r.population(1) - (-t).exp()).abs() < 1e-6, "t={t}");
    }
    let ss = steady_state(&l).unwrap();
    assert!(ss.max_abs_diff(&DensityMatrix::basis(2, 0).unwrap()) < 1e-12);
}

#[test]
fn dissipative_hamiltonian_drains_norm() {
    let p = RoutingParams {
        omega_p: 0.05,
        omega_c: 1.0,
        omega_diss: 0.8,
        ..RoutingParams::default()
    };
    let gamma = p.gamma_eff();
    let h = build_h_eff(&p, c(0.0, -gamma / 2.0)).unwrap();
    let l = build_liouvillian(&h, &default_lindblad_terms(&p).unwrap()).unwrap();
    assert!(l.is_trace_decreasing());
    let grid: Vec<f64> = (0..=40).map(|i| 0.1 * i as f64).collect();
    let traj = evolve(
        &DensityMatrix::basis(3, 0).unwrap(),
        &l,
        &grid,
        &EvolveOptions::default(),
    )
    .unwrap();
    for w in traj.windows(2) {
        assert!(w[1].trace() < w[0].trace());
    }
}

#[test]
fn diagonal_spectrum_is_exact() {
    let p = RoutingParams {
        delta_p: 0.7,
        delta_c: 0.4,
        omega_p: 1e-300,
        omega_c: 0.0,
        ..RoutingParams::default()
    };
    let mut m = build_h_eff(&p, c(0.0, 0.0)).unwrap().into_matrix();
    m[(0, 2)] = c(0.0, 0.0);
    m[(2, 0)] = c(0.0, 0.0);
    let ev = eigenvalues(&Operator::new(m).unwrap());
    assert_eq!(ev[0], c(0.0, 0.0));
    assert!((ev[1] - c(0.3, 0.0)).norm() < 1e-15);
    assert_eq!(ev[2], c(0.7, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_preserves_trace_and_positivity(
        diag in prop::array::uniform3(-1.0..1.0f64),
        off in prop::array::uniform3(entry()),
        j1 in prop::collection::vec(entry(), 9),
        j2 in prop::collection::vec(entry(), 9),
        rates in (0.0..1.0f64, 0.0..1.0f64),
        psi in prop::collection::vec(entry(), 3),
    ) {
        prop_assume!(psi.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3);
        let terms = [
            LindbladTerm::new(jump(&j1), rates.0).unwrap(),
            LindbladTerm::new(jump(&j2), rates.1).unwrap(),
        ];
        let l = build_liouvillian(&hermitian(diag, off), &terms).unwrap();
        prop_assert!(!l.is_trace_decreasing());
        let grid: Vec<f64> = (0..=10).map(|i| 0.3 * i as f64).collect();
        let traj = evolve(&pure(&psi), &l, &grid, &EvolveOptions::default()).unwrap();
        for r in &traj {
            prop_assert!((r.trace() - 1.0).abs() < 1e-8);
            prop_assert!(r.min_eigenvalue() >= -1e-8);
        }
    }

    #[test]
    fn halving_tolerance_barely_moves_endpoint(
        diag in prop::array::uniform3(-1.0..1.0f64),
        off in prop::array::uniform3(entry()),
        j1 in prop::collection::vec(entry(), 9),
    ) {
        let terms = [LindbladTerm::new(jump(&j1), 0.5).unwrap()];
        let l = build_liouvillian(&hermitian(diag, off), &terms).unwrap();
        let grid = [0.0, 4.0];
        let rho0 = DensityMatrix::basis(3, 0).unwrap();
        let tol = 1e-8;
        let loose = EvolveOptions { rtol: tol, ..EvolveOptions::default() };
        let tight = EvolveOptions { rtol: tol / 2.0, ..EvolveOptions::default() };
        let a = evolve(&rho0, &l, &grid, &loose).unwrap();
        let b = evolve(&rho0, &l, &grid, &tight).unwrap();
        prop_assert!(a[1].max_abs_diff(&b[1]) < 10.0 * tol);
    }

    #[test]
    fn three_level_steady_state_residual(p in params()) {
        let h = build_h_eff(&p, c(0.0, 0.0)).unwrap();
        let l = build_liouvillian(&h, &default_lindblad_terms(&p).unwrap()).unwrap();
        let rho = steady_state(&l).unwrap();
        prop_assert!((l.matrix() * vectorize(rho.matrix())).norm() < 1e-10);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectrum_reflects_non_hermiticity(p in params(), gamma in 0.01..3.0f64) {
        let herm = eigenvalues(&build_h_eff(&p, c(0.0, 0.0)).unwrap());
        prop_assert!(herm.iter().all(|z| z.im.abs() < 1e-12));
        let lossy = eigenvalues(&build_h_eff(&p, c(0.0, -gamma / 2.0)).unwrap());
        let sum: f64 = lossy.iter().map(|z| z.im).sum();
        prop_assert!((sum + gamma / 2.0).abs() < 1e-12);
        for w in lossy.windows(2) {
            prop_assert!(w[0].re <= w[1].re);
        }
    }
}
