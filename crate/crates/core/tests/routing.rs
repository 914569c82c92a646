use proptest::prelude::*;
use qrouter::calibration::M1_NOISE_FLOOR;
use qrouter::quantum::eigenvalues;
use qrouter::routing::*;
use qrouter::C64;

fn oracle(p: &RoutingParams) -> C64 {
    let i = C64::new(0.0, 1.0);
    let delta = p.two_photon_detuning();
    let dark = C64::new(p.gamma_gs, delta);
    let control = if p.omega_c == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        (p.omega_c / 2.0).powi(2) / dark
    };
    i / (C64::new(p.gamma / 2.0, p.delta_p) + control)
}

fn base(dp: f64, oc: f64, delta: f64) -> RoutingParams {
    RoutingParams {
        delta_p: dp,
        delta_c: dp - delta,
        omega_p: 0.01,
        omega_c: oc,
        omega_diss: 1.0,
        gamma: 1.0,
        gamma_gs: 1e-3,
    }
}

fn t(dir: Direction, sigma: Helicity, p: &RoutingParams, depth: f64) -> f64 {
    directional_transmission(dir, &ZeemanScheme::default(), p, sigma, depth)
        .unwrap()
        .power
}

#[test]
fn coherence_matches_oracle_on_grid() {
    let mut worst = 0.0f64;
    for &oc in &[0.5, 1.0, 2.0] {
        for &delta in &[0.0, 0.1] {
            for k in 0..41 {
                let p = base(-5.0 + 0.25 * k as f64, oc, delta);
                let num = steady_coherence(&p, C64::new(0.0, 0.0)).unwrap();
                let exact = oracle(&p);
                worst = worst.max((num - exact).norm() / exact.norm());
            }
        }
    }
    assert!(worst < 1e-4, "worst relative error {worst}");
}

#[test]
fn eit_window_and_far_detuned_reciprocity() {
    let s = ZeemanScheme::default();
    let p = RoutingParams {
        gamma_gs: 0.0,
        ..RoutingParams::default()
    };
    let f = susceptibility(Direction::Forward, &s, &p, Helicity::Plus).unwrap();
    let b = susceptibility(Direction::Backward, &s, &p, Helicity::Plus).unwrap();
    assert!(f.total().im < 1e-6);
    assert!(b.total().im > 0.0);

    for &delta in &[50.0, -50.0, 120.0] {
        let p = RoutingParams::default().with_two_photon_detuning(delta);
        let f = susceptibility(Direction::Forward, &s, &p, Helicity::Plus)
            .unwrap()
            .total();
        let b = susceptibility(Direction::Backward, &s, &p, Helicity::Plus)
            .unwrap()
            .total();
        assert!((f - b).norm() / f.norm() < 0.05, "delta={delta}");
    }
}

#[test]
fn calibrated_operating_point() {
    let p = RoutingParams::default();
    let tf = t(Direction::Forward, Helicity::Plus, &p, 14.0);
    let tb = t(Direction::Backward, Helicity::Plus, &p, 14.0);
    assert!((0.91..=0.95).contains(&tf), "tf={tf}");
    assert!((0.022..=0.030).contains(&tb), "tb={tb}");
    let tf40 = t(Direction::Forward, Helicity::Plus, &p, 40.0);
    let tb40 = t(Direction::Backward, Helicity::Plus, &p, 40.0);
    let iso = isolation_db(tf40, tb40, M1_NOISE_FLOOR).unwrap();
    assert!((19.0..=21.0).contains(&iso), "iso={iso}");
}

#[test]
fn flip_branches_at_defaults() {
    let p = RoutingParams::default();
    assert!(t(Direction::Forward, Helicity::Plus, &p, 14.0) >= 0.9);
    assert!(t(Direction::Forward, Helicity::Minus, &p, 14.0) <= 0.05);
}

#[test]
fn depth_scaling_is_linear() {
    let p = RoutingParams::default();
    let iso = |d: f64| {
        isolation_db(
            t(Direction::Forward, Helicity::Plus, &p, d),
            t(Direction::Backward, Helicity::Plus, &p, d),
            0.0,
        )
        .unwrap()
    };
    assert!((iso(28.0) / iso(14.0) - 2.0).abs() < 1e-9);
    assert_eq!(iso(0.0), 0.0);
}

fn routing_params() -> impl Strategy<Value = RoutingParams> {
    (
        -5.0..5.0f64,
        -2.0..2.0f64,
        1e-4..0.1f64,
        0.05..2.0f64,
        0.0..3.0f64,
        0.0..0.05f64,
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn passive_medium(p in routing_params(), plus in any::<bool>()) {
        let sigma = if plus { Helicity::Plus } else { Helicity::Minus };
        for dir in [Direction::Forward, Direction::Backward] {
            let chi = susceptibility(dir, &ZeemanScheme::default(), &p, sigma).unwrap();
            prop_assert!(chi.total().im >= -1e-10);
        }
    }

    #[test]
    fn helicity_reversal(p in routing_params(), depth in 0.0..60.0f64) {
        for dir in [Direction::Forward, Direction::Backward] {
            let a = t(dir, Helicity::Plus, &p, depth);
            let b = t(dir.reversed(), Helicity::Minus, &p, depth);
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvalue_identity(p in routing_params()) {
        let g = p.gamma_eff();
        let herm = eigenvalues(&build_h_eff(&p, C64::new(0.0, 0.0)).unwrap());
        prop_assert!(herm.iter().all(|z| z.im.abs() < 1e-12));
        let lossy = eigenvalues(&build_h_eff(&p, C64::new(0.0, -g / 2.0)).unwrap());
        let sum: f64 = lossy.iter().map(|z| z.im).sum();
        prop_assert!((sum + g / 2.0).abs() < 1e-12);
    }

    #[test]
    fn isolation_grows_linearly_without_floor(p in routing_params(), d in 0.5..30.0f64) {
        let iso = |d: f64| isolation_db(
            t(Direction::Forward, Helicity::Plus, &p, d),
            t(Direction::Backward, Helicity::Plus, &p, d),
            0.0,
        ).unwrap();
        let one = iso(d);
        prop_assume!(one.abs() > 1e-6);
        prop_assert!((iso(2.0 * d) / one - 2.0).abs() < 1e-9);
    }
}
