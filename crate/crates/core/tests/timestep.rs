use std::f64::consts::TAU;

use chkp_lab::model::{linear_symbol, ModelParams};
use chkp_lab::spectral::random::random_bandlimited;
use chkp_lab::spectral::{Field2D, Grid2D};
use chkp_lab::timestep::{evolve, simulate, step, InitialSpec, RunConfig, Stepper};
use chkp_lab::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn models() -> impl Strategy<Value = ModelParams> {
    prop_oneof![
        (-1.0..1.0f64).prop_map(|kappa| ModelParams::ChkpNormalized { kappa }),
        (0.0..2.0f64, 0.0..1.0f64, 0.0..1.5f64).prop_map(|(alpha, beta, gamma)| ModelParams::Hcp {
            alpha,
            beta,
            gamma
        }),
    ]
}

fn config(initial: InitialSpec) -> RunConfig {
    RunConfig {
        model: ModelParams::ChkpNormalized { kappa: 1.0 },
        grid: Grid2D::new(32, 16, TAU, TAU).unwrap(),
        t_end: 1.0,
        dt: 0.01,
        snapshot_every: 10,
        initial,
        seed: 0,
    }
}

fn config_path(cfg: &RunConfig) -> Option<String> {
    match cfg.validate() {
        Err(Error::Config { path, .. }) => Some(path),
        _ => None,
    }
}

#[test]
fn invalid_run_configs_name_the_key() {
    let base = config(InitialSpec::Zero);
    assert_eq!(config_path(&base), None);
    let mut c = base.clone();
    c.dt = 0.0;
    assert_eq!(config_path(&c).as_deref(), Some("dt"));
    let mut c = base.clone();
    c.t_end = 0.001;
    assert_eq!(config_path(&c).as_deref(), Some("t_end"));
    let mut c = base.clone();
    c.snapshot_every = 0;
    assert_eq!(config_path(&c).as_deref(), Some("snapshot_every"));
    let mut c = base.clone();
    c.grid.nx = 6;
    assert_eq!(config_path(&c).as_deref(), Some("grid"));
    let mut c = base;
    c.model = ModelParams::Hcp {
        alpha: -1.0,
        beta: 0.0,
        gamma: 1.0,
    };
    assert_eq!(config_path(&c).as_deref(), Some("model"));
}

#[test]
fn non_finite_result_is_a_blow_up_at_the_step_time() {
    let g = Grid2D::new(16, 8, TAU, TAU).unwrap();
    let u = Field2D::from_fn(g, |x, _| 1e200 * x.sin());
    let p = ModelParams::ChkpNormalized { kappa: 1.0 };
    match step(&u, 0.25, &p) {
        Err(Error::BlowUp { t }) => assert_eq!(t, 0.25),
        other => panic!("expected blow-up, got {other:?}"),
    }
}

#[test]
fn halving_the_step_cuts_the_error_sixteenfold() {
    let g = Grid2D::new(64, 32, TAU, TAU).unwrap();
    let p = ModelParams::Hcp {
        alpha: 1.0,
        beta: 0.2,
        gamma: 0.8,
    };
    let u0 = random_bandlimited(g, 3, 3, 0.3, true, &mut ChaCha8Rng::seed_from_u64(3));
    let reference = evolve(&u0, &p, 1.0, 0.0025).unwrap();
    let e1 = evolve(&u0, &p, 1.0, 0.02).unwrap().max_abs_diff(&reference);
    let e2 = evolve(&u0, &p, 1.0, 0.01).unwrap().max_abs_diff(&reference);
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn simulate_reports_diagnostics_per_snapshot() {
    let cfg = config(InitialSpec::Random {
        max_j: 3,
        max_k: 3,
        amplitude: 0.2,
    });
    let (snaps, rows) = simulate(&cfg).unwrap();
    assert_eq!(snaps.len(), 11);
    assert_eq!(rows.len(), 11);
    assert_eq!(snaps.last().unwrap().t, 1.0);
    for (s, r) in snaps.iter().zip(&rows) {
        assert_eq!(s.t, r.t);
        assert!((r.l2_norm - s.field.norm_l2()).abs() < 1e-12);
        assert!((r.max_abs - s.field.max_abs()).abs() < 1e-15);
        assert!(r.xmean_drift < 1e-12);
        assert!(!r.blowup);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tiny_modes_propagate_at_the_dispersion_frequency(j in 1i64..4, k in -3i64..4, p in models()) {
        let g = Grid2D::new(16, 16, TAU, TAU).unwrap();
        let amp = 1e-9;
        let u0 = Field2D::from_fn(g, |x, y| amp * (j as f64 * x + k as f64 * y).cos());
        let t_end = 2.0;
        let u1 = evolve(&u0, &p, t_end, 0.05).unwrap();
        let w = linear_symbol(&p, j as f64, k as f64).unwrap();
        let c0 = u0.to_spectral().coeff(j, k);
        let c1 = u1.to_spectral().coeff(j, k);
        let exact = c0 * Complex64::from_polar(1.0, -w * t_end);
        let err = (c1 - exact).norm() / c0.norm() / t_end;
        prop_assert!(err < 1e-11, "error per unit time {err:e}");
    }

    #[test]
    fn every_step_stays_admissible(seed in any::<u64>(), p in models()) {
        let g = Grid2D::new(32, 16, 9.0, 5.0).unwrap();
        let u0 = random_bandlimited(g, 5, 4, 0.2, true, &mut ChaCha8Rng::seed_from_u64(seed));
        let st = Stepper::new(g, &p, 0.02).unwrap();
        let mut s = u0.to_spectral();
        st.project(&mut s);
        for _ in 0..20 {
            s = st.advance(&s);
            let u = s.to_field();
            prop_assert!(u.max_row_mean() <= 1e-12 * u.max_abs());
        }
    }
}
