//! A solved traveling wave stays symmetric about an axis moving at its speed;
//! a Gaussian datum does not.

use std::f64::consts::PI;

use chkp_lab::analysis::{steadiness_report, symmetry_report, SymmetryReport};
use chkp_lab::model::ModelParams;
use chkp_lab::spectral::Grid2D;
use chkp_lab::timestep::{simulate, InitialSpec, RunConfig, Snapshot, Stepper};
use chkp_lab::twsolve::{linear_seed, solve_tw};

fn max_asym(r: &SymmetryReport) -> f64 {
    r.asymmetry_of_t.iter().map(|&(_, a)| a).fold(0.0, f64::max)
}

fn main() -> chkp_lab::Result<()> {
    let g = Grid2D::new(128, 16, 8.0 * PI, 8.0 * PI)?;
    let p = ModelParams::ChkpNormalized { kappa: 1.0 };
    let (seed, c0) = linear_seed(&g, &p, 0.05, 0)?;
    let wave = solve_tw(&seed, c0, &p, 1e-10)?;

    let st = Stepper::new(g, &p, 0.05)?;
    let mut s = wave.profile.to_spectral();
    let mut series = Vec::new();
    for i in 0..=200 {
        if i % 20 == 0 {
            series.push(Snapshot {
                t: i as f64 * 0.05,
                field: s.to_field(),
            });
        }
        s = st.advance(&s);
    }
    let sym = symmetry_report(&series)?;
    let steady = steadiness_report(&series)?;
    println!(
        "wave:     speed {:.6}, axis speed {:.6}, max asymmetry {:.2e}, {:?}",
        wave.speed,
        sym.lambda_dot_estimate,
        max_asym(&sym),
        steady.verdict
    );

    let cfg = RunConfig {
        model: p,
        grid: g,
        t_end: 10.0,
        dt: 0.02,
        snapshot_every: 50,
        initial: InitialSpec::Gaussian {
            x0: 4.0 * PI,
            y0: 4.0 * PI,
            sigma_x: 2.0,
            sigma_y: 3.0,
            amplitude: 0.3,
        },
        seed: 0,
    };
    let (series, _) = simulate(&cfg)?;
    let sym = symmetry_report(&series)?;
    let steady = steadiness_report(&series)?;
    println!(
        "gaussian: max asymmetry {:.2e}, shape error {:.2e}, {:?}",
        max_asym(&sym),
        steady.max_shape_error,
        steady.verdict
    );
    Ok(())
}
