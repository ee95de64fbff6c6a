//! Solve for a small CH-KP traveling wave and continue it in amplitude.

use std::f64::consts::PI;

use chkp_lab::model::ModelParams;
use chkp_lab::spectral::Grid2D;
use chkp_lab::twsolve::{continue_branch, linear_seed, solve_tw};

fn main() -> chkp_lab::Result<()> {
    let g = Grid2D::new(128, 16, 8.0 * PI, 8.0 * PI)?;
    let p = ModelParams::ChkpNormalized { kappa: 1.0 };
    let (seed, c_lin) = linear_seed(&g, &p, 0.02, 0)?;
    let wave = solve_tw(&seed, c_lin, &p, 1e-10)?;
    println!("linear speed {c_lin:.6}, solved speed {:.6}", wave.speed);

    let branch = continue_branch(&wave, 0.02, 6);
    println!("{:>8} {:>12} {:>10}", "A", "c", "residual");
    for b in branch.table() {
        println!("{:8.3} {:12.8} {:10.2e}", b.amplitude, b.c, b.residual_norm);
    }
    if let Some(e) = branch.stopped {
        println!("stopped: {e}");
    }
    Ok(())
}
