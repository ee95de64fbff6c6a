//! Weak residual of peakons against a space-time bump: zero on the curve
//! `c = a`, `kappa = -theta^2`, and clearly nonzero off it.

use chkp_lab::weakform::{weak_residual_chkp, BumpSpec, PeakonParams, QuadOptions};

fn main() -> chkp_lab::Result<()> {
    let phi = BumpSpec {
        center: [0.2, 0.5, -0.3],
        radii: [1.0, 1.2, 0.9],
        amplitude: 1.0,
    };
    let opts = QuadOptions::default();
    for theta in [0.0, 0.3] {
        let kappa = -theta * theta;
        for c in [0.8, 1.0, 1.2] {
            let u = PeakonParams { a: 1.0, theta, c };
            let r = weak_residual_chkp(&u, &phi, kappa, &opts)?;
            println!(
                "theta {theta:.1} c {c:.1}: {:+.3e} +- {:.1e}",
                r.value, r.quadrature_error_estimate
            );
        }
    }
    Ok(())
}
