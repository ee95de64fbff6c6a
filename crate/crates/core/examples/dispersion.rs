//! Linear frequencies of both models on a few lattice modes.

use chkp_lab::model::{linear_symbol, ModelParams};

fn main() -> chkp_lab::Result<()> {
    let models = [
        ModelParams::ChkpNormalized { kappa: 0.7 },
        ModelParams::Hcp {
            alpha: 1.0,
            beta: 0.1,
            gamma: 1.0,
        },
    ];
    for p in &models {
        println!("{}", p.name());
        for (xi, eta) in [(1.0, 0.0), (1.0, 1.0), (2.0, 1.0), (0.5, 2.0)] {
            println!("  ({xi:.1}, {eta:.1})  {:+.6}", linear_symbol(p, xi, eta)?);
        }
    }
    Ok(())
}
