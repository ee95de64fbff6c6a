//! Map a normalized run to the physical CH-KP variables and check the
//! physical equation with finite differences only.

use std::f64::consts::TAU;

use chkp_lab::spectral::random::random_bandlimited;
use chkp_lab::spectral::Grid2D;
use chkp_lab::timestep::{Snapshot, Stepper};
use chkp_lab::transform::{from_normalized, physical_residual, SampledField, ScaleMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> chkp_lab::Result<()> {
    let m = ScaleMap::new(0.5, 0.6, 0.3)?;
    let g = Grid2D::new(128, 32, TAU, TAU)?;
    let u0 = random_bandlimited(g, 3, 2, 0.1, true, &mut ChaCha8Rng::seed_from_u64(1));
    let st = Stepper::new(g, &m.normalized_model(), 0.002)?;
    let mut s = u0.to_spectral();
    let mut frames = Vec::new();
    for i in 0..7 {
        frames.push(Snapshot {
            t: i as f64 * 0.002,
            field: s.to_field(),
        });
        s = st.advance(&s);
    }
    let phys = from_normalized(&SampledField::new(frames)?, &m)?;
    println!(
        "x/t scale {:.4}, y scale {:.4}, drift {:.2}",
        m.xt_scale(),
        m.y_scale(),
        m.drift()
    );
    println!("physical grid {:?}", phys.grid());
    println!(
        "max physical residual {:.2e}",
        physical_residual(&phys, &m, 3)?.max_abs()
    );
    Ok(())
}
