use num_complex::Complex64;
use rand::Rng;

use super::grid::{Field2D, Grid2D, SpectralField2D};

/// Random real trigonometric polynomial with modes `|j| <= max_j`, `|k| <= max_k`,
/// scaled so that `max |u| = amplitude`. With `admissible` the `j = 0` line is empty.
pub fn random_bandlimited(
    grid: Grid2D,
    max_j: usize,
    max_k: usize,
    amplitude: f64,
    admissible: bool,
    rng: &mut impl Rng,
) -> Field2D {
    let spec = random_spectrum(grid, max_j, max_k, admissible, rng);
    let f = spec.to_field();
    let m = f.max_abs();
    if m == 0.0 {
        f
    } else {
        f.scale(amplitude / m)
    }
}

pub fn random_spectrum(
    grid: Grid2D,
    max_j: usize,
    max_k: usize,
    admissible: bool,
    rng: &mut impl Rng,
) -> SpectralField2D {
    assert!(
        max_j < grid.nx / 2 && max_k < grid.ny / 2,
        "modes must stay below Nyquist"
    );
    let (mj, mk) = (max_j as i64, max_k as i64);
    let mut s = SpectralField2D::zeros(grid);
    for j in 0..=mj {
        for k in -mk..=mk {
            if j == 0 && (admissible || k < 0) {
                continue;
            }
            let c = if j == 0 && k == 0 {
                Complex64::new(rng.gen_range(-1.0..1.0), 0.0)
            } else {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            };
            s.set_coeff(j, k, c);
            s.set_coeff(-j, -k, c.conj());
        }
    }
    s
}
