use num_complex::Complex64;

use super::grid::SpectralField2D;

/// Off-grid evaluation of the trigonometric interpolant of a sampled field.
///
/// Nyquist modes are split evenly between `+xi` and `-xi` so the interpolant
/// is real everywhere; coefficients below `drop_below * max|c|` are skipped.
#[derive(Debug, Clone)]
pub struct Interpolant {
    terms: Vec<(f64, f64, Complex64)>,
}

impl Interpolant {
    pub fn new(s: &SpectralField2D, drop_below: f64) -> Self {
        let g = *s.grid();
        let norm = 1.0 / g.len() as f64;
        let cmax = s.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let cut = drop_below * cmax;
        let mut terms = Vec::new();
        for iy in 0..g.ny {
            let etas: Vec<(f64, f64)> = if iy == g.nyquist_y() {
                vec![(g.eta(iy), 0.5), (-g.eta(iy), 0.5)]
            } else {
                vec![(g.eta(iy), 1.0)]
            };
            for ix in 0..g.nx {
                let c = s.coeffs()[g.index(ix, iy)];
                if c.norm() <= cut || c.norm() == 0.0 {
                    continue;
                }
                let xis: Vec<(f64, f64)> = if ix == g.nyquist_x() {
                    vec![(g.xi(ix), 0.5), (-g.xi(ix), 0.5)]
                } else {
                    vec![(g.xi(ix), 1.0)]
                };
                for &(xi, wx) in &xis {
                    for &(eta, wy) in &etas {
                        terms.push((xi, eta, c * (wx * wy * norm)));
                    }
                }
            }
        }
        Interpolant { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value and x-derivative at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        let (mut v, mut dv) = (0.0, 0.0);
        for &(xi, eta, c) in &self.terms {
            let e = c * Complex64::from_polar(1.0, xi * x + eta * y);
            v += e.re;
            dv -= xi * e.im;
        }
        (v, dv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random::random_bandlimited, Grid2D};
    use rand::SeedableRng;

    #[test]
    fn interpolant_reproduces_grid_values_and_derivative() {
        let g = Grid2D::new(16, 8, 3.0, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let f = random_bandlimited(g, 5, 3, 1.0, false, &mut rng);
        let fx = crate::spectral::deriv(&f, 1, 0).unwrap();
        let it = Interpolant::new(&f.to_spectral(), 0.0);
        for (ix, iy) in [(0, 0), (3, 5), (15, 7)] {
            let (v, dv) = it.eval(g.x(ix), g.y(iy));
            assert!((v - f.get(ix, iy)).abs() < 1e-12);
            assert!((dv - fx.get(ix, iy)).abs() < 1e-11);
        }
        // off-grid: compare with a spectral shift
        let shifted = crate::spectral::spectral_shift(&f, -0.37 * g.dx());
        let (v, _) = it.eval(g.x(4) + 0.37 * g.dx(), g.y(2));
        assert!((v - shifted.get(4, 2)).abs() < 1e-12);
    }
}
