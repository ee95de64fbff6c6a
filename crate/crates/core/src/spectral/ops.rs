//! Fourier-multiplier operators on periodic fields.
//!
//! Every operator here maps a [`Field2D`] to a new one through one forward and
//! one inverse transform. Odd multipliers annihilate the Nyquist line, since
//! only the real part of the inverse is kept.

use num_complex::Complex64;

use super::grid::{Field2D, Grid2D, SpectralField2D};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Highest total derivative order any of the model equations needs.
pub const MAX_DERIV_ORDER: u32 = 4;

/// Multiplier `(i xi)^px (i eta)^py`.
#[inline]
pub fn deriv_symbol(xi: f64, eta: f64, px: u32, py: u32) -> Complex64 {
    I.powu(px + py) * xi.powi(px as i32) * eta.powi(py as i32)
}

/// Multiplier of `L = d/dx (1 - d^2/dx^2)`.
#[inline]
pub fn l_symbol(xi: f64) -> Complex64 {
    I * xi * (1.0 + xi * xi)
}

/// Multiplier of `L^{-1}` restricted to xi != 0; zero on the xi = 0 line.
#[inline]
pub fn l_inverse_symbol(xi: f64) -> Complex64 {
    if xi == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        -I / (xi * (1.0 + xi * xi))
    }
}

/// `d^px/dx^px d^py/dy^py f`, spectrally.
pub fn deriv(f: &Field2D, px: u32, py: u32) -> Result<Field2D> {
    f.check_finite()?;
    if px + py > MAX_DERIV_ORDER {
        return Err(Error::DerivativeOrder(px + py));
    }
    Ok(deriv_spectral(&f.to_spectral(), px, py).to_field())
}

pub fn deriv_spectral(s: &SpectralField2D, px: u32, py: u32) -> SpectralField2D {
    s.apply(|xi, eta| deriv_symbol(xi, eta, px, py))
}

/// `L f = f_x - f_xxx`.
pub fn apply_l(f: &Field2D) -> Result<Field2D> {
    f.check_finite()?;
    Ok(f.to_spectral().apply(|xi, _| l_symbol(xi)).to_field())
}

/// `L^{-1} f` on the zero-x-mean subspace.
pub fn invert_l(f: &Field2D) -> Result<Field2D> {
    f.check_admissible()?;
    Ok(invert_l_spectral(&f.to_spectral()).to_field())
}

pub fn invert_l_spectral(s: &SpectralField2D) -> SpectralField2D {
    s.apply(|xi, _| l_inverse_symbol(xi))
}

/// Translation `f(x - delta_x, y)` by phase multiplication; exact sub-grid
/// shift for band-limited data.
pub fn spectral_shift(f: &Field2D, delta_x: f64) -> Field2D {
    shift_spectral(&f.to_spectral(), delta_x).to_field()
}

pub fn shift_spectral(s: &SpectralField2D, delta_x: f64) -> SpectralField2D {
    s.apply(|xi, _| Complex64::from_polar(1.0, -xi * delta_x))
}

/// Reflection `f(2 lambda - x, y)`.
pub fn reflect(f: &Field2D, lambda: f64) -> Field2D {
    reflect_spectral(&f.to_spectral(), lambda).to_field()
}

/// Coefficient of mode `j` becomes `c(-j) exp(-2 i xi_j lambda)`.
pub fn reflect_spectral(s: &SpectralField2D, lambda: f64) -> SpectralField2D {
    let g = *s.grid();
    let src = s.coeffs();
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let mirror = Grid2D::mode_index(-g.mode_x(ix), g.nx);
            let phase = Complex64::from_polar(1.0, -2.0 * g.xi(ix) * lambda);
            out[g.index(ix, iy)] = src[g.index(mirror, iy)] * phase;
        }
    }
    let mut out = SpectralField2D::from_raw(g, out);
    out.symmetrize_nyquist();
    out
}

/// Integer index rotation in x: `f(x - shift * dx)`.
pub fn roll_x(f: &Field2D, shift: i64) -> Field2D {
    let g = *f.grid();
    let mut out = Field2D::zeros(g);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let src = (ix as i64 - shift).rem_euclid(g.nx as i64) as usize;
            out.values_mut()[g.index(ix, iy)] = f.get(src, iy);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::random::random_bandlimited;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid2D {
        Grid2D::new(32, 16, 2.0 * PI, 3.0).unwrap()
    }

    #[test]
    fn derivative_of_sine() {
        let g = Grid2D::new(32, 8, 5.0, 1.0).unwrap();
        let k = 2.0 * PI / g.lx;
        let f = Field2D::from_fn(g, |x, _| (k * x).sin());
        let d = deriv(&f, 1, 0).unwrap();
        let exact = Field2D::from_fn(g, |x, _| k * (k * x).cos());
        assert!(d.max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let f = Field2D::from_fn(grid(), |_, _| 3.5);
        for (px, py) in [(1, 0), (0, 1), (2, 2), (3, 1), (0, 4)] {
            assert!(deriv(&f, px, py).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_order_limit() {
        let f = Field2D::zeros(grid());
        assert!(matches!(deriv(&f, 3, 2), Err(Error::DerivativeOrder(5))));
    }

    #[test]
    fn mixed_derivatives_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_bandlimited(grid(), 5, 4, 1.0, false, &mut rng);
        let a = deriv(&deriv(&f, 1, 0).unwrap(), 0, 1).unwrap();
        let b = deriv(&f, 1, 1).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn l_of_sine() {
        let f = Field2D::from_fn(grid(), |x, _| x.sin());
        let lf = apply_l(&f).unwrap();
        let exact = Field2D::from_fn(grid(), |x, _| 2.0 * x.cos());
        assert!(lf.max_abs_diff(&exact) < 1e-12);
        let back = invert_l(&exact).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn l_kills_y_only_fields() {
        let f = Field2D::from_fn(grid(), |_, y| (2.0 * PI * y / 3.0).cos());
        assert!(apply_l(&f).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn l_symbol_matches_finite_differences() {
        // e^{i xi x}: compare the multiplier with a fine central-difference
        // evaluation of d/dx - d^3/dx^3 at x = 0.3.
        for xi in [0.5, 1.0, 2.5] {
            let h: f64 = 1e-3;
            let e = |x: f64| Complex64::from_polar(1.0, xi * x);
            let x0 = 0.3;
            let d1 =
                (e(x0 - 2.0 * h) - e(x0 + 2.0 * h) + 8.0 * (e(x0 + h) - e(x0 - h))) / (12.0 * h);
            let d3 = (e(x0 + 2.0 * h) - 2.0 * e(x0 + h) + 2.0 * e(x0 - h) - e(x0 - 2.0 * h))
                / (2.0 * h.powi(3));
            let fd = (d1 - d3) / e(x0);
            assert!((fd - l_symbol(xi)).norm() < 1e-4 * (1.0 + xi.powi(3)));
        }
    }

    #[test]
    fn invert_l_rejects_nonzero_mean() {
        let f = Field2D::from_fn(grid(), |x, _| 1.0 + x.sin());
        assert!(matches!(invert_l(&f), Err(Error::NotAdmissible { .. })));
    }

    #[test]
    fn shift_by_period_and_by_dx() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = grid();
        let f = random_bandlimited(g, 6, 4, 1.0, false, &mut rng);
        assert!(spectral_shift(&f, g.lx).max_abs_diff(&f) < 1e-12);
        assert!(spectral_shift(&f, g.dx()).max_abs_diff(&roll_x(&f, 1)) < 1e-12);
        let back = spectral_shift(&spectral_shift(&f, 0.3 * g.dx()), -0.3 * g.dx());
        assert!(back.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn reflect_of_sine_and_even_field() {
        let g = grid();
        let f = Field2D::from_fn(g, |x, _| x.sin());
        let r = reflect(&f, 0.0);
        assert!(r.add(&f).max_abs() < 1e-12);

        let x0 = g.lx * 0.3;
        let even = Field2D::from_fn(g, |x, y| {
            (x - x0).cos() * (1.0 + 0.2 * y) + (2.0 * (x - x0)).cos()
        });
        assert!(reflect(&even, x0).max_abs_diff(&even) < 1e-12);
    }

    #[test]
    fn dealias_keeps_two_thirds_band() {
        let g = Grid2D::new(12, 12, 1.0, 1.0).unwrap();
        let mut s = SpectralField2D::zeros(g);
        for c in s.coeffs_mut() {
            *c = Complex64::new(1.0, 0.0);
        }
        s.dealias();
        assert_eq!(s.coeff(3, 3), Complex64::new(1.0, 0.0));
        assert_eq!(s.coeff(-3, 0), Complex64::new(1.0, 0.0));
        assert_eq!(s.coeff(4, 0), Complex64::new(0.0, 0.0));
        assert_eq!(s.coeff(0, -4), Complex64::new(0.0, 0.0));
    }
}
