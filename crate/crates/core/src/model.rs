//! Right-hand sides, residuals and dispersion relations of the two models.
//!
//! Both models share the structure
//!
//! ```text
//! L u_t + Lin(u) + d/dx M(u) = 0,    L = d/dx (1 - d^2/dx^2)
//! M(u) = 3 u u_x - g (2 u_x u_xx + u u_xxx)
//! ```
//!
//! with `Lin(u) = kappa u_xx + u_yy` and `g = 1` for the normalized CH-KP
//! equation, and `Lin(u) = -alpha u_yy + beta u_xxyy`, `g = gamma` for the
//! HCP plate model.
//!
//! Time convention: a linear mode evolves as `exp(i (xi x + eta y - omega t))`,
//! so `u_t = -i omega u` with `omega = -sym(Lin) / (xi (1 + xi^2))`. For HCP this
//! gives `omega = -p(xi, eta)` with `p = (alpha eta^2 / xi + beta xi eta^2) / (1 + xi^2)`.
//!
//! Quadratic products are formed from 2/3-truncated inputs and truncated again
//! after the forward transform, so the discrete operators commute exactly with
//! sub-grid translations on the truncated band.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{deriv_spectral, l_inverse_symbol, l_symbol, Field2D, SpectralField2D};

/// Model selection and parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ModelParams {
    /// Normalized CH-KP equation.
    #[serde(rename = "chkp")]
    ChkpNormalized { kappa: f64 },
    /// Hyperelastic compressible plate model.
    #[serde(rename = "hcp")]
    Hcp { alpha: f64, beta: f64, gamma: f64 },
    /// Physical CH-KP parameters; only meaningful for the scale transform.
    #[serde(rename = "chkp_physical")]
    ChkpPhysical { epsilon: f64, gamma_phys: f64 },
}

impl ModelParams {
    pub fn name(&self) -> &'static str {
        match self {
            ModelParams::ChkpNormalized { .. } => "chkp",
            ModelParams::Hcp { .. } => "hcp",
            ModelParams::ChkpPhysical { .. } => "chkp_physical",
        }
    }

    /// Rejects negative plate parameters; warns when the physical CH-KP
    /// parameters are not small.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelParams::ChkpNormalized { kappa } => {
                if !kappa.is_finite() {
                    return Err(Error::InvalidArgument("kappa must be finite".into()));
                }
            }
            ModelParams::Hcp { alpha, beta, gamma } => {
                for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "{name} = {v} must be a nonnegative number"
                        )));
                    }
                }
            }
            ModelParams::ChkpPhysical {
                epsilon,
                gamma_phys,
            } => {
                for (name, v) in [("epsilon", epsilon), ("gamma_phys", gamma_phys)] {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "{name} = {v} must be positive"
                        )));
                    }
                    if v > 1.0 {
                        log::warn!(
                            "{name} = {v} is outside (0, 1]; the model assumes small parameters"
                        );
                    }
                }
            }
        }
        Ok(())
    }

    /// Coefficient `g` in front of `(2 u_x u_xx + u u_xxx)` in the flux.
    pub fn flux_gamma(&self) -> Result<f64> {
        match *self {
            ModelParams::ChkpNormalized { .. } => Ok(1.0),
            ModelParams::Hcp { gamma, .. } => Ok(gamma),
            ModelParams::ChkpPhysical { .. } => Err(Error::WrongModel("chkp_physical")),
        }
    }

    /// Fourier symbol of the linear part `Lin`.
    pub fn linear_part_symbol(&self, xi: f64, eta: f64) -> Result<f64> {
        match *self {
            ModelParams::ChkpNormalized { kappa } => Ok(-kappa * xi * xi - eta * eta),
            ModelParams::Hcp { alpha, beta, .. } => {
                Ok(alpha * eta * eta + beta * xi * xi * eta * eta)
            }
            ModelParams::ChkpPhysical { .. } => Err(Error::WrongModel("chkp_physical")),
        }
    }
}

/// Dispersion frequency `omega(xi, eta)`; see the module docs for the sign convention.
pub fn linear_symbol(p: &ModelParams, xi: f64, eta: f64) -> Result<f64> {
    if xi == 0.0 {
        return Err(Error::ZeroMode);
    }
    Ok(-p.linear_part_symbol(xi, eta)? / (xi * (1.0 + xi * xi)))
}

/// HCP dispersion symbol `p(xi, eta) = (alpha eta^2 / xi + beta xi eta^2) / (1 + xi^2)`.
pub fn hcp_symbol_p(alpha: f64, beta: f64, xi: f64, eta: f64) -> f64 {
    (alpha * eta * eta / xi + beta * xi * eta * eta) / (1.0 + xi * xi)
}

/// `u, u_x, u_xx, u_xxx` on the grid, from the 2/3-truncated spectrum of `u`.
#[derive(Debug, Clone)]
pub struct FluxFactors {
    grid: crate::spectral::Grid2D,
    d: [Vec<f64>; 4],
}

impl FluxFactors {
    pub fn new(u: &SpectralField2D) -> Self {
        let mut ut = u.clone();
        ut.dealias();
        let d = [0, 1, 2, 3].map(|n| deriv_spectral(&ut, n, 0).to_field().into_values());
        FluxFactors { grid: *u.grid(), d }
    }
}

/// Symmetric bilinear form behind the flux, dealiased:
/// `M(u) = flux_pair(u, u)` and `DM(g)[h] = 2 flux_pair(g, h)`.
pub fn flux_pair(a: &FluxFactors, b: &FluxFactors, gamma: f64) -> SpectralField2D {
    let (a, bb) = (&a.d, &b.d);
    let m: Vec<f64> = (0..a[0].len())
        .map(|i| {
            1.5 * (a[0][i] * bb[1][i] + bb[0][i] * a[1][i])
                - gamma
                    * (a[1][i] * bb[2][i]
                        + bb[1][i] * a[2][i]
                        + 0.5 * (a[0][i] * bb[3][i] + bb[0][i] * a[3][i]))
        })
        .collect();
    let mut mhat = Field2D::from_raw(b.grid, m).to_spectral();
    mhat.dealias();
    mhat
}

/// Spectrum of the dealiased flux `M(u)` given the spectrum of `u`.
pub fn flux_spectral(u: &SpectralField2D, gamma: f64) -> SpectralField2D {
    let f = FluxFactors::new(u);
    flux_pair(&f, &f, gamma)
}

/// Spectrum of the bracket `Lin(u) + d/dx M(u)`.
pub fn bracket_spectral(u: &SpectralField2D, p: &ModelParams) -> Result<SpectralField2D> {
    let gamma = p.flux_gamma()?;
    let m = flux_spectral(u, gamma);
    let g = *u.grid();
    let mut out = u.clone();
    for iy in 0..g.ny {
        let eta = g.eta(iy);
        for ix in 0..g.nx {
            let xi = g.xi(ix);
            let idx = g.index(ix, iy);
            let lin = p.linear_part_symbol(xi, eta)?;
            out.coeffs_mut()[idx] =
                lin * u.coeffs()[idx] + Complex64::new(0.0, xi) * m.coeffs()[idx];
        }
    }
    out.symmetrize_nyquist();
    Ok(out)
}

/// `u_t = -L^{-1} [Lin(u) + d/dx M(u)]` for either evolvable model.
pub fn rhs(u: &Field2D, p: &ModelParams) -> Result<Field2D> {
    u.check_admissible()?;
    let b = bracket_spectral(&u.to_spectral(), p)?;
    let mut out = b.apply(|xi, _| -l_inverse_symbol(xi));
    out.zero_x_mode();
    Ok(out.to_field())
}

/// Right-hand side of the normalized CH-KP equation.
pub fn chkp_rhs(u: &Field2D, p: &ModelParams) -> Result<Field2D> {
    match p {
        ModelParams::ChkpNormalized { .. } => rhs(u, p),
        _ => Err(Error::WrongModel(p.name())),
    }
}

/// Right-hand side of the HCP model.
pub fn hcp_rhs(u: &Field2D, p: &ModelParams) -> Result<Field2D> {
    match p {
        ModelParams::Hcp { .. } => rhs(u, p),
        _ => Err(Error::WrongModel(p.name())),
    }
}

/// Left-hand side `L u_t + Lin(u) + d/dx M(u)` of the strong equation.
pub fn strong_residual(u: &Field2D, ut: &Field2D, p: &ModelParams) -> Result<Field2D> {
    u.check_admissible()?;
    ut.check_admissible()?;
    u.same_grid(ut)?;
    let b = bracket_spectral(&u.to_spectral(), p)?;
    let lut = ut.to_spectral().apply(|xi, _| l_symbol(xi));
    Ok(b.to_field().add(&lut.to_field()))
}

/// Traveling-wave residual `-c L(g_x) + Lin(g) + d/dx M(g)`; zero iff
/// `g(x - c t, y)` solves the model.
pub fn tw_residual(g: &Field2D, c: f64, p: &ModelParams) -> Result<Field2D> {
    g.check_admissible()?;
    Ok(tw_residual_spectral(&g.to_spectral(), c, p)?.to_field())
}

pub fn tw_residual_spectral(
    g: &SpectralField2D,
    c: f64,
    p: &ModelParams,
) -> Result<SpectralField2D> {
    let b = bracket_spectral(g, p)?;
    // -c L d/dx has symbol c xi^2 (1 + xi^2)
    let grid = *g.grid();
    let mut out = b;
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let xi = grid.xi(ix);
            let idx = grid.index(ix, iy);
            out.coeffs_mut()[idx] += c * xi * xi * (1.0 + xi * xi) * g.coeffs()[idx];
        }
    }
    out.symmetrize_nyquist();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::{deriv, invert_l, random::random_bandlimited, reflect, Grid2D};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const CHKP: ModelParams = ModelParams::ChkpNormalized { kappa: 1.0 };
    const HCP: ModelParams = ModelParams::Hcp {
        alpha: 1.0,
        beta: 0.3,
        gamma: 0.7,
    };

    fn grid() -> Grid2D {
        Grid2D::new(32, 32, 2.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_field_has_zero_rhs() {
        let z = Field2D::zeros(grid());
        assert_eq!(chkp_rhs(&z, &CHKP).unwrap().max_abs(), 0.0);
        assert_eq!(hcp_rhs(&z, &HCP).unwrap().max_abs(), 0.0);
        assert_eq!(tw_residual(&z, 0.7, &CHKP).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn wrong_model_is_rejected() {
        let z = Field2D::zeros(grid());
        assert!(chkp_rhs(&z, &HCP).is_err());
        assert!(hcp_rhs(&z, &CHKP).is_err());
        let phys = ModelParams::ChkpPhysical {
            epsilon: 0.1,
            gamma_phys: 0.1,
        };
        assert!(rhs(&z, &phys).is_err());
    }

    #[test]
    fn non_admissible_input_is_rejected() {
        let f = Field2D::from_fn(grid(), |x, _| 0.5 + x.cos());
        assert!(matches!(
            chkp_rhs(&f, &CHKP),
            Err(Error::NotAdmissible { .. })
        ));
    }

    #[test]
    fn hcp_parameters_must_be_nonnegative() {
        let bad = ModelParams::Hcp {
            alpha: -1.0,
            beta: 0.0,
            gamma: 0.0,
        };
        assert!(bad.validate().is_err());
        assert!(HCP.validate().is_ok());
    }

    #[test]
    fn dispersion_values() {
        let hcp = ModelParams::Hcp {
            alpha: 1.0,
            beta: 0.0,
            gamma: 1.0,
        };
        assert!((hcp_symbol_p(1.0, 0.0, 1.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((linear_symbol(&hcp, 1.0, 1.0).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(linear_symbol(&hcp, 2.0, 0.0).unwrap(), 0.0);
        let chkp0 = ModelParams::ChkpNormalized { kappa: 0.0 };
        assert!((linear_symbol(&chkp0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            linear_symbol(&chkp0, 0.0, 1.0),
            Err(Error::ZeroMode)
        ));
    }

    #[test]
    fn small_mode_rhs_matches_dispersion() {
        // u = d cos(xi x + eta y) => u_t ~ d omega sin(xi x + eta y)
        let d = 1e-7;
        for p in [CHKP, HCP] {
            let (xi, eta) = (2.0, 3.0);
            let u = Field2D::from_fn(grid(), |x, y| d * (xi * x + eta * y).cos());
            let ut = rhs(&u, &p).unwrap();
            let w = linear_symbol(&p, xi, eta).unwrap();
            let exact = Field2D::from_fn(grid(), |x, y| d * w * (xi * x + eta * y).sin());
            assert!(ut.max_abs_diff(&exact) / d < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn linearization_is_first_order() {
        let mode = Field2D::from_fn(grid(), |x, y| (x + 2.0 * y).cos() + 0.5 * (2.0 * x).sin());
        let mut prev = f64::INFINITY;
        for d in [1e-3, 1e-4, 1e-5, 1e-6] {
            let u = mode.scale(d);
            let full = rhs(&u, &CHKP).unwrap().scale(1.0 / d);
            let lin = {
                let b = bracket_spectral(&mode.to_spectral(), &CHKP).unwrap();
                let nl = flux_spectral(&mode.to_spectral(), 1.0);
                // remove the quadratic part: linear bracket only
                let g = *mode.grid();
                let mut lin = b.clone();
                for iy in 0..g.ny {
                    for ix in 0..g.nx {
                        let idx = g.index(ix, iy);
                        lin.coeffs_mut()[idx] -= Complex64::new(0.0, g.xi(ix)) * nl.coeffs()[idx];
                    }
                }
                lin.apply(|xi, _| -l_inverse_symbol(xi)).to_field()
            };
            let err = full.max_abs_diff(&lin);
            assert!(err <= 50.0 * d, "d = {d}: err = {err}");
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn rhs_keeps_zero_x_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [CHKP, HCP] {
            let u = random_bandlimited(grid(), 6, 6, 0.5, true, &mut rng);
            let ut = rhs(&u, &p).unwrap();
            assert!(ut.max_row_mean() < 1e-12);
        }
    }

    #[test]
    fn strong_residual_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_bandlimited(grid(), 5, 5, 0.3, true, &mut rng);
        for p in [CHKP, HCP] {
            let ut = rhs(&u, &p).unwrap();
            assert!(strong_residual(&u, &ut, &p).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn strong_residual_of_static_sine() {
        let u = Field2D::from_fn(grid(), |x, _| x.sin());
        let r = strong_residual(&u, &Field2D::zeros(grid()), &CHKP).unwrap();
        // M(sin) = 3 sc + 2 sc + sc = 3 sin(2x), so d/dx M = 6 cos(2x)
        let flux_x = Field2D::from_fn(grid(), |x, _| 6.0 * (2.0 * x).cos());
        let exact = u.scale(-1.0).add(&flux_x);
        assert!(r.max_abs_diff(&exact) < 1e-11);
    }

    #[test]
    fn manufactured_linear_mode_has_zero_residual() {
        // u(t) = d cos(xi x + eta y - omega t), sampled at t = 0.4 with its exact time derivative
        let d = 1e-9;
        let (xi, eta, t) = (1.0, 2.0, 0.4);
        for p in [CHKP, HCP] {
            let w = linear_symbol(&p, xi, eta).unwrap();
            let u = Field2D::from_fn(grid(), |x, y| d * (xi * x + eta * y - w * t).cos());
            let ut = Field2D::from_fn(grid(), |x, y| d * w * (xi * x + eta * y - w * t).sin());
            let r = strong_residual(&u, &ut, &p).unwrap();
            assert!(r.max_abs() < 1e-10);
        }
    }

    #[test]
    fn reflection_antisymmetry_for_even_data() {
        let x0 = 1.3;
        let u = Field2D::from_fn(grid(), |x, y| {
            (x - x0).cos() * (1.0 + 0.3 * y.sin()) + 0.4 * (2.0 * (x - x0)).cos() * y.cos()
        });
        let lin = deriv(&u, 2, 0).unwrap().add(&deriv(&u, 0, 2).unwrap());
        let w = invert_l(&lin).unwrap();
        let even_part = w.add(&reflect(&w, x0)).scale(0.5);
        assert!(even_part.max_abs() < 1e-11);
        for p in [CHKP, HCP] {
            let n = rhs(&u, &p).unwrap();
            assert!(reflect(&n, x0).add(&n).max_abs() < 1e-10);
        }
    }

    #[test]
    fn tw_residual_vanishes_for_linear_wave_at_linear_speed() {
        let g = grid();
        let (xi, eta) = (1.0, 1.0);
        let c = linear_symbol(&CHKP, xi, eta).unwrap() / xi;
        let u = Field2D::from_fn(g, |x, y| 1e-9 * (xi * x).cos() * (eta * y).cos());
        // cos(x) cos(y) mixes (1, 1) and (1, -1), which share the same phase speed
        assert!(tw_residual(&u, c, &CHKP).unwrap().max_abs() < 1e-17);
    }
}
