//! Fields known in closed form: the peakon family and manufactured smooth
//! trigonometric fields with analytic derivatives.

use serde::{Deserialize, Serialize};

use crate::spectral::{Field2D, Interpolant};

/// Space-time field with pointwise `(u, u_x)` and a known x-kink.
pub trait ClosedFormField: Sync {
    fn eval(&self, t: f64, x: f64, y: f64) -> (f64, f64);
    /// x-position of the gradient discontinuity on the line `(t, ., y)`.
    fn kink(&self, _t: f64, _y: f64) -> Option<f64> {
        None
    }
}

/// Time-independent field for the traveling-frame weak forms.
pub trait SteadyField: Sync {
    fn eval(&self, x: f64, y: f64) -> (f64, f64);
    fn kink(&self, _y: f64) -> Option<f64> {
        None
    }
}

/// The identically zero field.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl ClosedFormField for ZeroField {
    fn eval(&self, _: f64, _: f64, _: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
}

impl SteadyField for ZeroField {
    fn eval(&self, _: f64, _: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// `a exp(-|x + theta y - c t|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakonParams {
    pub a: f64,
    pub theta: f64,
    pub c: f64,
}

impl PeakonParams {
    /// The profile in the co-moving frame, `a exp(-|x + theta y|)`.
    pub fn profile(&self) -> SteadyPeakon {
        SteadyPeakon {
            a: self.a,
            theta: self.theta,
        }
    }

    /// Sampled at time `t` on a grid.
    pub fn sample(&self, grid: crate::spectral::Grid2D, t: f64) -> Field2D {
        Field2D::from_fn(grid, |x, y| self.eval(t, x, y).0)
    }
}

// (u, u_x) of a e^{-|s|}; the derivative on the ridge is the two-sided mean, 0.
fn peak(a: f64, s: f64) -> (f64, f64) {
    let e = a * (-s.abs()).exp();
    let d = if s > 0.0 {
        -e
    } else if s < 0.0 {
        e
    } else {
        0.0
    };
    (e, d)
}

impl ClosedFormField for PeakonParams {
    fn eval(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        peak(self.a, x + self.theta * y - self.c * t)
    }

    fn kink(&self, t: f64, y: f64) -> Option<f64> {
        Some(self.c * t - self.theta * y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyPeakon {
    pub a: f64,
    pub theta: f64,
}

impl SteadyField for SteadyPeakon {
    fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        peak(self.a, x + self.theta * y)
    }

    fn kink(&self, y: f64) -> Option<f64> {
        Some(-self.theta * y)
    }
}

/// One term `amp cos(xi x + eta y + nu t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub amp: f64,
    pub xi: f64,
    pub eta: f64,
    pub nu: f64,
    pub phase: f64,
}

/// Finite sum of plane waves; every derivative is available exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigField {
    pub terms: Vec<TrigTerm>,
}

impl TrigField {
    /// `d_t^pt d_x^px d_y^py u`.
    pub fn deriv(&self, pt: u32, px: u32, py: u32, t: f64, x: f64, y: f64) -> f64 {
        let shift = (pt + px + py) as f64 * std::f64::consts::FRAC_PI_2;
        self.terms
            .iter()
            .map(|w| {
                w.amp
                    * w.nu.powi(pt as i32)
                    * w.xi.powi(px as i32)
                    * w.eta.powi(py as i32)
                    * (w.xi * x + w.eta * y + w.nu * t + w.phase + shift).cos()
            })
            .sum()
    }

    /// Random field with `n` terms, wavenumbers in `[-kmax, kmax]`.
    pub fn random(n: usize, kmax: f64, amp: f64, rng: &mut impl rand::Rng) -> Self {
        let terms = (0..n)
            .map(|_| TrigTerm {
                amp: amp * rng.gen_range(-1.0..1.0),
                xi: rng.gen_range(-kmax..kmax),
                eta: rng.gen_range(-kmax..kmax),
                nu: rng.gen_range(-kmax..kmax),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            })
            .collect();
        TrigField { terms }
    }
}

impl ClosedFormField for TrigField {
    fn eval(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        (self.deriv(0, 0, 0, t, x, y), self.deriv(0, 1, 0, t, x, y))
    }
}

/// A sampled profile evaluated through its trigonometric interpolant.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    interp: Interpolant,
}

impl SpectralProfile {
    /// Drops coefficients below `1e-16` of the largest one.
    pub fn new(f: &Field2D) -> Self {
        SpectralProfile {
            interp: Interpolant::new(&f.to_spectral(), 1e-16),
        }
    }
}

impl SteadyField for SpectralProfile {
    fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        self.interp.eval(x, y)
    }
}
