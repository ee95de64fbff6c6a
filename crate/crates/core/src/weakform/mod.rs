//! Weak formulations of both models, evaluated by quadrature against
//! compactly supported test functions.
//!
//! For a field `u` and test function `phi` the CH-KP weak residual is
//!
//! ```text
//! W = iiint u L(phi_t) + (kappa u + 3/2 u^2 + 1/2 u_x^2) phi_xx - 1/2 u^2 phi_xxxx + u phi_yy
//! ```
//!
//! and the HCP one replaces the dispersive part by
//! `(3/2 u^2 + gamma/2 u_x^2) phi_xx - gamma/2 u^2 phi_xxxx - alpha u phi_yy + beta u phi_xxyy`.
//! For smooth `u` each equals the strong residual paired with `phi`. The
//! steady forms replace `u L(phi_t)` by `-c U L(psi_x)` for a profile `U`
//! moving with speed `c`.

mod bump;
mod fields;
pub mod quad;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

pub use bump::{
    bump_derivs, reflect_test_function, AffineAxis, BumpSpec, BumpSpec2D, Jet, Reflected,
    TestFunction, TestFunction2D, MAX_BUMP_ORDER,
};
pub use fields::{
    ClosedFormField, PeakonParams, SpectralProfile, SteadyField, SteadyPeakon, TrigField, TrigTerm,
    ZeroField,
};
pub use quad::{QuadOptions, QuadResult};

/// A weak-form integral; its value is only meaningful above the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub value: f64,
    pub quadrature_error_estimate: f64,
}

impl From<QuadResult> for WeakResidual {
    fn from(q: QuadResult) -> Self {
        WeakResidual {
            value: q.value,
            quadrature_error_estimate: q.error_estimate,
        }
    }
}

/// Coefficients of the unified integrand.
#[derive(Debug, Clone, Copy)]
struct Terms {
    kappa: f64,
    g: f64,
    yy: f64,
    xxyy: f64,
}

impl Terms {
    fn new(p: &ModelParams) -> Result<Self> {
        match *p {
            ModelParams::ChkpNormalized { kappa } => Ok(Terms {
                kappa,
                g: 1.0,
                yy: 1.0,
                xxyy: 0.0,
            }),
            ModelParams::Hcp { alpha, beta, gamma } => Ok(Terms {
                kappa: 0.0,
                g: gamma,
                yy: -alpha,
                xxyy: beta,
            }),
            ModelParams::ChkpPhysical { .. } => Err(Error::WrongModel("chkp_physical")),
        }
    }

    /// Everything except the time-derivative term, given `(u, u_x)` and
    /// `phi_xx, phi_xxxx, phi_yy, phi_xxyy`.
    fn spatial(&self, u: f64, ux: f64, d: [f64; 4]) -> f64 {
        let [pxx, pxxxx, pyy, pxxyy] = d;
        (self.kappa * u + 1.5 * u * u + 0.5 * self.g * ux * ux) * pxx - 0.5 * self.g * u * u * pxxxx
            + self.yy * u * pyy
            + self.xxyy * u * pxxyy
    }
}

fn spatial_jet(j: &Jet) -> [f64; 4] {
    [
        j.get(0, 2, 0),
        j.get(0, 4, 0),
        j.get(0, 0, 2),
        j.get(0, 2, 2),
    ]
}

/// Root of `h` in `(a, b)` when it changes sign between the ends. The
/// functions seen here are affine or nearly so, which regula falsi (Illinois
/// variant) solves in a few steps.
fn crossing(h: impl Fn(f64) -> Option<f64>, a: f64, b: f64) -> Option<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (h(a)?, h(b)?);
    if fa == 0.0 || fb == 0.0 || fa.signum() == fb.signum() {
        return None;
    }
    let scale = fa.abs().max(fb.abs());
    let mut side = 0;
    for _ in 0..100 {
        let m = (a * fb - b * fa) / (fb - fa);
        let fm = h(m)?;
        if fm.abs() <= 1e-15 * scale || (b - a).abs() <= 1e-15 * (1.0 + a.abs() + b.abs()) {
            return Some(m);
        }
        if fm.signum() == fb.signum() {
            b = m;
            fb = fm;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = m;
            fa = fm;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Some(0.5 * (a + b))
}

/// `(t, y)` outer, `x` inner. The t axis is cut where the kink meets an
/// x-edge of the support on a y-edge, the y axis where it meets an x-edge at
/// the current time.
struct SpaceTimeRegion<'a, K> {
    phi: &'a dyn TestFunction,
    kink: K,
    ts: (f64, f64),
    ys: (f64, f64),
}

impl<K: Fn(f64, f64) -> Option<f64> + Sync> SpaceTimeRegion<'_, K> {
    fn gap(&self, t: f64, y: f64, upper: bool) -> Option<f64> {
        let (lo, hi) = self.phi.x_range(t, y);
        Some((self.kink)(t, y)? - if upper { hi } else { lo })
    }
}

impl<K: Fn(f64, f64) -> Option<f64> + Sync> quad::Region for SpaceTimeRegion<'_, K> {
    fn outer_dims(&self) -> usize {
        2
    }

    fn outer(&self, axis: usize, prefix: &[f64]) -> ((f64, f64), Vec<f64>) {
        let mut breaks = Vec::new();
        for upper in [false, true] {
            if axis == 0 {
                for y in [self.ys.0, self.ys.1] {
                    breaks.extend(crossing(|t| self.gap(t, y, upper), self.ts.0, self.ts.1));
                }
            } else {
                let t = prefix[0];
                breaks.extend(crossing(|y| self.gap(t, y, upper), self.ys.0, self.ys.1));
            }
        }
        (if axis == 0 { self.ts } else { self.ys }, breaks)
    }

    fn inner(&self, o: &[f64]) -> ((f64, f64), Option<f64>) {
        (self.phi.x_range(o[0], o[1]), (self.kink)(o[0], o[1]))
    }
}

fn space_time(
    integrand: impl Fn(f64, f64, f64) -> f64 + Sync,
    kink: impl Fn(f64, f64) -> Option<f64> + Sync,
    phi: &dyn TestFunction,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let [ts, _, ys] = phi.support();
    let region = SpaceTimeRegion { phi, kink, ts, ys };
    quad::integrate_region(&|o: &[f64], x: f64| integrand(o[0], x, o[1]), &region, opts)
}

/// `y` outer, cut where the kink leaves the x-support; `x` inner.
struct SteadyRegion<'a> {
    profile: &'a dyn SteadyField,
    xs: (f64, f64),
    ys: (f64, f64),
}

impl quad::Region for SteadyRegion<'_> {
    fn outer_dims(&self) -> usize {
        1
    }

    fn outer(&self, _: usize, _: &[f64]) -> ((f64, f64), Vec<f64>) {
        let breaks = [self.xs.0, self.xs.1]
            .into_iter()
            .filter_map(|e| crossing(|y| Some(self.profile.kink(y)? - e), self.ys.0, self.ys.1))
            .collect();
        (self.ys, breaks)
    }

    fn inner(&self, o: &[f64]) -> ((f64, f64), Option<f64>) {
        (self.xs, self.profile.kink(o[0]))
    }
}

/// Weak residual of the space-time equation for either model.
pub fn weak_residual(
    u: &dyn ClosedFormField,
    phi: &dyn TestFunction,
    p: &ModelParams,
    opts: &QuadOptions,
) -> Result<WeakResidual> {
    let k = Terms::new(p)?;
    let f = |t: f64, x: f64, y: f64| {
        let (uv, ux) = u.eval(t, x, y);
        if uv == 0.0 && ux == 0.0 {
            return 0.0;
        }
        let j = phi.jet(t, x, y);
        let l_phi_t = j.get(1, 1, 0) - j.get(1, 3, 0);
        uv * l_phi_t + k.spatial(uv, ux, spatial_jet(&j))
    };
    Ok(space_time(f, |t, y| u.kink(t, y), phi, opts)?.into())
}

/// Weak residual after the reflection `psi = T_lambda phi` with an affine axis
/// of speed `lambda_dot`: the time term becomes `u (-L psi_t - 2 lambda_dot L psi_x)`.
/// For `u` symmetric about the axis this equals `weak_residual(u, phi)`.
pub fn transformed_weak_residual(
    u: &dyn ClosedFormField,
    psi: &dyn TestFunction,
    lambda_dot: f64,
    p: &ModelParams,
    opts: &QuadOptions,
) -> Result<WeakResidual> {
    let k = Terms::new(p)?;
    let f = |t: f64, x: f64, y: f64| {
        let (uv, ux) = u.eval(t, x, y);
        if uv == 0.0 && ux == 0.0 {
            return 0.0;
        }
        let j = psi.jet(t, x, y);
        let l_psi_t = j.get(1, 1, 0) - j.get(1, 3, 0);
        let l_psi_x = j.get(0, 2, 0) - j.get(0, 4, 0);
        uv * (-l_psi_t - 2.0 * lambda_dot * l_psi_x) + k.spatial(uv, ux, spatial_jet(&j))
    };
    Ok(space_time(f, |t, y| u.kink(t, y), psi, opts)?.into())
}

pub fn weak_residual_chkp(
    u: &dyn ClosedFormField,
    phi: &dyn TestFunction,
    kappa: f64,
    opts: &QuadOptions,
) -> Result<WeakResidual> {
    weak_residual(u, phi, &ModelParams::ChkpNormalized { kappa }, opts)
}

pub fn weak_residual_hcp(
    u: &dyn ClosedFormField,
    phi: &dyn TestFunction,
    alpha: f64,
    beta: f64,
    gamma: f64,
    opts: &QuadOptions,
) -> Result<WeakResidual> {
    weak_residual(u, phi, &ModelParams::Hcp { alpha, beta, gamma }, opts)
}

/// Pointwise strong residual of a manufactured field, expanded by hand:
/// `L u_t + kappa u_xx + 3 u_x^2 + 3 u u_xx - g (2 u_xx^2 + 3 u_x u_xxx + u u_xxxx) + ...`.
pub fn strong_residual_at(u: &TrigField, p: &ModelParams, t: f64, x: f64, y: f64) -> Result<f64> {
    let k = Terms::new(p)?;
    let d = |pt, px, py| u.deriv(pt, px, py, t, x, y);
    let (u0, u1, u2, u3, u4) = (d(0, 0, 0), d(0, 1, 0), d(0, 2, 0), d(0, 3, 0), d(0, 4, 0));
    let lut = d(1, 1, 0) - d(1, 3, 0);
    let flux_x = 3.0 * u1 * u1 + 3.0 * u0 * u2 - k.g * (2.0 * u2 * u2 + 3.0 * u1 * u3 + u0 * u4);
    Ok(lut + k.kappa * u2 + flux_x + k.yy * d(0, 0, 2) + k.xxyy * d(0, 2, 2))
}

/// `<strong residual, phi>` by the same quadrature.
pub fn strong_pairing(
    u: &TrigField,
    phi: &dyn TestFunction,
    p: &ModelParams,
    opts: &QuadOptions,
) -> Result<WeakResidual> {
    Terms::new(p)?;
    let f = |t: f64, x: f64, y: f64| {
        let w = phi.deriv(0, 0, 0, t, x, y);
        if w == 0.0 {
            0.0
        } else {
            strong_residual_at(u, p, t, x, y).unwrap_or(f64::NAN) * w
        }
    };
    Ok(space_time(f, |_, _| None, phi, opts)?.into())
}

/// Weak residual of the traveling-frame equation for a profile `U` and speed `c`.
pub fn steady_weak_residual(
    profile: &dyn SteadyField,
    c: f64,
    psi: &dyn TestFunction2D,
    p: &ModelParams,
    opts: &QuadOptions,
) -> Result<WeakResidual> {
    let k = Terms::new(p)?;
    let [xs, ys] = psi.support();
    let f = |o: &[f64], x: f64| {
        let [speed, rest] = steady_parts_at(&k, profile, psi, x, o[0]);
        c * speed + rest
    };
    Ok(quad::integrate_region(&f, &SteadyRegion { profile, xs, ys }, opts)?.into())
}

/// `[-U L(psi_x), rest]`: the steady integrand is `c * speed + rest`.
fn steady_parts_at(
    k: &Terms,
    profile: &dyn SteadyField,
    psi: &dyn TestFunction2D,
    x: f64,
    y: f64,
) -> [f64; 2] {
    let (uv, ux) = profile.eval(x, y);
    if uv == 0.0 && ux == 0.0 {
        return [0.0; 2];
    }
    let j = psi.jet(x, y);
    [
        -uv * (j[2][0] - j[4][0]),
        k.spatial(uv, ux, [j[2][0], j[4][0], j[0][2], j[2][2]]),
    ]
}

/// The steady residual split as `W(c) = c * speed + rest`, integrated once
/// and evaluable at any speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyParts {
    quad: quad::VecQuad<2>,
}

impl SteadyParts {
    /// Same rule as a direct integration at the final level, with the error
    /// estimate `|c dQ_speed + dQ_rest|` plus the roundoff floor.
    pub fn at(&self, c: f64) -> WeakResidual {
        let q = &self.quad;
        let abs = c.abs() * q.abs_integral[0] + q.abs_integral[1];
        WeakResidual {
            value: c * q.value[0] + q.value[1],
            quadrature_error_estimate: (c * q.delta[0] + q.delta[1]).abs()
                + 64.0 * f64::EPSILON * abs,
        }
    }

    pub fn cells(&self) -> usize {
        self.quad.cells
    }
}

pub fn steady_parts(
    profile: &dyn SteadyField,
    psi: &dyn TestFunction2D,
    p: &ModelParams,
    opts: &QuadOptions,
) -> Result<SteadyParts> {
    let k = Terms::new(p)?;
    let [xs, ys] = psi.support();
    let f = |o: &[f64], x: f64| steady_parts_at(&k, profile, psi, x, o[0]);
    Ok(SteadyParts {
        quad: quad::integrate_vec_region(&f, &SteadyRegion { profile, xs, ys }, opts)?,
    })
}

pub fn steady_weak_residual_chkp(
    profile: &dyn SteadyField,
    c: f64,
    psi: &dyn TestFunction2D,
    kappa: f64,
    opts: &QuadOptions,
) -> Result<WeakResidual> {
    steady_weak_residual(
        profile,
        c,
        psi,
        &ModelParams::ChkpNormalized { kappa },
        opts,
    )
}

pub fn steady_weak_residual_hcp(
    profile: &dyn SteadyField,
    c: f64,
    psi: &dyn TestFunction2D,
    alpha: f64,
    beta: f64,
    gamma: f64,
    opts: &QuadOptions,
) -> Result<WeakResidual> {
    steady_weak_residual(
        profile,
        c,
        psi,
        &ModelParams::Hcp { alpha, beta, gamma },
        opts,
    )
}

/// Ten bumps at three scales: on the ridge `x = -theta y`, on both tails,
/// and elongated along y.
pub fn default_basis(theta: f64) -> Vec<BumpSpec2D> {
    let at = |y: f64, dx: f64, rx: f64, ry: f64| BumpSpec2D {
        center: [-theta * y + dx, y],
        radii: [rx, ry],
        amplitude: 1.0,
    };
    vec![
        at(0.0, 0.0, 0.5, 0.5),
        at(0.0, 0.0, 1.0, 1.0),
        at(0.0, 0.0, 2.0, 2.0),
        at(0.2, 0.3, 0.5, 1.0),
        at(0.5, -0.4, 1.0, 0.5),
        at(0.0, 2.0, 1.0, 1.0),
        at(0.3, -2.0, 1.0, 1.0),
        at(1.5, 0.0, 2.0, 0.5),
        at(-1.0, 3.0, 2.0, 2.0),
        at(-1.0, -1.0, 0.5, 2.0),
    ]
}

/// Peakon scan setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub theta: f64,
    pub kappa: f64,
    pub a_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    /// Defaults to [`default_basis`] when absent.
    #[serde(default)]
    pub basis: Option<Vec<BumpSpec2D>>,
    /// Defaults to [`SCAN_QUAD`].
    #[serde(default)]
    pub quad: Option<QuadOptions>,
}

/// `R(a, c) = max over the basis of |W| / error estimate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub a: f64,
    pub c: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|c - (slope a + intercept)|` over the fitted points.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub theta: f64,
    pub kappa: f64,
    pub threshold: f64,
    /// Every scanned grid point.
    pub grid: Vec<ScanPoint>,
    /// Points with `R < threshold` and `a != 0`: grid hits and per-amplitude
    /// refined speeds.
    pub zeros: Vec<ScanPoint>,
    /// Per-amplitude least-squares speed, whether or not it is a zero.
    pub refined: Vec<ScanPoint>,
    pub fit: Option<AffineFit>,
}

pub const ZERO_SET_THRESHOLD: f64 = 3.0;

/// Scans integrate in two dimensions only, so they default to a tighter
/// tolerance than [`QuadOptions::default`].
pub const SCAN_QUAD: QuadOptions = QuadOptions {
    min_cells: 4,
    max_cells: 256,
    abs_tol: 1e-14,
    rel_tol: 1e-13,
};

fn ratio(ws: &[WeakResidual]) -> f64 {
    ws.iter()
        .map(|w| {
            if w.value == 0.0 {
                0.0
            } else if w.quadrature_error_estimate == 0.0 {
                f64::INFINITY
            } else {
                w.value.abs() / w.quadrature_error_estimate
            }
        })
        .fold(0.0, f64::max)
}

/// Scans the steady CH-KP weak residual of `a exp(-|x + theta y|)` over the
/// `(a, c)` grid. The residual is affine in `c`, so each amplitude also gets
/// the least-squares speed over the basis, which is kept when it passes the
/// same threshold.
pub fn peakon_scan(cfg: &ScanConfig) -> Result<ZeroSet> {
    if cfg.a_grid.is_empty() || cfg.c_grid.is_empty() {
        return Err(Error::InvalidArgument(
            "a_grid and c_grid must be nonempty".into(),
        ));
    }
    let basis = cfg
        .basis
        .clone()
        .unwrap_or_else(|| default_basis(cfg.theta));
    if basis.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "test-function basis needs at least 10 bumps, got {}",
            basis.len()
        )));
    }
    let opts = cfg.quad.unwrap_or(SCAN_QUAD);
    let model = ModelParams::ChkpNormalized { kappa: cfg.kappa };
    let mut grid = Vec::new();
    let mut zeros = Vec::new();
    let mut refined = Vec::new();
    for &a in &cfg.a_grid {
        let peakon = SteadyPeakon {
            a,
            theta: cfg.theta,
        };
        let parts = basis
            .iter()
            .map(|b| steady_parts(&peakon, b, &model, &opts))
            .collect::<Result<Vec<_>>>()?;
        let r_at = |c: f64| ratio(&parts.iter().map(|p| p.at(c)).collect::<Vec<_>>());
        for &c in &cfg.c_grid {
            let pt = ScanPoint { a, c, r: r_at(c) };
            grid.push(pt);
            if a != 0.0 && pt.r < ZERO_SET_THRESHOLD {
                zeros.push(pt);
            }
        }
        if a == 0.0 {
            continue;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for p in &parts {
            let slope = p.quad.value[0];
            num += p.quad.value[1] * slope;
            den += slope * slope;
        }
        if den == 0.0 {
            continue;
        }
        let c_star = -num / den;
        let pt = ScanPoint {
            a,
            c: c_star,
            r: r_at(c_star),
        };
        refined.push(pt);
        if pt.r < ZERO_SET_THRESHOLD && !zeros.iter().any(|z| z.a == a && z.c == c_star) {
            zeros.push(pt);
        }
    }
    let fit = fit_affine(&zeros);
    Ok(ZeroSet {
        theta: cfg.theta,
        kappa: cfg.kappa,
        threshold: ZERO_SET_THRESHOLD,
        grid,
        zeros,
        refined,
        fit,
    })
}

/// Least-squares line `c = slope a + intercept`; needs two distinct amplitudes.
pub fn fit_affine(points: &[ScanPoint]) -> Option<AffineFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let am = points.iter().map(|p| p.a).sum::<f64>() / n;
    let cm = points.iter().map(|p| p.c).sum::<f64>() / n;
    let saa: f64 = points.iter().map(|p| (p.a - am).powi(2)).sum();
    if saa == 0.0 {
        return None;
    }
    let sac: f64 = points.iter().map(|p| (p.a - am) * (p.c - cm)).sum();
    let slope = sac / saa;
    let intercept = cm - slope * am;
    let max_residual = points
        .iter()
        .map(|p| (p.c - slope * p.a - intercept).abs())
        .fold(0.0, f64::max);
    Some(AffineFit {
        slope,
        intercept,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi() -> BumpSpec {
        BumpSpec {
            center: [0.0, 0.2, -0.1],
            radii: [1.0, 1.3, 1.1],
            amplitude: 1.0,
        }
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let o = QuadOptions::default();
        let w = weak_residual_chkp(&ZeroField, &phi(), 0.7, &o).unwrap();
        assert_eq!(w.value, 0.0);
        let w = weak_residual_hcp(&ZeroField, &phi(), 1.0, 0.2, 0.5, &o).unwrap();
        assert_eq!(w.value, 0.0);
        let psi = BumpSpec2D {
            center: [0.0, 0.0],
            radii: [1.0, 1.0],
            amplitude: 1.0,
        };
        let w = steady_weak_residual_chkp(&ZeroField, 0.4, &psi, 0.7, &o).unwrap();
        assert_eq!(w.value, 0.0);
    }

    #[test]
    fn single_wave_matches_strong_pairing() {
        let u = TrigField {
            terms: vec![TrigTerm {
                amp: 0.4,
                xi: 1.1,
                eta: -0.7,
                nu: 0.5,
                phase: 0.3,
            }],
        };
        let o = QuadOptions::default();
        for p in [
            ModelParams::ChkpNormalized { kappa: 0.6 },
            ModelParams::Hcp {
                alpha: 1.0,
                beta: 0.3,
                gamma: 0.8,
            },
        ] {
            let w = weak_residual(&u, &phi(), &p, &o).unwrap();
            let s = strong_pairing(&u, &phi(), &p, &o).unwrap();
            assert!(
                (w.value - s.value).abs() < 1e-9,
                "{p:?}: {} vs {}",
                w.value,
                s.value
            );
        }
    }

    #[test]
    fn affine_fit_of_exact_line() {
        let pts: Vec<ScanPoint> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&a| ScanPoint {
                a,
                c: 2.0 * a - 1.0,
                r: 0.0,
            })
            .collect();
        let f = fit_affine(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!(fit_affine(&pts[..1]).is_none());
    }
}
