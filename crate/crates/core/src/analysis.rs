//! Detectors for x-symmetry and steadiness of snapshot series.
//!
//! A reflection about `lambda` and about `lambda + lx/2` coincide on a torus of
//! period `lx`, so axes are reported in `[0, lx/2)` and unwrapped along a
//! series with the measured displacement between consecutive snapshots.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{reflect_spectral, shift_spectral, Field2D, Grid2D, SpectralField2D};
use crate::timestep::Snapshot;

pub const SYMMETRIC_THRESHOLD: f64 = 1e-6;
pub const STEADY_THRESHOLD: f64 = 1e-5;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Relative L2 defect `|u - u(2 lambda - x, .)| / |u|`.
pub fn asymmetry(u: &Field2D, lambda: f64) -> Result<f64> {
    u.check_finite()?;
    asymmetry_spectral(&u.to_spectral(), lambda)
}

pub fn asymmetry_spectral(s: &SpectralField2D, lambda: f64) -> Result<f64> {
    let norm = coeff_norm(s);
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(reflection_defect(s, lambda) / norm)
}

fn coeff_norm(s: &SpectralField2D) -> f64 {
    s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

// Coefficient-wise difference; no cancellation between large norms.
fn reflection_defect(s: &SpectralField2D, lambda: f64) -> f64 {
    let r = reflect_spectral(s, lambda);
    s.coeffs()
        .iter()
        .zip(r.coeffs())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Axis minimizing [`asymmetry`]: a scan over `nx` candidates spaced `dx/2`
/// across `[0, lx/2)`, then golden-section refinement to `1e-10`.
///
/// Returns `(lambda, score)`. A score above [`SYMMETRIC_THRESHOLD`] is
/// returned as is; judging it is up to the caller.
pub fn find_axis(u: &Field2D) -> Result<(f64, f64)> {
    u.check_finite()?;
    find_axis_spectral(&u.to_spectral())
}

pub fn find_axis_spectral(s: &SpectralField2D) -> Result<(f64, f64)> {
    let g = *s.grid();
    let norm = coeff_norm(s);
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    let h = 0.5 * g.dx();
    let score = |lam: f64| reflection_defect(s, lam) / norm;
    let mut best = (0.0, score(0.0));
    for i in 1..g.nx {
        let lam = i as f64 * h;
        let v = score(lam);
        if v < best.1 {
            best = (lam, v);
        }
    }
    if best.1 == 0.0 {
        return Ok(best);
    }
    let (lam, v) = golden_min(&score, best.0 - h, best.0 + h, 1e-10);
    let (lam, v) = if v <= best.1 { (lam, v) } else { best };
    let half = 0.5 * g.lx;
    Ok((lam.rem_euclid(half), v))
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Per-mode products `c2 conj(c1)` with their wavenumbers, skipping the
/// `xi = 0` line, which carries no displacement information.
fn cross_spectrum(a: &SpectralField2D, b: &SpectralField2D) -> Vec<(f64, Complex64)> {
    let g = *a.grid();
    let mut out = Vec::new();
    for iy in 0..g.ny {
        for ix in 1..g.nx {
            if ix == g.nyquist_x() {
                continue;
            }
            let idx = g.index(ix, iy);
            let w = b.coeffs()[idx] * a.coeffs()[idx].conj();
            if w != Complex64::new(0.0, 0.0) {
                out.push((g.xi(ix), w));
            }
        }
    }
    out
}

/// Shift `delta` such that `b` is closest to `a(x - delta)`, reduced to
/// `(-p/2, p/2]` where `p = lx / j` and `j` is the lowest x-harmonic present.
pub fn displacement(a: &Field2D, b: &Field2D) -> Result<f64> {
    a.same_grid(b)?;
    a.check_finite()?;
    b.check_finite()?;
    displacement_spectral(&a.to_spectral(), &b.to_spectral())
}

pub fn displacement_spectral(a: &SpectralField2D, b: &SpectralField2D) -> Result<f64> {
    let g = *a.grid();
    let cross = cross_spectrum(a, b);
    let scale = cross.iter().map(|(_, w)| w.norm()).sum::<f64>();
    if scale == 0.0 {
        return Err(Error::SpeedUndefined(
            "fields are x-independent or have no common x-harmonics".into(),
        ));
    }
    // lowest harmonic with a meaningful phase
    let mut start = None;
    for j in 1..g.nx as i64 / 2 {
        let xi = 2.0 * std::f64::consts::PI * j as f64 / g.lx;
        let z: Complex64 = cross
            .iter()
            .filter(|(x, _)| (*x - xi).abs() < 1e-9 * xi)
            .map(|(_, w)| *w)
            .sum();
        if z.norm() > 1e-8 * scale {
            let period = g.lx / j as f64;
            let d = -z.arg() / xi;
            start = Some((d, period));
            break;
        }
    }
    let (d0, period) = match start {
        Some(s) => s,
        None => {
            return Err(Error::SpeedUndefined(
                "no x-harmonic carries a usable phase".into(),
            ))
        }
    };
    // correlation C(d) = sum Re(w e^{i xi d}) and its first two derivatives
    let corr = |d: f64| -> (f64, f64, f64) {
        let (mut c0, mut c1, mut c2) = (0.0, 0.0, 0.0);
        for &(xi, w) in &cross {
            let e = w * Complex64::from_polar(1.0, xi * d);
            c0 += e.re;
            c1 -= xi * e.im;
            c2 -= xi * xi * e.re;
        }
        (c0, c1, c2)
    };
    let h = g.dx();
    let (mut d, _) = golden_min(&|x| -corr(x).0, d0 - h, d0 + h, 1e-9 * h);
    for _ in 0..8 {
        let (_, c1, c2) = corr(d);
        if c2 >= 0.0 {
            break;
        }
        let step = -c1 / c2;
        if !step.is_finite() || step.abs() > h {
            break;
        }
        d += step;
        if step.abs() < 1e-15 * g.lx {
            break;
        }
    }
    let mut d = d.rem_euclid(period);
    if d > 0.5 * period {
        d -= period;
    }
    Ok(d)
}

/// Speed `delta / (t2 - t1)` from the correlation-maximizing shift.
pub fn estimate_speed(s1: &Snapshot, s2: &Snapshot) -> Result<f64> {
    if !(s2.t > s1.t) {
        return Err(Error::InvalidArgument(format!(
            "snapshots must be time-ordered, got t1 = {} and t2 = {}",
            s1.t, s2.t
        )));
    }
    Ok(displacement(&s1.field, &s2.field)? / (s2.t - s1.t))
}

/// Total displacement from the first to the last snapshot, unwrapped by
/// accumulating consecutive displacements.
pub fn unwrapped_displacement(series: &[Snapshot]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("need at least two snapshots".into()));
    }
    let spectra: Vec<SpectralField2D> = series.iter().map(|s| s.field.to_spectral()).collect();
    let mut total = 0.0;
    for w in spectra.windows(2) {
        total += displacement_spectral(&w[0], &w[1])?;
    }
    let g = *series[0].field.grid();
    let direct = displacement_spectral(&spectra[0], spectra.last().unwrap())?;
    let period = harmonic_period(&spectra[0], &g);
    Ok(direct + period * ((total - direct) / period).round())
}

fn harmonic_period(s: &SpectralField2D, g: &Grid2D) -> f64 {
    for ix in 1..g.nx / 2 {
        if (0..g.ny).any(|iy| s.coeffs()[g.index(ix, iy)].norm() > 0.0) {
            return g.lx / ix as f64;
        }
    }
    g.lx
}

/// Axis and defect over a snapshot series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `(t, lambda*)` with lambda unwrapped along the series.
    pub lambda_of_t: Vec<(f64, f64)>,
    pub asymmetry_of_t: Vec<(f64, f64)>,
    /// Least-squares slope of the unwrapped axis.
    pub lambda_dot_estimate: f64,
    /// Quadratic coefficient of a least-squares fit; zero for a true traveling axis.
    pub lambda_curvature: f64,
    pub norm: String,
    pub symmetric_threshold: f64,
    pub symmetric: bool,
}

pub fn symmetry_report(series: &[Snapshot]) -> Result<SymmetryReport> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("empty snapshot series".into()));
    }
    let g = *series[0].field.grid();
    let half = 0.5 * g.lx;
    let spectra: Vec<SpectralField2D> = series.iter().map(|s| s.field.to_spectral()).collect();
    let mut lambda_of_t = Vec::with_capacity(series.len());
    let mut asymmetry_of_t = Vec::with_capacity(series.len());
    let mut prev: Option<f64> = None;
    for (i, (snap, s)) in series.iter().zip(&spectra).enumerate() {
        let (lam, score) = find_axis_spectral(s)?;
        let lam = match prev {
            None => lam,
            Some(p) => {
                let predicted = match displacement_spectral(&spectra[i - 1], s) {
                    Ok(d) => p + d,
                    Err(_) => p,
                };
                lam + half * ((predicted - lam) / half).round()
            }
        };
        prev = Some(lam);
        lambda_of_t.push((snap.t, lam));
        asymmetry_of_t.push((snap.t, score));
    }
    let (slope, curvature) = fit_axis(&lambda_of_t);
    let symmetric = asymmetry_of_t.iter().all(|&(_, a)| a < SYMMETRIC_THRESHOLD);
    Ok(SymmetryReport {
        lambda_of_t,
        asymmetry_of_t,
        lambda_dot_estimate: slope,
        lambda_curvature: curvature,
        norm: "relative L2".into(),
        symmetric_threshold: SYMMETRIC_THRESHOLD,
        symmetric,
    })
}

// Linear slope, and quadratic coefficient when three or more points exist.
fn fit_axis(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (0.0, 0.0);
    }
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let stl: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - lm)).sum();
    let slope = if stt > 0.0 { stl / stt } else { 0.0 };
    if pts.len() < 3 || stt == 0.0 {
        return (slope, 0.0);
    }
    // normal equations for l = c0 + c1 s + c2 s^2 with s = t - tm
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for &(t, l) in pts {
        let s = t - tm;
        let basis = [1.0, s, s * s];
        for i in 0..3 {
            r[i] += basis[i] * l;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let curvature = solve3(m, r).map(|c| c[2]).unwrap_or(0.0);
    (slope, curvature)
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Steady,
    NotSteady,
    Inconclusive,
}

/// Shape error of a series against the translated first snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadinessReport {
    pub speed_estimate: f64,
    pub shape_error_of_t: Vec<(f64, f64)>,
    pub max_shape_error: f64,
    pub verdict: Verdict,
    /// Steady when the maximum error is below this.
    pub steady_below: f64,
    /// Not steady when the maximum error is at or above this; inconclusive in between.
    pub not_steady_from: f64,
}

pub fn steadiness_report(series: &[Snapshot]) -> Result<SteadinessReport> {
    steadiness_report_with(series, STEADY_THRESHOLD)
}

pub fn steadiness_report_with(series: &[Snapshot], threshold: f64) -> Result<SteadinessReport> {
    if series.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "steadiness needs at least 3 snapshots, got {}",
            series.len()
        )));
    }
    let first = &series[0];
    let last = series.last().unwrap();
    if !(last.t > first.t) {
        return Err(Error::InvalidArgument(
            "snapshot times must increase".into(),
        ));
    }
    let c = unwrapped_displacement(series)? / (last.t - first.t);
    let u0 = first.field.to_spectral();
    let n0 = u0.norm_l2();
    if n0 == 0.0 {
        return Err(Error::ZeroField);
    }
    let mut shape_error_of_t = Vec::with_capacity(series.len());
    let mut worst: f64 = 0.0;
    for snap in series {
        let shifted = shift_spectral(&u0, c * (snap.t - first.t));
        let cur = snap.field.to_spectral();
        let diff: f64 = cur
            .coeffs()
            .iter()
            .zip(shifted.coeffs())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let e = diff / coeff_norm(&u0);
        worst = worst.max(e);
        shape_error_of_t.push((snap.t, e));
    }
    let not_steady_from = 10.0 * threshold;
    let verdict = if worst < threshold {
        Verdict::Steady
    } else if worst >= not_steady_from {
        Verdict::NotSteady
    } else {
        Verdict::Inconclusive
    };
    Ok(SteadinessReport {
        speed_estimate: c,
        shape_error_of_t,
        max_shape_error: worst,
        verdict,
        steady_below: threshold,
        not_steady_from,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::{reflect, spectral_shift};

    fn grid() -> Grid2D {
        Grid2D::new(64, 16, 20.0, 6.0).unwrap()
    }

    fn bump(x0: f64) -> Field2D {
        Field2D::from_fn(grid(), |x, y| {
            let d = x - x0;
            (-(d * d)).exp() * (1.0 + 0.3 * (2.0 * PI * y / 6.0).cos())
        })
    }

    #[test]
    fn even_bump_is_symmetric_about_center() {
        assert!(asymmetry(&bump(10.0), 10.0).unwrap() < 1e-12);
    }

    #[test]
    fn sine_is_maximally_asymmetric_about_zero() {
        let g = Grid2D::new(32, 8, 2.0 * PI, 1.0).unwrap();
        let f = Field2D::from_fn(g, |x, _| x.sin());
        assert!((asymmetry(&f, 0.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetry_decreases_towards_the_axis() {
        let u = bump(10.0);
        let dx = grid().dx();
        let mut prev = f64::INFINITY;
        for f in [0.5, 0.25, 0.1, 0.01] {
            let a = asymmetry(&u, 10.0 + f * dx).unwrap();
            assert!(a > 0.0 && a < prev);
            prev = a;
        }
    }

    #[test]
    fn zero_field_is_rejected() {
        assert!(matches!(
            asymmetry(&Field2D::zeros(grid()), 1.0),
            Err(Error::ZeroField)
        ));
        assert!(matches!(
            find_axis(&Field2D::zeros(grid())),
            Err(Error::ZeroField)
        ));
    }

    #[test]
    fn x_independent_field_ties_to_zero() {
        let f = Field2D::from_fn(grid(), |_, y| y.sin() + 2.0);
        let (lam, score) = find_axis(&f).unwrap();
        assert_eq!(lam, 0.0);
        assert_eq!(score, 0.0);
    }

    #[test]
    fn recovers_constructed_axis() {
        let g = grid();
        let base = Field2D::from_fn(g, |x, y| {
            (2.0 * PI * x / g.lx).sin()
                + 0.5 * (4.0 * PI * x / g.lx + 0.3).cos() * y.cos()
                + 0.2 * (6.0 * PI * x / g.lx + 1.0).sin()
        });
        let target = 0.37 * g.lx;
        let sym = base.add(&reflect(&base, target)).scale(0.5);
        let (lam, score) = find_axis(&sym).unwrap();
        assert!((lam - target).abs() < 1e-8, "{lam} vs {target}");
        assert!(score < 1e-10);
    }

    #[test]
    fn constructed_shift_is_recovered() {
        let u = bump(7.0);
        let dx = grid().dx();
        let s1 = Snapshot {
            t: 0.0,
            field: u.clone(),
        };
        let s2 = Snapshot {
            t: 1.0,
            field: spectral_shift(&u, 1.25 * dx),
        };
        assert!((estimate_speed(&s1, &s2).unwrap() - 1.25 * dx).abs() < 1e-8);
        let s3 = Snapshot { t: 2.0, field: u };
        assert!(estimate_speed(&s1, &s3).unwrap().abs() < 1e-12);
    }

    #[test]
    fn speed_of_x_independent_field_is_undefined() {
        let f = Field2D::from_fn(grid(), |_, y| y.cos());
        let a = Snapshot {
            t: 0.0,
            field: f.clone(),
        };
        let b = Snapshot { t: 1.0, field: f };
        assert!(matches!(
            estimate_speed(&a, &b),
            Err(Error::SpeedUndefined(_))
        ));
    }

    #[test]
    fn shifted_copies_are_steady() {
        let u = bump(5.0);
        let c = 0.83;
        let series: Vec<Snapshot> = (0..12)
            .map(|i| {
                let t = i as f64 * 2.0;
                Snapshot {
                    t,
                    field: spectral_shift(&u, c * t),
                }
            })
            .collect();
        let r = steadiness_report(&series).unwrap();
        assert_eq!(r.verdict, Verdict::Steady);
        assert!((r.speed_estimate - c).abs() < 1e-10);
        assert!(r.max_shape_error < 1e-10);
        let s = symmetry_report(&series).unwrap();
        assert!(s.symmetric);
        assert!((s.lambda_dot_estimate - c).abs() < 1e-8);
        assert!(s.lambda_curvature.abs() < 1e-8);
    }

    #[test]
    fn changing_shape_is_not_steady() {
        let series: Vec<Snapshot> = (0..4)
            .map(|i| {
                let t = i as f64;
                let w = 1.0 + 0.2 * t;
                Snapshot {
                    t,
                    field: Field2D::from_fn(grid(), |x, _| (-((x - 10.0) / w).powi(2)).exp()),
                }
            })
            .collect();
        assert_eq!(
            steadiness_report(&series).unwrap().verdict,
            Verdict::NotSteady
        );
    }
}
