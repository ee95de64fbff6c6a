//! Newton-Krylov solver and amplitude continuation for smooth traveling waves.
//!
//! Unknowns are the coefficients `a_jk` of `cos(xi_j x) cos(eta_k y)` inside
//! the 2/3 band, plus the speed `c`. The cosine basis keeps the profile even
//! in x about 0, which removes the translation degeneracy, and even in y. The
//! extra equation pins `g(0, ly/2) = A`. Linear solves use GMRES, right
//! preconditioned by the diagonal symbol of `-c L d/dx + Lin`.

mod gmres;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::model::{flux_pair, tw_residual, tw_residual_spectral, FluxFactors, ModelParams};
use crate::spectral::{Field2D, Grid2D, SpectralField2D};

pub use gmres::{gmres, GmresResult};

/// A converged traveling-wave profile `g` moving with speed `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelingWave {
    pub profile: Field2D,
    pub speed: f64,
    pub model: ModelParams,
    /// Sup-norm of `tw_residual(profile, speed, model)`.
    pub residual_norm: f64,
    /// Pinned value `g(0, ly/2)`.
    pub amplitude: f64,
    pub tol: f64,
}

/// Row of an exported branch table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub c: f64,
    pub residual_norm: f64,
}

impl TravelingWave {
    pub fn branch_point(&self) -> BranchPoint {
        BranchPoint {
            amplitude: self.amplitude,
            c: self.speed,
            residual_norm: self.residual_norm,
        }
    }

    /// Time for the profile to travel one x-period.
    pub fn transit_time(&self) -> f64 {
        self.profile.grid().lx / self.speed.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwOptions {
    pub max_newton: usize,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
}

impl Default for TwOptions {
    fn default() -> Self {
        TwOptions {
            max_newton: 40,
            gmres_restart: 80,
            gmres_max_iter: 1600,
        }
    }
}

/// Even-even cosine basis inside the dealiasing band.
#[derive(Debug, Clone)]
struct Basis {
    grid: Grid2D,
    modes: Vec<(usize, usize)>,
}

impl Basis {
    fn new(grid: Grid2D, transverse: bool) -> Self {
        let ky = if transverse { grid.dealias_y() } else { 0 };
        let mut modes = Vec::new();
        for k in 0..=ky {
            for j in 1..=grid.dealias_x() {
                modes.push((j, k));
            }
        }
        Basis { grid, modes }
    }

    fn len(&self) -> usize {
        self.modes.len()
    }

    fn to_spectral(&self, a: &[f64]) -> SpectralField2D {
        let n = self.grid.len() as f64;
        let mut s = SpectralField2D::zeros(self.grid);
        for (&(j, k), &v) in self.modes.iter().zip(a) {
            let (j, k) = (j as i64, k as i64);
            if k == 0 {
                let c = Complex64::new(0.5 * n * v, 0.0);
                s.set_coeff(j, 0, c);
                s.set_coeff(-j, 0, c);
            } else {
                let c = Complex64::new(0.25 * n * v, 0.0);
                for (sj, sk) in [(j, k), (-j, k), (j, -k), (-j, -k)] {
                    s.set_coeff(sj, sk, c);
                }
            }
        }
        s
    }

    fn project(&self, s: &SpectralField2D) -> Vec<f64> {
        let n = self.grid.len() as f64;
        self.modes
            .iter()
            .map(|&(j, k)| {
                let (j, k) = (j as i64, k as i64);
                let sum = if k == 0 {
                    s.coeff(j, 0) + s.coeff(-j, 0)
                } else {
                    s.coeff(j, k) + s.coeff(-j, k) + s.coeff(j, -k) + s.coeff(-j, -k)
                };
                sum.re / n
            })
            .collect()
    }

    /// Value at `(0, ly/2)`, where `cos(eta_k ly/2) = (-1)^k`.
    fn pin(&self, a: &[f64]) -> f64 {
        self.modes
            .iter()
            .zip(a)
            .map(|(&(_, k), v)| if k % 2 == 0 { *v } else { -*v })
            .sum()
    }

    fn xi(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.grid.lx
    }

    fn eta(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.grid.ly
    }
}

/// Newton system for fixed model and pinned amplitude.
struct System<'a> {
    basis: Basis,
    model: &'a ModelParams,
    gamma: f64,
    amplitude: f64,
}

impl System<'_> {
    fn split<'z>(&self, z: &'z [f64]) -> (&'z [f64], f64) {
        (&z[..self.basis.len()], z[self.basis.len()])
    }

    fn residual(&self, z: &[f64]) -> Result<(Vec<f64>, f64)> {
        let (a, c) = self.split(z);
        let r = tw_residual_spectral(&self.basis.to_spectral(a), c, self.model)?;
        let sup = r.to_field().max_abs();
        let mut out = self.basis.project(&r);
        let pin = self.basis.pin(a) - self.amplitude;
        out.push(pin);
        Ok((out, sup.max(pin.abs())))
    }

    fn diag(&self, c: f64) -> Result<Vec<f64>> {
        self.basis
            .modes
            .iter()
            .map(|&(j, k)| {
                let (xi, eta) = (self.basis.xi(j), self.basis.eta(k));
                Ok(c * xi * xi * (1.0 + xi * xi) + self.model.linear_part_symbol(xi, eta)?)
            })
            .collect()
    }

    /// Exact Frechet derivative at `z` applied to `v`.
    fn jacobian<'s>(&'s self, z: &'s [f64], diag: &'s [f64]) -> impl Fn(&[f64]) -> Vec<f64> + 's {
        let (a, _) = self.split(z);
        let g = FluxFactors::new(&self.basis.to_spectral(a));
        let dc_col: Vec<f64> = self
            .basis
            .modes
            .iter()
            .zip(a)
            .map(|(&(j, _), &aj)| {
                let xi = self.basis.xi(j);
                xi * xi * (1.0 + xi * xi) * aj
            })
            .collect();
        move |v: &[f64]| {
            let (h, dc) = self.split(v);
            let hs = self.basis.to_spectral(h);
            let mut dm = flux_pair(&g, &FluxFactors::new(&hs), self.gamma);
            let grid = self.basis.grid;
            for iy in 0..grid.ny {
                for ix in 0..grid.nx {
                    let idx = grid.index(ix, iy);
                    dm.coeffs_mut()[idx] *= Complex64::new(0.0, 2.0 * grid.xi(ix));
                }
            }
            let mut out = self.basis.project(&dm);
            for (i, o) in out.iter_mut().enumerate() {
                *o += diag[i] * h[i] + dc * dc_col[i];
            }
            out.push(self.basis.pin(h));
            out
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves for a traveling wave near `seed` with initial speed guess `c0`.
///
/// The pinned amplitude is the seed's value at `(0, ly/2)`. The seed must be
/// admissible and even in x about 0; it is projected onto the even-even
/// cosine basis, with transverse modes only when the seed varies in y.
pub fn solve_tw(seed: &Field2D, c0: f64, p: &ModelParams, tol: f64) -> Result<TravelingWave> {
    solve_tw_with(seed, c0, p, tol, &TwOptions::default())
}

pub fn solve_tw_with(
    seed: &Field2D,
    c0: f64,
    p: &ModelParams,
    tol: f64,
    opts: &TwOptions,
) -> Result<TravelingWave> {
    seed.check_finite()?;
    seed.check_admissible()?;
    p.validate()?;
    let grid = *seed.grid();
    let s = seed.to_spectral();
    if s.norm_l2() == 0.0 {
        return Err(Error::Degenerate(
            "zero seed with zero amplitude is the trivial solution for every c".into(),
        ));
    }
    if analysis::asymmetry_spectral(&s, 0.0)? > 1e-8 {
        return Err(Error::InvalidArgument(
            "seed must be even in x about 0".into(),
        ));
    }
    let transverse = (0..grid.ny).filter(|&iy| iy != 0).any(|iy| {
        (0..grid.nx).any(|ix| {
            s.coeffs()[grid.index(ix, iy)].norm() > 1e-12 * grid.len() as f64 * seed.max_abs()
        })
    });
    let basis = Basis::new(grid, transverse);
    let a0 = basis.project(&s);
    let back = basis.to_spectral(&a0).to_field();
    if back.max_abs_diff(seed) > 1e-8 * seed.max_abs() {
        return Err(Error::InvalidArgument(
            "seed is not even in y about 0 or has energy outside the 2/3 band".into(),
        ));
    }
    let amplitude = basis.pin(&a0);
    solve_pinned(basis, a0, c0, amplitude, p, tol, opts)
}

fn solve_pinned(
    basis: Basis,
    a0: Vec<f64>,
    c0: f64,
    amplitude: f64,
    p: &ModelParams,
    tol: f64,
    opts: &TwOptions,
) -> Result<TravelingWave> {
    if amplitude == 0.0 {
        return Err(Error::Degenerate(
            "pinned amplitude A = 0 admits the trivial solution for every c".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let sys = System {
        basis,
        model: p,
        gamma: p.flux_gamma()?,
        amplitude,
    };
    let mut z = a0;
    z.push(c0);
    let (mut f, mut sup) = sys.residual(&z)?;
    let mut fnorm = norm2(&f);
    let mut it = 0;
    while sup > tol {
        if it == opts.max_newton {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: sup,
            });
        }
        it += 1;
        let c = z[sys.basis.len()];
        let diag = sys.diag(c)?;
        let dmax = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let floor = 1e-8 * dmax.max(1e-300);
        let pre: Vec<f64> = diag
            .iter()
            .map(|&d| {
                if d.abs() < floor {
                    floor.copysign(d)
                } else {
                    d
                }
            })
            .collect();
        let precond = |v: &[f64]| -> Vec<f64> {
            let mut out: Vec<f64> = v[..pre.len()]
                .iter()
                .zip(&pre)
                .map(|(x, d)| x / d)
                .collect();
            out.push(v[pre.len()]);
            out
        };
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let rel = (1e-3f64).min(fnorm).max(1e-13);
        let lin = {
            let jac = sys.jacobian(&z, &diag);
            gmres(
                &jac,
                precond,
                &rhs,
                opts.gmres_restart,
                rel,
                opts.gmres_max_iter,
            )
        };
        if !lin.converged && lin.residual > 0.5 * fnorm {
            return Err(Error::SingularJacobian { amplitude });
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = z
                .iter()
                .zip(&lin.x)
                .map(|(zi, di)| zi + lambda * di)
                .collect();
            let (ft, st) = sys.residual(&trial)?;
            let nt = norm2(&ft);
            if nt.is_finite() && (nt < (1.0 - 1e-4 * lambda) * fnorm || st <= tol) {
                z = trial;
                f = ft;
                sup = st;
                fnorm = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: sup,
            });
        }
        log::debug!("newton {it}: sup residual {sup:e}, step {lambda}");
    }
    let (a, c) = sys.split(&z);
    let profile = sys.basis.to_spectral(a).to_field();
    let residual_norm = tw_residual(&profile, c, p)?.max_abs();
    if residual_norm > tol {
        return Err(Error::NoConvergence {
            iterations: it,
            residual: residual_norm,
        });
    }
    Ok(TravelingWave {
        profile,
        speed: c,
        model: *p,
        residual_norm,
        amplitude,
        tol,
    })
}

/// Result of [`continue_branch`]; `stopped` carries the failure that ended
/// the branch early, if any.
#[derive(Debug)]
pub struct Branch {
    pub waves: Vec<TravelingWave>,
    pub stopped: Option<Error>,
}

impl Branch {
    pub fn table(&self) -> Vec<BranchPoint> {
        self.waves.iter().map(|w| w.branch_point()).collect()
    }
}

/// `n` continuation steps of size `d_amp` in the pinned amplitude, each
/// predicted by secant extrapolation (scaling for the first step) and
/// corrected by Newton to the start's tolerance.
pub fn continue_branch(start: &TravelingWave, d_amp: f64, n: usize) -> Branch {
    continue_branch_with(start, d_amp, n, &TwOptions::default())
}

pub fn continue_branch_with(
    start: &TravelingWave,
    d_amp: f64,
    n: usize,
    opts: &TwOptions,
) -> Branch {
    let mut waves = vec![start.clone()];
    let grid = *start.profile.grid();
    let s0 = start.profile.to_spectral();
    let transverse =
        (1..grid.ny).any(|iy| (0..grid.nx).any(|ix| s0.coeffs()[grid.index(ix, iy)].norm() > 0.0));
    let basis = Basis::new(grid, transverse);
    for _ in 0..n {
        let last = waves.last().unwrap();
        let target = last.amplitude + d_amp;
        let a_last = basis.project(&last.profile.to_spectral());
        let (a0, c0) = if waves.len() >= 2 {
            let prev = &waves[waves.len() - 2];
            let a_prev = basis.project(&prev.profile.to_spectral());
            let s = d_amp / (last.amplitude - prev.amplitude);
            let a = a_last
                .iter()
                .zip(&a_prev)
                .map(|(l, p)| l + s * (l - p))
                .collect();
            (a, last.speed + s * (last.speed - prev.speed))
        } else {
            let s = target / last.amplitude;
            (a_last.iter().map(|v| v * s).collect(), last.speed)
        };
        match solve_pinned(basis.clone(), a0, c0, target, &start.model, start.tol, opts) {
            Ok(w) => waves.push(w),
            Err(e) => {
                return Branch {
                    waves,
                    stopped: Some(e),
                }
            }
        }
    }
    Branch {
        waves,
        stopped: None,
    }
}

/// Linear speed of the first x-mode with transverse index `k`, the
/// bifurcation point of the branch.
pub fn linear_speed(grid: &Grid2D, p: &ModelParams, k: usize) -> Result<f64> {
    let xi = grid.xi1();
    let eta = 2.0 * std::f64::consts::PI * k as f64 / grid.ly;
    Ok(crate::model::linear_symbol(p, xi, eta)? / xi)
}

/// Small-amplitude seed `A cos(xi_1 x)` (or `-A cos(xi_1 x) cos(eta_k y)` for
/// `k > 0`, so that `g(0, ly/2) = A`) with its linear speed.
pub fn linear_seed(
    grid: &Grid2D,
    p: &ModelParams,
    amplitude: f64,
    k: usize,
) -> Result<(Field2D, f64)> {
    let xi = grid.xi1();
    let eta = 2.0 * std::f64::consts::PI * k as f64 / grid.ly;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let f = Field2D::from_fn(*grid, |x, y| {
        sign * amplitude * (xi * x).cos() * (eta * y).cos()
    });
    Ok((f, linear_speed(grid, p, k)?))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::reflect;

    const CHKP: ModelParams = ModelParams::ChkpNormalized { kappa: 1.0 };

    fn grid() -> Grid2D {
        Grid2D::new(64, 8, 8.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_seed_is_degenerate() {
        let z = Field2D::zeros(grid());
        assert!(matches!(
            solve_tw(&z, 1.0, &CHKP, 1e-10),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn odd_seed_is_rejected() {
        let f = Field2D::from_fn(grid(), |x, _| (x / 4.0).sin());
        assert!(matches!(
            solve_tw(&f, 1.0, &CHKP, 1e-10),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn basis_round_trip_and_pin() {
        let b = Basis::new(grid(), true);
        let a: Vec<f64> = (0..b.len())
            .map(|i| ((i * 7 % 11) as f64 - 5.0) * 1e-2)
            .collect();
        let s = b.to_spectral(&a);
        let back = b.project(&s);
        for (x, y) in a.iter().zip(&back) {
            assert!((x - y).abs() < 1e-15);
        }
        let f = s.to_field();
        let g = grid();
        let at = f.get(0, g.ny / 2);
        assert!((at - b.pin(&a)).abs() < 1e-13);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = grid();
        let b = Basis::new(g, true);
        let sys = System {
            basis: b.clone(),
            model: &CHKP,
            gamma: 1.0,
            amplitude: 0.1,
        };
        let mut z: Vec<f64> = (0..b.len()).map(|i| 0.05 / (1.0 + i as f64)).collect();
        z.push(0.8);
        let v: Vec<f64> = (0..=b.len())
            .map(|i| ((i % 5) as f64 - 2.0) * 0.1)
            .collect();
        let diag = sys.diag(0.8).unwrap();
        let jv = sys.jacobian(&z, &diag)(&v);
        let h = 1e-6;
        let zp: Vec<f64> = z.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let zm: Vec<f64> = z.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let (fp, _) = sys.residual(&zp).unwrap();
        let (fm, _) = sys.residual(&zm).unwrap();
        for i in 0..jv.len() {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            assert!(
                (fd - jv[i]).abs() < 1e-7 * (1.0 + jv[i].abs()),
                "{i}: {fd} vs {}",
                jv[i]
            );
        }
    }

    #[test]
    fn small_amplitude_speed_approaches_linear_speed() {
        let g = grid();
        let c_lin = linear_speed(&g, &CHKP, 0).unwrap();
        let mut prev = f64::INFINITY;
        for amp in [1e-2, 1e-3, 1e-4] {
            let (seed, c0) = linear_seed(&g, &CHKP, amp, 0).unwrap();
            let tw = solve_tw(&seed, c0, &CHKP, 1e-13).unwrap();
            let gap = (tw.speed - c_lin).abs();
            assert!(gap < prev);
            assert!(gap < 10.0 * amp);
            prev = gap;
            let shape = seed.max_abs_diff(&tw.profile) / amp;
            assert!(shape < 10.0 * amp);
        }
    }

    #[test]
    fn converged_wave_is_even_and_within_tolerance() {
        let g = grid();
        let (seed, c0) = linear_seed(&g, &CHKP, 0.2, 0).unwrap();
        let tw = solve_tw(&seed, c0, &CHKP, 1e-11).unwrap();
        assert!(tw.residual_norm <= 1e-11);
        assert!(reflect(&tw.profile, 0.0).max_abs_diff(&tw.profile) < 1e-11);
        assert!((tw.profile.get(0, g.ny / 2) - 0.2).abs() < 1e-11);
    }

    #[test]
    fn branch_zero_steps_and_reversal() {
        let g = grid();
        let (seed, c0) = linear_seed(&g, &CHKP, 0.1, 0).unwrap();
        let tw = solve_tw(&seed, c0, &CHKP, 1e-11).unwrap();
        let b0 = continue_branch(&tw, 0.05, 0);
        assert_eq!(b0.waves.len(), 1);
        let fwd = continue_branch(&tw, 0.05, 3);
        assert!(fwd.stopped.is_none());
        let back = continue_branch(fwd.waves.last().unwrap(), -0.05, 3);
        let end = back.waves.last().unwrap();
        assert!((end.speed - tw.speed).abs() < 1e-9);
        assert!(end.profile.max_abs_diff(&tw.profile) < 1e-9);
    }
}
