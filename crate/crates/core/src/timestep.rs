//! Integrating-factor RK4 time stepping.
//!
//! In Fourier space the models read `u_t = Lambda u + N(u)` with the linear
//! multiplier `Lambda = -i omega(xi, eta)` and the nonlinear part
//! `N = -M / (1 + xi^2)` built from the dealiased flux. The linear part is
//! integrated exactly by phase factors (Lawson's scheme), so only the
//! nonlinearity limits the step. Nyquist lines are discarded, the zero x-mode
//! is re-projected after every step.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::model::{flux_spectral, ModelParams};
use crate::spectral::{
    deriv_spectral, random::random_bandlimited, Field2D, Grid2D, SpectralField2D,
};

/// One time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field2D,
}

/// Precomputed multipliers for a fixed grid, model and step.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid2D,
    gamma: f64,
    dt: f64,
    exp_full: Vec<Complex64>,
    exp_half: Vec<Complex64>,
    nl_mult: Vec<f64>,
    keep: Vec<bool>,
}

impl Stepper {
    pub fn new(grid: Grid2D, p: &ModelParams, dt: f64) -> Result<Self> {
        grid.validate()?;
        p.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt = {dt} must be positive"
            )));
        }
        let gamma = p.flux_gamma()?;
        let n = grid.len();
        let mut exp_full = vec![Complex64::new(0.0, 0.0); n];
        let mut exp_half = vec![Complex64::new(0.0, 0.0); n];
        let mut nl_mult = vec![0.0; n];
        let mut keep = vec![false; n];
        for iy in 0..grid.ny {
            let eta = grid.eta(iy);
            for ix in 0..grid.nx {
                let idx = grid.index(ix, iy);
                let xi = grid.xi(ix);
                if ix == 0 || ix == grid.nyquist_x() || iy == grid.nyquist_y() {
                    continue;
                }
                keep[idx] = true;
                let omega = crate::model::linear_symbol(p, xi, eta)?;
                exp_full[idx] = Complex64::from_polar(1.0, -omega * dt);
                exp_half[idx] = Complex64::from_polar(1.0, -0.5 * omega * dt);
                nl_mult[idx] = -1.0 / (1.0 + xi * xi);
            }
        }
        Ok(Stepper {
            grid,
            gamma,
            dt,
            exp_full,
            exp_half,
            nl_mult,
            keep,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Projects onto the evolved subspace: zero x-mode and Nyquist lines removed.
    pub fn project(&self, s: &mut SpectralField2D) {
        for (c, &k) in s.coeffs_mut().iter_mut().zip(&self.keep) {
            if !k {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn nonlinear(&self, s: &SpectralField2D) -> SpectralField2D {
        let mut m = flux_spectral(s, self.gamma);
        for (c, &w) in m.coeffs_mut().iter_mut().zip(&self.nl_mult) {
            *c *= w;
        }
        m
    }

    /// One step in spectral space.
    pub fn advance(&self, u: &SpectralField2D) -> SpectralField2D {
        let h = self.dt;
        let combine = |a: &SpectralField2D, f: &dyn Fn(usize, Complex64) -> Complex64| {
            let mut out = a.clone();
            for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
                *c = f(i, *c);
            }
            out
        };
        let (e, eh) = (&self.exp_full, &self.exp_half);
        let k1 = self.nonlinear(u);
        let a2 = combine(u, &|i, c| eh[i] * (c + 0.5 * h * k1.coeffs()[i]));
        let k2 = self.nonlinear(&a2);
        let a3 = combine(u, &|i, c| eh[i] * c + 0.5 * h * k2.coeffs()[i]);
        let k3 = self.nonlinear(&a3);
        let a4 = combine(u, &|i, c| e[i] * c + h * eh[i] * k3.coeffs()[i]);
        let k4 = self.nonlinear(&a4);
        let mut out = combine(u, &|i, c| {
            e[i] * c
                + h / 6.0
                    * (e[i] * k1.coeffs()[i]
                        + 2.0 * eh[i] * (k2.coeffs()[i] + k3.coeffs()[i])
                        + k4.coeffs()[i])
        });
        self.project(&mut out);
        out
    }
}

/// Advective step bound `0.5 dx / max|u|` (infinite for the zero field).
pub fn stability_bound(u: &Field2D) -> f64 {
    let m = u.max_abs();
    if m == 0.0 {
        f64::INFINITY
    } else {
        0.5 * u.grid().dx() / m
    }
}

/// A single IF-RK4 step. Fails with [`Error::BlowUp`] carrying `dt` when the
/// result is not finite.
pub fn step(u: &Field2D, dt: f64, p: &ModelParams) -> Result<Field2D> {
    u.check_finite()?;
    u.check_admissible()?;
    let st = Stepper::new(*u.grid(), p, dt)?;
    let mut s = u.to_spectral();
    st.project(&mut s);
    let out = st.advance(&s).to_field();
    if !out.is_finite() {
        return Err(Error::BlowUp { t: dt });
    }
    Ok(out)
}

/// Named initial-data generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    /// `amplitude cos(xi_j x + eta_k y + phase)`.
    Mode {
        j: i64,
        k: i64,
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Gaussian bump with its row means removed; even in x about `x0`.
    Gaussian {
        x0: f64,
        y0: f64,
        sigma_x: f64,
        sigma_y: f64,
        amplitude: f64,
    },
    /// Random band-limited admissible field drawn from the run seed.
    Random {
        max_j: usize,
        max_k: usize,
        amplitude: f64,
    },
    /// Snapshot file written by this crate (sidecar JSON path).
    File {
        path: std::path::PathBuf,
    },
}

impl InitialSpec {
    pub fn build(&self, grid: Grid2D, seed: u64) -> Result<Field2D> {
        let f = match self {
            InitialSpec::Zero => Field2D::zeros(grid),
            InitialSpec::Mode {
                j,
                k,
                amplitude,
                phase,
            } => {
                if *j == 0 {
                    return Err(Error::InvalidArgument(
                        "mode with j = 0 is not admissible".into(),
                    ));
                }
                let xi = 2.0 * std::f64::consts::PI * *j as f64 / grid.lx;
                let eta = 2.0 * std::f64::consts::PI * *k as f64 / grid.ly;
                Field2D::from_fn(grid, |x, y| amplitude * (xi * x + eta * y + phase).cos())
            }
            InitialSpec::Gaussian {
                x0,
                y0,
                sigma_x,
                sigma_y,
                amplitude,
            } => {
                let mut f = Field2D::from_fn(grid, |x, y| {
                    let dx = periodic_offset(x - x0, grid.lx) / sigma_x;
                    let dy = periodic_offset(y - y0, grid.ly) / sigma_y;
                    amplitude * (-0.5 * (dx * dx + dy * dy)).exp()
                });
                f.project_admissible();
                f
            }
            InitialSpec::Random {
                max_j,
                max_k,
                amplitude,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                random_bandlimited(grid, *max_j, *max_k, *amplitude, true, &mut rng)
            }
            InitialSpec::File { path } => {
                let (g, snap) = crate::io::read_snapshot(path)?;
                if g != grid {
                    return Err(Error::InvalidArgument(format!(
                        "snapshot {} has grid {g:?}, config asks for {grid:?}",
                        path.display()
                    )));
                }
                snap.field
            }
        };
        f.check_finite()?;
        Ok(f)
    }
}

fn periodic_offset(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

/// Everything needed for a reproducible run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub grid: Grid2D,
    pub t_end: f64,
    pub dt: f64,
    pub snapshot_every: usize,
    pub initial: InitialSpec,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    /// Semantic checks; failures name the offending key.
    pub fn validate(&self) -> Result<()> {
        let at = |path: &str, e: Error| Error::Config {
            path: path.into(),
            message: e.to_string(),
        };
        let bad = |path: &str, message: String| Error::Config {
            path: path.into(),
            message,
        };
        self.grid.validate().map_err(|e| at("grid", e))?;
        self.model.validate().map_err(|e| at("model", e))?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(bad("dt", format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(bad(
                "t_end",
                format!("t_end = {} must be nonnegative", self.t_end),
            ));
        }
        if self.t_end > 0.0 && self.t_end < self.dt {
            return Err(bad("t_end", "t_end must be at least dt".into()));
        }
        if self.snapshot_every == 0 {
            return Err(bad(
                "snapshot_every",
                "snapshot_every must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps; `dt` is shrunk so the last step lands on `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// One diagnostics row, written at every snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub l2_norm: f64,
    pub h1_seminorm: f64,
    pub max_abs: f64,
    pub xmean_drift: f64,
    pub asymmetry_score: f64,
    pub axis_lambda: f64,
    pub speed_estimate: f64,
    pub shape_error: f64,
    pub blowup: bool,
}

impl DiagnosticsRow {
    pub fn blowup(t: f64) -> Self {
        DiagnosticsRow {
            t,
            l2_norm: 0.0,
            h1_seminorm: 0.0,
            max_abs: 0.0,
            xmean_drift: 0.0,
            asymmetry_score: 0.0,
            axis_lambda: 0.0,
            speed_estimate: 0.0,
            shape_error: 0.0,
            blowup: true,
        }
    }
}

/// Tracks the observables that compare a snapshot with the initial one.
struct Tracker {
    initial: SpectralField2D,
    initial_norm: f64,
    prev: SpectralField2D,
    displacement: f64,
    t0: f64,
}

impl Tracker {
    fn row(&mut self, t: f64, u: &Field2D, s: &SpectralField2D) -> DiagnosticsRow {
        let ux = deriv_spectral(s, 1, 0).norm_l2();
        let uy = deriv_spectral(s, 0, 1).norm_l2();
        let (axis_lambda, asymmetry_score) = analysis::find_axis_spectral(s).unwrap_or((0.0, 0.0));
        let mut speed_estimate = 0.0;
        let mut shape_error = 0.0;
        if t > self.t0 {
            if let Ok(d) = analysis::displacement_spectral(&self.prev, s) {
                self.displacement += d;
                speed_estimate = self.displacement / (t - self.t0);
            }
            if self.initial_norm > 0.0 {
                let shifted = crate::spectral::shift_spectral(&self.initial, self.displacement);
                let diff = s
                    .coeffs()
                    .iter()
                    .zip(shifted.coeffs())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                shape_error = diff / self.initial_norm;
            }
        }
        self.prev = s.clone();
        DiagnosticsRow {
            t,
            l2_norm: s.norm_l2(),
            h1_seminorm: (ux * ux + uy * uy).sqrt(),
            max_abs: u.max_abs(),
            xmean_drift: u.max_row_mean(),
            asymmetry_score,
            axis_lambda,
            speed_estimate,
            shape_error,
            blowup: false,
        }
    }
}

/// Runs `cfg`, handing every snapshot and its diagnostics row to `sink` as
/// soon as it exists, so partial output survives a blow-up.
pub fn simulate_with(
    cfg: &RunConfig,
    mut sink: impl FnMut(&Snapshot, &DiagnosticsRow) -> Result<()>,
) -> Result<()> {
    cfg.validate()?;
    let u0 = cfg.initial.build(cfg.grid, cfg.seed)?;
    u0.check_admissible()?;
    let bound = stability_bound(&u0);
    let (n, dt) = cfg.steps();
    if dt > bound {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} exceeds the advective bound 0.5 dx / max|u| = {bound}"
        )));
    }
    let st = Stepper::new(cfg.grid, &cfg.model, dt)?;
    let mut s = u0.to_spectral();
    st.project(&mut s);
    let u = s.to_field();
    let norm0 = s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut tracker = Tracker {
        initial: s.clone(),
        initial_norm: norm0,
        prev: s.clone(),
        displacement: 0.0,
        t0: 0.0,
    };
    let row = tracker.row(0.0, &u, &s);
    sink(&Snapshot { t: 0.0, field: u }, &row)?;
    for i in 1..=n {
        s = st.advance(&s);
        let t = if i == n { cfg.t_end } else { i as f64 * dt };
        if s.coeffs()
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::BlowUp { t });
        }
        if i % cfg.snapshot_every == 0 || i == n {
            let u = s.to_field();
            if !u.is_finite() {
                return Err(Error::BlowUp { t });
            }
            let row = tracker.row(t, &u, &s);
            sink(&Snapshot { t, field: u }, &row)?;
        }
    }
    Ok(())
}

/// In-memory variant of [`simulate_with`].
pub fn simulate(cfg: &RunConfig) -> Result<(Vec<Snapshot>, Vec<DiagnosticsRow>)> {
    let mut snaps = Vec::new();
    let mut rows = Vec::new();
    simulate_with(cfg, |s, r| {
        snaps.push(s.clone());
        rows.push(*r);
        Ok(())
    })?;
    Ok((snaps, rows))
}

/// Evolves a field for `t_end` with a fixed step, returning the final state only.
pub fn evolve(u: &Field2D, p: &ModelParams, t_end: f64, dt: f64) -> Result<Field2D> {
    u.check_admissible()?;
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let st = Stepper::new(*u.grid(), p, t_end / n as f64)?;
    let mut s = u.to_spectral();
    st.project(&mut s);
    for i in 1..=n {
        s = st.advance(&s);
        if s.coeffs()
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::BlowUp {
                t: i as f64 * st.dt(),
            });
        }
    }
    Ok(s.to_field())
}
