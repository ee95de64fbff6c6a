//! Scale map between the physical CH-KP equation
//!
//! ```text
//! U_XT - 5/12 g U_XXXT + U_XX + 3/2 e (U U_X)_X - g/4 U_XXXX
//!     - 5/24 g e (2 U_X U_XX + U U_XXX)_X + e^3/2 U_YY = 0
//! ```
//!
//! and the normalized form solved everywhere else in the crate. With
//! `a = sqrt(5g/12)`, `d = sqrt(e^3 a^2 / 2)` and drift `s = 2/5 + kappa/2`,
//!
//! ```text
//! T = a t,  X = a (x + s t),  Y = d y,  U = (2/e) u + (kappa - 2/5)/e.
//! ```

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{spectral_shift, Field2D, Grid2D, Interpolant};
use crate::timestep::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleMap {
    pub epsilon: f64,
    pub gamma_phys: f64,
    pub kappa: f64,
}

impl ScaleMap {
    pub fn new(epsilon: f64, gamma_phys: f64, kappa: f64) -> Result<Self> {
        let m = ScaleMap {
            epsilon,
            gamma_phys,
            kappa,
        };
        m.validate()?;
        Ok(m)
    }

    /// From `chkp_physical` parameters and the chosen normalized `kappa`.
    pub fn from_model(p: &ModelParams, kappa: f64) -> Result<Self> {
        match *p {
            ModelParams::ChkpPhysical {
                epsilon,
                gamma_phys,
            } => {
                p.validate()?;
                ScaleMap::new(epsilon, gamma_phys, kappa)
            }
            _ => Err(Error::WrongModel(p.name())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.gamma_phys > 0.0 && self.gamma_phys.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma_phys must be positive, got {}",
                self.gamma_phys
            )));
        }
        if !self.kappa.is_finite() {
            return Err(Error::InvalidArgument("kappa must be finite".into()));
        }
        Ok(())
    }

    /// Stretch of both `t` and `x`.
    pub fn xt_scale(&self) -> f64 {
        (5.0 * self.gamma_phys / 12.0).sqrt()
    }

    pub fn y_scale(&self) -> f64 {
        (self.epsilon.powi(3) * self.xt_scale().powi(2) / 2.0).sqrt()
    }

    /// Galilean drift in normalized units.
    pub fn drift(&self) -> f64 {
        0.4 + 0.5 * self.kappa
    }

    pub fn amplitude(&self) -> f64 {
        2.0 / self.epsilon
    }

    pub fn offset(&self) -> f64 {
        (self.kappa - 0.4) / self.epsilon
    }

    pub fn physical_point(&self, t: f64, x: f64, y: f64) -> (f64, f64, f64) {
        let a = self.xt_scale();
        (a * t, a * (x + self.drift() * t), self.y_scale() * y)
    }

    pub fn normalized_point(&self, t_phys: f64, x_phys: f64, y_phys: f64) -> (f64, f64, f64) {
        let a = self.xt_scale();
        let t = t_phys / a;
        (t, x_phys / a - self.drift() * t, y_phys / self.y_scale())
    }

    pub fn physical_value(&self, u: f64) -> f64 {
        self.amplitude() * u + self.offset()
    }

    pub fn normalized_value(&self, u_phys: f64) -> f64 {
        (u_phys - self.offset()) / self.amplitude()
    }

    /// Speed in physical units of a profile moving with `c` in normalized units.
    pub fn physical_speed(&self, c: f64) -> f64 {
        c + self.drift()
    }

    pub fn normalized_speed(&self, c_phys: f64) -> f64 {
        c_phys - self.drift()
    }

    pub fn normalized_model(&self) -> ModelParams {
        ModelParams::ChkpNormalized { kappa: self.kappa }
    }

    pub fn physical_grid(&self, g: &Grid2D) -> Result<Grid2D> {
        Grid2D::new(g.nx, g.ny, g.lx * self.xt_scale(), g.ly * self.y_scale())
    }

    pub fn normalized_grid(&self, g: &Grid2D) -> Result<Grid2D> {
        Grid2D::new(g.nx, g.ny, g.lx / self.xt_scale(), g.ly / self.y_scale())
    }
}

/// Time series of periodic snapshots on one grid, evaluable off-grid by
/// trigonometric interpolation in space and cubic Lagrange interpolation in
/// time.
#[derive(Debug)]
pub struct SampledField {
    grid: Grid2D,
    frames: Vec<Snapshot>,
    interp: Vec<OnceLock<Interpolant>>,
}

impl Clone for SampledField {
    fn clone(&self) -> Self {
        SampledField::new(self.frames.clone()).expect("validated on construction")
    }
}

impl SampledField {
    pub fn new(frames: Vec<Snapshot>) -> Result<Self> {
        let first = frames.first().ok_or_else(|| {
            Error::InvalidArgument("sampled field needs at least one frame".into())
        })?;
        let grid = *first.field.grid();
        for w in frames.windows(2) {
            w[1].field.same_grid(&w[0].field)?;
            if !(w[1].t > w[0].t) {
                return Err(Error::InvalidArgument(format!(
                    "frame times must increase strictly ({} then {})",
                    w[0].t, w[1].t
                )));
            }
        }
        for f in &frames {
            f.field.check_finite()?;
        }
        let interp = frames.iter().map(|_| OnceLock::new()).collect();
        Ok(SampledField {
            grid,
            frames,
            interp,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn frames(&self) -> &[Snapshot] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Snapshot> {
        self.frames
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.frames[0].t, self.frames[self.frames.len() - 1].t)
    }

    fn interpolant(&self, i: usize) -> &Interpolant {
        self.interp[i].get_or_init(|| Interpolant::new(&self.frames[i].field.to_spectral(), 0.0))
    }

    /// Value at an arbitrary point; `t` must lie within the sampled times.
    pub fn eval(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        let (t0, t1) = self.t_range();
        let slack = 1e-12 * (1.0 + t0.abs().max(t1.abs()));
        if !(t >= t0 - slack && t <= t1 + slack) {
            return Err(Error::OutOfDomain(format!(
                "t = {t} outside the sampled interval [{t0}, {t1}]"
            )));
        }
        let n = self.frames.len();
        let k = self.frames.partition_point(|f| f.t <= t);
        let width = n.min(4);
        let start = k.saturating_sub(width / 2).min(n - width);
        let idx: Vec<usize> = (start..start + width).collect();
        let mut v = 0.0;
        for &i in &idx {
            let mut w = 1.0;
            for &j in &idx {
                if j != i {
                    w *= (t - self.frames[j].t) / (self.frames[i].t - self.frames[j].t);
                }
            }
            if w != 0.0 {
                v += w * self.interpolant(i).eval(x, y).0;
            }
        }
        Ok(v)
    }
}

fn map_frames(
    src: &SampledField,
    grid: Grid2D,
    time: impl Fn(f64) -> f64,
    shift: impl Fn(f64) -> f64,
    value: impl Fn(f64) -> f64,
) -> Result<SampledField> {
    let frames = src
        .frames()
        .iter()
        .map(|s| {
            let shifted = spectral_shift(&s.field, shift(s.t));
            let values = shifted.values().iter().map(|&v| value(v)).collect();
            Ok(Snapshot {
                t: time(s.t),
                field: Field2D::from_values(grid, values)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SampledField::new(frames)
}

/// Physical samples to normalized ones. Each frame is moved by the drift
/// with an exact spectral shift, so no time interpolation is involved.
pub fn to_normalized(u_phys: &SampledField, m: &ScaleMap) -> Result<SampledField> {
    m.validate()?;
    let a = m.xt_scale();
    let grid = m.normalized_grid(u_phys.grid())?;
    let s = m.drift();
    // u(t, x) = U(a t, a x + a s t): a shift by -a s t = -s T physical units
    map_frames(
        u_phys,
        grid,
        |t| t / a,
        |t_phys| -s * t_phys,
        |v| m.normalized_value(v),
    )
}

/// Normalized samples to physical ones.
pub fn from_normalized(u_norm: &SampledField, m: &ScaleMap) -> Result<SampledField> {
    m.validate()?;
    let a = m.xt_scale();
    let grid = m.physical_grid(u_norm.grid())?;
    let s = m.drift();
    // U(T, X) = A u(T/a, X/a - s T/a) + B: shift by s t, then relabel
    map_frames(u_norm, grid, |t| a * t, |t| s * t, |v| m.physical_value(v))
}

/// Finite-difference weights (Fornberg): `w[k][i]` approximates the `k`-th
/// derivative at `z` from samples at `nodes[i]`, for `k <= m`.
pub fn fd_weights(z: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Half-width of the periodic spatial stencils: order 10 for the first two
/// derivatives, 8 for the third and fourth.
const SPACE_HALF: usize = 5;
/// Half-width of the time stencil: order 6.
const TIME_HALF: usize = 3;

/// Periodic finite-difference derivative along x (`axis = 0`) or y.
fn fd_periodic(f: &Field2D, order: usize, axis: usize) -> Field2D {
    let g = *f.grid();
    let h = if axis == 0 { g.dx() } else { g.dy() };
    let nodes: Vec<f64> = (0..=2 * SPACE_HALF)
        .map(|i| (i as f64 - SPACE_HALF as f64) * h)
        .collect();
    let w = fd_weights(0.0, &nodes, order).swap_remove(order);
    let mut out = Field2D::zeros(g);
    let (nx, ny) = (g.nx as i64, g.ny as i64);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let mut s = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let o = k as i64 - SPACE_HALF as i64;
                let v = if axis == 0 {
                    f.get((ix as i64 + o).rem_euclid(nx) as usize, iy)
                } else {
                    f.get(ix, (iy as i64 + o).rem_euclid(ny) as usize)
                };
                s += wk * v;
            }
            out.values_mut()[g.index(ix, iy)] = s;
        }
    }
    out
}

/// Pointwise residual of the physical equation at frame `frame` of a
/// physical-variable series, using only finite differences: periodic
/// stencils in space and a seven-frame stencil in time.
pub fn physical_residual(u_phys: &SampledField, m: &ScaleMap, frame: usize) -> Result<Field2D> {
    m.validate()?;
    let frames = u_phys.frames();
    if frame < TIME_HALF || frame + TIME_HALF >= frames.len() {
        return Err(Error::OutOfDomain(format!(
            "frame {frame} needs {TIME_HALF} neighbours on each side; frames 0..{} available",
            frames.len()
        )));
    }
    let g = *u_phys.grid();
    let times: Vec<f64> = frames[frame - TIME_HALF..=frame + TIME_HALF]
        .iter()
        .map(|f| f.t)
        .collect();
    let wt = fd_weights(frames[frame].t, &times, 1).swap_remove(1);
    let mut ut = Field2D::zeros(g);
    for (w, f) in wt
        .iter()
        .zip(&frames[frame - TIME_HALF..=frame + TIME_HALF])
    {
        for (o, v) in ut.values_mut().iter_mut().zip(f.field.values()) {
            *o += w * v;
        }
    }
    let u = &frames[frame].field;
    let ux = fd_periodic(u, 1, 0);
    let uxx = fd_periodic(u, 2, 0);
    let uxxx = fd_periodic(u, 3, 0);
    let uxxxx = fd_periodic(u, 4, 0);
    let uyy = fd_periodic(u, 2, 1);
    let uxt = fd_periodic(&ut, 1, 0);
    let uxxxt = fd_periodic(&ut, 3, 0);
    let (e, gm) = (m.epsilon, m.gamma_phys);
    let mut r = Field2D::zeros(g);
    for (i, out) in r.values_mut().iter_mut().enumerate() {
        let (v, v1, v2, v3, v4) = (
            u.values()[i],
            ux.values()[i],
            uxx.values()[i],
            uxxx.values()[i],
            uxxxx.values()[i],
        );
        *out = uxt.values()[i] - 5.0 / 12.0 * gm * uxxxt.values()[i]
            + v2
            + 1.5 * e * (v1 * v1 + v * v2)
            - 0.25 * gm * v4
            - 5.0 / 24.0 * gm * e * (2.0 * v2 * v2 + 3.0 * v1 * v3 + v * v4)
            + 0.5 * e.powi(3) * uyy.values()[i];
    }
    Ok(r)
}
