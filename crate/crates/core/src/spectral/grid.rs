use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft;
use crate::error::{Error, Result};

/// Periodic rectangular grid on `[0, lx) x [0, ly)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid2D {
    pub const MIN_POINTS: usize = 8;

    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        let grid = Grid2D { nx, ny, lx, ly };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny)] {
            if n < Self::MIN_POINTS || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be even and at least {}",
                    Self::MIN_POINTS
                )));
            }
        }
        for (name, l) in [("lx", self.lx), ("ly", self.ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn y(&self, k: usize) -> f64 {
        k as f64 * self.dy()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Signed mode number of FFT index `i` along an axis with `n` points:
    /// `0..n/2-1` then `-n/2..-1`.
    #[inline]
    pub fn signed_mode(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// FFT index holding signed mode `m`.
    #[inline]
    pub fn mode_index(m: i64, n: usize) -> usize {
        m.rem_euclid(n as i64) as usize
    }

    pub fn mode_x(&self, ix: usize) -> i64 {
        Self::signed_mode(ix, self.nx)
    }

    pub fn mode_y(&self, iy: usize) -> i64 {
        Self::signed_mode(iy, self.ny)
    }

    /// Wavenumber `xi_j = 2 pi j / lx` of FFT index `ix`.
    pub fn xi(&self, ix: usize) -> f64 {
        2.0 * PI * self.mode_x(ix) as f64 / self.lx
    }

    pub fn eta(&self, iy: usize) -> f64 {
        2.0 * PI * self.mode_y(iy) as f64 / self.ly
    }

    /// Fundamental wavenumber in x.
    pub fn xi1(&self) -> f64 {
        2.0 * PI / self.lx
    }

    pub fn eta1(&self) -> f64 {
        2.0 * PI / self.ly
    }

    /// Largest |j| kept by the 2/3 truncation rule; products of two fields
    /// restricted to `|j| <= K` alias only into `|j| > K` when `3K < nx`.
    pub fn dealias_x(&self) -> usize {
        (self.nx - 1) / 3
    }

    pub fn dealias_y(&self) -> usize {
        (self.ny - 1) / 3
    }

    pub fn nyquist_x(&self) -> usize {
        self.nx / 2
    }

    pub fn nyquist_y(&self) -> usize {
        self.ny / 2
    }

    /// Same grid with the resolution multiplied by `factor` in both directions.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Grid2D::new(self.nx * factor, self.ny * factor, self.lx, self.ly)
    }
}

/// Real scalar field sampled on a [`Grid2D`], x-index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl Field2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Field2D {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.nx,
                grid.ny,
                values.len()
            )));
        }
        let field = Field2D { grid, values };
        field.check_finite()?;
        Ok(field)
    }

    /// Samples `f(x, y)` at the grid points.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny {
            let y = grid.y(iy);
            for ix in 0..grid.nx {
                values.push(f(grid.x(ix), y));
            }
        }
        Field2D { grid, values }
    }

    pub(crate) fn from_raw(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field2D { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.index(ix, iy)]
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete L2 norm `sqrt(dx dy sum u^2)`.
    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v * v).sum();
        (s * self.grid.dx() * self.grid.dy()).sqrt()
    }

    /// Mean over x of every y row.
    pub fn row_means(&self) -> Vec<f64> {
        self.values
            .chunks_exact(self.grid.nx)
            .map(|row| row.iter().sum::<f64>() / self.grid.nx as f64)
            .collect()
    }

    /// Largest |x-mean| over the rows.
    pub fn max_row_mean(&self) -> f64 {
        self.row_means().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Zero x-mean on every row, relative to the field magnitude.
    pub fn is_admissible(&self) -> bool {
        self.check_admissible().is_ok()
    }

    pub fn check_admissible(&self) -> Result<()> {
        self.check_finite()?;
        let scale = self.max_abs();
        let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
        for (row, mean) in self.row_means().into_iter().enumerate() {
            if mean.abs() > tol && scale > 0.0 {
                return Err(Error::NotAdmissible { row, mean });
            }
        }
        Ok(())
    }

    /// Removes the x-mean of every row.
    pub fn project_admissible(&mut self) {
        let nx = self.grid.nx;
        for row in self.values.chunks_exact_mut(nx) {
            let mean = row.iter().sum::<f64>() / nx as f64;
            row.iter_mut().for_each(|v| *v -= mean);
        }
    }

    pub fn same_grid(&self, other: &Field2D) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument(
                "fields live on different grids".to_string(),
            ));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Field2D) -> Field2D {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Field2D::from_raw(self.grid, values)
    }

    pub fn add(&self, other: &Field2D) -> Field2D {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Field2D::from_raw(self.grid, values)
    }

    pub fn scale(&self, s: f64) -> Field2D {
        Field2D::from_raw(self.grid, self.values.iter().map(|v| v * s).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field2D {
        Field2D::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Sup-norm of the difference.
    pub fn max_abs_diff(&self, other: &Field2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Forward transform (unnormalized).
    pub fn to_spectral(&self) -> SpectralField2D {
        let mut coeffs: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft::plans(self.grid.nx, self.grid.ny).forward(&mut coeffs);
        SpectralField2D {
            grid: self.grid,
            coeffs,
        }
    }
}

/// Fourier coefficients of a real field, stored in FFT index order with the
/// same x-fastest layout as [`Field2D`].
///
/// The forward transform is unnormalized; the inverse carries `1/(nx ny)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField2D {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

impl SpectralField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        SpectralField2D {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub(crate) fn from_raw(grid: Grid2D, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        SpectralField2D { grid, coeffs }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of signed mode `(j, k)`.
    pub fn coeff(&self, j: i64, k: i64) -> Complex64 {
        let ix = Grid2D::mode_index(j, self.grid.nx);
        let iy = Grid2D::mode_index(k, self.grid.ny);
        self.coeffs[self.grid.index(ix, iy)]
    }

    pub fn set_coeff(&mut self, j: i64, k: i64, value: Complex64) {
        let ix = Grid2D::mode_index(j, self.grid.nx);
        let iy = Grid2D::mode_index(k, self.grid.ny);
        let idx = self.grid.index(ix, iy);
        self.coeffs[idx] = value;
    }

    /// Inverse transform; the real part of the result is kept, which is the
    /// same as Hermitian-projecting the coefficients first.
    pub fn to_field(&self) -> Field2D {
        let mut buf = self.coeffs.clone();
        fft::plans(self.grid.nx, self.grid.ny).inverse(&mut buf);
        let norm = 1.0 / self.grid.len() as f64;
        Field2D::from_raw(self.grid, buf.into_iter().map(|c| c.re * norm).collect())
    }

    /// Discrete L2 norm via Parseval; equals `Field2D::norm_l2` of the inverse.
    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (s / self.grid.len() as f64 * self.grid.dx() * self.grid.dy()).sqrt()
    }

    /// All `coeff(0, k)` vanish.
    pub fn is_admissible(&self, tol: f64) -> bool {
        (0..self.grid.ny).all(|iy| self.coeffs[self.grid.index(0, iy)].norm() <= tol)
    }

    pub fn zero_x_mode(&mut self) {
        for iy in 0..self.grid.ny {
            let idx = self.grid.index(0, iy);
            self.coeffs[idx] = Complex64::new(0.0, 0.0);
        }
    }

    /// Largest violation of `coeff(-j,-k) = conj(coeff(j,k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst: f64 = 0.0;
        for iy in 0..g.ny {
            let my = Grid2D::mode_index(-g.mode_y(iy), g.ny);
            for ix in 0..g.nx {
                let mx = Grid2D::mode_index(-g.mode_x(ix), g.nx);
                let a = self.coeffs[g.index(ix, iy)];
                let b = self.coeffs[g.index(mx, my)];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    /// Restores Hermitian symmetry on the Nyquist lines, where a mode is its
    /// own mirror image and multipliers can break the pairing.
    pub fn symmetrize_nyquist(&mut self) {
        let g = self.grid;
        let (qx, qy) = (g.nyquist_x(), g.nyquist_y());
        for iy in 0..g.ny {
            let my = Grid2D::mode_index(-g.mode_y(iy), g.ny);
            let a = self.coeffs[g.index(qx, iy)];
            let b = self.coeffs[g.index(qx, my)];
            let avg = 0.5 * (a + b.conj());
            self.coeffs[g.index(qx, iy)] = avg;
            self.coeffs[g.index(qx, my)] = avg.conj();
        }
        for ix in 0..g.nx {
            let mx = Grid2D::mode_index(-g.mode_x(ix), g.nx);
            let a = self.coeffs[g.index(ix, qy)];
            let b = self.coeffs[g.index(mx, qy)];
            let avg = 0.5 * (a + b.conj());
            self.coeffs[g.index(ix, qy)] = avg;
            self.coeffs[g.index(mx, qy)] = avg.conj();
        }
    }

    /// Multiplies every coefficient by `m(xi, eta)` and restores the Nyquist pairing.
    pub fn apply(&self, m: impl Fn(f64, f64) -> Complex64) -> SpectralField2D {
        let g = self.grid;
        let xis: Vec<f64> = (0..g.nx).map(|ix| g.xi(ix)).collect();
        let mut out = self.clone();
        for iy in 0..g.ny {
            let eta = g.eta(iy);
            let row = &mut out.coeffs[iy * g.nx..(iy + 1) * g.nx];
            for (c, &xi) in row.iter_mut().zip(&xis) {
                *c *= m(xi, eta);
            }
        }
        out.symmetrize_nyquist();
        out
    }

    /// Zeroes every mode outside the 2/3 band `|j| <= nx/3, |k| <= ny/3`.
    pub fn dealias(&mut self) {
        let g = self.grid;
        let (kx, ky) = (g.dealias_x() as i64, g.dealias_y() as i64);
        for iy in 0..g.ny {
            let keep_y = g.mode_y(iy).abs() <= ky;
            for ix in 0..g.nx {
                if !keep_y || g.mode_x(ix).abs() > kx {
                    self.coeffs[g.index(ix, iy)] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
}
