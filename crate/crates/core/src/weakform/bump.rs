//! Compactly supported smooth test functions and their reflections.

use serde::{Deserialize, Serialize};

/// Highest derivative order of the 1D bump available in closed form.
pub const MAX_BUMP_ORDER: usize = 5;

/// `B(s) = exp(-1/(1 - s^2))` for `|s| < 1`, else 0, and its derivatives up to
/// order 5: `out[n] = B^(n)(s)`.
///
/// With `h = -1/(1 - s^2)` we have `B = e^h`, and the derivatives are the
/// complete Bell polynomials in `h', ..., h^(n)` times `B`.
pub fn bump_derivs(s: f64) -> [f64; MAX_BUMP_ORDER + 1] {
    let mut out = [0.0; MAX_BUMP_ORDER + 1];
    if !(s.abs() < 1.0) {
        return out;
    }
    let b = (-1.0 / (1.0 - s * s)).exp();
    if b == 0.0 {
        return out;
    }
    // h^(n) = -(n!/2) [ (1-s)^-(n+1) + (-1)^n (1+s)^-(n+1) ]
    let (p, m) = (1.0 / (1.0 - s), 1.0 / (1.0 + s));
    let mut h = [0.0; 6];
    let (mut pp, mut mm, mut fact) = (p, m, 1.0);
    for (n, hn) in h.iter_mut().enumerate().skip(1) {
        pp *= p;
        mm *= m;
        fact *= n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        *hn = -0.5 * fact * (pp + sign * mm);
    }
    let (h1, h2, h3, h4, h5) = (h[1], h[2], h[3], h[4], h[5]);
    out[0] = b;
    out[1] = h1 * b;
    out[2] = (h2 + h1 * h1) * b;
    out[3] = (h3 + 3.0 * h1 * h2 + h1.powi(3)) * b;
    out[4] = (h4 + 4.0 * h1 * h3 + 3.0 * h2 * h2 + 6.0 * h1 * h1 * h2 + h1.powi(4)) * b;
    out[5] = (h5
        + 5.0 * h1 * h4
        + 10.0 * h2 * h3
        + 10.0 * h1 * h1 * h3
        + 15.0 * h1 * h2 * h2
        + 10.0 * h1.powi(3) * h2
        + h1.powi(5))
        * b;
    out
}

/// All partials `d_t^nt d_x^nx d_y^ny phi` at one point with `nt <= 1`,
/// `nx <= 4`, `ny <= 2`, indexed `[nt][nx][ny]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet(pub [[[f64; 3]; 5]; 2]);

impl Jet {
    #[inline]
    pub fn get(&self, nt: usize, nx: usize, ny: usize) -> f64 {
        self.0[nt][nx][ny]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().flatten().all(|v| *v == 0.0)
    }
}

/// Space-time test function: evaluates `d_t^nt d_x^nx d_y^ny phi`.
pub trait TestFunction: Sync {
    fn deriv(&self, nt: usize, nx: usize, ny: usize, t: f64, x: f64, y: f64) -> f64;
    /// Bounding box `[(t0, t1), (x0, x1), (y0, y1)]` of the support.
    fn support(&self) -> [(f64, f64); 3];

    /// x-extent of the support on the slice at `(t, y)`.
    fn x_range(&self, _t: f64, _y: f64) -> (f64, f64) {
        self.support()[1]
    }

    fn jet(&self, t: f64, x: f64, y: f64) -> Jet {
        let mut j = Jet::default();
        for nt in 0..2 {
            for nx in 0..5 {
                for ny in 0..3 {
                    j.0[nt][nx][ny] = self.deriv(nt, nx, ny, t, x, y);
                }
            }
        }
        j
    }
}

/// Spatial test function for the steady (traveling-frame) weak forms.
pub trait TestFunction2D: Sync {
    fn deriv(&self, nx: usize, ny: usize, x: f64, y: f64) -> f64;
    fn support(&self) -> [(f64, f64); 2];

    /// Partials `[nx][ny]` with `nx <= 4`, `ny <= 2`.
    fn jet(&self, x: f64, y: f64) -> [[f64; 3]; 5] {
        let mut j = [[0.0; 3]; 5];
        for (nx, row) in j.iter_mut().enumerate() {
            for (ny, v) in row.iter_mut().enumerate() {
                *v = self.deriv(nx, ny, x, y);
            }
        }
        j
    }
}

/// `amplitude B((t-t0)/rt) B((x-x0)/rx) B((y-y0)/ry)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub center: [f64; 3],
    pub radii: [f64; 3],
    pub amplitude: f64,
}

/// `amplitude B((x-x0)/rx) B((y-y0)/ry)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec2D {
    pub center: [f64; 2],
    pub radii: [f64; 2],
    pub amplitude: f64,
}

/// Scaled 1D derivatives `B^(n)((v-c)/r) / r^n`.
fn axis_all(v: f64, c: f64, r: f64) -> [f64; MAX_BUMP_ORDER + 1] {
    let mut d = bump_derivs((v - c) / r);
    let mut s = 1.0;
    for dn in d.iter_mut().skip(1) {
        s /= r;
        *dn *= s;
    }
    d
}

fn axis(n: usize, v: f64, c: f64, r: f64) -> f64 {
    assert!(
        n <= MAX_BUMP_ORDER,
        "bump derivative order {n} not available"
    );
    bump_derivs((v - c) / r)[n] / r.powi(n as i32)
}

impl TestFunction for BumpSpec {
    fn deriv(&self, nt: usize, nx: usize, ny: usize, t: f64, x: f64, y: f64) -> f64 {
        let [t0, x0, y0] = self.center;
        let [rt, rx, ry] = self.radii;
        self.amplitude * axis(nt, t, t0, rt) * axis(nx, x, x0, rx) * axis(ny, y, y0, ry)
    }

    fn support(&self) -> [(f64, f64); 3] {
        let [t0, x0, y0] = self.center;
        let [rt, rx, ry] = self.radii;
        [(t0 - rt, t0 + rt), (x0 - rx, x0 + rx), (y0 - ry, y0 + ry)]
    }

    fn jet(&self, t: f64, x: f64, y: f64) -> Jet {
        let mut j = Jet::default();
        let [t0, x0, y0] = self.center;
        let [rt, rx, ry] = self.radii;
        let dt = axis_all(t, t0, rt);
        if dt[0] == 0.0 && dt[1] == 0.0 {
            return j;
        }
        let dx = axis_all(x, x0, rx);
        let dy = axis_all(y, y0, ry);
        for nt in 0..2 {
            for nx in 0..5 {
                for ny in 0..3 {
                    j.0[nt][nx][ny] = self.amplitude * dt[nt] * dx[nx] * dy[ny];
                }
            }
        }
        j
    }
}

impl TestFunction2D for BumpSpec2D {
    fn deriv(&self, nx: usize, ny: usize, x: f64, y: f64) -> f64 {
        let [x0, y0] = self.center;
        let [rx, ry] = self.radii;
        self.amplitude * axis(nx, x, x0, rx) * axis(ny, y, y0, ry)
    }

    fn support(&self) -> [(f64, f64); 2] {
        let [x0, y0] = self.center;
        let [rx, ry] = self.radii;
        [(x0 - rx, x0 + rx), (y0 - ry, y0 + ry)]
    }

    fn jet(&self, x: f64, y: f64) -> [[f64; 3]; 5] {
        let [x0, y0] = self.center;
        let [rx, ry] = self.radii;
        let dx = axis_all(x, x0, rx);
        let dy = axis_all(y, y0, ry);
        let mut j = [[0.0; 3]; 5];
        for (nx, row) in j.iter_mut().enumerate() {
            for (ny, v) in row.iter_mut().enumerate() {
                *v = self.amplitude * dx[nx] * dy[ny];
            }
        }
        j
    }
}

/// Affine axis `lambda(t) = lambda0 + speed t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineAxis {
    pub lambda0: f64,
    pub speed: f64,
}

impl AffineAxis {
    pub fn at(&self, t: f64) -> f64 {
        self.lambda0 + self.speed * t
    }
}

/// `phi(t, 2 lambda(t) - x, y)` with exact chain-rule derivatives:
/// `d_x^n` picks up `(-1)^n`, and a time derivative adds
/// `2 lambda' (d_x^(n+1) phi)` evaluated at the reflected point.
#[derive(Debug, Clone)]
pub struct Reflected<F> {
    pub inner: F,
    pub axis: AffineAxis,
}

pub fn reflect_test_function<F: TestFunction + Clone>(phi: &F, axis: AffineAxis) -> Reflected<F> {
    Reflected {
        inner: phi.clone(),
        axis,
    }
}

impl<F: TestFunction> TestFunction for Reflected<F> {
    fn deriv(&self, nt: usize, nx: usize, ny: usize, t: f64, x: f64, y: f64) -> f64 {
        assert!(
            nt <= 1,
            "reflected test functions provide at most one time derivative"
        );
        let xr = 2.0 * self.axis.at(t) - x;
        let sign = if nx % 2 == 0 { 1.0 } else { -1.0 };
        let base = self.inner.deriv(nt, nx, ny, t, xr, y);
        if nt == 0 {
            sign * base
        } else {
            sign * (base + 2.0 * self.axis.speed * self.inner.deriv(0, nx + 1, ny, t, xr, y))
        }
    }

    /// Needs one extra x-derivative of the inner function, so only the
    /// entries with `nx <= 3` carry the time correction exactly; the
    /// `nt = 1, nx = 4` entries fall back to `deriv`.
    fn jet(&self, t: f64, x: f64, y: f64) -> Jet {
        let xr = 2.0 * self.axis.at(t) - x;
        let base = self.inner.jet(t, xr, y);
        let mut j = Jet::default();
        for nx in 0..5 {
            let sign = if nx % 2 == 0 { 1.0 } else { -1.0 };
            for ny in 0..3 {
                j.0[0][nx][ny] = sign * base.0[0][nx][ny];
                j.0[1][nx][ny] = if nx < 4 {
                    sign * (base.0[1][nx][ny] + 2.0 * self.axis.speed * base.0[0][nx + 1][ny])
                } else {
                    self.deriv(1, nx, ny, t, x, y)
                };
            }
        }
        j
    }

    fn support(&self) -> [(f64, f64); 3] {
        let [ts, xs, ys] = self.inner.support();
        let (a, b) = (self.axis.at(ts.0), self.axis.at(ts.1));
        let lo = 2.0 * a.min(b) - xs.1;
        let hi = 2.0 * a.max(b) - xs.0;
        [ts, (lo, hi), ys]
    }

    fn x_range(&self, t: f64, y: f64) -> (f64, f64) {
        let (x0, x1) = self.inner.x_range(t, y);
        let a = self.axis.at(t);
        (2.0 * a - x1, 2.0 * a - x0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_derivatives_match_finite_differences() {
        for &s in &[-0.7, -0.2, 0.0, 0.35, 0.8] {
            let d = bump_derivs(s);
            let h = 1e-5;
            for n in 0..MAX_BUMP_ORDER {
                let fd = (bump_derivs(s + h)[n] - bump_derivs(s - h)[n]) / (2.0 * h);
                assert!(
                    (fd - d[n + 1]).abs() < 1e-6 * (1.0 + d[n + 1].abs()),
                    "s={s} n={n}"
                );
            }
        }
    }

    #[test]
    fn bump_vanishes_outside_support() {
        assert_eq!(bump_derivs(1.0), [0.0; 6]);
        assert_eq!(bump_derivs(-1.5), [0.0; 6]);
        assert!(bump_derivs(0.999_999)[4].abs() < 1e-100);
    }

    #[test]
    fn reflection_about_the_center_is_identity() {
        let phi = BumpSpec {
            center: [0.0, 1.0, 0.5],
            radii: [1.0, 0.7, 1.2],
            amplitude: 2.0,
        };
        let r = reflect_test_function(
            &phi,
            AffineAxis {
                lambda0: 1.0,
                speed: 0.0,
            },
        );
        for &(t, x, y) in &[(0.1, 0.8, 0.4), (-0.3, 1.3, 1.0), (0.5, 1.5, 0.0)] {
            assert!((r.deriv(0, 0, 0, t, x, y) - phi.deriv(0, 0, 0, t, x, y)).abs() < 1e-15);
        }
    }

    #[test]
    fn double_reflection_is_identity() {
        let phi = BumpSpec {
            center: [0.2, -0.4, 0.1],
            radii: [0.9, 1.1, 0.8],
            amplitude: 1.0,
        };
        let ax = AffineAxis {
            lambda0: 0.3,
            speed: 0.7,
        };
        let rr = reflect_test_function(&reflect_test_function(&phi, ax), ax);
        for &(t, x, y) in &[(0.1, -0.8, 0.4), (0.5, -0.2, 0.3), (-0.3, 0.1, -0.2)] {
            for &(nt, nx, ny) in &[(0, 0, 0), (1, 0, 0), (0, 3, 1), (1, 2, 2)] {
                let a = rr.deriv(nt, nx, ny, t, x, y);
                let b = phi.deriv(nt, nx, ny, t, x, y);
                assert!(
                    (a - b).abs() < 1e-12 * (1.0 + b.abs()),
                    "{nt}{nx}{ny}: {a} vs {b}"
                );
            }
        }
    }
}
