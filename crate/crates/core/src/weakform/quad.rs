//! Iterated composite Gauss-Legendre quadrature with uniform refinement.
//!
//! Every axis `[a, b]` is parametrized as `x = m + h tanh(tau) / tanh(T)`
//! with `tau` in `[-T, T]` and split into `n` equal `tau` cells with 8 nodes
//! each. The stretch concentrates nodes near the ends, where the high
//! derivatives of bump test functions live. Each axis is further cut at the
//! break points its [`Region`] reports (a kink on the innermost axis, the
//! places where a kink leaves the support on the outer ones), with `n` cells
//! per piece. The error estimate is `|Q(2n) - Q(n)|` plus a roundoff floor
//! proportional to the integral of `|f|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadOptions {
    /// Cells per axis at the first level.
    pub min_cells: usize,
    /// Refinement stops with an error beyond this many cells per axis.
    pub max_cells: usize,
    pub abs_tol: f64,
    /// Relative to the integral of `|f|`.
    pub rel_tol: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            min_cells: 2,
            max_cells: 64,
            abs_tol: 1e-12,
            rel_tol: 1e-9,
        }
    }
}

/// Value with its error estimate and the refinement history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub abs_integral: f64,
    /// `(cells per axis, |Q(2n) - Q(n)|)` per refinement.
    pub history: Vec<(usize, f64)>,
}

/// Half-width of the stretched parameter interval.
const STRETCH: f64 = 3.0;

/// Stretched parametrization of the axis `[a, b]`.
#[derive(Debug, Clone, Copy)]
struct Axis {
    mid: f64,
    scale: f64,
}

impl Axis {
    fn new(a: f64, b: f64) -> Self {
        Axis {
            mid: 0.5 * (a + b),
            scale: 0.5 * (b - a) / STRETCH.tanh(),
        }
    }

    fn tau(&self, x: f64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        ((x - self.mid) / self.scale)
            .clamp(-STRETCH.tanh(), STRETCH.tanh())
            .atanh()
    }

    /// `n` GL8 cells, uniform in `tau`, covering `[lo, hi]` of this axis.
    fn nodes(&self, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        composite_nodes(self.tau(lo), self.tau(hi), n)
            .into_iter()
            .map(|(t, w)| {
                let th = t.tanh();
                (self.mid + self.scale * th, w * self.scale * (1.0 - th * th))
            })
            .collect()
    }
}

/// Nodes and weights of `n` GL8 cells on `[a, b]`.
pub fn composite_nodes(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / n as f64;
    let mut out = Vec::with_capacity(8 * n);
    for c in 0..n {
        let mid = a + (c as f64 + 0.5) * h;
        for (x, w) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// Innermost integration range: fixed, or a function of the outer coordinates
/// for integrands whose support moves.
pub trait InnerRange: Sync {
    fn range(&self, outer: &[f64]) -> (f64, f64);
}

impl InnerRange for (f64, f64) {
    fn range(&self, _: &[f64]) -> (f64, f64) {
        *self
    }
}

impl<F: Fn(&[f64]) -> (f64, f64) + Sync> InnerRange for F {
    fn range(&self, outer: &[f64]) -> (f64, f64) {
        self(outer)
    }
}

/// Integration domain. Outer axes are integrated in order; each reports its
/// range and the points where the remaining integral is not smooth, given
/// the coordinates of the axes before it. The innermost axis may carry a kink.
pub trait Region: Sync {
    fn outer_dims(&self) -> usize;
    fn outer(&self, axis: usize, prefix: &[f64]) -> ((f64, f64), Vec<f64>);
    fn inner(&self, outer: &[f64]) -> ((f64, f64), Option<f64>);
}

/// Fixed outer box without break points.
pub struct BoxRegion<'a, K, X> {
    pub outer_box: &'a [(f64, f64)],
    pub kink: &'a K,
    pub x: X,
}

impl<K: Fn(&[f64]) -> Option<f64> + Sync, X: InnerRange> Region for BoxRegion<'_, K, X> {
    fn outer_dims(&self) -> usize {
        self.outer_box.len()
    }

    fn outer(&self, axis: usize, _: &[f64]) -> ((f64, f64), Vec<f64>) {
        (self.outer_box[axis], Vec::new())
    }

    fn inner(&self, outer: &[f64]) -> ((f64, f64), Option<f64>) {
        (self.x.range(outer), (self.kink)(outer))
    }
}

/// Nodes of the stretched axis over `range`, with `n` cells on every piece
/// between consecutive break points.
fn split_nodes(range: (f64, f64), breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    if !(range.1 > range.0) {
        return Vec::new();
    }
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > range.0 && b < range.1)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (range.1 - range.0));
    let mut out = Vec::new();
    let mut lo = range.0;
    for hi in cuts.into_iter().chain(std::iter::once(range.1)) {
        out.extend(Axis::new(lo, hi).nodes(lo, hi, n));
        lo = hi;
    }
    out
}

fn level_rec<const K: usize>(
    f: &(impl Fn(&[f64], f64) -> [f64; K] + Sync),
    region: &impl Region,
    prefix: &mut Vec<f64>,
    n: usize,
) -> ([f64; K], [f64; K]) {
    let (mut s, mut sa) = ([0.0; K], [0.0; K]);
    if prefix.len() == region.outer_dims() {
        let (x, kink) = region.inner(prefix);
        for (xv, w) in split_nodes(x, kink.as_slice(), n) {
            let v = f(prefix, xv);
            for k in 0..K {
                s[k] += w * v[k];
                sa[k] += w * v[k].abs();
            }
        }
        return (s, sa);
    }
    let (range, breaks) = region.outer(prefix.len(), prefix);
    for (c, w) in split_nodes(range, &breaks, n) {
        prefix.push(c);
        let (p, pa) = level_rec(f, region, prefix, n);
        prefix.pop();
        for k in 0..K {
            s[k] += w * p[k];
            sa[k] += w * pa[k];
        }
    }
    (s, sa)
}

/// Componentwise `(integral, integral of |f|)` of a vector integrand at a
/// fixed level. Nodes of the first outer axis are handled in parallel and
/// summed in a fixed order.
pub fn integrate_level_vec<const K: usize>(
    f: &(impl Fn(&[f64], f64) -> [f64; K] + Sync),
    region: &impl Region,
    n: usize,
) -> ([f64; K], [f64; K]) {
    if region.outer_dims() == 0 {
        return level_rec(f, region, &mut Vec::new(), n);
    }
    let (range, breaks) = region.outer(0, &[]);
    let parts: Vec<([f64; K], [f64; K])> = split_nodes(range, &breaks, n)
        .into_par_iter()
        .map(|(c, w)| {
            let mut prefix = Vec::with_capacity(region.outer_dims());
            prefix.push(c);
            let (mut p, mut pa) = level_rec(f, region, &mut prefix, n);
            for k in 0..K {
                p[k] *= w;
                pa[k] *= w;
            }
            (p, pa)
        })
        .collect();
    let (mut s, mut sa) = ([0.0; K], [0.0; K]);
    for (p, pa) in &parts {
        for k in 0..K {
            s[k] += p[k];
            sa[k] += pa[k];
        }
    }
    (s, sa)
}

pub fn integrate_level(
    f: &(impl Fn(&[f64], f64) -> f64 + Sync),
    region: &impl Region,
    n: usize,
) -> (f64, f64) {
    let (s, sa) = integrate_level_vec(&|o: &[f64], x: f64| [f(o, x)], region, n);
    (s[0], sa[0])
}

/// Last two levels of a vector integral: `value = Q(2n)`, `delta = Q(2n) - Q(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecQuad<const K: usize> {
    pub value: [f64; K],
    pub delta: [f64; K],
    pub abs_integral: [f64; K],
    pub cells: usize,
}

/// Refines a vector integral over a box until every component meets the tolerance.
pub fn integrate_vec<const K: usize>(
    f: &(impl Fn(&[f64], f64) -> [f64; K] + Sync),
    kink: &(impl Fn(&[f64]) -> Option<f64> + Sync),
    outer_box: &[(f64, f64)],
    x: impl InnerRange,
    opts: &QuadOptions,
) -> Result<VecQuad<K>> {
    integrate_vec_region(f, &BoxRegion { outer_box, kink, x }, opts)
}

pub fn integrate_vec_region<const K: usize>(
    f: &(impl Fn(&[f64], f64) -> [f64; K] + Sync),
    region: &impl Region,
    opts: &QuadOptions,
) -> Result<VecQuad<K>> {
    let mut n = opts.min_cells.max(1);
    let (mut q, _) = integrate_level_vec(f, region, n);
    let mut last = f64::INFINITY;
    let mut stalled = 0;
    loop {
        if 2 * n > opts.max_cells {
            return Err(Error::Quadrature(format!(
                "no convergence with {n} cells per axis (estimate {last:e})"
            )));
        }
        let (q2, qa2) = integrate_level_vec(f, region, 2 * n);
        if q2.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature("integrand is not finite".into()));
        }
        let mut delta = [0.0; K];
        let mut done = true;
        let mut worst: f64 = 0.0;
        for k in 0..K {
            delta[k] = q2[k] - q[k];
            let tol = opts.abs_tol + opts.rel_tol * qa2[k] + 64.0 * f64::EPSILON * qa2[k];
            done &= delta[k].abs() <= tol;
            worst = worst.max(delta[k].abs() / tol);
        }
        if done {
            return Ok(VecQuad {
                value: q2,
                delta,
                abs_integral: qa2,
                cells: 2 * n,
            });
        }
        if worst >= last {
            stalled += 1;
            if stalled >= 2 {
                return Err(Error::Quadrature(format!(
                    "error estimate stopped decreasing at {} cells per axis",
                    2 * n
                )));
            }
        } else {
            stalled = 0;
        }
        last = worst;
        q = q2;
        n *= 2;
    }
}

/// Refines until the estimate meets the tolerance; errors when refinement
/// stops helping or the cell budget runs out.
pub fn integrate(
    f: &(impl Fn(&[f64], f64) -> f64 + Sync),
    kink: &(impl Fn(&[f64]) -> Option<f64> + Sync),
    outer_box: &[(f64, f64)],
    x: impl InnerRange,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    integrate_region(f, &BoxRegion { outer_box, kink, x }, opts)
}

pub fn integrate_region(
    f: &(impl Fn(&[f64], f64) -> f64 + Sync),
    region: &impl Region,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let mut n = opts.min_cells.max(1);
    let (mut q, _) = integrate_level(f, region, n);
    let mut history = Vec::new();
    let mut stalled = 0;
    loop {
        if 2 * n > opts.max_cells {
            return Err(Error::Quadrature(format!(
                "no convergence with {n} cells per axis (estimate {:e})",
                history
                    .last()
                    .map(|h: &(usize, f64)| h.1)
                    .unwrap_or(f64::NAN)
            )));
        }
        let (q2, qa2) = integrate_level(f, region, 2 * n);
        let est = (q2 - q).abs();
        let floor = 64.0 * f64::EPSILON * qa2;
        history.push((2 * n, est));
        if !q2.is_finite() {
            return Err(Error::Quadrature("integrand is not finite".into()));
        }
        if est <= opts.abs_tol + opts.rel_tol * qa2 + floor {
            return Ok(QuadResult {
                value: q2,
                error_estimate: est + floor,
                abs_integral: qa2,
                history,
            });
        }
        if history.len() >= 2 && est >= history[history.len() - 2].1 {
            stalled += 1;
            if stalled >= 2 {
                return Err(Error::Quadrature(format!(
                    "error estimate stopped decreasing at {} cells per axis ({est:e})",
                    2 * n
                )));
            }
        } else {
            stalled = 0;
        }
        q = q2;
        n *= 2;
    }
}
