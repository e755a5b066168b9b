//! Quadrature on uniform grids and adaptive Gauss-Kronrod panels.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;
use core::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::prelude::*;

/// Values that can be integrated: `f64` and `Complex64`.
pub trait Integrand: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        ZERO
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Composite Simpson rule over uniformly spaced samples.
///
/// With an even number of intervals this is plain Simpson; otherwise the
/// last three intervals use the 3/8 rule. Two samples fall back to the
/// trapezoid rule.
pub fn simpson<T: Integrand>(values: &[T], h: f64) -> T {
    let n = values.len();
    match n {
        0 | 1 => T::zero(),
        2 => (values[0] + values[1]) * (0.5 * h),
        3 => simpson_even(values, h),
        _ if (n - 1).is_multiple_of(2) => simpson_even(values, h),
        _ => {
            let head = &values[..n - 3];
            let tail = &values[n - 4..];
            let three_eighths =
                (tail[0] + tail[1] * 3.0 + tail[2] * 3.0 + tail[3]) * (3.0 * h / 8.0);
            simpson_even(head, h) + three_eighths
        }
    }
}

fn simpson_even<T: Integrand>(values: &[T], h: f64) -> T {
    let n = values.len();
    if n < 3 {
        return T::zero();
    }
    let mut acc = values[0] + values[n - 1];
    for (k, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc = acc + *v * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

/// Running integral `F_k = integral of f from t_0 to t_k` on a uniform grid.
///
/// Each interval uses the four-point (cubic) rule built from its two
/// neighbours, so the accumulated error is fourth order in `h`.
pub fn cumulative<T: Integrand>(values: &[T], h: f64) -> Vec<T> {
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(T::zero());
    if n == 2 {
        out.push((values[0] + values[1]) * (0.5 * h));
        return out;
    }
    if n == 3 {
        // quadratic through all three points
        out.push((values[0] * 5.0 + values[1] * 8.0 + values[2] * -1.0) * (h / 12.0));
        let last = out[1] + (values[0] * -1.0 + values[1] * 8.0 + values[2] * 5.0) * (h / 12.0);
        out.push(last);
        return out;
    }
    let mut acc = T::zero();
    for k in 0..n - 1 {
        let piece = if k == 0 {
            (values[0] * 9.0 + values[1] * 19.0 + values[2] * -5.0 + values[3]) * (h / 24.0)
        } else if k == n - 2 {
            (values[n - 4] + values[n - 3] * -5.0 + values[n - 2] * 19.0 + values[n - 1] * 9.0)
                * (h / 24.0)
        } else {
            (values[k - 1] * -1.0 + values[k] * 13.0 + values[k + 1] * 13.0 + values[k + 2] * -1.0)
                * (h / 24.0)
        };
        acc = acc + piece;
        out.push(acc);
    }
    out
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod_panel<T: Integrand, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    let err = (kron + gauss * -1.0).magnitude();
    (kron, err)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl<T> Eq for Panel<T> {}

impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Result of [`adaptive`] quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Adaptive Gauss-Kronrod 7/15 quadrature over the panels delimited by
/// `breakpoints` (sorted, first and last are the integration limits).
///
/// Panels are bisected, worst first, until the summed error estimate is
/// below `abs_tol` or `max_panels` is reached; the latter is an error.
pub fn adaptive<T, F>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<Quadrature<T>>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidArgument("need at least two breakpoints"));
    }
    let mut heap = BinaryHeap::with_capacity(breakpoints.len() * 4);
    let mut total_err = 0.0;
    for w in breakpoints.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument("breakpoints must be increasing"));
        }
        let (value, err) = kronrod_panel(&f, w[0], w[1]);
        total_err += err;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            err,
        });
    }
    while total_err > abs_tol {
        if heap.len() >= max_panels {
            return Err(Error::InvalidArgument(
                "adaptive quadrature did not converge",
            ));
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let (vl, el) = kronrod_panel(&f, worst.a, mid);
        let (vr, er) = kronrod_panel(&f, mid, worst.b);
        total_err += el + er - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: vl,
            err: el,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: vr,
            err: er,
        });
    }
    // sum in position order so the result does not depend on refinement history
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
    Ok(Quadrature {
        value,
        error_estimate: panels.iter().map(|p| p.err).sum(),
        panels: panels.len(),
    })
}
