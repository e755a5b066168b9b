//! Adaptive Dormand-Prince 5(4) integration of complex linear (or
//! nonlinear) systems, reporting the solution on a uniform output grid.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::prelude::*;

/// Right-hand side `dy/dt = F(t, y)` of a complex ODE system.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn derivative(&self, t: f64, y: &[Complex64], dydt: &mut [Complex64]);
}

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on the step; `None` means the whole interval.
    pub max_step: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 10_000_000,
            max_step: None,
        }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol.is_finite() && self.atol >= 0.0 && self.atol.is_finite())
        {
            return Err(Error::InvalidArgument(
                "tolerances must be positive and finite",
            ));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::InvalidArgument("max_step must be positive"));
            }
        }
        Ok(())
    }
}

/// Counters reported after a successful run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Workspace {
    k: [Vec<Complex64>; 7],
    stage: Vec<Complex64>,
    y_new: Vec<Complex64>,
    out: Vec<Complex64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: core::array::from_fn(|_| vec![ZERO; n]),
            stage: vec![ZERO; n],
            y_new: vec![ZERO; n],
            out: vec![ZERO; n],
        }
    }
}

fn weighted_rms(err: &[Complex64], y0: &[Complex64], y1: &[Complex64], tol: &Tolerances) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = tol.atol + tol.rtol * a.norm().max(b.norm());
            let r = e.norm() / sc;
            r * r
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step<S: OdeSystem>(
    sys: &S,
    y0: &[Complex64],
    f0: &[Complex64],
    tol: &Tolerances,
    span: f64,
    ws: &mut Workspace,
) -> f64 {
    let zeros = vec![ZERO; y0.len()];
    let d0 = weighted_rms(y0, y0, y0, tol);
    let d1 = weighted_rms(f0, y0, y0, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    for i in 0..y0.len() {
        ws.stage[i] = y0[i] + f0[i] * h0;
    }
    sys.derivative(h0, &ws.stage, &mut ws.out);
    for (o, f) in ws.out.iter_mut().zip(f0) {
        *o -= *f;
    }
    let d2 = weighted_rms(&ws.out, &zeros, &zeros, tol).max(0.0) / h0;
    let d2 = if d2.is_finite() { d2 } else { 0.0 };
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `sys` from `y0` at `t = 0` across the whole `grid`, handing
/// every grid point to `observe(k, y(t_k))` in order.
///
/// Steps are shortened so that every grid point is a step endpoint; output
/// values are therefore full-accuracy Runge-Kutta solutions rather than
/// interpolants.
pub fn integrate_on_grid<S, F>(
    sys: &S,
    y0: &[Complex64],
    grid: &TimeGrid,
    tol: &Tolerances,
    mut observe: F,
) -> Result<IntegrationStats>
where
    S: OdeSystem,
    F: FnMut(usize, &[Complex64]),
{
    tol.check()?;
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::InvalidArgument("initial state has wrong dimension"));
    }
    let mut stats = IntegrationStats::default();
    let mut ws = Workspace::new(n);
    let mut y = y0.to_vec();
    let mut f = vec![ZERO; n];
    sys.derivative(0.0, &y, &mut f);
    stats.evaluations += 1;
    observe(0, &y);
    if grid.len() == 1 {
        return Ok(stats);
    }

    let t_end = grid.end();
    let h_max = tol.max_step.unwrap_or(t_end).min(t_end);
    let mut t = 0.0_f64;
    let mut h = initial_step(sys, &y, &f, tol, h_max, &mut ws);
    stats.evaluations += 1;
    let mut next = 1usize;
    let mut last_rejected = false;

    while next < grid.len() {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::MaxStepsExceeded { t });
        }
        let target = grid.time(next);
        let proposed = h.min(h_max);
        let lands = proposed >= target - t;
        let step = if lands { target - t } else { proposed };
        if step <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h: step });
        }
        let t_new = if lands { target } else { t + step };

        let Workspace {
            k,
            stage,
            y_new,
            out,
        } = &mut ws;
        k[0].copy_from_slice(&f);
        let stages: [(f64, &[f64]); 5] = [
            (C2, &[A21]),
            (C3, &[A31, A32]),
            (C4, &[A41, A42, A43]),
            (C5, &[A51, A52, A53, A54]),
            (1.0, &[A61, A62, A63, A64, A65]),
        ];
        for (s, (c, row)) in stages.iter().enumerate() {
            for i in 0..n {
                let mut acc = y[i];
                for (j, a) in row.iter().enumerate() {
                    acc += k[j][i] * (a * step);
                }
                stage[i] = acc;
            }
            sys.derivative(t + c * step, stage, &mut k[s + 1]);
        }
        for i in 0..n {
            y_new[i] = y[i]
                + (k[0][i] * A71 + k[2][i] * A73 + k[3][i] * A74 + k[4][i] * A75 + k[5][i] * A76)
                    * step;
        }
        sys.derivative(t_new, y_new, &mut k[6]);
        stats.evaluations += 6;

        for i in 0..n {
            out[i] = (k[0][i] * E1
                + k[2][i] * E3
                + k[3][i] * E4
                + k[4][i] * E5
                + k[5][i] * E6
                + k[6][i] * E7)
                * step;
        }
        let err = weighted_rms(out, &y, y_new, tol);

        if !err.is_finite() {
            stats.rejected += 1;
            h = step * 0.1;
            last_rejected = true;
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::NonFinite { t });
            }
            continue;
        }

        if err <= 1.0 {
            stats.accepted += 1;
            t = t_new;
            y.copy_from_slice(y_new);
            f.copy_from_slice(&k[6]);
            if lands {
                observe(next, &y);
                next += 1;
            }
            let mut fac = if err == 0.0 {
                5.0
            } else {
                0.9 * err.powf(-0.2)
            };
            fac = fac.clamp(0.2, 5.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            // a step shortened to hit the grid says little about the natural size
            h = if lands {
                (step * fac).max(proposed.min(h))
            } else {
                step * fac
            };
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h = step * (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rotation {
        omega: f64,
        decay: f64,
    }

    impl OdeSystem for Rotation {
        fn dim(&self) -> usize {
            1
        }
        fn derivative(&self, _t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
            dydt[0] = -Complex64::new(self.decay, self.omega) * y[0];
        }
    }

    #[test]
    fn exponential_matches_on_grid() {
        let sys = Rotation {
            omega: 2.0,
            decay: 0.3,
        };
        let grid = TimeGrid::new(10.0, 0.05).unwrap();
        let mut max_err: f64 = 0.0;
        integrate_on_grid(&sys, &[ONE], &grid, &Tolerances::default(), |k, y| {
            let t = grid.time(k);
            let exact = (-Complex64::new(0.3, 2.0) * t).exp();
            max_err = max_err.max((y[0] - exact).norm());
        })
        .unwrap();
        assert!(max_err < 1e-9, "max error {max_err}");
    }

    #[test]
    fn every_grid_point_is_visited_once() {
        let sys = Rotation {
            omega: 0.0,
            decay: 0.0,
        };
        let grid = TimeGrid::new(3.0, 0.1).unwrap();
        let mut seen = alloc::vec::Vec::new();
        integrate_on_grid(&sys, &[ONE], &grid, &Tolerances::default(), |k, _| {
            seen.push(k)
        })
        .unwrap();
        assert_eq!(seen, (0..grid.len()).collect::<alloc::vec::Vec<_>>());
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        // y = x + i v for x'' = -x
        struct Osc;
        impl OdeSystem for Osc {
            fn dim(&self) -> usize {
                2
            }
            fn derivative(&self, _t: f64, y: &[Complex64], d: &mut [Complex64]) {
                d[0] = y[1];
                d[1] = -y[0];
            }
        }
        let grid = TimeGrid::new(50.0, 0.5).unwrap();
        let mut worst: f64 = 0.0;
        integrate_on_grid(&Osc, &[ONE, ZERO], &grid, &Tolerances::default(), |k, y| {
            let t = grid.time(k);
            worst = worst.max((y[0].re - t.cos()).abs());
        })
        .unwrap();
        assert!(worst < 1e-8);
    }

    #[test]
    fn step_limit_is_reported() {
        let sys = Rotation {
            omega: 100.0,
            decay: 0.0,
        };
        let grid = TimeGrid::new(100.0, 1.0).unwrap();
        let tol = Tolerances {
            max_steps: 10,
            ..Tolerances::default()
        };
        let err = integrate_on_grid(&sys, &[ONE], &grid, &tol, |_, _| {}).unwrap_err();
        assert!(matches!(err, Error::MaxStepsExceeded { .. }));
    }

    #[test]
    fn rejects_bad_tolerances() {
        let sys = Rotation {
            omega: 1.0,
            decay: 0.0,
        };
        let grid = TimeGrid::new(1.0, 0.1).unwrap();
        let tol = Tolerances::new(0.0, 1e-12);
        assert!(integrate_on_grid(&sys, &[ONE], &grid, &tol, |_, _| {}).is_err());
    }
}
