//! Jump-time statistics computed from tabulated trajectories.

use core::fmt;

use crate::dynamics::AmplitudeTrajectory;
use crate::error::{Error, Result};
use crate::prelude::*;
use crate::quad;

/// Default relative threshold of [`markovianity_criterion`].
pub const DEFAULT_MARKOV_TOLERANCE: f64 = 1e-3;

/// Default bound on the truncation error of the improper integrals.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;

/// Time integrals of the atomic and pseudomode excited populations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedTimes {
    pub t_s: f64,
    pub t_l: Vec<f64>,
    pub total: f64,
    pub tail_bound: f64,
}

impl ExpectedTimes {
    pub fn new(t_s: f64, t_l: Vec<f64>, tail_bound: f64) -> Self {
        let total = t_s + t_l.iter().sum::<f64>();
        Self {
            t_s,
            t_l,
            total,
            tail_bound,
        }
    }

    /// `sum_l <t_l>`, the reservoir memory time.
    pub fn memory_time(&self) -> f64 {
        self.t_l.iter().sum()
    }
}

// (integral over the grid plus tail estimate, tail bound)
fn improper_integral(values: &[f64], h: f64, kappa: f64) -> (f64, f64) {
    let n = values.len();
    let body = quad::simpson(values, h);
    let estimate = values[n - 1] / kappa;
    let start = n - 1 - (n - 1) / 4;
    let bound = values[start..]
        .iter()
        .enumerate()
        .map(|(j, v)| v * (-kappa * h * (n - 1 - start - j) as f64).exp() / kappa)
        .fold(0.0, f64::max);
    (body + estimate, bound.max(estimate))
}

fn decay_rate(traj: &AmplitudeTrajectory) -> Result<f64> {
    let kappa = traj.model().population_decay_rate();
    if !(kappa > 1e-12) {
        return Err(Error::NonDecaying);
    }
    Ok(kappa)
}

/// `<t_S> = int |a0|^2` and `<t_l> = int |q_l|^2` over `[0, inf)`.
///
/// The grid part uses Simpson's rule; beyond the end the populations are
/// continued with the slowest decay rate of the amplitude system. Fails when
/// the bound on that continuation exceeds `tolerance`.
pub fn expected_times_numeric(traj: &AmplitudeTrajectory, tolerance: f64) -> Result<ExpectedTimes> {
    let kappa = decay_rate(traj)?;
    let h = traj.grid().dt();
    let pops: Vec<f64> = traj.a0().iter().map(|z| z.norm_sqr()).collect();
    let (t_s, mut tail_bound) = improper_integral(&pops, h, kappa);
    let mut t_l = Vec::with_capacity(traj.mode_count());
    for l in 0..traj.mode_count() {
        let pops: Vec<f64> = traj.mode_series(l).iter().map(|z| z.norm_sqr()).collect();
        let (v, b) = improper_integral(&pops, h, kappa);
        t_l.push(v);
        tail_bound += b;
    }
    if !(tail_bound <= tolerance) {
        return Err(Error::TrajectoryTooShort {
            tail_bound,
            tolerance,
        });
    }
    Ok(ExpectedTimes::new(t_s, t_l, tail_bound))
}

fn window_prefix(traj: &AmplitudeTrajectory, window: f64) -> Result<usize> {
    let grid = traj.grid();
    if !(window > 0.0) {
        return Err(Error::ZeroJumpProbability);
    }
    if window > grid.end() * (1.0 + 1e-12) {
        return Err(Error::WindowBeyondTrajectory {
            window,
            end: grid.end(),
        });
    }
    let k = grid.floor_index(window).min(grid.len() - 1);
    if k == 0 {
        return Err(Error::InvalidArgument("window shorter than one grid step"));
    }
    Ok(k + 1)
}

/// `<t>_T = int_0^T t p dt / int_0^T p dt`, conditioned on a jump before `T`.
///
/// `T` is rounded down to the grid.
pub fn finite_window_mean(traj: &AmplitudeTrajectory, window: f64) -> Result<f64> {
    let len = window_prefix(traj, window)?;
    let h = traj.grid().dt();
    let mut p = traj.jump_density();
    p.truncate(len);
    let den = quad::simpson(&p, h);
    if !(den > 0.0) {
        return Err(Error::ZeroJumpProbability);
    }
    let tp: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(k, v)| k as f64 * h * v)
        .collect();
    Ok(quad::simpson(&tp, h) / den)
}

/// Mean and variance of the jump time over the whole trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpMoments {
    pub mean: f64,
    pub variance: f64,
    /// `int p dt` over the grid.
    pub probability: f64,
}

pub fn jump_time_moments(traj: &AmplitudeTrajectory) -> Result<JumpMoments> {
    let h = traj.grid().dt();
    let p = traj.jump_density();
    let m0 = quad::simpson(&p, h);
    if !(m0 > 0.0) {
        return Err(Error::ZeroJumpProbability);
    }
    let t = |k: usize| k as f64 * h;
    let m1 = quad::simpson(
        &p.iter()
            .enumerate()
            .map(|(k, v)| t(k) * v)
            .collect::<Vec<_>>(),
        h,
    );
    let m2 = quad::simpson(
        &p.iter()
            .enumerate()
            .map(|(k, v)| t(k) * t(k) * v)
            .collect::<Vec<_>>(),
        h,
    );
    let mean = m1 / m0;
    Ok(JumpMoments {
        mean,
        variance: m2 / m0 - mean * mean,
        probability: m0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Markovianity {
    Markovian,
    NonMarkovian,
}

impl fmt::Display for Markovianity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Markovianity::Markovian => "Markovian",
            Markovianity::NonMarkovian => "non-Markovian",
        })
    }
}

/// Markovian iff `sum_l <t_l> <= rel_tol * <t_S>`; also returns the ratio.
pub fn markovianity_criterion(e: &ExpectedTimes, rel_tol: f64) -> (Markovianity, f64) {
    let memory = e.memory_time();
    let ratio = if memory == 0.0 {
        0.0
    } else if e.t_s > 0.0 {
        memory / e.t_s
    } else {
        f64::INFINITY
    };
    let class = if ratio <= rel_tol {
        Markovianity::Markovian
    } else {
        Markovianity::NonMarkovian
    };
    (class, ratio)
}

/// `chi(w) = int p(t) e^{i w t} dt / int p dt`.
///
/// Fails when the jump probability left beyond the grid, relative to
/// `|alpha|^2`, exceeds `tolerance`.
pub fn generating_function_numeric(
    traj: &AmplitudeTrajectory,
    w: f64,
    tolerance: f64,
) -> Result<Complex64> {
    let a2 = traj.alpha().norm_sqr();
    if !(a2 > 0.0) {
        return Err(Error::ZeroJumpProbability);
    }
    let last = traj.state(traj.len() - 1).excitation();
    if !(last <= tolerance) {
        return Err(Error::TrajectoryTooShort {
            tail_bound: last,
            tolerance,
        });
    }
    let h = traj.grid().dt();
    let p = traj.jump_density();
    let den = quad::simpson(&p, h);
    let weighted: Vec<Complex64> = p
        .iter()
        .enumerate()
        .map(|(k, v)| Complex64::from_polar(*v, w * k as f64 * h))
        .collect();
    Ok(quad::simpson(&weighted, h) / den)
}

/// Mean and variance from `ln chi` by central differences at `w = 0` with
/// one Richardson step: mean `= -i (ln chi)'(0)`, variance `= -(ln chi)''(0)`.
pub fn moments_from_generating_function<F>(chi: F, step: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("difference step must be positive"));
    }
    let l0 = chi(0.0)?.ln();
    let diffs = |h: f64| -> Result<(Complex64, Complex64)> {
        let lp = chi(h)?.ln();
        let lm = chi(-h)?.ln();
        Ok(((lp - lm) / (2.0 * h), (lp - l0 * 2.0 + lm) / (h * h)))
    };
    let (d1, s1) = diffs(step)?;
    let (d2, s2) = diffs(2.0 * step)?;
    let first = (d1 * 4.0 - d2) / 3.0;
    let second = (s1 * 4.0 - s2) / 3.0;
    Ok(((-I * first).re, -second.re))
}

/// `P0(t) - 1 + int_0^t p` on the grid, zero for exact dynamics.
pub fn flux_balance_residual(traj: &AmplitudeTrajectory) -> Vec<f64> {
    let p = traj.jump_density();
    let cum = quad::cumulative(&p, traj.grid().dt());
    traj.survival_probability()
        .iter()
        .zip(cum)
        .map(|(p0, c)| p0 - 1.0 + c)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::DampedJcParams;
    use crate::dynamics::evolve_effective;
    use crate::grid::TimeGrid;
    use crate::ode::Tolerances;
    use crate::spectral::{Pseudomode, PseudomodeModel, SpectralDensity};

    fn closed(g: f64, l: f64, d: f64, t_max: f64, dt: f64) -> AmplitudeTrajectory {
        DampedJcParams::new(g, l, d)
            .unwrap()
            .tabulate(ONE, ZERO, &TimeGrid::new(t_max, dt).unwrap())
            .unwrap()
    }

    #[test]
    fn expected_times_from_quadrature() {
        let traj = closed(1.0, 0.2, 0.5, 300.0, 0.01);
        let e = expected_times_numeric(&traj, DEFAULT_TAIL_TOLERANCE).unwrap();
        assert!((e.t_s - 9.75).abs() < 1e-4, "{}", e.t_s);
        assert!((e.t_l[0] - 2.5).abs() < 1e-4, "{}", e.t_l[0]);
        assert_eq!(e.total, e.t_s + e.t_l[0]);
        let half = traj
            .with_initial_state(
                Complex64::new(0.5_f64.sqrt(), 0.0),
                Complex64::new(0.5_f64.sqrt(), 0.0),
            )
            .unwrap();
        assert_eq!(expected_times_numeric(&half, 1e-6).unwrap(), e);
    }

    #[test]
    fn short_run_and_uncoupled_model_rejected() {
        let traj = closed(1.0, 0.2, 0.5, 30.0, 0.01);
        assert!(matches!(
            expected_times_numeric(&traj, 1e-6),
            Err(Error::TrajectoryTooShort { .. })
        ));
        let model = PseudomodeModel::new(
            vec![Pseudomode {
                detuning: 0.0,
                coupling: 0.0,
                decay_rate: 0.4,
            }],
            ONE,
            ZERO,
        )
        .unwrap();
        let grid = TimeGrid::new(10.0, 0.1).unwrap();
        let traj = evolve_effective(&model, &grid, &Tolerances::default()).unwrap();
        assert_eq!(expected_times_numeric(&traj, 1e-6), Err(Error::NonDecaying));
    }

    #[test]
    fn finite_window() {
        let traj = closed(1.0, 0.2, 0.5, 300.0, 0.01);
        let long = finite_window_mean(&traj, 300.0).unwrap();
        assert!((long - 12.25).abs() < 1e-3, "{long}");
        assert!(finite_window_mean(&traj, 2.0).unwrap() < long);
        let ground = traj.with_initial_state(ZERO, ONE).unwrap();
        assert_eq!(
            finite_window_mean(&ground, 100.0),
            Err(Error::ZeroJumpProbability)
        );
        assert_eq!(
            finite_window_mean(&traj, 0.0),
            Err(Error::ZeroJumpProbability)
        );
    }

    #[test]
    fn criterion_classes() {
        let traj = closed(1.0, 0.2, 0.5, 300.0, 0.01);
        let e = expected_times_numeric(&traj, 1e-6).unwrap();
        let (class, ratio) = markovianity_criterion(&e, DEFAULT_MARKOV_TOLERANCE);
        assert_eq!(class, Markovianity::NonMarkovian);
        assert!((ratio - 2.5 / 9.75).abs() < 1e-4);
        let bare = ExpectedTimes::new(2.0, Vec::new(), 0.0);
        assert_eq!(
            markovianity_criterion(&bare, DEFAULT_MARKOV_TOLERANCE),
            (Markovianity::Markovian, 0.0)
        );
        let (ts, tp) = DampedJcParams::new(1.0, 1e4, 0.0).unwrap().expected_times();
        let e = ExpectedTimes::new(ts - tp, vec![tp], 0.0);
        let (class, ratio) = markovianity_criterion(&e, DEFAULT_MARKOV_TOLERANCE);
        assert_eq!(class, Markovianity::Markovian);
        assert!((ratio - 5e-5).abs() < 1e-8);
    }

    #[test]
    fn generating_function_against_closed_form() {
        let p = DampedJcParams::new(1.0, 0.2, 0.5).unwrap();
        let traj = closed(1.0, 0.2, 0.5, 300.0, 0.01);
        assert!((generating_function_numeric(&traj, 0.0, 1e-6).unwrap() - ONE).norm() < 1e-14);
        for w in [0.05, 0.1, 0.5] {
            let num = generating_function_numeric(&traj, w, 1e-6).unwrap();
            assert!((num - p.generating_function(w)).norm() < 1e-6, "{w}");
        }
        let (mean, var) =
            moments_from_generating_function(|w| generating_function_numeric(&traj, w, 1e-6), 1e-4)
                .unwrap();
        assert!((mean - 12.25).abs() < 1e-3, "{mean}");
        assert!((var - 166.3125).abs() < 0.1, "{var}");
        let (mean, var) =
            moments_from_generating_function(|w| Ok(p.generating_function(w)), 1e-4).unwrap();
        assert!((mean - 12.25).abs() < 1e-6 && (var - 166.3125).abs() < 1e-4);
    }

    #[test]
    fn quadrature_moments() {
        let traj = closed(1.0, 0.2, 0.5, 300.0, 0.01);
        let m = jump_time_moments(&traj).unwrap();
        assert!((m.mean - 12.25).abs() < 1e-3);
        assert!((m.variance - 166.3125).abs() < 0.1);
    }

    #[test]
    fn pseudomode_time_ignores_detuning_and_decreases_with_width() {
        let at = |l: f64, d: f64| {
            let e = expected_times_numeric(&closed(1.0, l, d, 1000.0, 0.02), 1e-6).unwrap();
            (e.t_s, e.t_l[0])
        };
        let base = at(0.2, 0.0).1;
        for d in [0.5, 1.0] {
            assert!((at(0.2, d).1 - base).abs() < 1e-4);
        }
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for l in [0.3, 0.5, 1.0, 2.0] {
            let cur = at(l, 0.5);
            assert!(cur.0 < prev.0 && cur.1 < prev.1);
            prev = cur;
        }
    }

    #[test]
    fn flux_balance_two_modes() {
        let sd = SpectralDensity::from_detunings([(1.0, 0.3, 0.4), (0.5, 0.8, -1.0)]);
        let model = sd
            .to_pseudomode(Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6))
            .unwrap();
        let grid = TimeGrid::new(40.0, 0.01).unwrap();
        let traj = evolve_effective(&model, &grid, &Tolerances::default()).unwrap();
        let worst = flux_balance_residual(&traj)
            .iter()
            .fold(0.0_f64, |m, r| m.max(r.abs()));
        assert!(worst < 1e-8, "{worst}");
    }
}
