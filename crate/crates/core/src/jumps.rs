//! Quantum-jump sampling by inversion of the tabulated survival probability.
//!
//! Run `i` draws one uniform number from a ChaCha8 stream keyed by
//! `(master_seed, i)`, so any partition of the runs over workers yields the
//! same samples in the same order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::AmplitudeTrajectory;
use crate::error::{Error, Result};
use crate::prelude::*;

/// Increases of `P0` between grid points below this are treated as noise.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-10;

/// `P0(t)` on a uniform grid with exact slopes `-p(t)`, interpolated by
/// monotone cubic Hermite segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalTable {
    dt: f64,
    values: Vec<f64>,
    // per-interval end slopes after Fritsch-Carlson limiting
    slopes: Vec<(f64, f64)>,
}

impl SurvivalTable {
    /// Builds the table from samples of `P0` and `p = -dP0/dt`.
    pub fn new(dt: f64, values: Vec<f64>, density: &[f64]) -> Result<Self> {
        if values.len() < 2 || density.len() != values.len() {
            return Err(Error::InvalidArgument(
                "survival table needs matching value and slope arrays",
            ));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid("time step must be positive"));
        }
        for (k, w) in values.windows(2).enumerate() {
            if !(w[0].is_finite() && w[1].is_finite()) || w[1] > w[0] + MONOTONICITY_TOLERANCE {
                return Err(Error::NonMonotoneSurvival { index: k + 1 });
            }
        }
        let slopes = values
            .windows(2)
            .zip(density.windows(2))
            .map(|(y, p)| limited_slopes(y[0], y[1], -p[0], -p[1], dt))
            .collect();
        Ok(Self { dt, values, slopes })
    }

    /// Table of the trajectory's survival probability up to `window`.
    pub fn from_trajectory(traj: &AmplitudeTrajectory, window: f64) -> Result<Self> {
        let grid = traj.grid();
        if !(window > 0.0) {
            return Err(Error::InvalidArgument("window must be positive"));
        }
        if window > grid.end() * (1.0 + 1e-12) {
            return Err(Error::WindowBeyondTrajectory {
                window,
                end: grid.end(),
            });
        }
        let last = (grid.floor_index(window) + 1).min(grid.len() - 1).max(1);
        let mut values = traj.survival_probability();
        let mut density = traj.jump_density();
        values.truncate(last + 1);
        density.truncate(last + 1);
        Self::new(grid.dt(), values, &density)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Interpolated `P0(t)`, clamped to the table range.
    pub fn value(&self, t: f64) -> f64 {
        let n = self.slopes.len();
        let x = (t / self.dt).max(0.0);
        let k = (x.floor() as usize).min(n - 1);
        let s = (x - k as f64).min(1.0);
        self.segment(k, s)
    }

    fn segment(&self, k: usize, s: f64) -> f64 {
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = self.slopes[k];
        let h = self.dt;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * m1
    }

    /// Smallest-interval solution of `P0(t) = u` for `u` within the table range.
    pub fn invert(&self, u: f64) -> f64 {
        let v = &self.values;
        // first index whose value drops to u or below
        let mut lo = 0usize;
        let mut hi = v.len() - 1;
        if v[hi] > u {
            return self.end();
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if v[mid] > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = lo;
        let (mut a, mut b) = (0.0_f64, 1.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if self.segment(k, mid) > u {
                a = mid;
            } else {
                b = mid;
            }
        }
        (k as f64 + 0.5 * (a + b)) * self.dt
    }
}

fn limited_slopes(y0: f64, y1: f64, m0: f64, m1: f64, h: f64) -> (f64, f64) {
    let secant = (y1 - y0) / h;
    if secant >= 0.0 {
        return (0.0, 0.0);
    }
    let m0 = m0.min(0.0);
    let m1 = m1.min(0.0);
    let a = m0 / secant;
    let b = m1 / secant;
    let r2 = a * a + b * b;
    if r2 > 9.0 {
        let tau = 3.0 / r2.sqrt();
        (tau * m0, tau * m1)
    } else {
        (m0, m1)
    }
}

/// Uniform number in `(0, 1)` for run `run` of the stream keyed by `master_seed`.
pub fn run_uniform(master_seed: u64, run: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run);
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Per-run jump-time sampler over a fixed measurement window.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    table: SurvivalTable,
    window: f64,
    survival_at_window: f64,
    master_seed: u64,
}

impl JumpSampler {
    pub fn new(traj: &AmplitudeTrajectory, window: f64, master_seed: u64) -> Result<Self> {
        let table = SurvivalTable::from_trajectory(traj, window)?;
        let survival_at_window = table.value(window);
        Ok(Self {
            table,
            window,
            survival_at_window,
            master_seed,
        })
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// `P0(T)`, the probability that a run is censored.
    pub fn survival_at_window(&self) -> f64 {
        self.survival_at_window
    }

    pub fn table(&self) -> &SurvivalTable {
        &self.table
    }

    /// Jump time of run `run`, or `None` when no jump happens before `T`.
    pub fn draw(&self, run: u64) -> Option<f64> {
        let u = run_uniform(self.master_seed, run);
        if u < self.survival_at_window {
            return None;
        }
        let t = self.table.invert(u).min(self.window);
        Some(if t > 0.0 { t } else { f64::MIN_POSITIVE })
    }

    /// Collects draws listed in run order.
    pub fn collect(&self, draws: impl IntoIterator<Item = Option<f64>>) -> JumpSampleSet {
        let mut samples = Vec::new();
        let mut censored_count = 0u64;
        for d in draws {
            match d {
                Some(t) => samples.push(t),
                None => censored_count += 1,
            }
        }
        JumpSampleSet {
            samples,
            censored_count,
            window: self.window,
            master_seed: self.master_seed,
            survival_at_window: self.survival_at_window,
        }
    }
}

/// Realized jump times of `n_total` runs plus the number of censored runs.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSampleSet {
    samples: Vec<f64>,
    censored_count: u64,
    window: f64,
    master_seed: u64,
    survival_at_window: f64,
}

impl JumpSampleSet {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn censored_count(&self) -> u64 {
        self.censored_count
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn n_total(&self) -> u64 {
        self.samples.len() as u64 + self.censored_count
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored_count as f64 / self.n_total() as f64
    }

    /// Tabulated `P0(T)` the censoring was drawn against.
    pub fn survival_at_window(&self) -> f64 {
        self.survival_at_window
    }

    /// Whether the censored fraction lies within four binomial standard
    /// deviations of `P0(T)`.
    pub fn censoring_consistent(&self) -> bool {
        let p = self.survival_at_window;
        let n = self.n_total() as f64;
        let sigma = (p * (1.0 - p) / n).sqrt();
        (self.censored_fraction() - p).abs() <= 4.0 * sigma + 1e-15
    }

    /// Kolmogorov-Smirnov distance on `[0, T]` between the empirical
    /// distribution of all runs and `cdf`.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let mut sorted = self.samples.clone();
        sorted.sort_by(f64::total_cmp);
        let n = self.n_total() as f64;
        let mut worst = 0.0_f64;
        for (i, &t) in sorted.iter().enumerate() {
            let f = cdf(t);
            worst = worst.max((f - i as f64 / n).abs());
            worst = worst.max(((i + 1) as f64 / n - f).abs());
        }
        worst.max((sorted.len() as f64 / n - cdf(self.window)).abs())
    }
}

/// Draws `n` runs sequentially.
pub fn sample_jump_times(
    traj: &AmplitudeTrajectory,
    window: f64,
    n: u64,
    master_seed: u64,
) -> Result<JumpSampleSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one run is required"));
    }
    let sampler = JumpSampler::new(traj, window, master_seed)?;
    Ok(sampler.collect((0..n).map(|run| sampler.draw(run))))
}

/// Sample mean, unbiased variance and standard error of the realized jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpStatistics {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

pub fn estimate_stats(set: &JumpSampleSet) -> Result<JumpStatistics> {
    let xs = set.samples();
    if xs.is_empty() {
        return Err(Error::UndefinedEstimator);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let variance = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(JumpStatistics {
        count: xs.len() as u64,
        mean,
        variance,
        std_error: (variance / n).sqrt(),
    })
}
