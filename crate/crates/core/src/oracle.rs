//! Brute-force reference: the atom coupled to a finite set of reservoir
//! modes sampled from `D(w)`, integrated as a closed Schrodinger system.
//!
//! Nothing here knows about pseudomodes. The reservoir is discretized by the
//! midpoint rule on `[omega0 - W, omega0 + W]` and evolved in the frame
//! rotating at `omega0`.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{ComplexSeries, TimeGrid};
use crate::ode::{self, OdeSystem, Tolerances};
use crate::prelude::*;
use crate::spectral::SpectralDensity;

/// Relative sum-rule mismatch above which a bath is flagged.
pub const SUM_RULE_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BathWarning {
    /// `sum g_k^2` differs from `f(0)` by more than [`SUM_RULE_TOLERANCE`].
    SumRule { discrete: f64, continuum: f64 },
    /// Mode spacing exceeds the narrowest Lorentzian half-width.
    UnresolvedLinewidth { spacing: f64, min_half_width: f64 },
    /// The evolution window reaches past the recurrence time `2 pi / dw`.
    Recurrence { horizon: f64, t_max: f64 },
}

/// Reservoir modes `w_k` with couplings `g_k^2 = D(w_k) dw / (2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBath {
    omega0: f64,
    half_width: f64,
    spacing: f64,
    detunings: Vec<f64>,
    couplings: Vec<f64>,
    warnings: Vec<BathWarning>,
}

impl DiscreteBath {
    pub fn mode_count(&self) -> usize {
        self.detunings.len()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Absolute mode frequencies.
    pub fn frequencies(&self) -> Vec<f64> {
        self.detunings.iter().map(|d| d + self.omega0).collect()
    }

    /// `w_k - omega0`.
    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn coupling_sum(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum()
    }

    /// Poincare recurrence time `2 pi / dw` of the discrete spectrum.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    pub fn warnings(&self) -> &[BathWarning] {
        &self.warnings
    }
}

/// Samples `D` at the midpoints of `n` equal cells covering `omega0 +- half_width`.
pub fn discretize_bath(sd: &SpectralDensity, n: usize, half_width: f64) -> Result<DiscreteBath> {
    sd.ensure_valid()?;
    if n < 2 {
        return Err(Error::InvalidArgument(
            "at least two bath modes are required",
        ));
    }
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::InvalidArgument("bath half-width must be positive"));
    }
    let omega0 = sd.omega0();
    for (index, term) in sd.terms().iter().enumerate() {
        if (term.omega - omega0).abs() >= half_width {
            return Err(Error::ResonanceOutsideWindow { index });
        }
    }
    let spacing = 2.0 * half_width / n as f64;
    let detunings: Vec<f64> = (0..n)
        .map(|k| -half_width + (k as f64 + 0.5) * spacing)
        .collect();
    let couplings: Vec<f64> = detunings
        .iter()
        .map(|d| (sd.evaluate_density(omega0 + d) * spacing / (2.0 * PI)).sqrt())
        .collect();
    let mut bath = DiscreteBath {
        omega0,
        half_width,
        spacing,
        detunings,
        couplings,
        warnings: Vec::new(),
    };
    let discrete = bath.coupling_sum();
    let continuum = sd.kernel_sum();
    if (discrete - continuum).abs() > SUM_RULE_TOLERANCE * continuum {
        bath.warnings.push(BathWarning::SumRule {
            discrete,
            continuum,
        });
    }
    let min_half_width = sd
        .terms()
        .iter()
        .map(|t| t.lambda)
        .fold(f64::INFINITY, f64::min);
    if spacing > min_half_width {
        bath.warnings.push(BathWarning::UnresolvedLinewidth {
            spacing,
            min_half_width,
        });
    }
    Ok(bath)
}

/// Half-width reaching 100 linewidths beyond every resonance, where each
/// Lorentzian has fallen to about `1e-4` of its peak.
pub fn default_half_width(sd: &SpectralDensity) -> f64 {
    sd.terms()
        .iter()
        .map(|t| (t.omega - sd.omega0()).abs() + 100.0 * t.lambda)
        .fold(0.0, f64::max)
}

/// Smallest even mode count with recurrence time at least `4 t_max`.
pub fn default_mode_count(half_width: f64, t_max: f64) -> usize {
    let n = (4.0 * t_max * 2.0 * half_width / (2.0 * PI)).ceil() as usize;
    (n + n % 2).max(2)
}

struct BathSystem<'a> {
    bath: &'a DiscreteBath,
}

impl OdeSystem for BathSystem<'_> {
    fn dim(&self) -> usize {
        self.bath.mode_count() + 1
    }

    fn derivative(&self, _t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        let a0 = y[0];
        let mut acc = ZERO;
        for (k, (&g, &d)) in self
            .bath
            .couplings
            .iter()
            .zip(&self.bath.detunings)
            .enumerate()
        {
            let ak = y[k + 1];
            acc += ak * g;
            dydt[k + 1] = Complex64::new(d * ak.im, -d * ak.re) + Complex64::new(0.0, -g) * a0;
        }
        dydt[0] = Complex64::new(acc.im, -acc.re);
    }
}

/// `a0(t)` of the discretized model and diagnostics of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEvolution {
    pub a0: ComplexSeries,
    /// Largest `| |a0|^2 + sum |a_k|^2 - 1 |` over the output grid.
    pub norm_error: f64,
    pub warnings: Vec<BathWarning>,
}

/// Integrates `a0' = -i sum g_k a_k`, `a_k' = -i (w_k - omega0) a_k - i g_k a0`.
pub fn evolve_discrete(
    bath: &DiscreteBath,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<DiscreteEvolution> {
    let sys = BathSystem { bath };
    let mut y0 = vec![ZERO; bath.mode_count() + 1];
    y0[0] = ONE;
    let mut a0 = Vec::with_capacity(grid.len());
    let mut norm_error = 0.0_f64;
    ode::integrate_on_grid(&sys, &y0, grid, tol, |_, y| {
        a0.push(y[0]);
        let norm: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        norm_error = norm_error.max((norm - 1.0).abs());
    })?;
    let mut warnings = bath.warnings.clone();
    if bath.recurrence_time() <= grid.end() {
        warnings.push(BathWarning::Recurrence {
            horizon: bath.recurrence_time(),
            t_max: grid.end(),
        });
    }
    Ok(DiscreteEvolution {
        a0: ComplexSeries::new(*grid, a0)?,
        norm_error,
        warnings,
    })
}

/// Pointwise deviation between two series on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub max_abs: f64,
    pub rms: f64,
}

pub fn compare(a: &ComplexSeries, b: &ComplexSeries) -> Result<Deviation> {
    if !a.grid().matches(b.grid()) {
        return Err(Error::GridMismatch);
    }
    let mut max_abs = 0.0_f64;
    let mut sum = 0.0;
    for (x, y) in a.values().iter().zip(b.values()) {
        let d = (x - y).norm();
        max_abs = max_abs.max(d);
        sum += d * d;
    }
    let n = a.values().len().max(1) as f64;
    Ok(Deviation {
        max_abs,
        rms: (sum / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::DampedJcParams;

    fn baseline() -> SpectralDensity {
        SpectralDensity::single(1.0, 0.2, 0.5)
    }

    #[test]
    fn midpoint_grid() {
        let bath = discretize_bath(&baseline(), 4, 2.0).unwrap();
        assert_eq!(bath.detunings(), &[-1.5, -0.5, 0.5, 1.5]);
        assert_eq!(bath.spacing(), 1.0);
        let sd = SpectralDensity::new(
            10.0,
            vec![crate::spectral::LorentzianTerm::new(1.0, 0.2, 10.5)],
        );
        let abs = discretize_bath(&sd, 4, 2.0).unwrap();
        assert_eq!(abs.frequencies(), vec![8.5, 9.5, 10.5, 11.5]);
        assert_eq!(abs.couplings(), bath.couplings());
    }

    #[test]
    fn sum_rule_converges() {
        let sd = baseline();
        let w = 2000.0;
        let mut prev = f64::INFINITY;
        for n in [20_000, 80_000, 320_000] {
            let bath = discretize_bath(&sd, n, w).unwrap();
            let err = (bath.coupling_sum() - 0.1).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn coarse_bath_is_flagged_not_rejected() {
        let bath = discretize_bath(&baseline(), 2, 40.0).unwrap();
        assert_eq!(bath.mode_count(), 2);
        assert!(bath
            .warnings()
            .iter()
            .any(|w| matches!(w, BathWarning::UnresolvedLinewidth { .. })));
        assert!(bath
            .warnings()
            .iter()
            .any(|w| matches!(w, BathWarning::SumRule { .. })));
    }

    #[test]
    fn resonance_outside_window() {
        assert_eq!(
            discretize_bath(&baseline(), 100, 0.4),
            Err(Error::ResonanceOutsideWindow { index: 0 })
        );
        assert!(discretize_bath(&baseline(), 1, 40.0).is_err());
        assert!(discretize_bath(&baseline(), 10, 0.0).is_err());
    }

    #[test]
    fn uncoupled_bath_keeps_atom_excited() {
        let mut bath = discretize_bath(&baseline(), 50, 10.0).unwrap();
        bath.couplings.iter_mut().for_each(|g| *g = 0.0);
        let grid = TimeGrid::new(5.0, 0.5).unwrap();
        let run = evolve_discrete(&bath, &grid, &Tolerances::default()).unwrap();
        assert!(run.a0.values().iter().all(|z| (z - ONE).norm() < 1e-14));
    }

    #[test]
    fn closed_system_conserves_norm_and_tracks_closed_form() {
        let bath = discretize_bath(&baseline(), 1000, 40.0).unwrap();
        let grid = TimeGrid::new(10.0, 0.1).unwrap();
        let run = evolve_discrete(&bath, &grid, &Tolerances::default()).unwrap();
        assert!(run.norm_error < 1e-10, "{}", run.norm_error);
        let p = DampedJcParams::new(1.0, 0.2, 0.5).unwrap();
        let exact: Vec<_> = grid.times().map(|t| p.amplitudes(t).unwrap().0).collect();
        let exact = ComplexSeries::new(grid, exact).unwrap();
        let dev = compare(&run.a0, &exact).unwrap();
        assert!(dev.max_abs < 1e-2, "{dev:?}");
    }

    #[test]
    fn compare_metrics() {
        let grid = TimeGrid::new(1.0, 0.25).unwrap();
        let a = ComplexSeries::new(grid, vec![ONE; 5]).unwrap();
        assert_eq!(
            compare(&a, &a).unwrap(),
            Deviation {
                max_abs: 0.0,
                rms: 0.0
            }
        );
        let mut v = vec![ONE; 5];
        v[2] += Complex64::new(1e-3, 0.0);
        let b = ComplexSeries::new(grid, v).unwrap();
        let dev = compare(&a, &b).unwrap();
        assert!((dev.max_abs - 1e-3).abs() < 1e-15);
        let other = ComplexSeries::new(TimeGrid::new(1.0, 0.5).unwrap(), vec![ONE; 3]).unwrap();
        assert_eq!(compare(&a, &other), Err(Error::GridMismatch));
    }

    #[test]
    fn defaults() {
        let w = default_half_width(&baseline());
        assert!((w - 20.5).abs() < 1e-12);
        let n = default_mode_count(w, 10.0);
        assert!(2.0 * PI / (2.0 * w / n as f64) >= 40.0);
        assert_eq!(n % 2, 0);
    }
}
