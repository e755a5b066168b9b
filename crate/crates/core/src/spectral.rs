//! Lorentzian reservoir spectral densities, their memory kernel, and the
//! mapping onto damped pseudomodes.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::prelude::*;
use crate::quad;

/// One Lorentzian `gamma * lambda^2 / ((w - omega)^2 + lambda^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianTerm {
    /// Coupling strength (peak height), > 0.
    pub gamma: f64,
    /// Half width at half maximum, > 0; `1/lambda` is the correlation time.
    pub lambda: f64,
    /// Resonance frequency.
    pub omega: f64,
}

impl LorentzianTerm {
    pub const fn new(gamma: f64, lambda: f64, omega: f64) -> Self {
        Self {
            gamma,
            lambda,
            omega,
        }
    }

    #[inline]
    pub fn density(&self, w: f64) -> f64 {
        let x = w - self.omega;
        let l2 = self.lambda * self.lambda;
        self.gamma * l2 / (x * x + l2)
    }

    /// Weight `gamma * lambda / 2` of the term in the memory kernel.
    #[inline]
    pub fn kernel_weight(&self) -> f64 {
        0.5 * self.gamma * self.lambda
    }

    fn defect(&self) -> Option<&'static str> {
        if !(self.gamma.is_finite() && self.lambda.is_finite() && self.omega.is_finite()) {
            Some("parameters must be finite")
        } else if self.gamma <= 0.0 {
            Some("gamma must be positive")
        } else if self.lambda <= 0.0 {
            Some("lambda must be positive")
        } else {
            None
        }
    }
}

/// How resonance frequencies are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Absolute frequencies together with the atomic frequency `omega0`.
    Absolute,
    /// Detunings from the atom; `omega0` is zero and the absolute frequency
    /// axis is unknown, so negative-frequency checks are skipped.
    Rotating,
}

/// Reservoir spectral density `D(w) = sum_l gamma_l lambda_l^2 / ((w - w_l)^2 + lambda_l^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    omega0: f64,
    terms: Vec<LorentzianTerm>,
    frame: Frame,
}

/// Parameters of [`SpectralDensity::kernel_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuadrature {
    /// Frequencies in `[omega0 - half_width, omega0 + half_width]` are integrated.
    pub half_width: f64,
    /// Accepted bound on the neglected Lorentzian tails plus quadrature error.
    pub tolerance: f64,
}

/// Thresholds for [`SpectralDensity::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Warn when `D(0) / max D` exceeds this.
    pub leakage_threshold: f64,
    /// Warn when `omega_l / lambda_l` is below this.
    pub min_resonance_to_width: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            leakage_threshold: 1e-3,
            min_resonance_to_width: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermFailure {
    pub index: usize,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidationWarning {
    /// `D(0)` is not negligible against the peak value.
    NegativeFrequencyLeakage { ratio: f64 },
    /// Resonance not far above its width.
    BroadResonance { index: usize, ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub failures: Vec<TermFailure>,
    pub warnings: Vec<ValidationWarning>,
    /// `omega_l / lambda_l` per term (absolute frame only).
    pub resonance_to_width: Vec<f64>,
    /// `D(0) / max D` (absolute frame only).
    pub leakage: Option<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

impl SpectralDensity {
    /// Terms with absolute resonance frequencies around the atomic frequency `omega0`.
    pub fn new(omega0: f64, terms: Vec<LorentzianTerm>) -> Self {
        Self {
            omega0,
            terms,
            frame: Frame::Absolute,
        }
    }

    /// Terms given as `(gamma, lambda, delta)` with `delta = omega_l - omega0`.
    pub fn from_detunings(terms: impl IntoIterator<Item = (f64, f64, f64)>) -> Self {
        Self {
            omega0: 0.0,
            terms: terms
                .into_iter()
                .map(|(g, l, d)| LorentzianTerm::new(g, l, d))
                .collect(),
            frame: Frame::Rotating,
        }
    }

    /// Single-term density of the damped Jaynes-Cummings model.
    pub fn single(gamma: f64, lambda: f64, delta: f64) -> Self {
        Self::from_detunings([(gamma, lambda, delta)])
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn terms(&self) -> &[LorentzianTerm] {
        &self.terms
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn detuning(&self, l: usize) -> f64 {
        self.terms[l].omega - self.omega0
    }

    /// `f(0) = sum_l gamma_l lambda_l / 2`.
    pub fn kernel_sum(&self) -> f64 {
        self.terms.iter().map(LorentzianTerm::kernel_weight).sum()
    }

    /// Rejects an empty term list and non-positive `gamma` or `lambda`.
    pub fn ensure_valid(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if !self.omega0.is_finite() {
            return Err(Error::InvalidArgument("omega0 must be finite"));
        }
        for (index, term) in self.terms.iter().enumerate() {
            if let Some(reason) = term.defect() {
                return Err(Error::InvalidTerm { index, reason });
            }
        }
        Ok(())
    }

    pub fn evaluate_density(&self, w: f64) -> f64 {
        self.terms.iter().map(|t| t.density(w)).sum()
    }

    /// Memory kernel `f(t) = sum_l (gamma_l lambda_l / 2) exp(-(i Delta_l + lambda_l) t)`.
    pub fn kernel(&self, t: f64) -> Result<Complex64> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.kernel_unchecked(t))
    }

    pub(crate) fn kernel_unchecked(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| {
                let rate = Complex64::new(term.lambda, term.omega - self.omega0);
                (-rate * t).exp() * term.kernel_weight()
            })
            .sum()
    }

    /// Analytic bound on `1/(2 pi)` times the Lorentzian mass outside
    /// `[omega0 - half_width, omega0 + half_width]`, infinite when a
    /// resonance is not strictly inside the window.
    pub fn kernel_tail_bound(&self, half_width: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let room = half_width - (t.omega - self.omega0).abs();
                if room <= 0.0 {
                    f64::INFINITY
                } else {
                    t.gamma * t.lambda * t.lambda / (PI * room)
                }
            })
            .sum()
    }

    /// Smallest half-width whose tail bound is at most `tolerance`.
    pub fn half_width_for_tail(&self, tolerance: f64) -> f64 {
        let max_offset = self
            .terms
            .iter()
            .map(|t| (t.omega - self.omega0).abs())
            .fold(0.0, f64::max);
        let mass: f64 = self
            .terms
            .iter()
            .map(|t| t.gamma * t.lambda * t.lambda / PI)
            .sum();
        max_offset + mass / tolerance
    }

    /// Memory kernel by direct Fourier quadrature of `D(w)` over a finite
    /// window around `omega0`.
    ///
    /// Fails with [`Error::WindowTooSmall`] when the analytic tail bound of
    /// the truncated Lorentzians exceeds the requested tolerance.
    pub fn kernel_numeric(&self, t: f64, opts: &KernelQuadrature) -> Result<Complex64> {
        self.ensure_valid()?;
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        if !(opts.half_width > 0.0 && opts.tolerance > 0.0) {
            return Err(Error::InvalidArgument(
                "half_width and tolerance must be positive",
            ));
        }
        let tail = self.kernel_tail_bound(opts.half_width);
        if !(tail <= opts.tolerance) {
            return Err(Error::WindowTooSmall {
                tail_bound: tail,
                tolerance: opts.tolerance,
            });
        }
        let lo = -opts.half_width;
        let hi = opts.half_width;
        let mut breaks = vec![lo, hi];
        for term in &self.terms {
            let c = term.omega - self.omega0;
            for k in [-10.0, -1.0, 0.0, 1.0, 10.0] {
                let x = c + k * term.lambda;
                if x > lo && x < hi {
                    breaks.push(x);
                }
            }
        }
        // keep initial panels below a couple of oscillation periods
        if t > 0.0 {
            let width = 4.0 * PI / t;
            let count = ((hi - lo) / width).ceil() as usize;
            if count > 1 {
                for k in 1..count {
                    breaks.push(lo + k as f64 * (hi - lo) / count as f64);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        let budget = (opts.tolerance - tail).max(0.1 * opts.tolerance);
        let q = quad::adaptive(
            |x: f64| {
                let d = self.evaluate_density(x + self.omega0);
                Complex64::from_polar(d, -x * t)
            },
            &breaks,
            budget * 2.0 * PI,
            4 * breaks.len() + 200_000,
        )?;
        Ok(q.value / (2.0 * PI))
    }

    /// Physical sanity checks; never fails, reports instead.
    pub fn validate(&self, opts: &ValidationOptions) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (index, term) in self.terms.iter().enumerate() {
            if let Some(reason) = term.defect() {
                report.failures.push(TermFailure { index, reason });
            }
        }
        if self.terms.is_empty() {
            report.failures.push(TermFailure {
                index: 0,
                reason: "no Lorentzian terms",
            });
        }
        if !report.is_valid() || self.frame == Frame::Rotating {
            return report;
        }
        for (index, term) in self.terms.iter().enumerate() {
            let ratio = term.omega / term.lambda;
            report.resonance_to_width.push(ratio);
            if ratio < opts.min_resonance_to_width {
                report
                    .warnings
                    .push(ValidationWarning::BroadResonance { index, ratio });
            }
        }
        let peak = self.peak_density();
        let ratio = self.evaluate_density(0.0) / peak;
        report.leakage = Some(ratio);
        if ratio > opts.leakage_threshold {
            report
                .warnings
                .push(ValidationWarning::NegativeFrequencyLeakage { ratio });
        }
        report
    }

    /// Maximum of `D`, located by golden-section search around each peak.
    pub fn peak_density(&self) -> f64 {
        let golden = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut best = 0.0_f64;
        for term in &self.terms {
            let (mut a, mut b) = (
                term.omega - 2.0 * term.lambda,
                term.omega + 2.0 * term.lambda,
            );
            for _ in 0..80 {
                let x1 = b - golden * (b - a);
                let x2 = a + golden * (b - a);
                if self.evaluate_density(x1) < self.evaluate_density(x2) {
                    a = x1;
                } else {
                    b = x2;
                }
            }
            best = best
                .max(self.evaluate_density(0.5 * (a + b)))
                .max(self.evaluate_density(term.omega));
        }
        best
    }

    /// Maps every term onto a damped pseudomode and attaches the initial
    /// atomic state `alpha |e> + beta |g>`.
    pub fn to_pseudomode(&self, alpha: Complex64, beta: Complex64) -> Result<PseudomodeModel> {
        self.ensure_valid()?;
        let modes = self
            .terms
            .iter()
            .map(|t| Pseudomode {
                detuning: t.omega - self.omega0,
                coupling: (0.5 * t.gamma * t.lambda).sqrt(),
                decay_rate: 2.0 * t.lambda,
            })
            .collect();
        PseudomodeModel::new(modes, alpha, beta)
    }
}

/// One pseudomode in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pseudomode {
    /// `Delta_l = omega_l - omega0`.
    pub detuning: f64,
    /// Atom-pseudomode coupling `g_l = sqrt(gamma_l lambda_l / 2)`.
    pub coupling: f64,
    /// Leak rate `2 lambda_l` into the Markovian reservoir.
    pub decay_rate: f64,
}

impl Pseudomode {
    /// `lambda_l`, half the leak rate.
    #[inline]
    pub fn half_width(&self) -> f64 {
        0.5 * self.decay_rate
    }

    /// Inverse map back to the Lorentzian `(gamma, lambda, delta)`.
    pub fn lorentzian(&self) -> (f64, f64, f64) {
        let lambda = self.half_width();
        (
            2.0 * self.coupling * self.coupling / lambda,
            lambda,
            self.detuning,
        )
    }
}

/// Atom coupled to `L` pseudomodes, plus the initial atomic amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudomodeModel {
    modes: Vec<Pseudomode>,
    alpha: Complex64,
    beta: Complex64,
}

pub(crate) const NORM_TOLERANCE: f64 = 1e-12;

impl PseudomodeModel {
    /// Zero couplings and zero leak rates are accepted (decoupled and
    /// unitary limits); the initial state must be normalized to `1e-12`.
    pub fn new(modes: Vec<Pseudomode>, alpha: Complex64, beta: Complex64) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        for (index, m) in modes.iter().enumerate() {
            if !(m.detuning.is_finite() && m.coupling.is_finite() && m.decay_rate.is_finite()) {
                return Err(Error::InvalidTerm {
                    index,
                    reason: "parameters must be finite",
                });
            }
            if m.coupling < 0.0 || m.decay_rate < 0.0 {
                return Err(Error::InvalidTerm {
                    index,
                    reason: "coupling and decay rate must be non-negative",
                });
            }
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
            return Err(Error::Unnormalized { norm });
        }
        Ok(Self { modes, alpha, beta })
    }

    pub fn modes(&self) -> &[Pseudomode] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn with_initial_state(&self, alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::new(self.modes.clone(), alpha, beta)
    }

    /// Rebuilds the Lorentzian sum, placing resonances at `omega0 + Delta_l`.
    /// Fails when a mode has zero leak rate.
    pub fn to_spectral_density(&self, omega0: f64) -> Result<SpectralDensity> {
        let mut terms = Vec::with_capacity(self.modes.len());
        for (index, m) in self.modes.iter().enumerate() {
            if m.decay_rate <= 0.0 {
                return Err(Error::InvalidTerm {
                    index,
                    reason: "zero leak rate has no Lorentzian counterpart",
                });
            }
            let (gamma, lambda, delta) = m.lorentzian();
            terms.push(LorentzianTerm::new(gamma, lambda, omega0 + delta));
        }
        Ok(SpectralDensity::new(omega0, terms))
    }

    /// Eigenvalues of the no-jump amplitude generator, i.e. the roots of
    /// `z + sum_l g_l^2 / (z + lambda_l + i Delta_l) = 0`.
    pub fn amplitude_eigenvalues(&self) -> Vec<Complex64> {
        let shifts: Vec<Complex64> = self
            .modes
            .iter()
            .map(|m| Complex64::new(m.half_width(), m.detuning))
            .collect();
        let weights: Vec<f64> = self.modes.iter().map(|m| m.coupling * m.coupling).collect();
        crate::poly::resolvent_roots(&shifts, &weights)
    }

    /// Slowest decay rate of squared amplitudes, `2 |max Re z|`; zero or
    /// negative when some amplitude does not decay.
    pub fn population_decay_rate(&self) -> f64 {
        let max_re = self
            .amplitude_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        -2.0 * max_re
    }
}
