//! Closed-form damped Jaynes-Cummings model: one Lorentzian, one pseudomode.
//!
//! With `s = lambda + i Delta` and `d = sqrt(s^2 - 2 gamma lambda)` the
//! amplitude equations have eigenvalues `(-s +- d) / 2`. Everything below is
//! even in `d`, so the branch of the square root is immaterial; the
//! principal branch (`Re d >= 0`, and `Im d >= 0` when `Re d = 0`) is used.

use core::f64::consts::PI;

use crate::dynamics::AmplitudeTrajectory;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::prelude::*;
use crate::spectral::{PseudomodeModel, SpectralDensity};

/// Below this value of `|d| t` the hyperbolic functions are expanded.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Parameters `(gamma, lambda, Delta)` of the damped Jaynes-Cummings model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedJcParams {
    gamma: f64,
    lambda: f64,
    delta: f64,
    d: Complex64,
}

impl DampedJcParams {
    pub fn new(gamma: f64, lambda: f64, delta: f64) -> Result<Self> {
        if !(gamma.is_finite() && lambda.is_finite() && delta.is_finite()) {
            return Err(Error::InvalidTerm {
                index: 0,
                reason: "parameters must be finite",
            });
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidTerm {
                index: 0,
                reason: "gamma must be positive",
            });
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidTerm {
                index: 0,
                reason: "lambda must be positive",
            });
        }
        let s = Complex64::new(lambda, delta);
        let mut d = (s * s - 2.0 * gamma * lambda).sqrt();
        if d.re < 0.0 || (d.re == 0.0 && d.im < 0.0) {
            d = -d;
        }
        Ok(Self {
            gamma,
            lambda,
            delta,
            d,
        })
    }

    /// Parameters of a single-mode pseudomode model.
    pub fn from_model(model: &PseudomodeModel) -> Result<Self> {
        if model.mode_count() != 1 {
            return Err(Error::InvalidArgument(
                "closed forms exist for a single Lorentzian only",
            ));
        }
        let (gamma, lambda, delta) = model.modes()[0].lorentzian();
        Self::new(gamma, lambda, delta)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `lambda + i Delta`
    pub fn s(&self) -> Complex64 {
        Complex64::new(self.lambda, self.delta)
    }

    /// `d = sqrt((lambda + i Delta)^2 - 2 gamma lambda)`, principal branch.
    pub fn d(&self) -> Complex64 {
        self.d
    }

    /// `(-s + d) / 2` and `(-s - d) / 2`.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let s = self.s();
        [(-s + self.d) * 0.5, (-s - self.d) * 0.5]
    }

    pub fn spectral_density(&self) -> SpectralDensity {
        SpectralDensity::single(self.gamma, self.lambda, self.delta)
    }

    pub fn model(&self, alpha: Complex64, beta: Complex64) -> Result<PseudomodeModel> {
        self.spectral_density().to_pseudomode(alpha, beta)
    }

    /// `(a0(t), q(t))` with `a0(0) = 1`, `q(0) = 0`.
    pub fn amplitudes(&self, t: f64) -> Result<(Complex64, Complex64)> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.amplitudes_for_root(self.d, t))
    }

    fn amplitudes_for_root(&self, d: Complex64, t: f64) -> (Complex64, Complex64) {
        let s = self.s();
        let strength = (2.0 * self.gamma * self.lambda).sqrt();
        if d.norm() * t < SERIES_THRESHOLD {
            // cosh(dt/2) and sinh(dt/2)/d to second order in d t
            let z = d * d * t * t;
            let cosh = ONE + z / 8.0;
            let sinh_over_d = (ONE + z / 24.0) * (0.5 * t);
            let common = (-s * (0.5 * t)).exp();
            let a0 = common * (cosh + s * sinh_over_d);
            let q = -I * strength * common * sinh_over_d;
            return (a0, q);
        }
        let plus = ((-s + d) * (0.5 * t)).exp();
        let minus = ((-s - d) * (0.5 * t)).exp();
        let ratio = s / d;
        let a0 = ((ONE + ratio) * plus + (ONE - ratio) * minus) * 0.5;
        let q = -I * strength / (d * 2.0) * (plus - minus);
        (a0, q)
    }

    /// `p(t) = (2 |alpha|^2 gamma lambda^2 / |d|^2) e^{-lambda t} (cosh(Re d t) - cos(Im d t))`.
    pub fn jump_density(&self, alpha: Complex64, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let a2 = alpha.norm_sqr();
        let (x, y) = (self.d.re, self.d.im);
        let d2 = self.d.norm_sqr();
        let base = 2.0 * a2 * self.gamma * self.lambda * self.lambda;
        if self.d.norm() * t < SERIES_THRESHOLD {
            let t2 = t * t;
            let bracket = 0.5 * t2 + t2 * t2 * (x * x - y * y) / 24.0;
            return Ok(base * (-self.lambda * t).exp() * bracket);
        }
        let lam = self.lambda;
        let cosh_part = 0.5 * (((x - lam) * t).exp() + (-(x + lam) * t).exp());
        let cos_part = (-lam * t).exp() * (y * t).cos();
        Ok((base / d2 * (cosh_part - cos_part)).max(0.0))
    }

    /// Curves obtained by replacing the oscillating factor of `p(t)` by
    /// `+1` (upper) and `-1` (lower), as `(lower, upper)`.
    pub fn jump_density_envelopes(&self, alpha: Complex64, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let d2 = self.d.norm_sqr();
        if d2 < 1e-300 {
            let p = self.jump_density(alpha, t)?;
            return Ok((p, p));
        }
        let base = 2.0 * alpha.norm_sqr() * self.gamma * self.lambda * self.lambda / d2;
        let (x, lam) = (self.d.re, self.lambda);
        let cosh_part = 0.5 * (((x - lam) * t).exp() + (-(x + lam) * t).exp());
        let decay = (-lam * t).exp();
        Ok((base * (cosh_part - decay), base * (cosh_part + decay)))
    }

    /// `P0(t) = |alpha|^2 (|a0|^2 + |q|^2) + |beta|^2`.
    pub fn survival_probability(&self, alpha: Complex64, beta: Complex64, t: f64) -> Result<f64> {
        let (a0, q) = self.amplitudes(t)?;
        Ok(alpha.norm_sqr() * (a0.norm_sqr() + q.norm_sqr()) + beta.norm_sqr())
    }

    /// `n`-th zero `2 pi n / sqrt(2 gamma lambda - lambda^2)` of the jump
    /// density. Only exists on resonance with `lambda < 2 gamma`; otherwise
    /// `p(t) > 0` for all `t > 0`.
    pub fn p_zero(&self, n: u32) -> Result<f64> {
        if self.delta.abs() > 1e-12 * (self.gamma + self.lambda) {
            return Err(Error::Precondition(
                "jump density has interior zeros only at zero detuning",
            ));
        }
        let w2 = 2.0 * self.gamma * self.lambda - self.lambda * self.lambda;
        if !(w2 > 0.0) {
            return Err(Error::Precondition(
                "jump density has interior zeros only for lambda < 2 gamma",
            ));
        }
        Ok(2.0 * PI * n as f64 / w2.sqrt())
    }

    /// `(<t_S>, <t_P>) = ((1 + (Delta/lambda)^2)/gamma + 1/(2 lambda), 1/(2 lambda))`.
    pub fn expected_times(&self) -> (f64, f64) {
        let r = self.delta / self.lambda;
        let tp = 0.5 / self.lambda;
        ((1.0 + r * r) / self.gamma + tp, tp)
    }

    /// Generating function `chi(w) = integral of p(t) e^{i w t} over t > 0` at `alpha = 1`.
    pub fn generating_function(&self, w: f64) -> Complex64 {
        let (g, l, dl) = (self.gamma, self.lambda, self.delta);
        let z = Complex64::new(l, -w);
        let z2 = z * z;
        let denom = z2 * z2 - (l * l - dl * dl - 2.0 * g * l) * z2 - (dl * l) * (dl * l);
        z * (2.0 * g * l * l) / denom
    }

    /// Mean and variance of the jump time.
    pub fn moments(&self) -> (f64, f64) {
        let (g, l) = (self.gamma, self.lambda);
        let r2 = (self.delta / l) * (self.delta / l);
        let mean = (1.0 + r2) / g + 1.0 / l;
        let var = (1.0 + r2) * (1.0 + r2) / (g * g) - (1.0 - 3.0 * r2) / (g * l) + 1.0 / (l * l);
        (mean, var)
    }

    /// `Lambda = (var - mean^2) / mean^2 = -(3 lambda^2 - Delta^2) gamma lambda / (lambda^2 + gamma lambda + Delta^2)^2`.
    pub fn lambda_metric(&self) -> f64 {
        let (g, l, dl) = (self.gamma, self.lambda, self.delta);
        let den = l * l + g * l + dl * dl;
        -(3.0 * l * l - dl * dl) * g * l / (den * den)
    }

    /// Width `|Delta| / sqrt(3)` at which `Lambda` changes sign.
    pub fn sign_change_width(&self) -> f64 {
        self.delta.abs() / 3.0_f64.sqrt()
    }

    /// Tabulates the closed form as an [`AmplitudeTrajectory`].
    pub fn tabulate(
        &self,
        alpha: Complex64,
        beta: Complex64,
        grid: &TimeGrid,
    ) -> Result<AmplitudeTrajectory> {
        let model = self.model(alpha, beta)?;
        let mut a0 = Vec::with_capacity(grid.len());
        let mut q = Vec::with_capacity(grid.len());
        for t in grid.times() {
            let (a, b) = self.amplitudes_for_root(self.d, t);
            a0.push(a);
            q.push(b);
        }
        AmplitudeTrajectory::from_parts(model, *grid, a0, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn baseline() -> DampedJcParams {
        DampedJcParams::new(1.0, 0.2, 0.5).unwrap()
    }

    #[test]
    fn initial_condition() {
        let (a0, q) = baseline().amplitudes(0.0).unwrap();
        assert_eq!(a0, ONE);
        assert_eq!(q, ZERO);
        assert_eq!(baseline().jump_density(ONE, 0.0).unwrap(), 0.0);
        assert!(baseline().amplitudes(-1.0).is_err());
    }

    #[test]
    fn resonant_pseudomode_population() {
        let p = DampedJcParams::new(1.0, 0.2, 0.0).unwrap();
        assert!((p.d() - Complex64::new(0.0, 0.6)).norm() < 1e-15);
        for k in 0..300 {
            let t = k as f64 * 0.1;
            let (_, q) = p.amplitudes(t).unwrap();
            let expected = 0.4 / 0.36 * (-0.2 * t).exp() * (0.3 * t).sin().powi(2);
            assert!((q.norm_sqr() - expected).abs() < 1e-14);
        }
        // first maximum of sin^2(|d| t / 2) sits at pi / 0.6
        let t_peak = PI / 0.6;
        assert!((t_peak - 5.235_987_755_982_989).abs() < 1e-12);
    }

    #[test]
    fn critical_damping_limit() {
        // Delta = 0 and lambda = 2 gamma gives d = 0
        let p = DampedJcParams::new(1.0, 2.0, 0.0).unwrap();
        assert_eq!(p.d(), ZERO);
        for t in [0.0, 0.3, 1.0, 4.0] {
            let (a0, q) = p.amplitudes(t).unwrap();
            let env = (-t).exp();
            assert!((a0 - Complex64::new(env * (1.0 + t), 0.0)).norm() < 1e-14);
            assert!((q - Complex64::new(0.0, -2.0 * 0.5 * t * env)).norm() < 1e-14);
        }
    }

    #[test]
    fn resonance_density_formula() {
        let p = DampedJcParams::new(1.0, 0.2, 0.0).unwrap();
        let alpha = Complex64::new(0.6, 0.3);
        let a2 = alpha.norm_sqr();
        for k in 0..200 {
            let t = k as f64 * 0.17;
            let expected = 2.0 * a2 * 0.2 / (2.0 - 0.2)
                * (-0.2 * t).exp()
                * (1.0 - ((0.4_f64 - 0.04).sqrt() * t).cos());
            assert!((p.jump_density(alpha, t).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn density_equals_leak_of_pseudomode_population() {
        let p = baseline();
        for k in 0..400 {
            let t = k as f64 * 0.1;
            let (_, q) = p.amplitudes(t).unwrap();
            let direct = 2.0 * 0.2 * q.norm_sqr();
            assert!((p.jump_density(ONE, t).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn zeros_on_resonance() {
        let p = DampedJcParams::new(1.0, 0.2, 0.0).unwrap();
        assert_eq!(p.p_zero(0).unwrap(), 0.0);
        assert!((p.p_zero(1).unwrap() - 10.471_975_511_965_976).abs() < 1e-12);
        assert!(DampedJcParams::new(1.0, 3.0, 0.0)
            .unwrap()
            .p_zero(1)
            .is_err());
        assert!(baseline().p_zero(1).is_err());
    }

    #[test]
    fn expected_times_closed_form() {
        let (ts, tp) = baseline().expected_times();
        assert!((ts - 9.75).abs() < 1e-12);
        assert!((tp - 2.5).abs() < 1e-12);
        let (ts0, _) = DampedJcParams::new(2.0, 0.4, 0.0).unwrap().expected_times();
        assert!((ts0 - (0.5 + 1.25)).abs() < 1e-12);
        let (ts_m, tp_m) = DampedJcParams::new(1.0, 1e8, 0.3).unwrap().expected_times();
        assert!((ts_m - 1.0).abs() < 1e-7 && tp_m < 1e-7);
    }

    #[test]
    fn generating_function_normalization_and_symmetry() {
        let p = baseline();
        assert!((p.generating_function(0.0) - ONE).norm() < 1e-15);
        for w in [0.05, 0.3, 2.0] {
            let a = p.generating_function(w);
            let b = p.generating_function(-w);
            assert!((a - b.conj()).norm() < 1e-15);
        }
        assert!(p.generating_function(1e4).norm() < 1e-6);
    }

    #[test]
    fn moment_values() {
        let (mean, var) = baseline().moments();
        assert!((mean - 12.25).abs() < 1e-12);
        assert!((var - 166.3125).abs() < 1e-10);
        let (ts, tp) = baseline().expected_times();
        assert!((mean - ts - tp).abs() <= 1e-12);
        let (m, v) = DampedJcParams::new(2.0, 1e7, 0.5).unwrap().moments();
        assert!((m - 0.5).abs() < 1e-6 && (v - 0.25).abs() < 1e-6);
    }

    #[test]
    fn lambda_metric_values() {
        let p = baseline();
        assert!((p.lambda_metric() - 0.026 / 0.2401).abs() < 1e-14);
        assert!((p.lambda_metric() - 0.108_288).abs() < 1e-6);
        let (mean, var) = p.moments();
        let via_moments = (var - mean * mean) / (mean * mean);
        assert!((via_moments - p.lambda_metric()).abs() < 1e-10 * p.lambda_metric().abs());
        let at_zero = DampedJcParams::new(1.3, 0.5 / 3.0_f64.sqrt(), 0.5).unwrap();
        assert!(at_zero.lambda_metric().abs() < 1e-15);
        assert!(DampedJcParams::new(0.7, 0.9, 0.0).unwrap().lambda_metric() < 0.0);
    }

    proptest! {
        #[test]
        fn d_squared_identity(g in 0.01f64..10.0, l in 0.01f64..10.0, dl in -10.0f64..10.0) {
            let p = DampedJcParams::new(g, l, dl).unwrap();
            let s = p.s();
            let lhs = p.d() * p.d();
            let rhs = s * s - 2.0 * g * l;
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
            for z in p.eigenvalues() {
                prop_assert!(z.re < 0.0);
            }
        }

        #[test]
        fn branch_independence(g in 0.05f64..5.0, l in 0.05f64..5.0, dl in -5.0f64..5.0, t in 0.0f64..30.0) {
            let p = DampedJcParams::new(g, l, dl).unwrap();
            let (a, q) = p.amplitudes_for_root(p.d(), t);
            let (b, r) = p.amplitudes_for_root(-p.d(), t);
            prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
            prop_assert!((q - r).norm() <= 1e-10 * (1.0 + q.norm()));
        }

        #[test]
        fn lambda_metric_matches_moments(g in 0.05f64..5.0, l in 0.05f64..5.0, dl in -5.0f64..5.0) {
            let p = DampedJcParams::new(g, l, dl).unwrap();
            let (mean, var) = p.moments();
            let via = (var - mean * mean) / (mean * mean);
            let closed = p.lambda_metric();
            prop_assert!((via - closed).abs() <= 1e-10 * closed.abs().max(1e-3));
        }
    }
}
