//! Time evolution of the atom + pseudomode system.
//!
//! Three independent routes are provided:
//!
//! * [`evolve_effective`]: the no-jump state under the non-Hermitian
//!   effective Hamiltonian `H_SP - i sum_l lambda_l c_l^dagger c_l`;
//! * [`evolve_lindblad`]: the full master equation on the
//!   `(L + 2)`-dimensional basis `{|e,0>, |g,1_l>, |g,0>}`;
//! * [`solve_memory_kernel`]: the atomic amplitude straight from the
//!   integro-differential equation with the Lorentzian memory kernel.
//!
//! All of them work in the frame rotating at the atomic frequency, so only
//! detunings enter.

use core::cell::RefCell;

use crate::error::{Error, Result};
use crate::grid::{ComplexSeries, TimeGrid};
use crate::matrix::{self, CMatrix};
use crate::ode::{self, OdeSystem};
use crate::prelude::*;
use crate::spectral::{Pseudomode, PseudomodeModel, SpectralDensity};

pub use crate::ode::Tolerances as IntegratorTolerances;

/// Amplitudes at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeState<'a> {
    pub t: f64,
    pub a0: Complex64,
    pub q: &'a [Complex64],
}

impl AmplitudeState<'_> {
    /// `|a0|^2 + sum_l |q_l|^2`
    pub fn excitation(&self) -> f64 {
        self.a0.norm_sqr() + self.q.iter().map(|q| q.norm_sqr()).sum::<f64>()
    }
}

/// No-jump amplitudes `a0(t)`, `q_l(t)` on a uniform grid.
///
/// The amplitudes do not depend on the initial atomic state; `alpha` and
/// `beta` only enter the derived series.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    grid: TimeGrid,
    model: PseudomodeModel,
    a0: Vec<Complex64>,
    // row-major, one row of `mode_count` amplitudes per grid point
    q: Vec<Complex64>,
}

impl AmplitudeTrajectory {
    /// Assembles a trajectory from tabulated amplitudes, e.g. a closed form.
    pub fn from_parts(
        model: PseudomodeModel,
        grid: TimeGrid,
        a0: Vec<Complex64>,
        q: Vec<Complex64>,
    ) -> Result<Self> {
        let l = model.mode_count();
        if a0.len() != grid.len() || q.len() != grid.len() * l {
            return Err(Error::GridMismatch);
        }
        if (a0[0] - ONE).norm() > 1e-12 || q[..l].iter().any(|z| z.norm() > 1e-12) {
            return Err(Error::InvalidArgument(
                "trajectory must start from a0 = 1, q = 0",
            ));
        }
        Ok(Self { grid, model, a0, q })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn model(&self) -> &PseudomodeModel {
        &self.model
    }

    pub fn alpha(&self) -> Complex64 {
        self.model.alpha()
    }

    pub fn beta(&self) -> Complex64 {
        self.model.beta()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn mode_count(&self) -> usize {
        self.model.mode_count()
    }

    pub fn state(&self, k: usize) -> AmplitudeState<'_> {
        let l = self.mode_count();
        AmplitudeState {
            t: self.grid.time(k),
            a0: self.a0[k],
            q: &self.q[k * l..(k + 1) * l],
        }
    }

    pub fn states(&self) -> impl Iterator<Item = AmplitudeState<'_>> + '_ {
        (0..self.len()).map(move |k| self.state(k))
    }

    pub fn a0(&self) -> &[Complex64] {
        &self.a0
    }

    pub fn a0_series(&self) -> ComplexSeries {
        ComplexSeries::new(self.grid, self.a0.clone()).expect("lengths match by construction")
    }

    /// `q_l(t)` for one mode.
    pub fn mode_series(&self, l: usize) -> Vec<Complex64> {
        let n = self.mode_count();
        self.q.iter().skip(l).step_by(n).copied().collect()
    }

    /// Same amplitudes with a different initial atomic state.
    pub fn with_initial_state(&self, alpha: Complex64, beta: Complex64) -> Result<Self> {
        Ok(Self {
            model: self.model.with_initial_state(alpha, beta)?,
            ..self.clone()
        })
    }

    /// Restriction to the first `len` grid points.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len < 2 || len > self.len() {
            return Err(Error::InvalidArgument("truncation length out of range"));
        }
        let l = self.mode_count();
        Ok(Self {
            grid: TimeGrid::with_intervals(self.grid.dt(), len - 1)?,
            model: self.model.clone(),
            a0: self.a0[..len].to_vec(),
            q: self.q[..len * l].to_vec(),
        })
    }

    /// `P0(t) = |alpha|^2 (|a0|^2 + sum_l |q_l|^2) + |beta|^2`, the
    /// probability of no jump up to `t`.
    pub fn survival_probability(&self) -> Vec<f64> {
        let a2 = self.alpha().norm_sqr();
        let b2 = self.beta().norm_sqr();
        self.states().map(|s| a2 * s.excitation() + b2).collect()
    }

    /// `p(t) = sum_l 2 lambda_l |alpha q_l|^2`, the jump-time density.
    pub fn jump_density(&self) -> Vec<f64> {
        let a2 = self.alpha().norm_sqr();
        let modes = self.model.modes();
        self.states()
            .map(|s| {
                a2 * s
                    .q
                    .iter()
                    .zip(modes)
                    .map(|(q, m)| m.decay_rate * q.norm_sqr())
                    .sum::<f64>()
            })
            .collect()
    }

    /// `Pi_p(t) = 1 - P0(t)`, the population already jumped to `|g,0>`.
    pub fn ground_population(&self) -> Vec<f64> {
        self.survival_probability()
            .into_iter()
            .map(|p| 1.0 - p)
            .collect()
    }

    /// Reduced atomic density matrix at every grid point.
    pub fn reduced_atom_state(&self) -> Vec<AtomState> {
        let alpha = self.alpha();
        let beta = self.beta();
        self.a0
            .iter()
            .map(|a0| {
                let excited = (alpha * a0).norm_sqr();
                AtomState {
                    excited,
                    coherence: alpha * beta.conj() * a0,
                    ground: 1.0 - excited,
                }
            })
            .collect()
    }

    /// Unnormalized no-jump state in the basis `{|e,0>, |g,1_l>, |g,0>}`.
    pub fn no_jump_state(&self, k: usize) -> Vec<Complex64> {
        let s = self.state(k);
        let alpha = self.alpha();
        let mut psi = Vec::with_capacity(self.mode_count() + 2);
        psi.push(alpha * s.a0);
        psi.extend(s.q.iter().map(|q| alpha * q));
        psi.push(self.beta());
        psi
    }

    /// `|Psi(t)><Psi(t)| + Pi_p(t) |g,0><g,0|`, the master-equation state
    /// rebuilt from the no-jump trajectory.
    pub fn reconstructed_density(&self, k: usize) -> CMatrix {
        let psi = self.no_jump_state(k);
        let dim = psi.len();
        let mut rho = CMatrix::outer(&psi, &psi);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        rho[(dim - 1, dim - 1)] += Complex64::new(1.0 - norm, 0.0);
        rho
    }
}

/// Reduced state of the atom, `[[excited, coherence], [coherence*, ground]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomState {
    pub excited: f64,
    pub coherence: Complex64,
    pub ground: f64,
}

impl AtomState {
    pub fn trace(&self) -> f64 {
        self.excited + self.ground
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        matrix::hermitian_2x2_eigenvalues(self.excited, self.coherence, self.ground)
    }
}

struct EffectiveSystem<'a> {
    modes: &'a [Pseudomode],
}

impl OdeSystem for EffectiveSystem<'_> {
    fn dim(&self) -> usize {
        self.modes.len() + 1
    }

    fn derivative(&self, _t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        let a0 = y[0];
        let mut coupled = ZERO;
        for (l, m) in self.modes.iter().enumerate() {
            let q = y[l + 1];
            coupled += q * m.coupling;
            let rate = Complex64::new(m.half_width(), m.detuning);
            dydt[l + 1] = -rate * q - I * (a0 * m.coupling);
        }
        dydt[0] = -I * coupled;
    }
}

/// Integrates `i d|Psi>/dt = H_eff |Psi>` from `a0 = 1`, `q_l = 0`.
pub fn evolve_effective(
    model: &PseudomodeModel,
    grid: &TimeGrid,
    tol: &IntegratorTolerances,
) -> Result<AmplitudeTrajectory> {
    let l = model.mode_count();
    let sys = EffectiveSystem {
        modes: model.modes(),
    };
    let mut y0 = vec![ZERO; l + 1];
    y0[0] = ONE;
    let mut a0 = Vec::with_capacity(grid.len());
    let mut q = Vec::with_capacity(grid.len() * l);
    ode::integrate_on_grid(&sys, &y0, grid, tol, |_, y| {
        a0.push(y[0]);
        q.extend_from_slice(&y[1..]);
    })?;
    Ok(AmplitudeTrajectory {
        grid: *grid,
        model: model.clone(),
        a0,
        q,
    })
}

/// Density matrices with the Hermiticity drift removed at every output point.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTrajectory {
    grid: TimeGrid,
    dim: usize,
    data: Vec<Complex64>,
    asymmetry: Vec<f64>,
}

impl DensityTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `L + 2`
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn matrix(&self, k: usize) -> CMatrix {
        let n = self.dim * self.dim;
        CMatrix::from_row_major(self.dim, self.data[k * n..(k + 1) * n].to_vec())
    }

    pub fn trace(&self, k: usize) -> f64 {
        let n = self.dim * self.dim;
        (0..self.dim)
            .map(|i| self.data[k * n + i * self.dim + i].re)
            .sum()
    }

    /// `<e,0| rho |e,0> = |alpha a0|^2`
    pub fn excited_population(&self, k: usize) -> f64 {
        let n = self.dim * self.dim;
        self.data[k * n].re
    }

    /// Frobenius norm of `rho - rho^dagger` before re-symmetrization.
    pub fn asymmetry(&self) -> &[f64] {
        &self.asymmetry
    }
}

struct LindbladSystem {
    dim: usize,
    hamiltonian: CMatrix,
    // (rate, c, c^dagger c)
    channels: Vec<(f64, CMatrix, CMatrix)>,
    scratch: RefCell<[Vec<Complex64>; 2]>,
}

impl LindbladSystem {
    fn new(model: &PseudomodeModel) -> Self {
        let l = model.mode_count();
        let dim = l + 2;
        let ground = dim - 1;
        let mut h = CMatrix::zeros(dim);
        let mut channels = Vec::with_capacity(l);
        for (idx, m) in model.modes().iter().enumerate() {
            let mode = idx + 1;
            h[(mode, mode)] = Complex64::new(m.detuning, 0.0);
            // sigma_+ c_l + sigma_- c_l^dagger couples |e,0> and |g,1_l>
            h[(0, mode)] = Complex64::new(m.coupling, 0.0);
            h[(mode, 0)] = Complex64::new(m.coupling, 0.0);
            let c = CMatrix::unit(dim, ground, mode);
            let cdc = c.adjoint().mul(&c);
            channels.push((m.decay_rate, c, cdc));
        }
        Self {
            dim,
            hamiltonian: h,
            channels,
            scratch: RefCell::new([vec![ZERO; dim * dim], vec![ZERO; dim * dim]]),
        }
    }
}

impl OdeSystem for LindbladSystem {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn derivative(&self, _t: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        let mut scratch = self.scratch.borrow_mut();
        let [left, right] = &mut *scratch;
        let h = self.hamiltonian.as_slice();
        matrix::mul_into(d, h, rho, left);
        matrix::mul_into(d, rho, h, right);
        for i in 0..d * d {
            out[i] = -I * (left[i] - right[i]);
        }
        for (rate, c, cdc) in &self.channels {
            if *rate == 0.0 {
                continue;
            }
            // c rho c^dagger
            matrix::mul_into(d, c.as_slice(), rho, left);
            let cd = c.adjoint();
            matrix::mul_into(d, left, cd.as_slice(), right);
            for i in 0..d * d {
                out[i] += right[i] * *rate;
            }
            // -1/2 {c^dagger c, rho}
            matrix::mul_into(d, cdc.as_slice(), rho, left);
            matrix::mul_into(d, rho, cdc.as_slice(), right);
            for i in 0..d * d {
                out[i] -= (left[i] + right[i]) * (0.5 * rate);
            }
        }
    }
}

/// Integrates the pseudomode master equation
/// `d rho/dt = -i [H_SP, rho] + sum_l 2 lambda_l D[c_l] rho` from the
/// pure initial state `(alpha |e> + beta |g>) |0_P>`.
///
/// The single-excitation basis is closed under both the Hamiltonian and
/// the dissipators, so the truncation is exact.
pub fn evolve_lindblad(
    model: &PseudomodeModel,
    grid: &TimeGrid,
    tol: &IntegratorTolerances,
) -> Result<DensityTrajectory> {
    let sys = LindbladSystem::new(model);
    let dim = sys.dim;
    let mut psi = vec![ZERO; dim];
    psi[0] = model.alpha();
    psi[dim - 1] = model.beta();
    let rho0 = CMatrix::outer(&psi, &psi);
    let mut data = Vec::with_capacity(grid.len() * dim * dim);
    let mut asymmetry = Vec::with_capacity(grid.len());
    ode::integrate_on_grid(&sys, rho0.as_slice(), grid, tol, |_, y| {
        let mut m = CMatrix::from_row_major(dim, y.to_vec());
        asymmetry.push(m.hermitian_defect());
        m.symmetrize();
        data.extend_from_slice(m.as_slice());
    })?;
    Ok(DensityTrajectory {
        grid: *grid,
        dim,
        data,
        asymmetry,
    })
}

/// History treatment in [`solve_memory_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolterraScheme {
    /// Exponential-kernel product integration with one running
    /// accumulator per Lorentzian term, `O(N L)`.
    ProductIntegration,
    /// Literal trapezoidal sum over the whole history, `O(N^2)`.
    HistorySum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolterraOptions {
    /// Largest internal step; refined so it divides the output spacing.
    pub step: f64,
    pub scheme: VolterraScheme,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            scheme: VolterraScheme::ProductIntegration,
        }
    }
}

// integral over [0, h] of exp(-s v) and v exp(-s v)
fn exponential_moments(s: Complex64, h: f64) -> (Complex64, Complex64) {
    let x = s * h;
    if x.norm() < 0.1 {
        let mut e0 = ZERO;
        let mut e1 = ZERO;
        let mut power = ONE;
        let mut fact = 1.0; // (n + 1)!
        for n in 0..20 {
            let nf = n as f64;
            e0 += power / fact;
            e1 += power * (nf + 1.0) / (fact * (nf + 2.0));
            power *= -x;
            fact *= nf + 2.0;
        }
        (e0 * h, e1 * h * h)
    } else {
        let decay = (-x).exp();
        let e0 = (ONE - decay) / s;
        let e1 = (ONE - decay * (ONE + x)) / (s * s);
        (e0, e1)
    }
}

/// Solves `da0/dt = -sum_l (gamma_l lambda_l / 2) int_0^t exp(-(i Delta_l + lambda_l)(t - t')) a0(t') dt'`
/// with `a0(0) = 1` directly, without pseudomodes.
///
/// Both schemes are second order: trapezoidal in the outer derivative
/// and piecewise linear in the history integral.
pub fn solve_memory_kernel(
    sd: &SpectralDensity,
    grid: &TimeGrid,
    opts: &VolterraOptions,
) -> Result<ComplexSeries> {
    sd.ensure_valid()?;
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(Error::InvalidArgument("Volterra step must be positive"));
    }
    let sub = ((grid.dt() / opts.step) - 1e-9).ceil().max(1.0) as usize;
    let h = grid.dt() / sub as f64;
    let steps = (grid.len() - 1) * sub;
    let fine = match opts.scheme {
        VolterraScheme::ProductIntegration => product_integration(sd, h, steps),
        VolterraScheme::HistorySum => history_sum(sd, h, steps),
    };
    let values = fine.into_iter().step_by(sub).collect();
    ComplexSeries::new(*grid, values)
}

fn product_integration(sd: &SpectralDensity, h: f64, steps: usize) -> Vec<Complex64> {
    struct Term {
        weight: f64,
        decay: Complex64,
        w_old: Complex64,
        w_new: Complex64,
        acc: Complex64,
    }
    let mut terms: Vec<Term> = sd
        .terms()
        .iter()
        .map(|t| {
            let s = Complex64::new(t.lambda, t.omega - sd.omega0());
            let (e0, e1) = exponential_moments(s, h);
            Term {
                weight: t.kernel_weight(),
                decay: (-s * h).exp(),
                w_old: e1 / h,
                w_new: e0 - e1 / h,
                acc: ZERO,
            }
        })
        .collect();
    let denom = ONE
        + terms
            .iter()
            .map(|t| t.w_new * (0.5 * h * t.weight))
            .sum::<Complex64>();
    let mut out = Vec::with_capacity(steps + 1);
    let mut a = ONE;
    out.push(a);
    for _ in 0..steps {
        let mut rhs = a;
        for t in &terms {
            rhs -= (t.acc * (ONE + t.decay) + t.w_old * a) * (0.5 * h * t.weight);
        }
        let a_new = rhs / denom;
        for t in &mut terms {
            t.acc = t.decay * t.acc + t.w_old * a + t.w_new * a_new;
        }
        a = a_new;
        out.push(a);
    }
    out
}

fn history_sum(sd: &SpectralDensity, h: f64, steps: usize) -> Vec<Complex64> {
    let kernel: Vec<Complex64> = (0..=steps)
        .map(|m| sd.kernel_unchecked(m as f64 * h))
        .collect();
    let f0 = kernel[0];
    let denom = ONE + f0 * (0.25 * h * h);
    let mut a = Vec::with_capacity(steps + 1);
    a.push(ONE);
    let mut deriv = ZERO;
    for n in 0..steps {
        let mut history = kernel[n + 1] * a[0] * 0.5;
        for j in 1..=n {
            history += kernel[n + 1 - j] * a[j];
        }
        let next = (a[n] + deriv * (0.5 * h) - history * (0.5 * h * h)) / denom;
        deriv = -(history + f0 * next * 0.5) * h;
        a.push(next);
    }
    a
}
