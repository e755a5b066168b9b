//! Independent solution methods compared against each other.

use std::f64::consts::FRAC_1_SQRT_2;

use pseudomode_core::dynamics::{
    evolve_effective, evolve_lindblad, solve_memory_kernel, VolterraOptions, VolterraScheme,
};
use pseudomode_core::oracle::{compare, discretize_bath, evolve_discrete};
use pseudomode_core::{Complex64, DampedJcParams, SpectralDensity, TimeGrid, Tolerances};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[test]
fn effective_ode_matches_closed_form_relatively() {
    let p = DampedJcParams::new(1.0, 0.2, 0.5).unwrap();
    let grid = TimeGrid::new(30.0, 0.01).unwrap();
    let model = p.model(ONE, ZERO).unwrap();
    let traj = evolve_effective(&model, &grid, &Tolerances::default()).unwrap();
    for s in traj.states() {
        let (a0, q) = p.amplitudes(s.t).unwrap();
        let scale = a0.norm().max(q.norm());
        assert!((s.a0 - a0).norm() <= 1e-8 * scale, "t={}", s.t);
        assert!((s.q[0] - q).norm() <= 1e-8 * scale, "t={}", s.t);
    }
}

#[test]
fn coherence_of_superposition() {
    let p = DampedJcParams::new(1.0, 0.2, 0.5).unwrap();
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let model = p.model(h, h).unwrap();
    let grid = TimeGrid::new(30.0, 0.05).unwrap();
    let rho = evolve_lindblad(&model, &grid, &Tolerances::default()).unwrap();
    for (k, t) in grid.times().enumerate() {
        let (a0, _) = p.amplitudes(t).unwrap();
        let m = rho.matrix(k);
        // atom coherence <e|rho_S|g> lives in the |e,0><g,0| element
        let coherence = m[(0, 2)];
        assert!((coherence.norm() - 0.5 * a0.norm()).abs() < 1e-8, "t={t}");
        assert!((rho.trace(k) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn volterra_schemes_agree_with_three_lorentzians() {
    let sd = SpectralDensity::from_detunings([(0.8, 0.3, -0.6), (0.4, 1.0, 0.2), (1.2, 0.15, 1.1)]);
    let grid = TimeGrid::new(15.0, 0.05).unwrap();
    let model = sd.to_pseudomode(ONE, ZERO).unwrap();
    let ode = evolve_effective(&model, &grid, &Tolerances::default()).unwrap();
    let product = solve_memory_kernel(&sd, &grid, &VolterraOptions::default()).unwrap();
    let history = solve_memory_kernel(
        &sd,
        &grid,
        &VolterraOptions {
            step: 2.5e-3,
            scheme: VolterraScheme::HistorySum,
        },
    )
    .unwrap();
    assert!(compare(&product, &ode.a0_series()).unwrap().max_abs < 1e-6);
    assert!(compare(&history, &ode.a0_series()).unwrap().max_abs < 1e-4);
}

#[test]
fn lindblad_matches_wavefunction_for_two_modes() {
    let sd = SpectralDensity::from_detunings([(1.0, 0.3, 0.4), (0.5, 0.8, -1.0)]);
    let alpha = Complex64::new(0.6, 0.0);
    let beta = Complex64::new(0.0, 0.8);
    let model = sd.to_pseudomode(alpha, beta).unwrap();
    let grid = TimeGrid::new(20.0, 0.1).unwrap();
    let traj = evolve_effective(&model, &grid, &Tolerances::default()).unwrap();
    let rho = evolve_lindblad(&model, &grid, &Tolerances::default()).unwrap();
    for k in 0..grid.len() {
        assert!(rho.matrix(k).max_abs_diff(&traj.reconstructed_density(k)) < 1e-8);
    }
}

#[test]
fn discretized_bath_reproduces_two_lorentzians() {
    let sd = SpectralDensity::from_detunings([(1.0, 0.3, 0.4), (0.5, 0.5, -1.0)]);
    let grid = TimeGrid::new(8.0, 0.1).unwrap();
    let bath = discretize_bath(&sd, 3000, 60.0).unwrap();
    assert!(bath.recurrence_time() > 4.0 * grid.end());
    let run = evolve_discrete(&bath, &grid, &Tolerances::default()).unwrap();
    assert!(run.norm_error < 1e-9);
    let model = sd.to_pseudomode(ONE, ZERO).unwrap();
    let pm = evolve_effective(&model, &grid, &Tolerances::default()).unwrap();
    let dev = compare(&run.a0, &pm.a0_series()).unwrap();
    assert!(dev.max_abs < 1e-3, "{dev:?}");
}

#[test]
fn oracle_error_shrinks_with_mode_count_until_truncation_floor() {
    let sd = SpectralDensity::single(1.0, 0.2, 0.5);
    let p = DampedJcParams::new(1.0, 0.2, 0.5).unwrap();
    let grid = TimeGrid::new(10.0, 0.1).unwrap();
    let exact = p.tabulate(ONE, ZERO, &grid).unwrap().a0_series();
    let errs: Vec<f64> = [250, 500, 1000]
        .iter()
        .map(|&n| {
            let bath = discretize_bath(&sd, n, 40.0).unwrap();
            let run = evolve_discrete(&bath, &grid, &Tolerances::default()).unwrap();
            compare(&run.a0, &exact).unwrap().max_abs
        })
        .collect();
    assert!(
        errs[1] < 0.5 * errs[0] && errs[2] < 0.5 * errs[1],
        "{errs:?}"
    );
}
