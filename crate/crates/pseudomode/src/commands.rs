//! Subcommand implementations. Each returns the tables to write; nothing
//! touches the filesystem here.

use pseudomode_core::analytic::DampedJcParams;
use pseudomode_core::dynamics::evolve_effective;
use pseudomode_core::jumps::{estimate_stats, JumpSampler};
use pseudomode_core::oracle::{self, BathWarning};
use pseudomode_core::stats;
use pseudomode_core::{AmplitudeTrajectory, ComplexSeries, TimeGrid};

use crate::config::{ConfigError, SimulationConfig};
use crate::output::{Artifact, Cell, Table};
use crate::sampling::sample_parallel;

/// Panels of the built-in figure cover `[0, FIGURE_PANEL_END]`.
pub const FIGURE_PANEL_END: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Pseudomode trajectory: amplitudes, P0, p and Pi_p on the output grid
    Simulate,
    /// Closed-form single-Lorentzian table and summary
    Analytic,
    /// Monte Carlo jump times and their statistics
    Sample,
    /// Discretized-reservoir reference compared with the pseudomode a0
    Oracle,
    /// Expected times and the Markovianity classification
    Stats,
    /// Population and jump-density panels at gamma=1, lambda=0.2, Delta=0.5
    Figure2,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Analytic => "analytic",
            Command::Sample => "sample",
            Command::Oracle => "oracle",
            Command::Stats => "stats",
            Command::Figure2 => "figure2",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] pseudomode_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 1 for invalid input, 2 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Core(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Sampler threads; `None` uses every core.
    pub workers: Option<usize>,
}

pub fn run(
    cmd: Command,
    cfg: &SimulationConfig,
    opts: &RunOptions,
) -> Result<Vec<Artifact>, RunError> {
    match cmd {
        Command::Simulate => simulate(cfg),
        Command::Analytic => analytic(cfg),
        Command::Sample => sample(cfg, opts),
        Command::Oracle => oracle_cmd(cfg),
        Command::Stats => stats_cmd(cfg),
        Command::Figure2 => figure2(cfg),
    }
}

fn stem(cmd: &str, part: Option<&str>, cfg: &SimulationConfig) -> String {
    match part {
        Some(p) => format!("{cmd}-{p}-{}", cfg.hash()),
        None => format!("{cmd}-{}", cfg.hash()),
    }
}

fn grid(cfg: &SimulationConfig) -> Result<TimeGrid, RunError> {
    Ok(TimeGrid::new(cfg.grid.t_max, cfg.grid.output_dt)?)
}

fn trajectory(cfg: &SimulationConfig) -> Result<AmplitudeTrajectory, RunError> {
    let model = cfg.spectral.to_pseudomode(cfg.alpha, cfg.beta)?;
    Ok(evolve_effective(&model, &grid(cfg)?, &cfg.integrator)?)
}

fn single_lorentzian(cfg: &SimulationConfig) -> Result<DampedJcParams, RunError> {
    let terms = cfg.spectral.terms();
    if terms.len() != 1 {
        return Err(RunError::Usage(format!(
            "closed forms need exactly one Lorentzian term, config has {}",
            terms.len()
        )));
    }
    Ok(DampedJcParams::new(
        terms[0].gamma,
        terms[0].lambda,
        cfg.spectral.detuning(0),
    )?)
}

/// `t, re_a0, im_a0, abs2_a0, (re_q, im_q, abs2_q) per mode, P0, p, Pi_p`.
pub fn trajectory_table(traj: &AmplitudeTrajectory) -> Table {
    let l = traj.mode_count();
    let mut cols = vec![
        "t".to_string(),
        "re_a0".into(),
        "im_a0".into(),
        "abs2_a0".into(),
    ];
    for m in 1..=l {
        cols.push(format!("re_q{m}"));
        cols.push(format!("im_q{m}"));
        cols.push(format!("abs2_q{m}"));
    }
    cols.extend(["P0".to_string(), "p".into(), "Pi_p".into()]);
    let mut table = Table::new(cols);
    let p0 = traj.survival_probability();
    let p = traj.jump_density();
    for (k, s) in traj.states().enumerate() {
        let mut row: Vec<Cell> = vec![
            s.t.into(),
            s.a0.re.into(),
            s.a0.im.into(),
            s.a0.norm_sqr().into(),
        ];
        for q in s.q {
            row.extend([q.re.into(), q.im.into(), q.norm_sqr().into()]);
        }
        row.extend([p0[k].into(), p[k].into(), (1.0 - p0[k]).into()]);
        table.push(row);
    }
    table
}

fn simulate(cfg: &SimulationConfig) -> Result<Vec<Artifact>, RunError> {
    let traj = trajectory(cfg)?;
    Ok(vec![Artifact {
        stem: stem("simulate", None, cfg),
        table: trajectory_table(&traj),
    }])
}

fn analytic(cfg: &SimulationConfig) -> Result<Vec<Artifact>, RunError> {
    let params = single_lorentzian(cfg)?;
    let grid = grid(cfg)?;
    let traj = params.tabulate(cfg.alpha, cfg.beta, &grid)?;
    let mut table = Table::new([
        "t", "re_a0", "im_a0", "re_q", "im_q", "abs2_a0", "abs2_q", "P0", "p", "p_lower", "p_upper",
    ]);
    let p0 = traj.survival_probability();
    for (k, s) in traj.states().enumerate() {
        let p = params.jump_density(cfg.alpha, s.t)?;
        let (lo, hi) = params.jump_density_envelopes(cfg.alpha, s.t)?;
        let q = s.q[0];
        table.push(vec![
            s.t.into(),
            s.a0.re.into(),
            s.a0.im.into(),
            q.re.into(),
            q.im.into(),
            s.a0.norm_sqr().into(),
            q.norm_sqr().into(),
            p0[k].into(),
            p.into(),
            lo.into(),
            hi.into(),
        ]);
    }
    let (t_s, t_p) = params.expected_times();
    let (mean, var) = params.moments();
    let d = params.d();
    let mut fields: Vec<(String, Cell)> = vec![
        ("gamma".into(), params.gamma().into()),
        ("lambda".into(), params.lambda().into()),
        ("delta".into(), params.delta().into()),
        ("re_d".into(), d.re.into()),
        ("im_d".into(), d.im.into()),
        ("t_S".into(), t_s.into()),
        ("t_P".into(), t_p.into()),
        ("mean".into(), mean.into()),
        ("variance".into(), var.into()),
        ("Lambda".into(), params.lambda_metric().into()),
        ("lambda0".into(), params.sign_change_width().into()),
    ];
    let first_zero = params
        .p_zero(1)
        .map(Cell::from)
        .unwrap_or_else(|_| "none".into());
    fields.push(("first_zero".into(), first_zero));
    Ok(vec![
        Artifact {
            stem: stem("analytic", None, cfg),
            table,
        },
        Artifact {
            stem: stem("analytic", Some("summary"), cfg),
            table: Table::record(fields),
        },
    ])
}

fn sample(cfg: &SimulationConfig, opts: &RunOptions) -> Result<Vec<Artifact>, RunError> {
    let traj = trajectory(cfg)?;
    let s = cfg.sampler;
    let sampler = JumpSampler::new(&traj, s.window, s.seed)?;
    let set = sample_parallel(&sampler, s.n, opts.workers)
        .map_err(|e| RunError::Usage(format!("cannot start sampler threads: {e}")))?;
    let est = estimate_stats(&set)?;
    let mut samples = Table::new(["t"]);
    for &t in set.samples() {
        samples.push(vec![t.into()]);
    }
    let summary = Table::record(vec![
        ("n_total".into(), set.n_total().into()),
        ("jumps".into(), est.count.into()),
        ("censored".into(), set.censored_count().into()),
        ("censored_fraction".into(), set.censored_fraction().into()),
        ("P0_T".into(), set.survival_at_window().into()),
        (
            "censoring_consistent".into(),
            set.censoring_consistent().into(),
        ),
        ("T".into(), set.window().into()),
        ("seed".into(), set.master_seed().into()),
        ("mean".into(), est.mean.into()),
        ("variance".into(), est.variance.into()),
        ("stderr".into(), est.std_error.into()),
    ]);
    Ok(vec![
        Artifact {
            stem: stem("sample", None, cfg),
            table: samples,
        },
        Artifact {
            stem: stem("sample", Some("summary"), cfg),
            table: summary,
        },
    ])
}

fn describe(w: &BathWarning) -> String {
    match w {
        BathWarning::SumRule {
            discrete,
            continuum,
        } => format!("sum of g_k^2 is {discrete:.6e}, continuum value {continuum:.6e}"),
        BathWarning::UnresolvedLinewidth {
            spacing,
            min_half_width,
        } => format!("mode spacing {spacing:.3e} exceeds linewidth {min_half_width:.3e}"),
        BathWarning::Recurrence { horizon, t_max } => {
            format!("recurrence time {horizon:.3e} inside the window {t_max:.3e}")
        }
    }
}

fn oracle_cmd(cfg: &SimulationConfig) -> Result<Vec<Artifact>, RunError> {
    let grid = grid(cfg)?;
    let w = cfg
        .oracle
        .half_width
        .unwrap_or_else(|| oracle::default_half_width(&cfg.spectral));
    let n = cfg
        .oracle
        .modes
        .unwrap_or_else(|| oracle::default_mode_count(w, grid.end()));
    let bath = oracle::discretize_bath(&cfg.spectral, n, w)?;
    let run = oracle::evolve_discrete(&bath, &grid, &cfg.integrator)?;
    let traj = trajectory(cfg)?;
    let pm = ComplexSeries::new(grid, traj.a0().to_vec())?;
    let dev = oracle::compare(&run.a0, &pm)?;
    let mut table = Table::new([
        "t",
        "re_a0_oracle",
        "im_a0_oracle",
        "re_a0_pseudomode",
        "im_a0_pseudomode",
        "abs_dev",
    ]);
    for ((t, a), b) in run.a0.iter().zip(pm.values()) {
        table.push(vec![
            t.into(),
            a.re.into(),
            a.im.into(),
            b.re.into(),
            b.im.into(),
            (a - b).norm().into(),
        ]);
    }
    let warnings: Vec<String> = run.warnings.iter().map(describe).collect();
    let summary = Table::record(vec![
        ("N".into(), n.into()),
        ("W".into(), w.into()),
        ("spacing".into(), bath.spacing().into()),
        ("recurrence_time".into(), bath.recurrence_time().into()),
        ("max_abs_dev".into(), dev.max_abs.into()),
        ("rms_dev".into(), dev.rms.into()),
        ("norm_error".into(), run.norm_error.into()),
        ("warnings".into(), warnings.join("; ").into()),
    ]);
    Ok(vec![
        Artifact {
            stem: stem("oracle", None, cfg),
            table,
        },
        Artifact {
            stem: stem("oracle", Some("summary"), cfg),
            table: summary,
        },
    ])
}

fn stats_cmd(cfg: &SimulationConfig) -> Result<Vec<Artifact>, RunError> {
    let traj = trajectory(cfg)?;
    let e = stats::expected_times_numeric(&traj, cfg.stats.tail_tolerance)?;
    let (class, ratio) = stats::markovianity_criterion(&e, cfg.stats.markov_tolerance);
    let mut fields: Vec<(String, Cell)> = vec![("t_S".into(), e.t_s.into())];
    for (l, t) in e.t_l.iter().enumerate() {
        fields.push((format!("t_{}", l + 1), (*t).into()));
    }
    fields.extend([
        ("total".to_string(), e.total.into()),
        ("memory_time".into(), e.memory_time().into()),
        ("ratio".into(), ratio.into()),
        ("classification".into(), class.to_string().into()),
        ("markov_tolerance".into(), cfg.stats.markov_tolerance.into()),
        ("tail_bound".into(), e.tail_bound.into()),
    ]);
    if cfg.alpha.norm_sqr() > 0.0 {
        let m = stats::jump_time_moments(&traj)?;
        fields.extend([
            ("jump_mean".to_string(), m.mean.into()),
            ("jump_variance".into(), m.variance.into()),
        ]);
    }
    Ok(vec![Artifact {
        stem: stem("stats", None, cfg),
        table: Table::record(fields),
    }])
}

fn figure2(cfg: &SimulationConfig) -> Result<Vec<Artifact>, RunError> {
    let params = single_lorentzian(cfg)?;
    let traj = trajectory(cfg)?;
    let end = traj
        .grid()
        .floor_index(FIGURE_PANEL_END.min(traj.grid().end()));
    let p0 = traj.survival_probability();
    let p = traj.jump_density();
    let mut populations = Table::new(["t", "abs2_a0", "abs2_q", "Pi_p", "sum"]);
    let mut density = Table::new(["t", "p", "p_lower", "p_upper", "p_closed_form"]);
    for (k, s) in traj.states().take(end + 1).enumerate() {
        let a = s.a0.norm_sqr() * cfg.alpha.norm_sqr();
        let q = s.q[0].norm_sqr() * cfg.alpha.norm_sqr();
        let pi = 1.0 - p0[k];
        populations.push(vec![
            s.t.into(),
            a.into(),
            q.into(),
            pi.into(),
            (a + q + pi).into(),
        ]);
        let (lo, hi) = params.jump_density_envelopes(cfg.alpha, s.t)?;
        density.push(vec![
            s.t.into(),
            p[k].into(),
            lo.into(),
            hi.into(),
            params.jump_density(cfg.alpha, s.t)?.into(),
        ]);
    }
    let e = stats::expected_times_numeric(&traj, cfg.stats.tail_tolerance)?;
    let (t_s, t_p) = params.expected_times();
    let summary = Table::record(vec![
        ("gamma".into(), params.gamma().into()),
        ("lambda".into(), params.lambda().into()),
        ("delta".into(), params.delta().into()),
        ("t_S_closed_form".into(), t_s.into()),
        ("t_P_closed_form".into(), t_p.into()),
        ("t_S_quadrature".into(), e.t_s.into()),
        ("t_P_quadrature".into(), e.t_l[0].into()),
        ("tail_bound".into(), e.tail_bound.into()),
    ]);
    Ok(vec![
        Artifact {
            stem: stem("figure2", Some("populations"), cfg),
            table: populations,
        },
        Artifact {
            stem: stem("figure2", Some("density"), cfg),
            table: density,
        },
        Artifact {
            stem: stem("figure2", Some("summary"), cfg),
            table: summary,
        },
    ])
}
