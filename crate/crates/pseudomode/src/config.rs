//! TOML simulation config.
//!
//! ```toml
//! [spectral]
//! [[spectral.terms]]
//! gamma = 1.0
//! lambda = 0.2
//! delta = 0.5
//!
//! [initial]
//! alpha = [1.0, 0.0]
//! beta = [0.0, 0.0]
//!
//! [grid]
//! t_max = 300.0
//! output_dt = 0.01
//! ```
//!
//! Only `[spectral]` is required. Terms carry either `delta` (detuning from
//! the atom) or `omega` (absolute frequency, with `spectral.omega0`).

use std::fmt;
use std::ops::Range;

use pseudomode_core::spectral::{LorentzianTerm, ValidationOptions, ValidationWarning};
use pseudomode_core::{Complex64, SpectralDensity, Tolerances};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use toml::Spanned;

/// Tolerance on `|alpha|^2 + |beta|^2 = 1` accepted from a config file.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(text: &str, span: Range<usize>, message: impl Into<String>) -> Self {
        Self {
            line: Some(line_of(text, span.start)),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    spectral: Option<Spanned<RawSpectral>>,
    initial: Option<Spanned<RawInitial>>,
    grid: Option<Spanned<RawGrid>>,
    integrator: Option<Spanned<RawIntegrator>>,
    sampler: Option<Spanned<RawSampler>>,
    oracle: Option<Spanned<RawOracle>>,
    stats: Option<Spanned<RawStats>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectral {
    omega0: Option<f64>,
    terms: Vec<Spanned<RawTerm>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    gamma: f64,
    lambda: f64,
    delta: Option<f64>,
    omega: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    alpha: [f64; 2],
    beta: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_max: Option<f64>,
    output_dt: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    rtol: Option<f64>,
    atol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampler {
    n: Option<u64>,
    #[serde(rename = "T")]
    window: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    #[serde(rename = "N")]
    modes: Option<usize>,
    #[serde(rename = "W")]
    half_width: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStats {
    tail_tolerance: Option<f64>,
    markov_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub t_max: f64,
    pub output_dt: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_max: 300.0,
            output_dt: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub n: u64,
    pub window: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub modes: Option<usize>,
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsConfig {
    pub tail_tolerance: f64,
    pub markov_tolerance: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            tail_tolerance: pseudomode_core::stats::DEFAULT_TAIL_TOLERANCE,
            markov_tolerance: pseudomode_core::stats::DEFAULT_MARKOV_TOLERANCE,
        }
    }
}

/// Validated config. `alpha` and `beta` are renormalized to unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub spectral: SpectralDensity,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub grid: GridConfig,
    pub integrator: Tolerances,
    pub sampler: SamplerConfig,
    pub oracle: OracleConfig,
    pub stats: StatsConfig,
    /// Non-fatal findings of the spectral validation.
    pub warnings: Vec<String>,
    digest: String,
}

impl SimulationConfig {
    /// Parses and validates a config file's text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        let spectral_block = raw
            .spectral
            .ok_or_else(|| ConfigError::global("missing [spectral] block"))?;
        let (spectral, warnings) = spectral_density(text, spectral_block)?;

        let (alpha, beta) = match raw.initial {
            None => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            Some(block) => {
                let span = block.span();
                let init = block.into_inner();
                let alpha = Complex64::new(init.alpha[0], init.alpha[1]);
                let beta = Complex64::new(init.beta[0], init.beta[1]);
                let norm = alpha.norm_sqr() + beta.norm_sqr();
                if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
                    return Err(ConfigError::at(
                        text,
                        span,
                        format!(
                            "|alpha|^2 + |beta|^2 = {norm}, expected 1 within {NORM_TOLERANCE:e}"
                        ),
                    ));
                }
                let scale = norm.sqrt().recip();
                (alpha * scale, beta * scale)
            }
        };

        let mut grid = GridConfig::default();
        if let Some(block) = raw.grid {
            let span = block.span();
            let g = block.into_inner();
            grid.t_max = g.t_max.unwrap_or(grid.t_max);
            grid.output_dt = g.output_dt.unwrap_or(grid.output_dt);
            if !(grid.t_max > 0.0 && grid.t_max.is_finite()) {
                return Err(ConfigError::at(text, span, "grid.t_max must be positive"));
            }
            if !(grid.output_dt > 0.0) {
                return Err(ConfigError::at(
                    text,
                    span,
                    "grid.output_dt must be positive",
                ));
            }
            if grid.output_dt > grid.t_max {
                return Err(ConfigError::at(
                    text,
                    span,
                    "grid.output_dt exceeds grid.t_max",
                ));
            }
        }

        let mut integrator = Tolerances::default();
        if let Some(block) = raw.integrator {
            let span = block.span();
            let i = block.into_inner();
            integrator.rtol = i.rtol.unwrap_or(integrator.rtol);
            integrator.atol = i.atol.unwrap_or(integrator.atol);
            if !(integrator.rtol > 0.0 && integrator.atol > 0.0) {
                return Err(ConfigError::at(
                    text,
                    span,
                    "integrator tolerances must be positive",
                ));
            }
        }

        let mut sampler = SamplerConfig {
            n: 100_000,
            window: grid.t_max,
            seed: 0,
        };
        if let Some(block) = raw.sampler {
            let span = block.span();
            let s = block.into_inner();
            sampler.n = s.n.unwrap_or(sampler.n);
            sampler.window = s.window.unwrap_or(sampler.window);
            sampler.seed = s.seed.unwrap_or(sampler.seed);
            if sampler.n == 0 {
                return Err(ConfigError::at(text, span, "sampler.n must be at least 1"));
            }
            if !(sampler.window > 0.0) || sampler.window > grid.t_max {
                return Err(ConfigError::at(
                    text,
                    span,
                    "sampler.T must be positive and at most grid.t_max",
                ));
            }
        }

        let mut oracle = OracleConfig {
            modes: None,
            half_width: None,
        };
        if let Some(block) = raw.oracle {
            let span = block.span();
            let o = block.into_inner();
            if o.modes.is_some_and(|n| n < 2) {
                return Err(ConfigError::at(text, span, "oracle.N must be at least 2"));
            }
            if o.half_width.is_some_and(|w| !(w > 0.0)) {
                return Err(ConfigError::at(text, span, "oracle.W must be positive"));
            }
            oracle = OracleConfig {
                modes: o.modes,
                half_width: o.half_width,
            };
        }

        let mut stats = StatsConfig::default();
        if let Some(block) = raw.stats {
            let span = block.span();
            let s = block.into_inner();
            stats.tail_tolerance = s.tail_tolerance.unwrap_or(stats.tail_tolerance);
            stats.markov_tolerance = s.markov_tolerance.unwrap_or(stats.markov_tolerance);
            if !(stats.tail_tolerance > 0.0 && stats.markov_tolerance >= 0.0) {
                return Err(ConfigError::at(
                    text,
                    span,
                    "stats tolerances must be positive",
                ));
            }
        }

        Ok(Self {
            spectral,
            alpha,
            beta,
            grid,
            integrator,
            sampler,
            oracle,
            stats,
            warnings,
            digest: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }

    /// Built-in config of the two-panel population and jump-density figure:
    /// one Lorentzian with `gamma = 1`, `lambda = 0.2`, `Delta = 0.5`, atom
    /// initially excited.
    pub fn figure2() -> Self {
        const TEXT: &str = "[spectral]\n\
            [[spectral.terms]]\n\
            gamma = 1.0\n\
            lambda = 0.2\n\
            delta = 0.5\n\
            [initial]\n\
            alpha = [1.0, 0.0]\n\
            beta = [0.0, 0.0]\n\
            [grid]\n\
            t_max = 300.0\n\
            output_dt = 0.01\n";
        Self::parse(TEXT).expect("built-in config is valid")
    }

    /// First 12 hex digits of SHA-256 over the config text and any seed override.
    pub fn hash(&self) -> String {
        self.digest[..12].to_string()
    }

    /// Replaces the sampler seed; the hash changes with it.
    pub fn override_seed(&mut self, seed: u64) {
        self.sampler.seed = seed;
        let mut h = Sha256::new();
        h.update(self.digest.as_bytes());
        h.update(format!("seed={seed}").as_bytes());
        self.digest = hex::encode(h.finalize());
    }
}

fn spectral_density(
    text: &str,
    block: Spanned<RawSpectral>,
) -> Result<(SpectralDensity, Vec<String>), ConfigError> {
    let span = block.span();
    let raw = block.into_inner();
    if raw.terms.is_empty() {
        return Err(ConfigError::at(text, span, "spectral.terms is empty"));
    }
    let absolute = raw.terms[0].get_ref().omega.is_some();
    let mut terms = Vec::with_capacity(raw.terms.len());
    for term in &raw.terms {
        let t = term.get_ref();
        let at = |msg: &str| ConfigError::at(text, term.span(), msg);
        let omega = match (t.delta, t.omega, absolute) {
            (Some(_), Some(_), _) => return Err(at("give either delta or omega, not both")),
            (None, None, _) => return Err(at("term needs delta or omega")),
            (Some(_), None, true) | (None, Some(_), false) => {
                return Err(at("all terms must use the same one of delta and omega"))
            }
            (Some(delta), None, false) => delta,
            (None, Some(omega), true) => omega,
        };
        if !(t.gamma > 0.0 && t.gamma.is_finite()) {
            return Err(at("gamma must be positive"));
        }
        if !(t.lambda > 0.0 && t.lambda.is_finite()) {
            return Err(at("lambda must be positive"));
        }
        if !omega.is_finite() {
            return Err(at("frequency must be finite"));
        }
        terms.push(LorentzianTerm::new(t.gamma, t.lambda, omega));
    }
    let sd = if absolute {
        let omega0 = raw.omega0.ok_or_else(|| {
            ConfigError::at(text, span.clone(), "omega terms need spectral.omega0")
        })?;
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(ConfigError::at(
                text,
                span,
                "spectral.omega0 must be positive",
            ));
        }
        SpectralDensity::new(omega0, terms)
    } else {
        if raw.omega0.is_some() {
            return Err(ConfigError::at(
                text,
                span,
                "spectral.omega0 is only used with absolute omega terms",
            ));
        }
        SpectralDensity::from_detunings(terms.iter().map(|t| (t.gamma, t.lambda, t.omega)))
    };
    let report = sd.validate(&ValidationOptions::default());
    if let Some(f) = report.failures.first() {
        return Err(ConfigError::at(
            text,
            raw.terms[f.index.min(raw.terms.len() - 1)].span(),
            f.reason,
        ));
    }
    let warnings = report
        .warnings
        .iter()
        .map(|w| match w {
            ValidationWarning::NegativeFrequencyLeakage { ratio } => {
                format!("D(0) / max D = {ratio:.3e}; negative-frequency leakage is not negligible")
            }
            ValidationWarning::BroadResonance { index, ratio } => {
                format!("term {index}: omega/lambda = {ratio:.3} is small; the continuum approximation is questionable")
            }
        })
        .collect();
    Ok((sd, warnings))
}
