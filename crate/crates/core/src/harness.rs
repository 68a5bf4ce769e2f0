//! Experiment configs, sweeps, result files, and the built-in verification
//! suites behind the command-line front end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{self, AlgorithmConfig, AlgorithmKind, MonteCarloTrace};
use crate::channel::{self, ChannelModel, GainKind};
use crate::data::{self, DatasetSpec};
use crate::error::{Error, Result};
use crate::momentum::{self, MomentumSchedule};
use crate::problems::ProblemInstance;
use crate::theory::{BoundInputs, Regime};
use crate::vector::ModelVector;

/// Flag attached to runs whose stepsize lies outside the convergent range.
pub const OUT_OF_RANGE_FLAG: &str = "outside convergence range";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FAILURE_MARKER: &str = "FAILED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default = "default_gain")]
    pub gain: GainKind,
    #[serde(default = "one")]
    pub mu_h: f64,
    /// Required for uniform gains; must match the family's variance otherwise.
    #[serde(default)]
    pub sigma_h_sq: Option<f64>,
    pub sigma_w_sq: f64,
    /// Transmission power coefficient `E_N`.
    #[serde(default = "one")]
    pub power: f64,
}

fn default_gain() -> GainKind {
    GainKind::Rayleigh
}

fn one() -> f64 {
    1.0
}

impl ChannelSpec {
    pub fn build(&self) -> Result<ChannelModel> {
        ChannelModel::from_moments(
            self.gain,
            self.mu_h,
            self.sigma_h_sq,
            self.sigma_w_sq,
            self.power,
        )
    }
}

/// How the momentum cutoff k₀ is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartSpec {
    K0(usize),
    /// `⌊N^{1−ε}⌋`.
    Epsilon(f64),
    /// Grid search over `[1, max_iters]` on the convex bound.
    BoundMinimizing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub algorithm: AlgorithmKind,
    /// Absolute stepsize; exclusive with `beta_factor`.
    #[serde(default)]
    pub beta: Option<f64>,
    /// `β = f / (μ_h L)`; defaults to 1 when `beta` is absent.
    #[serde(default)]
    pub beta_factor: Option<f64>,
    #[serde(default)]
    pub alpha0: Option<f64>,
    pub max_iters: usize,
    #[serde(default)]
    pub restart: Option<RestartSpec>,
    #[serde(default)]
    pub theta0: Option<ModelVector>,
    #[serde(default)]
    pub allow_out_of_range: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    N,
    #[serde(rename = "E_N")]
    EN,
    #[serde(rename = "beta_factor")]
    BetaFactor,
    #[serde(rename = "alpha0")]
    Alpha0,
    #[serde(rename = "sigma_h_sq")]
    SigmaHSq,
    #[serde(rename = "sigma_w_sq")]
    SigmaWSq,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::N => "N",
            SweepParameter::EN => "E_N",
            SweepParameter::BetaFactor => "beta_factor",
            SweepParameter::Alpha0 => "alpha0",
            SweepParameter::SigmaHSq => "sigma_h_sq",
            SweepParameter::SigmaWSq => "sigma_w_sq",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub channel: ChannelSpec,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_reps")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Convex-regime exponent ε used by the convex bound and default k₀.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_reps() -> usize {
    100
}

fn default_epsilon() -> f64 {
    0.5
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn config_err(path: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Structural checks that need no data; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(config_err("algorithms", "need at least one algorithm"));
        }
        if self.replications == 0 {
            return Err(config_err("replications", "must be at least 1"));
        }
        if self.dataset.nodes == 0 {
            return Err(config_err("dataset.nodes", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(config_err("epsilon", "must lie in (0, 1)"));
        }
        self.channel
            .build()
            .map_err(|e| config_err("channel", e.to_string()))?;
        for (i, a) in self.algorithms.iter().enumerate() {
            let at = |f: &str| format!("algorithms[{i}].{f}");
            match (a.beta, a.beta_factor) {
                (Some(_), Some(_)) => {
                    return Err(config_err(at("beta"), "give beta or beta_factor, not both"))
                }
                (Some(b), None) if !(b > 0.0 && b.is_finite()) => {
                    return Err(config_err(at("beta"), "must be positive and finite"))
                }
                (None, Some(f)) if !(f > 0.0 && f.is_finite()) => {
                    return Err(config_err(at("beta_factor"), "must be positive and finite"))
                }
                _ => {}
            }
            if let Some(a0) = a.alpha0 {
                if !(a0 > 0.0 && a0 < 1.0) {
                    return Err(config_err(at("alpha0"), "must lie in (0, 1)"));
                }
            }
            match a.restart {
                Some(RestartSpec::K0(0)) => {
                    return Err(config_err(at("restart.k0"), "must be at least 1"))
                }
                Some(RestartSpec::Epsilon(e)) if !(e > 0.0 && e < 1.0) => {
                    return Err(config_err(at("restart.epsilon"), "must lie in (0, 1)"))
                }
                _ => {}
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(config_err("sweep.values", "must not be empty"));
            }
            for (j, &v) in s.values.iter().enumerate() {
                let at = format!("sweep.values[{j}]");
                let ok = match s.parameter {
                    SweepParameter::N => v >= 1.0 && v.fract() == 0.0 && v <= 1e9,
                    SweepParameter::EN | SweepParameter::BetaFactor => v > 0.0 && v.is_finite(),
                    SweepParameter::Alpha0 => v > 0.0 && v < 1.0,
                    SweepParameter::SigmaHSq | SweepParameter::SigmaWSq => {
                        v >= 0.0 && v.is_finite()
                    }
                };
                if !ok {
                    return Err(config_err(
                        at,
                        format!("{v} is not a valid {}", s.parameter.name()),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `(parameter, value)` per combination; one unswept combination when no
    /// sweep is configured.
    pub fn combinations(&self) -> Vec<Option<(SweepParameter, f64)>> {
        match &self.sweep {
            None => vec![None],
            Some(s) => s.values.iter().map(|&v| Some((s.parameter, v))).collect(),
        }
    }

    /// The config with a sweep value substituted.
    fn apply(&self, sweep: Option<(SweepParameter, f64)>) -> ExperimentConfig {
        let mut cfg = self.clone();
        let Some((p, v)) = sweep else {
            return cfg;
        };
        match p {
            SweepParameter::N => cfg.dataset.nodes = v as usize,
            SweepParameter::EN => cfg.channel.power = v,
            SweepParameter::SigmaHSq => cfg.channel.sigma_h_sq = Some(v),
            SweepParameter::SigmaWSq => cfg.channel.sigma_w_sq = v,
            SweepParameter::BetaFactor => {
                for a in &mut cfg.algorithms {
                    a.beta = None;
                    a.beta_factor = Some(v);
                }
            }
            SweepParameter::Alpha0 => {
                for a in &mut cfg.algorithms {
                    a.alpha0 = Some(v);
                }
            }
        }
        cfg
    }
}

/// Fully resolved algorithm run for one combination.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedAlgorithm {
    pub config: AlgorithmConfig,
    pub alpha0: f64,
    pub flags: Vec<String>,
}

fn mu_h_for(kind: AlgorithmKind, channel: &ChannelModel) -> f64 {
    match kind {
        AlgorithmKind::CentralNesterov => 1.0,
        _ => channel.mu_h(),
    }
}

/// Resolves β, α₀ and k₀ for one algorithm on a concrete problem/channel.
pub fn resolve_algorithm(
    spec: &AlgorithmSpec,
    problem: &ProblemInstance,
    channel: &ChannelModel,
    seed: u64,
    epsilon: f64,
) -> Result<ResolvedAlgorithm> {
    let constants = problem.constants();
    let beta = match (spec.beta, spec.beta_factor) {
        (Some(b), _) => b,
        (None, f) => {
            let c = constants.ok_or_else(|| {
                Error::invalid(
                    "beta",
                    format!(
                        "{} has no analytic L; give an absolute beta",
                        problem.family().name()
                    ),
                )
            })?;
            f.unwrap_or(1.0) / (mu_h_for(spec.algorithm, channel) * c.lipschitz)
        }
    };
    let alpha0 = spec.alpha0.unwrap_or_else(|| match constants {
        Some(c) => momentum::default_alpha0(c.strong_convexity, c.lipschitz),
        None => 0.5,
    });
    let mut config = AlgorithmConfig::new(spec.algorithm, beta, spec.max_iters).with_seed(seed);
    config.alpha0 = Some(alpha0);
    config.theta0 = spec.theta0.clone();
    config.allow_out_of_range = spec.allow_out_of_range;
    config.restart_k0 = match spec.restart {
        None => None,
        Some(RestartSpec::K0(k)) => Some(k),
        Some(RestartSpec::Epsilon(e)) => {
            let k = (problem.node_count() as f64).powf(1.0 - e) * (1.0 + 4.0 * f64::EPSILON);
            Some((k.floor() as usize).max(1))
        }
        Some(RestartSpec::BoundMinimizing) => {
            let inputs = bound_inputs(&config, problem, channel, epsilon)?.ok_or_else(|| {
                Error::invalid("restart", "bound-minimizing k0 needs analytic constants")
            })?;
            Some(inputs.bound_minimizing_k0(spec.max_iters)?)
        }
    };
    let mut flags = Vec::new();
    if config.validate(problem, channel)? {
        flags.push(OUT_OF_RANGE_FLAG.to_string());
    }
    Ok(ResolvedAlgorithm {
        config,
        alpha0,
        flags,
    })
}

/// Bound inputs for an AGMA-style run, when the problem has constants.
pub fn bound_inputs(
    config: &AlgorithmConfig,
    problem: &ProblemInstance,
    channel: &ChannelModel,
    epsilon: f64,
) -> Result<Option<BoundInputs>> {
    let Some(c) = problem.constants() else {
        return Ok(None);
    };
    let theta0 = config
        .theta0
        .clone()
        .unwrap_or_else(|| ModelVector::zeros(problem.dimension()));
    Ok(Some(BoundInputs {
        lipschitz: c.lipschitz,
        mu: c.strong_convexity,
        mu_h: channel.mu_h(),
        sigma_h_sq: channel.sigma_h_sq(),
        sigma_w_sq: channel.sigma_w_sq(),
        gradient_bound: c.gradient_bound,
        dimension: problem.dimension(),
        nodes: problem.node_count(),
        power: channel.power(),
        beta: config.beta,
        alpha0: config
            .alpha0
            .unwrap_or_else(|| momentum::default_alpha0(c.strong_convexity, c.lipschitz)),
        f0_gap: (problem.global_objective(&theta0)? - c.f_star).max(0.0),
        dist0_sq: theta0.distance_sq(&c.theta_star),
        epsilon,
    }))
}

/// Per-iteration bound for an AGMA run: the strongly convex bound at every
/// k, the convex bound for `k ≤ k₀`, `None` where neither applies.
pub fn bound_series(inputs: Option<&BoundInputs>, len: usize) -> Vec<Option<f64>> {
    let Some(b) = inputs else {
        return vec![None; len];
    };
    if b.validate().is_err() {
        return vec![None; len];
    }
    (0..len)
        .map(|k| match b.regime() {
            Regime::StronglyConvex => b.strongly_convex_bound(k).ok(),
            Regime::Convex => b.convex_bound(k).ok(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CombinationRecord {
    pub file: String,
    pub algorithm: AlgorithmKind,
    pub parameter: Option<String>,
    pub value: Option<f64>,
    pub beta: f64,
    pub alpha0: f64,
    pub restart_k0: Option<usize>,
    pub seeds: Vec<u64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub status: String,
    pub config: ExperimentConfig,
    pub combinations: Vec<CombinationRecord>,
}

fn file_name(kind: AlgorithmKind, sweep: Option<(SweepParameter, f64)>) -> String {
    match sweep {
        None => format!("{}.csv", kind.name()),
        Some((p, v)) => format!("{}__{}={}.csv", kind.name(), p.name(), v),
    }
}

/// CSV body with columns `k, mean_excess_risk, ci_halfwidth, bound_value,
/// algorithm[, <swept parameter>]`.
pub fn render_csv(
    trace: &MonteCarloTrace,
    bounds: &[Option<f64>],
    sweep: Option<(SweepParameter, f64)>,
) -> String {
    let mut out = String::from("k,mean_excess_risk,ci_halfwidth,bound_value,algorithm");
    if let Some((p, _)) = sweep {
        out.push(',');
        out.push_str(p.name());
    }
    out.push('\n');
    for k in 0..trace.len() {
        let bound = bounds
            .get(k)
            .copied()
            .flatten()
            .map(|b| format!("{b:e}"))
            .unwrap_or_default();
        let _ = write!(
            out,
            "{k},{:e},{:e},{bound},{}",
            trace.mean[k],
            trace.ci_halfwidth[k],
            trace.algorithm.name()
        );
        if let Some((_, v)) = sweep {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs every sweep value × algorithm, writes one CSV per combination, then
/// `manifest.json`. On failure, completed CSVs stay and a `FAILED` marker
/// records the error.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Manifest> {
    config.validate()?;
    let out = &config.output;
    std::fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.clone(),
        source,
    })?;
    let _ = std::fs::remove_file(out.join(FAILURE_MARKER));
    let mut done = Vec::new();
    match run_combinations(config, &mut done) {
        Ok(()) => {
            let manifest = Manifest {
                status: "complete".into(),
                config: config.clone(),
                combinations: done,
            };
            write_file(
                &out.join(MANIFEST_FILE),
                &serde_json::to_string_pretty(&manifest)?,
            )?;
            Ok(manifest)
        }
        Err(e) => {
            let mut body = format!("{e}\ncompleted:\n");
            for c in &done {
                body.push_str(&c.file);
                body.push('\n');
            }
            let _ = std::fs::remove_file(out.join(MANIFEST_FILE));
            write_file(&out.join(FAILURE_MARKER), &body)?;
            Err(e)
        }
    }
}

fn run_combinations(config: &ExperimentConfig, done: &mut Vec<CombinationRecord>) -> Result<()> {
    let mut cached: Option<(DatasetSpec, ProblemInstance)> = None;
    for sweep in config.combinations() {
        let cfg = config.apply(sweep);
        let problem = match &cached {
            Some((spec, p)) if *spec == cfg.dataset => p.clone(),
            _ => {
                let p = data::load_and_partition(&cfg.dataset)?;
                cached = Some((cfg.dataset.clone(), p.clone()));
                p
            }
        };
        let channel = cfg.channel.build()?;
        for (i, spec) in cfg.algorithms.iter().enumerate() {
            let resolved = resolve_algorithm(spec, &problem, &channel, cfg.seed, cfg.epsilon)
                .map_err(|e| config_err(format!("algorithms[{i}]"), e.to_string()))?;
            log::info!(
                "running {} ({} reps){}",
                spec.algorithm,
                cfg.replications,
                sweep.map_or(String::new(), |(p, v)| format!(" at {}={v}", p.name()))
            );
            let trace =
                algorithms::monte_carlo(&resolved.config, &problem, &channel, cfg.replications)?;
            let bounds = if spec.algorithm == AlgorithmKind::Agma && resolved.flags.is_empty() {
                let inputs = bound_inputs(&resolved.config, &problem, &channel, cfg.epsilon)?;
                bound_series(inputs.as_ref(), trace.len())
            } else {
                vec![None; trace.len()]
            };
            let file = file_name(spec.algorithm, sweep);
            write_file(&cfg.output.join(&file), &render_csv(&trace, &bounds, sweep))?;
            done.push(CombinationRecord {
                file,
                algorithm: spec.algorithm,
                parameter: sweep.map(|(p, _)| p.name().to_string()),
                value: sweep.map(|(_, v)| v),
                beta: resolved.config.beta,
                alpha0: resolved.alpha0,
                restart_k0: resolved.config.restart_k0,
                seeds: trace.seeds.clone(),
                flags: resolved.flags.clone(),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Verification suites

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Sequences,
    Moments,
    Reduction,
    Bounds,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sequences" => Ok(Suite::Sequences),
            "moments" => Ok(Suite::Moments),
            "reduction" => Ok(Suite::Reduction),
            "bounds" => Ok(Suite::Bounds),
            other => Err(format!(
                "unknown suite {other:?}; expected sequences, moments, reduction or bounds"
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: measured <= threshold,
            measured,
            threshold,
            detail: detail.into(),
        }
    }

    fn failed(name: &str, err: &Error) -> Self {
        Self {
            name: name.into(),
            passed: false,
            measured: f64::NAN,
            threshold: f64::NAN,
            detail: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn verify(suite: Suite) -> VerifyReport {
    let checks = match suite {
        Suite::Sequences => verify_sequences(),
        Suite::Moments => verify_moments(),
        Suite::Reduction => verify_reduction(),
        Suite::Bounds => verify_bounds(),
    };
    VerifyReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn capture(name: &str, f: impl FnOnce() -> Result<Vec<Check>>) -> Vec<Check> {
    f().unwrap_or_else(|e| vec![Check::failed(name, &e)])
}

/// Statistics of the α/λ recursions over random `(α₀, q)` configurations.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SequenceStats {
    pub configs: usize,
    pub alpha_outside_unit: usize,
    pub alpha_not_above_sqrt_q: usize,
    pub max_residual: f64,
    pub lambda_bound_violations: usize,
}

/// Sweeps `configs` random strongly convex and `configs` random convex
/// schedules through `k ≤ horizon`.
pub fn sequence_stats(configs: usize, horizon: usize, seed: u64) -> Result<SequenceStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = SequenceStats {
        configs,
        ..Default::default()
    };
    for _ in 0..configs {
        for strongly in [true, false] {
            let l_tilde = 10f64.powf(rng.random_range(-1.0..2.0));
            let lipschitz = l_tilde * rng.random_range(0.05..=1.0);
            let (q, mu) = if strongly {
                let mu = lipschitz * 10f64.powf(rng.random_range(-4.0..-0.01));
                (mu / l_tilde, mu)
            } else {
                (0.0, 0.0)
            };
            let floor = (mu / lipschitz).sqrt();
            let alpha0 = floor + (1.0 - floor) * rng.random_range(0.01..0.99);
            let s = MomentumSchedule::for_constants(alpha0, mu, lipschitz, l_tilde)?
                .extended(horizon + 1);
            for k in 0..=horizon {
                let a = s.alpha(k).expect("generated");
                let n = s.alpha(k + 1).expect("generated");
                if !(a > 0.0 && a < 1.0) {
                    st.alpha_outside_unit += 1;
                }
                if strongly && !s.log_alpha_excess(k).expect("generated").is_finite() {
                    st.alpha_not_above_sqrt_q += 1;
                }
                let r = (n * n - (1.0 - n) * a * a - q * n).abs();
                st.max_residual = st.max_residual.max(r);
                let bound = momentum::lambda_bound(k, q, s.gamma0(), l_tilde, strongly);
                if s.lambda(k).expect("generated") > bound {
                    st.lambda_bound_violations += 1;
                }
            }
        }
    }
    Ok(st)
}

fn verify_sequences() -> Vec<Check> {
    capture("sequences", || {
        let st = sequence_stats(100, 1000, 20240601)?;
        Ok(vec![
            Check::at_most(
                "alpha_in_unit_interval",
                st.alpha_outside_unit as f64,
                0.0,
                "count of alpha_k outside (0, 1)",
            ),
            Check::at_most(
                "alpha_above_sqrt_q",
                st.alpha_not_above_sqrt_q as f64,
                0.0,
                "count of alpha_k <= sqrt(q), strongly convex schedules",
            ),
            Check::at_most(
                "recursion_residual",
                st.max_residual,
                1e-12,
                "max |a_{k+1}^2 - (1 - a_{k+1}) a_k^2 - q a_{k+1}|",
            ),
            Check::at_most(
                "lambda_below_bound",
                st.lambda_bound_violations as f64,
                0.0,
                "count of lambda_k above its closed-form bound",
            ),
        ])
    })
}

fn verify_moments() -> Vec<Check> {
    capture("moments", || {
        let problem = data::synthesize_quadratic(5, 10.0, 5, 20, 3)?;
        let z = ModelVector::new(vec![0.5, -1.0, 0.25, 2.0, -0.75])?;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let fading = ChannelModel::from_moments(GainKind::Uniform, 1.5f64.sqrt(), Some(0.5), 1.0, 1.0)?;
        let mc = channel::moment_check(&fading, &problem, &z, 100_000, &mut rng)?;
        let ideal = ChannelModel::from_moments(GainKind::Constant, 0.8, None, 0.0, 1.0)?;
        let exact = channel::moment_check(&ideal, &problem, &z, 1000, &mut rng)?;
        Ok(vec![
            Check::at_most(
                "mean_within_5se",
                mc.mean_z,
                5.0,
                format!("relative mean error {:e}", mc.mean_error),
            ),
            Check::at_most(
                "second_moment_within_5se",
                mc.second_moment_z,
                5.0,
                format!("relative second-moment error {:e}", mc.second_moment_error),
            ),
            Check::at_most(
                "deterministic_channel_mean",
                exact.mean_error,
                1e-12,
                "constant gain, noiseless receiver",
            ),
        ])
    })
}

/// Largest relative deviation between AGMA on an ideal channel and the
/// centralized reference over `iters` iterations.
pub fn reduction_deviation(problem: &ProblemInstance, iters: usize) -> Result<f64> {
    let c = problem.require_constants()?;
    let ideal = ChannelModel::from_moments(GainKind::Constant, 1.0, Some(0.0), 0.0, 1.0)?;
    let beta = 1.0 / c.lipschitz;
    let agma = algorithms::run(
        &AlgorithmConfig::new(AlgorithmKind::Agma, beta, iters),
        problem,
        &ideal,
    )?;
    let reference = algorithms::run(
        &AlgorithmConfig::new(AlgorithmKind::CentralNesterov, beta, iters),
        problem,
        &ideal,
    )?;
    Ok(agma
        .records
        .iter()
        .zip(&reference.records)
        .map(|(a, r)| relative_gap(a.excess_risk, r.excess_risk))
        .fold(0.0, f64::max))
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn verify_reduction() -> Vec<Check> {
    capture("reduction", || {
        let problem = data::synthesize_quadratic(10, 100.0, 10, 10, 1)?;
        let dev = reduction_deviation(&problem, 100)?;
        // GBMA on the ideal channel against hand-rolled gradient descent.
        let c = problem.require_constants()?;
        let ideal = ChannelModel::from_moments(GainKind::Constant, 1.0, None, 0.0, 1.0)?;
        let beta = 1.0 / c.lipschitz;
        let gbma = algorithms::run(
            &AlgorithmConfig::new(AlgorithmKind::Gbma, beta, 100),
            &problem,
            &ideal,
        )?;
        let mut theta = ModelVector::zeros(problem.dimension());
        let mut gd_dev: f64 = 0.0;
        for r in &gbma.records {
            let f = problem.global_objective(&theta)? - c.f_star;
            gd_dev = gd_dev.max(relative_gap(r.excess_risk, f));
            let g = problem.global_gradient(&theta)?;
            theta.axpy(-beta, &g);
        }
        Ok(vec![
            Check::at_most(
                "agma_matches_central_nesterov",
                dev,
                1e-9,
                "max relative excess-risk deviation over 100 iterations",
            ),
            Check::at_most(
                "gbma_matches_gradient_descent",
                gd_dev,
                1e-9,
                "max relative excess-risk deviation over 100 iterations",
            ),
        ])
    })
}

/// Largest `upper CI − bound` over the checked range (≤ 0 means dominance).
pub fn bound_dominance_margin(
    problem: &ProblemInstance,
    channel: &ChannelModel,
    iters: usize,
    reps: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(f64, usize)> {
    let c = problem.require_constants()?;
    let beta = 1.0 / (channel.mu_h() * c.lipschitz);
    let cfg = AlgorithmConfig::new(AlgorithmKind::Agma, beta, iters).with_seed(seed);
    let inputs = bound_inputs(&cfg, problem, channel, epsilon)?
        .ok_or(Error::ConstantsUnavailable(problem.family().name()))?;
    let mc = algorithms::monte_carlo(&cfg, problem, channel, reps)?;
    let bounds = bound_series(Some(&inputs), mc.len());
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for (k, b) in bounds.iter().enumerate() {
        if let Some(b) = b {
            worst = worst.max(mc.upper(k) - b);
            checked += 1;
        }
    }
    Ok((worst, checked))
}

fn verify_bounds() -> Vec<Check> {
    capture("bounds", || {
        let strongly = data::synthesize_quadratic(10, 10.0, 10, 100, 2)?;
        let rayleigh = ChannelModel::from_moments(GainKind::Rayleigh, 1.0, None, 1.0, 1.0)?;
        let (m1, n1) = bound_dominance_margin(&strongly, &rayleigh, 100, 200, 0.5, 7)?;
        let convex = data::synthesize_quadratic(10, 10.0, 6, 256, 4)?;
        let (m2, n2) = bound_dominance_margin(&convex, &rayleigh, 16, 200, 0.5, 8)?;
        Ok(vec![
            Check::at_most(
                "strongly_convex_dominance",
                m1,
                0.0,
                format!("max(upper CI - bound) over {n1} iterations"),
            ),
            Check::at_most(
                "convex_dominance",
                m2,
                0.0,
                format!("max(upper CI - bound) over {n2} iterations up to k0"),
            ),
        ])
    })
}
