//! Iterate loops: accelerated over-the-air descent (AGMA), its momentum-free
//! variant (GBMA), the orthogonal-channel baselines (FDM-GD, FDM-AGD), and a
//! noiseless centralized Nesterov reference.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{fdm_aggregate, mac_aggregate, ChannelModel};
use crate::error::{Error, Result};
use crate::momentum::{self, MomentumSchedule};
use crate::problems::ProblemInstance;
use crate::vector::ModelVector;

/// Environment variable that caps the Monte Carlo worker pool.
pub const WORKERS_ENV: &str = "AGMA_WORKERS";

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgorithmKind {
    #[serde(rename = "AGMA")]
    Agma,
    #[serde(rename = "GBMA")]
    Gbma,
    #[serde(rename = "FDM_GD")]
    FdmGd,
    #[serde(rename = "FDM_AGD")]
    FdmAgd,
    #[serde(rename = "CentralNesterov")]
    CentralNesterov,
}

impl AlgorithmKind {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::Agma => "AGMA",
            AlgorithmKind::Gbma => "GBMA",
            AlgorithmKind::FdmGd => "FDM_GD",
            AlgorithmKind::FdmAgd => "FDM_AGD",
            AlgorithmKind::CentralNesterov => "CentralNesterov",
        }
    }

    pub fn uses_momentum(&self) -> bool {
        matches!(
            self,
            AlgorithmKind::Agma | AlgorithmKind::FdmAgd | AlgorithmKind::CentralNesterov
        )
    }

    fn topology(&self) -> Topology {
        match self {
            AlgorithmKind::FdmGd | AlgorithmKind::FdmAgd => Topology::Fdm,
            _ => Topology::Mac,
        }
    }
}

impl std::fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the received gradient is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Over-the-air superposition on a shared channel.
    Mac,
    /// One orthogonal channel per node, averaged at the server.
    Fdm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub algorithm: AlgorithmKind,
    pub beta: f64,
    /// Defaults to the midpoint of `(√(μ/L), 1)`, or 0.5 without strong convexity.
    #[serde(default)]
    pub alpha0: Option<f64>,
    pub max_iters: usize,
    /// Momentum is dropped from iteration `k0 + 1` on.
    #[serde(default)]
    pub restart_k0: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to the zero vector.
    #[serde(default)]
    pub theta0: Option<ModelVector>,
    /// Stop once the excess risk falls below this value (single runs only).
    #[serde(default)]
    pub early_stop: Option<f64>,
    /// Run even when β is outside the convergent range.
    #[serde(default)]
    pub allow_out_of_range: bool,
}

impl AlgorithmConfig {
    pub fn new(algorithm: AlgorithmKind, beta: f64, max_iters: usize) -> Self {
        Self {
            algorithm,
            beta,
            alpha0: None,
            max_iters,
            restart_k0: None,
            seed: 0,
            theta0: None,
            early_stop: None,
            allow_out_of_range: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha0(mut self, alpha0: f64) -> Self {
        self.alpha0 = Some(alpha0);
        self
    }

    pub fn with_restart(mut self, k0: usize) -> Self {
        self.restart_k0 = Some(k0);
        self
    }

    pub fn with_theta0(mut self, theta0: ModelVector) -> Self {
        self.theta0 = Some(theta0);
        self
    }

    /// Checks the configuration against the problem and channel. Returns
    /// whether β lies outside the convergent range (only possible when
    /// `allow_out_of_range` is set).
    pub fn validate(&self, problem: &ProblemInstance, channel: &ChannelModel) -> Result<bool> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta", "must be positive and finite"));
        }
        if self.restart_k0 == Some(0) {
            return Err(Error::invalid("restart_k0", "must be at least 1"));
        }
        if let Some(t) = &self.theta0 {
            t.ensure_dim(problem.dimension())?;
        }
        if let Some(tol) = self.early_stop {
            if tol.is_nan() || tol <= 0.0 {
                return Err(Error::invalid("early_stop", "must be positive"));
            }
        }
        if let Some(a) = self.alpha0 {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::invalid("alpha0", format!("{a} not in (0, 1)")));
            }
        }
        let Some(c) = problem.constants() else {
            if self.algorithm == AlgorithmKind::CentralNesterov {
                return Err(Error::ConstantsUnavailable(problem.family().name()));
            }
            return Ok(false);
        };
        let mu_h = match self.algorithm {
            AlgorithmKind::CentralNesterov => 1.0,
            _ => channel.mu_h(),
        };
        let mut bad = momentum::l_beta_tilde(self.beta, mu_h, c.lipschitz).err();
        if bad.is_none() && self.algorithm == AlgorithmKind::FdmAgd {
            bad = momentum::l_beta_tilde(self.beta, 1.0, c.lipschitz).err();
        }
        match bad {
            None => Ok(false),
            Some(e) if self.allow_out_of_range => {
                log::warn!("{}: {e}; running anyway", self.algorithm);
                Ok(true)
            }
            Some(e) => Err(e),
        }
    }
}

/// `(θ_k, θ_{k−1}, z_k, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub theta_curr: ModelVector,
    pub theta_prev: ModelVector,
    pub z: ModelVector,
    pub k: usize,
}

impl IterateState {
    /// `θ_{−1} = θ₀` and `z₀ = θ₀`.
    pub fn initial(theta0: ModelVector) -> Self {
        Self {
            theta_prev: theta0.clone(),
            z: theta0.clone(),
            theta_curr: theta0,
            k: 0,
        }
    }
}

/// Stepsize, topology, and restart cutoff for [`agma_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRule {
    pub beta: f64,
    pub topology: Topology,
    pub restart_k0: Option<usize>,
}

/// One server iteration: gather local gradients at `z_k`, aggregate over the
/// channel, set `θ_{k+1} = z_k − β v_k`, and extrapolate `z_{k+1}`.
///
/// Without a schedule, or past the restart cutoff, `z_{k+1} = θ_{k+1}`.
pub fn agma_step<R: Rng + ?Sized>(
    state: &IterateState,
    rule: &StepRule,
    schedule: Option<&MomentumSchedule>,
    channel: &ChannelModel,
    problem: &ProblemInstance,
    rng: &mut R,
) -> Result<IterateState> {
    let k = state.k;
    let grads = problem.local_gradients(&state.z)?;
    let v = match rule.topology {
        Topology::Mac => {
            let real = channel.sample_realization(grads.len(), problem.dimension(), rng)?;
            mac_aggregate(&grads, &real)?
        }
        Topology::Fdm => fdm_aggregate(&grads, channel, rng)?,
    };
    let next = state.z.plus_scaled(-rule.beta, &v);
    if !next.is_finite() {
        return Err(Error::Divergence { k: k + 1 });
    }
    let eta = match schedule {
        Some(s) if rule.restart_k0.is_none_or(|k0| k < k0) => s
            .eta(k)
            .ok_or_else(|| Error::invalid("schedule", format!("too short for k = {k}")))?,
        _ => 0.0,
    };
    let mut z = next.clone();
    if eta != 0.0 {
        z.axpy(eta, &next.sub(&state.theta_curr));
    }
    Ok(IterateState {
        theta_prev: state.theta_curr.clone(),
        theta_curr: next,
        z,
        k: k + 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    pub k: usize,
    /// `F(θ_k) − F*`, or `F(θ_k)` when no reference minimum is known.
    pub excess_risk: f64,
    /// `‖θ_k − θ*‖`, when θ* is known.
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunTrace {
    pub records: Vec<RunRecord>,
    /// Seconds since the start of the run, per record. Not part of the
    /// deterministic output.
    pub wall_time_s: Vec<f64>,
    pub config: AlgorithmConfig,
    pub seed: u64,
    pub final_theta: ModelVector,
}

impl RunTrace {
    pub fn excess_risks(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.excess_risk).collect()
    }
}

/// Per-iteration random stream: the run seed selects the key, `k` the stream,
/// so every algorithm and every power level sees the same draws at iteration k.
fn iteration_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// A validated configuration with its schedule precomputed, shareable across
/// replications.
#[derive(Debug, Clone)]
pub struct Runner<'a> {
    config: AlgorithmConfig,
    problem: &'a ProblemInstance,
    channel: &'a ChannelModel,
    schedule: Option<MomentumSchedule>,
    theta0: ModelVector,
    f_ref: f64,
    theta_star: Option<ModelVector>,
    out_of_range: bool,
    alpha0: f64,
}

impl<'a> Runner<'a> {
    pub fn new(
        config: &AlgorithmConfig,
        problem: &'a ProblemInstance,
        channel: &'a ChannelModel,
    ) -> Result<Self> {
        let out_of_range = config.validate(problem, channel)?;
        let constants = problem.constants();
        let alpha0 = config.alpha0.unwrap_or_else(|| match constants {
            Some(c) => momentum::default_alpha0(c.strong_convexity, c.lipschitz),
            None => 0.5,
        });
        // With μ = L the α-recursion sits at its fixed point α ≡ 1, so η ≡ 0.
        let degenerate = constants.is_some_and(|c| c.strong_convexity >= c.lipschitz);
        let schedule = if config.algorithm.uses_momentum()
            && config.algorithm != AlgorithmKind::CentralNesterov
            && !degenerate
        {
            let s = match constants {
                Some(c) => {
                    let mu_h = match config.algorithm {
                        AlgorithmKind::FdmAgd => 1.0,
                        _ => channel.mu_h(),
                    };
                    // Outside the convergent range L̃ is undefined; fall back to L.
                    let l_tilde = momentum::l_beta_tilde(config.beta, mu_h, c.lipschitz)
                        .unwrap_or(c.lipschitz);
                    MomentumSchedule::for_constants(
                        alpha0,
                        c.strong_convexity,
                        c.lipschitz,
                        l_tilde,
                    )?
                }
                None => MomentumSchedule::new(alpha0, 0.0, 0.0, 0.0)?,
            };
            Some(s.extended(config.max_iters + 1))
        } else {
            None
        };
        let theta0 = config
            .theta0
            .clone()
            .unwrap_or_else(|| ModelVector::zeros(problem.dimension()));
        Ok(Self {
            config: config.clone(),
            problem,
            channel,
            schedule,
            theta0,
            f_ref: constants.map_or(0.0, |c| c.f_star),
            theta_star: constants.map(|c| c.theta_star.clone()),
            out_of_range,
            alpha0,
        })
    }

    pub fn config(&self) -> &AlgorithmConfig {
        &self.config
    }

    pub fn schedule(&self) -> Option<&MomentumSchedule> {
        self.schedule.as_ref()
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn theta0(&self) -> &ModelVector {
        &self.theta0
    }

    /// Whether β was accepted only through the out-of-range override.
    pub fn out_of_range(&self) -> bool {
        self.out_of_range
    }

    fn record(&self, k: usize, theta: &ModelVector) -> Result<RunRecord> {
        let f = self.problem.global_objective(theta)?;
        if !f.is_finite() {
            return Err(Error::Divergence { k });
        }
        Ok(RunRecord {
            k,
            excess_risk: f - self.f_ref,
            distance: self.theta_star.as_ref().map(|t| theta.distance_sq(t).sqrt()),
        })
    }

    /// One seeded run.
    pub fn run_seed(&self, seed: u64) -> Result<RunTrace> {
        if self.config.algorithm == AlgorithmKind::CentralNesterov {
            return self.run_reference(seed);
        }
        let start = Instant::now();
        let rule = StepRule {
            beta: self.config.beta,
            topology: self.config.algorithm.topology(),
            restart_k0: self.config.restart_k0,
        };
        let mut state = IterateState::initial(self.theta0.clone());
        let mut records = vec![self.record(0, &state.theta_curr)?];
        let mut wall = vec![start.elapsed().as_secs_f64()];
        for k in 0..self.config.max_iters {
            if self.stop(records.last()) {
                break;
            }
            let mut rng = iteration_rng(seed, k);
            state = agma_step(
                &state,
                &rule,
                self.schedule.as_ref(),
                self.channel,
                self.problem,
                &mut rng,
            )?;
            records.push(self.record(k + 1, &state.theta_curr)?);
            wall.push(start.elapsed().as_secs_f64());
        }
        Ok(RunTrace {
            records,
            wall_time_s: wall,
            config: self.config.clone(),
            seed,
            final_theta: state.theta_curr,
        })
    }

    fn stop(&self, last: Option<&RunRecord>) -> bool {
        match (self.config.early_stop, last) {
            (Some(tol), Some(r)) => r.excess_risk < tol,
            _ => false,
        }
    }

    /// Estimate-sequence form of the constant-step accelerated method on the
    /// exact global gradient. Deterministic; the seed is only echoed.
    fn run_reference(&self, seed: u64) -> Result<RunTrace> {
        let start = Instant::now();
        let c = self.problem.require_constants()?;
        let l_tilde = momentum::l_beta_tilde(self.config.beta, 1.0, c.lipschitz)
            .unwrap_or(c.lipschitz);
        let mu = c.strong_convexity;
        let beta = self.config.beta;
        let a0 = self.alpha0;
        // Choose γ₀ so that L̃α₀² = (1 − α₀)γ₀ + α₀μ.
        let mut gamma = a0 * (a0 * l_tilde - mu) / (1.0 - a0);
        let mut x = self.theta0.clone();
        let mut v = self.theta0.clone();
        let mut records = vec![self.record(0, &x)?];
        let mut wall = vec![start.elapsed().as_secs_f64()];
        for k in 0..self.config.max_iters {
            if self.stop(records.last()) {
                break;
            }
            // α_k: positive root of L̃α² + (γ_k − μ)α − γ_k = 0.
            let b = gamma - mu;
            let disc = (b * b + 4.0 * l_tilde * gamma).sqrt();
            let alpha = if b >= 0.0 {
                2.0 * gamma / (b + disc)
            } else {
                (disc - b) / (2.0 * l_tilde)
            };
            let gamma_next = (1.0 - alpha) * gamma + alpha * mu;
            let mut y = v.clone();
            y.scale(alpha * gamma);
            y.axpy(gamma_next, &x);
            y.scale(1.0 / (gamma + alpha * mu));
            let g = self.problem.global_gradient(&y)?;
            let x_next = y.plus_scaled(-beta, &g);
            let mut v_next = v;
            v_next.scale((1.0 - alpha) * gamma);
            v_next.axpy(alpha * mu, &y);
            v_next.axpy(-alpha, &g);
            v_next.scale(1.0 / gamma_next);
            if !x_next.is_finite() {
                return Err(Error::Divergence { k: k + 1 });
            }
            x = x_next;
            v = v_next;
            gamma = gamma_next;
            records.push(self.record(k + 1, &x)?);
            wall.push(start.elapsed().as_secs_f64());
        }
        Ok(RunTrace {
            records,
            wall_time_s: wall,
            config: self.config.clone(),
            seed,
            final_theta: x,
        })
    }
}

/// Single seeded run with `config.seed`.
pub fn run(
    config: &AlgorithmConfig,
    problem: &ProblemInstance,
    channel: &ChannelModel,
) -> Result<RunTrace> {
    Runner::new(config, problem, channel)?.run_seed(config.seed)
}

/// Per-iteration mean and 95% normal-approximation half-width over
/// replications.
#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloTrace {
    pub algorithm: AlgorithmKind,
    pub replications: usize,
    pub seeds: Vec<u64>,
    pub mean: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
    pub mean_distance: Option<Vec<f64>>,
    pub out_of_range: bool,
}

impl MonteCarloTrace {
    /// Upper edge of the 95% interval at iteration k.
    pub fn upper(&self, k: usize) -> f64 {
        self.mean[k] + self.ci_halfwidth[k]
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Seed of replication `i`: `base + i` (wrapping).
pub fn replication_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

/// Runs `f` on a pool sized by `AGMA_WORKERS` when set, else the global pool.
pub fn with_worker_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let workers = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match workers.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Independent replications with seeds `config.seed + i`, merged into a
/// mean/CI trace.
pub fn monte_carlo(
    config: &AlgorithmConfig,
    problem: &ProblemInstance,
    channel: &ChannelModel,
    replications: usize,
) -> Result<MonteCarloTrace> {
    if replications == 0 {
        return Err(Error::invalid("replications", "must be at least 1"));
    }
    if config.early_stop.is_some() {
        return Err(Error::invalid(
            "early_stop",
            "not supported for Monte Carlo runs (traces must share a length)",
        ));
    }
    let runner = Runner::new(config, problem, channel)?;
    let seeds: Vec<u64> = (0..replications)
        .map(|i| replication_seed(config.seed, i))
        .collect();
    let traces: Vec<RunTrace> = with_worker_pool(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, &s)| {
                runner.run_seed(s).map_err(|e| Error::Replication {
                    index: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows: Vec<Vec<f64>> = traces.iter().map(RunTrace::excess_risks).collect();
    let (mean, ci_halfwidth) = mean_ci(&rows);
    let mean_distance = if traces[0].records[0].distance.is_some() {
        let d: Vec<Vec<f64>> = traces
            .iter()
            .map(|t| t.records.iter().map(|r| r.distance.unwrap_or(f64::NAN)).collect())
            .collect();
        Some(mean_ci(&d).0)
    } else {
        None
    };
    Ok(MonteCarloTrace {
        algorithm: config.algorithm,
        replications,
        seeds,
        mean,
        ci_halfwidth,
        mean_distance,
        out_of_range: runner.out_of_range(),
    })
}

/// Column-wise mean and `1.96·s/√R` over equal-length rows.
fn mean_ci(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let r = rows.len() as f64;
    let len = rows[0].len();
    let mut mean = vec![0.0; len];
    let mut half = vec![0.0; len];
    for k in 0..len {
        let m = rows.iter().map(|row| row[k]).sum::<f64>() / r;
        mean[k] = m;
        if rows.len() > 1 {
            let var = rows.iter().map(|row| (row[k] - m).powi(2)).sum::<f64>() / (r - 1.0);
            half[k] = Z95 * (var / r).sqrt();
        }
    }
    (mean, half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{GainDistribution, GainKind};
    use crate::problems::{LossFamily, NodeDataset};

    fn scalar_problem() -> ProblemInstance {
        // F(θ) = ½θ².
        let node = NodeDataset::from_rows(&[vec![1.0]], &[0.0]).unwrap();
        ProblemInstance::new(vec![node], LossFamily::LeastSquares)
            .unwrap()
            .with_computed_constants()
            .unwrap()
    }

    fn ideal() -> ChannelModel {
        ChannelModel::new(GainDistribution::Constant { value: 1.0 }, 0.0, 1.0).unwrap()
    }

    fn small_problem() -> ProblemInstance {
        let rows = [
            vec![1.0, 0.2, 0.0],
            vec![0.1, 2.0, -0.3],
            vec![0.0, -0.4, 1.5],
            vec![0.7, 0.3, 0.2],
        ];
        let n1 = NodeDataset::from_rows(&rows[..2], &[1.0, -1.0]).unwrap();
        let n2 = NodeDataset::from_rows(&rows[2..], &[0.5, 2.0]).unwrap();
        let n3 = NodeDataset::from_rows(&rows[1..3], &[0.0, 1.0]).unwrap();
        ProblemInstance::new(vec![n1, n2, n3], LossFamily::LeastSquares)
            .unwrap()
            .with_computed_constants()
            .unwrap()
    }

    #[test]
    fn scalar_quadratic_one_step_solve() {
        let p = scalar_problem();
        let schedule = MomentumSchedule::new(0.5, 0.0, 0.0, 1.0).unwrap().extended(2);
        let state = IterateState::initial(ModelVector::new(vec![1.0]).unwrap());
        let rule = StepRule {
            beta: 1.0,
            topology: Topology::Mac,
            restart_k0: None,
        };
        let mut rng = iteration_rng(0, 0);
        let next = agma_step(&state, &rule, Some(&schedule), &ideal(), &p, &mut rng).unwrap();
        assert_eq!(next.theta_curr.as_slice(), &[0.0]);
        // θ₁ − θ₀ = −1, so z₁ = −η₀.
        assert_eq!(next.z[0], -schedule.eta(0).unwrap());
    }

    #[test]
    fn perfectly_conditioned_agma_solves_in_one_step() {
        let p = scalar_problem();
        let cfg = AlgorithmConfig::new(AlgorithmKind::Agma, 1.0, 3)
            .with_theta0(ModelVector::new(vec![1.0]).unwrap());
        let t = run(&cfg, &p, &ideal()).unwrap();
        assert!(t.records[1..].iter().all(|r| r.excess_risk == 0.0));
    }

    #[test]
    fn zero_momentum_step_is_gradient_descent() {
        let p = small_problem();
        let theta = ModelVector::new(vec![0.3, -0.2, 0.9]).unwrap();
        let state = IterateState::initial(theta.clone());
        let rule = StepRule {
            beta: 0.2,
            topology: Topology::Mac,
            restart_k0: None,
        };
        let mut rng = iteration_rng(0, 0);
        let next = agma_step(&state, &rule, None, &ideal(), &p, &mut rng).unwrap();
        let gd = theta.plus_scaled(-0.2, &p.global_gradient(&theta).unwrap());
        for i in 0..3 {
            assert!((next.theta_curr[i] - gd[i]).abs() < 1e-15);
        }
        assert_eq!(next.z, next.theta_curr);
    }

    #[test]
    fn max_iters_zero_has_only_initial_record() {
        let p = small_problem();
        let cfg = AlgorithmConfig::new(AlgorithmKind::Agma, 0.1, 0);
        let t = run(&cfg, &p, &ideal()).unwrap();
        assert_eq!(t.records.len(), 1);
        let c = p.constants().unwrap();
        let f0 = p.global_objective(&ModelVector::zeros(3)).unwrap();
        assert_eq!(t.records[0].excess_risk, f0 - c.f_star);
    }

    #[test]
    fn same_seed_same_trace() {
        let p = small_problem();
        let ch = ChannelModel::from_moments(GainKind::Rayleigh, 1.0, None, 1.0, 1.0).unwrap();
        let l = p.constants().unwrap().lipschitz;
        let cfg = AlgorithmConfig::new(AlgorithmKind::Agma, 1.0 / l, 30).with_seed(42);
        let a = run(&cfg, &p, &ch).unwrap();
        let b = run(&cfg, &p, &ch).unwrap();
        assert_eq!(a.records, b.records);
        let c = run(&cfg.clone().with_seed(43), &p, &ch).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn record_count_and_early_stop() {
        let p = small_problem();
        let l = p.constants().unwrap().lipschitz;
        let cfg = AlgorithmConfig::new(AlgorithmKind::Gbma, 1.0 / l, 25);
        assert_eq!(run(&cfg, &p, &ideal()).unwrap().records.len(), 26);
        let mut stop = cfg.clone();
        stop.early_stop = Some(1e-3);
        let t = run(&stop, &p, &ideal()).unwrap();
        assert!(t.records.len() < 26);
        assert!(t.records.last().unwrap().excess_risk < 1e-3);
        assert!(monte_carlo(&stop, &p, &ideal(), 2).is_err());
    }

    #[test]
    fn rejects_out_of_range_beta_unless_forced() {
        let p = small_problem();
        let l = p.constants().unwrap().lipschitz;
        let mut cfg = AlgorithmConfig::new(AlgorithmKind::Agma, 2.1 / l, 5);
        assert!(matches!(
            run(&cfg, &p, &ideal()),
            Err(Error::StepsizeOutOfRange { .. })
        ));
        cfg.allow_out_of_range = true;
        let ch = ideal();
        let r = Runner::new(&cfg, &p, &ch).unwrap();
        assert!(r.out_of_range());
        assert!(r.run_seed(0).is_ok());
    }

    #[test]
    fn noiseless_monte_carlo_has_zero_width() {
        let p = small_problem();
        let l = p.constants().unwrap().lipschitz;
        let cfg = AlgorithmConfig::new(AlgorithmKind::Agma, 1.0 / l, 20);
        let mc = monte_carlo(&cfg, &p, &ideal(), 4).unwrap();
        assert!(mc.ci_halfwidth.iter().all(|&h| h == 0.0));
        let single = run(&cfg, &p, &ideal()).unwrap();
        assert_eq!(mc.mean, single.excess_risks());
    }

    #[test]
    fn single_replication_equals_run() {
        let p = small_problem();
        let ch = ChannelModel::from_moments(GainKind::Rayleigh, 1.0, None, 1.0, 1.0).unwrap();
        let l = p.constants().unwrap().lipschitz;
        let cfg = AlgorithmConfig::new(AlgorithmKind::Agma, 1.0 / l, 15).with_seed(9);
        let mc = monte_carlo(&cfg, &p, &ch, 1).unwrap();
        assert_eq!(mc.mean, run(&cfg, &p, &ch).unwrap().excess_risks());
        assert_eq!(mc.seeds, vec![9]);
    }

    #[test]
    fn divergence_reports_iteration() {
        let p = scalar_problem();
        let mut cfg = AlgorithmConfig::new(AlgorithmKind::Gbma, 1e200, 10)
            .with_theta0(ModelVector::new(vec![1e200]).unwrap());
        cfg.allow_out_of_range = true;
        assert!(matches!(
            run(&cfg, &p, &ideal()),
            Err(Error::Divergence { .. })
        ));
    }
}
