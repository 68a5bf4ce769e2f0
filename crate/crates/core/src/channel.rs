//! Block-fading gains, receiver noise, and the two aggregation topologies:
//! over-the-air superposition on a shared MAC and orthogonal (FDM) channels.
//!
//! Phase correction at the transmitter cancels the channel phase exactly, so
//! only real non-negative gain magnitudes are simulated.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemInstance;
use crate::vector::ModelVector;

const MOMENT_TOL: f64 = 1e-12;

/// Variance-to-squared-mean ratio of a Rayleigh magnitude: `(4 − π)/π`.
pub const RAYLEIGH_CV_SQ: f64 = 4.0 / std::f64::consts::PI - 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GainDistribution {
    /// Rayleigh magnitude with scale σ: mean `σ√(π/2)`, variance `(4 − π)σ²/2`.
    Rayleigh { scale: f64 },
    /// Uniform on `[lo, hi]` with `0 ≤ lo ≤ hi`.
    Uniform { lo: f64, hi: f64 },
    Constant { value: f64 },
}

/// Distribution family selector for [`ChannelModel::from_moments`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainKind {
    Rayleigh,
    Uniform,
    Constant,
}

impl GainDistribution {
    fn validate(&self) -> Result<()> {
        match *self {
            GainDistribution::Rayleigh { scale } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::invalid("rayleigh scale", "must be positive and finite"));
                }
            }
            GainDistribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo || hi == 0.0 {
                    return Err(Error::invalid(
                        "uniform gain",
                        format!("need 0 <= lo <= hi with hi > 0, got [{lo}, {hi}]"),
                    ));
                }
            }
            GainDistribution::Constant { value } => {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(Error::invalid("constant gain", "must be positive and finite"));
                }
            }
        }
        Ok(())
    }

    /// `(mean, variance)`.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            GainDistribution::Rayleigh { scale } => (
                scale * (std::f64::consts::PI / 2.0).sqrt(),
                (4.0 - std::f64::consts::PI) / 2.0 * scale * scale,
            ),
            GainDistribution::Uniform { lo, hi } => ((lo + hi) / 2.0, (hi - lo).powi(2) / 12.0),
            GainDistribution::Constant { value } => (value, 0.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            GainDistribution::Rayleigh { scale } => {
                let u: f64 = rng.random();
                scale * (-2.0 * (-u).ln_1p()).sqrt()
            }
            GainDistribution::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                lo + (hi - lo) * u
            }
            GainDistribution::Constant { value } => value,
        }
    }
}

/// Fading gains plus receiver noise and transmit power coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    gain: GainDistribution,
    mu_h: f64,
    sigma_h_sq: f64,
    sigma_w_sq: f64,
    power: f64,
}

impl ChannelModel {
    pub fn new(gain: GainDistribution, sigma_w_sq: f64, power: f64) -> Result<Self> {
        gain.validate()?;
        if !(sigma_w_sq >= 0.0 && sigma_w_sq.is_finite()) {
            return Err(Error::invalid("sigma_w_sq", "must be non-negative and finite"));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::invalid("E_N", "must be positive and finite"));
        }
        let (mu_h, sigma_h_sq) = gain.moments();
        Ok(Self {
            gain,
            mu_h,
            sigma_h_sq,
            sigma_w_sq,
            power,
        })
    }

    /// Builds the member of `kind` with the requested gain moments.
    ///
    /// `sigma_h_sq = None` takes the family's natural variance (Rayleigh's fixed
    /// CV, zero for Constant); Uniform requires it. A Rayleigh request whose
    /// variance disagrees with the fixed CV is rejected.
    pub fn from_moments(
        kind: GainKind,
        mu_h: f64,
        sigma_h_sq: Option<f64>,
        sigma_w_sq: f64,
        power: f64,
    ) -> Result<Self> {
        if !(mu_h > 0.0 && mu_h.is_finite()) {
            return Err(Error::invalid("mu_h", "must be positive and finite"));
        }
        if let Some(s) = sigma_h_sq {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid("sigma_h_sq", "must be non-negative and finite"));
            }
        }
        let gain = match kind {
            GainKind::Rayleigh => GainDistribution::Rayleigh {
                scale: mu_h / (std::f64::consts::PI / 2.0).sqrt(),
            },
            GainKind::Uniform => {
                let s = sigma_h_sq.ok_or_else(|| {
                    Error::invalid("sigma_h_sq", "required for uniform gains")
                })?;
                let half = (3.0 * s).sqrt();
                if half > mu_h {
                    return Err(Error::invalid(
                        "sigma_h_sq",
                        format!(
                            "uniform gains with mean {mu_h} and variance {s} would go negative; \
                             need sigma_h_sq <= mu_h^2/3"
                        ),
                    ));
                }
                GainDistribution::Uniform {
                    lo: mu_h - half,
                    hi: mu_h + half,
                }
            }
            GainKind::Constant => GainDistribution::Constant { value: mu_h },
        };
        let model = Self::new(gain, sigma_w_sq, power)?;
        if let Some(s) = sigma_h_sq {
            if (model.sigma_h_sq - s).abs() > MOMENT_TOL * s.max(1.0) {
                return Err(Error::invalid(
                    "sigma_h_sq",
                    format!(
                        "{kind:?} gains with mean {mu_h} have variance {}, not {s}",
                        model.sigma_h_sq
                    ),
                ));
            }
        }
        if (model.mu_h - mu_h).abs() > MOMENT_TOL * mu_h.max(1.0) {
            return Err(Error::invalid("mu_h", "gain mean could not be matched"));
        }
        Ok(model)
    }

    pub fn gain(&self) -> GainDistribution {
        self.gain
    }

    pub fn mu_h(&self) -> f64 {
        self.mu_h
    }

    pub fn sigma_h_sq(&self) -> f64 {
        self.sigma_h_sq
    }

    pub fn sigma_w_sq(&self) -> f64 {
        self.sigma_w_sq
    }

    /// Transmission power coefficient `E_N`.
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::new(self.gain, self.sigma_w_sq, power)
    }

    pub fn with_noise(&self, sigma_w_sq: f64) -> Result<Self> {
        Self::new(self.gain, sigma_w_sq, self.power)
    }

    /// Per-coordinate variance of the MAC receiver noise: `σ_w² / (N² E_N)`.
    pub fn mac_noise_variance(&self, nodes: usize) -> f64 {
        let n = nodes as f64;
        self.sigma_w_sq / (n * n * self.power)
    }

    /// Draws one iteration's gains and MAC noise. Always consumes `N + d`
    /// draws so streams stay aligned across noise levels.
    pub fn sample_realization<R: Rng + ?Sized>(
        &self,
        nodes: usize,
        dimension: usize,
        rng: &mut R,
    ) -> Result<ChannelRealization> {
        if nodes == 0 || dimension == 0 {
            return Err(Error::invalid("realization", "need N >= 1 and d >= 1"));
        }
        let gains = (0..nodes).map(|_| self.gain.sample(rng)).collect();
        let sd = self.mac_noise_variance(nodes).sqrt();
        let noise = (0..dimension)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(ChannelRealization {
            gains,
            noise: ModelVector::from_unchecked(noise),
        })
    }
}

/// One iteration's per-node gains and the receiver noise vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub gains: Vec<f64>,
    pub noise: ModelVector,
}

fn check_grads(grads: &[ModelVector], nodes: usize) -> Result<usize> {
    if grads.len() != nodes {
        return Err(Error::LengthMismatch {
            expected: nodes,
            got: grads.len(),
        });
    }
    let d = grads
        .first()
        .ok_or_else(|| Error::invalid("local gradients", "need at least one"))?
        .dim();
    for g in grads {
        g.ensure_dim(d)?;
    }
    Ok(d)
}

/// `(1/N) Σ h_n g_n + w`.
pub fn mac_aggregate(grads: &[ModelVector], realization: &ChannelRealization) -> Result<ModelVector> {
    let d = check_grads(grads, realization.gains.len())?;
    realization.noise.ensure_dim(d)?;
    let n = grads.len() as f64;
    let mut out = ModelVector::zeros(d);
    for (g, h) in grads.iter().zip(&realization.gains) {
        out.axpy(h / n, g);
    }
    out.axpy(1.0, &realization.noise);
    Ok(out)
}

/// `(1/N) Σ (h_n g_n + w_n)` with independent per-node noise of variance
/// `σ_w²/E_N` per coordinate.
pub fn fdm_aggregate<R: Rng + ?Sized>(
    grads: &[ModelVector],
    model: &ChannelModel,
    rng: &mut R,
) -> Result<ModelVector> {
    let d = check_grads(grads, grads.len())?;
    let n = grads.len() as f64;
    let sd = (model.sigma_w_sq / model.power).sqrt();
    let mut out = ModelVector::zeros(d);
    for g in grads {
        let h = model.gain.sample(rng);
        out.axpy(h / n, g);
        for i in 0..d {
            out[i] += sd * rng.sample::<f64, _>(StandardNormal) / n;
        }
    }
    Ok(out)
}

/// `(E[v], E‖v‖²)` of the MAC output for fixed local gradients.
pub fn analytic_moments(model: &ChannelModel, grads: &[ModelVector]) -> Result<(ModelVector, f64)> {
    let d = check_grads(grads, grads.len())?;
    let n = grads.len() as f64;
    let mut mean_grad = ModelVector::zeros(d);
    let mut power_sum = 0.0;
    for g in grads {
        mean_grad.axpy(1.0 / n, g);
        power_sum += g.norm_sq();
    }
    let second = model.mu_h * model.mu_h * mean_grad.norm_sq()
        + model.sigma_h_sq / (n * n) * power_sum
        + d as f64 * model.sigma_w_sq / (model.power * n * n);
    mean_grad.scale(model.mu_h);
    Ok((mean_grad, second))
}

/// Monte Carlo deviation of the MAC output's moments from their closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    /// `‖v̄ − E[v]‖ / ‖E[v]‖`, or the absolute deviation when `E[v] = 0`.
    pub mean_error: f64,
    /// `|mean(‖v‖²) − E‖v‖²| / E‖v‖²`.
    pub second_moment_error: f64,
    /// Largest per-coordinate deviation of the mean in standard errors.
    pub mean_z: f64,
    /// Deviation of the second moment in standard errors.
    pub second_moment_z: f64,
    pub replications: usize,
}

impl MomentCheck {
    pub fn within(&self, standard_errors: f64) -> bool {
        self.mean_z <= standard_errors && self.second_moment_z <= standard_errors
    }
}

/// Compares sample moments of `v` at fixed `z` against the closed forms.
pub fn moment_check<R: Rng + ?Sized>(
    model: &ChannelModel,
    problem: &ProblemInstance,
    z: &ModelVector,
    replications: usize,
    rng: &mut R,
) -> Result<MomentCheck> {
    if replications < 2 {
        return Err(Error::invalid("replications", "need at least 2"));
    }
    let grads = problem.local_gradients(z)?;
    let (mean, second) = analytic_moments(model, &grads)?;
    let d = z.dim();
    let r = replications as f64;

    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    let mut p_sum = 0.0;
    let mut p_sum_sq = 0.0;
    for _ in 0..replications {
        let real = model.sample_realization(grads.len(), d, rng)?;
        let v = mac_aggregate(&grads, &real)?;
        for i in 0..d {
            let c = v[i] - mean[i];
            sum[i] += c;
            sum_sq[i] += c * c;
        }
        let p = v.norm_sq() - second;
        p_sum += p;
        p_sum_sq += p * p;
    }

    let mut dev_sq = 0.0;
    let mut mean_z: f64 = 0.0;
    for i in 0..d {
        let m = sum[i] / r;
        dev_sq += m * m;
        let var = (sum_sq[i] - r * m * m) / (r - 1.0);
        mean_z = mean_z.max(z_score(m, var, r));
    }
    let p_mean = p_sum / r;
    let p_var = (p_sum_sq - r * p_mean * p_mean) / (r - 1.0);
    let mean_norm = mean.norm();
    Ok(MomentCheck {
        mean_error: if mean_norm > 0.0 {
            dev_sq.sqrt() / mean_norm
        } else {
            dev_sq.sqrt()
        },
        second_moment_error: if second > 0.0 {
            p_mean.abs() / second
        } else {
            p_mean.abs()
        },
        mean_z,
        second_moment_z: z_score(p_mean, p_var, r),
        replications,
    })
}

fn z_score(deviation: f64, variance: f64, r: f64) -> f64 {
    let se = (variance.max(0.0) / r).sqrt();
    if se > 0.0 {
        deviation.abs() / se
    } else if deviation.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}
