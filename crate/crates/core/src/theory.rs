//! Closed-form excess-risk bounds for the strongly convex and convex regimes,
//! their distortion/noise decomposition, and power-scaling pivots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::momentum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    StronglyConvex,
    Convex,
}

/// Everything the bounds depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub lipschitz: f64,
    pub mu: f64,
    pub mu_h: f64,
    pub sigma_h_sq: f64,
    pub sigma_w_sq: f64,
    pub gradient_bound: f64,
    pub dimension: usize,
    pub nodes: usize,
    /// Transmission power coefficient `E_N`.
    pub power: f64,
    pub beta: f64,
    pub alpha0: f64,
    /// `F(θ₀) − F(θ*)`.
    pub f0_gap: f64,
    /// `‖θ₀ − θ*‖²`.
    pub dist0_sq: f64,
    /// Convex-regime exponent ε in (0, 1).
    pub epsilon: f64,
}

/// Receiver SNR `E_N / σ_w²`; infinite when the receiver is noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Snr {
    Finite(f64),
    NoiseFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    /// Gradient-distortion term driven by gain dispersion.
    pub t2: f64,
    /// Receiver-noise term.
    pub t3: f64,
    /// Channel coefficient of variation `σ_h / μ_h`.
    pub cv_h: f64,
    pub snr: Snr,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("lipschitz", self.lipschitz),
            ("mu", self.mu),
            ("sigma_h_sq", self.sigma_h_sq),
            ("sigma_w_sq", self.sigma_w_sq),
            ("gradient_bound", self.gradient_bound),
            ("f0_gap", self.f0_gap),
            ("dist0_sq", self.dist0_sq),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be non-negative and finite"));
            }
        }
        if self.lipschitz == 0.0 {
            return Err(Error::invalid("lipschitz", "must be positive"));
        }
        if self.mu > self.lipschitz {
            return Err(Error::invalid("mu", "must not exceed L"));
        }
        if !(self.mu_h > 0.0 && self.mu_h.is_finite()) {
            return Err(Error::invalid("mu_h", "must be positive and finite"));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::invalid("E_N", "must be positive and finite"));
        }
        if self.nodes == 0 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid("epsilon", "must lie in (0, 1)"));
        }
        momentum::l_beta_tilde(self.beta, self.mu_h, self.lipschitz)?;
        momentum::gamma0(self.alpha0, self.lipschitz, self.mu)?;
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        if self.mu > 0.0 {
            Regime::StronglyConvex
        } else {
            Regime::Convex
        }
    }

    pub fn l_tilde(&self) -> Result<f64> {
        momentum::l_beta_tilde(self.beta, self.mu_h, self.lipschitz)
    }

    pub fn gamma0(&self) -> Result<f64> {
        momentum::gamma0(self.alpha0, self.lipschitz, self.mu)
    }

    /// `F(θ₀) − F* + (γ₀/2)‖θ₀ − θ*‖²`.
    pub fn initial_divergence(&self) -> Result<f64> {
        Ok(self.f0_gap + 0.5 * self.gamma0()? * self.dist0_sq)
    }

    fn n(&self) -> f64 {
        self.nodes as f64
    }

    /// Per-iteration distortion/noise increment
    /// `(β/μ_h)(σ_h²G/N + dσ_w²/(E_N N²))`.
    pub fn delta_n(&self) -> f64 {
        let n = self.n();
        self.beta / self.mu_h
            * (self.sigma_h_sq * self.gradient_bound / n
                + self.dimension as f64 * self.sigma_w_sq / (self.power * n * n))
    }

    /// Steady-state error `√(L̃/μ)·δ_N` of the strongly convex bound.
    pub fn epsilon_n(&self) -> Result<f64> {
        if self.mu <= 0.0 {
            return Err(Error::NotStronglyConvex);
        }
        Ok((self.l_tilde()? / self.mu).sqrt() * self.delta_n())
    }

    /// Restart index `⌊N^{1−ε}⌋`.
    pub fn k0(&self) -> usize {
        // Guard against N^{1−ε} landing a hair below an integer.
        let raw = self.n().powf(1.0 - self.epsilon);
        (raw * (1.0 + 4.0 * f64::EPSILON)).floor() as usize
    }

    /// Geometric/polynomial transient `λ_k-bound · (initial divergence)`.
    pub fn transient(&self, k: usize) -> Result<f64> {
        let l_tilde = self.l_tilde()?;
        let g0 = self.gamma0()?;
        let strongly = self.regime() == Regime::StronglyConvex;
        let lam = momentum::lambda_bound(k, self.mu / l_tilde, g0, l_tilde, strongly);
        Ok(lam * self.initial_divergence()?)
    }

    /// Strongly convex excess-risk bound at iteration k.
    pub fn strongly_convex_bound(&self, k: usize) -> Result<f64> {
        self.validate()?;
        if self.mu <= 0.0 {
            return Err(Error::NotStronglyConvex);
        }
        Ok(self.transient(k)? + self.epsilon_n()?)
    }

    /// Convex excess-risk bound at iteration `k ≤ k₀`.
    pub fn convex_bound(&self, k: usize) -> Result<f64> {
        self.validate()?;
        let k0 = self.k0();
        if k > k0 {
            return Err(Error::BeyondK0 { k, k0 });
        }
        let l_tilde = self.l_tilde()?;
        let g0 = self.gamma0()?;
        let lam = momentum::lambda_bound(k, 0.0, g0, l_tilde, false);
        let d = self.decomposition(Regime::Convex);
        Ok(lam * self.initial_divergence()? + d.t2 + d.t3)
    }

    /// `(T2, T3, CV_h, SNR_N)` for the selected regime. In the convex regime
    /// the terms carry the `N^ε` exponent form of the convex bound.
    pub fn decomposition(&self, regime: Regime) -> Decomposition {
        let n = self.n();
        let scale = self.beta / self.mu_h;
        let dim = self.dimension as f64;
        let (t2, t3) = match regime {
            Regime::StronglyConvex => {
                let amp = match self.l_tilde() {
                    Ok(l) if self.mu > 0.0 => (l / self.mu).sqrt(),
                    _ => f64::NAN,
                };
                (
                    amp * scale * self.sigma_h_sq * self.gradient_bound / n,
                    amp * scale * dim * self.sigma_w_sq / (self.power * n * n),
                )
            }
            Regime::Convex => (
                scale * self.sigma_h_sq * self.gradient_bound / n.powf(self.epsilon),
                scale * dim * self.sigma_w_sq / (self.power * n.powf(1.0 + self.epsilon)),
            ),
        };
        // A zero numerator is zero regardless of the amplification factor.
        let t2 = if self.sigma_h_sq == 0.0 { 0.0 } else { t2 };
        let t3 = if self.sigma_w_sq == 0.0 { 0.0 } else { t3 };
        Decomposition {
            t2,
            t3,
            cv_h: self.sigma_h_sq.sqrt() / self.mu_h,
            snr: if self.sigma_w_sq == 0.0 {
                Snr::NoiseFree
            } else {
                Snr::Finite(self.power / self.sigma_w_sq)
            },
        }
    }

    /// `k₀ ∈ [1, max_iters]` minimizing `transient(k₀) + k₀·δ_N`.
    pub fn bound_minimizing_k0(&self, max_iters: usize) -> Result<usize> {
        self.validate()?;
        let delta = self.delta_n();
        let mut best = (1, f64::INFINITY);
        for k in 1..=max_iters.max(1) {
            let v = self.transient(k)? + k as f64 * delta;
            if v < best.1 {
                best = (k, v);
            }
        }
        Ok(best.0)
    }
}

/// Minimal transmission power pivot: `N^{ε−2}` (strongly convex) or
/// `N^{−1−ε}` (convex), with unit constant.
pub fn power_scaling_recommendation(nodes: usize, epsilon: f64, regime: Regime) -> Result<f64> {
    if nodes == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    let n = nodes as f64;
    Ok(match regime {
        Regime::StronglyConvex => n.powf(epsilon - 2.0),
        Regime::Convex => n.powf(-1.0 - epsilon),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> BoundInputs {
        BoundInputs {
            lipschitz: 1.0,
            mu: 0.01,
            mu_h: 1.0,
            sigma_h_sq: 1.0,
            sigma_w_sq: 0.0,
            gradient_bound: 1.0,
            dimension: 3,
            nodes: 10,
            power: 1.0,
            beta: 1.0,
            alpha0: 0.5,
            f0_gap: 2.0,
            dist0_sq: 4.0,
            epsilon: 0.5,
        }
    }

    #[test]
    fn delta_examples() {
        let b = base();
        assert!((b.delta_n() - 0.1).abs() < 1e-15);
        let quiet = BoundInputs {
            sigma_h_sq: 0.0,
            ..base()
        };
        assert_eq!(quiet.delta_n(), 0.0);
        let noisy = BoundInputs {
            sigma_h_sq: 0.0,
            sigma_w_sq: 1.0,
            ..base()
        };
        let doubled = BoundInputs { nodes: 20, ..noisy.clone() };
        assert!((doubled.delta_n() - noisy.delta_n() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn strongly_convex_examples() {
        let quiet = BoundInputs {
            sigma_h_sq: 0.0,
            ..base()
        };
        let init = quiet.initial_divergence().unwrap();
        assert_eq!(quiet.strongly_convex_bound(0).unwrap(), init);
        assert!(quiet.strongly_convex_bound(20_000).unwrap() < 1e-300);
        let convex = BoundInputs { mu: 0.0, ..base() };
        assert!(matches!(
            convex.strongly_convex_bound(1),
            Err(Error::NotStronglyConvex)
        ));
    }

    #[test]
    fn q_one_kills_transient() {
        assert_eq!(momentum::lambda_bound(1, 1.0, 1.0, 1.0, true), 0.0);
    }

    #[test]
    fn convex_examples() {
        let b = BoundInputs {
            mu: 0.0,
            nodes: 256,
            ..base()
        };
        assert_eq!(b.k0(), 16);
        let init = b.initial_divergence().unwrap();
        let d = b.decomposition(Regime::Convex);
        assert!((b.convex_bound(0).unwrap() - (init + d.t2 + d.t3)).abs() < 1e-15);
        assert!(matches!(
            b.convex_bound(17),
            Err(Error::BeyondK0 { k: 17, k0: 16 })
        ));
        let big = BoundInputs {
            nodes: 1 << 40,
            sigma_w_sq: 1.0,
            ..b
        };
        let dd = big.decomposition(Regime::Convex);
        assert!(dd.t2 + dd.t3 < 1e-5);
    }

    #[test]
    fn convex_noise_dominates_accumulated_delta() {
        for nodes in [10, 37, 100, 256, 1000] {
            for eps in [0.1, 0.3, 0.5, 0.9] {
                let b = BoundInputs {
                    mu: 0.0,
                    nodes,
                    epsilon: eps,
                    sigma_w_sq: 1.0,
                    ..base()
                };
                let d = b.decomposition(Regime::Convex);
                for k in 0..=b.k0() {
                    assert!(k as f64 * b.delta_n() <= (d.t2 + d.t3) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let b = BoundInputs {
            sigma_h_sq: 0.0,
            sigma_w_sq: 0.0,
            ..base()
        };
        let d = b.decomposition(Regime::StronglyConvex);
        assert_eq!((d.t2, d.t3, d.cv_h), (0.0, 0.0, 0.0));
        assert_eq!(d.snr, Snr::NoiseFree);

        let b = BoundInputs {
            sigma_w_sq: 2.0,
            ..base()
        };
        let d = b.decomposition(Regime::StronglyConvex);
        assert_eq!(d.snr, Snr::Finite(0.5));
        let k = 7;
        let identity = b.strongly_convex_bound(k).unwrap() - b.transient(k).unwrap();
        assert!((identity - (d.t2 + d.t3)).abs() <= 1e-12 * identity);
        assert!((b.epsilon_n().unwrap() - (d.t2 + d.t3)).abs() <= 1e-12 * identity);
    }

    #[test]
    fn strongly_convex_monotone() {
        let b = BoundInputs {
            sigma_w_sq: 1.0,
            ..base()
        };
        let mut prev = f64::INFINITY;
        for k in 0..500 {
            let v = b.strongly_convex_bound(k).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for nodes in 1..300 {
            let v = BoundInputs { nodes, ..b.clone() }.strongly_convex_bound(5).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn power_scaling_examples() {
        let sc = power_scaling_recommendation(100, 1.0, Regime::StronglyConvex).unwrap();
        assert!((sc - 0.01).abs() < 1e-15);
        let cv = power_scaling_recommendation(100, 0.5, Regime::Convex).unwrap();
        assert!((cv - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn recommended_power_drives_noise_term_down() {
        let mut prev = f64::INFINITY;
        let mut first = None;
        for nodes in [10, 100, 1000, 10_000, 100_000] {
            let power = power_scaling_recommendation(nodes, 0.5, Regime::StronglyConvex).unwrap();
            let b = BoundInputs {
                nodes,
                power,
                sigma_w_sq: 1.0,
                ..base()
            };
            let t3 = b.decomposition(Regime::StronglyConvex).t3;
            assert!(t3 < prev);
            first.get_or_insert(t3);
            prev = t3;
        }
        assert!(prev < first.unwrap() / 50.0);
    }

    #[test]
    fn bound_minimizing_k0_is_interior_when_noise_present() {
        let b = BoundInputs {
            mu: 0.0,
            nodes: 100,
            sigma_w_sq: 1.0,
            ..base()
        };
        let k = b.bound_minimizing_k0(1000).unwrap();
        assert!(k > 1 && k < 1000);
    }
}
