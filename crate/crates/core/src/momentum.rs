//! Control sequences α_k, η_k, λ_k, γ_k and the constants L̃_β and γ₀.

use serde::Serialize;

use crate::error::{Error, Result};

/// Upper end of the convergent stepsize interval: `2 / (μ_h L)`.
pub fn stepsize_upper(mu_h: f64, lipschitz: f64) -> f64 {
    2.0 / (mu_h * lipschitz)
}

/// Effective Lipschitz constant `L̃_β = 1 / (β (2/μ_h − βL) μ_h²)`.
pub fn l_beta_tilde(beta: f64, mu_h: f64, lipschitz: f64) -> Result<f64> {
    if !(mu_h > 0.0 && mu_h.is_finite()) {
        return Err(Error::invalid("mu_h", "must be positive and finite"));
    }
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::invalid("L", "must be positive and finite"));
    }
    let upper = stepsize_upper(mu_h, lipschitz);
    if !(beta > 0.0 && beta < upper) {
        return Err(Error::StepsizeOutOfRange { beta, upper });
    }
    Ok(1.0 / (beta * (2.0 / mu_h - beta * lipschitz) * mu_h * mu_h))
}

/// `γ₀ = α₀(α₀L − μ)/(1 − α₀)`; requires `α₀ ∈ (0,1)` and, when `μ > 0`,
/// `α₀ > √(μ/L)`.
pub fn gamma0(alpha0: f64, lipschitz: f64, mu: f64) -> Result<f64> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::invalid("L", "must be positive and finite"));
    }
    if !(mu >= 0.0 && mu <= lipschitz) {
        return Err(Error::invalid("mu", "need 0 <= mu <= L"));
    }
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(Error::invalid("alpha0", format!("{alpha0} not in (0, 1)")));
    }
    let floor = (mu / lipschitz).sqrt();
    if mu > 0.0 && alpha0 <= floor {
        return Err(Error::invalid(
            "alpha0",
            format!("{alpha0} not in (sqrt(mu/L), 1) = ({floor}, 1)"),
        ));
    }
    Ok(alpha0 * (alpha0 * lipschitz - mu) / (1.0 - alpha0))
}

/// Default α₀: midpoint of `(√(μ/L), 1)` when strongly convex, 0.5 otherwise.
pub fn default_alpha0(mu: f64, lipschitz: f64) -> f64 {
    if mu > 0.0 {
        0.5 * ((mu / lipschitz).sqrt() + 1.0)
    } else {
        0.5
    }
}

fn guard_unit(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        1.0 - f64::EPSILON
    } else if alpha <= 0.0 {
        f64::MIN_POSITIVE
    } else {
        alpha
    }
}

/// The root in (0,1) of `α² + (α_k² − q)α − α_k² = 0`.
pub fn next_alpha(alpha_k: f64, q: f64) -> Result<f64> {
    if !(alpha_k > 0.0 && alpha_k <= 1.0) {
        return Err(Error::invalid("alpha_k", format!("{alpha_k} not in (0, 1]")));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(Error::invalid("q", format!("{q} not in [0, 1)")));
    }
    let a2 = alpha_k * alpha_k;
    let b = a2 - q;
    let disc = (b * b + 4.0 * a2).sqrt();
    // Pick the cancellation-free form of the positive root.
    let root = if b >= 0.0 {
        2.0 * a2 / (b + disc)
    } else {
        (disc - b) / 2.0
    };
    Ok(guard_unit(root))
}

/// `η_k = α_k(1 − α_k)/(α_{k+1} + α_k²)`.
pub fn eta_k(alpha_k: f64, alpha_next: f64) -> Result<f64> {
    for (name, a) in [("alpha_k", alpha_k), ("alpha_next", alpha_next)] {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::invalid(name, format!("{a} not in (0, 1)")));
        }
    }
    Ok(alpha_k * (1.0 - alpha_k) / (alpha_next + alpha_k * alpha_k))
}

/// Closed-form upper bound on `λ_k`: `(1 − √q)^k` when strongly convex,
/// `4L̃/(2√L̃ + k√γ₀)²` otherwise.
pub fn lambda_bound(k: usize, q: f64, gamma0: f64, l_tilde: f64, strongly_convex: bool) -> f64 {
    if strongly_convex {
        (1.0 - q.sqrt()).powi(k as i32)
    } else {
        // 4L̃/(2√L̃ + k√γ₀)², written so that k = 0 gives exactly 1.
        let denom = 2.0 + k as f64 * (gamma0 / l_tilde).sqrt();
        4.0 / (denom * denom)
    }
}

/// Lazily extended α/λ/γ sequences for one `(α₀, q)` pair.
///
/// α_k is tracked through its offset above the fixed point √q, kept in log
/// space, so `α_k > √q` stays representable after α_k itself has rounded onto
/// √q.
#[derive(Debug, Clone, Serialize)]
pub struct MomentumSchedule {
    alpha0: f64,
    q: f64,
    mu: f64,
    gamma0: f64,
    sqrt_q: f64,
    alphas: Vec<f64>,
    log_excess: Vec<f64>,
    lambdas: Vec<f64>,
    log_lambdas: Vec<f64>,
    gammas: Vec<f64>,
}

impl MomentumSchedule {
    pub fn new(alpha0: f64, q: f64, mu: f64, gamma0: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0 < 1.0) {
            return Err(Error::invalid("alpha0", format!("{alpha0} not in (0, 1)")));
        }
        if !(0.0..1.0).contains(&q) {
            return Err(Error::invalid("q", format!("{q} not in [0, 1)")));
        }
        let sqrt_q = q.sqrt();
        if alpha0 <= sqrt_q {
            return Err(Error::invalid(
                "alpha0",
                format!("{alpha0} must exceed sqrt(q) = {sqrt_q}"),
            ));
        }
        if !(mu >= 0.0 && gamma0 >= 0.0 && gamma0.is_finite()) {
            return Err(Error::invalid("gamma0", "need mu >= 0 and finite gamma0 >= 0"));
        }
        Ok(Self {
            alpha0,
            q,
            mu,
            gamma0,
            sqrt_q,
            alphas: vec![alpha0],
            log_excess: vec![(alpha0 - sqrt_q).ln()],
            lambdas: vec![1.0],
            log_lambdas: vec![0.0],
            gammas: vec![gamma0],
        })
    }

    /// Schedule with `q = μ/L̃` and `γ₀` from `(α₀, L, μ)`.
    pub fn for_constants(alpha0: f64, mu: f64, lipschitz: f64, l_tilde: f64) -> Result<Self> {
        let g0 = gamma0(alpha0, lipschitz, mu)?;
        Self::new(alpha0, mu / l_tilde, mu, g0)
    }

    /// Generates entries through index `k`.
    pub fn extend_to(&mut self, k: usize) {
        let s = self.sqrt_q;
        let ln_1ms = (-s).ln_1p();
        while self.alphas.len() <= k {
            let i = self.alphas.len() - 1;
            let a = self.alphas[i];
            let ln_d = self.log_excess[i];
            // δ' = 2b(1−s) / ((2s+b) + √((2s+b)² + 4b(1−s))), b = δ(2s+δ).
            let d = ln_d.exp();
            let ln_b = ln_d + (2.0 * s + d).ln();
            let b = ln_b.exp();
            let c = 2.0 * s + b;
            let denom = c + (c * c + 4.0 * b * (1.0 - s)).sqrt();
            let ln_next = std::f64::consts::LN_2 + ln_b + ln_1ms - denom.ln();
            let next = guard_unit(s + ln_next.exp());
            self.alphas.push(next);
            self.log_excess.push(ln_next);
            let lambda = (1.0 - a) * self.lambdas[i];
            self.lambdas.push(lambda);
            self.log_lambdas.push(self.log_lambdas[i] + (-a).ln_1p());
            // Closed form of γ_{k+1} = (1−α_k)γ_k + α_kμ; cannot round below μ.
            self.gammas.push(self.mu + (self.gamma0 - self.mu) * lambda);
        }
    }

    /// Schedule generated through index `k`.
    pub fn extended(mut self, k: usize) -> Self {
        self.extend_to(k);
        self
    }

    /// Number of generated entries (indices `0..len`).
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn alpha(&self, k: usize) -> Option<f64> {
        self.alphas.get(k).copied()
    }

    /// `ln(α_k − √q)`; finite exactly when `α_k > √q`.
    pub fn log_alpha_excess(&self, k: usize) -> Option<f64> {
        self.log_excess.get(k).copied()
    }

    /// `η_k`; needs entries through `k + 1`.
    pub fn eta(&self, k: usize) -> Option<f64> {
        let a = self.alpha(k)?;
        let next = self.alpha(k + 1)?;
        Some(a * (1.0 - a) / (next + a * a))
    }

    pub fn lambda(&self, k: usize) -> Option<f64> {
        self.lambdas.get(k).copied()
    }

    /// `ln λ_k`, which stays finite after `λ_k` underflows.
    pub fn log_lambda(&self, k: usize) -> Option<f64> {
        self.log_lambdas.get(k).copied()
    }

    /// `ln(γ_k − μ) = ln(γ₀ − μ) + ln λ_k`; finite exactly when `γ_k > μ`.
    pub fn log_gamma_excess(&self, k: usize) -> Option<f64> {
        Some((self.gamma0 - self.mu).ln() + self.log_lambda(k)?)
    }

    pub fn gamma(&self, k: usize) -> Option<f64> {
        self.gammas.get(k).copied()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }
}
