//! Loss families, per-node local losses, the global objective `F = (1/N) Σ f_n`,
//! and its analytic constants.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::vector::ModelVector;

/// Ridge used for the minimum-norm least-squares solution of a singular system.
pub const SINGULAR_RIDGE: f64 = 1e-12;
/// Gradient-norm target of the centralized logistic reference solver.
pub const REFERENCE_GRADIENT_TOL: f64 = 1e-12;
/// Iteration budget of the centralized logistic reference solver.
pub const REFERENCE_MAX_ITERS: usize = 1_000_000;
/// Number of interior points sampled on the segment `θ₀ → θ*` when estimating G.
pub const GRADIENT_BOUND_SAMPLES: usize = 100;
/// Safety factor applied to the sampled gradient-power supremum.
pub const GRADIENT_BOUND_INFLATION: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LossFamily {
    /// `f_n(θ) = 1/(2|D_n|) Σ (xᵀθ − y)²`.
    LeastSquares,
    /// `f_n(θ) = 1/|D_n| Σ log(1 + exp(−y xᵀθ)) + (λ/2)‖θ‖²`, labels in {−1, +1}.
    RegularizedLogistic { lambda: f64 },
    /// `f_n(θ) = 1/(2|D_n|) Σ log((xᵀθ − y)² + 1)`; non-convex.
    LogLoss,
}

impl LossFamily {
    pub fn name(&self) -> &'static str {
        match self {
            LossFamily::LeastSquares => "least-squares",
            LossFamily::RegularizedLogistic { .. } => "regularized-logistic",
            LossFamily::LogLoss => "log-loss",
        }
    }
}

/// One node's local samples.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDataset {
    inputs: DMatrix<f64>,
    labels: DVector<f64>,
}

impl NodeDataset {
    pub fn new(inputs: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        if inputs.nrows() != labels.len() {
            return Err(Error::LengthMismatch {
                expected: inputs.nrows(),
                got: labels.len(),
            });
        }
        if inputs.nrows() == 0 {
            return Err(Error::invalid("node dataset", "needs at least one sample"));
        }
        if inputs.ncols() == 0 {
            return Err(Error::invalid("node dataset", "needs at least one feature"));
        }
        Ok(Self { inputs, labels })
    }

    /// Builds a dataset from row-major feature rows.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(
            DMatrix::from_row_slice(rows.len(), d, &flat),
            DVector::from_column_slice(labels),
        )
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.inputs.ncols()
    }

    /// `(1/|D_n|) Xᵀ X`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.inputs.tr_mul(&self.inputs) / self.len() as f64
    }
}

/// Analytic constants of the global objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Lipschitz constant L of ∇F.
    pub lipschitz: f64,
    /// Strong-convexity constant μ of F (0 for merely convex objectives).
    pub strong_convexity: f64,
    /// Bound G on the local gradient power ‖∇f_n‖².
    pub gradient_bound: f64,
    pub theta_star: ModelVector,
    pub f_star: f64,
}

impl ProblemConstants {
    pub fn is_strongly_convex(&self) -> bool {
        self.strong_convexity > 0.0
    }

    /// `μ / L`.
    pub fn inverse_condition(&self) -> f64 {
        self.strong_convexity / self.lipschitz
    }
}

/// A node-partitioned learning problem.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    nodes: Vec<NodeDataset>,
    family: LossFamily,
    dimension: usize,
    constants: Option<ProblemConstants>,
}

impl ProblemInstance {
    pub fn new(nodes: Vec<NodeDataset>, family: LossFamily) -> Result<Self> {
        let first = nodes
            .first()
            .ok_or_else(|| Error::invalid("nodes", "need at least one node"))?;
        let dimension = first.dimension();
        for node in &nodes {
            if node.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: node.dimension(),
                });
            }
        }
        if let LossFamily::RegularizedLogistic { lambda } = family {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::invalid("lambda", "must be positive and finite"));
            }
            for node in &nodes {
                if node.labels.iter().any(|&y| y != 1.0 && y != -1.0) {
                    return Err(Error::LabelMapping(
                        "logistic labels must be -1 or +1".into(),
                    ));
                }
            }
        }
        Ok(Self {
            nodes,
            family,
            dimension,
            constants: None,
        })
    }

    /// Attaches externally known constants (e.g. exact by construction).
    pub fn with_constants(mut self, constants: ProblemConstants) -> Result<Self> {
        constants.theta_star.ensure_dim(self.dimension)?;
        if constants.strong_convexity > constants.lipschitz {
            return Err(Error::invalid("constants", "mu must not exceed L"));
        }
        self.constants = Some(constants);
        Ok(self)
    }

    /// Computes and attaches constants with `θ₀ = 0`.
    pub fn with_computed_constants(self) -> Result<Self> {
        let c = self.compute_constants()?;
        self.with_constants(c)
    }

    pub fn nodes(&self) -> &[NodeDataset] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn family(&self) -> LossFamily {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn constants(&self) -> Option<&ProblemConstants> {
        self.constants.as_ref()
    }

    pub fn require_constants(&self) -> Result<&ProblemConstants> {
        self.constants
            .as_ref()
            .ok_or(Error::ConstantsUnavailable(self.family.name()))
    }

    fn node(&self, node: usize) -> Result<&NodeDataset> {
        self.nodes.get(node).ok_or(Error::NodeOutOfRange {
            node,
            count: self.nodes.len(),
        })
    }

    /// `f_n(θ)`.
    pub fn local_objective(&self, node: usize, theta: &ModelVector) -> Result<f64> {
        let data = self.node(node)?;
        theta.ensure_dim(self.dimension)?;
        Ok(local_value(data, self.family, &theta.to_dvector()))
    }

    /// `∇f_n(θ)`.
    pub fn local_gradient(&self, node: usize, theta: &ModelVector) -> Result<ModelVector> {
        let data = self.node(node)?;
        theta.ensure_dim(self.dimension)?;
        Ok(ModelVector::from_dvector(local_grad(
            data,
            self.family,
            &theta.to_dvector(),
        )))
    }

    /// All N local gradients at θ.
    pub fn local_gradients(&self, theta: &ModelVector) -> Result<Vec<ModelVector>> {
        theta.ensure_dim(self.dimension)?;
        let t = theta.to_dvector();
        Ok(self
            .nodes
            .iter()
            .map(|n| ModelVector::from_dvector(local_grad(n, self.family, &t)))
            .collect())
    }

    /// `F(θ) = (1/N) Σ f_n(θ)`.
    pub fn global_objective(&self, theta: &ModelVector) -> Result<f64> {
        theta.ensure_dim(self.dimension)?;
        let t = theta.to_dvector();
        let sum: f64 = self
            .nodes
            .iter()
            .map(|n| local_value(n, self.family, &t))
            .sum();
        Ok(sum / self.nodes.len() as f64)
    }

    /// `∇F(θ)`.
    pub fn global_gradient(&self, theta: &ModelVector) -> Result<ModelVector> {
        theta.ensure_dim(self.dimension)?;
        let t = theta.to_dvector();
        let mut acc = DVector::zeros(self.dimension);
        for n in &self.nodes {
            acc += local_grad(n, self.family, &t);
        }
        acc /= self.nodes.len() as f64;
        Ok(ModelVector::from_dvector(acc))
    }

    /// Analytic constants with the iterate region anchored at `θ₀ = 0`.
    pub fn compute_constants(&self) -> Result<ProblemConstants> {
        self.compute_constants_from(&ModelVector::zeros(self.dimension))
    }

    /// Analytic constants; `theta0` anchors the sampled region for G.
    pub fn compute_constants_from(&self, theta0: &ModelVector) -> Result<ProblemConstants> {
        theta0.ensure_dim(self.dimension)?;
        let (lipschitz, strong_convexity, theta_star) = match self.family {
            LossFamily::LeastSquares => self.least_squares_constants()?,
            LossFamily::RegularizedLogistic { lambda } => {
                let max_row_sq = self
                    .nodes
                    .iter()
                    .flat_map(|n| n.inputs.row_iter().map(|r| r.norm_squared()))
                    .fold(0.0, f64::max);
                let l = lambda + max_row_sq / 4.0;
                let theta_star = self.reference_minimizer(l, lambda)?;
                (l, lambda, theta_star)
            }
            LossFamily::LogLoss => return Err(Error::ConstantsUnavailable(self.family.name())),
        };
        let f_star = self.global_objective(&theta_star)?;
        let gradient_bound = self.estimate_gradient_bound(theta0, &theta_star)?;
        Ok(ProblemConstants {
            lipschitz,
            strong_convexity: strong_convexity.min(lipschitz),
            gradient_bound,
            theta_star,
            f_star,
        })
    }

    /// `1.1 · max_n ‖∇f_n(θ)‖²` over θ₀, θ* and 100 interior points of the
    /// segment between them.
    pub fn estimate_gradient_bound(
        &self,
        theta0: &ModelVector,
        theta_star: &ModelVector,
    ) -> Result<f64> {
        theta0.ensure_dim(self.dimension)?;
        theta_star.ensure_dim(self.dimension)?;
        let steps = GRADIENT_BOUND_SAMPLES + 1;
        let mut sup: f64 = 0.0;
        for i in 0..=steps {
            let point = theta0.lerp(theta_star, i as f64 / steps as f64);
            for g in self.local_gradients(&point)? {
                sup = sup.max(g.norm_sq());
            }
        }
        Ok(GRADIENT_BOUND_INFLATION * sup)
    }

    fn least_squares_constants(&self) -> Result<(f64, f64, ModelVector)> {
        let d = self.dimension;
        let n = self.nodes.len() as f64;
        let mut l_sum = 0.0;
        let mut mu_sum = 0.0;
        let mut hessian = DMatrix::zeros(d, d);
        let mut rhs = DVector::zeros(d);
        for node in &self.nodes {
            let gram = node.gram();
            let (lo, hi) = linalg::extreme_eigenvalues(&gram)?;
            l_sum += hi;
            mu_sum += lo;
            hessian += &gram;
            rhs += node.inputs.tr_mul(&node.labels) / node.len() as f64;
        }
        hessian /= n;
        rhs /= n;
        let (global_lo, global_hi) = linalg::extreme_eigenvalues(&hessian)?;
        let singular = global_lo <= 1e-10 * global_hi;
        let ridge = singular.then_some(SINGULAR_RIDGE);
        let theta_star = linalg::solve_normal_equations(&hessian, &rhs, ridge)?;
        if theta_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenSolve("least-squares solution is not finite".into()));
        }
        Ok((l_sum / n, mu_sum / n, ModelVector::from_dvector(theta_star)))
    }

    /// Centralized noiseless accelerated descent to `‖∇F‖ ≤ 1e-12`.
    fn reference_minimizer(&self, lipschitz: f64, mu: f64) -> Result<ModelVector> {
        let step = 1.0 / lipschitz;
        let sq = (mu / lipschitz).sqrt();
        let momentum = (1.0 - sq) / (1.0 + sq);
        let mut x = ModelVector::zeros(self.dimension);
        let mut y = x.clone();
        let mut gnorm = f64::INFINITY;
        for _ in 0..REFERENCE_MAX_ITERS {
            let g = self.global_gradient(&y)?;
            gnorm = g.norm();
            if gnorm <= REFERENCE_GRADIENT_TOL {
                return Ok(y);
            }
            let x_next = y.plus_scaled(-step, &g);
            let delta = x_next.sub(&x);
            y = x_next.plus_scaled(momentum, &delta);
            x = x_next;
            if !y.is_finite() {
                break;
            }
        }
        Err(Error::NotConverged {
            iterations: REFERENCE_MAX_ITERS,
            gradient_norm: gnorm,
        })
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `1 / (1 + exp(t))`, i.e. `σ(−t)`.
fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

fn local_value(data: &NodeDataset, family: LossFamily, theta: &DVector<f64>) -> f64 {
    let m = data.len() as f64;
    let scores = &data.inputs * theta;
    match family {
        LossFamily::LeastSquares => {
            let r = scores - &data.labels;
            r.norm_squared() / (2.0 * m)
        }
        LossFamily::RegularizedLogistic { lambda } => {
            let data_term: f64 = scores
                .iter()
                .zip(data.labels.iter())
                .map(|(s, y)| softplus(-y * s))
                .sum();
            data_term / m + 0.5 * lambda * theta.norm_squared()
        }
        LossFamily::LogLoss => {
            let sum: f64 = scores
                .iter()
                .zip(data.labels.iter())
                .map(|(s, y)| ((s - y) * (s - y)).ln_1p())
                .sum();
            sum / (2.0 * m)
        }
    }
}

fn local_grad(data: &NodeDataset, family: LossFamily, theta: &DVector<f64>) -> DVector<f64> {
    let m = data.len() as f64;
    let scores = &data.inputs * theta;
    match family {
        LossFamily::LeastSquares => {
            let r = scores - &data.labels;
            data.inputs.tr_mul(&r) / m
        }
        LossFamily::RegularizedLogistic { lambda } => {
            let weights = DVector::from_iterator(
                scores.len(),
                scores
                    .iter()
                    .zip(data.labels.iter())
                    .map(|(s, y)| -y * sigmoid_neg(y * s)),
            );
            data.inputs.tr_mul(&weights) / m + theta * lambda
        }
        LossFamily::LogLoss => {
            let weights = DVector::from_iterator(
                scores.len(),
                scores.iter().zip(data.labels.iter()).map(|(s, y)| {
                    let r = s - y;
                    r / (r * r + 1.0)
                }),
            );
            data.inputs.tr_mul(&weights) / m
        }
    }
}
