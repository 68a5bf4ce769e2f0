//! C ABI over the `agma` simulator.
//!
//! Objects cross the boundary as opaque handles created by `*_new`-style
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`AgmaStatus`]; on failure the message is available from
//! [`agma_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use agma::algorithms::{self, AlgorithmConfig, AlgorithmKind, MonteCarloTrace};
use agma::channel::{ChannelModel, GainKind};
use agma::data::{self, DataSource, DatasetSpec, LabelColumn, SamplesPerNode, Task};
use agma::problems::{LossFamily, NodeDataset, ProblemInstance};
use agma::theory::{BoundInputs, Regime};
use agma::{Error, ModelVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgmaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    StepsizeOutOfRange = 4,
    Divergence = 5,
    ConstantsUnavailable = 6,
    NotConverged = 7,
    Io = 8,
    Internal = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgmaGain {
    Rayleigh = 0,
    Uniform = 1,
    Constant = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgmaAlgorithm {
    Agma = 0,
    Gbma = 1,
    FdmGd = 2,
    FdmAgd = 3,
    CentralNesterov = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgmaLoss {
    LeastSquares = 0,
    RegularizedLogistic = 1,
    LogLoss = 2,
}

/// Options for [`agma_run`]. Start from [`agma_run_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AgmaRunOptions {
    pub algorithm: AgmaAlgorithm,
    /// Absolute stepsize; a non-positive value selects `1 / (mu_h L)`.
    pub beta: f64,
    /// NaN selects the default.
    pub alpha0: f64,
    pub max_iters: usize,
    /// Momentum cutoff k0; 0 disables the restart.
    pub restart_k0: usize,
    pub seed: u64,
    pub replications: usize,
    pub allow_out_of_range: bool,
}

/// Constants for the closed-form bounds. `mu = 0` selects the convex regime.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AgmaBoundParams {
    pub lipschitz: f64,
    pub mu: f64,
    pub mu_h: f64,
    pub sigma_h_sq: f64,
    pub sigma_w_sq: f64,
    pub gradient_bound: f64,
    pub dimension: usize,
    pub nodes: usize,
    pub power: f64,
    pub beta: f64,
    pub alpha0: f64,
    pub f0_gap: f64,
    pub dist0_sq: f64,
    pub epsilon: f64,
}

pub struct AgmaProblem(ProblemInstance);
pub struct AgmaChannel(ChannelModel);
pub struct AgmaTrace(MonteCarloTrace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> AgmaStatus {
    match err {
        Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => {
            AgmaStatus::DimensionMismatch
        }
        Error::StepsizeOutOfRange { .. } => AgmaStatus::StepsizeOutOfRange,
        Error::Divergence { .. } => AgmaStatus::Divergence,
        Error::ConstantsUnavailable(_) | Error::NotStronglyConvex => {
            AgmaStatus::ConstantsUnavailable
        }
        Error::NotConverged { .. } | Error::EigenSolve(_) => AgmaStatus::NotConverged,
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) => AgmaStatus::Io,
        Error::Replication { source, .. } => status_of(source),
        _ => AgmaStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), AgmaStatus>) -> AgmaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AgmaStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            AgmaStatus::Internal
        }
    }
}

fn fail(err: Error) -> AgmaStatus {
    let s = status_of(&err);
    set_error(err.to_string());
    s
}

fn null(what: &str) -> AgmaStatus {
    set_error(format!("{what} is null"));
    AgmaStatus::NullPointer
}

fn invalid(msg: &str) -> AgmaStatus {
    set_error(msg.into());
    AgmaStatus::InvalidArgument
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, AgmaStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], AgmaStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], AgmaStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), AgmaStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next `agma_*` call on the same thread.
#[no_mangle]
pub extern "C" fn agma_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn agma_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Synthetic least-squares instance with exact `L = 1`, `mu = 1/cond`
/// (`mu = 0` when `rank < d`).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn agma_problem_synthetic_quadratic(
    dimension: usize,
    condition_number: f64,
    rank: usize,
    nodes: usize,
    seed: u64,
    out: *mut *mut AgmaProblem,
) -> AgmaStatus {
    guard(|| {
        let p = data::synthesize_quadratic(dimension, condition_number, rank, nodes, seed)
            .map_err(fail)?;
        write(out, boxed(AgmaProblem(p)), "out")
    })
}

/// Builds a problem from a row-major `rows x cols` feature matrix and labels,
/// dealt round-robin to `nodes` nodes after a seeded shuffle.
///
/// # Safety
/// `features` must point to `rows * cols` doubles, `labels` to `rows`
/// doubles, and `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn agma_problem_from_arrays(
    features: *const f64,
    labels: *const f64,
    rows: usize,
    cols: usize,
    loss: AgmaLoss,
    lambda: f64,
    nodes: usize,
    seed: u64,
    out: *mut *mut AgmaProblem,
) -> AgmaStatus {
    guard(|| {
        let len = rows.checked_mul(cols).ok_or_else(|| invalid("rows * cols overflows"))?;
        let x = slice(features, len, "features")?;
        let y = slice(labels, rows, "labels")?;
        let family = match loss {
            AgmaLoss::LeastSquares => LossFamily::LeastSquares,
            AgmaLoss::RegularizedLogistic => LossFamily::RegularizedLogistic { lambda },
            AgmaLoss::LogLoss => LossFamily::LogLoss,
        };
        let parts = data::round_robin(rows, nodes, SamplesPerNode::All, seed).map_err(fail)?;
        let datasets = parts
            .iter()
            .map(|idx| {
                let r: Vec<Vec<f64>> = idx
                    .iter()
                    .map(|&i| x[i * cols..(i + 1) * cols].to_vec())
                    .collect();
                let l: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
                NodeDataset::from_rows(&r, &l)
            })
            .collect::<agma::Result<Vec<_>>>()
            .map_err(fail)?;
        let mut p = ProblemInstance::new(datasets, family).map_err(fail)?;
        if family != LossFamily::LogLoss {
            p = p.with_computed_constants().map_err(fail)?;
        }
        write(out, boxed(AgmaProblem(p)), "out")
    })
}

/// Loads a CSV file. `binary` selects ±1 classification labels (regularized
/// logistic loss); otherwise labels are centered regression targets.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` writable storage
/// for one handle.
#[no_mangle]
pub unsafe extern "C" fn agma_problem_from_csv(
    path: *const c_char,
    label_column: usize,
    binary: bool,
    nodes: usize,
    seed: u64,
    out: *mut *mut AgmaProblem,
) -> AgmaStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let mut spec = DatasetSpec::new(
            DataSource::Csv {
                path: path.into(),
                label_column: LabelColumn::Index(label_column),
                task: if binary { Task::Binary } else { Task::Regression },
                positive_label: None,
                center_labels: true,
            },
            nodes,
        );
        spec.seed = seed;
        let p = data::load_and_partition(&spec).map_err(fail)?;
        write(out, boxed(AgmaProblem(p)), "out")
    })
}

/// # Safety
/// `problem` must be NULL or a handle from an `agma_problem_*` constructor
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn agma_problem_free(problem: *mut AgmaProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must be a live handle; `dimension` and `nodes` writable.
#[no_mangle]
pub unsafe extern "C" fn agma_problem_shape(
    problem: *const AgmaProblem,
    dimension: *mut usize,
    nodes: *mut usize,
) -> AgmaStatus {
    guard(|| {
        let p = &deref(problem, "problem")?.0;
        write(dimension, p.dimension(), "dimension")?;
        write(nodes, p.node_count(), "nodes")
    })
}

/// Writes L, mu, G and F*. Fails with `ConstantsUnavailable` for log-loss.
///
/// # Safety
/// `problem` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn agma_problem_constants(
    problem: *const AgmaProblem,
    lipschitz: *mut f64,
    mu: *mut f64,
    gradient_bound: *mut f64,
    f_star: *mut f64,
) -> AgmaStatus {
    guard(|| {
        let c = deref(problem, "problem")?.0.require_constants().map_err(fail)?;
        write(lipschitz, c.lipschitz, "lipschitz")?;
        write(mu, c.strong_convexity, "mu")?;
        write(gradient_bound, c.gradient_bound, "gradient_bound")?;
        write(f_star, c.f_star, "f_star")
    })
}

fn model(theta: &[f64]) -> Result<ModelVector, AgmaStatus> {
    ModelVector::new(theta.to_vec()).map_err(fail)
}

/// Global objective F(theta).
///
/// # Safety
/// `theta` must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agma_problem_objective(
    problem: *const AgmaProblem,
    theta: *const f64,
    len: usize,
    out: *mut f64,
) -> AgmaStatus {
    guard(|| {
        let p = &deref(problem, "problem")?.0;
        let t = model(slice(theta, len, "theta")?)?;
        write(out, p.global_objective(&t).map_err(fail)?, "out")
    })
}

/// Global gradient of F at theta, written to `grad` (both of length `len`).
///
/// # Safety
/// `theta` and `grad` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn agma_problem_gradient(
    problem: *const AgmaProblem,
    theta: *const f64,
    len: usize,
    grad: *mut f64,
) -> AgmaStatus {
    guard(|| {
        let p = &deref(problem, "problem")?.0;
        let t = model(slice(theta, len, "theta")?)?;
        let g = p.global_gradient(&t).map_err(fail)?;
        slice_mut(grad, len, "grad")?.copy_from_slice(g.as_slice());
        Ok(())
    })
}

/// Channel from gain moments. A NaN `sigma_h_sq` selects the family's own
/// variance (Rayleigh, constant); uniform gains require it.
///
/// # Safety
/// `out` must be writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn agma_channel_new(
    gain: AgmaGain,
    mu_h: f64,
    sigma_h_sq: f64,
    sigma_w_sq: f64,
    power: f64,
    out: *mut *mut AgmaChannel,
) -> AgmaStatus {
    guard(|| {
        let kind = match gain {
            AgmaGain::Rayleigh => GainKind::Rayleigh,
            AgmaGain::Uniform => GainKind::Uniform,
            AgmaGain::Constant => GainKind::Constant,
        };
        let var = (!sigma_h_sq.is_nan()).then_some(sigma_h_sq);
        let ch = ChannelModel::from_moments(kind, mu_h, var, sigma_w_sq, power).map_err(fail)?;
        write(out, boxed(AgmaChannel(ch)), "out")
    })
}

/// # Safety
/// `channel` must be NULL or a live handle from [`agma_channel_new`].
#[no_mangle]
pub unsafe extern "C" fn agma_channel_free(channel: *mut AgmaChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

#[no_mangle]
pub extern "C" fn agma_run_options_default() -> AgmaRunOptions {
    AgmaRunOptions {
        algorithm: AgmaAlgorithm::Agma,
        beta: 0.0,
        alpha0: f64::NAN,
        max_iters: 100,
        restart_k0: 0,
        seed: 0,
        replications: 1,
        allow_out_of_range: false,
    }
}

fn algorithm_config(
    opts: &AgmaRunOptions,
    problem: &ProblemInstance,
    channel: &ChannelModel,
) -> Result<AlgorithmConfig, AgmaStatus> {
    let kind = match opts.algorithm {
        AgmaAlgorithm::Agma => AlgorithmKind::Agma,
        AgmaAlgorithm::Gbma => AlgorithmKind::Gbma,
        AgmaAlgorithm::FdmGd => AlgorithmKind::FdmGd,
        AgmaAlgorithm::FdmAgd => AlgorithmKind::FdmAgd,
        AgmaAlgorithm::CentralNesterov => AlgorithmKind::CentralNesterov,
    };
    let beta = if opts.beta > 0.0 {
        opts.beta
    } else {
        let l = problem.require_constants().map_err(fail)?.lipschitz;
        let mu_h = if kind == AlgorithmKind::CentralNesterov {
            1.0
        } else {
            channel.mu_h()
        };
        1.0 / (mu_h * l)
    };
    let mut cfg = AlgorithmConfig::new(kind, beta, opts.max_iters).with_seed(opts.seed);
    if !opts.alpha0.is_nan() {
        cfg = cfg.with_alpha0(opts.alpha0);
    }
    if opts.restart_k0 > 0 {
        cfg = cfg.with_restart(opts.restart_k0);
    }
    cfg.allow_out_of_range = opts.allow_out_of_range;
    Ok(cfg)
}

/// Monte Carlo run: per-iteration mean excess risk and 95% half-width over
/// `opts.replications` seeded replications.
///
/// # Safety
/// `problem`, `channel` and `opts` must be live; `out` writable storage for
/// one handle.
#[no_mangle]
pub unsafe extern "C" fn agma_run(
    problem: *const AgmaProblem,
    channel: *const AgmaChannel,
    opts: *const AgmaRunOptions,
    out: *mut *mut AgmaTrace,
) -> AgmaStatus {
    guard(|| {
        let p = &deref(problem, "problem")?.0;
        let ch = &deref(channel, "channel")?.0;
        let o = deref(opts, "opts")?;
        let cfg = algorithm_config(o, p, ch)?;
        let trace = algorithms::monte_carlo(&cfg, p, ch, o.replications).map_err(fail)?;
        write(out, boxed(AgmaTrace(trace)), "out")
    })
}

/// # Safety
/// `trace` must be NULL or a live handle from [`agma_run`].
#[no_mangle]
pub unsafe extern "C" fn agma_trace_free(trace: *mut AgmaTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of recorded iterations (`max_iters + 1`).
///
/// # Safety
/// `trace` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn agma_trace_len(trace: *const AgmaTrace, len: *mut usize) -> AgmaStatus {
    guard(|| write(len, deref(trace, "trace")?.0.len(), "len"))
}

/// Copies the mean excess risk and CI half-widths. Either output may be
/// NULL; `len` must equal [`agma_trace_len`].
///
/// # Safety
/// Non-NULL outputs must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn agma_trace_copy(
    trace: *const AgmaTrace,
    mean: *mut f64,
    ci_halfwidth: *mut f64,
    len: usize,
) -> AgmaStatus {
    guard(|| {
        let t = &deref(trace, "trace")?.0;
        if len != t.len() {
            return Err(fail(Error::LengthMismatch {
                expected: t.len(),
                got: len,
            }));
        }
        if !mean.is_null() {
            slice_mut(mean, len, "mean")?.copy_from_slice(&t.mean);
        }
        if !ci_halfwidth.is_null() {
            slice_mut(ci_halfwidth, len, "ci_halfwidth")?.copy_from_slice(&t.ci_halfwidth);
        }
        Ok(())
    })
}

/// Whether the run's stepsize lies outside the convergent range.
///
/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn agma_trace_out_of_range(
    trace: *const AgmaTrace,
    out: *mut bool,
) -> AgmaStatus {
    guard(|| write(out, deref(trace, "trace")?.0.out_of_range, "out"))
}

fn bound_inputs(p: &AgmaBoundParams) -> BoundInputs {
    BoundInputs {
        lipschitz: p.lipschitz,
        mu: p.mu,
        mu_h: p.mu_h,
        sigma_h_sq: p.sigma_h_sq,
        sigma_w_sq: p.sigma_w_sq,
        gradient_bound: p.gradient_bound,
        dimension: p.dimension,
        nodes: p.nodes,
        power: p.power,
        beta: p.beta,
        alpha0: p.alpha0,
        f0_gap: p.f0_gap,
        dist0_sq: p.dist0_sq,
        epsilon: p.epsilon,
    }
}

/// Excess-risk bound at iteration k: the strongly convex bound when
/// `mu > 0`, otherwise the convex bound (valid for `k <= k0`).
///
/// # Safety
/// `params` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn agma_bound(
    params: *const AgmaBoundParams,
    k: usize,
    out: *mut f64,
) -> AgmaStatus {
    guard(|| {
        let b = bound_inputs(deref(params, "params")?);
        b.validate().map_err(fail)?;
        let v = match b.regime() {
            Regime::StronglyConvex => b.strongly_convex_bound(k),
            Regime::Convex => b.convex_bound(k),
        }
        .map_err(fail)?;
        write(out, v, "out")
    })
}

/// Distortion and noise terms (T2, T3) of the bound for its regime.
///
/// # Safety
/// `params` must be live; `t2` and `t3` writable.
#[no_mangle]
pub unsafe extern "C" fn agma_bound_terms(
    params: *const AgmaBoundParams,
    t2: *mut f64,
    t3: *mut f64,
) -> AgmaStatus {
    guard(|| {
        let b = bound_inputs(deref(params, "params")?);
        b.validate().map_err(fail)?;
        let d = b.decomposition(b.regime());
        write(t2, d.t2, "t2")?;
        write(t3, d.t3, "t3")
    })
}
