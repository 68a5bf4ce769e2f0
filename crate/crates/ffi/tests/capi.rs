use std::ffi::CStr;
use std::ptr;

use agma_ffi::*;

fn last_error() -> String {
    let p = agma_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn problem_round_trip() {
    unsafe {
        let mut p: *mut AgmaProblem = ptr::null_mut();
        assert_eq!(agma_problem_synthetic_quadratic(4, 10.0, 4, 5, 1, &mut p), AgmaStatus::Ok);
        let (mut d, mut n) = (0, 0);
        assert_eq!(agma_problem_shape(p, &mut d, &mut n), AgmaStatus::Ok);
        assert_eq!((d, n), (4, 5));
        let (mut l, mut mu, mut g, mut fs) = (0.0, 0.0, 0.0, 1.0);
        assert_eq!(agma_problem_constants(p, &mut l, &mut mu, &mut g, &mut fs), AgmaStatus::Ok);
        assert!((l - 1.0).abs() < 1e-12 && (mu - 0.1).abs() < 1e-12 && fs == 0.0);

        let theta = [0.1, -0.2, 0.3, 0.4];
        let mut grad = [0.0; 4];
        assert_eq!(agma_problem_gradient(p, theta.as_ptr(), 4, grad.as_mut_ptr()), AgmaStatus::Ok);
        assert!(grad.iter().any(|v| *v != 0.0));
        let mut f = 0.0;
        assert_eq!(
            agma_problem_gradient(p, theta.as_ptr(), 3, grad.as_mut_ptr()),
            AgmaStatus::DimensionMismatch
        );
        assert!(last_error().contains("dimension"));
        assert_eq!(agma_problem_objective(p, theta.as_ptr(), 4, &mut f), AgmaStatus::Ok);
        assert!(f > 0.0);
        agma_problem_free(p);
    }
}

#[test]
fn run_and_copy_trace() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(agma_problem_synthetic_quadratic(4, 10.0, 4, 20, 2, &mut p), AgmaStatus::Ok);
        let mut ch = ptr::null_mut();
        assert_eq!(
            agma_channel_new(AgmaGain::Rayleigh, 1.0, f64::NAN, 1.0, 1.0, &mut ch),
            AgmaStatus::Ok
        );
        let mut opts = agma_run_options_default();
        opts.max_iters = 20;
        opts.replications = 4;
        opts.seed = 3;
        let mut t = ptr::null_mut();
        assert_eq!(agma_run(p, ch, &opts, &mut t), AgmaStatus::Ok);
        let mut len = 0;
        assert_eq!(agma_trace_len(t, &mut len), AgmaStatus::Ok);
        assert_eq!(len, 21);
        let mut mean = vec![0.0; len];
        let mut ci = vec![0.0; len];
        assert_eq!(agma_trace_copy(t, mean.as_mut_ptr(), ci.as_mut_ptr(), len), AgmaStatus::Ok);
        assert!(mean[20] < mean[0]);
        assert_eq!(
            agma_trace_copy(t, mean.as_mut_ptr(), ptr::null_mut(), len - 1),
            AgmaStatus::DimensionMismatch
        );
        agma_trace_free(t);

        opts.beta = 2.5;
        let mut t2 = ptr::null_mut();
        assert_eq!(agma_run(p, ch, &opts, &mut t2), AgmaStatus::StepsizeOutOfRange);
        assert!(t2.is_null());
        opts.allow_out_of_range = true;
        assert_eq!(agma_run(p, ch, &opts, &mut t2), AgmaStatus::Ok);
        let mut flagged = false;
        assert_eq!(agma_trace_out_of_range(t2, &mut flagged), AgmaStatus::Ok);
        assert!(flagged);
        agma_trace_free(t2);
        agma_channel_free(ch);
        agma_problem_free(p);
    }
}

#[test]
fn null_and_invalid_arguments() {
    unsafe {
        assert_eq!(
            agma_problem_synthetic_quadratic(4, 10.0, 4, 5, 1, ptr::null_mut()),
            AgmaStatus::NullPointer
        );
        let mut n = 0;
        assert_eq!(agma_problem_shape(ptr::null(), &mut n, &mut n), AgmaStatus::NullPointer);
        assert!(last_error().contains("problem"));
        let mut ch = ptr::null_mut();
        assert_eq!(
            agma_channel_new(AgmaGain::Uniform, 1.0, 0.5, 1.0, 1.0, &mut ch),
            AgmaStatus::InvalidArgument
        );
        assert!(ch.is_null());
        agma_problem_free(ptr::null_mut());
        agma_channel_free(ptr::null_mut());
        agma_trace_free(ptr::null_mut());
    }
}

#[test]
fn arrays_and_log_loss_constants() {
    let x = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, -1.0];
    let y = [1.0, -1.0, 1.0, -1.0];
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(
            agma_problem_from_arrays(x.as_ptr(), y.as_ptr(), 4, 2, AgmaLoss::LogLoss, 0.0, 2, 0, &mut p),
            AgmaStatus::Ok
        );
        let mut v = 0.0;
        assert_eq!(
            agma_problem_constants(p, &mut v, &mut v, &mut v, &mut v),
            AgmaStatus::ConstantsUnavailable
        );
        agma_problem_free(p);
        assert_eq!(
            agma_problem_from_arrays(
                x.as_ptr(),
                y.as_ptr(),
                4,
                2,
                AgmaLoss::RegularizedLogistic,
                0.1,
                2,
                0,
                &mut p
            ),
            AgmaStatus::Ok
        );
        let (mut l, mut mu) = (0.0, 0.0);
        assert_eq!(agma_problem_constants(p, &mut l, &mut mu, &mut v, &mut v), AgmaStatus::Ok);
        assert!((mu - 0.1).abs() < 1e-15);
        assert!((l - (0.1 + 5.0 / 4.0)).abs() < 1e-12);
        agma_problem_free(p);
    }
}

#[test]
fn bounds_through_c_struct() {
    let mut params = AgmaBoundParams {
        lipschitz: 1.0,
        mu: 0.01,
        mu_h: 1.0,
        sigma_h_sq: 0.5,
        sigma_w_sq: 1.0,
        gradient_bound: 1.0,
        dimension: 10,
        nodes: 100,
        power: 1.0,
        beta: 1.0,
        alpha0: 0.55,
        f0_gap: 1.0,
        dist0_sq: 1.0,
        epsilon: 0.5,
    };
    unsafe {
        let (mut b0, mut b1, mut t2, mut t3) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(agma_bound(&params, 0, &mut b0), AgmaStatus::Ok);
        assert_eq!(agma_bound(&params, 100, &mut b1), AgmaStatus::Ok);
        assert_eq!(agma_bound_terms(&params, &mut t2, &mut t3), AgmaStatus::Ok);
        assert!(b1 < b0 && b1 > t2 + t3);
        params.mu = 0.0;
        params.alpha0 = 0.5;
        assert_eq!(agma_bound(&params, 11, &mut b0), AgmaStatus::InvalidArgument);
        assert!(last_error().contains("k0"));
        params.beta = 3.0;
        assert_eq!(agma_bound(&params, 1, &mut b0), AgmaStatus::StepsizeOutOfRange);
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(agma_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
