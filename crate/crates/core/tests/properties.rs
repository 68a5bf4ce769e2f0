use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use agma::algorithms::{self, AlgorithmConfig, AlgorithmKind};
use agma::channel::{ChannelModel, GainKind};
use agma::data::{self, DataSource, DatasetSpec, SamplesPerNode};
use agma::momentum::{self, MomentumSchedule};
use agma::problems::{LossFamily, NodeDataset, ProblemInstance};
use agma::ModelVector;

fn gaussian(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> ModelVector {
    ModelVector::new((0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()).unwrap()
}

fn random_nodes(rng: &mut ChaCha8Rng, nodes: usize, m: usize, d: usize) -> Vec<NodeDataset> {
    (0..nodes)
        .map(|_| {
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            let ys: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            NodeDataset::from_rows(&rows, &ys).unwrap()
        })
        .collect()
}

fn families() -> Vec<(&'static str, ProblemInstance)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    vec![
        ("least squares", data::synthesize_quadratic(5, 30.0, 5, 3, 2).unwrap()),
        ("logistic", data::synthesize_logistic(5, 0.5, 3, 20, 0.1, 3).unwrap()),
        (
            "log-loss",
            ProblemInstance::new(random_nodes(&mut rng, 3, 20, 5), LossFamily::LogLoss).unwrap(),
        ),
    ]
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, p) in families() {
        for _ in 0..100 {
            let theta = gaussian(&mut rng, p.dimension(), 1.0);
            let node = rng.random_range(0..p.node_count());
            let g = p.local_gradient(node, &theta).unwrap();
            let mut err = 0.0;
            for i in 0..p.dimension() {
                let h = 1e-6 * (1.0 + theta[i].abs());
                let mut up = theta.clone();
                up[i] += h;
                let mut dn = theta.clone();
                dn[i] -= h;
                let fd = (p.local_objective(node, &up).unwrap()
                    - p.local_objective(node, &dn).unwrap())
                    / (2.0 * h);
                err += (fd - g[i]).powi(2);
            }
            let rel = err.sqrt() / g.norm().max(1e-3);
            assert!(rel < 1e-6, "{name}: relative error {rel:e}");
        }
    }
}

#[test]
fn smoothness_and_strong_convexity_inequalities() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (name, p) in families().into_iter().take(2) {
        let c = p.constants().unwrap().clone();
        for _ in 0..1000 {
            let x = gaussian(&mut rng, p.dimension(), 2.0);
            let y = gaussian(&mut rng, p.dimension(), 2.0);
            let fx = p.global_objective(&x).unwrap();
            let fy = p.global_objective(&y).unwrap();
            let gx = p.global_gradient(&x).unwrap();
            let gy = p.global_gradient(&y).unwrap();
            let dxy = y.sub(&x);
            let gap = fy - fx - gx.dot(&dxy);
            let dist_sq = dxy.norm_sq();
            let tol = 1e-10 * (1.0 + fx.abs() + fy.abs());
            assert!(gap <= 0.5 * c.lipschitz * dist_sq + tol, "{name}: upper quadratic");
            assert!(
                gy.sub(&gx).norm_sq() / (2.0 * c.lipschitz) <= gap + tol,
                "{name}: co-coercivity"
            );
            assert!(gap >= 0.5 * c.strong_convexity * dist_sq - tol, "{name}: strong convexity");
        }
    }
}

#[test]
fn lipschitz_matches_dense_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let nodes = random_nodes(&mut rng, 1, 20, 5);
        let x = nodes[0].inputs().clone();
        let gram: DMatrix<f64> = x.transpose() * &x / 20.0;
        let eig = SymmetricEigen::new(gram).eigenvalues;
        let p = ProblemInstance::new(nodes, LossFamily::LeastSquares)
            .unwrap()
            .with_computed_constants()
            .unwrap();
        let c = p.constants().unwrap();
        assert!((c.lipschitz - eig.max()).abs() < 1e-8 * eig.max());
        assert!((c.strong_convexity - eig.min()).abs() < 1e-8 * eig.max());
    }
}

#[test]
fn synthetic_condition_number_is_exact() {
    let p = data::synthesize_quadratic(10, 100.0, 10, 10, 5).unwrap();
    let c = p.constants().unwrap();
    assert!((c.lipschitz / c.strong_convexity - 100.0).abs() < 1e-8);
    let recomputed = p.compute_constants().unwrap();
    assert!((recomputed.lipschitz / recomputed.strong_convexity - 100.0).abs() < 1e-6);
    assert!(p.global_objective(&c.theta_star).unwrap().abs() < 1e-20);
}

/// With k₀ = 1 only z₁ carries momentum; every later step is plain descent
/// from θ_k.
#[test]
fn restart_drops_momentum_after_k0() {
    let p = data::synthesize_quadratic(6, 50.0, 6, 4, 6).unwrap();
    let c = p.constants().unwrap().clone();
    let beta = 1.0 / c.lipschitz;
    let ch = ChannelModel::from_moments(GainKind::Constant, 1.0, Some(0.0), 0.0, 1.0).unwrap();
    let iters = 12;
    let cfg = AlgorithmConfig::new(AlgorithmKind::Agma, beta, iters).with_restart(1);
    let trace = algorithms::run(&cfg, &p, &ch).unwrap();

    let alpha0 = momentum::default_alpha0(c.strong_convexity, c.lipschitz);
    let l_tilde = momentum::l_beta_tilde(beta, 1.0, c.lipschitz).unwrap();
    let sched = MomentumSchedule::for_constants(alpha0, c.strong_convexity, c.lipschitz, l_tilde)
        .unwrap()
        .extended(2);
    let theta0 = ModelVector::zeros(6);
    let theta1 = theta0.plus_scaled(-beta, &p.global_gradient(&theta0).unwrap());
    let z1 = theta1.plus_scaled(sched.eta(0).unwrap(), &theta1.sub(&theta0));
    let mut theta = z1.plus_scaled(-beta, &p.global_gradient(&z1).unwrap());
    for _ in 2..iters {
        let g = p.global_gradient(&theta).unwrap();
        theta = theta.plus_scaled(-beta, &g);
    }
    let diff = trace.final_theta.sub(&theta).norm();
    assert!(diff < 1e-12 * (1.0 + theta.norm()), "difference {diff:e}");

    let momentum_run = algorithms::run(
        &AlgorithmConfig::new(AlgorithmKind::Agma, beta, iters),
        &p,
        &ch,
    )
    .unwrap();
    assert!(momentum_run.final_theta.sub(&theta).norm() > 1e-6);
}

#[test]
fn split_half_monte_carlo_agrees() {
    let p = data::synthesize_quadratic(8, 10.0, 8, 50, 7).unwrap();
    let ch = ChannelModel::from_moments(GainKind::Rayleigh, 1.0, None, 1.0, 1.0).unwrap();
    let beta = 1.0 / p.constants().unwrap().lipschitz;
    let base = 500;
    let full = algorithms::monte_carlo(
        &AlgorithmConfig::new(AlgorithmKind::Agma, beta, 30).with_seed(base),
        &p,
        &ch,
        200,
    )
    .unwrap();
    let first = algorithms::monte_carlo(
        &AlgorithmConfig::new(AlgorithmKind::Agma, beta, 30).with_seed(base),
        &p,
        &ch,
        100,
    )
    .unwrap();
    let second = algorithms::monte_carlo(
        &AlgorithmConfig::new(AlgorithmKind::Agma, beta, 30).with_seed(base + 100),
        &p,
        &ch,
        100,
    )
    .unwrap();
    assert_eq!(&full.seeds[100..], &second.seeds[..]);
    for k in 0..=30 {
        let pooled = 0.5 * (first.mean[k] + second.mean[k]);
        assert!((pooled - full.mean[k]).abs() <= 1e-12 * full.mean[k].abs().max(1e-300));
        let se = ((first.ci_halfwidth[k].powi(2) + second.ci_halfwidth[k].powi(2)).sqrt()) / 1.96;
        assert!(
            (first.mean[k] - second.mean[k]).abs() <= 5.0 * se + 1e-15,
            "k={k}: halves {} vs {}",
            first.mean[k],
            second.mean[k]
        );
    }
}

#[test]
fn partition_is_deterministic_disjoint_cover() {
    let spec = |seed| {
        let mut s = DatasetSpec::new(
            DataSource::SyntheticLogistic {
                dimension: 3,
                separation: 1.0,
            },
            4,
        );
        s.samples_per_node = SamplesPerNode::Count(5);
        s.seed = seed;
        s
    };
    let a = data::load_and_partition(&spec(1)).unwrap();
    let b = data::load_and_partition(&spec(1)).unwrap();
    let theta = ModelVector::new(vec![0.3, -0.2, 0.1]).unwrap();
    assert_eq!(
        a.global_objective(&theta).unwrap(),
        b.global_objective(&theta).unwrap()
    );
    let parts = data::round_robin(23, 4, SamplesPerNode::All, 3).unwrap();
    let mut seen: Vec<usize> = parts.iter().flatten().copied().collect();
    seen.sort_unstable();
    assert_eq!(seen, (0..23).collect::<Vec<_>>());
}
