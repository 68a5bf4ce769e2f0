use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use agma::harness::{self, ExperimentConfig, Suite};
use agma::momentum;
use agma::theory::{self, BoundInputs, Decomposition, Regime};

#[derive(Parser)]
#[command(name = "agma", version, about = "Over-the-air federated learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSVs plus a manifest.
    Run {
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of Monte Carlo replications.
        #[arg(long)]
        reps: Option<usize>,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a built-in verification suite and print a JSON report.
    Verify {
        /// sequences | moments | reduction | bounds
        suite: Suite,
    },
    /// Evaluate the closed-form bounds for the given constants.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    lipschitz: f64,
    /// Strong convexity; 0 selects the convex regime.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    mu_h: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_h_sq: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_w_sq: f64,
    #[arg(long, default_value_t = 1.0)]
    gradient_bound: f64,
    #[arg(long)]
    dimension: usize,
    #[arg(long)]
    nodes: usize,
    /// Transmission power coefficient E_N.
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    /// Defaults to 1/(mu_h L).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    /// F(theta_0) - F(theta*).
    #[arg(long, default_value_t = 1.0)]
    f0_gap: f64,
    /// ||theta_0 - theta*||^2.
    #[arg(long, default_value_t = 1.0)]
    dist0_sq: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Iterations at which to evaluate the bound (repeatable).
    #[arg(long = "k")]
    ks: Vec<usize>,
}

#[derive(Serialize)]
struct BoundPoint {
    k: usize,
    bound: Option<f64>,
}

#[derive(Serialize)]
struct BoundsReport {
    inputs: BoundInputs,
    regime: Regime,
    l_tilde: f64,
    gamma0: f64,
    delta_n: f64,
    epsilon_n: Option<f64>,
    k0: usize,
    decomposition: Decomposition,
    recommended_power: f64,
    bounds: Vec<BoundPoint>,
}

fn bounds_report(a: BoundsArgs) -> agma::Result<BoundsReport> {
    let inputs = BoundInputs {
        lipschitz: a.lipschitz,
        mu: a.mu,
        mu_h: a.mu_h,
        sigma_h_sq: a.sigma_h_sq,
        sigma_w_sq: a.sigma_w_sq,
        gradient_bound: a.gradient_bound,
        dimension: a.dimension,
        nodes: a.nodes,
        power: a.power,
        beta: a.beta.unwrap_or(1.0 / (a.mu_h * a.lipschitz)),
        alpha0: a
            .alpha0
            .unwrap_or_else(|| momentum::default_alpha0(a.mu, a.lipschitz)),
        f0_gap: a.f0_gap,
        dist0_sq: a.dist0_sq,
        epsilon: a.epsilon,
    };
    inputs.validate()?;
    let regime = inputs.regime();
    let ks = if a.ks.is_empty() {
        vec![0, 1, 10, 100]
    } else {
        a.ks
    };
    let bounds = ks
        .into_iter()
        .map(|k| BoundPoint {
            k,
            bound: match regime {
                Regime::StronglyConvex => inputs.strongly_convex_bound(k).ok(),
                Regime::Convex => inputs.convex_bound(k).ok(),
            },
        })
        .collect();
    Ok(BoundsReport {
        regime,
        l_tilde: inputs.l_tilde()?,
        gamma0: inputs.gamma0()?,
        delta_n: inputs.delta_n(),
        epsilon_n: inputs.epsilon_n().ok(),
        k0: inputs.k0(),
        decomposition: inputs.decomposition(regime),
        recommended_power: theory::power_scaling_recommendation(
            inputs.nodes,
            inputs.epsilon,
            regime,
        )?,
        bounds,
        inputs,
    })
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome: agma::Result<bool> = match cli.command {
        Command::Run {
            config,
            out,
            reps,
            seed,
        } => ExperimentConfig::load(&config).and_then(|mut cfg| {
            if let Some(out) = out {
                cfg.output = out;
            }
            if let Some(reps) = reps {
                cfg.replications = reps;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let manifest = harness::run_experiment(&cfg)?;
            for c in &manifest.combinations {
                let flags = if c.flags.is_empty() {
                    String::new()
                } else {
                    format!(" [{}]", c.flags.join(", "))
                };
                println!("{}{flags}", cfg.output.join(&c.file).display());
            }
            Ok(true)
        }),
        Command::Verify { suite } => {
            let report = harness::verify(suite);
            println!("{}", json(&report));
            Ok(report.passed)
        }
        Command::Bounds(args) => bounds_report(args).map(|r| {
            println!("{}", json(&r));
            true
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
