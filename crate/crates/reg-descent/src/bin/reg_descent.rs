use clap::{Parser, Subcommand};
use reg_descent::harness::{cli_oracle, cli_run, cli_sweep, cli_validate, Overrides};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "reg-descent",
    version,
    about = "SGD with decaying Tikhonov regularization: runs, schedule checks, sweeps, oracles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment config file (flat key = value text)
    #[arg(long)]
    config: PathBuf,
    /// Override run.master_seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override output.dir
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override run.n_replicas
    #[arg(long)]
    replicas: Option<usize>,
}

impl ConfigArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.as_ref().map(|p| p.display().to_string()),
            replicas: self.replicas,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write trajectory CSVs and plots
    Run(ConfigArgs),
    /// Check a schedule against the rate conditions and print predictions
    Validate {
        /// Ridge decay exponent (lambda_k = c_lambda k^-p)
        #[arg(long)]
        p: f64,
        /// Step decay exponent (alpha_k = c_alpha k^-q)
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        c_alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        c_lambda: f64,
        /// Ridge-path exponent, enables distance predictions
        #[arg(long)]
        xi: Option<f64>,
        /// Almost-sure margin exponent (default 2q - 1 - 1e-3)
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Evaluate (p, q) heatmaps, theoretical and optionally empirical
    Sweep(ConfigArgs),
    /// Write minimum-norm solution and ridge-path artifacts
    Oracle(ConfigArgs),
}

fn main() {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let code = match &cli.command {
        Command::Run(a) => cli_run(&a.config, &a.overrides(), &mut out),
        Command::Validate {
            p,
            q,
            c_alpha,
            c_lambda,
            xi,
            beta,
        } => cli_validate(*p, *q, *c_alpha, *c_lambda, *xi, *beta, &mut out),
        Command::Sweep(a) => cli_sweep(&a.config, &a.overrides(), &mut out),
        Command::Oracle(a) => cli_oracle(&a.config, &a.overrides(), &mut out),
    };
    std::process::exit(code);
}
