use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use d2d_cap::experiment::{
    analyze_stationary, run_experiment, samples_calc, sweep_channels, sweep_ues,
    write_stationary_report, write_sweep, Algorithm, ExperimentConfig, NoiseKind, SweepResult,
};

#[derive(Parser)]
#[command(name = "d2dcap", version, about = "Channel assignment for D2D underlay networks by log-linear learning")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file whose keys override the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base learning seed; realization k uses seed + k.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Starting configuration: desk or full.
    #[arg(long, global = true, default_value = "desk")]
    preset: String,
}

#[derive(Subcommand)]
enum Command {
    /// Binary log-linear learning on the configured instance.
    RunBlla,
    /// Better-response dynamics on the configured instance.
    RunBr {
        /// Utility samples per estimate.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// One run per channel count.
    SweepChannels {
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
    },
    /// One run per D2D-pair count.
    SweepUes {
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
    },
    /// Sample count needed for a temperature, with its intermediate terms.
    SamplesCalc {
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long, value_enum)]
        noise: Option<Noise>,
        /// Interval width for bounded noise.
        #[arg(long)]
        width: Option<f64>,
        /// Standard deviation for Gaussian noise.
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Exact stationary distributions and stochastically stable states.
    AnalyzeStationary {
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.1,0.02")]
        taus: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    Bounded,
    Gaussian,
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let base = ExperimentConfig::preset(&common.preset)?;
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path, &base)?,
        None => base,
    };
    if let Some(seed) = common.seed {
        config.base_seed = seed;
    }
    if let Some(r) = common.realizations {
        config.realizations = r;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn report_sweep(result: &SweepResult, config: &ExperimentConfig) -> Result<()> {
    let manifest = write_sweep(result, config, &config.output_dir)?;
    println!("point,realizations,final_mean,final_std_error,occupancy_mean");
    for p in &result.points {
        println!(
            "{},{},{},{},{}",
            p.label,
            p.realizations.len(),
            p.final_mean,
            p.final_std_error,
            p.occupancy_mean.map(|x| x.to_string()).unwrap_or_default()
        );
    }
    eprintln!(
        "wrote {} files to {} (config_hash={})",
        manifest.files.len() + 1,
        config.output_dir.display(),
        manifest.config_hash
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut config = load_config(&cli.common)?;
    match cli.command {
        Command::RunBlla => {
            config.algorithm = Algorithm::Blla;
            report_sweep(&run_experiment(&config)?, &config)
        }
        Command::RunBr { samples } => {
            config.algorithm = Algorithm::Br;
            if let Some(n) = samples {
                config.n_samples = n;
            }
            config.validate()?;
            report_sweep(&run_experiment(&config)?, &config)
        }
        Command::SweepChannels { counts } => {
            report_sweep(&sweep_channels(&config, &counts)?, &config)
        }
        Command::SweepUes { counts } => report_sweep(&sweep_ues(&config, &counts)?, &config),
        Command::SamplesCalc {
            tau,
            xi,
            noise,
            width,
            sigma,
        } => {
            if let Some(kind) = noise {
                config.noise = match kind {
                    Noise::Bounded => NoiseKind::Bounded,
                    Noise::Gaussian => NoiseKind::Gaussian,
                };
            }
            if let Some(w) = width {
                config.noise_width = w;
            }
            if let Some(s) = sigma {
                config.noise_sigma = s;
            }
            let tau = tau.unwrap_or(config.tau);
            let xi = xi.unwrap_or(config.xi);
            let req = samples_calc(tau, xi, &config.noise_spec()?)?;
            println!("tau,xi,n,numerator,denominator,theta_star");
            println!(
                "{},{},{},{},{},{}",
                tau,
                xi,
                req.n,
                req.numerator,
                req.denominator,
                req.theta_star.map(|x| x.to_string()).unwrap_or_default()
            );
            Ok(())
        }
        Command::AnalyzeStationary { taus } => {
            if taus.is_empty() {
                bail!("--taus needs at least one temperature");
            }
            let report = analyze_stationary(&config, &taus)?;
            let manifest = write_stationary_report(&report, &config, &config.output_dir)
                .with_context(|| format!("writing to {}", config.output_dir.display()))?;
            println!("states={} optimum={:?} phi_star={}", report.num_states, report.optimum, report.phi_star);
            match (&report.stable, report.verdict) {
                (Some(stable), Some(v)) => {
                    println!("stable={stable:?} verdict={}", if v { "pass" } else { "fail" })
                }
                _ => println!("stable=none verdict=none"),
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "wrote {} files to {} (config_hash={})",
                manifest.files.len() + 1,
                config.output_dir.display(),
                manifest.config_hash
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
