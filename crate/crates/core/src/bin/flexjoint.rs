//! Command-line front end: collect data, train, run scenarios, recompute metrics.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use flexjoint::config::{Config, Seeds};
use flexjoint::network::{load_weights, save_weights, write_loss_history};
use flexjoint::scenario::{
    compute_metrics, load_dataset, load_run_log, run_scenario, save_dataset, save_metrics,
    save_run_log, ControllerKind, Window,
};
use flexjoint::{Error, Result};

#[derive(Parser)]
#[command(
    name = "flexjoint",
    version,
    about = "Neural adaptive control of flexible-joint robots"
)]
struct Cli {
    /// Master seed for every random stream (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Excite the model and write a training dataset CSV.
    Collect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Train the regressor offline; writes weights and a loss-history CSV.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Dataset CSV from `collect`. Collected on the fly when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        loss: Option<PathBuf>,
    },
    /// Run the scenario from the config; writes the run log and metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Pre-trained weights. Trained from the config when omitted.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// pd, adaptive or adaptive_with_retrain (default: from the config).
        #[arg(long)]
        controller: Option<ControllerKind>,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Recompute metrics from a run CSV.
    Metrics {
        #[arg(long)]
        run: PathBuf,
        /// Windows as `start:end` seconds, comma separated.
        #[arg(long, value_delimiter = ',')]
        windows: Vec<String>,
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn parse_window(s: &str) -> Result<Window> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("window `{s}` is not start:end")))?;
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad window bound `{v}`")))
    };
    Ok(Window::new(num(a)?, num(b)?))
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Collect { config, out } => {
            let cfg = Config::load(&config)?;
            let seeds = Seeds::from_master(cli.seed.unwrap_or(cfg.seed));
            let data = cfg.collect(&seeds)?;
            save_dataset(&out, &data)?;
            eprintln!("wrote {} samples to {}", data.len(), out.display());
        }
        Command::Train {
            config,
            data,
            weights,
            loss,
        } => {
            let cfg = Config::load(&config)?;
            let seeds = Seeds::from_master(cli.seed.unwrap_or(cfg.seed));
            let data = match data {
                Some(p) => load_dataset(p)?,
                None => cfg.collect(&seeds)?,
            };
            let (net, out, report) = cfg.pretrain(&data, &seeds)?;
            save_weights(&weights, &net, &out)?;
            if let Some(p) = loss {
                write_loss_history(std::fs::File::create(p)?, &report)?;
            }
            let (first, last) = (report.initial(), report.last());
            eprintln!(
                "held-out mse {:.4e} -> {:.4e} after {} epochs",
                first.test_mse, last.test_mse, last.epoch
            );
        }
        Command::Run {
            config,
            weights,
            controller,
            out,
            metrics,
        } => {
            let cfg = Config::load(&config)?;
            let seeds = Seeds::from_master(cli.seed.unwrap_or(cfg.seed));
            let scenario = cfg.scenario(seeds.scenario)?;
            let sc_cfg = cfg.scenario.as_ref().expect("checked by Config::scenario");
            let controller = controller.unwrap_or(sc_cfg.controller);
            let (net, head) = match weights {
                Some(p) => load_weights(p)?,
                None if controller == ControllerKind::Pd => {
                    cfg.network.init(scenario.model.n_joints(), seeds.init)?
                }
                None => {
                    let data = cfg.collect(&seeds)?;
                    let (net, head, _) = cfg.pretrain(&data, &seeds)?;
                    (net, head)
                }
            };
            let result = run_scenario(&scenario, controller, &net, &head)?;
            save_run_log(&out, &result.log)?;
            for r in &result.retrains {
                eprintln!(
                    "retrain at t = {:.2} s on {} samples: buffer mse {:.4e} -> {:.4e}",
                    r.time, r.samples, r.buffer_mse_before, r.buffer_mse_after
                );
            }
            if let Some(p) = metrics {
                let report = compute_metrics(&result.log, &sc_cfg.metric_windows())?;
                save_metrics(p, &report)?;
            }
        }
        Command::Metrics { run, windows, out } => {
            let log = load_run_log(run)?;
            let windows = windows
                .iter()
                .map(|w| parse_window(w))
                .collect::<Result<Vec<_>>>()?;
            save_metrics(out, &compute_metrics(&log, &windows)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
