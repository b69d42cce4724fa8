//! Two-link arm picking up a payload mid-run (configs/payload.toml).
//! Prints the windowed Frobenius error with and without retraining.

use std::path::PathBuf;

use flexjoint::config::{Config, Seeds};
use flexjoint::scenario::{compute_metrics, run_scenario, ControllerKind};

fn main() -> flexjoint::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/payload.toml");
    let cfg = Config::load(path)?;
    let seeds = Seeds::from_master(cfg.seed);
    let (net, out, _) = cfg.pretrain(&cfg.collect(&seeds)?, &seeds)?;
    let sc = cfg.scenario(seeds.scenario)?;
    let windows = cfg.scenario.as_ref().unwrap().metric_windows();

    for kind in [
        ControllerKind::Adaptive,
        ControllerKind::AdaptiveWithRetrain,
    ] {
        let m = compute_metrics(&run_scenario(&sc, kind, &net, &out)?.log, &windows)?;
        let cols: Vec<String> = m
            .windows
            .iter()
            .map(|w| format!("{} {:.3}", w.window.label(), w.frobenius))
            .collect();
        println!("{:<20} {}", format!("{kind:?}"), cols.join("  "));
    }
    Ok(())
}
