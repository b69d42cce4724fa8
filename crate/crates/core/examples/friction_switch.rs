//! Friction-switch scenario from configs/friction_switch.toml, run with and
//! without retraining. Pre-training takes a few seconds in release builds.

use std::path::PathBuf;

use flexjoint::config::{Config, Seeds};
use flexjoint::scenario::{compute_metrics, run_scenario, ControllerKind};

fn main() -> flexjoint::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/friction_switch.toml");
    let cfg = Config::load(path)?;
    let seeds = Seeds::from_master(cfg.seed);
    let data = cfg.collect(&seeds)?;
    let (net, out, report) = cfg.pretrain(&data, &seeds)?;
    println!("pre-trained: held-out mse {:.3e}", report.last().test_mse);

    let sc = cfg.scenario(seeds.scenario)?;
    let windows = cfg.scenario.as_ref().unwrap().metric_windows();
    for kind in [
        ControllerKind::Adaptive,
        ControllerKind::AdaptiveWithRetrain,
    ] {
        let r = run_scenario(&sc, kind, &net, &out)?;
        let m = compute_metrics(&r.log, &windows)?;
        print!("{kind:?}:");
        for w in &m.windows {
            print!("  [{}] {:.2e}", w.window.label(), w.mean_abs);
        }
        println!();
        for rt in &r.retrains {
            println!(
                "  retrain at {:.0} s: buffer mse {:.2e} -> {:.2e}",
                rt.time, rt.buffer_mse_before, rt.buffer_mse_after
            );
        }
    }
    Ok(())
}
