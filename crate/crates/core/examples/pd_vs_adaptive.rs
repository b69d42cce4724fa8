//! Held-out sinusoid on the two-link arm: PD outer loop against the neural
//! adaptive law, per-joint l2 and max errors. Writes both run logs.

use std::path::PathBuf;

use flexjoint::config::{Config, Seeds};
use flexjoint::scenario::{compute_metrics, run_scenario, save_run_log, ControllerKind};

fn main() -> flexjoint::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/arm_benchmark.toml");
    let cfg = Config::load(path)?;
    let seeds = Seeds::from_master(cfg.seed);
    let (net, out, _) = cfg.pretrain(&cfg.collect(&seeds)?, &seeds)?;
    let sc = cfg.scenario(seeds.scenario)?;

    for (kind, file) in [
        (ControllerKind::Pd, "arm_pd.csv"),
        (ControllerKind::Adaptive, "arm_adaptive.csv"),
    ] {
        let r = run_scenario(&sc, kind, &net, &out)?;
        let m = compute_metrics(&r.log, &[])?;
        for j in 0..m.n_joints {
            println!(
                "{kind:?} joint {}: l2 {:.3e}  linf {:.3e}",
                j + 1,
                m.l2[j],
                m.linf[j]
            );
        }
        let dest = std::env::temp_dir().join(file);
        save_run_log(&dest, &r.log)?;
        println!("  log: {}", dest.display());
    }
    Ok(())
}
