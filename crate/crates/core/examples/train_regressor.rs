//! Offline training of the regressor network on pendulum data with the
//! default recipe; prints the loss history.

use flexjoint::config::{ExcitationConfig, NetworkConfig};
use flexjoint::dynamics::{FrictionModel, RobotModel};
use flexjoint::network::{train_offline, TrainConfig};
use flexjoint::scenario::collect_dataset;

fn main() -> flexjoint::Result<()> {
    let epochs = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(5);
    let model =
        RobotModel::pendulum(1.0, 1.0).with_friction(FrictionModel::viscous_coulomb(0.1, 0.05));
    let data = collect_dataset(&model, &ExcitationConfig::default().signals(1, 0)?, 100.0)?;

    let (mut net, mut out) = NetworkConfig::default().init(1, 0)?;
    let cfg = TrainConfig {
        epochs,
        ..TrainConfig::default()
    };
    let report = train_offline(&mut net, &mut out, &data, &cfg)?;
    println!(
        "{} train / {} held-out samples",
        report.train_len, report.test_len
    );
    for e in &report.history {
        println!(
            "epoch {:3}  train {:.4e}  test {:.4e}",
            e.epoch, e.train_mse, e.test_mse
        );
    }
    Ok(())
}
