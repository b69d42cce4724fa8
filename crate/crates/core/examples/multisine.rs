//! Schroeder multisine excitation: compares its crest factor with the
//! zero-phase sum of the same harmonics and writes a pendulum dataset.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use flexjoint::dynamics::{FrictionModel, RobotModel};
use flexjoint::scenario::{collect_dataset, crest_factor, gen_multisine, save_dataset};

fn main() -> flexjoint::Result<()> {
    let (harmonics, f0, rate, duration) = (16, 0.1, 100.0, 60.0);
    let u = gen_multisine(harmonics, f0, 1.0, duration, rate)?;
    let flat: Vec<f64> = (0..u.len())
        .map(|i| {
            let t = i as f64 / rate;
            (1..=harmonics)
                .map(|k| (2.0 * PI * k as f64 * f0 * t).cos())
                .sum()
        })
        .collect();
    println!(
        "crest factor: schroeder {:.3}, zero phase {:.3}",
        crest_factor(&u),
        crest_factor(&flat)
    );

    let model =
        RobotModel::pendulum(1.0, 1.0).with_friction(FrictionModel::viscous_coulomb(0.1, 0.05));
    let data = collect_dataset(&model, &[DMatrix::from_row_slice(1, u.len(), &u)], rate)?;
    let path = std::env::temp_dir().join("pendulum_multisine.csv");
    save_dataset(&path, &data)?;
    println!("{} samples written to {}", data.len(), path.display());
    Ok(())
}
