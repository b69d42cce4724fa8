//! Adaptive loop on the pendulum with the exact regressor and a wrong
//! initial parameter estimate. The log carries the Lyapunov value.

use nalgebra::DVector;

use flexjoint::control::{AnalyticPendulum, Gains};
use flexjoint::dynamics::{pendulum_parameters, FrictionModel, RobotModel};
use flexjoint::network::OutputLayer;
use flexjoint::scenario::{
    run_with_regressor, ControllerKind, EventKind, RegressorSource, Scenario, SinusoidSpec,
    SinusoidTrajectory,
};

fn main() -> flexjoint::Result<()> {
    let model =
        RobotModel::pendulum(1.0, 1.0).with_friction(FrictionModel::viscous_coulomb(0.1, 0.05));
    let a = pendulum_parameters(&model)?;
    let a_hat = a.component_mul(&DVector::from_vec(vec![1.5, 0.5, 1.5, 0.5, 1.5]));

    let traj = SinusoidTrajectory::new(vec![SinusoidSpec::new(0.2, 0.5, 0.0, 0.0)]);
    let mut sc = Scenario::new(
        model.clone(),
        Gains::uniform(1, 5, 15.0, 2.0, 0.001, 0.05),
        traj,
        30.0,
    )
    .with_event(0.0, EventKind::EnableAdaptation);
    sc.initial_error = DVector::from_element(1, 0.05);

    let r = run_with_regressor(
        &sc,
        ControllerKind::Adaptive,
        RegressorSource::Analytic(AnalyticPendulum { model }),
        &OutputLayer::new(a_hat),
    )?;
    for row in r.log.rows.iter().step_by(300) {
        println!(
            "t {:5.1}  e {:+.2e}  |a_hat| {:.3}  V {:.3e}",
            row.time,
            row.e[0],
            row.norm_a_hat,
            row.lyapunov.unwrap_or(f64::NAN)
        );
    }
    let fmt = |v: &DVector<f64>| {
        v.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("true a  {}", fmt(&a));
    println!("a_hat   {}", fmt(&r.final_output.a_hat));
    Ok(())
}
