//! Free swing of the flexible-joint pendulum with the motor held still,
//! printing link angle and total energy once per 0.2 s.

use nalgebra::DVector;

use flexjoint::dynamics::{full_energy, step_rk4, RobotModel, RobotState, StepMode, DEFAULT_DT};

fn main() -> flexjoint::Result<()> {
    let model = RobotModel::pendulum(1.0, 1.0);
    let hold = DVector::from_element(1, 0.0);
    let mut st = RobotState::new(DVector::from_element(1, 0.6), DVector::zeros(1));
    st.theta_m = hold.clone();

    let e0 = full_energy(&model, &st)?;
    println!("   t      theta    energy drift");
    for k in 0..=3000 {
        if k % 200 == 0 {
            let e = full_energy(&model, &st)?;
            println!(
                "{:5.2}  {:+.5}  {:+.2e}",
                k as f64 * DEFAULT_DT,
                st.theta[0],
                e - e0
            );
        }
        st = step_rk4(&model, &st, &hold, DEFAULT_DT, StepMode::Reduced)?;
    }
    Ok(())
}
