mod common;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use common::*;
use flexjoint::config::{Config, Seeds};
use flexjoint::control::Gains;
use flexjoint::dynamics::{FrictionModel, RobotModel};
use flexjoint::network::OutputLayer;
use flexjoint::scenario::{
    collect_dataset, compute_metrics, crest_factor, gen_multisine, gen_sinusoid_family,
    read_dataset, read_run_log, run_header, run_scenario, run_with_regressor, spline_derivative,
    static_equilibrium, write_dataset, write_metrics, write_run_log, BufferSample, ControllerKind,
    DataBuffer, EventKind, RegressorSource, Scenario, SinusoidSpec, SinusoidTrajectory, Window,
};
use flexjoint::Error;

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn csv_bytes(log: &flexjoint::scenario::RunLog) -> Vec<u8> {
    let mut buf = Vec::new();
    write_run_log(&mut buf, log).unwrap();
    buf
}

#[test]
fn run_log_csv_round_trip() {
    let l = exact_pendulum(3.0, &PERTURBED_A, true);
    let r = run_with_regressor(
        &l.scenario,
        ControllerKind::Adaptive,
        l.regressor.clone(),
        &l.out,
    )
    .unwrap();
    let bytes = csv_bytes(&r.log);
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "time_s,theta_1,theta_d_1,e_1,s_1,theta_m_1,norm_a_hat,V,regressor_version"
    );
    let back = read_run_log(bytes.as_slice()).unwrap();
    assert_eq!(back.len(), 300);
    for (a, b) in r.log.rows.iter().zip(&back.rows) {
        assert!((a.time - b.time).abs() <= 1e-12);
        assert!((&a.e - &b.e).amax() <= 1e-12);
        assert!((&a.theta_m - &b.theta_m).amax() <= 1e-12);
        assert!((a.lyapunov.unwrap() - b.lyapunov.unwrap()).abs() <= 1e-12);
    }
    assert_eq!(back, r.log);
    assert_eq!(csv_bytes(&back), bytes);
}

#[test]
fn two_joint_header_and_bad_header() {
    assert_eq!(
        run_header(2, false).join(","),
        "time_s,theta_1,theta_2,theta_d_1,theta_d_2,e_1,e_2,s_1,s_2,theta_m_1,theta_m_2,norm_a_hat,regressor_version"
    );
    let bad = "time_s,theta_1,e_1\n0,0,0\n";
    assert!(matches!(read_run_log(bad.as_bytes()), Err(Error::Parse(_))));
}

#[test]
fn dataset_csv_round_trip() {
    let model = RobotModel::two_link_arm();
    let family = gen_sinusoid_family(
        2,
        (0.1, 0.3),
        (0.1, 0.3),
        2,
        300,
        100.0,
        &[(-0.5, 0.5); 2],
        7,
    )
    .unwrap();
    let data = collect_dataset(&model, &family, 100.0).unwrap();
    let mut buf = Vec::new();
    write_dataset(&mut buf, &data).unwrap();
    let header = String::from_utf8(buf.clone())
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert!(header.starts_with("theta_dot_r_1,theta_dot_r_2,theta_1,theta_2,"));
    assert!(header.ends_with("theta_m_1,theta_m_2"));
    assert_eq!(read_dataset(buf.as_slice()).unwrap(), data);
}

#[test]
fn metrics_csv_layout() {
    let l = exact_pendulum(4.0, &PERTURBED_A, true);
    let r = run_with_regressor(&l.scenario, ControllerKind::Adaptive, l.regressor, &l.out).unwrap();
    let rep = compute_metrics(&r.log, &[Window::new(0.0, 2.0), Window::new(2.0, 4.0)]).unwrap();
    assert!(rep.linf[0] <= rep.l2[0]);
    let sum: f64 = r
        .log
        .rows
        .iter()
        .filter(|x| x.time < 2.0)
        .map(|x| x.e[0] * x.e[0])
        .sum();
    assert!((rep.window(0).frobenius - sum.sqrt()).abs() < 1e-12);
    let mut buf = Vec::new();
    write_metrics(&mut buf, &rep).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "joint,l2,linf,frob_0-2s,frob_2-4s");
    assert!(lines[1].starts_with("1,"));
    assert!(lines[2].starts_with("all,"));
    assert_eq!(lines.len(), 3);
    assert!(compute_metrics(&r.log, &[Window::new(10.0, 12.0)]).is_err());
}

#[test]
fn pd_static_offset_matches_force_balance() {
    // Rest at θ = θ_d + e with θ_m = θ_d − K1·e:
    // k_p(θ_d − K1 e) = m g l sin(θ_d + e) + k_p(θ_d + e).
    let model =
        RobotModel::pendulum(1.0, 1.0).with_friction(FrictionModel::viscous_coulomb(0.5, 0.0));
    let theta_d = 0.4;
    let (k_p, k1, mgl) = (model.joint_stiffness, 0.2, 9.81);
    let mut e = 0.0f64;
    for _ in 0..50 {
        let f = k_p * (theta_d - k1 * e) - mgl * (theta_d + e).sin() - k_p * (theta_d + e);
        let df = -k_p * k1 - mgl * (theta_d + e).cos() - k_p;
        e -= f / df;
    }
    let gains = Gains::uniform(1, 1, 1.0, 1.0, 0.0, 1.0);
    let traj = SinusoidTrajectory::new(vec![SinusoidSpec::new(0.0, 0.5, 0.0, theta_d)]);
    let sc = Scenario::new(model, gains, traj, 30.0);
    let r = run_with_regressor(
        &sc,
        ControllerKind::Pd,
        RegressorSource::Analytic(flexjoint::control::AnalyticPendulum {
            model: RobotModel::pendulum(1.0, 1.0),
        }),
        &OutputLayer::zeros(5),
    )
    .unwrap();
    assert!(!r.log.has_lyapunov());
    let last = r.log.rows.last().unwrap();
    assert!(
        (last.e[0] - e).abs() < 1e-6,
        "steady error {} vs {e}",
        last.e[0]
    );
    assert!(e < -0.05);
}

#[test]
fn events_change_the_plant_at_their_tick() {
    let base = exact_pendulum(2.0, &TRUE_A, false);
    let mut sc = base.scenario.clone();
    sc.events = vec![];
    let heavy = sc.clone().with_event(
        1.0,
        EventKind::SwitchFriction {
            friction: FrictionModel::stribeck(0.2, 0.6, 2.0, 0.1),
        },
    );
    let run = |s: &Scenario| {
        run_with_regressor(
            s,
            ControllerKind::Adaptive,
            base.regressor.clone(),
            &base.out,
        )
        .unwrap()
        .log
    };
    let (a, b) = (run(&sc), run(&heavy));
    let split = a.rows.iter().position(|r| r.time >= 1.0 - 1e-9).unwrap();
    // V at the switch tick already uses the new friction parameters.
    assert_eq!(a.rows[..split], b.rows[..split]);
    assert_eq!(a.rows[split].theta_m, b.rows[split].theta_m);
    assert_ne!(a.rows[split + 1].theta, b.rows[split + 1].theta);

    let payload = sc
        .clone()
        .with_event(0.5, EventKind::AttachPayload { mass: 0.3 });
    assert_ne!(run(&payload).rows[60].e, a.rows[60].e);
}

#[test]
fn scenario_validation() {
    let sc = exact_pendulum(10.0, &TRUE_A, false).scenario;
    let bad = |s: Scenario| matches!(s.validate(), Err(Error::Config(_)));
    assert!(bad(sc
        .clone()
        .with_event(11.0, EventKind::EnableAdaptation)));
    assert!(bad(sc
        .clone()
        .with_event(-1.0, EventKind::EnableAdaptation)));
    assert!(bad(sc
        .clone()
        .with_event(5.0, EventKind::EnableAdaptation)
        .with_event(4.0, EventKind::BeginBuffering)));
    assert!(bad(sc
        .clone()
        .with_event(1.0, EventKind::AttachPayload { mass: -1.0 })));
    let weak_static = sc.clone().with_event(
        1.0,
        EventKind::SwitchFriction {
            friction: FrictionModel::stribeck(0.1, 0.5, 0.2, 0.1),
        },
    );
    assert!(matches!(
        weak_static.validate(),
        Err(Error::InvalidModel(_))
    ));
    let mut fast = sc.clone();
    fast.retrain_period = 0.5;
    assert!(bad(fast));
    let same_time = sc
        .with_event(5.0, EventKind::EnableAdaptation)
        .with_event(5.0, EventKind::BeginBuffering);
    assert!(same_time.validate().is_ok());
}

#[test]
fn divergence_reports_time() {
    let mut l = exact_pendulum(5.0, &TRUE_A, false);
    l.scenario.gains.k1 = 1e4;
    let err = run_with_regressor(&l.scenario, ControllerKind::Pd, l.regressor, &l.out).unwrap_err();
    match err {
        Error::Diverged { time } => assert!(time > 0.0 && time < 5.0),
        other => panic!("unexpected {other}"),
    }
}

fn quick_config() -> Config {
    let mut cfg = Config::load(config_path("friction_switch.toml")).unwrap();
    cfg.training.epochs = 5;
    cfg.scenario.as_mut().unwrap().duration = 33.0;
    cfg
}

#[test]
fn retraining_swaps_weights_only_between_ticks() {
    let cfg = quick_config();
    let seeds = Seeds::from_master(0);
    let data = cfg.collect(&seeds).unwrap();
    let (net, out, _) = cfg.pretrain(&data, &seeds).unwrap();
    let sc = cfg.scenario(seeds.scenario).unwrap();
    let r = run_scenario(&sc, ControllerKind::AdaptiveWithRetrain, &net, &out).unwrap();

    let times: Vec<f64> = r.retrains.iter().map(|x| x.time).collect();
    assert_eq!(times.len(), 2, "{times:?}");
    assert!((times[0] - 21.0).abs() < 1e-9 && (times[1] - 27.0).abs() < 1e-9);
    for rec in &r.retrains {
        assert_eq!(rec.samples, 600);
        assert!(rec.buffer_mse_after < rec.buffer_mse_before);
    }
    // The version counter only steps at retrain ticks.
    for w in r.log.rows.windows(2) {
        let step = w[1].regressor_version - w[0].regressor_version;
        assert!(step <= 1);
        if step == 1 {
            assert!(times.iter().any(|t| (t - w[1].time).abs() < 1e-9));
        }
    }
    assert_eq!(r.log.rows.last().unwrap().regressor_version, 2);

    // Without retraining the regressor is never swapped.
    let plain = run_scenario(&sc, ControllerKind::Adaptive, &net, &out).unwrap();
    assert!(plain.retrains.is_empty());
    assert!(plain.log.rows.iter().all(|x| x.regressor_version == 0));
    let split = plain
        .log
        .rows
        .iter()
        .position(|x| x.time >= 21.0 - 1e-9)
        .unwrap();
    assert_eq!(plain.log.rows[..split], r.log.rows[..split]);
    assert_ne!(plain.log.rows[split].theta_m, r.log.rows[split].theta_m);
}

#[test]
fn equal_seeds_give_identical_csv() {
    let cfg = quick_config();
    let go = || {
        let seeds = Seeds::from_master(5);
        let data = cfg.collect(&seeds).unwrap();
        let (net, out, _) = cfg.pretrain(&data, &seeds).unwrap();
        let sc = cfg.scenario(seeds.scenario).unwrap();
        csv_bytes(
            &run_scenario(&sc, ControllerKind::AdaptiveWithRetrain, &net, &out)
                .unwrap()
                .log,
        )
    };
    assert_eq!(go(), go());
}

#[test]
fn data_buffer_is_bounded_and_ordered() {
    let mut buf = DataBuffer::new(3);
    let sample = |t: f64| BufferSample {
        time: t,
        theta: v(&[t]),
        theta_dot: v(&[1.0]),
        theta_m: v(&[t]),
    };
    for k in 0..5 {
        buf.push(sample(k as f64)).unwrap();
        assert!(buf.len() <= 3);
    }
    let times: Vec<f64> = buf.samples().map(|s| s.time).collect();
    assert_eq!(times, vec![2.0, 3.0, 4.0]);
    assert!(buf.push(sample(4.0)).is_err());
    assert_eq!(buf.to_batch(1.0).unwrap().len(), 3);
}

#[test]
fn spline_derivative_of_sinusoid() {
    let h = 0.01;
    let w = 2.0 * PI * 0.7;
    let vel: Vec<f64> = (0..1000).map(|i| 0.8 * (w * i as f64 * h).sin()).collect();
    let acc = spline_derivative(&vel, h).unwrap();
    let worst = acc
        .iter()
        .enumerate()
        .map(|(i, a)| (a - 0.8 * w * (w * i as f64 * h).cos()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "max error {worst}");
}

#[test]
fn equilibrium_excitation_gives_zero_acceleration() {
    let cmd = DMatrix::from_fn(2, 500, |j, _| if j == 0 { 0.3 } else { -0.2 });
    let theta_eq = |m: &RobotModel| static_equilibrium(m, &cmd.column(0).into_owned()).unwrap();

    let viscous =
        RobotModel::two_link_arm().with_friction(FrictionModel::viscous_coulomb(0.1, 0.0));
    let data = collect_dataset(&viscous, &[cmd.clone()], 100.0).unwrap();
    assert!(data.inputs.columns(6, 2).amax() < 1e-9);
    assert!((data.inputs.row(499).columns(2, 2).transpose() - theta_eq(&viscous)).amax() < 1e-9);

    // With Coulomb friction and no stiction the velocity chatters around zero
    // at the integration step; the sampled acceleration still dies out.
    let cmd = DMatrix::from_fn(2, 1000, |j, _| if j == 0 { 0.3 } else { -0.2 });
    let data = collect_dataset(&RobotModel::two_link_arm(), &[cmd], 100.0).unwrap();
    let late = data.inputs.view((800, 6), (195, 2)).amax();
    assert!(late < 1e-6, "max |acc| after 8 s: {late}");
}

#[test]
fn multisine_properties() {
    let u = gen_multisine(16, 0.1, 1.0, 60.0, 100.0).unwrap();
    assert_eq!(u.len(), 6000);
    let zero_phase: Vec<f64> = (0..6000)
        .map(|i| {
            (1..=16)
                .map(|k| (2.0 * PI * k as f64 * 0.1 * i as f64 / 100.0).cos())
                .sum()
        })
        .collect();
    assert!(crest_factor(&u) < crest_factor(&zero_phase));
    assert!(gen_multisine(16, 0.1, 1.0, 60.0, 3.0).is_err());
}

#[test]
fn sinusoid_family_shape_limits_determinism() {
    let limits: Vec<(f64, f64)> = (0..7).map(|j| (-1.0 - 0.1 * j as f64, 0.8)).collect();
    let fam = gen_sinusoid_family(30, (0.1, 0.6), (0.05, 0.5), 7, 2500, 100.0, &limits, 3).unwrap();
    assert_eq!(fam.len(), 30);
    for m in &fam {
        assert_eq!(m.shape(), (7, 2500));
        for j in 0..7 {
            assert!(m
                .row(j)
                .iter()
                .all(|x| *x >= limits[j].0 && *x <= limits[j].1));
        }
    }
    assert_eq!(
        fam,
        gen_sinusoid_family(30, (0.1, 0.6), (0.05, 0.5), 7, 2500, 100.0, &limits, 3).unwrap()
    );
    assert!(
        gen_sinusoid_family(1, (2.0, 3.0), (0.1, 0.2), 1, 10, 100.0, &[(-1.0, 1.0)], 0).is_err()
    );
}
