mod common;

use ba_swarm::dynamics::{InputSignal, Segment, SimulationTrace, SwarmProgram};
use ba_swarm::{mae, program, simulate, step, BasisConfig, ConcentrationMap, Partition};
use common::*;
use proptest::prelude::*;

fn unit_cfg(q: usize, rate: f64) -> BasisConfig {
    BasisConfig::new(Partition::uniform(&[(0.0, 1.0)], &[q]).unwrap(), 1.0, rate).unwrap()
}

fn closed_form(v0: f64, target: f64, rate: f64, t: f64) -> f64 {
    let d = (-rate * t).exp();
    v0 * d + target * (1.0 - d)
}

#[test]
fn constant_input_matches_closed_form() {
    let cfg = unit_cfg(10, 1.5);
    let map = program(&f3, &cfg).unwrap();
    let prog = SwarmProgram::single(cfg, 0.0, map).unwrap();
    let trace = simulate(
        &prog,
        &InputSignal::constant(vec![0.73]),
        0.0,
        8.0,
        0.02,
        0.4,
    )
    .unwrap();
    let target = f3(&[0.75]);
    assert_eq!(trace.rows.len(), 401);
    for row in &trace.rows {
        assert!((row.v - closed_form(0.4, target, 1.5, row.t)).abs() < TOL);
        assert!((row.e - (row.v_desired - row.v)).abs() == 0.0);
    }
}

#[test]
fn steps_compose() {
    let cfg = unit_cfg(10, 0.8);
    let map = program(&f2, &cfg).unwrap();
    for dt in [0.001, 0.37, 2.0] {
        let twice = step(
            step(0.2, &map, &cfg, &[0.4], dt).unwrap(),
            &map,
            &cfg,
            &[0.4],
            dt,
        )
        .unwrap();
        let once = step(0.2, &map, &cfg, &[0.4], 2.0 * dt).unwrap();
        assert!((twice - once).abs() < TOL);
    }
}

#[test]
fn repeated_steps_converge_to_drive_over_rate() {
    let cfg = unit_cfg(4, 2.0);
    let map = program(&|_: &[f64]| 0.9, &cfg).unwrap();
    let mut v = -3.0;
    for _ in 0..2000 {
        v = step(v, &map, &cfg, &[0.5], 0.01).unwrap();
    }
    assert!((v - 0.9).abs() < TOL);
}

#[test]
fn reprogramming_follows_switch_closed_form() {
    let cfg = unit_cfg(10, 1.0);
    let first = program(&f1, &cfg).unwrap();
    let second = program(&f2, &cfg).unwrap();
    let prog = SwarmProgram::new(
        cfg,
        vec![
            Segment {
                t_switch: 0.0,
                map: first,
            },
            Segment {
                t_switch: 7.0,
                map: second,
            },
        ],
    )
    .unwrap();
    let trace = simulate(
        &prog,
        &InputSignal::constant(vec![0.25]),
        0.0,
        30.0,
        0.05,
        0.0,
    )
    .unwrap();
    let (a, b) = (0.0625, (0.75f64).sin());
    let at_switch = closed_form(0.0, a, 1.0, 7.0);
    for row in &trace.rows {
        let expect = if row.t < 7.0 {
            closed_form(0.0, a, 1.0, row.t)
        } else {
            closed_form(at_switch, b, 1.0, row.t - 7.0)
        };
        assert!((row.v - expect).abs() < TOL, "t={}", row.t);
    }
    assert!((trace.rows.last().unwrap().v - b).abs() < 1e-9);
}

#[test]
fn splitting_a_segment_changes_nothing() {
    let cfg = unit_cfg(10, 1.0);
    let map = program(&f2, &cfg).unwrap();
    let input = InputSignal::Ramp {
        start: vec![0.0],
        end: vec![1.0],
        t_start: 0.0,
        t_end: 50.0,
    };
    let one = SwarmProgram::single(cfg.clone(), 0.0, map.clone()).unwrap();
    let two = SwarmProgram::new(
        cfg,
        vec![
            Segment {
                t_switch: 0.0,
                map: map.clone(),
            },
            Segment {
                t_switch: 20.0,
                map,
            },
        ],
    )
    .unwrap();
    let a = simulate(&one, &input, 0.0, 50.0, 0.1, 0.0).unwrap();
    let b = simulate(&two, &input, 0.0, 50.0, 0.1, 0.0).unwrap();
    assert_eq!(a.rows.len(), b.rows.len());
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!((x.t - y.t).abs() < 1e-9);
        assert!((x.v - y.v).abs() < TOL);
    }
}

#[test]
fn ramp_is_exact_with_crossing_aligned_steps() {
    // Independent route: chain closed forms cell by cell at the analytic
    // crossing times k/q · T of the ramp u = t/T.
    let q = 10;
    let cfg = unit_cfg(q, 1.0);
    let map = program(&f2, &cfg).unwrap();
    let prog = SwarmProgram::single(cfg, 0.0, map).unwrap();
    let input = InputSignal::Ramp {
        start: vec![0.0],
        end: vec![1.0],
        t_start: 0.0,
        t_end: 30.0,
    };
    let trace = simulate(&prog, &input, 0.0, 30.0, 0.7, 0.0).unwrap();
    let value_at = |t: f64| {
        let mut v = 0.0;
        let mut start = 0.0;
        for k in 1..=q {
            let end = 3.0 * k as f64;
            let target = f2(&[uniform_mid(k, 0.0, 1.0, q)]);
            if t <= end {
                return closed_form(v, target, 1.0, t - start);
            }
            v = closed_form(v, target, 1.0, end - start);
            start = end;
        }
        v
    };
    for row in &trace.rows {
        assert!((row.v - value_at(row.t)).abs() < 1e-11, "t={}", row.t);
    }
}

#[test]
fn rows_include_switch_and_jump_times() {
    let cfg = unit_cfg(10, 1.0);
    let map = program(&f1, &cfg).unwrap();
    let prog = SwarmProgram::new(
        cfg,
        vec![
            Segment {
                t_switch: 0.0,
                map: map.clone(),
            },
            Segment {
                t_switch: 1.234,
                map,
            },
        ],
    )
    .unwrap();
    let input = InputSignal::Step {
        levels: vec![vec![0.1], vec![0.9]],
        switch_times: vec![2.5551],
    };
    let trace = simulate(&prog, &input, 0.0, 4.0, 0.1, 0.0).unwrap();
    assert!(trace.rows.iter().any(|r| r.t == 1.234));
    assert!(trace.rows.iter().any(|r| r.t == 2.5551));
    assert!(trace.rows.windows(2).all(|w| w[0].t < w[1].t));
    assert_eq!(trace.rows.last().unwrap().t, 4.0);
}

#[test]
fn mae_of_unit_exponential() {
    // v0 = −1 toward 0 gives e(t) = e^{−t}.
    let cfg = unit_cfg(1, 1.0);
    let prog = SwarmProgram::single(cfg, 0.0, ConcentrationMap::new()).unwrap();
    let trace = simulate(
        &prog,
        &InputSignal::constant(vec![0.5]),
        0.0,
        600.0,
        0.01,
        -1.0,
    )
    .unwrap();
    let n = trace.rows.len() as f64;
    let geometric = 1.0 / (1.0 - (-0.01f64).exp()) / n;
    let m = mae(&trace).unwrap();
    assert!((m - geometric).abs() < 1e-12);
    assert!((m - 1.0 / 600.0).abs() < 2e-5);
}

fn check_decay(trace: &SimulationTrace, rate: f64) {
    // Between rows whose desired value is unchanged, |e| follows the
    // exponential envelope from the previous row.
    for w in trace.rows.windows(2) {
        if w[0].v_desired == w[1].v_desired {
            let envelope = w[0].e.abs() * (-rate * (w[1].t - w[0].t)).exp();
            assert!(w[1].e.abs() <= envelope + 1e-12, "t={}", w[1].t);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_for_any_step_size(
        rate in 0.1f64..4.0,
        dt in 0.005f64..0.5,
        v0 in -2.0f64..2.0,
        x in 0.0f64..=1.0,
    ) {
        let cfg = unit_cfg(10, rate);
        let map = program(&f2, &cfg).unwrap();
        let prog = SwarmProgram::single(cfg.clone(), 0.0, map).unwrap();
        let trace = simulate(&prog, &InputSignal::constant(vec![x]), 0.0, 10.0, dt, v0).unwrap();
        let target = f2(&cfg.partition.midpoint(&cfg.partition.cell_index(&[x]).unwrap()).unwrap());
        for row in &trace.rows {
            prop_assert!((row.v - closed_form(v0, target, rate, row.t)).abs() < TOL);
        }
        check_decay(&trace, rate);
    }

    #[test]
    fn error_decays_between_events(
        rate in 0.2f64..3.0,
        levels in prop::collection::vec(0.0f64..=1.0, 2..5),
    ) {
        let cfg = unit_cfg(8, rate);
        let prog = SwarmProgram::new(
            cfg.clone(),
            vec![
                Segment { t_switch: 0.0, map: program(&f1, &cfg).unwrap() },
                Segment { t_switch: 6.5, map: program(&f3, &cfg).unwrap() },
            ],
        )
        .unwrap();
        let switch_times: Vec<f64> = (1..levels.len()).map(|j| 4.0 * j as f64).collect();
        let input = InputSignal::Step {
            levels: levels.iter().map(|&l| vec![l]).collect(),
            switch_times,
        };
        let trace = simulate(&prog, &input, 0.0, 20.0, 0.05, 0.0).unwrap();
        check_decay(&trace, rate);
    }
}
