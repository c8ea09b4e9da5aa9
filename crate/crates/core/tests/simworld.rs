use proptest::prelude::*;
use suave::simworld::{Command, Kinematics, Pipeline, Point2, ThrusterEvent, VehicleState, WaterVisibilityModel, World};

fn polyline() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 2..6)
}

/// Nearest point found by sampling every segment densely.
fn sampled_nearest(points: &[Point2<f64>], p: &Point2<f64>) -> f64 {
    let mut best = f64::INFINITY;
    for w in points.windows(2) {
        for i in 0..=2000 {
            let q = w[0].lerp(&w[1], i as f64 / 2000.0);
            best = best.min(q.distance(p));
        }
    }
    best
}

fn world(seed: u64, heading: f64) -> World<f64> {
    World::new(
        0.1,
        Pipeline::straight(60.0).unwrap(),
        VehicleState { x: 10.0, y: 3.0, z: 1.5, heading },
        Kinematics::default(),
        World::<f64>::seeded_rng(seed),
    )
    .unwrap()
}

fn command() -> impl Strategy<Value = Command<f64>> {
    prop_oneof![
        (-50.0f64..50.0, -50.0f64..50.0, 0.0f64..4.0).prop_map(|(x, y, z)| Command::Waypoint { x, y, z }),
        (-4.0f64..4.0, 0.0f64..4.0).prop_map(|(heading, altitude)| Command::Velocity { heading, altitude }),
        Just(Command::Hold),
    ]
}

proptest! {
    #[test]
    fn nearest_matches_dense_sampling(raw in polyline(), px in -25.0f64..25.0, py in -25.0f64..25.0) {
        let points: Vec<Point2<f64>> = raw.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        prop_assume!(points.windows(2).all(|w| w[0].distance(&w[1]) > 1e-3));
        let line = Pipeline::new(points.clone()).unwrap();
        let p = Point2::new(px, py);
        let proj = line.nearest(&p);
        let oracle = sampled_nearest(&points, &p);
        // Dense sampling overestimates by at most half a sample spacing.
        let spacing = points.windows(2).map(|w| w[0].distance(&w[1])).fold(0.0, f64::max) / 2000.0;
        prop_assert!(proj.distance <= oracle + 1e-9);
        prop_assert!(oracle - proj.distance <= spacing);
        prop_assert!((proj.point.distance(&p) - proj.distance).abs() < 1e-9);
        prop_assert!(proj.arclength >= 0.0 && proj.arclength <= line.total_length() + 1e-9);
        prop_assert!(line.point_at(proj.arclength).distance(&proj.point) < 1e-6);
    }

    #[test]
    fn visibility_bounded_and_periodic(min in 0.1f64..3.0, span in 0.0f64..3.0, period in 1.0f64..200.0,
                                       phase in -3.2f64..3.2, t in 0.0f64..1000.0) {
        let m = WaterVisibilityModel::new(min, min + span, period, phase).unwrap();
        let v = m.at(t);
        prop_assert!(v >= m.min && v <= m.max);
        prop_assert!((m.at(t + period) - v).abs() < 1e-9);
    }

    #[test]
    fn step_respects_kinematic_limits(seed in any::<u64>(), heading in -3.1f64..3.1, failed in 0usize..4,
                                      commands in prop::collection::vec(command(), 1..40)) {
        let mut w = world(seed, heading);
        let events = (1..=failed).map(|i| ThrusterEvent { time: 0.0, thruster: i }).collect();
        w.set_failure_schedule(events).unwrap();
        w.inject_failures();
        let k = *w.kinematics();
        let dt = w.dt();
        for c in commands {
            let before = *w.vehicle();
            w.step(c);
            let after = *w.vehicle();
            let moved = before.horizontal().distance(&after.horizontal());
            prop_assert!(moved <= w.effective_speed() * dt + 1e-12);
            prop_assert!((after.z - before.z).abs() <= k.vertical_speed * dt + 1e-12);
            prop_assert!(after.z >= 0.0);
            let turn = suave::scalar::normalize_angle(after.heading - before.heading).abs();
            prop_assert!(turn <= (k.max_turn_rate + failed as f64 * k.heading_noise) * dt + 1e-12);
        }
    }

    #[test]
    fn detection_monotone_in_visibility(y in -3.0f64..3.0, z in 0.0f64..3.0, v in 0.0f64..4.0, dv in 0.0f64..2.0) {
        let w = World::new(
            0.1,
            Pipeline::straight(60.0).unwrap(),
            VehicleState { x: 30.0, y, z, heading: 0.0 },
            Kinematics::default(),
            World::<f64>::seeded_rng(0),
        ).unwrap();
        if w.detect_pipeline(v).is_some() {
            prop_assert!(w.detect_pipeline(v + dv).is_some());
        }
    }

    #[test]
    fn world_is_deterministic(seed in any::<u64>(), commands in prop::collection::vec(command(), 1..30)) {
        let run = || {
            let mut w = world(seed, 0.3);
            w.set_failure_schedule(vec![ThrusterEvent { time: 0.5, thruster: 2 }]).unwrap();
            for c in &commands {
                w.inject_failures();
                w.step(*c);
            }
            *w.vehicle()
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn single_precision_world_runs() {
    let mut w = World::<f32>::new(
        0.1,
        Pipeline::straight(10.0).unwrap(),
        VehicleState { x: 0.0, y: 0.5, z: 0.5, heading: 0.0 },
        Kinematics::default(),
        World::<f32>::seeded_rng(3),
    )
    .unwrap();
    for _ in 0..20 {
        w.step(Command::Velocity { heading: 0.0, altitude: 0.5 });
    }
    assert!((w.vehicle().x - 1.0).abs() < 1e-4);
    assert!(w.detect_pipeline(1.0).is_some());
}
