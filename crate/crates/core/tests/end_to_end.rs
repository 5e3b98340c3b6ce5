//! End-to-end runs across schedulers, error policies and crafted initial
//! configurations, with the independent closeness oracle as the judge.

use apf_core::analysis::{has_unbreakable_symmetry, Configuration, Pattern};
use apf_core::geometry::Point;
use apf_core::motion::{ErrorPolicy, MovementModel};
use apf_core::sim::{run, AsyncDelays, Outcome, Scheduler, SimConfig, SsyncPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

pub fn random_pattern(rng: &mut ChaCha8Rng, n: usize, epsilon: f64) -> Pattern {
    loop {
        let points: Vec<Point> =
            (0..n).map(|_| pt(rng.gen::<f64>() * 10.0, rng.gen::<f64>() * 10.0)).collect();
        let pattern = Pattern { points, epsilon };
        if pattern.validate().is_ok() {
            return pattern;
        }
    }
}

pub fn random_initial(rng: &mut ChaCha8Rng, n: usize) -> Configuration {
    loop {
        let positions: Vec<Point> =
            (0..n).map(|_| pt(rng.gen::<f64>() * 10.0, rng.gen::<f64>() * 10.0)).collect();
        let config = Configuration::new(positions);
        if config.validate().is_ok() && !has_unbreakable_symmetry(&config) {
            return config;
        }
    }
}

fn model() -> MovementModel {
    MovementModel::try_new(0.3, 0.3).unwrap()
}

fn expect_success(
    initial: &Configuration,
    pattern: &Pattern,
    cfg: &SimConfig,
    what: &str,
) {
    let (report, _) = run(initial, pattern, &model(), cfg);
    assert_eq!(
        report.outcome,
        Outcome::Terminated,
        "{what}: outcome {:?}, steps {}, violations {:?}",
        report.outcome,
        report.steps,
        report.violations
    );
    assert_eq!(report.epsilon_close, Some(true), "{what}: final configuration not close");
    assert!(report.max_concurrent_moves <= 1, "{what}: sequentiality violated");
}

#[test]
fn random_instances_ssync() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let policies = [
        ErrorPolicy::None,
        ErrorPolicy::Uniform,
        ErrorPolicy::Adversarial(apf_core::motion::AdversarialMode::AwayFromGoal),
    ];
    for (i, n) in (4..=8).enumerate() {
        for (j, &policy) in policies.iter().enumerate() {
            let eps = if (i + j) % 2 == 0 { 0.1 } else { 0.05 };
            let pattern = random_pattern(&mut rng, n, eps);
            let initial = random_initial(&mut rng, n);
            let cfg = SimConfig::new(
                Scheduler::Ssync(SsyncPolicy::AdversarialDelay(3)),
                policy,
                1000 + (i * 10 + j) as u64,
            );
            expect_success(&initial, &pattern, &cfg, &format!("ssync n={n} policy {j}"));
        }
    }
}

#[test]
fn random_instances_async_rush() {
    let mut rng = ChaCha8Rng::seed_from_u64(4048);
    for n in 4..=7 {
        let pattern = random_pattern(&mut rng, n, 0.1);
        let initial = random_initial(&mut rng, n);
        let cfg = SimConfig::new(
            Scheduler::Async(AsyncDelays { rush: true, ..AsyncDelays::default() }),
            ErrorPolicy::Uniform,
            77 + n as u64,
        );
        let (report, _) = run(&initial, &pattern, &model(), &cfg);
        assert_eq!(
            report.outcome,
            Outcome::Terminated,
            "async n={n}: {:?} violations {:?}",
            report.outcome,
            report.violations
        );
        assert_eq!(report.epsilon_close, Some(true));
        assert!(report.max_busy_moving <= 1);
    }
}

#[test]
fn crafted_symmetric_initials() {
    // Configurations that exercise every subphase-1.1 case before the rest
    // of the pipeline.
    let crafted: Vec<(&str, Vec<Point>)> = vec![
        ("e1-axis-noncritical", vec![pt(0.0, 0.0), pt(2.0, 0.0), pt(1.0, 1.0), pt(1.0, 0.4)]),
        ("e4-isosceles", vec![pt(0.0, 0.0), pt(4.0, 0.0), pt(2.0, 3.0), pt(2.0, 1.0)]),
        (
            "e5-antipodal",
            vec![pt(0.0, -2.0), pt(0.0, 2.0), pt(1.0, 0.5), pt(-1.0, 0.5)],
        ),
        (
            "center-cross",
            vec![pt(0.0, 0.0), pt(2.0, 0.0), pt(-2.0, 0.0), pt(0.0, 2.0), pt(0.0, -2.0)],
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (name, positions) in crafted {
        let n = positions.len();
        let initial = Configuration::new(positions);
        assert!(!has_unbreakable_symmetry(&initial), "{name} should be breakable");
        let pattern = random_pattern(&mut rng, n, 0.1);
        let cfg = SimConfig::new(Scheduler::Ssync(SsyncPolicy::All), ErrorPolicy::Uniform, 5);
        expect_success(&initial, &pattern, &cfg, name);
    }
}

#[test]
fn already_terminal_initial_stops_at_zero() {
    // A configuration that is epsilon-close AND has the structure formed
    // terminates immediately; one that is merely close but unstructured
    // still reworks itself.
    let pattern = Pattern {
        points: vec![pt(0.0, 0.0), pt(4.0, 0.0), pt(1.0, 1.0), pt(2.5, 0.8)],
        epsilon: 0.05,
    };
    assert!(pattern.validate().is_ok());
    let initial = Configuration::new(pattern.points.clone());
    let cfg = SimConfig::new(Scheduler::Ssync(SsyncPolicy::All), ErrorPolicy::None, 1);
    let (report, _) = run(&initial, &pattern, &model(), &cfg);
    assert_eq!(report.outcome, Outcome::Terminated, "violations: {:?}", report.violations);
    if report.steps == 0 {
        assert_eq!(report.final_positions, pattern.points);
    }
}

#[test]
fn frame_independence_of_world_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for case in 0..4 {
        let n = 4 + case % 3;
        let pattern = random_pattern(&mut rng, n, 0.1);
        let initial = random_initial(&mut rng, n);
        let mut cfg =
            SimConfig::new(Scheduler::Ssync(SsyncPolicy::All), ErrorPolicy::None, 11 + case as u64);
        cfg.frame_seed = Some(1);
        let (r1, t1) = run(&initial, &pattern, &model(), &cfg);
        cfg.frame_seed = Some(2);
        let (r2, t2) = run(&initial, &pattern, &model(), &cfg);
        assert_eq!(r1.outcome, Outcome::Terminated, "violations: {:?}", r1.violations);
        // World positions agree up to floating-point rotation noise.
        for (a, b) in r1.final_positions.iter().zip(&r2.final_positions) {
            assert!(a.dist(*b) <= 1e-7, "case {case}: frames leaked ({a:?} vs {b:?})");
        }
        // The world-frame move sequences agree event by event.
        let moves1: Vec<_> = t1
            .iter()
            .filter(|e| e.kind == apf_core::sim::EventKind::MoveEnd)
            .map(|e| (e.robot, e.payload.realized.unwrap()))
            .collect::<Vec<_>>();
        let moves2: Vec<_> = t2
            .iter()
            .filter(|e| e.kind == apf_core::sim::EventKind::MoveEnd)
            .map(|e| (e.robot, e.payload.realized.unwrap()))
            .collect::<Vec<_>>();
        assert_eq!(moves1.len(), moves2.len(), "case {case}");
        for ((ra, pa), (rb, pb)) in moves1.iter().zip(&moves2) {
            assert_eq!(ra, rb, "case {case}: different mover order");
            assert!(pa.dist(*pb) <= 1e-7, "case {case}: diverged moves");
        }
    }
}
